"""Schemas

Base models shared by the configuration schemas, the reports and the numerical domain types.

Configurations and reports are pydantic models that reject unknown keys, so a typo in a JSON config is an error
instead of a silently ignored knob. Numerical containers hold numpy arrays and are frozen after validation.
"""

from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict


class LabModel(BaseModel):
    """
    A strict base for configs and reports.
    """

    model_config = ConfigDict(
        extra="forbid",
        populate_by_name=True,
        use_enum_values=True,
        ser_json_inf_nan="constants",
    )

    # pylint: disable=too-many-arguments,arguments-differ
    def model_dump(  # type: ignore[override]
        self,
        *,
        mode: Literal["json", "python"] | str = "json",
        include: Any | None = None,
        exclude: Any | None = None,
        context: Any | None = None,
        by_alias: bool = True,
        exclude_unset: bool = False,
        exclude_defaults: bool = False,
        exclude_none: bool = False,
        round_trip: bool = False,
        warnings: Literal["none", "warn", "error"] | bool = True,
        serialize_as_any: bool = False,
    ) -> dict[str, Any]:
        return super().model_dump(
            mode=mode,
            include=include,
            exclude=exclude,
            context=context,
            by_alias=by_alias,
            exclude_unset=exclude_unset,
            exclude_defaults=exclude_defaults,
            exclude_none=exclude_none,
            round_trip=round_trip,
            warnings=warnings,
            serialize_as_any=serialize_as_any,
        )


class ArrayModel(BaseModel):
    """
    A frozen container for numpy arrays.
    """

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
        extra="forbid",
        use_enum_values=True,
    )


def frozen_array(value: Any, ndim: int, name: str) -> np.ndarray:
    """Copies ``value`` into a read-only float64 array of the given rank."""
    array = np.array(value, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimension(s), got shape {array.shape}")
    array.setflags(write=False)
    return array

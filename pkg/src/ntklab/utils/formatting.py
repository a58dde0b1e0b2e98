"""
Formatting utilities.
"""

import hashlib
import json
import math
from typing import Any, Optional


def format_float(value: Optional[float]) -> str:
    """
    Renders a float with 17 significant digits so that it round-trips exactly.

    Args:
        value (float | None): The value to render. ``None`` renders as an empty field.
    """
    if value is None:
        return ""
    if math.isnan(value):
        return "nan"
    return format(float(value), ".17g")


def parse_float(field: str) -> Optional[float]:
    """Inverse of :func:`format_float`."""
    field = field.strip()
    return None if field == "" else float(field)


def canonical_json(payload: Any) -> str:
    """Serializes a JSON-compatible payload with sorted keys and no insignificant whitespace."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_hash(payload: Any) -> str:
    """SHA-256 of the canonical JSON form of a configuration."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()

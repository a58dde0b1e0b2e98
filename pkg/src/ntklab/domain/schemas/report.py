"""Response schemas written by the command line: spectrum tables, suite reports and manifests."""

from typing import Any, Optional

from pydantic import Field, model_validator

from ntklab.domain.schema_model import LabModel


class SpectrumRow(LabModel):
    h: int
    value: float
    multiplicity: int
    l_start: int
    l_end: int
    quadrature: Optional[float] = None
    relative_error: Optional[float] = None


class SpectrumResponse(LabModel):
    d: int
    h_max: int
    lambda_1: float
    entries: list[SpectrumRow]
    max_relative_error: Optional[float] = None
    max_vanishing_error: Optional[float] = None
    oracle_passed: Optional[bool] = None


class SeedOutcome(LabModel):
    """Per-seed indicators and the measurements behind them."""

    seed: int
    passed: bool = Field(alias="pass")
    checks: dict[str, bool]
    values: dict[str, float]


class SuiteReport(LabModel):
    """Seed-frequency verdict of one suite.

    ``marginals`` holds the pass fraction of each check and ``frequency`` the fraction of seeds passing all of them.
    The verdict requires every marginal to reach its threshold and every aggregate (cross-seed) check to hold.
    """

    suite: str
    config: dict[str, Any]
    thresholds: dict[str, float]
    per_seed: list[SeedOutcome]
    marginals: dict[str, float]
    frequency: float = Field(ge=0.0, le=1.0)
    aggregates: dict[str, bool] = {}
    surrogate_flags: dict[str, bool] = {}
    informational: dict[str, Any] = {}
    verdict: bool

    @model_validator(mode="after")
    def _check_verdict(self) -> "SuiteReport":
        expected = all(self.marginals[key] >= threshold for key, threshold in self.thresholds.items()) and all(
            self.aggregates.values()
        )
        if self.verdict != expected:
            raise ValueError("verdict must follow from the marginals, thresholds and aggregates")
        return self


class Manifest(LabModel):
    """What produced a set of artifacts: command, config hash, seeds and code version."""

    command: str
    config_hash: str
    seeds: list[int]
    version: str
    artifacts: list[str]


class VerifySummary(LabModel):
    """One line per suite, printed by ``verify`` after the reports are written."""

    seeds: list[int]
    verdicts: dict[str, bool]
    frequencies: dict[str, float]

"""Verification suite configurations.

Every threshold left as ``None`` falls back to :class:`ntklab.settings.suite_settings.SuiteSettings`.
"""

from typing import Optional

from pydantic import Field, field_validator

from ntklab.domain.models.enums import NoiseKind, SuiteName
from ntklab.domain.schema_model import LabModel
from ntklab.domain.schemas.config import IoSpec, NoiseSpec, RegressionSpec, SeedsSpec

Frequency = Optional[float]


def _linear(norm: float) -> RegressionSpec:
    return RegressionSpec(norm=norm)


class EventsSuiteConfig(LabModel):
    d: int = Field(default=16, ge=3)
    n: int = Field(default=512, ge=1)
    m: int = Field(default=16384, ge=2)
    threshold: Frequency = Field(default=None, ge=0.0, le=1.0)


class KernelSuiteConfig(LabModel):
    d: int = Field(default=16, ge=3)
    probes: int = Field(default=2048, ge=64)
    widths: list[int] = [256, 1024, 4096, 16384]
    threshold: Frequency = Field(default=None, ge=0.0, le=1.0)

    @field_validator("widths")
    @classmethod
    def _check_widths(cls, value: list[int]) -> list[int]:
        if len(value) < 2 or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("widths must be at least two strictly increasing values")
        if any(width < 2 or width % 2 for width in value):
            raise ValueError("widths must be even")
        return value


class OverfitSuiteConfig(LabModel):
    d: int = Field(default=10, ge=3)
    n: int = Field(default=200, ge=1)
    m: int = Field(default=4096, ge=2)
    eta: float = Field(default=0.25, gt=0.0)
    epsilon: float = Field(default=0.1, gt=0.0, lt=1.0)
    f: RegressionSpec = _linear(0.9)
    noise: NoiseSpec = NoiseSpec()
    checkpoint_every: int = Field(default=10, ge=1)
    risk_threshold: Frequency = Field(default=None, ge=0.0, le=1.0)
    envelope_threshold: Frequency = Field(default=None, ge=0.0, le=1.0)
    movement_threshold: Frequency = Field(default=None, ge=0.0, le=1.0)
    drift_threshold: Frequency = Field(default=None, ge=0.0, le=1.0)


class ApproxSuiteConfig(LabModel):
    d: int = Field(default=10, ge=3)
    m: int = Field(default=4096, ge=2)
    epsilon: float = Field(default=0.2, gt=0.0, lt=1.0)
    f: RegressionSpec = _linear(0.9)
    max_eta: float = Field(default=0.25, gt=0.0)
    pop_batch: int = Field(default=4096, ge=256)
    mc_risk: int = Field(default=100000, ge=1000)
    checkpoint_every: int = Field(default=10, ge=1)
    threshold: Frequency = Field(default=None, ge=0.0, le=1.0)
    movement_threshold: Frequency = Field(default=None, ge=0.0, le=1.0)


class EstimationSuiteConfig(LabModel):
    d: int = Field(default=10, ge=3)
    m: int = Field(default=4096, ge=2)
    ladder: list[int] = [50, 200, 800]
    epsilon: float = Field(default=0.2, gt=0.0, lt=1.0)
    f: RegressionSpec = _linear(0.9)
    noise: NoiseSpec = NoiseSpec()
    max_eta: float = Field(default=0.25, gt=0.0)
    pop_batch: int = Field(default=4096, ge=256)
    mc_risk: int = Field(default=10000, ge=1000)
    checkpoint_every: int = Field(default=25, ge=1)

    @field_validator("ladder")
    @classmethod
    def _check_ladder(cls, value: list[int]) -> list[int]:
        if len(value) < 2 or value[0] < 1 or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("ladder must be at least two strictly increasing sample sizes")
        return value


class BenignSuiteConfig(LabModel):
    d: int = Field(default=10, ge=3)
    n: int = Field(default=800, ge=1)
    m: int = Field(default=8192, ge=2)
    epsilon: float = Field(default=0.25, gt=0.0, lt=1.0)
    f: RegressionSpec = _linear(0.9)
    noise: NoiseSpec = NoiseSpec(kind=NoiseKind.UNIFORM, half_width=0.1)
    max_eta: float = Field(default=0.25, gt=0.0)
    pop_batch: int = Field(default=4096, ge=256)
    mc_risk: int = Field(default=10000, ge=1000)
    checkpoint_every: int = Field(default=25, ge=1)
    observe_noise: bool = True
    large_noise: float = Field(default=0.5, gt=0.0, lt=1.0)
    threshold: Frequency = Field(default=None, ge=0.0, le=1.0)


class VerifyConfig(LabModel):
    """Configs for every suite, the seeds they share and where reports go."""

    suites: list[SuiteName] = list(SuiteName)
    seeds: SeedsSpec = SeedsSpec()
    jobs: Optional[int] = Field(default=None, ge=1)
    events: EventsSuiteConfig = EventsSuiteConfig()
    kernel: KernelSuiteConfig = KernelSuiteConfig()
    overfit: OverfitSuiteConfig = OverfitSuiteConfig()
    approx: ApproxSuiteConfig = ApproxSuiteConfig()
    estimation: EstimationSuiteConfig = EstimationSuiteConfig()
    benign: BenignSuiteConfig = BenignSuiteConfig()
    io: IoSpec = IoSpec()

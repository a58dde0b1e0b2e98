"""Run configuration schemas.

JSON configs are parsed strictly: unknown keys and out-of-range numbers are rejected before any computation.
"""

from pathlib import Path
from typing import Optional

from pydantic import Field, model_validator

from ntklab.domain.models.enums import FlowMode, GramExport, GramFormat, NoiseKind, OutputFormat, RegressionKind
from ntklab.domain.models.flow import FlowConfig
from ntklab.domain.models.sphere import NoiseModel, RegressionFunction
from ntklab.domain.schema_model import LabModel


class RegressionSpec(LabModel):
    """How to build f*: a linear ``beta`` (or ``norm`` along the first axis), a harmonic combination or a
    registered custom function."""

    kind: RegressionKind = RegressionKind.LINEAR
    beta: Optional[list[float]] = None
    norm: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    constant: float = 0.0
    quadratic: Optional[list[list[float]]] = None
    name: Optional[str] = None
    scale: float = Field(default=1.0, ge=-1.0, le=1.0)

    @model_validator(mode="after")
    def _check_kind(self) -> "RegressionSpec":
        if self.kind == RegressionKind.CUSTOM and not self.name:
            raise ValueError("a custom regression function needs a registered name")
        if self.kind == RegressionKind.LINEAR and self.quadratic is not None:
            raise ValueError("a linear regression function has no quadratic part")
        return self

    def build(self, d: int) -> RegressionFunction:
        if self.kind == RegressionKind.CUSTOM:
            assert self.name is not None
            return RegressionFunction.named(d, self.name, self.scale)
        if self.kind == RegressionKind.HARMONIC:
            return RegressionFunction.harmonic(d, self.constant, self.beta, self.quadratic)
        if self.beta is not None:
            return RegressionFunction.linear(self.beta)
        return RegressionFunction.along_axis(d, self.norm or 0.0)


class NoiseSpec(LabModel):
    kind: NoiseKind = NoiseKind.NONE
    half_width: float = Field(default=0.0, ge=0.0, le=1.0)

    def build(self) -> NoiseModel:
        return NoiseModel(kind=self.kind, half_width=self.half_width)


class IoSpec(LabModel):
    out_dir: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV
    overwrite: bool = False


class SeedsSpec(LabModel):
    """Either an explicit seed list or ``count`` consecutive seeds from ``base``."""

    values: Optional[list[int]] = None
    base: Optional[int] = Field(default=None, ge=0)
    count: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _check_values(self) -> "SeedsSpec":
        if self.values is not None:
            if not self.values:
                raise ValueError("seed list must not be empty")
            if any(seed < 0 for seed in self.values):
                raise ValueError("seeds must be non-negative")
            if len(set(self.values)) != len(self.values):
                raise ValueError("seed list must not repeat seeds")
        return self

    def resolve(self, default_base: int = 0) -> list[int]:
        if self.values is not None:
            return list(self.values)
        base = self.base if self.base is not None else default_base
        return list(range(base, base + self.count))


class FlowSpec(LabModel):
    """Flow parameters as written in a config; ``t_end`` defaults to the planned horizon T_epsilon."""

    eta: Optional[float] = Field(default=None, gt=0.0)
    max_eta: float = Field(default=0.25, gt=0.0)
    t_end: Optional[float] = Field(default=None, ge=0.0)
    checkpoint_every: int = Field(default=1, ge=1)
    pop_batch: int = Field(default=4096, ge=256)
    mc_risk: int = Field(default=10000, ge=1000)
    gram_diagnostics: bool = False
    gradient_drift: bool = False
    harmonic_proxy: bool = False

    def build(self, t_end: float, seed: int) -> FlowConfig:
        options = {
            "checkpoint_every": self.checkpoint_every,
            "pop_batch": self.pop_batch,
            "mc_risk": self.mc_risk,
            "seed": seed,
            "gram_diagnostics": self.gram_diagnostics,
            "gradient_drift": self.gradient_drift,
            "harmonic_proxy": self.harmonic_proxy,
        }
        if self.eta is not None:
            return FlowConfig(eta=self.eta, t_end=t_end, **options)
        return FlowConfig.for_horizon(t_end, self.max_eta, **options)


class DataConfig(LabModel):
    d: int = Field(ge=1)
    n: int = Field(ge=1)
    f: RegressionSpec = RegressionSpec()
    noise: NoiseSpec = NoiseSpec()
    seed: Optional[int] = Field(default=None, ge=0)
    gram: GramExport = GramExport.NONE
    gram_format: GramFormat = GramFormat.CSV
    m: Optional[int] = Field(default=None, ge=2)
    io: IoSpec = IoSpec()

    @model_validator(mode="after")
    def _check_gram(self) -> "DataConfig":
        if self.gram == GramExport.INITIAL and self.m is None:
            raise ValueError("exporting the initial Gram matrix needs the width m")
        return self


class TrainConfig(LabModel):
    """One training run: data, width, target accuracy and flow parameters."""

    d: int = Field(ge=1)
    m: int = Field(ge=2)
    n: Optional[int] = Field(default=None, ge=1)
    epsilon: float = Field(default=0.1, gt=0.0, lt=1.0)
    mode: FlowMode = FlowMode.EMPIRICAL
    f: RegressionSpec = RegressionSpec()
    noise: NoiseSpec = NoiseSpec()
    flow: FlowSpec = FlowSpec()
    seed: Optional[int] = Field(default=None, ge=0)
    h_max: int = Field(default=6, ge=2)
    mc_budget: int = Field(default=20000, ge=1000)
    io: IoSpec = IoSpec()

    @model_validator(mode="after")
    def _check_sample_size(self) -> "TrainConfig":
        if self.mode != FlowMode.POPULATION and self.n is None:
            raise ValueError(f"mode {self.mode} needs the sample size n")
        return self

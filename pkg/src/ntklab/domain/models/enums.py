"""Enums

Named constants shared by the domain models and the configuration schemas.
"""

from enum import Enum


class RegressionKind(str, Enum):
    LINEAR = "linear"
    HARMONIC = "harmonic"
    CUSTOM = "custom"


class NoiseKind(str, Enum):
    """Symmetric bounded label-noise laws."""

    NONE = "none"
    UNIFORM = "uniform"
    TWO_POINT = "two_point"


class Provenance(str, Enum):
    ANALYTICAL = "analytical"
    EMPIRICAL = "empirical"


class FlowMode(str, Enum):
    """Which gradient-flow chain(s) a run advances."""

    EMPIRICAL = "empirical"
    POPULATION = "population"
    JOINT = "joint"


class SuiteName(str, Enum):
    EVENTS = "events"
    OVERFIT = "overfit"
    APPROX = "approx"
    ESTIMATION = "estimation"
    BENIGN = "benign"
    KERNEL = "kernel"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class GramExport(str, Enum):
    NONE = "none"
    ANALYTICAL = "analytical"
    INITIAL = "initial"


class GramFormat(str, Enum):
    CSV = "csv"
    BINARY = "binary"

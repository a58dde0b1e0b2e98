"""Uniform data on the unit sphere, bounded regression functions and bounded label noise."""

import logging
import math
from typing import Callable, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from ntklab.domain.errors import DimensionMismatchError, LabelBoundError, UnsupportedDimensionError
from ntklab.domain.models.enums import NoiseKind, RegressionKind
from ntklab.domain.models.streams import Seed, as_generator, child_streams
from ntklab.domain.schema_model import ArrayModel, frozen_array

log = logging.getLogger(__name__)

MIN_DIMENSION = 3
UNIT_TOLERANCE = 1e-12
LABEL_TOLERANCE = 1e-12

Evaluator = Callable[[np.ndarray], np.ndarray]


def check_dimension(d: int) -> None:
    if d < MIN_DIMENSION:
        raise UnsupportedDimensionError(f"dimension d must be at least {MIN_DIMENSION}, got {d}")


def sample_sphere(d: int, n: int, seed: Seed) -> np.ndarray:
    """Draws ``n`` independent points uniformly on the unit sphere of R^d (Gaussian draw, then normalization)."""
    check_dimension(d)
    if n < 1:
        raise ValueError(f"sample count n must be positive, got {n}")
    rng = as_generator(seed)
    points = rng.standard_normal((n, d))
    norms = np.linalg.norm(points, axis=1)
    degenerate = norms == 0.0
    while degenerate.any():
        points[degenerate] = rng.standard_normal((int(degenerate.sum()), d))
        norms = np.linalg.norm(points, axis=1)
        degenerate = norms == 0.0
    return points / norms[:, None]


def data_spectral_norm(X: np.ndarray) -> float:
    """Largest singular value of the feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        raise ValueError("feature matrix must be nonempty")
    return float(np.linalg.norm(np.atleast_2d(X), ord=2))


def _cubic_ridge(scale: float) -> Evaluator:
    return lambda X: scale * X[:, 0] ** 3


def _abs_ridge(scale: float) -> Evaluator:
    return lambda X: scale * np.abs(X[:, 0])


def _relu_ridge(scale: float) -> Evaluator:
    return lambda X: scale * np.maximum(X[:, 0], 0.0)


# Named custom regression functions; each is bounded by |scale| on the sphere.
CUSTOM_FUNCTIONS: dict[str, Callable[[float], Evaluator]] = {
    "cubic_ridge": _cubic_ridge,
    "abs_ridge": _abs_ridge,
    "relu_ridge": _relu_ridge,
}


class RegressionFunction(ArrayModel):
    """A regression function f* on the sphere with a certified bound on its sup norm.

    Linear functions are ``beta . x``. Harmonic combinations are ``c + beta . x + x^T A x`` with ``A`` symmetric and
    traceless, i.e. one component in each of the harmonic orders 0, 1 and 2. Custom functions wrap an evaluator
    together with a caller-certified bound.
    """

    kind: RegressionKind
    d: int
    sup_bound: float = Field(ge=0.0, le=1.0)
    constant: float = 0.0
    beta: Optional[np.ndarray] = None
    quadratic: Optional[np.ndarray] = None
    name: Optional[str] = None
    evaluator: Optional[Evaluator] = Field(default=None, exclude=True)

    @field_validator("beta", mode="before")
    @classmethod
    def _freeze_beta(cls, value):
        return None if value is None else frozen_array(value, 1, "beta")

    @field_validator("quadratic", mode="before")
    @classmethod
    def _freeze_quadratic(cls, value):
        return None if value is None else frozen_array(value, 2, "quadratic")

    @model_validator(mode="after")
    def _check_kind(self) -> "RegressionFunction":
        check_dimension(self.d)
        if self.beta is not None and self.beta.shape != (self.d,):
            raise ValueError(f"beta must have shape ({self.d},), got {self.beta.shape}")
        if self.kind == RegressionKind.LINEAR:
            if self.beta is None:
                raise ValueError("linear regression function needs beta")
            if abs(float(np.linalg.norm(self.beta)) - self.sup_bound) > 1e-12:
                raise ValueError("linear regression function must have sup_bound equal to |beta|")
        elif self.kind == RegressionKind.HARMONIC:
            if self.quadratic is not None:
                A = self.quadratic
                if A.shape != (self.d, self.d):
                    raise ValueError(f"quadratic must have shape ({self.d}, {self.d}), got {A.shape}")
                if np.max(np.abs(A - A.T)) > 1e-12:
                    raise ValueError("quadratic form must be symmetric")
                if abs(float(np.trace(A))) > 1e-12:
                    raise ValueError("quadratic form must be traceless (its trace is a constant on the sphere)")
            if self._harmonic_bound() > self.sup_bound + 1e-12:
                raise ValueError("sup_bound is below the certified bound |c| + |beta| + |A|_2")
        elif self.evaluator is None:
            raise ValueError("custom regression function needs an evaluator")
        return self

    def _harmonic_bound(self) -> float:
        bound = abs(self.constant)
        if self.beta is not None:
            bound += float(np.linalg.norm(self.beta))
        if self.quadratic is not None:
            bound += float(np.max(np.abs(np.linalg.eigvalsh(self.quadratic))))
        return bound

    @classmethod
    def linear(cls, beta) -> "RegressionFunction":
        beta = np.asarray(beta, dtype=np.float64)
        check_dimension(beta.shape[0])
        return cls(kind=RegressionKind.LINEAR, d=beta.shape[0], beta=beta, sup_bound=float(np.linalg.norm(beta)))

    @classmethod
    def zero(cls, d: int) -> "RegressionFunction":
        return cls.linear(np.zeros(d))

    @classmethod
    def along_axis(cls, d: int, norm: float, axis: int = 0) -> "RegressionFunction":
        """Linear function ``norm * x_axis``."""
        beta = np.zeros(d)
        beta[axis] = norm
        return cls.linear(beta)

    @classmethod
    def harmonic(cls, d: int, constant: float = 0.0, beta=None, quadratic=None) -> "RegressionFunction":
        check_dimension(d)
        draft = cls.model_construct(
            kind=RegressionKind.HARMONIC,
            d=d,
            constant=constant,
            beta=None if beta is None else np.asarray(beta, dtype=np.float64),
            quadratic=None if quadratic is None else np.asarray(quadratic, dtype=np.float64),
        )
        return cls(
            kind=RegressionKind.HARMONIC,
            d=d,
            constant=constant,
            beta=beta,
            quadratic=quadratic,
            sup_bound=draft._harmonic_bound(),
        )

    @classmethod
    def custom(cls, d: int, evaluator: Evaluator, sup_bound: float, name: Optional[str] = None) -> "RegressionFunction":
        check_dimension(d)
        return cls(kind=RegressionKind.CUSTOM, d=d, evaluator=evaluator, sup_bound=sup_bound, name=name)

    @classmethod
    def named(cls, d: int, name: str, scale: float = 1.0) -> "RegressionFunction":
        """One of the registered custom functions."""
        try:
            factory = CUSTOM_FUNCTIONS[name]
        except KeyError as exc:
            raise ValueError(f"unknown custom regression function {name!r}; known: {sorted(CUSTOM_FUNCTIONS)}") from exc
        return cls.custom(d, factory(scale), sup_bound=abs(scale), name=name)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise DimensionMismatchError(f"regression function has d={self.d}, inputs have d={X.shape[1]}")
        if self.kind == RegressionKind.CUSTOM:
            return np.asarray(self.evaluator(X), dtype=np.float64)  # type: ignore[misc]
        values = np.full(X.shape[0], self.constant, dtype=np.float64)
        if self.beta is not None:
            values = values + X @ self.beta
        if self.quadratic is not None:
            values = values + np.einsum("ij,jk,ik->i", X, self.quadratic, X)
        return values

    def order_masses(self) -> dict[int, float]:
        """L2 norm of the projection onto each harmonic order 0, 1 and 2 (not available for custom functions)."""
        if self.kind == RegressionKind.CUSTOM:
            raise ValueError("order masses are only known analytically for linear and harmonic functions")
        masses = {0: abs(self.constant), 1: 0.0, 2: 0.0}
        if self.beta is not None:
            masses[1] = float(np.linalg.norm(self.beta)) / math.sqrt(self.d)
        if self.quadratic is not None:
            masses[2] = math.sqrt(2.0 / (self.d * (self.d + 2))) * float(np.linalg.norm(self.quadratic))
        return masses

    def harmonic_orders(self) -> set[int]:
        return {order for order, mass in self.order_masses().items() if mass > 0.0}

    def l2_norm(self) -> float:
        return math.sqrt(sum(mass**2 for mass in self.order_masses().values()))


class NoiseModel(ArrayModel):
    """Symmetric label noise bounded by ``half_width``."""

    kind: NoiseKind = NoiseKind.NONE
    half_width: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_width(self) -> "NoiseModel":
        if self.kind == NoiseKind.NONE and self.half_width != 0.0:
            raise ValueError("noise kind 'none' must have half_width 0")
        return self

    def sample(self, n: int, seed: Seed) -> np.ndarray:
        if self.kind == NoiseKind.NONE:
            return np.zeros(n)
        rng = as_generator(seed)
        if self.kind == NoiseKind.UNIFORM:
            return rng.uniform(-self.half_width, self.half_width, size=n)
        return self.half_width * rng.choice(np.array([-1.0, 1.0]), size=n)


class Dataset(ArrayModel):
    """Feature matrix on the sphere, labels bounded by one, and the noise that produced them."""

    X: np.ndarray
    y: np.ndarray
    noise: np.ndarray

    @field_validator("X", mode="before")
    @classmethod
    def _freeze_features(cls, value):
        return frozen_array(value, 2, "X")

    @field_validator("y", "noise", mode="before")
    @classmethod
    def _freeze_vectors(cls, value):
        return frozen_array(value, 1, "labels")

    @model_validator(mode="after")
    def _check_invariants(self) -> "Dataset":
        n = self.X.shape[0]
        if self.y.shape != (n,) or self.noise.shape != (n,):
            raise ValueError("X, y and noise must agree on the sample count")
        check_dimension(self.X.shape[1])
        if np.max(np.abs(np.linalg.norm(self.X, axis=1) - 1.0)) > UNIT_TOLERANCE:
            raise ValueError("every row of X must have unit norm")
        if np.max(np.abs(self.y)) > 1.0 + LABEL_TOLERANCE:
            raise ValueError("labels must be bounded by 1 in absolute value")
        return self

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def d(self) -> int:
        return int(self.X.shape[1])


def make_dataset(f: RegressionFunction, noise: NoiseModel, d: int, n: int, seed: Seed) -> Dataset:
    """Samples features, evaluates ``f`` and adds noise; a pure function of its arguments."""
    if f.d != d:
        raise DimensionMismatchError(f"regression function has d={f.d}, dataset requested d={d}")
    if f.sup_bound + noise.half_width > 1.0 + LABEL_TOLERANCE:
        raise LabelBoundError(
            f"sup_bound {f.sup_bound} plus noise half-width {noise.half_width} exceeds 1; labels could leave [-1, 1]"
        )
    feature_stream, noise_stream = child_streams(seed, 2)
    X = sample_sphere(d, n, feature_stream)
    xi = noise.sample(n, noise_stream)
    y = f.evaluate(X) + xi
    if np.max(np.abs(y)) > 1.0 + LABEL_TOLERANCE:
        raise LabelBoundError("evaluated labels exceed 1; the certified sup_bound of f is wrong")
    log.debug("Sampled dataset n=%s d=%s noise=%s", n, d, noise.kind)
    return Dataset(X=X, y=y, noise=xi)

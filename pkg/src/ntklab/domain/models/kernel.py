"""Analytical and empirical neural tangent kernels, Gram matrices and operator-norm diagnostics."""

import logging
import math
from typing import Optional, Union

import numpy as np
from pydantic import field_validator, model_validator
from scipy.special import betaln

from ntklab.domain.errors import KernelDomainError, NumericalError, ScaleError
from ntklab.domain.models.enums import Provenance
from ntklab.domain.models.network import NetworkState, activation_pattern, check_inputs, symmetric_eigenvalues
from ntklab.domain.models.sphere import sample_sphere
from ntklab.domain.models.streams import Seed
from ntklab.domain.schema_model import ArrayModel, frozen_array

log = logging.getLogger(__name__)

CLAMP_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12
GRAM_CAP = 4096
MIN_PROBES = 64

ArrayLike = Union[float, np.ndarray]


class GramMatrix(ArrayModel):
    """A symmetric n x n kernel matrix together with where it came from."""

    H: np.ndarray
    provenance: Provenance
    state_ref: Optional[str] = None

    @field_validator("H", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, 2, "H")

    @model_validator(mode="after")
    def _check_symmetry(self) -> "GramMatrix":
        if self.H.shape[0] != self.H.shape[1]:
            raise ValueError(f"Gram matrix must be square, got {self.H.shape}")
        if self.H.size and np.max(np.abs(self.H - self.H.T)) > SYMMETRY_TOLERANCE:
            raise ValueError("Gram matrix must be symmetric")
        return self

    @property
    def n(self) -> int:
        return int(self.H.shape[0])


def kappa_analytical(u: ArrayLike) -> ArrayLike:
    """kappa(u) = u (1/2 - arccos(u) / (2 pi)), the infinite-width NTK of the two-layer ReLU network."""
    values = np.asarray(u, dtype=np.float64)
    if np.any(np.abs(values) > 1.0 + CLAMP_TOLERANCE):
        raise KernelDomainError("kernel argument must lie in [-1, 1]")
    clipped = np.clip(values, -1.0, 1.0)
    result = clipped * (0.5 - np.arccos(clipped) / (2.0 * np.pi))
    return float(result) if result.ndim == 0 else result


def kappa_series(u: ArrayLike, terms: int = 400) -> ArrayLike:
    """Truncated Taylor form u/4 + u^2/(2 pi) + (1/(2 pi)) sum_r u^(2r+2) / (B(1/2, r) r (1 + 2r))."""
    values = np.asarray(u, dtype=np.float64)
    if np.any(np.abs(values) > 1.0 + CLAMP_TOLERANCE):
        raise KernelDomainError("kernel argument must lie in [-1, 1]")
    values = np.clip(values, -1.0, 1.0)
    r = np.arange(1, terms + 1, dtype=np.float64)
    coefficients = np.exp(-betaln(0.5, r)) / (r * (1.0 + 2.0 * r))
    squares = values[..., None] ** 2
    tail = np.sum(coefficients * squares ** (r + 1.0), axis=-1)
    result = values / 4.0 + (values**2 + tail) / (2.0 * np.pi)
    return float(result) if result.ndim == 0 else result


def kappa_empirical(state: NetworkState, x: np.ndarray, x_prime: np.ndarray) -> float:
    """(x . x' / m) sum_j phi'(w_j . x) phi'(w_j . x')."""
    points = check_inputs(state, np.vstack([np.atleast_2d(x), np.atleast_2d(x_prime)]))
    pattern = activation_pattern(state, points)
    shared = int(np.count_nonzero(pattern[:, 0] & pattern[:, 1]))
    return float(points[0] @ points[1]) * shared / state.m


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise ScaleError(f"{n} points exceed the dense Gram cap of {cap}")


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def gram_analytical(X: np.ndarray, cap: int = GRAM_CAP) -> GramMatrix:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    _check_cap(X.shape[0], cap)
    inner = _symmetric(X @ X.T)
    return GramMatrix(H=kappa_analytical(inner), provenance=Provenance.ANALYTICAL)


def gram_matrix(state: NetworkState, X: np.ndarray, cap: int = GRAM_CAP) -> GramMatrix:
    """Empirical Gram (1/m) (X X^T) o (phi'(X W^T) phi'(W X^T))."""
    X = check_inputs(state, X)
    _check_cap(X.shape[0], cap)
    pattern = activation_pattern(state, X).astype(np.float64)
    H = _symmetric((X @ X.T) * (pattern.T @ pattern) / state.m)
    return GramMatrix(H=H, provenance=Provenance.EMPIRICAL, state_ref=state.fingerprint())


def _finite(H: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(H)):
        raise NumericalError("matrix has non-finite entries")
    return H


def min_eigenvalue(gram: GramMatrix) -> float:
    H = _finite(gram.H)
    return float(symmetric_eigenvalues(H, subset_by_index=[0, 0])[0])


def max_eigenvalue(gram: GramMatrix) -> float:
    H = _finite(gram.H)
    n = H.shape[0]
    return float(symmetric_eigenvalues(H, subset_by_index=[n - 1, n - 1])[0])


def nystrom_norm(K: np.ndarray) -> float:
    """Spectral norm of a symmetric probe matrix divided by the probe count."""
    K = _finite(np.asarray(K, dtype=np.float64))
    eigenvalues = symmetric_eigenvalues(_symmetric(K))
    return float(np.max(np.abs(eigenvalues))) / K.shape[0]


class KernelConcentration(ArrayModel):
    """Nystrom estimates on one probe set: |H_W - H|_2 and |H_W|_2."""

    difference_norm: float
    operator_norm: float
    probes: int


def kernel_concentration(state: NetworkState, M: int, seed: Seed, cap: int = GRAM_CAP) -> KernelConcentration:
    if M < MIN_PROBES:
        raise ValueError(f"probe count M must be at least {MIN_PROBES}, got {M}")
    _check_cap(M, cap)
    Z = sample_sphere(state.d, M, seed)
    empirical = gram_matrix(state, Z, cap).H
    analytical = gram_analytical(Z, cap).H
    return KernelConcentration(
        difference_norm=nystrom_norm(empirical - analytical),
        operator_norm=nystrom_norm(empirical),
        probes=M,
    )


def operator_norm_diff(state: NetworkState, M: int, seed: Seed) -> float:
    """Nystrom estimate of the operator norm of H_W - H from ``M`` fresh sphere points."""
    return kernel_concentration(state, M, seed).difference_norm


def operator_norm_estimate(state: NetworkState, M: int, seed: Seed) -> float:
    """Nystrom estimate of the operator norm of H_W."""
    return kernel_concentration(state, M, seed).operator_norm


def boundary_radius(m: int, d: int) -> float:
    return 32.0 * math.sqrt(d / m)


def active_boundary_count(state_init: NetworkState, X: np.ndarray, radius: Optional[float] = None) -> np.ndarray:
    """For each x_i, the number of neurons whose hyperplane distance |w_j . x_i| is at most ``radius``."""
    if radius is None:
        radius = boundary_radius(state_init.m, state_init.d)
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    X = check_inputs(state_init, X)
    return np.count_nonzero(np.abs(state_init.W @ X.T) <= radius, axis=0)

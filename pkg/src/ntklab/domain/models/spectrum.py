"""Spectrum of the analytical NTK integral operator on the sphere.

Eigenvalues are indexed by the harmonic order h. Each value mu_h / |S^{d-1}| repeats N(d, h) times; order 1 carries
the top eigenvalue 1/(4d), odd orders from 3 on vanish, and even orders decrease with h.
"""

import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from pydantic import Field, model_validator
from scipy.integrate import quad
from scipy.linalg import lstsq
from scipy.special import betaln, gammaln

from ntklab.domain.errors import (
    DimensionMismatchError,
    KernelDomainError,
    NumericalError,
    PlanInfeasibleError,
    QuadratureError,
    ScaleError,
    SeriesConvergenceError,
)
from ntklab.domain.models.enums import RegressionKind
from ntklab.domain.models.sphere import RegressionFunction, check_dimension, sample_sphere
from ntklab.domain.models.streams import Seed
from ntklab.domain.schema_model import LabModel

log = logging.getLogger(__name__)

SERIES_RELATIVE_TOLERANCE = 1e-16
SERIES_TERM_CAP = 2**20
SERIES_FIRST_BLOCK = 1024
QUADRATURE_TOLERANCE = 1e-10
QUADRATURE_MAX_ORDER = 12
QUADRATURE_MAX_DIMENSION = 64
DEFAULT_MC_BUDGET = 20000


def legendre(h: int, d: int, z):
    """Legendre polynomial of order ``h`` in ``d`` dimensions, normalized so that P_h(d; 1) = 1."""
    check_dimension(d)
    if h < 0:
        raise ValueError(f"order h must be non-negative, got {h}")
    values = np.asarray(z, dtype=np.float64)
    if np.any(np.abs(values) > 1.0 + 1e-12):
        raise KernelDomainError("Legendre argument must lie in [-1, 1]")
    values = np.clip(values, -1.0, 1.0)
    half = (d - 1) / 2.0
    total = np.zeros_like(values)
    for r in range(h // 2 + 1):
        log_coefficient = (
            gammaln(h + 1) + gammaln(half) - gammaln(r + 1) - gammaln(h - 2 * r + 1) - gammaln(r + half)
        )
        total = total + (-0.25) ** r * math.exp(log_coefficient) * (1.0 - values**2) ** r * values ** (h - 2 * r)
    return float(total) if total.ndim == 0 else total


def multiplicity(h: int, d: int) -> int:
    """Dimension N(d, h) of the order-h spherical harmonics, in exact integer arithmetic."""
    check_dimension(d)
    if h < 0:
        raise ValueError(f"order h must be non-negative, got {h}")
    if h == 0:
        return 1
    if h == 1:
        return d
    return (2 * h + d - 2) * math.factorial(h + d - 3) // (math.factorial(h) * math.factorial(d - 2))


def _log_binomial(top: np.ndarray, h: int) -> np.ndarray:
    return sum(np.log(top - k) for k in range(h)) - gammaln(h + 1)


def _even_series_log_terms(r: np.ndarray, h: int, d: int) -> np.ndarray:
    return (
        _log_binomial(2.0 * r + 2.0, h)
        - betaln(0.5, r)
        - np.log(r)
        - np.log1p(2.0 * r)
        + betaln(r + 1.5 - h / 2.0, h + (d - 1) / 2.0)
    )


def _even_series(h: int, d: int) -> float:
    """sum_{r >= h/2 - 1} C(2r+2, h) / (B(1/2, r) r (1+2r)) * B(r + 3/2 - h/2, h + (d-1)/2).

    The terms decay like r^(-(d+2)/2). Summation stops once a term drops below the relative tolerance; for small d
    that point lies beyond the term cap, and the remainder is then closed with the integral of the fitted power law.
    """
    start = h // 2 - 1
    block = SERIES_FIRST_BLOCK
    partial = 0.0
    while start < SERIES_TERM_CAP:
        r = np.arange(start, min(start + block, SERIES_TERM_CAP), dtype=np.float64)
        terms = np.exp(_even_series_log_terms(r, h, d))
        if not np.all(np.isfinite(terms)):
            raise SeriesConvergenceError(f"non-finite series term for h={h}, d={d}")
        running = partial + np.cumsum(terms)
        small = np.nonzero(terms[1:] < SERIES_RELATIVE_TOLERANCE * running[:-1])[0]
        if small.size:
            stop = int(small[0]) + 1
            return partial + math.fsum(terms[:stop])
        partial += math.fsum(terms)
        start += r.size
        block *= 2

    last = float(SERIES_TERM_CAP - 1)
    reference = last / 2.0
    t_last, t_reference = np.exp(_even_series_log_terms(np.array([last, reference]), h, d))
    exponent = math.log(t_reference / t_last) / math.log(last / reference)
    if not exponent > 1.0:
        raise SeriesConvergenceError(f"series for h={h}, d={d} does not decay fast enough (exponent {exponent:.3f})")
    tail = t_last * (last / (exponent - 1.0) - 0.5)
    log.debug("Even series h=%s d=%s closed at r=%s with tail %.3e (exponent %.4f)", h, d, last, tail, exponent)
    return partial + tail


@lru_cache(maxsize=512)
def eigenvalue_closed_form(h: int, d: int) -> float:
    """mu_h / |S^{d-1}| from the closed forms, case by case in h."""
    check_dimension(d)
    if h < 0:
        raise ValueError(f"order h must be non-negative, got {h}")
    a = (d - 1) / 2.0
    if h == 0:
        return math.exp(
            2.0 * gammaln(d / 2.0) - math.log(2.0 * math.pi * (d - 1)) - gammaln((d + 1) / 2.0) - gammaln(a)
        )
    if h == 1:
        return 1.0 / (4 * d)
    if h % 2:
        return 0.0
    if h == 2:
        prefactor = math.exp(betaln(a, 2.0) - math.log(8.0 * math.pi) - betaln(a, 0.5))
        return prefactor * (math.exp(betaln(d / 2.0, 0.5)) + math.exp(betaln(d / 2.0 + 1.0, 0.5)))
    log_prefactor = math.log(h) + betaln(h, a) - (h + 1) * math.log(2.0) - math.log(math.pi) - betaln(a, 0.5)
    return math.exp(log_prefactor) * _even_series(h, d)


def eigenvalue_quadrature(h: int, d: int) -> float:
    """Independent evaluation of mu_h / |S^{d-1}| by adaptive quadrature of the one-dimensional reduction.

    By parity only the part of the kernel with the parity of h survives: u/4 for odd h, u arcsin(u) / (2 pi) for
    even h, integrated over [0, 1] and doubled.
    """
    check_dimension(d)
    if h > QUADRATURE_MAX_ORDER or d > QUADRATURE_MAX_DIMENSION:
        raise ScaleError(f"quadrature oracle supports h <= {QUADRATURE_MAX_ORDER} and d <= {QUADRATURE_MAX_DIMENSION}")
    weight_power = (d - 3) / 2.0

    def integrand(z: float) -> float:
        kernel_part = z / 4.0 if h % 2 else z * math.asin(z) / (2.0 * math.pi)
        return legendre(h, d, z) * kernel_part * (1.0 - z * z) ** weight_power

    result = quad(integrand, 0.0, 1.0, epsabs=1e-17, epsrel=1e-12, limit=500, full_output=1)
    value, abserr = result[0], result[1]
    if not math.isfinite(value) or abserr > QUADRATURE_TOLERANCE:
        raise QuadratureError(f"quadrature for h={h}, d={d} did not converge (error estimate {abserr:.3e})")
    return 2.0 * value * math.exp(-betaln((d - 1) / 2.0, 0.5))


class SpectrumEntry(LabModel):
    h: int
    value: float
    multiplicity: int
    l_start: int
    l_end: int


class SpectrumTable(LabModel):
    """Eigenvalues per harmonic order, sorted by value with their global index ranges."""

    d: int
    h_max: int
    entries: list[SpectrumEntry]

    @property
    def lambda_1(self) -> float:
        return self.entries[0].value

    def entry(self, h: int) -> SpectrumEntry:
        for entry in self.entries:
            if entry.h == h:
                return entry
        raise ValueError(f"order {h} is not tabulated (h_max={self.h_max})")

    def eigenvalue(self, index: int) -> float:
        """The ``index``-th eigenvalue (1-based) in the non-increasing global ordering."""
        for entry in self.entries:
            if entry.l_start <= index <= entry.l_end:
                return entry.value
        raise ValueError(f"global index {index} is outside the tabulated range")

    def values(self) -> np.ndarray:
        """The full non-increasing sequence of eigenvalues, each repeated by its multiplicity."""
        return np.concatenate([np.full(entry.multiplicity, entry.value) for entry in self.entries])


def build_spectrum(d: int, h_max: int) -> SpectrumTable:
    check_dimension(d)
    if h_max < 2:
        raise ValueError(f"h_max must be at least 2, got {h_max}")
    rows = [(h, eigenvalue_closed_form(h, d), multiplicity(h, d)) for h in range(h_max + 1)]
    if not rows[0][1] < rows[1][1]:
        raise NumericalError(f"order-0 eigenvalue {rows[0][1]} is not below 1/(4d) for d={d}")
    entries = []
    next_index = 1
    for h, value, count in sorted(rows, key=lambda row: (-row[1], row[0])):
        entries.append(
            SpectrumEntry(h=h, value=value, multiplicity=count, l_start=next_index, l_end=next_index + count - 1)
        )
        next_index += count
    return SpectrumTable(d=d, h_max=h_max, entries=entries)


def horizon(lambda_epsilon: float, epsilon: float) -> float:
    """Training horizon T = (2 / lambda) log(2 / epsilon)."""
    return (2.0 / lambda_epsilon) * math.log(2.0 / epsilon)


class EpsilonPlan(LabModel):
    """Cutoff index and eigenvalue capturing all but epsilon/4 of f*'s mass, and the horizon they imply."""

    epsilon: float = Field(gt=0.0)
    L_epsilon: int = Field(ge=1)
    lambda_epsilon: float = Field(gt=0.0)
    T_epsilon: float = Field(ge=0.0)
    tail_mass: float = Field(ge=0.0)
    tail_stderr: float = 0.0
    mc_budget: Optional[int] = None
    certified: bool = True

    @model_validator(mode="after")
    def _check_tail(self) -> "EpsilonPlan":
        if self.tail_mass > self.epsilon / 4.0:
            raise ValueError("tail mass must not exceed epsilon/4")
        return self


def harmonic_design(X: np.ndarray, orders: set[int]) -> np.ndarray:
    """Columns spanning the harmonics of the given orders (at most 2) restricted to the sphere."""
    if any(order > 2 for order in orders):
        raise ValueError("only harmonic orders 0, 1 and 2 have an explicit basis")
    n, d = X.shape
    columns = []
    if 0 in orders:
        columns.append(np.ones((n, 1)))
    if 1 in orders:
        columns.append(X)
    if 2 in orders:
        rows, cols = np.triu_indices(d, k=1)
        columns.append(X[:, rows] * X[:, cols])
        columns.append(X**2 - 1.0 / d)
    return np.hstack(columns) if columns else np.zeros((n, 0))


def harmonic_residual(values: np.ndarray, X: np.ndarray, orders: set[int]) -> tuple[float, float]:
    """L2 norm (and its standard error) of what remains after least-squares projection onto the given orders."""
    values = np.asarray(values, dtype=np.float64)
    design = harmonic_design(X, orders)
    residual = values
    if design.shape[1]:
        coefficients = lstsq(design, values)[0]
        residual = values - design @ coefficients
    squares = residual**2
    mean = float(np.mean(squares))
    stderr_mean = float(np.std(squares, ddof=1)) / math.sqrt(values.size) if values.size > 1 else 0.0
    norm = math.sqrt(mean)
    return norm, (stderr_mean / (2.0 * norm) if norm > 0.0 else 0.0)


def _plan(epsilon: float, table: SpectrumTable, L: int, tail: float = 0.0, **extra) -> EpsilonPlan:
    lambda_epsilon = table.eigenvalue(L)
    return EpsilonPlan(
        epsilon=epsilon,
        L_epsilon=L,
        lambda_epsilon=lambda_epsilon,
        T_epsilon=horizon(lambda_epsilon, epsilon),
        tail_mass=tail,
        **extra,
    )


def plan_epsilon(
    f: RegressionFunction,
    d: int,
    epsilon: float,
    table: SpectrumTable,
    mc_budget: int = DEFAULT_MC_BUDGET,
    seed: Seed = 0,
) -> EpsilonPlan:
    """Chooses L_epsilon, lambda_epsilon and T_epsilon for ``f``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if f.d != d or table.d != d:
        raise DimensionMismatchError(f"f has d={f.d}, table has d={table.d}, plan requested d={d}")
    linear_end = table.entry(1).l_end

    if f.kind == RegressionKind.LINEAR:
        # An odd function has no mass on even orders, and a linear one none beyond order 1.
        return _plan(epsilon, table, linear_end)

    if f.kind == RegressionKind.HARMONIC:
        present = f.harmonic_orders()
        if not present:
            return _plan(epsilon, table, linear_end)
        return _plan(epsilon, table, max(table.entry(h).l_end for h in present))

    if mc_budget < 1000:
        raise ValueError(f"mc_budget must be at least 1000, got {mc_budget}")
    X = sample_sphere(d, mc_budget, seed)
    values = f.evaluate(X)
    covered: set[int] = set()
    tail, stderr = math.inf, 0.0
    for entry in [entry for entry in table.entries if entry.h <= 2]:
        covered.add(entry.h)
        tail, stderr = harmonic_residual(values, X, covered)
        if tail <= epsilon / 4.0:
            return _plan(
                epsilon, table, entry.l_end, tail, tail_stderr=stderr, mc_budget=mc_budget, certified=False
            )
    raise PlanInfeasibleError(
        f"estimated mass beyond order 2 is {tail:.4g} (stderr {stderr:.2g}), above epsilon/4 = {epsilon / 4:.4g}"
    )

"""Explicit Euler discretization of gradient flow on the empirical and the population risk.

The empirical chain moves along ``(2/n) G_W xi`` where ``xi = y - f_W(X)`` is the training residual. The
population chain moves along a Monte Carlo estimate of ``2 E[zeta_W(x) grad f_W(x)]`` with ``zeta_W = f* - f_W``,
drawing a fresh batch of sphere points at every step. Risks are estimated on one fixed probe set per run, which
also serves as common random numbers for the distance between the two chains.
"""

import logging
import math
from typing import Optional, Union

import numpy as np
from pydantic import Field, model_validator

from ntklab.domain.errors import ConfigError, DimensionMismatchError, DivergenceError, ScaleError
from ntklab.domain.models.enums import FlowMode
from ntklab.domain.models.kernel import gram_matrix, min_eigenvalue
from ntklab.domain.models.network import (
    NetworkState,
    activation_pattern,
    adjoint_gradient,
    apply_gradient,
    forward_batch,
    gradient_drift,
    jacobian,
)
from ntklab.domain.models.spectrum import EpsilonPlan, harmonic_residual
from ntklab.domain.models.sphere import Dataset, RegressionFunction, sample_sphere
from ntklab.domain.models.streams import Seed, named_stream
from ntklab.domain.schema_model import ArrayModel, LabModel

log = logging.getLogger(__name__)

STEP_TOLERANCE = 1e-9
MIN_POP_BATCH = 256
MIN_MC = 1000
MIN_ORACLE = 4096
MAX_VSTAT_DEPTH = 3


class FlowConfig(LabModel):
    """Step size, horizon and Monte Carlo budgets of one run."""

    eta: float = Field(gt=0.0)
    t_end: float = Field(ge=0.0)
    checkpoint_every: int = Field(default=1, ge=1)
    pop_batch: int = Field(default=4096, ge=MIN_POP_BATCH)
    mc_risk: int = Field(default=10000, ge=MIN_MC)
    seed: int = Field(default=0, ge=0)
    gram_diagnostics: bool = False
    gradient_drift: bool = False
    harmonic_proxy: bool = False

    @model_validator(mode="after")
    def _check_step_count(self) -> "FlowConfig":
        ratio = self.t_end / self.eta
        if abs(ratio - round(ratio)) > STEP_TOLERANCE * max(1.0, ratio):
            raise ValueError(f"t_end / eta = {ratio} is not an integer step count")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.eta))

    @classmethod
    def for_horizon(cls, t_end: float, max_eta: float, **kwargs) -> "FlowConfig":
        """A config whose step is the largest ``eta <= max_eta`` dividing ``t_end`` into whole steps."""
        if max_eta <= 0.0:
            raise ValueError(f"max_eta must be positive, got {max_eta}")
        if t_end == 0.0:
            return cls(eta=max_eta, t_end=0.0, **kwargs)
        steps = max(1, math.ceil(t_end / max_eta - STEP_TOLERANCE))
        return cls(eta=t_end / steps, t_end=t_end, **kwargs)

    def validate_for(self, d: int) -> None:
        """Step-size guard eta <= d/4; the continuous rate constants are of order 1/d."""
        if self.eta > d / 4.0:
            raise ConfigError(f"step size eta={self.eta} exceeds the stability guard d/4 = {d / 4.0}")

    def is_checkpoint(self, step: int) -> bool:
        return step % self.checkpoint_every == 0 or step == self.n_steps


class TrajectoryPoint(LabModel):
    t: float
    step: int
    empirical_risk: Optional[float] = None
    excess_risk: Optional[float] = None
    excess_risk_stderr: Optional[float] = None
    estimation_gap: Optional[float] = None
    estimation_gap_stderr: Optional[float] = None
    max_move: Optional[float] = None
    gram_min_eig: Optional[float] = None
    gradient_drift: Optional[float] = None
    residual_norm: Optional[float] = None
    approx_error: Optional[float] = None
    approx_error_stderr: Optional[float] = None
    population_max_move: Optional[float] = None
    proxy_residual: Optional[float] = None


class Trajectory(ArrayModel):
    """Checkpoints of one run plus the final weights of each chain."""

    mode: FlowMode
    points: list[TrajectoryPoint]
    final_state: NetworkState
    population_state: Optional[NetworkState] = None

    @property
    def final(self) -> TrajectoryPoint:
        return self.points[-1]

    def times(self) -> np.ndarray:
        return np.array([point.t for point in self.points])

    def series(self, name: str) -> np.ndarray:
        """One diagnostic across checkpoints, ``nan`` where it was not computed."""
        values = [getattr(point, name) for point in self.points]
        return np.array([math.nan if value is None else value for value in values], dtype=np.float64)


def _check_dataset(state: NetworkState, dataset: Dataset) -> None:
    if dataset.d != state.d:
        raise DimensionMismatchError(f"dataset has d={dataset.d}, network has d={state.d}")


def _check_function(state: NetworkState, f: RegressionFunction) -> None:
    if f.d != state.d:
        raise DimensionMismatchError(f"regression function has d={f.d}, network has d={state.d}")


def _advance(state: NetworkState, direction: np.ndarray, eta: float, step: Optional[int] = None) -> NetworkState:
    W = state.W + eta * direction
    if not np.all(np.isfinite(W)):
        raise DivergenceError("weights became non-finite; reduce the step size eta", step=step)
    return state.evolve(W)


def empirical_residual(state: NetworkState, dataset: Dataset) -> np.ndarray:
    """xi = y - f_W(X) at the training points."""
    _check_dataset(state, dataset)
    return dataset.y - forward_batch(state, dataset.X)


def empirical_direction(state: NetworkState, dataset: Dataset) -> np.ndarray:
    """Negative gradient of the empirical risk, (2/n) reshape(G_W xi)."""
    xi = empirical_residual(state, dataset)
    return (2.0 / dataset.n) * apply_gradient(state, dataset.X, xi)


def step_empirical(state: NetworkState, dataset: Dataset, eta: float) -> NetworkState:
    return _advance(state, empirical_direction(state, dataset), eta)


def population_gradient(
    state: NetworkState, f: RegressionFunction, pop_batch: int, seed: Seed
) -> tuple[np.ndarray, float]:
    """Monte Carlo estimate of the population descent direction and its Frobenius standard error.

    Each sample contributes ``g_i = 2 zeta(z_i) grad f_W(z_i)``, whose squared Frobenius norm is
    ``4 zeta_i^2 * (active neurons at z_i) / m``.
    """
    if pop_batch < MIN_POP_BATCH:
        raise ValueError(f"pop_batch must be at least {MIN_POP_BATCH}, got {pop_batch}")
    _check_function(state, f)
    Z = sample_sphere(state.d, pop_batch, seed)
    zeta = f.evaluate(Z) - forward_batch(state, Z)
    J = jacobian(state, Z)
    mean = (2.0 / pop_batch) * ((J * zeta[None, :]) @ Z)
    active = np.count_nonzero(activation_pattern(state, Z), axis=0)
    sample_norms = 4.0 * zeta**2 * active / state.m
    trace_cov = max(float(np.mean(sample_norms)) - float(np.sum(mean**2)), 0.0) * pop_batch / (pop_batch - 1)
    return mean, math.sqrt(trace_cov / pop_batch)


def step_population(state: NetworkState, f: RegressionFunction, pop_batch: int, seed: Seed, eta: float) -> NetworkState:
    direction, _ = population_gradient(state, f, pop_batch, seed)
    return _advance(state, direction, eta)


def weight_movement(state_t: NetworkState, state_0: NetworkState) -> tuple[np.ndarray, float]:
    """Per-neuron distances |w_j(t) - w_j(0)| and their maximum."""
    if state_t.W.shape != state_0.W.shape:
        raise DimensionMismatchError(f"states have shapes {state_t.W.shape} and {state_0.W.shape}")
    norms = np.linalg.norm(state_t.W - state_0.W, axis=1)
    return norms, float(np.max(norms))


def _mean_square(difference: np.ndarray) -> tuple[float, float]:
    squares = difference**2
    return float(np.mean(squares)), float(np.std(squares, ddof=1)) / math.sqrt(squares.size)


def _root(mean: float, stderr: float) -> tuple[float, float]:
    norm = math.sqrt(mean)
    return norm, (stderr / (2.0 * norm) if norm > 0.0 else 0.0)


def l2_distance(
    state_a: NetworkState,
    other: Union[NetworkState, RegressionFunction],
    mc: int = 10000,
    seed: Seed = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of |f_a - f_b|_2 (or |f_a - f*|_2) with its standard error."""
    if mc < MIN_MC:
        raise ValueError(f"mc must be at least {MIN_MC}, got {mc}")
    probes = sample_sphere(state_a.d, mc, seed)
    if isinstance(other, NetworkState):
        reference = forward_batch(other, probes)
    else:
        _check_function(state_a, other)
        reference = other.evaluate(probes)
    return _root(*_mean_square(forward_batch(state_a, probes) - reference))


class _Checkpointer:
    """Diagnostics shared by all three run modes."""

    def __init__(
        self,
        state_0: NetworkState,
        config: FlowConfig,
        dataset: Optional[Dataset],
        f: Optional[RegressionFunction],
    ):
        self.state_0 = state_0
        self.config = config
        self.dataset = dataset
        self.probes: Optional[np.ndarray] = None
        self.targets: Optional[np.ndarray] = None
        if f is not None:
            self.probes = sample_sphere(state_0.d, config.mc_risk, named_stream(config.seed, "probe"))
            self.targets = f.evaluate(self.probes)

    def _empirical(self, state: NetworkState) -> dict:
        assert self.dataset is not None
        residual = empirical_residual(state, self.dataset)
        values = {
            "empirical_risk": float(np.mean(residual**2)),
            "residual_norm": float(np.linalg.norm(residual)),
            "max_move": weight_movement(state, self.state_0)[1],
        }
        if self.config.gram_diagnostics:
            values["gram_min_eig"] = min_eigenvalue(gram_matrix(state, self.dataset.X))
        if self.config.gradient_drift:
            values["gradient_drift"] = gradient_drift(self.state_0, state, self.dataset.X)
        return values

    def __call__(
        self, step: int, empirical: Optional[NetworkState], population: Optional[NetworkState]
    ) -> TrajectoryPoint:
        values: dict = {"t": step * self.config.eta, "step": step}
        if empirical is not None:
            values.update(self._empirical(empirical))
        if population is not None:
            movement = weight_movement(population, self.state_0)[1]
            values["population_max_move" if empirical is not None else "max_move"] = movement
        if self.probes is not None and self.targets is not None:
            empirical_values = None if empirical is None else forward_batch(empirical, self.probes)
            population_values = None if population is None else forward_batch(population, self.probes)
            if empirical_values is not None:
                values["excess_risk"], values["excess_risk_stderr"] = _mean_square(empirical_values - self.targets)
            if population_values is not None:
                zeta = self.targets - population_values
                mean, stderr = _mean_square(zeta)
                values["approx_error"], values["approx_error_stderr"] = _root(mean, stderr)
                if empirical_values is None:
                    values["excess_risk"], values["excess_risk_stderr"] = mean, stderr
                else:
                    gap = _root(*_mean_square(empirical_values - population_values))
                    values["estimation_gap"], values["estimation_gap_stderr"] = gap
                if self.config.harmonic_proxy:
                    values["proxy_residual"] = harmonic_residual(zeta, self.probes, {0, 1, 2})[0]
        point = TrajectoryPoint(**values)
        log.debug("step=%s t=%.4f risk=%s excess=%s", step, point.t, point.empirical_risk, point.excess_risk)
        return point


def _integrate(
    state_0: NetworkState,
    config: FlowConfig,
    mode: FlowMode,
    dataset: Optional[Dataset] = None,
    f: Optional[RegressionFunction] = None,
) -> Trajectory:
    config.validate_for(state_0.d)
    checkpoint = _Checkpointer(state_0, config, dataset, f)
    empirical = state_0 if dataset is not None else None
    population = state_0 if mode != FlowMode.EMPIRICAL else None
    points = []
    for step in range(config.n_steps + 1):
        if config.is_checkpoint(step):
            points.append(checkpoint(step, empirical, population))
        if step == config.n_steps:
            break
        if empirical is not None:
            assert dataset is not None
            empirical = _advance(empirical, empirical_direction(empirical, dataset), config.eta, step + 1)
        if population is not None:
            assert f is not None
            batch = named_stream(config.seed, "population", step)
            direction, _ = population_gradient(population, f, config.pop_batch, batch)
            population = _advance(population, direction, config.eta, step + 1)
    log.info("Finished %s run: %s steps of eta=%.4g", mode.value, config.n_steps, config.eta)
    final_state = empirical if empirical is not None else population
    assert final_state is not None
    return Trajectory(
        mode=mode,
        points=points,
        final_state=final_state,
        population_state=population if empirical is not None else None,
    )


def run_empirical(
    state_0: NetworkState, dataset: Dataset, config: FlowConfig, f: Optional[RegressionFunction] = None
) -> Trajectory:
    """Gradient descent on the training risk; with ``f`` the excess risk of f_hat is tracked as well."""
    _check_dataset(state_0, dataset)
    if f is not None:
        _check_function(state_0, f)
    return _integrate(state_0, config, FlowMode.EMPIRICAL, dataset=dataset, f=f)


def run_population(state_0: NetworkState, f: RegressionFunction, config: FlowConfig) -> Trajectory:
    _check_function(state_0, f)
    return _integrate(state_0, config, FlowMode.POPULATION, f=f)


def run_joint(state_0: NetworkState, dataset: Dataset, f: RegressionFunction, config: FlowConfig) -> Trajectory:
    """Both chains from the same initialization, advanced in lockstep.

    The empirical chain and its diagnostics are identical to ``run_empirical(state_0, dataset, config, f)``.
    """
    _check_dataset(state_0, dataset)
    _check_function(state_0, f)
    return _integrate(state_0, config, FlowMode.JOINT, dataset=dataset, f=f)


def vstat_terms(
    state_0: NetworkState,
    dataset: Dataset,
    f: RegressionFunction,
    plan: EpsilonPlan,
    U: int,
    oracle_size: int = MIN_ORACLE,
    seed: Seed = 0,
    oracle_points: Optional[np.ndarray] = None,
) -> list[float]:
    """Weighted gaps ((2T)^u / u!) |(1/n^u) G_0 H_0^(u-1) xi_0 - <G_0, H_0^(u-1) zeta_0>|_F / sqrt(d), u = 1..U.

    The population operator is replaced by its Nystrom discretization on ``oracle_points`` (fresh sphere points
    unless given).
    """
    if U < 1:
        raise ValueError(f"U must be at least 1, got {U}")
    if U > MAX_VSTAT_DEPTH:
        raise ScaleError(f"U={U} exceeds the supported depth {MAX_VSTAT_DEPTH}")
    _check_dataset(state_0, dataset)
    _check_function(state_0, f)
    if oracle_points is None:
        if oracle_size < MIN_ORACLE:
            raise ValueError(f"oracle_size must be at least {MIN_ORACLE}, got {oracle_size}")
        oracle_points = sample_sphere(state_0.d, oracle_size, seed)
    X = dataset.X
    Z = np.asarray(oracle_points, dtype=np.float64)
    n, size = X.shape[0], Z.shape[0]
    empirical = empirical_residual(state_0, dataset) / n
    population = (f.evaluate(Z) - forward_batch(state_0, Z)) / size

    terms = []
    for u in range(1, U + 1):
        if u > 1:
            empirical = adjoint_gradient(state_0, X, apply_gradient(state_0, X, empirical)) / n
            population = adjoint_gradient(state_0, Z, apply_gradient(state_0, Z, population)) / size
        gap = apply_gradient(state_0, X, empirical) - apply_gradient(state_0, Z, population)
        weight = (2.0 * plan.T_epsilon) ** u / math.factorial(u)
        terms.append(weight * float(np.linalg.norm(gap)) / math.sqrt(state_0.d))
    return terms


def vstat_concentration(
    state_0: NetworkState,
    dataset: Dataset,
    f: RegressionFunction,
    plan: EpsilonPlan,
    U: int,
    oracle_size: int = MIN_ORACLE,
    seed: Seed = 0,
    oracle_points: Optional[np.ndarray] = None,
) -> float:
    return math.fsum(vstat_terms(state_0, dataset, f, plan, U, oracle_size, seed, oracle_points))

"""Verification suites.

Each suite runs one experiment per seed and turns high-probability events into seed frequencies. Seed ``k`` of a
suite draws from the stream derived from (suite name, k), so suites never share randomness, and outcomes are
sorted by seed before any reduction, so the report does not depend on execution order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Optional, Sequence

import numpy as np

from ntklab.domain.errors import ConfigError, NumericalError, ScaleError
from ntklab.domain.models.enums import NoiseKind, RegressionKind, SuiteName
from ntklab.domain.models.flow import FlowConfig, Trajectory, run_empirical, run_joint, run_population
from ntklab.domain.models.kernel import (
    active_boundary_count,
    gram_analytical,
    gram_matrix,
    kernel_concentration,
    min_eigenvalue,
)
from ntklab.domain.models.network import NetworkState, init_antisymmetric
from ntklab.domain.models.spectrum import EpsilonPlan, build_spectrum, horizon, plan_epsilon
from ntklab.domain.models.sphere import (
    NoiseModel,
    RegressionFunction,
    data_spectral_norm,
    make_dataset,
    sample_sphere,
)
from ntklab.domain.models.streams import Seed, derived_seed, named_stream
from ntklab.domain.schemas.config import SeedsSpec
from ntklab.domain.schemas.report import SeedOutcome, SuiteReport
from ntklab.domain.schemas.suites import (
    ApproxSuiteConfig,
    BenignSuiteConfig,
    EstimationSuiteConfig,
    EventsSuiteConfig,
    KernelSuiteConfig,
    OverfitSuiteConfig,
    VerifyConfig,
)
from ntklab.service_layer.seeding import resolve_seed
from ntklab.settings.lab_settings import LabSettings
from ntklab.settings.suite_settings import SuiteSettings

log = logging.getLogger(__name__)

SPECTRUM_DEPTH = 6
DESCENT_TOLERANCE = 1e-12


def seed_outcome(seed: int, checks: dict[str, Any], values: dict[str, Any]) -> SeedOutcome:
    """Packs one seed's indicators; measured values must be finite."""
    measured = {}
    for key, value in values.items():
        value = float(value)
        if not math.isfinite(value):
            raise NumericalError(f"seed {seed}: measurement {key} is not finite ({value})")
        measured[key] = value
    indicators = {key: bool(flag) for key, flag in checks.items()}
    return SeedOutcome(seed=seed, passed=all(indicators.values()), checks=indicators, values=measured)


def build_report(
    suite: SuiteName,
    config: dict[str, Any],
    outcomes: Sequence[SeedOutcome],
    thresholds: dict[str, float],
    aggregates: Optional[dict[str, bool]] = None,
    surrogate_flags: Optional[dict[str, bool]] = None,
    informational: Optional[dict[str, Any]] = None,
) -> SuiteReport:
    """Reduces per-seed outcomes (in seed order) to marginal and joint frequencies and a verdict."""
    if not outcomes:
        raise ConfigError("a suite needs at least one seed")
    ordered = sorted(outcomes, key=lambda outcome: outcome.seed)
    count = len(ordered)
    marginals = {key: sum(outcome.checks[key] for outcome in ordered) / count for key in thresholds}
    aggregates = aggregates or {}
    verdict = all(marginals[key] >= threshold for key, threshold in thresholds.items()) and all(aggregates.values())
    report = SuiteReport(
        suite=SuiteName(suite).value,
        config=config,
        thresholds=thresholds,
        per_seed=ordered,
        marginals=marginals,
        frequency=sum(outcome.passed for outcome in ordered) / count,
        aggregates=aggregates,
        surrogate_flags=surrogate_flags or {},
        informational=informational or {},
        verdict=verdict,
    )
    log.info("Suite %s: frequency %.3f over %s seeds, verdict %s", report.suite, report.frequency, count, verdict)
    return report


def _medians(outcomes: Sequence[SeedOutcome], keys: Sequence[str]) -> list[float]:
    return [float(np.median([outcome.values[key] for outcome in outcomes])) for key in keys]


def _non_increasing(values: np.ndarray) -> bool:
    return bool(np.all(values[1:] <= values[:-1] * (1.0 + DESCENT_TOLERANCE) + DESCENT_TOLERANCE))


def _check_plan_function(f: RegressionFunction) -> None:
    if f.kind == RegressionKind.CUSTOM:
        raise ConfigError("this suite needs a linear or harmonic regression function, whose plan is exact")


def _noisier(f: RegressionFunction, half_width: float) -> Optional[RegressionFunction]:
    """``f`` shrunk so that labels stay bounded under the larger noise, or None when that is not possible."""
    room = 1.0 - half_width
    if f.sup_bound <= room:
        return f
    if f.kind != RegressionKind.LINEAR or f.beta is None:
        return None
    return RegressionFunction.linear(f.beta * room / f.sup_bound)


class VerifyService:
    """Application service running the verification suites."""

    def __init__(self, settings: LabSettings, suite_settings: SuiteSettings, jobs: Optional[int] = None):
        """Initialize verify service; ``jobs`` seeds run concurrently."""
        self.settings = settings
        self.suite_settings = suite_settings
        self.jobs = jobs or settings.JOBS

    def _map(self, run_seed: Callable[[int], SeedOutcome], seeds: Sequence[int]) -> list[SeedOutcome]:
        if self.jobs == 1:
            return [run_seed(seed) for seed in seeds]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(run_seed, seeds))

    def seeds_for(self, seeds: SeedsSpec) -> list[int]:
        if seeds.values is not None or seeds.base is not None:
            return seeds.resolve()
        return seeds.resolve(resolve_seed(None, self.settings))

    @property
    def factor(self) -> float:
        return self.suite_settings.STDERR_FACTOR

    def suite_events(self, config: EventsSuiteConfig, seeds: Sequence[int]) -> SuiteReport:
        """Initialization and data events: weight norms, data norm, Gram minimum eigenvalues, boundary counts."""
        d, n, m = config.d, config.n, config.m
        if n > self.settings.EVENTS_N_CAP or m > self.settings.EVENTS_M_CAP:
            raise ScaleError(
                f"events suite supports n <= {self.settings.EVENTS_N_CAP} and m <= {self.settings.EVENTS_M_CAP}"
            )
        cap = self.settings.GRAM_CAP

        def run_seed(seed: int) -> SeedOutcome:
            root = derived_seed(seed, SuiteName.EVENTS.value)
            X = sample_sphere(d, n, named_stream(root, "data"))
            state = init_antisymmetric(m, d, named_stream(root, "init"))
            values = {
                "weight_norm_min": float(np.min(np.linalg.norm(state.W, axis=1))),
                "data_norm": data_spectral_norm(X),
                "gram_analytical_min": min_eigenvalue(gram_analytical(X, cap)),
                "gram_initial_min": min_eigenvalue(gram_matrix(state, X, cap)),
                "boundary_max": float(np.max(active_boundary_count(state, X))),
            }
            checks = {
                "weight_norm": values["weight_norm_min"] >= math.sqrt(d / 2.0),
                "data_norm": values["data_norm"] <= 2.0 * math.sqrt(n / d),
                "gram_analytical_min": values["gram_analytical_min"] >= n / (5.0 * d),
                "gram_initial_min": values["gram_initial_min"] >= n / (10.0 * d),
                "boundary": values["boundary_max"] <= 33.0 * math.sqrt(m * d),
            }
            return seed_outcome(seed, checks, values)

        threshold = config.threshold if config.threshold is not None else self.suite_settings.EVENTS_THRESHOLD
        keys = ("weight_norm", "data_norm", "gram_analytical_min", "gram_initial_min", "boundary")
        return build_report(
            SuiteName.EVENTS, config.model_dump(), self._map(run_seed, seeds), {key: threshold for key in keys}
        )

    def suite_kernel(self, config: KernelSuiteConfig, seeds: Sequence[int]) -> SuiteReport:
        """Concentration of the initial NTK around the analytical one across a width ladder, on shared probes."""
        d, widths = config.d, config.widths

        def run_seed(seed: int) -> SeedOutcome:
            root = derived_seed(seed, SuiteName.KERNEL.value)
            probes = named_stream(root, "probe")
            checks, values = {}, {}
            for m in widths:
                state = init_antisymmetric(m, d, named_stream(root, "init", m))
                concentration = kernel_concentration(state, config.probes, probes, self.settings.GRAM_CAP)
                values[f"difference_{m}"] = concentration.difference_norm
                values[f"operator_norm_{m}"] = concentration.operator_norm
                checks[f"envelope_{m}"] = concentration.difference_norm <= 5.0 * math.sqrt(math.log(2 * m) / m)
                checks[f"operator_norm_{m}"] = concentration.operator_norm <= 1.0 / (2 * d)
            return seed_outcome(seed, checks, values)

        outcomes = self._map(run_seed, seeds)
        medians = _medians(outcomes, [f"difference_{m}" for m in widths])
        threshold = config.threshold if config.threshold is not None else self.suite_settings.KERNEL_THRESHOLD
        thresholds = {f"envelope_{m}": threshold for m in widths} | {f"operator_norm_{m}": threshold for m in widths}
        return build_report(
            SuiteName.KERNEL,
            config.model_dump(),
            outcomes,
            thresholds,
            aggregates={"medians_decreasing": all(b < a for a, b in zip(medians, medians[1:]))},
            informational={"median_difference": {str(m): value for m, value in zip(widths, medians)}},
        )

    def suite_overfit(self, config: OverfitSuiteConfig, seeds: Sequence[int]) -> SuiteReport:
        """Empirical risk decay on the training set up to T = 8d log(2/epsilon)."""
        d, n, m, eps = config.d, config.n, config.m, config.epsilon
        f, noise = config.f.build(d), config.noise.build()
        t_end = horizon(1.0 / (4 * d), eps)
        radius = 32.0 * math.sqrt(d / m)
        drift_bound = 12.0 * math.sqrt(n) / (m * d) ** 0.25

        def run_seed(seed: int) -> SeedOutcome:
            root = derived_seed(seed, SuiteName.OVERFIT.value)
            dataset = make_dataset(f, noise, d, n, named_stream(root, "data"))
            state = init_antisymmetric(m, d, named_stream(root, "init"))
            flow = FlowConfig.for_horizon(
                t_end, config.eta, checkpoint_every=config.checkpoint_every, seed=root, gradient_drift=True
            )
            trajectory = run_empirical(state, dataset, flow)
            t, risk = trajectory.times(), trajectory.series("empirical_risk")
            residual_envelope = math.sqrt(n) * np.exp(-t / (8.0 * d))
            values = {
                "final_risk": risk[-1],
                "max_move": float(np.max(trajectory.series("max_move"))),
                "max_drift": float(np.max(trajectory.series("gradient_drift"))),
                "envelope_ratio": float(np.max(risk / np.exp(-t / (4.0 * d)))),
                "residual_envelope_ratio": float(np.max(trajectory.series("residual_norm") / residual_envelope)),
            }
            checks = {
                "final_risk": risk[-1] <= eps,
                "monotone": _non_increasing(risk),
                "envelope": values["envelope_ratio"] <= 1.0,
                "movement": values["max_move"] <= radius,
                "drift": values["max_drift"] <= drift_bound,
            }
            return seed_outcome(seed, checks, values)

        settings = self.suite_settings
        thresholds = {
            "final_risk": _pick(config.risk_threshold, settings.OVERFIT_RISK_THRESHOLD),
            "monotone": 1.0,
            "envelope": _pick(config.envelope_threshold, settings.OVERFIT_ENVELOPE_THRESHOLD),
            "movement": _pick(config.movement_threshold, settings.MOVEMENT_THRESHOLD),
            "drift": _pick(config.drift_threshold, settings.DRIFT_THRESHOLD),
        }
        return build_report(
            SuiteName.OVERFIT,
            config.model_dump() | {"t_end": t_end},
            self._map(run_seed, seeds),
            thresholds,
            surrogate_flags={"envelope": True},
        )

    def _plan(self, f: RegressionFunction, d: int, epsilon: float, root: int) -> EpsilonPlan:
        return plan_epsilon(f, d, epsilon, build_spectrum(d, SPECTRUM_DEPTH), seed=named_stream(root, "plan"))

    def suite_approx(self, config: ApproxSuiteConfig, seeds: Sequence[int]) -> SuiteReport:
        """Population flow to T_epsilon: exponential decay of |zeta_t|, final accuracy and neuron movement."""
        d, m, eps = config.d, config.m, config.epsilon
        f = config.f.build(d)
        _check_plan_function(f)
        plan = self._plan(f, d, eps, 0)
        lam = plan.lambda_epsilon
        radius = 2.0 * math.sqrt(2.0) / (lam * math.sqrt(m * d))
        factor = self.factor

        def run_seed(seed: int) -> SeedOutcome:
            root = derived_seed(seed, SuiteName.APPROX.value)
            state = init_antisymmetric(m, d, named_stream(root, "init"))
            flow = FlowConfig.for_horizon(
                plan.T_epsilon,
                config.max_eta,
                checkpoint_every=config.checkpoint_every,
                pop_batch=config.pop_batch,
                mc_risk=config.mc_risk,
                seed=root,
                harmonic_proxy=True,
            )
            trajectory = run_population(state, f, flow)
            t = trajectory.times()
            error, stderr = trajectory.series("approx_error"), trajectory.series("approx_error_stderr")
            values = {
                "final_error": error[-1],
                "final_stderr": stderr[-1],
                "max_move": float(np.max(trajectory.series("max_move"))),
                "proxy_residual": trajectory.final.proxy_residual,
            }
            checks = {
                "decay": bool(np.all(error <= np.exp(-lam * t / 2.0) + factor * stderr)),
                "final": error[-1] <= eps / 2.0 + factor * stderr[-1],
                "movement": values["max_move"] <= radius,
            }
            return seed_outcome(seed, checks, values)

        threshold = _pick(config.threshold, self.suite_settings.APPROX_THRESHOLD)
        thresholds = {
            "decay": threshold,
            "final": threshold,
            "movement": _pick(config.movement_threshold, self.suite_settings.MOVEMENT_THRESHOLD),
        }
        return build_report(
            SuiteName.APPROX,
            config.model_dump() | {"plan": plan.model_dump()},
            self._map(run_seed, seeds),
            thresholds,
            informational={"proxy": "degree <= 2 projection residual of zeta at T_epsilon, recorded only"},
        )

    def suite_estimation(self, config: EstimationSuiteConfig, seeds: Sequence[int]) -> SuiteReport:
        """Joint runs over a sample-size ladder: the gap |f_hat - f| at T_epsilon should shrink as n grows."""
        d, m, eps = config.d, config.m, config.epsilon
        f, noise = config.f.build(d), config.noise.build()

        def run_seed(seed: int) -> SeedOutcome:
            root = derived_seed(seed, SuiteName.ESTIMATION.value)
            plan = self._plan(f, d, eps, root)
            state = init_antisymmetric(m, d, named_stream(root, "init"))
            flow = FlowConfig.for_horizon(
                plan.T_epsilon,
                config.max_eta,
                checkpoint_every=config.checkpoint_every,
                pop_batch=config.pop_batch,
                mc_risk=config.mc_risk,
                seed=root,
            )
            gap_zero = True
            values = {}
            for n in config.ladder:
                dataset = make_dataset(f, noise, d, n, named_stream(root, "data", n))
                trajectory = run_joint(state, dataset, f, flow)
                gap, stderr = trajectory.series("estimation_gap"), trajectory.series("estimation_gap_stderr")
                gap_zero = gap_zero and gap[0] == 0.0
                values[f"gap_{n}"] = gap[-1]
                values[f"gap_stderr_{n}"] = stderr[-1]
                values[f"excess_{n}"] = trajectory.final.excess_risk
            return seed_outcome(seed, {"gap_zero": gap_zero}, values)

        outcomes = self._map(run_seed, seeds)
        gaps = _medians(outcomes, [f"gap_{n}" for n in config.ladder])
        stderrs = _medians(outcomes, [f"gap_stderr_{n}" for n in config.ladder])
        excess = _medians(outcomes, [f"excess_{n}" for n in config.ladder])
        decreasing = all(gaps[i + 1] < gaps[i] + 2.0 * stderrs[i + 1] for i in range(len(gaps) - 1))
        return build_report(
            SuiteName.ESTIMATION,
            config.model_dump(),
            outcomes,
            {"gap_zero": 1.0},
            aggregates={"gap_decreasing": decreasing},
            surrogate_flags={"gap_decreasing": True},
            informational={
                "median_gap": {str(n): value for n, value in zip(config.ladder, gaps)},
                "median_excess_risk": {str(n): value for n, value in zip(config.ladder, excess)},
                "epsilon": eps,
            },
        )

    def suite_benign(self, config: BenignSuiteConfig, seeds: Sequence[int]) -> SuiteReport:
        """Noisy labels: training risk below epsilon together with excess risk below epsilon at T_epsilon."""
        d, n, m, eps = config.d, config.n, config.m, config.epsilon
        f, noise = config.f.build(d), config.noise.build()
        factor = self.factor
        loud = None
        if config.observe_noise:
            loud = _noisier(f, config.large_noise)
            if loud is None:
                log.warning(
                    "Skipping the large-noise observation: f* cannot be shrunk below 1 - %s", config.large_noise
                )
        loud_kind = noise.kind if noise.kind != NoiseKind.NONE else NoiseKind.UNIFORM
        loud_noise = NoiseModel(kind=loud_kind, half_width=config.large_noise)

        def run_seed(seed: int) -> SeedOutcome:
            root = derived_seed(seed, SuiteName.BENIGN.value)
            plan = self._plan(f, d, eps, root)
            state = init_antisymmetric(m, d, named_stream(root, "init"))
            flow = FlowConfig.for_horizon(
                plan.T_epsilon,
                config.max_eta,
                checkpoint_every=config.checkpoint_every,
                pop_batch=config.pop_batch,
                mc_risk=config.mc_risk,
                seed=root,
            )
            trajectory = run_joint(state, make_dataset(f, noise, d, n, named_stream(root, "data")), f, flow)
            final = trajectory.final
            values = {
                "empirical_risk": final.empirical_risk,
                "excess_risk": final.excess_risk,
                "excess_stderr": final.excess_risk_stderr,
                "estimation_gap": final.estimation_gap,
            }
            benign = final.empirical_risk <= eps and final.excess_risk <= eps + factor * final.excess_risk_stderr
            if loud is not None:
                observed = _observe(state, loud, loud_noise, n, flow, named_stream(root, "loud_data"))
                values["large_noise_empirical_risk"] = observed.final.empirical_risk
                values["large_noise_excess_risk"] = observed.final.excess_risk
            return seed_outcome(seed, {"benign": benign}, values)

        outcomes = self._map(run_seed, seeds)
        informational: dict[str, Any] = {}
        if loud is not None:
            keys = ["large_noise_empirical_risk", "large_noise_excess_risk"]
            risk, excess = _medians(outcomes, keys)
            informational["large_noise"] = {
                "half_width": config.large_noise,
                "median_empirical_risk": risk,
                "median_excess_risk": excess,
            }
        return build_report(
            SuiteName.BENIGN,
            config.model_dump(),
            outcomes,
            {"benign": _pick(config.threshold, self.suite_settings.BENIGN_THRESHOLD)},
            surrogate_flags={"benign": True},
            informational=informational,
        )

    def run(self, config: VerifyConfig, suites: Optional[Sequence[SuiteName]] = None) -> list[SuiteReport]:
        """Runs the requested suites (default: those listed in ``config``) on the configured seeds."""
        seeds = self.seeds_for(config.seeds)
        runners = {
            SuiteName.EVENTS: lambda: self.suite_events(config.events, seeds),
            SuiteName.KERNEL: lambda: self.suite_kernel(config.kernel, seeds),
            SuiteName.OVERFIT: lambda: self.suite_overfit(config.overfit, seeds),
            SuiteName.APPROX: lambda: self.suite_approx(config.approx, seeds),
            SuiteName.ESTIMATION: lambda: self.suite_estimation(config.estimation, seeds),
            SuiteName.BENIGN: lambda: self.suite_benign(config.benign, seeds),
        }
        reports = []
        for name in suites if suites is not None else config.suites:
            log.info("Running suite %s on %s seeds with %s job(s)", SuiteName(name).value, len(seeds), self.jobs)
            reports.append(runners[SuiteName(name)]())
        return reports


def _pick(configured: Optional[float], default: float) -> float:
    return configured if configured is not None else default


def _observe(
    state: NetworkState, f: RegressionFunction, noise: NoiseModel, n: int, flow: FlowConfig, stream: Seed
) -> Trajectory:
    dataset = make_dataset(f, noise, f.d, n, stream)
    return run_empirical(state, dataset, flow, f)

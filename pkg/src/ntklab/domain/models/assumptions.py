"""Feasibility ledger for the thirteen sample-size and width conditions.

Every condition is rearranged into ``lhs <= rhs`` with both sides positive and evaluated in log space, so that
factorials and large powers never overflow. The margin of a condition is ``log(rhs) - log(lhs)``: positive when it
holds, negative when it fails, ``-inf`` when the left side is infinite.
"""

import logging
import math
from typing import Literal, Optional

from pydantic import Field, model_validator
from scipy.special import logsumexp

from ntklab.domain.errors import InvalidEigenvalueError
from ntklab.domain.schema_model import LabModel

log = logging.getLogger(__name__)

CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii")
MAX_DEPTH = 64
DEFAULT_C = 1.0
EIGENVALUE_TOLERANCE = 1e-12

DESCRIPTIONS = {
    "i": "m exp(-d/16) <= delta/6",
    "ii": "C sqrt(d) <= (1 - 2/sqrt(5)) sqrt(n)",
    "iii": "n exp(-2d) <= delta/6",
    "iv": "n (e/2)^(-md/(40n)) <= delta/6",
    "v": "12 d^(1/4) / m^(1/4) <= sqrt(1/10) - 1/4",
    "vi": "1 + 8/(m lambda^2 d) <= d/2",
    "vii": "20 sqrt(log(2m)/m) + 16/((md)^(1/4) sqrt(pi lambda)) <= lambda",
    "viii": "(8T)^U / (d^U U!) <= eps/14",
    "ix": "(32 sqrt(2) / (sqrt(m) pi lambda)) sum_{u=2..U} T^u / (u! d^(u-1/2)) <= eps/14",
    "x": "(6/(md)^(1/4)) sum_{u=2..U} (8T)^u / (d^u u!) <= eps/14",
    "xi": "24 T / (md^3)^(1/4) <= eps/14",
    "xii": "4 T / ((md^3)^(1/4) sqrt(pi lambda)) <= eps/14",
    "xiii": "2 sum_{u=1..U} (2T)^u / (u! d^u sqrt(floor(n/u))) <= eps/14",
}


class ParamTuple(LabModel):
    """Sample size, width, dimension, accuracy, confidence, cutoff eigenvalue and derivative depth."""

    n: int = Field(ge=1)
    m: int = Field(ge=2)
    d: int = Field(ge=1)
    epsilon: float = Field(gt=0.0, le=2.0)
    delta: float = Field(gt=0.0, lt=1.0)
    lambda_epsilon: float = Field(gt=0.0)
    U: Optional[int] = Field(default=None, ge=1, le=MAX_DEPTH)
    C: float = Field(default=DEFAULT_C, gt=0.0)

    @model_validator(mode="after")
    def _check_width(self) -> "ParamTuple":
        if self.m % 2:
            raise ValueError(f"width m must be even, got {self.m}")
        return self

    @property
    def T_epsilon(self) -> float:
        return (2.0 / self.lambda_epsilon) * math.log(2.0 / self.epsilon)


class ConditionVerdict(LabModel):
    key: str
    description: str
    holds: bool
    margin: float
    log_lhs: float
    log_rhs: float


class AssumptionReport(LabModel):
    params: ParamTuple
    T_epsilon: float
    C: float
    C_source: Literal["default", "configured"]
    chosen_U: Optional[int]
    verdicts: dict[str, bool]
    margins: dict[str, float]
    conditions: list[ConditionVerdict]
    all_hold: bool
    binding: list[str] = []


def _log(value: float) -> float:
    return -math.inf if value == 0.0 else math.log(value)


def _log_sum(log_terms: list[float]) -> float:
    finite = [term for term in log_terms if term != -math.inf]
    if not finite:
        return -math.inf
    return float(logsumexp(finite))


def _check_eigenvalue(params: ParamTuple) -> None:
    ceiling = 1.0 / (4 * params.d)
    if params.lambda_epsilon > ceiling * (1.0 + EIGENVALUE_TOLERANCE):
        raise InvalidEigenvalueError(
            f"lambda_epsilon={params.lambda_epsilon} exceeds the top eigenvalue 1/(4d) = {ceiling}"
        )


def _depth_condition(params: ParamTuple, U: int) -> tuple[float, float]:
    log_T = _log(params.T_epsilon)
    log_lhs = U * (math.log(8.0) + log_T - math.log(params.d)) - math.lgamma(U + 1)
    return log_lhs, math.log(params.epsilon / 14.0)


def _log_sides(params: ParamTuple, U: int) -> dict[str, tuple[float, float]]:
    n, m, d = params.n, params.m, params.d
    lam, eps = params.lambda_epsilon, params.epsilon
    log_n, log_m, log_d = math.log(n), math.log(m), math.log(d)
    log_T = _log(params.T_epsilon)
    log_delta_budget = math.log(params.delta / 6.0)
    log_eps_budget = math.log(eps / 14.0)
    quarter_md = 0.25 * (log_m + log_d)
    quarter_md3 = 0.25 * (log_m + 3.0 * log_d)

    if U > n:
        log_xiii = math.inf
    else:
        log_xiii = math.log(2.0) + _log_sum(
            [
                u * (math.log(2.0) + log_T - log_d) - math.lgamma(u + 1) - 0.5 * math.log(n // u)
                for u in range(1, U + 1)
            ]
        )

    return {
        "i": (log_m - d / 16.0, log_delta_budget),
        "ii": (math.log(params.C) + 0.5 * log_d, math.log(1.0 - 2.0 / math.sqrt(5.0)) + 0.5 * log_n),
        "iii": (log_n - 2.0 * d, log_delta_budget),
        "iv": (log_n - (m * d / (40.0 * n)) * (1.0 - math.log(2.0)), log_delta_budget),
        "v": (math.log(12.0) + 0.25 * (log_d - log_m), math.log(math.sqrt(0.1) - 0.25)),
        "vi": (math.log1p(math.exp(math.log(8.0) - log_m - 2.0 * math.log(lam) - log_d)), math.log(d / 2.0)),
        "vii": (
            _log_sum(
                [
                    math.log(20.0) + 0.5 * (math.log(math.log(2.0 * m)) - log_m),
                    math.log(16.0) - quarter_md - 0.5 * math.log(math.pi * lam),
                ]
            ),
            math.log(lam),
        ),
        "viii": _depth_condition(params, U),
        "ix": (
            math.log(32.0 * math.sqrt(2.0))
            - 0.5 * log_m
            - math.log(math.pi * lam)
            + _log_sum([u * log_T - math.lgamma(u + 1) - (u - 0.5) * log_d for u in range(2, U + 1)]),
            log_eps_budget,
        ),
        "x": (
            math.log(6.0)
            - quarter_md
            + _log_sum([u * (math.log(8.0) + log_T - log_d) - math.lgamma(u + 1) for u in range(2, U + 1)]),
            log_eps_budget,
        ),
        "xi": (math.log(24.0) + log_T - quarter_md3, log_eps_budget),
        "xii": (math.log(4.0) + log_T - quarter_md3 - 0.5 * math.log(math.pi * lam), log_eps_budget),
        "xiii": (log_xiii, log_eps_budget),
    }


def auto_select_U(params: ParamTuple, U_max: int = MAX_DEPTH) -> Optional[int]:
    """Smallest depth U <= U_max for which the factorial-decay condition (viii) holds, or None."""
    if not 1 <= U_max <= MAX_DEPTH:
        raise ValueError(f"U_max must lie in [1, {MAX_DEPTH}], got {U_max}")
    _check_eigenvalue(params)
    for U in range(1, U_max + 1):
        log_lhs, log_rhs = _depth_condition(params, U)
        if log_lhs <= log_rhs:
            return U
    return None


def check(params: ParamTuple, U_max: int = MAX_DEPTH) -> AssumptionReport:
    """Evaluates all thirteen conditions; without an explicit U the smallest feasible one is chosen."""
    _check_eigenvalue(params)
    chosen_U = params.U if params.U is not None else auto_select_U(params, U_max)
    # An infeasible depth is reported as None and the depth-dependent conditions are shown at U_max.
    U = chosen_U if chosen_U is not None else U_max
    conditions = []
    for key, (log_lhs, log_rhs) in _log_sides(params, U).items():
        holds = log_lhs <= log_rhs
        margin = -math.inf if log_lhs == math.inf else log_rhs - log_lhs
        conditions.append(
            ConditionVerdict(
                key=key, description=DESCRIPTIONS[key], holds=holds, margin=margin, log_lhs=log_lhs, log_rhs=log_rhs
            )
        )
    report = AssumptionReport(
        params=params,
        T_epsilon=params.T_epsilon,
        C=params.C,
        C_source="configured" if "C" in params.model_fields_set else "default",
        chosen_U=chosen_U,
        verdicts={condition.key: condition.holds for condition in conditions},
        margins={condition.key: condition.margin for condition in conditions},
        conditions=conditions,
        all_hold=all(condition.holds for condition in conditions),
    )
    report.binding = binding_constraints(report)
    log.debug("Checked n=%s m=%s d=%s U=%s: all_hold=%s", params.n, params.m, params.d, chosen_U, report.all_hold)
    return report


def binding_constraints(report: AssumptionReport) -> list[str]:
    """Condition keys sorted by margin, most binding first."""
    order = {key: index for index, key in enumerate(CONDITIONS)}
    return sorted(report.margins, key=lambda key: (report.margins[key], order[key]))


def evaluate_direct(params: ParamTuple, U: int) -> dict[str, tuple[float, float]]:
    """Both sides of each condition in plain floating point, for cross-checking the log-space ledger.

    Overflows surface as ``inf`` or ``OverflowError``; callers only compare tuples where neither happens.
    """
    n, m, d = params.n, params.m, params.d
    lam, eps, T = params.lambda_epsilon, params.epsilon, params.T_epsilon
    delta_budget, eps_budget = params.delta / 6.0, eps / 14.0
    if U > n:
        xiii = math.inf
    else:
        xiii = 2.0 * math.fsum((2.0 * T) ** u / (math.factorial(u) * d**u * math.sqrt(n // u)) for u in range(1, U + 1))
    return {
        "i": (m * math.exp(-d / 16.0), delta_budget),
        "ii": (params.C * math.sqrt(d), (1.0 - 2.0 / math.sqrt(5.0)) * math.sqrt(n)),
        "iii": (n * math.exp(-2.0 * d), delta_budget),
        "iv": (n * (math.e / 2.0) ** (-m * d / (40.0 * n)), delta_budget),
        "v": (12.0 * d**0.25 / m**0.25, math.sqrt(0.1) - 0.25),
        "vi": (1.0 + 8.0 / (m * lam**2 * d), d / 2.0),
        "vii": (
            20.0 * math.sqrt(math.log(2.0 * m) / m) + 16.0 / ((m * d) ** 0.25 * math.sqrt(math.pi * lam)),
            lam,
        ),
        "viii": ((8.0 * T) ** U / (d**U * math.factorial(U)), eps_budget),
        "ix": (
            (32.0 * math.sqrt(2.0) / (math.sqrt(m) * math.pi * lam))
            * math.fsum(T**u / (math.factorial(u) * d ** (u - 0.5)) for u in range(2, U + 1)),
            eps_budget,
        ),
        "x": (
            (6.0 / (m * d) ** 0.25) * math.fsum((8.0 * T) ** u / (d**u * math.factorial(u)) for u in range(2, U + 1)),
            eps_budget,
        ),
        "xi": (24.0 * T / (m * d**3) ** 0.25, eps_budget),
        "xii": (4.0 * T / ((m * d**3) ** 0.25 * math.sqrt(math.pi * lam)), eps_budget),
        "xiii": (xiii, eps_budget),
    }

"""
FR-05: Bounds Analysis - Lower Bound 및 Parameter 조건 평가

Adversary가 σ 확률로 puzzle을 풀기 위해 받아야 하는 평균 bit 수의
lower bound를 closed form으로 계산합니다.

주요 기능:
- Coupon-collector 기대값과 tail bound (단일 / union)
- Informed hash query 하한 (ε − 2^{-V})(L+1)/2
- LP closed form F_L(β, γ) 및 unique index 하한 (단일 / 다중 adversary)
- 단일 adversary bound, 다중 adversary bound (term 별 분해)
- Simple strategy 비용 σNP(L+1)/(2q_H)
- Practical parameter 조건 1–5 및 range 검사

모든 지수 계산은 expm1/log1p를, J^s 항은 log-space를 사용합니다.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    COVERAGE_EXPONENT,
    DEFAULT_DELTA,
    DEFAULT_SIGMA,
    DEFAULT_V,
    DELTA_LIMIT,
    MUCH_LARGER_FACTOR,
    PARAMETER_RANGES,
    UNION_TAIL_LIMIT,
)
from .errors import DomainError
from .logger import setup_logger

logger = setup_logger(__name__)

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_TOL = 1e-12


def _one_minus_exp(x: float) -> float:
    """1 − e^{−x}"""
    return -math.expm1(-x)


def _two_pow_neg(V: float) -> float:
    return math.ldexp(1.0, -int(V)) if float(V).is_integer() else 2.0 ** (-V)


# ----------------------------------------------------------------------
# Data types
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class BoundInputs:
    """
    Bound 평가 입력

    Attributes:
        N, n, L, m: puzzle 파라미터
        q_H: adversary 당 hash query 예산
        V: informedness slack (bits)
        delta: deviation fraction, 0 < δ < 1
        sigma: 목표 성공 확률 (실제 oracle)
        epsilon: Ω 환경에서의 advantage
        A: adversary 수
        P: puzzle 수 (기본 A·m)
    """

    N: int
    n: int
    L: int
    m: int = 1
    q_H: int = 1
    V: int = DEFAULT_V
    delta: float = DEFAULT_DELTA
    sigma: float = DEFAULT_SIGMA
    epsilon: float = DEFAULT_SIGMA
    A: int = 1
    P: Optional[int] = None

    def __post_init__(self):
        if self.P is None:
            object.__setattr__(self, "P", self.A * self.m)
        for name in ("N", "n", "L", "m", "q_H", "V", "A", "P"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name}은 양수여야 합니다: {getattr(self, name)}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta는 (0, 1) 범위여야 합니다: {self.delta}")
        for name in ("sigma", "epsilon"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise DomainError(f"{name}은 [0, 1] 범위여야 합니다: {value}")

    def with_changes(self, **changes) -> "BoundInputs":
        """일부 필드만 바꾼 복사본 (A나 m이 바뀌면 P도 다시 계산)"""
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        if ("A" in changes or "m" in changes) and "P" not in changes:
            values["P"] = None
        values.update(changes)
        return BoundInputs(**values)


@dataclass(frozen=True)
class CouponTail:
    """
    Coupon-collector tail bound 결과

    Attributes:
        mu: threshold (unique index 수)
        eta: 표준화 편차
        tail: Pr[Y ≤ μ] 상한, [0, 1]
        log_tail: tail의 자연로그 (clamp 전)
        valid: η > 0 일 때만 True (False면 bound가 vacuous, tail = 1)
    """

    mu: float
    eta: float
    tail: float
    log_tail: float
    valid: bool


@dataclass
class BoundResult:
    """
    Lower bound의 term 별 분해

    total = max(0, dominant − Σ penalties), raw는 clamp 전 값
    """

    dominant_term: float
    penalty_terms: List[Tuple[str, float]] = field(default_factory=list)
    total: float = 0.0
    raw: float = 0.0

    @property
    def penalty_sum(self) -> float:
        return float(sum(value for _, value in self.penalty_terms))

    @property
    def vacuous(self) -> bool:
        return self.raw <= 0

    def to_dict(self) -> Dict:
        return {
            "dominant_term": self.dominant_term,
            "penalty_terms": {name: value for name, value in self.penalty_terms},
            "penalty_sum": self.penalty_sum,
            "raw": self.raw,
            "total": self.total,
            "vacuous": self.vacuous,
        }


def _assemble(dominant: float, penalties: List[Tuple[str, float]]) -> BoundResult:
    raw = dominant - sum(value for _, value in penalties)
    return BoundResult(dominant_term=dominant, penalty_terms=penalties, total=max(0.0, raw), raw=raw)


# ----------------------------------------------------------------------
# Coupon collector
# ----------------------------------------------------------------------
def expected_unique(N: int, c: float) -> float:
    """
    c번 복원추출 시 unique index 기대값 N[1 − (1 − 1/N)^c]

    Args:
        N: index 수 (≥ 1)
        c: 추출 횟수 (≥ 0)
    """
    if N < 1 or c < 0:
        raise DomainError(f"N ≥ 1, c ≥ 0 이어야 합니다: N={N}, c={c}")
    if c == 0:
        return 0.0
    if N == 1:
        return 1.0
    return -N * math.expm1(c * math.log1p(-1.0 / N))


def coupon_tail(N: int, c: float, delta: float) -> CouponTail:
    """
    Pr[Y ≤ μ] ≤ e^{−η²/2} / (√(2π) η)

    μ = N(1−δ)[1−(1−1/N)^c],
    η = (c − N ln(N/(N−μ))) / (N √(1/(N−μ) − 1/N))

    η ≤ 0이면 tail = 1, valid = False (bound가 vacuous).
    """
    if not 0 < delta < 1:
        raise DomainError(f"delta는 (0, 1) 범위여야 합니다: {delta}")

    mu = (1.0 - delta) * expected_unique(N, c)
    if mu <= 0 or mu >= N:
        return CouponTail(mu=mu, eta=0.0, tail=1.0, log_tail=0.0, valid=False)

    log_ratio = -math.log1p(-mu / N)                 # ln(N/(N−μ))
    numerator = c - N * log_ratio
    denominator = math.sqrt(N * mu / (N - mu))       # N √(1/(N−μ) − 1/N)
    eta = numerator / denominator

    if eta <= 0:
        return CouponTail(mu=mu, eta=eta, tail=1.0, log_tail=0.0, valid=False)

    log_tail = -0.5 * eta * eta - math.log(_SQRT_2PI * eta)
    tail = 1.0 if log_tail >= 0 else math.exp(log_tail)
    return CouponTail(mu=mu, eta=eta, tail=tail, log_tail=log_tail, valid=True)


def union_tail(N: int, n: int, s: int, delta: float, J: float) -> CouponTail:
    """
    J개 index set 중 어떤 s개를 골라도 unique index가 μ_s 이하일 확률의 상한

    Pr[Y^J_s ≤ μ_s] ≤ tail(N, s·n, δ) · J^s  (log-space로 계산, 1에서 clamp)
    """
    if s < 1 or J < 1:
        raise DomainError(f"s ≥ 1, J ≥ 1 이어야 합니다: s={s}, J={J}")
    base = coupon_tail(N, s * n, delta)
    if not base.valid:
        return base
    log_bound = base.log_tail + s * math.log(J)
    tail = 1.0 if log_bound >= 0 else math.exp(log_bound)
    return CouponTail(mu=base.mu, eta=base.eta, tail=tail, log_tail=log_bound, valid=True)


# ----------------------------------------------------------------------
# Informed queries and LP
# ----------------------------------------------------------------------
def informed_query_floor(epsilon: float, V: float, L: int) -> float:
    """
    Ω 환경에서 advantage ε를 얻기 위한 평균 informed hash query 하한

    max(0, (ε − 2^{−V})(L+1)/2)
    """
    return max(0.0, (epsilon - _two_pow_neg(V)) * (L + 1) / 2.0)


def lp_closed_form(L: int, d: float, beta: float, gamma: float) -> float:
    """
    max Σ P_i e^{−id}  s.t. Σ P_i i = β, Σ P_i = γ, P_i ≥ 0 의 최적값

    F_L(β, γ) = γ − (1 − e^{−Ld}) β / L   (P_0 = γ − β/L, P_L = β/L)

    Raises:
        DomainError: d < 0, γ ∉ [0, 1], β ∉ [0, γL]
    """
    if L < 1:
        raise DomainError(f"L은 1 이상이어야 합니다: {L}")
    if d < 0:
        raise DomainError(f"d는 0 이상이어야 합니다: {d}")
    if not -_TOL <= gamma <= 1 + _TOL:
        raise DomainError(f"gamma는 [0, 1] 범위여야 합니다: {gamma}")
    if not -_TOL <= beta <= gamma * L + _TOL:
        raise DomainError(f"beta는 [0, γL={gamma * L}] 범위여야 합니다: {beta}")
    return gamma - _one_minus_exp(L * d) * beta / L


def unique_floor_single(beta: float, N: int, n: int, L: int, delta: float) -> float:
    """
    평균 β개 index set을 고를 때 unique index 평균의 하한

    U(β) ≥ (1−δ) N (1 − e^{−Ln/N}) β / L
    """
    if not -_TOL <= beta <= L + _TOL:
        raise DomainError(f"beta는 [0, L={L}] 범위여야 합니다: {beta}")
    return (1.0 - delta) * N * _one_minus_exp(L * n / N) * beta / L


def multi_unique_min(T: float, q_H: int, N: int, n: int, delta: float) -> float:
    """
    Adversary들이 합쳐서 T개 informed query를 할 때 Σ u_v의 하한

    (1−δ) N [t(1 − e^{−q_H n/N}) + (1 − e^{−(T − q_H t) n/N})],  t = ⌊T/q_H⌋
    """
    if T < 0:
        raise DomainError(f"T는 0 이상이어야 합니다: {T}")
    t = math.floor(T / q_H)
    remainder = T - q_H * t
    return (1.0 - delta) * N * (t * _one_minus_exp(q_H * n / N) + _one_minus_exp(remainder * n / N))


def multi_unique_avg_floor(beta: float, q_H: int, N: int, n: int, delta: float) -> float:
    """
    평균 informed query 수가 β일 때 unique index 평균의 하한

    (1−δ) N β (1 − e^{−q_H n/N}) / q_H
    """
    if beta < 0:
        raise DomainError(f"beta는 0 이상이어야 합니다: {beta}")
    return (1.0 - delta) * N * beta * _one_minus_exp(q_H * n / N) / q_H


# ----------------------------------------------------------------------
# Final bounds
# ----------------------------------------------------------------------
def advantage_margin(sigma: float, q_H: int, V: float) -> float:
    """σ − (q_H + 1)/2^V, 0에서 clamp"""
    return max(0.0, sigma - (q_H + 1) * _two_pow_neg(V))


def single_bound(inputs: BoundInputs) -> BoundResult:
    """
    단일 adversary, 단일 puzzle lower bound

    ω ≥ (1−δ)N(1−e^{−Ln/N})(σ − (q_H+1)/2^V)(L+1)/(2L)
        − L(V−1) − Lnq_H/2^V − V
    """
    N, n, L, V = inputs.N, inputs.n, inputs.L, inputs.V
    beta = advantage_margin(inputs.sigma, inputs.q_H, V) * (L + 1) / 2.0
    dominant = unique_floor_single(beta, N, n, L, inputs.delta)
    penalties = [
        ("L(V-1)", float(L * (V - 1))),
        ("L*n*q_H/2^V", L * n * inputs.q_H * _two_pow_neg(V)),
        ("V", float(V)),
    ]
    return _assemble(dominant, penalties)


def multi_bound(inputs: BoundInputs) -> BoundResult:
    """
    A개 adversary, P개 puzzle lower bound

    ω ≥ (1−δ)NP(σ − (q_H+1)/2^V)(L+1)(1−e^{−q_H n/N})/(2q_H)
        − PL(V−1) − PLnAq_H/2^V − VP
    """
    N, n, L, V, P, A = inputs.N, inputs.n, inputs.L, inputs.V, inputs.P, inputs.A
    beta = P * advantage_margin(inputs.sigma, inputs.q_H, V) * (L + 1) / 2.0
    dominant = multi_unique_avg_floor(beta, inputs.q_H, N, n, inputs.delta)
    penalties = [
        ("P*L(V-1)", float(P * L * (V - 1))),
        ("P*L*n*A*q_H/2^V", P * L * n * A * inputs.q_H * _two_pow_neg(V)),
        ("V*P", float(V * P)),
    ]
    return _assemble(dominant, penalties)


def simple_strategy_cost(sigma: float, N: int, P: int, L: int, q_H: int) -> float:
    """Simple strategy의 평균 다운로드 bit 수 σNP(L+1)/(2q_H)"""
    if q_H <= 0:
        raise DomainError(f"q_H는 양수여야 합니다: {q_H}")
    return sigma * N * P * (L + 1) / (2.0 * q_H)


def penalty_fraction(result: BoundResult) -> float:
    """penalty 합 / dominant term (dominant가 0이면 inf)"""
    if result.dominant_term <= 0:
        return math.inf
    return result.penalty_sum / result.dominant_term


def tightness_ratio(inputs: BoundInputs) -> float:
    """multi_bound.total / simple_strategy_cost"""
    cost = simple_strategy_cost(inputs.sigma, inputs.N, inputs.P, inputs.L, inputs.q_H)
    if cost <= 0:
        return math.nan
    return multi_bound(inputs).total / cost


def expected_tightness(inputs: BoundInputs) -> float:
    """(1−δ)(1 − e^{−q_H n/N}): dominant term / simple strategy 비용 (σ=1, V→∞ 극한)"""
    return (1.0 - inputs.delta) * _one_minus_exp(inputs.q_H * inputs.n / inputs.N)


# ----------------------------------------------------------------------
# Parameter conditions
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ConditionCheck:
    """조건 하나의 평가 결과"""

    name: str
    passed: bool
    value: float
    requirement: str


@dataclass
class ParameterReport:
    """조건 1–5와 range 검사 5개"""

    conditions: List[ConditionCheck]
    ranges: List[ConditionCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions + self.ranges)

    def failed(self) -> List[str]:
        return [c.name for c in self.conditions + self.ranges if not c.passed]

    def failed_ranges(self) -> List[str]:
        return [c.name for c in self.ranges if not c.passed]

    def to_dict(self) -> Dict:
        return {
            "all_passed": self.all_passed,
            "conditions": [c.__dict__ for c in self.conditions],
            "ranges": [c.__dict__ for c in self.ranges],
        }


def union_tail_scan(
    N: int, n: int, delta: float, J: float, s_max: int, n_points: int = 200
) -> Tuple[int, float]:
    """
    s = 1..s_max의 기하 grid에서 union_tail의 최대값

    Returns:
        (최악의 s, 그 때의 tail)
    """
    s_max = max(1, int(s_max))
    grid = np.unique(np.round(np.geomspace(1, s_max, num=min(n_points, s_max))).astype(np.int64))
    worst_s, worst = 1, -math.inf
    for s in grid:
        result = union_tail(N, n, int(s), delta, J)
        log_value = result.log_tail if result.valid else 0.0
        if log_value > worst:
            worst_s, worst = int(s), log_value
    return worst_s, (1.0 if worst >= 0 else math.exp(worst))


def check_parameters(inputs: BoundInputs) -> ParameterReport:
    """
    Bound가 simple strategy에 근접하기 위한 조건 평가

    조건:
        1. δ ≤ 0.1 이고 모든 s에서 union tail < 10^{-12}
        2. e^{−q_H n/N} ≤ e^{−4}
        3. 2^V ≥ 100·A·q_H
        4. 2^V ≥ n·A·q_H
        5. V ≤ n/100
    Range (A ≤ 10^6 가정):
        N ≥ 10^7, 10^4 ≤ n ≤ 10^6, Lm ≤ 10^6, q_H n ≥ 4N, q_H ≤ 10^6
    """
    N, n, L, m, q_H, V, A = inputs.N, inputs.n, inputs.L, inputs.m, inputs.q_H, inputs.V, inputs.A
    # 2^V 비교는 log2 margin으로 (큰 V에서 overflow 없음)
    margin_AqH = V - math.log2(MUCH_LARGER_FACTOR * A * q_H)
    margin_nAqH = V - math.log2(n * A * q_H)

    J = float(inputs.P) * L
    worst_s, worst_tail = union_tail_scan(N, n, inputs.delta, J, s_max=min(J, A * q_H))
    coverage = q_H * n / N

    conditions = [
        ConditionCheck(
            "cond1_delta_small",
            inputs.delta <= DELTA_LIMIT and worst_tail < UNION_TAIL_LIMIT,
            worst_tail,
            f"δ ≤ {DELTA_LIMIT}, max_s union tail < {UNION_TAIL_LIMIT:g} (worst s={worst_s})",
        ),
        ConditionCheck(
            "cond2_coverage",
            coverage >= COVERAGE_EXPONENT - _TOL,
            math.exp(-coverage),
            f"e^(-q_H n/N) ≤ e^(-{COVERAGE_EXPONENT:g})",
        ),
        ConditionCheck(
            "cond3_2V_vs_AqH",
            margin_AqH >= 0,
            margin_AqH,
            f"V − log2({MUCH_LARGER_FACTOR}·A·q_H) ≥ 0",
        ),
        ConditionCheck(
            "cond4_2V_vs_nAqH",
            margin_nAqH >= 0,
            margin_nAqH,
            "V − log2(n·A·q_H) ≥ 0",
        ),
        ConditionCheck(
            "cond5_V_vs_n",
            V * MUCH_LARGER_FACTOR <= n,
            n / V,
            f"V ≤ n/{MUCH_LARGER_FACTOR}",
        ),
    ]

    ranges = [
        ConditionCheck("range_N", N >= PARAMETER_RANGES["N_min"], float(N), "N ≥ 10^7"),
        ConditionCheck(
            "range_n",
            PARAMETER_RANGES["n_min"] <= n <= PARAMETER_RANGES["n_max"],
            float(n),
            "10^4 ≤ n ≤ 10^6",
        ),
        ConditionCheck("range_Lm", L * m <= PARAMETER_RANGES["Lm_max"], float(L * m), "Lm ≤ 10^6"),
        ConditionCheck("range_qHn", q_H * n >= 4 * N, coverage, "q_H n ≥ 4N"),
        ConditionCheck("range_qH", q_H <= PARAMETER_RANGES["qH_max"], float(q_H), "q_H ≤ 10^6"),
    ]

    report = ParameterReport(conditions=conditions, ranges=ranges)
    if report.all_passed:
        logger.info("Parameter 조건 검사: 모두 PASS")
    else:
        logger.warning(f"Parameter 조건 검사 실패: {report.failed()}")
    return report


# ----------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------
def bound_rows(inputs: BoundInputs, A_values: Sequence[int]) -> List[Dict]:
    """A 값마다 multi_bound와 simple strategy 비용을 계산한 행 목록"""
    rows = []
    for A in A_values:
        point = inputs.with_changes(A=int(A))
        result = multi_bound(point)
        rows.append(
            {
                "A": int(A),
                "P": point.P,
                "dominant_bits": result.dominant_term,
                "penalty_bits": result.penalty_sum,
                "raw_bits": result.raw,
                "bound_bits": result.total,
                "strategy_bits": simple_strategy_cost(point.sigma, point.N, point.P, point.L, point.q_H),
            }
        )
    return rows


def large_scale_inputs(N: int, n: int = 10_000, m: int = 10, delta: float = 0.1, V: int = 60) -> BoundInputs:
    """
    대규모 기준 설정: q_H = 4N/n, Lm = q_H/2, σ = 1

    N=10^7 → q_H=4000, L=200 / N=10^8 → q_H=40000, L=2000
    """
    q_H = 4 * N // n
    L = q_H // (2 * m)
    return BoundInputs(N=N, n=n, L=L, m=m, q_H=q_H, V=V, delta=delta, sigma=1.0, epsilon=1.0, A=1)


def large_scale_sweep(
    N_values: Sequence[int] = (10**7, 10**8),
    A_values: Sequence[int] = tuple(range(10, 101, 10)),
) -> Dict[int, List[Dict]]:
    """대규모 기준 설정의 bound / simple strategy 곡선을 해석적으로 평가"""
    return {int(N): bound_rows(large_scale_inputs(int(N)), A_values) for N in N_values}

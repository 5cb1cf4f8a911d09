"""
FR-06: Validation Oracles - closed form 검증용 독립 계산

bounds 모듈의 closed form을 Monte Carlo, 전수 열거, LP solver로 재계산합니다.
테스트와 `main.py bounds --validate`에서 사용합니다.

주요 기능:
- Coupon collector Monte Carlo (unique index 수 / 경험적 tail + Clopper-Pearson)
- 2-제약 LP: vertex 전수 열거 + scipy.optimize.linprog
- 정수 분할 전수 열거 (multi_unique_min)
- Stopping policy 전수 열거 (informed_query_floor)
"""

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.optimize import linprog

from . import bounds
from .errors import DomainError
from .logger import setup_logger
from .puzzle import RngLike, as_rng

logger = setup_logger(__name__)

_TOL = 1e-12
_MAX_DRAWS_PER_BATCH = 10_000_000


# ----------------------------------------------------------------------
# Coupon collector
# ----------------------------------------------------------------------
def sample_unique_counts(N: int, c: int, trials: int, rng: RngLike = None) -> np.ndarray:
    """
    [0, N)에서 c번 복원추출을 trials번 반복했을 때 unique 수

    Returns:
        길이 trials의 int64 배열
    """
    if N < 1 or c < 0 or trials < 1:
        raise DomainError(f"N ≥ 1, c ≥ 0, trials ≥ 1 이어야 합니다: N={N}, c={c}, trials={trials}")
    generator = as_rng(rng)
    if c == 0:
        return np.zeros(trials, dtype=np.int64)

    batch = max(1, _MAX_DRAWS_PER_BATCH // c)
    counts = []
    for start in range(0, trials, batch):
        size = min(batch, trials - start)
        draws = np.sort(generator.integers(0, N, size=(size, c)), axis=1)
        counts.append(1 + np.count_nonzero(np.diff(draws, axis=1), axis=1))
    return np.concatenate(counts).astype(np.int64)


@dataclass(frozen=True)
class EmpiricalTail:
    """
    경험적 Pr[Y ≤ μ]와 closed-form tail bound 비교

    consistent: Clopper-Pearson 하한이 bound 이하이면 True
    """

    mu: float
    bound: float
    frequency: float
    lower: float
    upper: float
    trials: int

    @property
    def consistent(self) -> bool:
        return self.lower <= self.bound + _TOL


def clopper_pearson(successes: int, trials: int, confidence: float = 0.99) -> Tuple[float, float]:
    """이항 비율의 양측 Clopper-Pearson 구간"""
    alpha = 1.0 - confidence
    lower = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    upper = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lower, upper


def empirical_coupon_tail(
    N: int, c: int, delta: float, trials: int, rng: RngLike = None, confidence: float = 0.99
) -> EmpiricalTail:
    """Monte Carlo로 Pr[Y ≤ μ]를 추정하고 coupon_tail과 비교"""
    bound = bounds.coupon_tail(N, c, delta)
    counts = sample_unique_counts(N, c, trials, rng)
    hits = int(np.count_nonzero(counts <= bound.mu))
    lower, upper = clopper_pearson(hits, trials, confidence)
    return EmpiricalTail(
        mu=bound.mu, bound=bound.tail, frequency=hits / trials, lower=lower, upper=upper, trials=trials
    )


# ----------------------------------------------------------------------
# Two-constraint LP: Σ P_i i = β, Σ P_i = γ, P_i ≥ 0 (i = 0..K)
# ----------------------------------------------------------------------
def lp_vertices(K: int, beta: float, gamma: float) -> Iterator[np.ndarray]:
    """
    실현 가능 영역의 모든 vertex (최대 2개 좌표가 양수)

    Yields:
        길이 K+1의 확률 벡터
    """
    if gamma <= _TOL:
        if abs(beta) <= _TOL:
            yield np.zeros(K + 1)
        return
    for i in range(K + 1):
        if abs(i * gamma - beta) <= _TOL * max(1.0, abs(beta)):
            point = np.zeros(K + 1)
            point[i] = gamma
            yield point
    for i, k in itertools.combinations(range(K + 1), 2):
        if i * gamma - _TOL <= beta <= k * gamma + _TOL:
            upper = (beta - i * gamma) / (k - i)
            lower = gamma - upper
            if upper < -_TOL or lower < -_TOL:
                continue
            point = np.zeros(K + 1)
            point[i], point[k] = lower, upper
            yield point


def lp_vertex_optimum(
    coefficients: Sequence[float], beta: float, gamma: float, maximize: bool = True
) -> float:
    """vertex 전수 열거로 Σ P_i c_i의 최적값"""
    c = np.asarray(coefficients, dtype=float)
    values = [float(point @ c) for point in lp_vertices(c.size - 1, beta, gamma)]
    if not values:
        raise DomainError(f"실현 가능한 해가 없습니다: β={beta}, γ={gamma}, K={c.size - 1}")
    return max(values) if maximize else min(values)


def lp_linprog_optimum(
    coefficients: Sequence[float], beta: float, gamma: float, maximize: bool = True
) -> float:
    """scipy.optimize.linprog (HiGHS)로 같은 LP를 풀기"""
    c = np.asarray(coefficients, dtype=float)
    K = c.size - 1
    A_eq = np.vstack([np.arange(K + 1, dtype=float), np.ones(K + 1)])
    b_eq = np.array([beta, gamma])
    result = linprog(-c if maximize else c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not result.success:
        raise DomainError(f"linprog 실패: {result.message}")
    return float(-result.fun if maximize else result.fun)


def lp_closed_form_oracle(L: int, d: float, beta: float, gamma: float) -> float:
    """max Σ P_i e^{−id} 를 vertex 열거로"""
    return lp_vertex_optimum(np.exp(-d * np.arange(L + 1)), beta, gamma, maximize=True)


# ----------------------------------------------------------------------
# Saturated assignment
# ----------------------------------------------------------------------
def partitions(total: int, max_part: int) -> Iterator[Tuple[int, ...]]:
    """total을 max_part 이하 양의 정수들로 나누는 모든 분할 (내림차순)"""
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in partitions(total - first, first):
            yield (first,) + rest


def min_partition_unique(T: int, q_H: int, N: int, n: int, delta: float) -> Tuple[float, Tuple[int, ...]]:
    """
    Σ (1−δ)N(1 − e^{−t_v n/N}) 의 최소값을 분할 전수 열거로

    Returns:
        (최소값, 그 때의 분할)
    """
    best, best_parts = math.inf, ()
    for parts in partitions(int(T), int(q_H)):
        value = (1.0 - delta) * N * sum(-math.expm1(-t * n / N) for t in parts)
        if value < best:
            best, best_parts = value, parts
    return best, best_parts


def multi_unique_avg_oracle(beta: float, q_H: int, K: int, N: int, n: int, delta: float) -> float:
    """
    min Σ p_i g(i)  s.t. Σ p_i i = β, Σ p_i = 1  (i = 0..K)

    g(i)는 min_partition_unique로 독립 계산합니다.
    """
    g = [min_partition_unique(i, q_H, N, n, delta)[0] for i in range(K + 1)]
    return lp_vertex_optimum(g, beta, 1.0, maximize=False)


# ----------------------------------------------------------------------
# Stopping policies for the informed-query floor
# ----------------------------------------------------------------------
def stopping_policy_outcome(stops: Sequence[float], L: int) -> Tuple[float, float]:
    """
    순차 질의 알고리즘의 (confirm 확률, 평균 질의 수)를 정확히 계산

    stops[i-1]은 질의 i 직전에 멈출 확률. j*는 [1, L] 균등.
    """
    if len(stops) != L:
        raise DomainError(f"stop 확률은 {L}개여야 합니다: {len(stops)}")
    survive = np.cumprod(1.0 - np.asarray(stops, dtype=float))   # 질의 1..i를 모두 수행할 확률
    confirm = float(survive.mean())
    # j*에서 멈추면 질의 수 = Σ_{i ≤ j*} survive_i
    queries = float(np.cumsum(survive).mean())
    return confirm, queries


def enumerate_stopping_policies(L: int, grid_steps: int = 8) -> Iterator[Tuple[float, float]]:
    """stop 확률을 k/grid_steps 격자에서 고른 모든 policy의 결과"""
    grid = np.arange(grid_steps + 1) / grid_steps
    for stops in itertools.product(grid, repeat=L):
        yield stopping_policy_outcome(stops, L)


def informed_floor_oracle(epsilon: float, V: int, L: int, grid_steps: int = 8) -> float:
    """
    confirm 확률 ≥ ε − 2^{−V} 인 policy 중 최소 평균 질의 수 (격자 전수 열거)

    ε − 2^{−V}가 격자점 k/grid_steps일 때 closed form과 일치해야 합니다.
    """
    target = epsilon - 2.0 ** (-V)
    if target <= 0:
        return 0.0
    best = math.inf
    for confirm, queries in enumerate_stopping_policies(L, grid_steps):
        if confirm >= target - 1e-12:
            best = min(best, queries)
    return best


def sequential_guesser_queries(L: int, epsilon: float, trials: int, rng: RngLike = None) -> np.ndarray:
    """
    ε 확률로 시도하고 시도하면 1..L을 순서대로 질의하는 guesser의 질의 수 표본
    """
    generator = as_rng(rng)
    attempt = generator.random(trials) < epsilon
    j_star = generator.integers(1, L + 1, size=trials)
    return np.where(attempt, j_star, 0)


def sample_unique_for_policy(
    stopping: Sequence[float], N: int, n: int, trials: int, rng: RngLike = None
) -> np.ndarray:
    """
    확률 stopping[i]로 i개 index set(각 n개 균등 index)을 고를 때의 unique 수 표본
    """
    generator = as_rng(rng)
    weights = np.asarray(stopping, dtype=float)
    if weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-9:
        raise DomainError("stopping 분포는 합이 1인 비음수 벡터여야 합니다")
    picks = generator.choice(weights.size, size=trials, p=weights / weights.sum())
    counts = np.zeros(trials, dtype=np.int64)
    for t, sets in enumerate(picks):
        if sets:
            counts[t] = np.unique(generator.integers(0, N, size=int(sets) * n)).size
    return counts


# ----------------------------------------------------------------------
# Fixed validation suite
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ValidationCheck:
    """closed form과 oracle 비교 결과 한 줄"""

    name: str
    closed_form: float
    oracle: float
    tolerance: float
    passed: bool

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.closed_form), abs(self.oracle), _TOL)
        return abs(self.closed_form - self.oracle) / scale


def _exact_check(name: str, closed: float, oracle: float, tolerance: float = 1e-9) -> ValidationCheck:
    scale = max(abs(closed), abs(oracle), _TOL)
    return ValidationCheck(name, closed, oracle, tolerance, abs(closed - oracle) / scale <= tolerance)


def run_validation(seed: Optional[int] = 0, quick: bool = False) -> List[ValidationCheck]:
    """
    고정된 소규모 instance에서 모든 closed form을 독립 oracle과 비교

    Args:
        seed: Monte Carlo seed
        quick: True면 Monte Carlo 반복 수를 줄임

    Returns:
        ValidationCheck 목록
    """
    generator = as_rng(seed)
    checks: List[ValidationCheck] = []
    trials = 200 if quick else 1000

    # coupon collector 기대값
    N, c = 10_000, 10_000
    mean = float(sample_unique_counts(N, c, trials, generator).mean())
    closed = bounds.expected_unique(N, c)
    checks.append(ValidationCheck("expected_unique MC", closed, mean, 0.01, abs(mean - closed) / closed <= 0.01))

    for delta in (0.1, 0.2):
        tail = empirical_coupon_tail(1000, 1000, delta, trials, generator)
        checks.append(ValidationCheck(f"coupon_tail δ={delta}", tail.bound, tail.frequency, 0.0, tail.consistent))

    # LP closed form
    for L, d, beta, gamma in [(1, 0.3, 0.5, 1.0), (3, 0.1, 1.2, 0.8), (5, 0.05, 2.0, 1.0), (4, 1.0, 0.0, 0.5)]:
        closed = bounds.lp_closed_form(L, d, beta, gamma)
        checks.append(_exact_check(f"lp_closed_form L={L} vertex", closed, lp_closed_form_oracle(L, d, beta, gamma)))
        solved = lp_linprog_optimum(np.exp(-d * np.arange(L + 1)), beta, gamma)
        checks.append(
            ValidationCheck(f"lp_closed_form L={L} linprog", closed, solved, 1e-7, abs(closed - solved) <= 1e-7)
        )

    # saturated assignment
    for T, q_H in [(7, 3), (12, 5), (5, 5), (9, 2)]:
        closed = bounds.multi_unique_min(T, q_H, 50, 10, 0.1)
        checks.append(_exact_check(f"multi_unique_min T={T} q_H={q_H}", closed, min_partition_unique(T, q_H, 50, 10, 0.1)[0]))

    for beta, q_H, K in [(2.5, 3, 9), (4.0, 2, 6), (1.0, 5, 10)]:
        closed = bounds.multi_unique_avg_floor(beta, q_H, 50, 10, 0.1)
        checks.append(_exact_check(f"multi_unique_avg_floor β={beta}", closed, multi_unique_avg_oracle(beta, q_H, K, 50, 10, 0.1)))

    # informed-query floor, V=3 → 2^{-V} = 1/8 on the grid
    for L, epsilon in [(1, 0.625), (3, 1.0), (4, 0.5)]:
        closed = bounds.informed_query_floor(epsilon, 3, L)
        checks.append(_exact_check(f"informed_query_floor L={L}", closed, informed_floor_oracle(epsilon, 3, L)))

    n_failed = sum(not check.passed for check in checks)
    if n_failed:
        logger.warning(f"Validation: {n_failed}/{len(checks)} 항목 실패")
    else:
        logger.info(f"✓ Validation: {len(checks)}개 항목 모두 통과")
    return checks

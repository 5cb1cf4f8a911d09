"""
FR-08: Throughput Benchmark - hash / index 생성 속도 측정 및 파라미터 실현 가능성

주요 기능:
- n-bit 입력 hash_H 초당 호출 수 측정 (warmup 제외, 단일 thread)
- PRF f2 index 생성 속도 (indices/sec) 측정
- derived q_H = hash rate × θ
- 실현 가능성 세 가지 판정:
  1) q_H ≤ 10^6
  2) q_H·n ≥ 2N
  3) Lm = ⌈2N/n⌉ 일 때 평균 풀이 시간 ≤ θ, 최악 풀이 시간 ≥ 1초
- 참조 머신(pc3000 등) 수치에 같은 규칙 적용
"""

import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List

import numpy as np

from .constants import (
    FEASIBILITY_COVERAGE,
    FEASIBILITY_MAX_QUERIES,
    FEASIBILITY_MIN_SOLVE_SECONDS,
    REFERENCE_MACHINES,
)
from .errors import DomainError
from .logger import setup_logger
from .primitives import hash_H, prf_f2_indices, set_query_hook
from .puzzle import PuzzleParams, RngLike, as_rng

logger = setup_logger(__name__)


@dataclass(frozen=True)
class FeasibilityCheck:
    name: str
    passed: bool
    value: float
    requirement: str


@dataclass(frozen=True)
class FeasibilityReport:
    """세 가지 실현 가능성 판정"""

    source: str
    q_H: float
    Lm: int
    expected_solve_seconds: float
    worst_solve_seconds: float
    checks: List[FeasibilityCheck]

    @property
    def feasible(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["feasible"] = self.feasible
        return data


@dataclass(frozen=True)
class BenchReport:
    """
    측정 결과

    Attributes:
        hash_calls_per_sec: n-bit 입력 hash_H 속도
        prf_calls_per_sec: f2 index 생성 속도 (indices/sec)
        theta_seconds: θ (초)
        duration: 측정 구간 (초, warmup 제외)
    """

    hash_calls_per_sec: float
    prf_calls_per_sec: float
    theta_seconds: float
    duration: float

    @property
    def derived_q_H(self) -> float:
        return self.hash_calls_per_sec * self.theta_seconds

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["derived_q_H"] = self.derived_q_H
        return data


def assess_feasibility(
    hash_rate: float,
    index_rate: float,
    N: int,
    n: int,
    L: int,
    theta_seconds: float,
    source: str = "measured",
) -> FeasibilityReport:
    """
    주어진 hash / index 생성 속도에서 (N, n, θ) 파라미터의 실현 가능성

    Args:
        hash_rate: 초당 hash_H 호출 수
        index_rate: 초당 생성 index 수
        N, n, L: puzzle 파라미터
        theta_seconds: θ (초)
        source: 보고서 라벨
    """
    if hash_rate <= 0 or index_rate <= 0:
        raise DomainError(f"속도는 양수여야 합니다: hash={hash_rate}, index={index_rate}")
    q_H = hash_rate * theta_seconds
    Lm = -(-int(FEASIBILITY_COVERAGE * N) // n)
    per_query = 1.0 / hash_rate + n / index_rate
    worst = Lm * per_query
    expected = worst * (L + 1) / (2.0 * L)

    checks = [
        FeasibilityCheck("q_H_bounded", q_H <= FEASIBILITY_MAX_QUERIES, q_H, "rate·θ ≤ 10^6"),
        FeasibilityCheck(
            "coverage", q_H * n >= FEASIBILITY_COVERAGE * N, q_H * n / N, "rate·θ·n ≥ 2N"
        ),
        FeasibilityCheck(
            "solve_time",
            expected <= theta_seconds and worst >= FEASIBILITY_MIN_SOLVE_SECONDS,
            expected,
            f"Lm={Lm}: 평균 풀이 ≤ θ, 최악 풀이 ≥ {FEASIBILITY_MIN_SOLVE_SECONDS:g}s",
        ),
    ]
    return FeasibilityReport(
        source=source,
        q_H=q_H,
        Lm=Lm,
        expected_solve_seconds=expected,
        worst_solve_seconds=worst,
        checks=checks,
    )


def reference_feasibility(machine: str, N: int, n: int, L: int, theta_seconds: float) -> FeasibilityReport:
    """참조 머신 수치 (SHA-1 rate → hash rate, AES rate → index rate)로 판정"""
    if machine not in REFERENCE_MACHINES:
        raise DomainError(f"알 수 없는 참조 머신: {machine}")
    rates = REFERENCE_MACHINES[machine]
    return assess_feasibility(
        rates["sha1_per_sec"], rates["aes_per_sec"], N, n, L, theta_seconds, source=machine
    )


class ThroughputBenchmark:
    """
    단일 thread wall-clock 측정 (warmup 구간 제외)
    """

    def __init__(
        self,
        params: PuzzleParams,
        duration: float = 3.0,
        warmup: float = 1.0,
        rng: RngLike = None,
        clock: Callable[[], float] = time.perf_counter,
    ):
        """
        Args:
            params: 측정에 사용할 n, N, κ, θ
            duration: 측정 시간 (초, ≥ 1)
            warmup: 측정 전 warmup (초)
        """
        if duration < 1.0:
            raise DomainError(f"duration은 1초 이상이어야 합니다: {duration}")
        if warmup < 0:
            raise DomainError(f"warmup은 0 이상이어야 합니다: {warmup}")
        self.params = params
        self.duration = duration
        self.warmup = warmup
        self.rng = as_rng(rng)
        self.clock = clock
        self.hash_calls = 0
        self.last_calls = 0

        logger.info(f"ThroughputBenchmark 초기화: n={params.n}, N={params.N}, duration={duration}s, warmup={warmup}s")

    def _rate(self, call: Callable[[], None]) -> float:
        """warmup 후 duration 동안 call 반복, 초당 호출 수"""
        end = self.clock() + self.warmup
        while self.clock() < end:
            call()
        calls = 0
        start = self.clock()
        end = start + self.duration
        now = start
        while now < end:
            call()
            calls += 1
            now = self.clock()
        self.last_calls = calls
        return calls / (now - start)

    def measure_hash_rate(self) -> float:
        params = self.params
        k1 = self.rng.bytes(params.key_size)
        s = self.rng.integers(0, 2, size=params.n, dtype=np.uint8)
        self.hash_calls = 0

        def count(name: str) -> None:
            if name == "hash_H":
                self.hash_calls += 1

        set_query_hook(count)
        try:
            rate = self._rate(lambda: hash_H(k1, 1, s, params.n, params.kappa))
        finally:
            set_query_hook(None)
        logger.info(f"hash_H: {rate:,.0f} calls/s (n={params.n}, 총 {self.hash_calls:,}회 호출)")
        return rate

    def measure_index_rate(self) -> float:
        params = self.params
        k2 = self.rng.bytes(params.key_size)
        rate = self._rate(lambda: prf_f2_indices(k2, params.n, params.N)) * params.n
        logger.info(f"f2 index 생성: {rate:,.0f} indices/s")
        return rate

    def run(self) -> BenchReport:
        return BenchReport(
            hash_calls_per_sec=self.measure_hash_rate(),
            prf_calls_per_sec=self.measure_index_rate(),
            theta_seconds=self.params.theta_seconds,
            duration=self.duration,
        )

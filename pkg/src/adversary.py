"""
FR-04: Adversary Simulation - 전략 실행 및 다운로드 bit 측정

Ω 환경에서 adversary 전략을 실행하고, 평균 다운로드 bit 수와
puzzle 풀이 성공률을 측정합니다.

주요 기능:
- ExperimentConfig / ExperimentResult (trial 별 기록, 표준오차, CSV/JSON export)
- HonestStrategy, SimpleCollusionStrategy, GreedyStrategy, GiveUpStrategy
- AdversarySimulator: run_honest, run_simple_collusion, run_custom
- sweep_adversaries: A sweep + simple strategy 비용 / multi_bound overlay

Trial seed는 master seed에서 np.random.SeedSequence.spawn으로 파생합니다.
"""

import csv
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bounds import BoundInputs, multi_bound, simple_strategy_cost
from .constants import CSV_SCHEMAS, DEFAULT_DELTA
from .errors import ContentSizeError, DomainError, InfeasibleStrategyError
from .logger import setup_logger
from .oracle import OmegaConfig, OmegaOracle
from .primitives import hash_A
from .puzzle import Content, Puzzle, PuzzleParams, PuzzleSecret, Solution, generate_puzzle, verify

logger = setup_logger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    실험 설정

    Attributes:
        params: puzzle 파라미터 (m = adversary 당 puzzle 수)
        A: adversary 수
        sigma: 시도 확률 [0, 1]
        omega: Ω 설정 (V, q_H, L)
        trials: 반복 횟수 (≥ 1)
        seed: master seed
        P: puzzle 수 (A·m, 생략 시 자동 계산)
    """

    params: PuzzleParams
    A: int
    sigma: float
    omega: OmegaConfig
    trials: int = 1
    seed: Optional[int] = None
    P: Optional[int] = None

    def __post_init__(self):
        if self.A < 1:
            raise DomainError(f"A는 1 이상이어야 합니다: {self.A}")
        expected_P = self.A * self.params.m
        if self.P is None:
            object.__setattr__(self, "P", expected_P)
        elif self.P != expected_P:
            raise DomainError(f"P는 A·m={expected_P}이어야 합니다: {self.P}")
        if not 0 <= self.sigma <= 1:
            raise DomainError(f"sigma는 [0, 1] 범위여야 합니다: {self.sigma}")
        if self.trials < 1:
            raise DomainError(f"trials는 1 이상이어야 합니다: {self.trials}")
        if self.omega.L != self.params.L:
            raise DomainError(f"omega.L({self.omega.L})이 params.L({self.params.L})과 다릅니다")
        self.omega.validate(self.params.n)

    def with_adversaries(self, A: int) -> "ExperimentConfig":
        return replace(self, A=A, P=None)


@dataclass(frozen=True)
class TrialRecord:
    """trial 하나의 측정값"""

    trial: int
    attempted: bool
    solved_all: bool
    bits_total: int
    hash_total: int
    solved_count: int = 0

    def to_row(self) -> Dict:
        return {
            "trial": self.trial,
            "attempted": int(self.attempted),
            "solved_all": int(self.solved_all),
            "bits_total": self.bits_total,
            "hash_total": self.hash_total,
        }


@dataclass
class ExperimentResult:
    """
    실험 결과

    success_rate: 모든 puzzle을 푼 trial 비율
    avg_bits: trial 평균 총 unique content bit 수 (adversary 합)
    """

    strategy: str
    records: List[TrialRecord] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.records)

    @property
    def success_rate(self) -> float:
        return float(np.mean([r.solved_all for r in self.records])) if self.records else 0.0

    @property
    def avg_bits(self) -> float:
        return float(np.mean([r.bits_total for r in self.records])) if self.records else 0.0

    @property
    def avg_hash_queries(self) -> float:
        return float(np.mean([r.hash_total for r in self.records])) if self.records else 0.0

    @staticmethod
    def _stderr(values: Sequence[float]) -> float:
        if len(values) < 2:
            return 0.0
        return float(np.std(values, ddof=1) / math.sqrt(len(values)))

    @property
    def bits_stderr(self) -> float:
        return self._stderr([r.bits_total for r in self.records])

    @property
    def hash_stderr(self) -> float:
        return self._stderr([r.hash_total for r in self.records])

    def summary(self) -> Dict:
        return {
            "strategy": self.strategy,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "avg_bits": self.avg_bits,
            "bits_stderr": self.bits_stderr,
            "avg_hash_queries": self.avg_hash_queries,
            "hash_stderr": self.hash_stderr,
        }

    def export_csv(self, path: Path) -> Path:
        """trial 별 CSV (schema 버전 주석 포함)"""
        version, columns = CSV_SCHEMAS["trials"]
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(f"# trials {version}\n")
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            writer.writerows(r.to_row() for r in self.records)
        logger.info(f"✓ Trial CSV 저장: {path}")
        return path

    def export_json(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.summary(), f, indent=2, ensure_ascii=False)
        logger.info(f"✓ 요약 JSON 저장: {path}")
        return path


class TrialSession:
    """
    Strategy가 trial 하나 동안 보는 환경

    Strategy는 oracle 메서드와 rng만 사용합니다.
    """

    def __init__(self, config: ExperimentConfig, oracle: OmegaOracle, rng: np.random.Generator):
        self.config = config
        self.oracle = oracle
        self.rng = rng
        self.attempted: Optional[bool] = None

    @property
    def puzzles(self) -> List[Puzzle]:
        return self.oracle.puzzles

    def coin(self) -> bool:
        """σ 확률로 True"""
        return bool(self.rng.random() < self.config.sigma)

    def solve_sequential(self, v: int, puzzle_id: int, start: int = 1) -> Optional[Solution]:
        """
        v가 j = start..L을 순서대로 Ω에 질의하여 confirm 탐색

        예산이 소진되면 None
        """
        oracle = self.oracle
        puzzle = self.puzzles[puzzle_id]
        for j in range(start, self.config.params.L + 1):
            if oracle.remaining_budget(v) <= 0:
                return None
            if oracle.omega_hash_query(v, puzzle_id, j) == puzzle.hint:
                return Solution(hash_A(oracle.known_string(v, puzzle_id, j), puzzle.params.n, puzzle.params.kappa))
        return None


class AdversaryStrategy(ABC):
    """Adversary policy: 각 puzzle 위치에 Solution 또는 None"""

    name = "custom"

    @abstractmethod
    def play(self, session: TrialSession) -> List[Optional[Solution]]:
        raise NotImplementedError


class GiveUpStrategy(AdversaryStrategy):
    """아무것도 하지 않음"""

    name = "give_up"

    def play(self, session: TrialSession) -> List[Optional[Solution]]:
        session.attempted = False
        return [None] * session.config.P


class HonestStrategy(AdversaryStrategy):
    """각 adversary가 전체 content를 받고 자신의 m개 puzzle을 순차 풀이 (σ 무시)"""

    name = "honest"

    def participates(self, session: TrialSession, v: int) -> bool:
        return True

    def play(self, session: TrialSession) -> List[Optional[Solution]]:
        m = session.config.params.m
        answers: List[Optional[Solution]] = [None] * session.config.P
        any_attempt = False
        for v in range(session.config.A):
            if not self.participates(session, v):
                continue
            any_attempt = True
            session.oracle.download_all(v)
            for puzzle_id in range(v * m, (v + 1) * m):
                answers[puzzle_id] = session.solve_sequential(v, puzzle_id)
        session.attempted = any_attempt
        return answers


class GreedyStrategy(HonestStrategy):
    """각 adversary가 σ 확률로 독립 참여, 참여 시 전체 content로 자신의 m개 puzzle 풀이"""

    name = "greedy"

    def participates(self, session: TrialSession, v: int) -> bool:
        return session.coin()


def simple_member_count(P: int, L: int, q_H: int) -> int:
    """⌈P(L+1)/(2q_H)⌉"""
    return -(-P * (L + 1) // (2 * q_H))


class SimpleCollusionStrategy(AdversaryStrategy):
    """
    Simple strategy

    trial 당 σ coin 하나. 성공하면 ⌈P(L+1)/(2q_H)⌉명이 전체 content를 받고,
    puzzle 순서대로 예산을 이어서 사용합니다 (예산이 떨어지면 다음 member가
    같은 puzzle의 다음 j부터 이어서 질의).
    """

    name = "simple_collusion"

    def play(self, session: TrialSession) -> List[Optional[Solution]]:
        config = session.config
        members = simple_member_count(config.P, config.params.L, config.omega.q_H)
        if members > config.A:
            raise InfeasibleStrategyError(
                f"simple strategy에 {members}명이 필요하지만 A={config.A}입니다"
            )

        if not session.coin():
            session.attempted = False
            return [None] * config.P
        session.attempted = True

        oracle = session.oracle
        for v in range(members):
            oracle.download_all(v)

        answers: List[Optional[Solution]] = []
        v = 0
        for puzzle_id, puzzle in enumerate(session.puzzles):
            answer = None
            for j in range(1, config.params.L + 1):
                while v < members and oracle.remaining_budget(v) <= 0:
                    v += 1
                if v >= members:
                    break
                if oracle.omega_hash_query(v, puzzle_id, j) == puzzle.hint:
                    bits = oracle.known_string(v, puzzle_id, j)
                    answer = Solution(hash_A(bits, puzzle.params.n, puzzle.params.kappa))
                    break
            answers.append(answer)
        return answers


class AdversarySimulator:
    """
    Ω 환경에서 전략을 trial 단위로 실행
    """

    def __init__(self, config: ExperimentConfig, content: Content):
        """
        Args:
            config: 실험 설정
            content: 실제 content (N bits)
        """
        if content.n_bits != config.params.N:
            raise ContentSizeError(f"content 크기({content.n_bits})가 params.N({config.params.N})과 다릅니다")
        self.config = config
        self.content = content

        logger.info(
            f"AdversarySimulator 초기화: A={config.A}, P={config.P}, σ={config.sigma}, "
            f"trials={config.trials}, q_H={config.omega.q_H}, V={config.omega.V}"
        )

    def _trial_rngs(self) -> List[np.random.Generator]:
        children = np.random.SeedSequence(self.config.seed).spawn(self.config.trials)
        return [np.random.default_rng(child) for child in children]

    def _run_trial(self, trial: int, strategy: AdversaryStrategy, rng: np.random.Generator) -> TrialRecord:
        config = self.config
        generated = [generate_puzzle(config.params, self.content, rng) for _ in range(config.P)]
        puzzles = [puzzle for puzzle, _ in generated]
        secrets: List[PuzzleSecret] = [secret for _, secret in generated]

        oracle = OmegaOracle(self.content, puzzles, config.omega, config.A)
        session = TrialSession(config, oracle, rng)
        answers = strategy.play(session)
        if len(answers) != config.P:
            raise DomainError(f"전략이 {len(answers)}개 답을 반환했습니다 (P={config.P})")

        solved = sum(
            1 for secret, answer in zip(secrets, answers) if answer is not None and verify(secret, answer)
        )
        attempted = session.attempted if session.attempted is not None else any(a is not None for a in answers)
        record = TrialRecord(
            trial=trial,
            attempted=attempted,
            solved_all=solved == config.P,
            bits_total=oracle.stats.total_bits,
            hash_total=oracle.stats.total_hash_queries,
            solved_count=solved,
        )
        logger.debug(
            f"trial {trial}: attempted={record.attempted}, solved={solved}/{config.P}, "
            f"bits={record.bits_total}, hash={record.hash_total}"
        )
        return record

    def run_custom(self, strategy: AdversaryStrategy) -> ExperimentResult:
        """
        임의 전략 실행

        Raises:
            InfeasibleStrategyError: 전략이 현재 A로 실행 불가능한 경우
        """
        result = ExperimentResult(strategy=strategy.name)
        for trial, rng in enumerate(self._trial_rngs()):
            result.records.append(self._run_trial(trial, strategy, rng))

        logger.info(
            f"✓ {strategy.name}: success={result.success_rate:.3f}, "
            f"avg_bits={result.avg_bits:,.0f}, avg_hash={result.avg_hash_queries:,.1f}"
        )
        return result

    def run_honest(self) -> ExperimentResult:
        return self.run_custom(HonestStrategy())

    def run_simple_collusion(self) -> ExperimentResult:
        return self.run_custom(SimpleCollusionStrategy())


def run_honest(config: ExperimentConfig, content: Content) -> ExperimentResult:
    return AdversarySimulator(config, content).run_honest()


def run_simple_collusion(config: ExperimentConfig, content: Content) -> ExperimentResult:
    return AdversarySimulator(config, content).run_simple_collusion()


def run_custom(config: ExperimentConfig, content: Content, strategy: AdversaryStrategy) -> ExperimentResult:
    return AdversarySimulator(config, content).run_custom(strategy)


def bound_inputs_for(config: ExperimentConfig, delta: float = DEFAULT_DELTA) -> BoundInputs:
    """실험 설정에 대응하는 BoundInputs (ε = σ)"""
    params = config.params
    return BoundInputs(
        N=params.N,
        n=params.n,
        L=params.L,
        m=params.m,
        q_H=config.omega.q_H,
        V=config.omega.V,
        delta=delta,
        sigma=config.sigma,
        epsilon=config.sigma,
        A=config.A,
    )


def sweep_adversaries(
    base: ExperimentConfig,
    A_values: Sequence[int],
    content: Content,
    delta: float = DEFAULT_DELTA,
) -> List[Dict]:
    """
    A 값마다 simple strategy를 실행하고 해석적 값과 나란히 기록

    실행 불가능한 A는 status='infeasible'로 남기고 계속 진행합니다.

    Returns:
        CSV_SCHEMAS['sweep'] 컬럼을 가진 행 목록
    """
    rows = []
    for A in A_values:
        config = base.with_adversaries(int(A))
        inputs = bound_inputs_for(config, delta)
        bound = multi_bound(inputs)
        formula = simple_strategy_cost(config.sigma, config.params.N, config.P, config.params.L, config.omega.q_H)
        row = {
            "A": config.A,
            "P": config.P,
            "strategy_bits": math.nan,
            "formula_bits": formula,
            "bound_bits": bound.total,
            "dominant_bits": bound.dominant_term,
            "ratio": formula / bound.dominant_term if bound.dominant_term > 0 else math.nan,
            "success_rate": math.nan,
            "status": "ok",
        }
        try:
            result = AdversarySimulator(config, content).run_simple_collusion()
            row["strategy_bits"] = result.avg_bits
            row["success_rate"] = result.success_rate
            if bound.vacuous:
                row["status"] = "vacuous_bound"
        except InfeasibleStrategyError as e:
            logger.warning(f"A={A}: {e}")
            row["status"] = "infeasible"
        rows.append(row)
    return rows

"""
FR-03: Oracle Environment - Content Oracle과 특수 Oracle Ω

Adversary 별 content query 계정(unique index)과 hash query 예산을 관리하고,
informed query에만 hash를 돌려주는 Ω를 구현합니다.

규칙:
- content query는 항상 응답, adversary v의 unique index 집합에 기록
- v가 질의하지 않은 index set bit가 V개 이하이면 informed
- uninformed → refusal(None), 예산은 차감
- v의 예산 q_H 소진 → refusal (차감 없음)
- puzzle 당 L개 초과 → refusal (차감 없음)
- 이미 응답한 (v, puzzle, j) 재질의 → memo 응답 (차감 없음)

한 실험에 Ω 하나, 모든 변경은 단일 writer로 직렬화됩니다.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import CSV_SCHEMAS
from .errors import ContentSizeError, DomainError
from .logger import setup_logger
from .primitives import hash_H
from .puzzle import Content, IndexSet, Puzzle, index_set, true_string

logger = setup_logger(__name__)

INFORMED = "informed"
UNINFORMED = "uninformed"


@dataclass(frozen=True)
class OmegaConfig:
    """
    Ω 설정

    Attributes:
        V: informedness slack (bits), 0 < V < n
        q_H: adversary 당 hash query 예산, q_H ≥ L
        L: puzzle 당 index set 수
    """

    V: int
    q_H: int
    L: int

    def validate(self, n: int) -> None:
        if not 0 < self.V < n:
            raise DomainError(f"V는 (0, n={n}) 범위여야 합니다: {self.V}")
        if self.q_H < self.L:
            raise DomainError(f"honest prover가 풀 수 있도록 q_H({self.q_H}) ≥ L({self.L})이어야 합니다")


class OracleStats:
    """
    Adversary 별 카운터

    - queried: adversary 별 boolean mask (길이 N)
    - content_bits: unique index 수 (= 다운로드한 bit 수)
    - hash_queries: 차감된 hash query 수
    - memo: (v, puzzle_id, j) → 최초로 응답한 digest
    """

    def __init__(self, n_adversaries: int, N: int):
        if n_adversaries < 1:
            raise DomainError(f"adversary 수는 1 이상이어야 합니다: {n_adversaries}")
        self.n_adversaries = n_adversaries
        self.N = N
        self.queried = np.zeros((n_adversaries, N), dtype=bool)
        self.content_bits = np.zeros(n_adversaries, dtype=np.int64)
        self.hash_queries = np.zeros(n_adversaries, dtype=np.int64)
        self.confirmed = np.zeros(n_adversaries, dtype=np.int64)
        self.memo: Dict[Tuple[int, int, int], bytes] = {}

    def check_adversary(self, v: int) -> None:
        if not 0 <= v < self.n_adversaries:
            raise DomainError(f"adversary id {v}가 [0, {self.n_adversaries}) 범위를 벗어났습니다")

    def record(self, v: int, indices: np.ndarray) -> int:
        """indices를 v의 질의 집합에 추가하고 새로 늘어난 unique 수를 반환"""
        row = self.queried[v]
        new = np.unique(indices[~row[indices]])
        row[new] = True
        self.content_bits[v] += new.size
        return int(new.size)

    @property
    def total_bits(self) -> int:
        return int(self.content_bits.sum())

    @property
    def total_hash_queries(self) -> int:
        return int(self.hash_queries.sum())

    def rows(self) -> List[Dict]:
        return [
            {
                "adversary_id": v,
                "content_bits": int(self.content_bits[v]),
                "hash_queries": int(self.hash_queries[v]),
                "puzzles_confirmed": int(self.confirmed[v]),
            }
            for v in range(self.n_adversaries)
        ]

    def export_csv(self, path: Path) -> Path:
        """CSV: adversary_id, content_bits, hash_queries, puzzles_confirmed"""
        version, columns = CSV_SCHEMAS["oracle_stats"]
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(f"# oracle_stats {version}\n")
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            writer.writerows(self.rows())
        logger.info(f"✓ Oracle stats CSV 저장: {path}")
        return path


class OmegaOracle:
    """
    실험 환경: content oracle + 특수 hash oracle Ω

    여러 puzzle을 동시에 서비스하며 (puzzle_id, j)로 구분합니다.
    """

    def __init__(
        self,
        content: Content,
        puzzles: Sequence[Puzzle],
        config: OmegaConfig,
        n_adversaries: int,
    ):
        """
        Args:
            content: 실제 content (true bit 응답용)
            puzzles: 서비스할 puzzle 목록 (puzzle_id = 위치)
            config: V, q_H, L
            n_adversaries: A
        """
        if puzzles:
            params = puzzles[0].params
            if content.n_bits != params.N:
                raise ContentSizeError(f"content 크기({content.n_bits})가 params.N({params.N})과 다릅니다")
            config.validate(params.n)
        self.content = content
        self.puzzles = list(puzzles)
        self.config = config
        self.stats = OracleStats(n_adversaries, content.n_bits)
        self.puzzle_queries = np.zeros(len(self.puzzles), dtype=np.int64)
        self._sets: Dict[Tuple[int, int], IndexSet] = {}

        logger.debug(
            f"Ω 초기화: A={n_adversaries}, puzzles={len(self.puzzles)}, "
            f"V={config.V}, q_H={config.q_H}, L={config.L}"
        )

    # ------------------------------------------------------------------
    # content oracle
    # ------------------------------------------------------------------
    def content_query(self, v: int, i: int) -> int:
        """
        content bit i를 v에게 응답하고 unique index로 기록

        Raises:
            DomainError: i가 [0, N) 밖인 경우
        """
        self.stats.check_adversary(v)
        if not 0 <= i < self.content.n_bits:
            raise DomainError(f"content index {i}가 [0, {self.content.n_bits}) 범위를 벗어났습니다")
        self.stats.record(v, np.array([i], dtype=np.int64))
        return self.content.get(i)

    def content_query_many(self, v: int, indices: np.ndarray) -> np.ndarray:
        """content_query의 bulk 버전"""
        self.stats.check_adversary(v)
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.content.n_bits):
            raise DomainError(f"content index가 [0, {self.content.n_bits}) 범위를 벗어났습니다")
        self.stats.record(v, indices)
        return self.content.bits[indices]

    def download_all(self, v: int) -> int:
        """v가 전체 N bits를 질의 (honest prover / 선택된 member)"""
        self.stats.check_adversary(v)
        before = int(self.stats.content_bits[v])
        self.stats.queried[v, :] = True
        self.stats.content_bits[v] = self.content.n_bits
        return self.content.n_bits - before

    # ------------------------------------------------------------------
    # Ω hash oracle
    # ------------------------------------------------------------------
    def index_set(self, puzzle_id: int, j: int) -> IndexSet:
        key = (puzzle_id, j)
        iset = self._sets.get(key)
        if iset is None:
            puzzle = self.puzzles[puzzle_id]
            iset = index_set(puzzle.params, puzzle.k1, j)
            self._sets[key] = iset
        return iset

    def missing_bits(self, v: int, iset: IndexSet) -> int:
        """iset의 distinct index 중 v가 질의하지 않은 수"""
        unique = iset.unique()
        return int(np.count_nonzero(~self.stats.queried[v, unique]))

    def classify_query(self, v: int, iset: IndexSet, V: Optional[int] = None) -> str:
        """
        informed ⇔ 빠진 distinct index 수 ≤ V (경계 포함)

        Returns:
            INFORMED 또는 UNINFORMED
        """
        self.stats.check_adversary(v)
        slack = self.config.V if V is None else V
        return INFORMED if self.missing_bits(v, iset) <= slack else UNINFORMED

    def remaining_budget(self, v: int) -> int:
        return int(self.config.q_H - self.stats.hash_queries[v])

    def omega_hash_query(self, v: int, puzzle_id: int, j: int) -> Optional[bytes]:
        """
        Ω hash query

        Args:
            v: adversary id
            puzzle_id: puzzle 위치
            j: index set ordinal

        Returns:
            hash_H(k1, j, true string) 또는 refusal(None)
        """
        if not (
            0 <= v < self.stats.n_adversaries
            and 0 <= puzzle_id < len(self.puzzles)
            and 1 <= j <= self.config.L
        ):
            logger.debug(f"refusal: 존재하지 않는 (v={v}, puzzle={puzzle_id}, j={j})")
            return None
        memo_key = (v, puzzle_id, j)
        if memo_key in self.stats.memo:
            return self.stats.memo[memo_key]

        if self.stats.hash_queries[v] >= self.config.q_H:
            logger.debug(f"refusal: adversary {v} 예산 소진 (q_H={self.config.q_H})")
            return None
        if self.puzzle_queries[puzzle_id] >= self.config.L:
            logger.debug(f"refusal: puzzle {puzzle_id} 질의 수가 L={self.config.L}에 도달")
            return None

        self.stats.hash_queries[v] += 1
        self.puzzle_queries[puzzle_id] += 1

        iset = self.index_set(puzzle_id, j)
        if self.classify_query(v, iset) == UNINFORMED:
            return None

        puzzle = self.puzzles[puzzle_id]
        params = puzzle.params
        reply = hash_H(puzzle.k1, j, true_string(self.content, iset), params.n, params.kappa)
        if reply == puzzle.hint:
            self.stats.confirmed[v] += 1
        self.stats.memo[memo_key] = reply
        return reply

    def known_string(self, v: int, puzzle_id: int, j: int) -> np.ndarray:
        """v가 자신이 질의한 bit로 조립할 수 있는 string (모르는 bit는 0)"""
        iset = self.index_set(puzzle_id, j)
        known = self.stats.queried[v, iset.indices]
        return np.where(known, self.content.bits[iset.indices], 0).astype(np.uint8)

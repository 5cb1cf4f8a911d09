"""
FR-02: Puzzle Core - 생성, Index Set 확장, Honest Solve, 검증

Verifier는 κ-bit key k1과 hint c만 보냅니다. Index set은 (k1, j)로부터
PRF로 재생성되므로 전송되지 않습니다.

주요 기능:
- PuzzleParams (N, n, L, m, θ, κ) 검증 및 직렬화
- Content: N bits, 8 bits/byte MSB-first packing
- generate_puzzle: answer index set j*만 확장
- solve: 주어진 순서로 hash_H를 계산하여 confirm 탐색
- verify: answer digest byte-exact 비교

Index convention: content index는 모든 곳에서 0-based [0, N).
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .constants import DEFAULT_KAPPA, SERIAL_VERSION
from .errors import ContentSizeError, DomainError, MalformedPuzzleError
from .logger import setup_logger
from .primitives import hash_A, hash_H, prf_f1, prf_f2_indices, unpack_bits, validate_kappa

logger = setup_logger(__name__)

_PARAMS = struct.Struct(">QQQQQQ")
PARAMS_HEADER_SIZE = 1 + _PARAMS.size   # version byte + 6 × 8 bytes

RngLike = Union[np.random.Generator, int, None]


def as_rng(rng: RngLike) -> np.random.Generator:
    """seed 또는 Generator를 np.random.Generator로 통일"""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class PuzzleParams:
    """
    Puzzle family의 공개 파라미터

    Attributes:
        N: content 크기 (bits)
        n: index set 당 index 수
        L: puzzle 당 index set 수
        m: challenge 당 puzzle 수
        theta: time threshold (밀리초)
        kappa: 보안 파라미터 (bits)
    """

    N: int
    n: int
    L: int
    m: int = 1
    theta: int = 3000
    kappa: int = DEFAULT_KAPPA

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N은 1 이상이어야 합니다: {self.N}")
        if self.n < 1:
            raise DomainError(f"n은 1 이상이어야 합니다: {self.n}")
        if self.L < 1:
            raise DomainError(f"L은 1 이상이어야 합니다: {self.L}")
        if self.m < 1:
            raise DomainError(f"m은 1 이상이어야 합니다: {self.m}")
        if self.theta <= 0:
            raise DomainError(f"theta는 양수여야 합니다: {self.theta}")
        validate_kappa(self.kappa)

    @property
    def key_size(self) -> int:
        return self.kappa // 8

    @property
    def theta_seconds(self) -> float:
        return self.theta / 1000.0

    def to_bytes(self) -> bytes:
        """version ‖ N ‖ n ‖ L ‖ m ‖ θ ‖ κ (각 8-byte big-endian)"""
        return bytes([SERIAL_VERSION]) + _PARAMS.pack(
            self.N, self.n, self.L, self.m, int(self.theta), self.kappa
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "PuzzleParams":
        if len(data) < PARAMS_HEADER_SIZE:
            raise DomainError(f"params header가 너무 짧습니다: {len(data)} bytes")
        if data[0] != SERIAL_VERSION:
            raise DomainError(f"지원하지 않는 직렬화 버전: {data[0]}")
        N, n, L, m, theta, kappa = _PARAMS.unpack(data[1:PARAMS_HEADER_SIZE])
        return cls(N=N, n=n, L=L, m=m, theta=theta, kappa=kappa)


class Content:
    """
    N bits content (packed bytes + 길이)

    get(i) = byte[i // 8] >> (7 - i % 8) & 1
    """

    def __init__(self, data: bytes, n_bits: int):
        if n_bits < 1:
            raise DomainError(f"content bit 수는 1 이상이어야 합니다: {n_bits}")
        expected = -(-n_bits // 8)
        if len(data) != expected:
            raise ContentSizeError(
                f"content 크기 불일치: {n_bits} bits → {expected} bytes 필요, {len(data)} bytes 제공"
            )
        self.data = bytes(data)
        self.n_bits = n_bits
        self._bits: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.n_bits

    def __eq__(self, other) -> bool:
        return isinstance(other, Content) and self.n_bits == other.n_bits and self.data == other.data

    @property
    def bits(self) -> np.ndarray:
        """unpacked uint8 0/1 배열 (lazy)"""
        if self._bits is None:
            self._bits = unpack_bits(self.data, self.n_bits)
            self._bits.setflags(write=False)
        return self._bits

    def get(self, i: int) -> int:
        if not 0 <= i < self.n_bits:
            raise DomainError(f"content index {i}가 [0, {self.n_bits}) 범위를 벗어났습니다")
        return (self.data[i // 8] >> (7 - i % 8)) & 1

    @classmethod
    def from_bitstring(cls, text: str) -> "Content":
        """'00110101' 같은 문자열로부터 생성 (테스트/예제용)"""
        bits = np.array([int(c) for c in text], dtype=np.uint8)
        return cls(np.packbits(bits, bitorder="big").tobytes(), len(bits))

    @classmethod
    def random(cls, n_bits: int, rng: RngLike = None) -> "Content":
        generator = as_rng(rng)
        data = bytearray(generator.bytes(-(-n_bits // 8)))
        pad = (-n_bits) % 8
        if pad:
            data[-1] &= (0xFF << pad) & 0xFF
        return cls(bytes(data), n_bits)

    @classmethod
    def from_file(cls, path: Union[str, Path], n_bits: int) -> "Content":
        """
        Raw packed-bit content 파일 로딩

        Raises:
            FileNotFoundError: 파일이 없는 경우
            DomainError: 크기가 params.N과 맞지 않는 경우
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"content 파일을 찾을 수 없습니다: {path}")
        return cls(path.read_bytes(), n_bits)

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.data)
        return path


@dataclass(frozen=True)
class IndexSet:
    """ordinal j와 n개의 content index (중복 허용)"""

    j: int
    indices: np.ndarray = field(compare=False)

    def __len__(self) -> int:
        return int(self.indices.size)

    def unique(self) -> np.ndarray:
        return np.unique(self.indices)


@dataclass(frozen=True)
class Puzzle:
    """하나의 puzzle: key k1, hint c, 공개 파라미터"""

    k1: bytes
    hint: bytes
    params: PuzzleParams

    def to_bytes(self) -> bytes:
        """params header ‖ k1 ‖ hint (index set은 절대 포함하지 않음)"""
        return self.params.to_bytes() + self.k1 + self.hint

    @classmethod
    def from_bytes(cls, data: bytes) -> "Puzzle":
        params = PuzzleParams.from_bytes(data)
        size = params.key_size
        body = data[PARAMS_HEADER_SIZE:]
        if len(body) != 2 * size:
            raise DomainError(f"puzzle 길이 불일치: {2 * size} bytes 필요, {len(body)} bytes 제공")
        return cls(k1=body[:size], hint=body[size:], params=params)


@dataclass(frozen=True)
class PuzzleSecret:
    """Verifier만 보관: answer index set j*와 answer digest"""

    j_star: int
    answer: bytes

    def to_bytes(self) -> bytes:
        return bytes([SERIAL_VERSION]) + struct.pack(">I", self.j_star) + self.answer

    @classmethod
    def from_bytes(cls, data: bytes) -> "PuzzleSecret":
        if len(data) < 5 or data[0] != SERIAL_VERSION:
            raise DomainError("잘못된 secret 인코딩")
        (j_star,) = struct.unpack(">I", data[1:5])
        return cls(j_star=j_star, answer=data[5:])


@dataclass(frozen=True)
class Solution:
    """Prover가 제출하는 answer digest A(s_j)"""

    answer: bytes


def index_set(params: PuzzleParams, k1: bytes, j: int) -> IndexSet:
    """
    I_j = {f2_{k2}(1) ... f2_{k2}(n)},  k2 = f1_{k1}(j)

    Args:
        params: puzzle 파라미터
        k1: puzzle key
        j: ordinal (1..L)

    Returns:
        IndexSet (결정적으로 재생성 가능)

    Raises:
        DomainError: j가 [1, L] 밖인 경우
    """
    k2 = prf_f1(k1, j, params.L, params.kappa)
    return IndexSet(j=j, indices=prf_f2_indices(k2, params.n, params.N))


def true_string(content: Content, iset: IndexSet) -> np.ndarray:
    """
    Index set 위치의 content bit를 순서대로 읽은 n-bit string

    Raises:
        DomainError: index가 content 범위를 벗어난 경우
    """
    indices = np.asarray(iset.indices)
    if indices.size and (indices.min() < 0 or indices.max() >= content.n_bits):
        raise DomainError(f"index set {iset.j}에 [0, {content.n_bits}) 밖의 index가 있습니다")
    return content.bits[indices]


def generate_puzzle(
    params: PuzzleParams, content: Content, rng: RngLike = None
) -> Tuple[Puzzle, PuzzleSecret]:
    """
    Puzzle 생성

    k1은 rng로부터, j*는 [1, L]에서 균등하게 선택. answer index set만 확장합니다.

    Args:
        params: puzzle 파라미터
        content: verifier가 보유한 content
        rng: seed 또는 np.random.Generator

    Returns:
        (Puzzle, PuzzleSecret)

    Raises:
        DomainError: content 크기가 params.N과 다른 경우
    """
    if content.n_bits != params.N:
        raise ContentSizeError(f"content 크기({content.n_bits})가 params.N({params.N})과 다릅니다")

    generator = as_rng(rng)
    k1 = generator.bytes(params.key_size)
    j_star = int(generator.integers(1, params.L + 1))

    s = true_string(content, index_set(params, k1, j_star))
    hint = hash_H(k1, j_star, s, params.n, params.kappa)
    answer = hash_A(s, params.n, params.kappa)

    return Puzzle(k1=k1, hint=hint, params=params), PuzzleSecret(j_star=j_star, answer=answer)


def generate_challenge_puzzles(
    params: PuzzleParams, content: Content, rng: RngLike = None
) -> List[Tuple[Puzzle, PuzzleSecret]]:
    """한 challenge의 m개 puzzle 생성"""
    generator = as_rng(rng)
    return [generate_puzzle(params, content, generator) for _ in range(params.m)]


def permuted_order(L: int, rng: RngLike = None) -> List[int]:
    """1..L의 무작위 순열 (adversarial 실험용 solver order)"""
    return [int(j) for j in as_rng(rng).permutation(np.arange(1, L + 1))]


def solve(
    puzzle: Puzzle, content: Content, order: Optional[Iterable[int]] = None
) -> Tuple[Solution, int]:
    """
    Honest solve: confirm이 나올 때까지 index set의 hash를 hint와 비교

    Args:
        puzzle: 풀 puzzle
        content: 전체 content
        order: j 순회 순서 (기본 1..L 순차)

    Returns:
        (Solution, 사용한 hash_H 호출 수)

    Raises:
        MalformedPuzzleError: L개 set 모두 confirm이 없는 경우
    """
    params = puzzle.params
    if content.n_bits != params.N:
        raise ContentSizeError(f"content 크기({content.n_bits})가 params.N({params.N})과 다릅니다")

    sequence: Sequence[int] = list(order) if order is not None else range(1, params.L + 1)
    queries = 0
    for j in sequence:
        s = true_string(content, index_set(params, puzzle.k1, j))
        queries += 1
        if hash_H(puzzle.k1, j, s, params.n, params.kappa) == puzzle.hint:
            logger.debug(f"confirm: j={j}, queries={queries}")
            return Solution(answer=hash_A(s, params.n, params.kappa)), queries

    raise MalformedPuzzleError(f"{queries}개 index set에서 confirm을 찾지 못했습니다 (hint 손상)")


def verify(secret: PuzzleSecret, submitted: Solution) -> bool:
    """제출된 answer가 secret.answer와 byte-exact로 같은지"""
    return submitted.answer == secret.answer

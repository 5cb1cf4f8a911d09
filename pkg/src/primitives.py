"""
FR-01: Crypto Primitives - PRF f1/f2, Hash H/A

Puzzle 구성에 필요한 결정적(deterministic) keyed primitive 모음.

주요 기능:
- prf_f1: (k1, j) → index set key k2
- prf_f2: (k2, i, N) → content index (0-based, rejection sampling으로 modulo bias 제거)
- hash_H: (k1, j, s) → hint 비교용 digest
- hash_A: s → answer digest

인코딩 (모든 정수는 big-endian):
- H: 0x01 ‖ k1 ‖ j(4) ‖ n(4) ‖ packed(s)
- A: 0x02 ‖ n(4) ‖ packed(s)
- f1: 0x03 ‖ k1 ‖ j(4)
- f2 stream block: 0x04 ‖ k2 ‖ counter(8), 32 bytes → 64-bit word 4개

κ ≤ 256이면 SHA-256을, κ > 256이면 SHA-512를 κ/8 bytes로 절단합니다.
모든 함수는 공유 상태가 없는 순수 함수입니다.
"""

import hashlib
import struct
from typing import Callable, Optional

import numpy as np

from .constants import (
    DEFAULT_KAPPA,
    MAX_KAPPA,
    MIN_KAPPA,
    TAG_HASH_A,
    TAG_HASH_H,
    TAG_PRF_F1,
    TAG_PRF_F2,
)
from .errors import DomainError
from .logger import setup_logger

logger = setup_logger(__name__)

_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")
_TWO_64 = 1 << 64
_WORDS_PER_BLOCK = 4   # SHA-256 32 bytes = 64-bit word 4개

# Query counting hook: hash_H / hash_A 호출 시 함수 이름으로 호출됨 (bench, oracle 계측용)
_query_hook: Optional[Callable[[str], None]] = None


def set_query_hook(hook: Optional[Callable[[str], None]]) -> None:
    """
    Hash 호출 계측 hook 설정 (None이면 해제)

    Args:
        hook: 함수 이름('hash_H', 'hash_A')을 인자로 받는 callable
    """
    global _query_hook
    _query_hook = hook


def validate_kappa(kappa: int) -> int:
    """
    κ 검증: 8의 배수, [160, 512]

    Raises:
        DomainError: 범위 밖이거나 8의 배수가 아닌 경우
    """
    if kappa % 8 != 0 or not (MIN_KAPPA <= kappa <= MAX_KAPPA):
        raise DomainError(f"kappa는 {MIN_KAPPA}~{MAX_KAPPA} 사이의 8의 배수여야 합니다: {kappa}")
    return kappa


def _digest(message: bytes, kappa: int) -> bytes:
    """κ/8 bytes 길이의 digest"""
    size = kappa // 8
    if kappa <= 256:
        return hashlib.sha256(message).digest()[:size]
    return hashlib.sha512(message).digest()[:size]


def _check_key(key: bytes, kappa: int) -> None:
    if len(key) != kappa // 8:
        raise DomainError(f"key 길이는 {kappa // 8} bytes여야 합니다: {len(key)}")


def pack_bits(bits: np.ndarray) -> bytes:
    """
    0/1 bit 배열을 MSB-first로 packing (마지막 byte의 남는 bit는 0)

    Args:
        bits: uint8 0/1 배열

    Returns:
        ⌈len/8⌉ bytes
    """
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="big").tobytes()


def unpack_bits(data: bytes, n_bits: int) -> np.ndarray:
    """
    pack_bits의 역변환

    Args:
        data: packed bytes
        n_bits: 사용할 bit 수

    Returns:
        길이 n_bits의 uint8 0/1 배열
    """
    raw = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(raw, count=n_bits, bitorder="big")


def prf_f1(k1: bytes, j: int, L: int, kappa: int = DEFAULT_KAPPA) -> bytes:
    """
    PRF f1: {1..L} → {0,1}^κ

    Args:
        k1: puzzle key (κ/8 bytes)
        j: index set ordinal (1..L)
        L: puzzle 당 index set 수
        kappa: 보안 파라미터

    Returns:
        index set key k2 (κ/8 bytes)

    Raises:
        DomainError: j가 [1, L] 밖인 경우
    """
    _check_key(k1, kappa)
    if not 1 <= j <= L:
        raise DomainError(f"set ordinal j={j}가 [1, {L}] 범위를 벗어났습니다")
    return _digest(bytes([TAG_PRF_F1]) + k1 + _U32.pack(j), kappa)


def _f2_blocks(k2: bytes, start: int, count: int) -> np.ndarray:
    """counter start..start+count-1 블록의 64-bit word 배열"""
    prefix = bytes([TAG_PRF_F2]) + k2
    chunks = [hashlib.sha256(prefix + _U64.pack(ctr)).digest() for ctr in range(start, start + count)]
    return np.frombuffer(b"".join(chunks), dtype=">u8")


def prf_f2_indices(k2: bytes, n: int, N: int) -> np.ndarray:
    """
    PRF f2 position 1..n 전체를 한 번에 생성 (vectorised)

    64-bit word를 stream에서 뽑아 ⌊2^64/N⌋·N 이상이면 버리고(reject) mod N.

    Args:
        k2: index set key
        n: 생성할 index 수
        N: content 크기

    Returns:
        길이 n의 int64 배열, 모든 값은 [0, N)
    """
    if N < 1:
        raise DomainError(f"content 크기 N은 1 이상이어야 합니다: {N}")
    if n < 0:
        raise DomainError(f"index 수 n은 음수일 수 없습니다: {n}")

    limit = (_TWO_64 // N) * N
    accepted = np.empty(0, dtype=np.uint64)
    counter = 0
    while accepted.size < n:
        need = n - accepted.size
        n_blocks = -(-need // _WORDS_PER_BLOCK)
        words = _f2_blocks(k2, counter, n_blocks).astype(np.uint64)
        counter += n_blocks
        if limit < _TWO_64:
            words = words[words < np.uint64(limit)]
        accepted = np.concatenate([accepted, words])

    return (accepted[:n] % np.uint64(N)).astype(np.int64)


def prf_f2(k2: bytes, i: int, n: int, N: int) -> int:
    """
    PRF f2: {1..n} → [0, N)

    Args:
        k2: index set key
        i: position (1..n)
        n: index set 크기
        N: content 크기

    Returns:
        content index

    Raises:
        DomainError: i가 [1, n] 밖인 경우
    """
    if not 1 <= i <= n:
        raise DomainError(f"position i={i}가 [1, {n}] 범위를 벗어났습니다")
    return int(prf_f2_indices(k2, i, N)[i - 1])


def _check_bits(s: np.ndarray, n: int) -> np.ndarray:
    bits = np.asarray(s, dtype=np.uint8)
    if bits.ndim != 1 or bits.size != n:
        raise DomainError(f"bit string 길이는 {n}이어야 합니다: {bits.size}")
    return bits


def hash_H(k1: bytes, j: int, s: np.ndarray, n: int, kappa: int = DEFAULT_KAPPA) -> bytes:
    """
    Hash H: {0,1}^κ × {1..L} × {0,1}^n → {0,1}^κ

    k1과 j를 함께 묶어서 다른 puzzle의 결과를 재사용할 수 없게 합니다.

    Args:
        k1: puzzle key
        j: index set ordinal
        s: 길이 n의 bit string
        n: index set 크기
        kappa: 보안 파라미터

    Returns:
        digest (κ/8 bytes)

    Raises:
        DomainError: s 길이가 n이 아닌 경우
    """
    bits = _check_bits(s, n)
    _check_key(k1, kappa)
    if _query_hook is not None:
        _query_hook("hash_H")
    message = bytes([TAG_HASH_H]) + k1 + _U32.pack(j) + _U32.pack(n) + pack_bits(bits)
    return _digest(message, kappa)


def hash_A(s: np.ndarray, n: int, kappa: int = DEFAULT_KAPPA) -> bytes:
    """
    Hash A: {0,1}^n → {0,1}^κ (collision-resistance만 가정)

    Args:
        s: 길이 n의 bit string
        n: index set 크기
        kappa: 보안 파라미터

    Returns:
        answer digest (κ/8 bytes)
    """
    bits = _check_bits(s, n)
    if _query_hook is not None:
        _query_hook("hash_A")
    message = bytes([TAG_HASH_A]) + _U32.pack(n) + pack_bits(bits)
    return _digest(message, kappa)

"""
FR-07: Protocol - Verifier / Prover challenge-response over TCP

Frame: 4-byte big-endian length ‖ 1-byte message type ‖ payload
(length = 1 + len(payload)). Message type: 0x01 CHALLENGE, 0x02 RESPONSE,
0x03 VERDICT.

주요 기능:
- Challenge / Response / Verdict 직렬화 (index set, content bit는 절대 전송하지 않음)
- Verifier: challenge 발급, verifier clock 기준 시간 판정, verdict 캐시
- respond: honest solve, content 없으면 sentinel 또는 무작위 추측
- VerifierService: asyncio 서버, round_size 명의 prover에게 동시에 발급
- ProverClient: asyncio client (인위적 지연, guessing 모드)

판정은 verifier clock만 사용합니다 (prover clock 불신).
"""

import asyncio
import struct
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from .constants import (
    DEFAULT_GRACE_FRACTION,
    DEFAULT_RETENTION_FACTOR,
    DEFAULT_HOST,
    DEFAULT_PORT,
    MAX_FRAME_SIZE,
    MESSAGE_NAMES,
    MSG_CHALLENGE,
    MSG_RESPONSE,
    MSG_VERDICT,
    SERIAL_VERSION,
)
from .errors import ContentSizeError, DomainError, MalformedPuzzleError, ProtocolError, TransportError
from .logger import setup_logger
from .puzzle import (
    PARAMS_HEADER_SIZE,
    Content,
    Puzzle,
    PuzzleParams,
    PuzzleSecret,
    RngLike,
    Solution,
    as_rng,
    generate_challenge_puzzles,
    solve,
    verify,
)

logger = setup_logger(__name__)

_FRAME_HEADER = struct.Struct(">IB")
_CHALLENGE_HEADER = struct.Struct(">B8sQ")     # version, id, issued_at (µs)
_RESPONSE_HEADER = struct.Struct(">B8sIH")    # version, id, m, digest length
_VERDICT_HEADER = struct.Struct(">B8s??I")    # version, id, on_time, accepted, m

CHALLENGE_ID_SIZE = 8


# ----------------------------------------------------------------------
# Framing
# ----------------------------------------------------------------------
def encode_frame(msg_type: int, payload: bytes) -> bytes:
    """length ‖ type ‖ payload"""
    if msg_type not in MESSAGE_NAMES:
        raise ProtocolError(f"알 수 없는 message type: {msg_type:#04x}")
    if 1 + len(payload) > MAX_FRAME_SIZE:
        raise ProtocolError(f"frame이 너무 큽니다: {1 + len(payload)} bytes")
    return _FRAME_HEADER.pack(1 + len(payload), msg_type) + payload


async def read_frame(reader: asyncio.StreamReader, max_size: int = MAX_FRAME_SIZE) -> Tuple[int, bytes]:
    """
    frame 하나 읽기

    Returns:
        (message type, payload)

    Raises:
        ProtocolError: 길이가 0이거나 max_size 초과, 알 수 없는 type
        TransportError: 연결이 중간에 끊긴 경우
    """
    try:
        header = await reader.readexactly(4)
        (length,) = struct.unpack(">I", header)
        if length < 1 or length > max_size:
            raise ProtocolError(f"잘못된 frame 길이: {length} (max {max_size})")
        body = await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise TransportError(f"frame 수신 중 연결 종료 ({len(e.partial)} bytes 수신)") from e
    msg_type = body[0]
    if msg_type not in MESSAGE_NAMES:
        raise ProtocolError(f"알 수 없는 message type: {msg_type:#04x}")
    return msg_type, body[1:]


async def write_frame(writer: asyncio.StreamWriter, msg_type: int, payload: bytes) -> None:
    try:
        writer.write(encode_frame(msg_type, payload))
        await writer.drain()
    except ConnectionError as e:
        raise TransportError(f"frame 전송 실패: {e}") from e


async def expect_frame(reader: asyncio.StreamReader, expected: int) -> bytes:
    msg_type, payload = await read_frame(reader)
    if msg_type != expected:
        raise ProtocolError(f"{MESSAGE_NAMES[expected]} 대신 {MESSAGE_NAMES[msg_type]} 수신")
    return payload


# ----------------------------------------------------------------------
# Messages
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Challenge:
    """m개 puzzle (k1, hint)와 공개 파라미터"""

    challenge_id: bytes
    params: PuzzleParams
    puzzles: Tuple[Puzzle, ...]
    issued_at: float = 0.0

    def __post_init__(self):
        if len(self.challenge_id) != CHALLENGE_ID_SIZE:
            raise DomainError(f"challenge id는 {CHALLENGE_ID_SIZE} bytes여야 합니다")
        if len(self.puzzles) != self.params.m:
            raise DomainError(f"puzzle 수({len(self.puzzles)})가 m={self.params.m}과 다릅니다")
        if any(p.params != self.params for p in self.puzzles):
            raise DomainError("모든 puzzle은 같은 params를 공유해야 합니다")

    @staticmethod
    def encoded_size(params: PuzzleParams) -> int:
        return _CHALLENGE_HEADER.size + PARAMS_HEADER_SIZE + params.m * 2 * params.key_size

    def to_bytes(self) -> bytes:
        header = _CHALLENGE_HEADER.pack(SERIAL_VERSION, self.challenge_id, int(round(self.issued_at * 1e6)))
        body = b"".join(p.k1 + p.hint for p in self.puzzles)
        return header + self.params.to_bytes() + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Challenge":
        if len(data) < _CHALLENGE_HEADER.size + PARAMS_HEADER_SIZE:
            raise ProtocolError(f"challenge가 너무 짧습니다: {len(data)} bytes")
        version, challenge_id, issued_us = _CHALLENGE_HEADER.unpack_from(data)
        if version != SERIAL_VERSION:
            raise ProtocolError(f"지원하지 않는 challenge 버전: {version}")
        try:
            params = PuzzleParams.from_bytes(data[_CHALLENGE_HEADER.size:])
        except DomainError as e:
            raise ProtocolError(f"잘못된 params: {e}") from e
        if len(data) != cls.encoded_size(params):
            raise ProtocolError(f"challenge 길이 불일치: {cls.encoded_size(params)} 필요, {len(data)} 수신")
        size = params.key_size
        offset = _CHALLENGE_HEADER.size + PARAMS_HEADER_SIZE
        puzzles = []
        for _ in range(params.m):
            puzzles.append(Puzzle(k1=data[offset:offset + size], hint=data[offset + size:offset + 2 * size], params=params))
            offset += 2 * size
        return cls(challenge_id=challenge_id, params=params, puzzles=tuple(puzzles), issued_at=issued_us / 1e6)


@dataclass(frozen=True)
class Response:
    """m개 answer digest (풀지 못한 위치는 all-zero sentinel)"""

    challenge_id: bytes
    answers: Tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        digest_len = len(self.answers[0]) if self.answers else 0
        if any(len(a) != digest_len for a in self.answers):
            raise DomainError("모든 answer digest는 같은 길이여야 합니다")
        header = _RESPONSE_HEADER.pack(SERIAL_VERSION, self.challenge_id, len(self.answers), digest_len)
        return header + b"".join(self.answers)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Response":
        if len(data) < _RESPONSE_HEADER.size:
            raise ProtocolError(f"response가 너무 짧습니다: {len(data)} bytes")
        version, challenge_id, m, digest_len = _RESPONSE_HEADER.unpack_from(data)
        if version != SERIAL_VERSION:
            raise ProtocolError(f"지원하지 않는 response 버전: {version}")
        body = data[_RESPONSE_HEADER.size:]
        if len(body) != m * digest_len:
            raise ProtocolError(f"response 길이 불일치: {m * digest_len} 필요, {len(body)} 수신")
        answers = tuple(body[i * digest_len:(i + 1) * digest_len] for i in range(m))
        return cls(challenge_id=challenge_id, answers=answers)


@dataclass(frozen=True)
class Verdict:
    """accepted = on_time AND 모든 pass flag"""

    challenge_id: bytes
    passed: Tuple[bool, ...]
    on_time: bool
    accepted: bool

    def to_bytes(self) -> bytes:
        header = _VERDICT_HEADER.pack(SERIAL_VERSION, self.challenge_id, self.on_time, self.accepted, len(self.passed))
        return header + bytes(int(flag) for flag in self.passed)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Verdict":
        if len(data) < _VERDICT_HEADER.size:
            raise ProtocolError(f"verdict가 너무 짧습니다: {len(data)} bytes")
        version, challenge_id, on_time, accepted, m = _VERDICT_HEADER.unpack_from(data)
        if version != SERIAL_VERSION:
            raise ProtocolError(f"지원하지 않는 verdict 버전: {version}")
        flags = data[_VERDICT_HEADER.size:]
        if len(flags) != m:
            raise ProtocolError(f"verdict flag 수 불일치: {m} 필요, {len(flags)} 수신")
        return cls(challenge_id=challenge_id, passed=tuple(bool(b) for b in flags), on_time=on_time, accepted=accepted)


# ----------------------------------------------------------------------
# Verifier / Prover logic
# ----------------------------------------------------------------------
@dataclass
class _PendingChallenge:
    challenge: Challenge
    secrets: List[PuzzleSecret]


class Verifier:
    """
    Verifier 상태: 발급한 challenge의 secret, 발급 시각, 확정된 verdict

    같은 challenge id에 대한 중복 response는 최초 verdict를 그대로 돌려줍니다.
    """

    def __init__(
        self,
        content: Content,
        params: PuzzleParams,
        grace_fraction: float = DEFAULT_GRACE_FRACTION,
        rng: RngLike = None,
        clock: Callable[[], float] = time.monotonic,
        retention_factor: float = DEFAULT_RETENTION_FACTOR,
    ):
        if content.n_bits != params.N:
            raise ContentSizeError(f"content 크기({content.n_bits})가 params.N({params.N})과 다릅니다")
        if grace_fraction < 0:
            raise DomainError(f"grace_fraction은 0 이상이어야 합니다: {grace_fraction}")
        if retention_factor < 1:
            raise DomainError(f"retention_factor는 1 이상이어야 합니다: {retention_factor}")
        self.content = content
        self.params = params
        self.grace_fraction = grace_fraction
        self.rng = as_rng(rng)
        self.clock = clock
        self.retention_factor = retention_factor
        self._pending: Dict[bytes, _PendingChallenge] = {}
        self._verdicts: Dict[bytes, Tuple[Verdict, float]] = {}

        logger.info(
            f"Verifier 초기화: N={params.N}, n={params.n}, L={params.L}, m={params.m}, "
            f"θ={params.theta}ms, grace={grace_fraction:.0%}"
        )

    @property
    def deadline_seconds(self) -> float:
        """θ + grace (초)"""
        return self.params.theta_seconds * (1.0 + self.grace_fraction)

    @property
    def retention_seconds(self) -> float:
        """미응답 challenge와 verdict를 보관하는 시간 (deadline × retention_factor)"""
        return self.deadline_seconds * self.retention_factor

    @property
    def pending_count(self) -> int:
        return len(self._pending)

    @property
    def cached_verdicts(self) -> int:
        return len(self._verdicts)

    def prune(self, now: Optional[float] = None) -> int:
        """
        보관 시간이 지난 항목 정리

        미응답 challenge는 만료 verdict (on_time=False, 모두 실패)로 바꾸고,
        오래된 verdict는 삭제합니다.

        Returns:
            만료 처리한 challenge 수
        """
        now = self.clock() if now is None else now
        limit = self.retention_seconds
        expired = [cid for cid, p in self._pending.items() if now - p.challenge.issued_at > limit]
        for cid in expired:
            pending = self._pending.pop(cid)
            verdict = Verdict(
                challenge_id=cid,
                passed=(False,) * len(pending.secrets),
                on_time=False,
                accepted=False,
            )
            self._verdicts[cid] = (verdict, now)
            logger.warning(f"challenge 만료 (응답 없음): {cid.hex()}")
        stale = [cid for cid, (_, decided_at) in self._verdicts.items() if now - decided_at > limit]
        for cid in stale:
            del self._verdicts[cid]
        if stale:
            logger.debug(f"verdict cache 정리: {len(stale)}건")
        return len(expired)

    def issue_challenge(self, challenge_id: Optional[bytes] = None) -> Challenge:
        """
        m개 새 puzzle을 만들고 secret을 보관, 타이머 시작

        Raises:
            ProtocolError: 이미 사용된 challenge id
        """
        self.prune()
        if challenge_id is None:
            challenge_id = self.rng.bytes(CHALLENGE_ID_SIZE)
        if challenge_id in self._pending or challenge_id in self._verdicts:
            raise ProtocolError(f"중복 challenge id: {challenge_id.hex()}")

        generated = generate_challenge_puzzles(self.params, self.content, self.rng)
        challenge = Challenge(
            challenge_id=challenge_id,
            params=self.params,
            puzzles=tuple(p for p, _ in generated),
            issued_at=self.clock(),
        )
        self._pending[challenge_id] = _PendingChallenge(challenge, [s for _, s in generated])
        logger.debug(f"challenge 발급: {challenge_id.hex()}")
        return challenge

    def adjudicate(self, response: Response, arrival: Optional[float] = None) -> Verdict:
        """
        on_time = (arrival − issued_at ≤ θ + grace), pass flag는 verify()

        Raises:
            ProtocolError: 알 수 없는 challenge id
        """
        cid = response.challenge_id
        self.prune()
        if cid in self._verdicts:
            logger.debug(f"중복 response: {cid.hex()} → 최초 verdict 반환")
            return self._verdicts[cid][0]
        pending = self._pending.pop(cid, None)
        if pending is None:
            raise ProtocolError(f"알 수 없는 challenge id: {cid.hex()}")

        arrival = self.clock() if arrival is None else arrival
        elapsed = arrival - pending.challenge.issued_at
        on_time = elapsed <= self.deadline_seconds

        passed = []
        for position, secret in enumerate(pending.secrets):
            answer = response.answers[position] if position < len(response.answers) else None
            passed.append(answer is not None and verify(secret, Solution(answer)))

        verdict = Verdict(challenge_id=cid, passed=tuple(passed), on_time=on_time, accepted=on_time and all(passed))
        self._verdicts[cid] = (verdict, arrival)
        log = logger.info if verdict.accepted else logger.warning
        log(
            f"verdict {cid.hex()}: accepted={verdict.accepted}, on_time={on_time} "
            f"({elapsed * 1000:.1f}ms / {self.deadline_seconds * 1000:.0f}ms), "
            f"passed={sum(passed)}/{len(passed)}"
        )
        return verdict


def unsolved_digest(params: PuzzleParams) -> bytes:
    """풀지 못한 위치의 sentinel"""
    return bytes(params.key_size)


def respond(challenge: Challenge, content: Optional[Content], guess: bool = False, rng: RngLike = None) -> Response:
    """
    Prover 응답 생성

    Args:
        challenge: 받은 challenge
        content: 보유 content (None이면 풀 수 없음)
        guess: content가 없을 때 무작위 digest로 추측
        rng: guessing용 rng

    Returns:
        Response (m개 answer)
    """
    params = challenge.params
    generator = as_rng(rng) if guess else None
    answers = []
    for puzzle in challenge.puzzles:
        if content is None:
            answers.append(generator.bytes(params.key_size) if generator is not None else unsolved_digest(params))
            continue
        try:
            solution, _ = solve(puzzle, content)
            answers.append(solution.answer)
        except (MalformedPuzzleError, DomainError) as e:
            logger.warning(f"puzzle 풀이 실패: {e}")
            answers.append(unsolved_digest(params))
    return Response(challenge_id=challenge.challenge_id, answers=tuple(answers))


# ----------------------------------------------------------------------
# asyncio service / client
# ----------------------------------------------------------------------
class VerifierService:
    """
    asyncio TCP verifier

    round_size 명이 연결되면 한꺼번에 challenge를 발급합니다 (동시성).
    """

    def __init__(
        self,
        verifier: Verifier,
        host: str = DEFAULT_HOST,
        port: int = DEFAULT_PORT,
        round_size: int = 1,
    ):
        if round_size < 1:
            raise DomainError(f"round_size는 1 이상이어야 합니다: {round_size}")
        self.verifier = verifier
        self.host = host
        self.port = port
        self.round_size = round_size
        self.verdicts: List[Verdict] = []
        self._waiting: List[asyncio.Future] = []
        self._server: Optional[asyncio.AbstractServer] = None
        self._verdict_ready: Optional[asyncio.Event] = None

    async def start(self) -> Tuple[str, int]:
        """서버 시작, 실제 (host, port) 반환 (port=0이면 임의 port)"""
        try:
            self._server = await asyncio.start_server(self._handle, self.host, self.port)
            self._verdict_ready = asyncio.Event()
        except OSError as e:
            raise TransportError(f"{self.host}:{self.port} listen 실패: {e}") from e
        host, port = self._server.sockets[0].getsockname()[:2]
        self.port = port
        logger.info(f"✓ Verifier listening on {host}:{port} (round_size={self.round_size})")
        return host, port

    async def wait_for_verdicts(self, count: int) -> List[Verdict]:
        """verdict가 count개 쌓일 때까지 대기"""
        if self._verdict_ready is None:
            raise ProtocolError("서버가 시작되지 않았습니다")
        while len(self.verdicts) < count:
            await self._verdict_ready.wait()
            self._verdict_ready.clear()
        return list(self.verdicts)

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    def _release_round(self) -> None:
        # 모든 challenge를 먼저 만든 뒤 한꺼번에 전달
        waiting, self._waiting = self._waiting, []
        challenges = [self.verifier.issue_challenge() for _ in waiting]
        for future, challenge in zip(waiting, challenges):
            if not future.done():
                future.set_result(challenge)

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")
        future = asyncio.get_running_loop().create_future()
        self._waiting.append(future)
        if len(self._waiting) >= self.round_size:
            self._release_round()
        try:
            challenge = await future
            await write_frame(writer, MSG_CHALLENGE, challenge.to_bytes())
            payload = await expect_frame(reader, MSG_RESPONSE)
            arrival = self.verifier.clock()
            verdict = self.verifier.adjudicate(Response.from_bytes(payload), arrival)
            self.verdicts.append(verdict)
            if self._verdict_ready is not None:
                self._verdict_ready.set()
            await write_frame(writer, MSG_VERDICT, verdict.to_bytes())
        except (ProtocolError, ConnectionError) as e:
            logger.warning(f"{peer}: {e}")
        finally:
            if future in self._waiting:
                self._waiting.remove(future)
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass


class ProverClient:
    """
    asyncio prover

    delay: response 전송 전 인위적 지연 (초)
    guess: content 없이 무작위 digest로 응답
    """

    def __init__(
        self,
        host: str = DEFAULT_HOST,
        port: int = DEFAULT_PORT,
        content: Optional[Content] = None,
        delay: float = 0.0,
        guess: bool = False,
        rng: RngLike = None,
    ):
        self.host = host
        self.port = port
        self.content = content
        self.delay = delay
        self.guess = guess
        self.rng = as_rng(rng)

    async def run_once(self) -> Verdict:
        """
        연결 → challenge 수신 → 풀이 → response 전송 → verdict 수신

        Raises:
            TransportError: 연결 실패
            ProtocolError: 잘못된 message
        """
        try:
            reader, writer = await asyncio.open_connection(self.host, self.port)
        except OSError as e:
            raise TransportError(f"{self.host}:{self.port} 연결 실패: {e}") from e
        try:
            challenge = Challenge.from_bytes(await expect_frame(reader, MSG_CHALLENGE))
            response = await asyncio.to_thread(respond, challenge, self.content, self.guess, self.rng)
            if self.delay > 0:
                await asyncio.sleep(self.delay)
            await write_frame(writer, MSG_RESPONSE, response.to_bytes())
            verdict = Verdict.from_bytes(await expect_frame(reader, MSG_VERDICT))
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass
        logger.info(f"verdict 수신: accepted={verdict.accepted}, on_time={verdict.on_time}")
        return verdict

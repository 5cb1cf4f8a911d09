"""
FR-07: Protocol 테스트

주요 검증 항목:
- Challenge / Response / Verdict 직렬화 크기와 복원
- 시간 판정 (verifier clock), 중복 / 알 수 없는 challenge id
- content 없는 prover의 추측은 거부
- loopback TCP: honest 수락, 지연 거부, round 동시 발급
"""

import asyncio
import math
import struct
import sys
from pathlib import Path

import pytest

# 프로젝트 루트를 path에 추가
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.bench import ThroughputBenchmark
from src.constants import MSG_CHALLENGE, MSG_RESPONSE
from src.errors import ContentSizeError, DomainError, ProtocolError, TransportError
from src.protocol import (
    Challenge,
    ProverClient,
    Response,
    Verdict,
    Verifier,
    VerifierService,
    encode_frame,
    expect_frame,
    read_frame,
    respond,
    unsolved_digest,
    write_frame,
)
from src.puzzle import Content, PuzzleParams


class FakeClock:
    """테스트용 verifier clock"""

    def __init__(self):
        self.now = 100.0

    def __call__(self) -> float:
        return self.now


@pytest.fixture
def params():
    return PuzzleParams(N=4096, n=32, L=20, m=3, theta=1000)


@pytest.fixture
def content(params):
    return Content.random(params.N, 21)


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def verifier(content, params, clock):
    return Verifier(content, params, grace_fraction=0.1, rng=0, clock=clock)


def _feed(data: bytes) -> asyncio.StreamReader:
    reader = asyncio.StreamReader()
    reader.feed_data(data)
    reader.feed_eof()
    return reader


class TestFraming:
    def test_encode(self):
        frame = encode_frame(MSG_RESPONSE, b"abc")
        assert frame == struct.pack(">IB", 4, MSG_RESPONSE) + b"abc"

    def test_unknown_type(self):
        with pytest.raises(ProtocolError):
            encode_frame(0x7F, b"")

    def test_read_roundtrip(self):
        async def scenario():
            return await read_frame(_feed(encode_frame(MSG_CHALLENGE, b"payload")))

        assert asyncio.run(scenario()) == (MSG_CHALLENGE, b"payload")

    def test_truncated_frame(self):
        async def scenario():
            await read_frame(_feed(encode_frame(MSG_CHALLENGE, b"payload")[:-2]))

        with pytest.raises(TransportError):
            asyncio.run(scenario())

    def test_oversized_frame(self):
        async def scenario():
            await read_frame(_feed(struct.pack(">IB", 1000, MSG_CHALLENGE)), max_size=100)

        with pytest.raises(ProtocolError):
            asyncio.run(scenario())

    def test_unexpected_type(self):
        async def scenario():
            await expect_frame(_feed(encode_frame(MSG_RESPONSE, b"")), MSG_CHALLENGE)

        with pytest.raises(ProtocolError):
            asyncio.run(scenario())


class TestMessages:
    def test_challenge_size_and_roundtrip(self, verifier, params):
        challenge = verifier.issue_challenge()
        data = challenge.to_bytes()
        assert len(data) == Challenge.encoded_size(params) == 17 + 49 + 3 * 64
        restored = Challenge.from_bytes(data)
        assert restored.challenge_id == challenge.challenge_id
        assert restored.puzzles == challenge.puzzles
        assert restored.issued_at == pytest.approx(challenge.issued_at, abs=1e-6)

    def test_challenge_length_mismatch(self, verifier):
        data = verifier.issue_challenge().to_bytes()
        with pytest.raises(ProtocolError):
            Challenge.from_bytes(data[:-1])

    def test_response_roundtrip(self):
        response = Response(challenge_id=b"12345678", answers=(bytes(32), bytes(range(32))))
        data = response.to_bytes()
        assert len(data) == 1 + 8 + 4 + 2 + 64
        assert Response.from_bytes(data) == response
        with pytest.raises(ProtocolError):
            Response.from_bytes(data[:-1])

    def test_verdict_roundtrip(self):
        verdict = Verdict(challenge_id=b"abcdefgh", passed=(True, False), on_time=True, accepted=False)
        assert Verdict.from_bytes(verdict.to_bytes()) == verdict

    def test_challenge_id_size(self, params):
        with pytest.raises(DomainError):
            Challenge(challenge_id=b"short", params=params, puzzles=())


class TestAdjudication:
    def test_content_size_mismatch(self, params):
        with pytest.raises(ContentSizeError):
            Verifier(Content.random(100, 0), params)

    def test_deadline(self, verifier):
        assert verifier.deadline_seconds == pytest.approx(1.1)

    def test_honest_on_time(self, verifier, content, clock):
        challenge = verifier.issue_challenge()
        response = respond(challenge, content)
        clock.now += 0.5
        verdict = verifier.adjudicate(response)
        assert verdict.on_time and verdict.accepted
        assert verdict.passed == (True, True, True)

    def test_boundary_inclusive(self, verifier, content, clock):
        challenge = verifier.issue_challenge()
        verdict = verifier.adjudicate(respond(challenge, content), arrival=challenge.issued_at + 1.1)
        assert verdict.on_time

    def test_late(self, verifier, content, clock):
        challenge = verifier.issue_challenge()
        response = respond(challenge, content)
        clock.now += 1.2
        verdict = verifier.adjudicate(response)
        assert not verdict.on_time
        assert not verdict.accepted
        assert all(verdict.passed)

    def test_one_wrong_answer_rejects(self, verifier, content, params):
        challenge = verifier.issue_challenge()
        answers = list(respond(challenge, content).answers)
        answers[1] = unsolved_digest(params)
        verdict = verifier.adjudicate(Response(challenge.challenge_id, tuple(answers)))
        assert verdict.passed == (True, False, True)
        assert not verdict.accepted

    def test_short_response(self, verifier, content):
        challenge = verifier.issue_challenge()
        answers = respond(challenge, content).answers[:2]
        verdict = verifier.adjudicate(Response(challenge.challenge_id, answers))
        assert verdict.passed == (True, True, False)

    def test_unknown_id(self, verifier):
        with pytest.raises(ProtocolError):
            verifier.adjudicate(Response(b"00000000", (bytes(32),)))

    def test_duplicate_response_returns_first(self, verifier, content, clock):
        challenge = verifier.issue_challenge()
        first = verifier.adjudicate(Response(challenge.challenge_id, (bytes(32),) * 3))
        second = verifier.adjudicate(respond(challenge, content))
        assert second == first
        assert not second.accepted

    def test_unanswered_challenge_expires(self, verifier, content, clock):
        """retention(= deadline × 10 = 11s)이 지나면 만료 verdict, 다시 지나면 cache에서 삭제"""
        challenge = verifier.issue_challenge()
        assert verifier.pending_count == 1
        clock.now += 11.5
        assert verifier.prune() == 1
        assert verifier.pending_count == 0

        verdict = verifier.adjudicate(respond(challenge, content))
        assert not verdict.on_time and not verdict.accepted
        assert verdict.passed == (False, False, False)

        clock.now += 11.5
        verifier.prune()
        assert verifier.cached_verdicts == 0
        with pytest.raises(ProtocolError):
            verifier.adjudicate(respond(challenge, content))

    def test_late_within_retention_still_judged(self, verifier, content, clock):
        challenge = verifier.issue_challenge()
        clock.now += 5.0
        verdict = verifier.adjudicate(respond(challenge, content))
        assert all(verdict.passed) and not verdict.on_time

    def test_invalid_retention(self, content, params):
        with pytest.raises(DomainError):
            Verifier(content, params, retention_factor=0.5)

    def test_duplicate_challenge_id(self, verifier):
        verifier.issue_challenge(b"AAAAAAAA")
        with pytest.raises(ProtocolError):
            verifier.issue_challenge(b"AAAAAAAA")


class TestContentlessProver:
    def test_sentinel_rejected(self, verifier):
        challenge = verifier.issue_challenge()
        response = respond(challenge, None)
        assert all(answer == bytes(32) for answer in response.answers)
        assert not verifier.adjudicate(response).accepted

    def test_guessing_never_accepted(self, content):
        """10^3 challenge 모두 거부"""
        params = PuzzleParams(N=4096, n=8, L=5, m=1)
        verifier = Verifier(content, params, rng=1)
        accepted = 0
        for i in range(1000):
            challenge = verifier.issue_challenge()
            response = respond(challenge, None, guess=True, rng=i)
            accepted += verifier.adjudicate(response).accepted
        assert accepted == 0


class TestLoopback:
    """127.0.0.1, port=0"""

    @pytest.fixture(scope="class")
    def loop_params(self):
        """θ: 측정한 rate로 L·m query의 worst-case 시간 × 50, [100, 500] ms로 제한"""
        base = PuzzleParams(N=4096, n=32, L=20, m=2)
        report = ThroughputBenchmark(base, duration=1.0, warmup=0.0, rng=0).run()
        per_query = 1.0 / report.hash_calls_per_sec + base.n / report.prf_calls_per_sec
        theta_ms = math.ceil(1000 * 50 * base.L * base.m * per_query)
        return PuzzleParams(N=4096, n=32, L=20, m=2, theta=min(max(theta_ms, 100), 500))

    @pytest.fixture
    def loop_content(self, loop_params):
        return Content.random(loop_params.N, 33)

    def test_honest_accepted_and_delayed_rejected(self, loop_params, loop_content):
        async def scenario():
            service = VerifierService(Verifier(loop_content, loop_params, rng=2), host="127.0.0.1", port=0)
            host, port = await service.start()
            try:
                honest = await ProverClient(host, port, content=loop_content).run_once()
                delayed = await ProverClient(host, port, content=loop_content, delay=1.0).run_once()
                guesser = await ProverClient(host, port, content=None, guess=True, rng=5).run_once()
            finally:
                await service.stop()
            return honest, delayed, guesser, service.verdicts

        honest, delayed, guesser, verdicts = asyncio.run(scenario())
        assert honest.accepted
        assert not delayed.on_time and not delayed.accepted
        assert all(delayed.passed)
        assert not guesser.accepted
        assert len(verdicts) == 3

    def test_round_issued_simultaneously(self, loop_params, loop_content):
        """round_size=2: 두 challenge의 발급 시각 차이 ≤ 50ms"""

        async def fetch_challenge(host, port):
            reader, writer = await asyncio.open_connection(host, port)
            challenge = Challenge.from_bytes(await expect_frame(reader, MSG_CHALLENGE))
            return challenge, reader, writer

        async def scenario():
            service = VerifierService(Verifier(loop_content, loop_params, rng=3), host="127.0.0.1", port=0, round_size=2)
            host, port = await service.start()
            try:
                first = asyncio.create_task(fetch_challenge(host, port))
                await asyncio.sleep(0.2)
                second = asyncio.create_task(fetch_challenge(host, port))
                results = await asyncio.gather(first, second)
                for challenge, reader, writer in results:
                    response = respond(challenge, loop_content)
                    await write_frame(writer, MSG_RESPONSE, response.to_bytes())
                verdicts = await service.wait_for_verdicts(2)
                for _, _, writer in results:
                    writer.close()
            finally:
                await service.stop()
            return [challenge for challenge, _, _ in results], verdicts

        challenges, verdicts = asyncio.run(scenario())
        assert abs(challenges[0].issued_at - challenges[1].issued_at) <= 0.05
        assert all(verdict.accepted for verdict in verdicts)

    def test_connection_refused(self):
        async def scenario():
            service = VerifierService(
                Verifier(Content.random(64, 0), PuzzleParams(N=64, n=4, L=2)), host="127.0.0.1", port=0
            )
            _, port = await service.start()
            await service.stop()
            await ProverClient("127.0.0.1", port).run_once()

        with pytest.raises(TransportError):
            asyncio.run(scenario())

    def test_invalid_round_size(self, loop_params, loop_content):
        with pytest.raises(DomainError):
            VerifierService(Verifier(loop_content, loop_params), round_size=0)

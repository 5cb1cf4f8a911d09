#!/usr/bin/env python3
"""
Bandwidth Puzzle - 통합 CLI

Puzzle 생성/풀이/검증, verifier/prover daemon, adversary 시뮬레이션,
lower bound 평가, parameter 검사, throughput 측정을 하나의 명령으로 제공합니다.

Usage:
    python main.py [global options] <command> [command options]

Commands:
    gen              content 파일로 challenge + secret 파일 생성
    solve            challenge를 풀어 response 파일 생성
    verify           response를 secret과 비교
    verifier-daemon  TCP verifier 실행
    prover-daemon    TCP prover 실행
    simulate         adversary sweep (CSV + 요약)
    bounds           lower bound term 분해 / CSV
    check-params     parameter 조건 검사
    bench            hash / index 생성 속도 측정 및 실현 가능성 판정
"""

import argparse
import asyncio
import struct
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import yaml

# 프로젝트 루트를 path에 추가
sys.path.insert(0, str(Path(__file__).parent))

from src import adversary, bench, bounds, validation
from src.config import load_config, params_from_config, parse_params_flag, read_yaml
from src.constants import (
    EXIT_IO,
    EXIT_OK,
    EXIT_PROTOCOL,
    EXIT_REJECTED,
    EXIT_SIZE_MISMATCH,
    EXIT_USAGE,
)
from src.errors import ContentSizeError, DomainError, ProtocolError, PuzzleError, TransportError
from src.logger import configure_logging, setup_logger
from src.oracle import OmegaConfig
from src.protocol import Challenge, ProverClient, Response, Verifier, VerifierService, respond
from src.puzzle import (
    PARAMS_HEADER_SIZE,
    Content,
    PuzzleParams,
    PuzzleSecret,
    Solution,
    generate_challenge_puzzles,
    verify,
)
from src.reporter import (
    ResultReporter,
    bound_breakdown_text,
    format_table,
    parameter_report_text,
    write_csv,
    write_json,
)

logger = setup_logger("main")

_SECRET_COUNT = struct.Struct(">I")


# ----------------------------------------------------------------------
# helpers
# ----------------------------------------------------------------------
def encode_secrets(params: PuzzleParams, secrets: Sequence[PuzzleSecret]) -> bytes:
    """params header ‖ count(4) ‖ secret × count"""
    return params.to_bytes() + _SECRET_COUNT.pack(len(secrets)) + b"".join(s.to_bytes() for s in secrets)


def decode_secrets(data: bytes) -> List[PuzzleSecret]:
    params = PuzzleParams.from_bytes(data)
    offset = PARAMS_HEADER_SIZE
    (count,) = _SECRET_COUNT.unpack_from(data, offset)
    offset += _SECRET_COUNT.size
    size = 1 + 4 + params.key_size
    if len(data) != offset + count * size:
        raise DomainError(f"secret 파일 길이 불일치: {offset + count * size} 필요, {len(data)} bytes")
    return [PuzzleSecret.from_bytes(data[offset + i * size:offset + (i + 1) * size]) for i in range(count)]


def resolve_params(args: argparse.Namespace, config: Dict[str, Any]) -> PuzzleParams:
    return parse_params_flag(args.params) if args.params else params_from_config(config)


def load_content(path: str, params: PuzzleParams) -> Content:
    return Content.from_file(path, params.N)


def bound_inputs(args: argparse.Namespace, config: Dict[str, Any], A: int = 1) -> bounds.BoundInputs:
    params = resolve_params(args, config)
    analysis = config.get("analysis", {})
    sigma = args.sigma if args.sigma is not None else float(analysis.get("sigma", 1.0))
    return bounds.BoundInputs(
        N=params.N,
        n=params.n,
        L=params.L,
        m=params.m,
        q_H=args.q_H if args.q_H is not None else int(analysis.get("q_H", 4 * params.N // params.n)),
        V=args.V if args.V is not None else int(analysis.get("V", 60)),
        delta=args.delta if args.delta is not None else float(analysis.get("delta", 0.1)),
        sigma=sigma,
        epsilon=sigma,
        A=A,
    )


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------
def cmd_gen(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """challenge + secret 파일 생성 (seed가 같으면 byte-identical)"""
    params = resolve_params(args, config)
    seed = args.seed if args.seed is not None else config["simulation"]["seed"]
    rng = np.random.default_rng(seed)
    if args.create_content:
        Content.random(params.N, rng).to_file(args.content)
        logger.info(f"✓ 무작위 content 생성: {args.content} ({params.N:,} bits)")
    content = load_content(args.content, params)

    challenge_id = rng.bytes(8)
    generated = generate_challenge_puzzles(params, content, rng)
    challenge = Challenge(challenge_id=challenge_id, params=params, puzzles=tuple(p for p, _ in generated))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    challenge_path = out.with_suffix(".challenge")
    secret_path = out.with_suffix(".secret")
    challenge_path.write_bytes(challenge.to_bytes())
    secret_path.write_bytes(encode_secrets(params, [s for _, s in generated]))
    print(f"challenge: {challenge_path} ({len(challenge.to_bytes())} bytes, m={params.m})")
    print(f"secret   : {secret_path}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    challenge = Challenge.from_bytes(Path(args.challenge).read_bytes())
    content = load_content(args.content, challenge.params)
    response = respond(challenge, content)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_bytes(response.to_bytes())
    print(f"response: {args.out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    secrets = decode_secrets(Path(args.secret).read_bytes())
    response = Response.from_bytes(Path(args.response).read_bytes())
    passed = [
        position < len(response.answers) and verify(secret, Solution(response.answers[position]))
        for position, secret in enumerate(secrets)
    ]
    for position, flag in enumerate(passed):
        print(f"  puzzle {position}: {'PASS' if flag else 'FAIL'}")
    accepted = all(passed)
    print(f"verdict: {'ACCEPTED' if accepted else 'REJECTED'}")
    return EXIT_OK if accepted else EXIT_REJECTED


def cmd_verifier_daemon(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    params = resolve_params(args, config)
    protocol = config.get("protocol", {})
    content = load_content(args.content, params)
    verifier = Verifier(
        content,
        params,
        grace_fraction=args.grace if args.grace is not None else float(protocol.get("grace_fraction", 0.1)),
        rng=args.seed,
    )
    service = VerifierService(
        verifier,
        host=args.host or protocol.get("host"),
        port=args.port if args.port is not None else int(protocol.get("port")),
        round_size=args.round_size or int(protocol.get("round_size", 1)),
    )

    async def run() -> List:
        await service.start()
        try:
            if args.rounds:
                return await service.wait_for_verdicts(args.rounds)
            await service.serve_forever()
            return []
        finally:
            await service.stop()

    verdicts = asyncio.run(run())
    accepted = sum(v.accepted for v in verdicts)
    print(f"verdicts: {accepted}/{len(verdicts)} accepted")
    return EXIT_OK


def cmd_prover_daemon(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    protocol = config.get("protocol", {})
    content = None
    if args.content:
        content = load_content(args.content, resolve_params(args, config))
    client = ProverClient(
        host=args.host or protocol.get("host"),
        port=args.port if args.port is not None else int(protocol.get("port")),
        content=content,
        delay=args.delay,
        guess=args.guess,
        rng=args.seed,
    )
    all_accepted = True
    for _ in range(args.count):
        verdict = asyncio.run(client.run_once())
        print(f"verdict: accepted={verdict.accepted}, on_time={verdict.on_time}, passed={list(verdict.passed)}")
        all_accepted = all_accepted and verdict.accepted
    return EXIT_OK if all_accepted else EXIT_REJECTED


def simulation_settings(path: Optional[str], config: Dict[str, Any]) -> Dict[str, Any]:
    """flat YAML 시뮬레이션 설정 (없는 키는 기본 설정에서)"""
    puzzle, analysis, simulation = config["puzzle"], config["analysis"], config["simulation"]
    settings = {**puzzle, **analysis, **simulation}
    if path:
        flat = read_yaml(path)
        nested = [key for key, value in flat.items() if isinstance(value, dict)]
        if nested:
            raise DomainError(f"시뮬레이션 설정은 flat key: value 형식이어야 합니다: {nested}")
        settings.update(flat)
    return settings


def cmd_simulate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    settings = simulation_settings(args.sim_config, config)
    params = PuzzleParams(
        N=int(settings["N"]),
        n=int(settings["n"]),
        L=int(settings["L"]),
        m=int(settings.get("m", 1)),
        theta=int(settings.get("theta_ms", 3000)),
        kappa=int(settings.get("kappa", 256)),
    )
    seed = args.seed if args.seed is not None else settings.get("seed")
    A_values = [int(a) for a in settings.get("A_values", [1])]
    base = adversary.ExperimentConfig(
        params=params,
        A=A_values[0],
        sigma=float(settings.get("sigma", 1.0)),
        omega=OmegaConfig(V=int(settings["V"]), q_H=int(settings["q_H"]), L=params.L),
        trials=int(settings.get("trials", 1)),
        seed=seed,
    )
    content = Content.random(params.N, seed)
    rows = adversary.sweep_adversaries(base, A_values, content, delta=float(settings.get("delta", 0.1)))

    print(format_table(rows, ["A", "P", "strategy_bits", "formula_bits", "bound_bits", "ratio", "success_rate", "status"]))
    if args.csv:
        write_csv("sweep", rows, Path(args.csv))
    if args.report:
        inputs = adversary.bound_inputs_for(base, float(settings.get("delta", 0.1)))
        ResultReporter(Path(config["output"]["directory"])).generate_sweep_report(
            rows, inputs, report=bounds.check_parameters(inputs)
        )
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    A_values = args.A or [1]
    inputs = bound_inputs(args, config, A=A_values[0])

    print(bound_breakdown_text(bounds.single_bound(inputs), "single_bound"))
    print()
    print(bound_breakdown_text(bounds.multi_bound(inputs), f"multi_bound A={inputs.A}"))
    print()
    print(parameter_report_text(bounds.check_parameters(inputs)))
    print()

    rows = bounds.bound_rows(inputs, A_values)
    print(format_table(rows))
    if args.csv:
        write_csv("bounds", rows, Path(args.csv))

    if args.large_scale:
        for N, scale_rows in bounds.large_scale_sweep().items():
            print(f"\n[N = {N:.0e}]")
            print(format_table(scale_rows))

    if args.validate:
        checks = validation.run_validation(seed=args.seed if args.seed is not None else 0)
        print()
        print(format_table([{**c.__dict__, "rel_error": c.rel_error} for c in checks]))
        if not all(c.passed for c in checks):
            return EXIT_REJECTED
    return EXIT_OK


def cmd_check_params(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    inputs = bound_inputs(args, config, A=args.A[0] if args.A else 1)
    report = bounds.check_parameters(inputs)
    print(parameter_report_text(report))
    if args.json:
        write_json(report.to_dict(), Path(args.json))
    return EXIT_OK if report.all_passed else EXIT_REJECTED


def cmd_bench(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    params = resolve_params(args, config)
    settings = config.get("bench", {})
    duration = args.duration if args.duration is not None else float(settings.get("duration", 3.0))
    warmup = args.warmup if args.warmup is not None else float(settings.get("warmup", 1.0))
    report = bench.ThroughputBenchmark(params, duration, warmup, rng=args.seed).run()

    print(f"hash_H      : {report.hash_calls_per_sec:,.0f} calls/s (n={params.n} bits)")
    print(f"f2 indices  : {report.prf_calls_per_sec:,.0f} indices/s")
    print(f"derived q_H : {report.derived_q_H:,.0f} (θ={report.theta_seconds}s)")

    feasibility = [
        bench.assess_feasibility(
            report.hash_calls_per_sec, report.prf_calls_per_sec, params.N, params.n, params.L, params.theta_seconds
        ),
        bench.reference_feasibility("pc3000", params.N, params.n, params.L, params.theta_seconds),
    ]
    for result in feasibility:
        print(f"\n[{result.source}] q_H={result.q_H:,.0f}, Lm={result.Lm}, "
              f"평균 풀이 {result.expected_solve_seconds:.2f}s, 최악 {result.worst_solve_seconds:.2f}s")
        for check in result.checks:
            print(f"  {'PASS' if check.passed else 'FAIL'}  {check.name:<12} {check.requirement}")
    if args.json:
        write_json({"report": report.to_dict(), "feasibility": [f.to_dict() for f in feasibility]}, Path(args.json))
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def _add_bound_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--A", type=int, nargs="+", help="adversary 수 (여러 값 가능)")
    parser.add_argument("--q-H", dest="q_H", type=int, help="adversary 당 hash query 예산")
    parser.add_argument("--V", type=int, help="informedness slack")
    parser.add_argument("--delta", type=float, help="deviation δ")
    parser.add_argument("--sigma", type=float, help="목표 성공 확률 σ")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Bandwidth Puzzle - 생성, 검증, 시뮬레이션, bound 분석",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예제:
  python main.py --params 100000,100,50,1 gen --content c.bin --create-content --out out/p
  python main.py solve --content c.bin --challenge out/p.challenge --out out/p.response
  python main.py verify --secret out/p.secret --response out/p.response
  python main.py --csv results/sweep.csv simulate config/sim_desk.yaml
  python main.py --params 10000000,10000,200,10 bounds --A 1000 --q-H 4000 --validate
  python main.py bench --duration 2
        """,
    )
    parser.add_argument("--seed", type=int, help="난수 seed (bench 제외 모든 명령 결정적)")
    parser.add_argument("--params", help="N,n,L[,m,theta_ms,kappa]")
    parser.add_argument("--csv", help="CSV 출력 경로")
    parser.add_argument("--config", help="기본 설정 위에 병합할 YAML")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--log-file", help="로그 파일 경로")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="challenge + secret 파일 생성")
    p.add_argument("--content", required=True, help="packed-bit content 파일")
    p.add_argument("--create-content", action="store_true", help="seed로 무작위 content 파일을 먼저 생성")
    p.add_argument("--out", required=True, help="출력 prefix (.challenge / .secret)")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("solve", help="challenge 풀이")
    p.add_argument("--content", required=True)
    p.add_argument("--challenge", required=True)
    p.add_argument("--out", required=True, help="response 파일")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify", help="response 검증")
    p.add_argument("--secret", required=True)
    p.add_argument("--response", required=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("verifier-daemon", help="TCP verifier")
    p.add_argument("--content", required=True)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--grace", type=float, help="grace fraction (θ 대비)")
    p.add_argument("--round-size", type=int, help="동시에 challenge 할 prover 수")
    p.add_argument("--rounds", type=int, default=0, help="이 수만큼 verdict 후 종료 (0 = 계속)")
    p.set_defaults(handler=cmd_verifier_daemon)

    p = sub.add_parser("prover-daemon", help="TCP prover")
    p.add_argument("--content", help="content 파일 (없으면 풀 수 없음)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--delay", type=float, default=0.0, help="response 전 인위적 지연 (초)")
    p.add_argument("--guess", action="store_true", help="content 없이 무작위 digest로 응답")
    p.add_argument("--count", type=int, default=1, help="응답할 challenge 수")
    p.set_defaults(handler=cmd_prover_daemon)

    p = sub.add_parser("simulate", help="simple strategy sweep")
    p.add_argument("sim_config", nargs="?", help="flat YAML 시뮬레이션 설정")
    p.add_argument("--report", action="store_true", help="Markdown 보고서 생성")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("bounds", help="lower bound 평가")
    _add_bound_options(p)
    p.add_argument("--validate", action="store_true", help="독립 oracle과 closed form 비교")
    p.add_argument("--large-scale", action="store_true", help="N=10^7, 10^8 설정 해석적 평가")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("check-params", help="parameter 조건 검사")
    _add_bound_options(p)
    p.add_argument("--json", help="JSON 출력 경로")
    p.set_defaults(handler=cmd_check_params)

    p = sub.add_parser("bench", help="throughput 측정")
    p.add_argument("--duration", type=float, help="측정 시간 (초, ≥ 1)")
    p.add_argument("--warmup", type=float, help="warmup (초)")
    p.add_argument("--json", help="JSON 출력 경로")
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """메인 함수 (종료 코드 반환)"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        logging_config = config.get("logging", {})
        level = args.log_level or logging_config.get("level", "INFO")
        configure_logging(level, args.log_file or logging_config.get("file"))
        return args.handler(args, config)
    except (ProtocolError, TransportError) as e:
        logger.error(f"프로토콜 오류: {e}")
        return EXIT_PROTOCOL
    except ContentSizeError as e:
        logger.error(f"크기 불일치: {e}")
        return EXIT_SIZE_MISMATCH
    except (DomainError, PuzzleError, yaml.YAMLError) as e:
        logger.error(f"잘못된 입력: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O 오류: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""
CLI (main.py) 테스트

주요 검증 항목:
- gen → solve → verify 왕복, 같은 seed → byte-identical 출력
- 종료 코드 (거부 1, 입력 오류 2, 크기 불일치 3, I/O 4)
- bounds / check-params / simulate 출력
"""

import json
import logging
import sys
from pathlib import Path

import pytest

# 프로젝트 루트를 path에 추가
sys.path.insert(0, str(Path(__file__).parent.parent))

from main import decode_secrets, encode_secrets, main
from src.config import load_config, parse_params_flag
from src.errors import DomainError
from src.logger import configure_logging, project_loggers, set_level, setup_logger
from src.puzzle import PuzzleParams, PuzzleSecret
from src.reporter import read_csv

PARAMS = "4096,32,20,3"


def gen(tmp_path, name="p", seed=7, params=PARAMS):
    content = tmp_path / "content.bin"
    args = ["--seed", str(seed), "--params", params, "gen", "--content", str(content), "--out", str(tmp_path / name)]
    if not content.exists():
        args.append("--create-content")
    return main(args), content


class TestRoundTrip:
    def test_gen_solve_verify(self, tmp_path):
        code, content = gen(tmp_path)
        assert code == 0
        assert main(
            ["solve", "--content", str(content), "--challenge", str(tmp_path / "p.challenge"),
             "--out", str(tmp_path / "p.response")]
        ) == 0
        assert main(["verify", "--secret", str(tmp_path / "p.secret"), "--response", str(tmp_path / "p.response")]) == 0

    def test_same_seed_identical_bytes(self, tmp_path):
        gen(tmp_path, "a", seed=3)
        gen(tmp_path, "b", seed=3)
        assert (tmp_path / "a.challenge").read_bytes() == (tmp_path / "b.challenge").read_bytes()
        assert (tmp_path / "a.secret").read_bytes() == (tmp_path / "b.secret").read_bytes()

    def test_wrong_response_rejected(self, tmp_path):
        gen(tmp_path, "a", seed=1)
        gen(tmp_path, "b", seed=2)
        content = tmp_path / "content.bin"
        main(["solve", "--content", str(content), "--challenge", str(tmp_path / "b.challenge"),
              "--out", str(tmp_path / "b.response")])
        assert main(["verify", "--secret", str(tmp_path / "a.secret"), "--response", str(tmp_path / "b.response")]) == 1

    def test_content_size_mismatch(self, tmp_path):
        gen(tmp_path)
        small = tmp_path / "small.bin"
        small.write_bytes(bytes(10))
        code = main(["solve", "--content", str(small), "--challenge", str(tmp_path / "p.challenge"),
                     "--out", str(tmp_path / "p.response")])
        assert code == 3

    def test_missing_file(self, tmp_path):
        code = main(["verify", "--secret", str(tmp_path / "none.secret"), "--response", str(tmp_path / "none.response")])
        assert code == 4

    def test_bad_params(self, tmp_path):
        code, _ = gen(tmp_path, params="4096,32")
        assert code == 2


class TestSecretsEncoding:
    def test_roundtrip(self):
        params = PuzzleParams(N=100, n=10, L=5, m=2)
        secrets = [PuzzleSecret(1, bytes(32)), PuzzleSecret(5, bytes(range(32)))]
        assert decode_secrets(encode_secrets(params, secrets)) == secrets

    def test_truncated(self):
        params = PuzzleParams(N=100, n=10, L=5, m=1)
        data = encode_secrets(params, [PuzzleSecret(1, bytes(32))])
        with pytest.raises(DomainError):
            decode_secrets(data[:-1])


class TestAnalysisCommands:
    def test_bounds_csv(self, tmp_path):
        path = tmp_path / "bounds.csv"
        code = main(["--params", "10000000,10000,200,10", "--csv", str(path),
                     "bounds", "--A", "1", "10", "100", "--q-H", "4000"])
        assert code == 0
        assert path.read_text(encoding="utf-8").startswith("# bounds v1")
        rows = read_csv(path)
        assert [row["A"] for row in rows] == ["1", "10", "100"]
        assert all(float(row["bound_bits"]) > 0 for row in rows)

    def test_check_params_pass_and_fail(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["--params", "10000000,10000,200,10", "check-params", "--A", "1000",
                     "--q-H", "4000", "--json", str(out)]) == 0
        assert json.loads(out.read_text(encoding="utf-8"))["all_passed"] is True
        assert main(["--params", "100000,100,200,10", "check-params", "--q-H", "4000"]) == 1

    def test_check_params_huge_V(self):
        code = main(["--params", "10000000,10000,200,10", "check-params", "--A", "1000",
                     "--q-H", "4000", "--V", "1100"])
        assert code == 1

    def test_simulate_sigma_zero(self, tmp_path):
        sim = tmp_path / "sim.yaml"
        sim.write_text(
            "N: 2000\nn: 200\nL: 10\nm: 1\nV: 12\nq_H: 40\nsigma: 0.0\ntrials: 2\nseed: 1\nA_values: [1, 2]\n",
            encoding="utf-8",
        )
        out = tmp_path / "sweep.csv"
        assert main(["--csv", str(out), "simulate", str(sim)]) == 0
        rows = read_csv(out)
        assert [row["A"] for row in rows] == ["1", "2"]
        assert all(float(row["strategy_bits"]) == 0 for row in rows)

    def test_simulate_report_has_conditions(self, tmp_path):
        sim = tmp_path / "sim.yaml"
        sim.write_text(
            "N: 2000\nn: 200\nL: 10\nm: 1\nV: 12\nq_H: 40\nsigma: 1.0\ntrials: 1\nseed: 1\nA_values: [1]\n",
            encoding="utf-8",
        )
        override = tmp_path / "override.yaml"
        override.write_text(f"output:\n  directory: '{(tmp_path / 'results').as_posix()}'\n", encoding="utf-8")
        assert main(["--config", str(override), "simulate", str(sim), "--report"]) == 0
        md = (tmp_path / "results" / "sweep_report.md").read_text(encoding="utf-8")
        assert "## Parameter Conditions" in md
        assert "range_N" in md

    def test_simulate_nested_config_rejected(self, tmp_path):
        sim = tmp_path / "nested.yaml"
        sim.write_text("puzzle:\n  N: 2000\n", encoding="utf-8")
        assert main(["simulate", str(sim)]) == 2


class TestConfig:
    def test_defaults(self):
        config = load_config()
        assert config["puzzle"]["N"] == 100000
        assert config["protocol"]["grace_fraction"] == 0.1

    def test_override_merges(self, tmp_path):
        override = tmp_path / "override.yaml"
        override.write_text("puzzle:\n  L: 50\n", encoding="utf-8")
        config = load_config(override)
        assert config["puzzle"]["L"] == 50
        assert config["puzzle"]["N"] == 100000

    def test_non_mapping_rejected(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(DomainError):
            load_config(bad)

    def test_parse_params_flag(self):
        assert parse_params_flag("100000,100,50") == PuzzleParams(N=100000, n=100, L=50)
        assert parse_params_flag("100000,100,50,2,2500,384").kappa == 384
        with pytest.raises(DomainError):
            parse_params_flag("1,2,x")


class TestLogging:
    def test_configure_logging_file(self, tmp_path):
        log_path = tmp_path / "logs" / "run.log"
        demo = setup_logger("src.demo")
        try:
            configure_logging("DEBUG", str(log_path))
            demo.debug("디버그 메시지")
            assert demo.level == logging.DEBUG
        finally:
            for logger in project_loggers():
                for handler in [h for h in logger.handlers if isinstance(h, logging.FileHandler)]:
                    logger.removeHandler(handler)
                    handler.close()
            set_level("INFO")
        assert "디버그 메시지" in log_path.read_text(encoding="utf-8")

"""
FR-09: Reporting 테스트
"""

import json
import math
import sys
from pathlib import Path

import pytest

# 프로젝트 루트를 path에 추가
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.bounds import BoundInputs, BoundResult, ConditionCheck, ParameterReport
from src.reporter import (
    ResultReporter,
    bound_breakdown_text,
    format_table,
    parameter_report_text,
    read_csv,
    write_csv,
    write_json,
)


@pytest.fixture
def sweep_rows():
    return [
        {"A": 1, "P": 10, "strategy_bits": 1e5, "formula_bits": 1e5, "bound_bits": 0.0,
         "dominant_bits": 8e4, "ratio": 1.25, "success_rate": 1.0, "status": "vacuous_bound"},
        {"A": 2, "P": 20, "strategy_bits": float("nan"), "formula_bits": 2e5, "bound_bits": 0.0,
         "dominant_bits": 1.6e5, "ratio": 1.25, "success_rate": float("nan"), "status": "infeasible"},
    ]


class TestFormatTable:
    def test_empty(self):
        assert format_table([]) == "(no rows)"

    def test_alignment_and_values(self):
        text = format_table([{"name": "x", "ok": True, "value": float("nan")}, {"name": "yy", "ok": False, "value": 1e9}])
        lines = text.splitlines()
        assert len(lines) == 4
        assert "PASS" in lines[2] and "-" in lines[2]
        assert "FAIL" in lines[3] and "1.0000e+09" in lines[3]
        assert len({len(line) for line in lines}) == 1


class TestExport:
    def test_csv_schema_line(self, tmp_path, sweep_rows):
        path = write_csv("sweep", sweep_rows, tmp_path / "out" / "sweep.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "# sweep v1"
        rows = read_csv(path)
        assert [row["status"] for row in rows] == ["vacuous_bound", "infeasible"]

    def test_unknown_schema(self, tmp_path):
        with pytest.raises(KeyError):
            write_csv("nope", [], tmp_path / "x.csv")

    def test_json(self, tmp_path):
        path = write_json({"value": 1.5, "path": Path("a")}, tmp_path / "data.json")
        assert json.loads(path.read_text(encoding="utf-8")) == {"value": 1.5, "path": "a"}


class TestText:
    def test_bound_breakdown_vacuous(self):
        result = BoundResult(dominant_term=10.0, penalty_terms=[("tail", 15.0)], total=0.0, raw=-5.0)
        text = bound_breakdown_text(result, "demo")
        assert text.startswith("[demo]")
        assert "tail" in text
        assert "vacuous" in text

    def test_bound_breakdown_positive(self):
        result = BoundResult(dominant_term=10.0, penalty_terms=[("tail", 1.0)], total=9.0, raw=9.0)
        assert "vacuous" not in bound_breakdown_text(result)

    def test_parameter_report(self):
        report = ParameterReport(
            conditions=[ConditionCheck("cond1", True, 0.01, "≤ 0.1")],
            ranges=[ConditionCheck("range_N", False, 5e6, "N ≥ 1e7")],
        )
        text = parameter_report_text(report)
        assert "PASS  cond1" in text
        assert "FAIL  range_N" in text
        assert text.splitlines()[-1].endswith("range_N")


class TestResultReporter:
    def test_sweep_report(self, tmp_path, sweep_rows):
        reporter = ResultReporter(tmp_path / "results")
        inputs = BoundInputs(N=100_000, n=100, L=200, m=10, q_H=4000)
        report = ParameterReport(conditions=[ConditionCheck("cond1", False, math.inf, "≤ 0.1")], ranges=[])
        path = reporter.generate_sweep_report(sweep_rows, inputs, report)
        md = path.read_text(encoding="utf-8")
        assert path.name == "sweep_report.md"
        assert md.startswith("# Simple Strategy vs Lower Bound")
        assert "| 2 | 20 |" in md
        assert "**FAIL**" in md
        assert "q_H·n/N = 4.00" in md

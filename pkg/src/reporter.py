"""
FR-09: Reporting Module

Bound 분석, 시뮬레이션 sweep, parameter 검사 결과를 출력합니다.

주요 기능:
- 콘솔용 정렬 텍스트 테이블
- 버전 주석이 붙은 CSV (csv.DictWriter)
- JSON 요약
- Markdown 보고서 (sweep 테이블 + term 분해 + 조건 검사)
"""

import csv
import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .bounds import BoundInputs, BoundResult, ParameterReport, penalty_fraction
from .constants import CSV_SCHEMAS
from .logger import setup_logger

logger = setup_logger(__name__)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "PASS" if value else "FAIL"
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        if math.isinf(value):
            return "inf"
        if value != 0 and (abs(value) >= 1e7 or abs(value) < 1e-3):
            return f"{value:.4e}"
        return f"{value:,.4f}" if abs(value) < 100 else f"{value:,.1f}"
    return str(value)


def format_table(rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """dict 행 목록을 열 정렬된 텍스트 테이블로"""
    if not rows:
        return "(no rows)"
    columns = list(columns or rows[0].keys())
    cells = [[_format_value(row.get(col)) for col in columns] for row in rows]
    widths = [max(len(col), *(len(r[i]) for r in cells)) for i, col in enumerate(columns)]
    lines = ["  ".join(col.rjust(w) for col, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in cells)
    return "\n".join(lines)


def write_csv(schema: str, rows: Sequence[Dict[str, Any]], path: Path) -> Path:
    """
    CSV_SCHEMAS[schema] 컬럼으로 저장, 첫 줄은 '# <schema> <version>'

    Args:
        schema: CSV_SCHEMAS 키 ('sweep', 'bounds', ...)
        rows: 행 목록
        path: 저장 경로
    """
    version, columns = CSV_SCHEMAS[schema]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# {schema} {version}\n")
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"✓ CSV 저장 ({schema} {version}): {path}")
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    """write_csv로 저장한 파일 읽기 (버전 주석 줄 건너뜀)"""
    with open(path, "r", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False, default=str)
    logger.info(f"✓ JSON 저장: {path}")
    return path


def bound_breakdown_text(result: BoundResult, title: str = "multi_bound") -> str:
    """dominant term, penalty term, raw / total 출력"""
    lines = [f"[{title}]"]
    lines.append(f"  dominant term     : {_format_value(result.dominant_term)}")
    for name, value in result.penalty_terms:
        lines.append(f"  - {name:<16}: {_format_value(value)}")
    lines.append(f"  raw               : {_format_value(result.raw)}")
    lines.append(f"  total (≥ 0)       : {_format_value(result.total)}")
    lines.append(f"  penalty/dominant  : {_format_value(penalty_fraction(result))}")
    if result.vacuous:
        lines.append("  ※ vacuous: penalty가 dominant term 이상 (total = 0)")
    return "\n".join(lines)


def parameter_report_text(report: ParameterReport) -> str:
    lines = ["[조건 검사]"]
    for check in report.conditions + report.ranges:
        status = "PASS" if check.passed else "FAIL"
        lines.append(f"  {status}  {check.name:<20} {check.requirement}  (value={_format_value(float(check.value))})")
    lines.append(f"  → {'모두 PASS' if report.all_passed else '실패: ' + ', '.join(report.failed())}")
    return "\n".join(lines)


class ResultReporter:
    """
    Markdown 보고서 생성

    results/<name>.md 로 저장합니다.
    """

    def __init__(self, results_dir: Path = Path("results")):
        """
        Args:
            results_dir: 결과 디렉토리 경로
        """
        self.results_dir = Path(results_dir)
        self.results_dir.mkdir(parents=True, exist_ok=True)

        logger.info(f"ResultReporter 초기화: {self.results_dir}")

    def sweep_table(self, rows: Sequence[Dict[str, Any]]) -> str:
        md = "| A | P | Strategy bits | Formula bits | Dominant bits | Bound bits | Formula/Dominant | Success | Status |\n"
        md += "|---|---|---------------|--------------|---------------|------------|------------------|---------|--------|\n"
        for row in rows:
            md += f"| {row['A']} | {row['P']} | {_format_value(float(row['strategy_bits']))} | "
            md += f"{_format_value(float(row['formula_bits']))} | {_format_value(float(row['dominant_bits']))} | "
            md += f"{_format_value(float(row['bound_bits']))} | {_format_value(float(row['ratio']))} | "
            md += f"{_format_value(float(row['success_rate']))} | {row['status']} |\n"
        return md

    def inputs_section(self, inputs: BoundInputs) -> str:
        md = "## Parameters\n\n"
        md += f"- N = {inputs.N:,}, n = {inputs.n:,}, L = {inputs.L}, m = {inputs.m}\n"
        md += f"- q_H = {inputs.q_H:,}, V = {inputs.V}, δ = {inputs.delta}, σ = {inputs.sigma}\n"
        md += f"- q_H·n/N = {inputs.q_H * inputs.n / inputs.N:.2f}\n\n"
        return md

    def generate_sweep_report(
        self,
        rows: Sequence[Dict[str, Any]],
        inputs: BoundInputs,
        report: Optional[ParameterReport] = None,
        name: str = "sweep_report",
    ) -> Path:
        """
        Sweep 결과 Markdown 보고서

        Returns:
            저장된 파일 경로
        """
        md = "# Simple Strategy vs Lower Bound\n\n"
        md += f"_Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}_\n\n"
        md += self.inputs_section(inputs)
        md += "## Sweep\n\n"
        md += self.sweep_table(rows)
        md += "\n_Formula/Dominant는 σNP(L+1)/(2q_H)와 bound의 dominant term의 비율입니다._\n"
        md += "_Bound bits = max(0, dominant − penalty). 작은 N에서는 penalty가 커서 0이 될 수 있습니다._\n\n"
        if report is not None:
            md += "## Parameter Conditions\n\n"
            md += "| Condition | Requirement | Result |\n|-----------|-------------|--------|\n"
            for check in report.conditions + report.ranges:
                md += f"| {check.name} | {check.requirement} | {'PASS' if check.passed else '**FAIL**'} |\n"
            md += "\n"

        path = self.results_dir / f"{name}.md"
        path.write_text(md, encoding="utf-8")
        logger.info(f"✓ Markdown 보고서 저장: {path}")
        return path

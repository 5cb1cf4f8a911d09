"""
Bandwidth Puzzle 시스템

P2P 네트워크에서 peer가 content를 실제로 받았는지 시간 제한 puzzle로 검증합니다.
- Puzzle 생성 / 풀이 / 검증 (Primary)
- Ω oracle 환경에서의 adversary 시뮬레이션
- 다운로드 bit 수 lower bound 분석
- Verifier / Prover TCP 프로토콜
"""

__version__ = "1.0.0"
__author__ = "Bandwidth Puzzle Team"

# 모듈 버전 정보
MODULES = {
    "primitives": "FR-01: Crypto Primitives (PRF f1/f2, Hash H/A)",
    "puzzle": "FR-02: Puzzle Core",
    "oracle": "FR-03: Oracle Environment (Ω)",
    "adversary": "FR-04: Adversary Simulation",
    "bounds": "FR-05: Bounds Analysis",
    "validation": "FR-06: Validation Oracles",
    "protocol": "FR-07: Verifier / Prover Protocol",
    "bench": "FR-08: Throughput Benchmark",
    "reporter": "FR-09: Reporting",
}

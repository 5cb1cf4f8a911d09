"""
상수 정의 모듈

프로젝트 전반에서 사용되는 상수들을 중앙에서 관리합니다.
"""

# 보안 파라미터 (bits)
DEFAULT_KAPPA = 256
MIN_KAPPA = 160
MAX_KAPPA = 512

# Hash / PRF domain-separation tag (1 byte)
TAG_HASH_H = 0x01
TAG_HASH_A = 0x02
TAG_PRF_F1 = 0x03
TAG_PRF_F2 = 0x04

# 직렬화 버전
SERIAL_VERSION = 1

# 분석 파라미터 기본값
DEFAULT_V = 60            # informedness slack (bits)
DEFAULT_DELTA = 0.1       # unique-index deviation fraction
DEFAULT_SIGMA = 1.0

# 프로토콜
MSG_CHALLENGE = 0x01
MSG_RESPONSE = 0x02
MSG_VERDICT = 0x03
MESSAGE_NAMES = {
    MSG_CHALLENGE: "CHALLENGE",
    MSG_RESPONSE: "RESPONSE",
    MSG_VERDICT: "VERDICT",
}
MAX_FRAME_SIZE = 16 * 1024 * 1024
DEFAULT_GRACE_FRACTION = 0.1   # θ의 10%
DEFAULT_RETENTION_FACTOR = 10.0  # 미응답 challenge / verdict 보관: deadline × 10
DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 9400

# 파라미터 조건 (practical parameter ranges, A ≤ 10^6 기준)
UNION_TAIL_LIMIT = 1e-12
DELTA_LIMIT = 0.1
COVERAGE_EXPONENT = 4.0          # q_H n / N ≥ 4  →  e^{-4} ≈ 0.018
MUCH_LARGER_FACTOR = 100         # "much larger / much smaller"
PARAMETER_RANGES = {
    "N_min": 1e7,
    "n_min": 1e4,
    "n_max": 1e6,
    "Lm_max": 1e6,
    "qH_max": 1e6,
}

# Bench 기준값: 초당 SHA-1 / AES 호출 수 (SHA-1 입력 10^4 bits, AES 128 bits)
REFERENCE_MACHINES = {
    "pc3000": {"cpu": "3.0GHz 64-bit", "sha1_per_sec": 202165, "aes_per_sec": 4059157},
    "pc2000": {"cpu": "2.0GHz", "sha1_per_sec": 71016, "aes_per_sec": 2605490},
    "pc850": {"cpu": "850MHz", "sha1_per_sec": 39151, "aes_per_sec": 1086667},
    "pc600": {"cpu": "600MHz", "sha1_per_sec": 29064, "aes_per_sec": 789624},
}
FEASIBILITY_MAX_QUERIES = 1e6
FEASIBILITY_COVERAGE = 2.0        # nLm ≥ 2N
FEASIBILITY_MIN_SOLVE_SECONDS = 1.0

# CSV 스키마 (버전, 컬럼)
CSV_SCHEMAS = {
    "oracle_stats": ("v1", ["adversary_id", "content_bits", "hash_queries", "puzzles_confirmed"]),
    "trials": ("v1", ["trial", "attempted", "solved_all", "bits_total", "hash_total"]),
    "sweep": ("v1", ["A", "P", "strategy_bits", "formula_bits", "bound_bits",
                     "dominant_bits", "ratio", "success_rate", "status"]),
    "bounds": ("v1", ["A", "P", "dominant_bits", "penalty_bits", "raw_bits", "bound_bits"]),
}

# CLI 종료 코드
EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_SIZE_MISMATCH = 3
EXIT_IO = 4
EXIT_PROTOCOL = 5

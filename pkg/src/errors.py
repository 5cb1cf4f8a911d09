"""
예외 정의 모듈

Ω의 refusal은 예외가 아니라 값(None)으로 표현합니다.
"""


class PuzzleError(Exception):
    """프로젝트 공통 base 예외"""


class DomainError(PuzzleError, ValueError):
    """범위를 벗어난 ordinal/index, 길이 불일치, 잘못된 파라미터"""


class MalformedPuzzleError(PuzzleError):
    """L개 index set 어디에서도 confirm이 나오지 않음 (hint 손상)"""


class InfeasibleStrategyError(PuzzleError, ValueError):
    """현재 규모(A)에서 실행할 수 없는 adversary 전략 설정"""


class ProtocolError(PuzzleError):
    """알 수 없는 challenge id, 잘못된 frame, 잘못된 message type"""


class TransportError(PuzzleError, ConnectionError):
    """재시도 가능한 네트워크 오류"""


class ContentSizeError(DomainError):
    """content 파일 / 객체 크기가 params.N과 맞지 않음"""

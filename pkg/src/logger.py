"""
로깅 유틸리티 모듈

Puzzle 생성, 시뮬레이션, 프로토콜 데몬의 로깅을 중앙에서 관리합니다.
모듈마다 `logger = setup_logger(__name__)` 로 콘솔 로거를 만들고,
CLI는 `configure_logging` 으로 레벨과 공용 로그 파일을 한 번에 적용합니다.
"""

import logging
import sys
from pathlib import Path
from typing import Iterator, Optional

ROOT_LOGGER_NAME = "bandwidth_puzzle"
PROJECT_PREFIXES = ("src", "main", ROOT_LOGGER_NAME)

_FORMATTER = logging.Formatter(
    fmt="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)


def _level(level: str) -> int:
    return getattr(logging, level.upper(), logging.INFO)


def setup_logger(
    name: str = ROOT_LOGGER_NAME,
    level: str = "INFO",
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    stdout 핸들러 하나를 가진 로거를 만듭니다.

    Args:
        name: 로거 이름 (보통 __name__)
        level: DEBUG, INFO, WARNING, ERROR
        log_file: 추가로 기록할 UTF-8 파일 (옵션)

    Returns:
        설정된 Logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(_level(level))
    logger.propagate = False

    # 재설정 시 핸들러 중복 방지
    logger.handlers = []

    console = logging.StreamHandler(sys.stdout)
    console.setFormatter(_FORMATTER)
    logger.addHandler(console)

    if log_file:
        _attach_file(logger, log_file)

    return logger


def _attach_file(logger: logging.Logger, log_file: str) -> None:
    for handler in [h for h in logger.handlers if isinstance(h, logging.FileHandler)]:
        logger.removeHandler(handler)
        handler.close()
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(log_file, encoding="utf-8")
    handler.setFormatter(_FORMATTER)
    logger.addHandler(handler)


def project_loggers() -> Iterator[logging.Logger]:
    """지금까지 생성된 프로젝트 로거 (src.*, main, bandwidth_puzzle)"""
    for name, obj in list(logging.Logger.manager.loggerDict.items()):
        if isinstance(obj, logging.Logger) and name.startswith(PROJECT_PREFIXES):
            yield obj


def set_level(level: str) -> None:
    for logger in project_loggers():
        logger.setLevel(_level(level))


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    모든 프로젝트 로거에 레벨을 적용하고, log_file이 있으면 같은 파일에 기록

    Args:
        level: 로깅 레벨 문자열
        log_file: 공용 로그 파일 경로
    """
    set_level(level)
    if log_file:
        for logger in project_loggers():
            _attach_file(logger, log_file)


"""
설정 로딩 모듈

config/puzzle_config.yaml 기본값 위에 사용자 YAML을 병합합니다.
"""

import copy
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .errors import DomainError
from .logger import setup_logger
from .puzzle import PuzzleParams

logger = setup_logger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "puzzle_config.yaml"

_PARAM_FIELDS = ("N", "n", "L", "m", "theta", "kappa")


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    """
    YAML 파일을 dict로 읽기 (빈 파일은 {})

    Raises:
        FileNotFoundError: 파일이 없는 경우
        DomainError: 최상위가 mapping이 아닌 경우
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise DomainError(f"설정 파일 최상위는 mapping이어야 합니다: {path}")
    return data


def load_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    기본 설정 + 사용자 설정 병합

    Args:
        path: 사용자 YAML 경로 (None이면 기본값만)

    Returns:
        설정 dict
    """
    config = read_yaml(DEFAULT_CONFIG_PATH)
    if path is not None:
        config = _deep_merge(config, read_yaml(path))
        logger.info(f"✓ 설정 로딩: {path}")
    return config


def params_from_config(config: Dict[str, Any]) -> PuzzleParams:
    """config['puzzle'] 섹션으로부터 PuzzleParams 생성"""
    section = config.get("puzzle", {})
    try:
        return PuzzleParams(
            N=int(section["N"]),
            n=int(section["n"]),
            L=int(section["L"]),
            m=int(section.get("m", 1)),
            theta=int(section.get("theta_ms", 3000)),
            kappa=int(section.get("kappa", 256)),
        )
    except KeyError as e:
        raise DomainError(f"puzzle 설정에 {e} 항목이 없습니다") from e


def parse_params_flag(text: str) -> PuzzleParams:
    """
    '--params N,n,L,m,theta,kappa' 문자열 파싱 (뒤쪽 필드는 생략 가능)

    Example:
        >>> parse_params_flag("100000,100,50,1,3000,256").L
        50
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not 3 <= len(parts) <= len(_PARAM_FIELDS):
        raise DomainError(f"--params 형식은 N,n,L[,m,theta,kappa] 입니다: {text!r}")
    try:
        values = {name: int(float(p)) for name, p in zip(_PARAM_FIELDS, parts)}
    except ValueError as e:
        raise DomainError(f"--params 값은 정수여야 합니다: {text!r}") from e
    return PuzzleParams(**values)

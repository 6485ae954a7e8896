"""
이름 매칭 유틸리티
클래스 식별자 정규화와 오타 후보 제안 (fuzzy matching)
"""
import re
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from rapidfuzz import fuzz, process

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import SUGGESTION_THRESHOLD


def normalize_class_id(name: str) -> str:
    """
    클래스 식별자 정규화

    Args:
        name: 원본 식별자 (예: " org/example/Globals ", "org.example.Globals.class")

    Returns:
        점 구분 식별자 (예: "org.example.Globals")
    """
    if not name:
        return ''
    name = name.strip()
    # 바이트코드 경로 표기
    name = re.sub(r'\.class$', '', name)
    name = name.replace('/', '.').replace('\\', '.')
    return name


def suggest_name(
    name: str,
    candidates: Iterable[str],
    threshold: int = SUGGESTION_THRESHOLD
) -> Optional[str]:
    """
    알 수 없는 이름에 가장 가까운 후보 찾기

    Args:
        name: 입력된 이름
        candidates: 유효한 이름 목록
        threshold: 최소 매칭 점수 (0-100)

    Returns:
        가장 가까운 후보 또는 None
    """
    choices = list(candidates)
    if not name or not choices:
        return None

    match = process.extractOne(
        name,
        choices,
        scorer=fuzz.ratio,
        score_cutoff=threshold
    )
    if match:
        return match[0]
    return None


def did_you_mean(name: str, candidates: Iterable[str]) -> str:
    """오류 메시지 뒤에 붙일 제안 문구 (후보가 없으면 빈 문자열)"""
    suggestion = suggest_name(name, candidates)
    if suggestion and suggestion != name:
        return f" (did you mean {suggestion!r}?)"
    return ''


def describe_missing(missing: Sequence[str], available: Iterable[str], limit: int = 5) -> str:
    """
    누락된 클래스 목록 요약 (가까운 이름 제안 포함)

    Args:
        missing: 찾지 못한 식별자들
        available: 실제 존재하는 식별자들
        limit: 메시지에 표시할 최대 개수

    Returns:
        사람이 읽을 수 있는 요약 문자열
    """
    pool = list(available)
    parts: List[str] = []
    for name in sorted(missing)[:limit]:
        parts.append(f"{name}{did_you_mean(name, pool)}")
    extra = len(missing) - limit
    if extra > 0:
        parts.append(f"... (+{extra} more)")
    return ', '.join(parts)

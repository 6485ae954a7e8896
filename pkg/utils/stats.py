"""
기술 통계와 Spearman 상관분석
유의성 표시(*, **)와 D-layer 상관 메트릭 선택
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats as sp_stats

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    CORRELATION_COLUMNS, DEFAULT_ALPHA, DLAYER_COLUMN, METRIC_NAMES, SIGNIFICANCE_LEVELS
)
from utils.errors import UndefinedCorrelationError
from utils.layering import LayerAssignment
from utils.model import MetricsTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DescriptiveStats:
    """속성 하나의 기술 통계 (표본 표준편차)"""
    minimum: float
    maximum: float
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class CorrelationEntry:
    """상관계수와 유의성 (rho가 None이면 정의 불가)"""
    rho: Optional[float]
    n: int
    p_value: Optional[float]
    flag: str = ""

    @property
    def defined(self) -> bool:
        return self.rho is not None


def describe(values: Sequence[float]) -> DescriptiveStats:
    """
    최소/최대/평균/표본 표준편차 (n-1 분모)

    Args:
        values: 관측값 (1개 이상)

    Returns:
        DescriptiveStats
    """
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise ValueError("describe() requires at least one value")
    std = float(np.std(data, ddof=1)) if data.size > 1 else 0.0
    return DescriptiveStats(
        minimum=float(data.min()),
        maximum=float(data.max()),
        mean=float(data.mean()),
        std=std,
        n=int(data.size),
    )


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Spearman 순위 상관계수 (동순위는 평균 순위)

    Args:
        x: 첫 번째 변수
        y: 두 번째 변수 (길이 동일, 3개 이상)

    Returns:
        평균 순위에 대한 Pearson 상관계수
    """
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise ValueError(f"spearman() requires at least 3 observations, got {len(x)}")

    rx = sp_stats.rankdata(np.asarray(x, dtype=float), method='average')
    ry = sp_stats.rankdata(np.asarray(y, dtype=float), method='average')
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")

    rho = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


def significance_flag(p_value: float) -> str:
    """p-value에 해당하는 별표 (** p<.01, * p<.05)"""
    for threshold, flag in SIGNIFICANCE_LEVELS:
        if p_value < threshold:
            return flag
    return ""


def significance(rho: float, n: int) -> CorrelationEntry:
    """
    Student-t 근사로 양측 p-value 계산

    Args:
        rho: 상관계수
        n: 표본 크기 (4 이상)

    Returns:
        CorrelationEntry (|rho| = 1이면 p = 0, **)
    """
    if n < 4:
        raise ValueError(f"significance() requires n >= 4, got {n}")
    if abs(rho) >= 1.0:
        return CorrelationEntry(rho=float(rho), n=n, p_value=0.0, flag="**")

    df = n - 2
    t = rho * math.sqrt(df / (1.0 - rho * rho))
    p_value = float(min(1.0, 2.0 * sp_stats.t.sf(abs(t), df)))
    return CorrelationEntry(rho=float(rho), n=n, p_value=p_value, flag=significance_flag(p_value))


@dataclass(frozen=True)
class CorrelationMatrix:
    """상삼각 상관 행렬 (속성 순서 = D-layer, WMC ... NPM)"""
    attributes: Tuple[str, ...]
    entries: Dict[Tuple[str, str], CorrelationEntry] = field(default_factory=dict)

    def entry(self, a: str, b: str) -> CorrelationEntry:
        i, j = self.attributes.index(a), self.attributes.index(b)
        if i > j:
            a, b = b, a
        return self.entries[(a, b)]

    def undefined_attributes(self) -> List[str]:
        return [a for a in self.attributes if not self.entry(a, a).defined]


def correlation_columns(table: MetricsTable, dlayers: LayerAssignment) -> Dict[str, List[float]]:
    """D-layer와 8개 메트릭 컬럼 (클래스명 정렬 순서)"""
    ids = table.class_ids()
    missing = [c for c in ids if c not in dlayers.dlayer_of]
    extra = [c for c in dlayers.dlayer_of if c not in table]
    if missing or extra:
        raise ValueError(
            f"metrics table and D-layers cover different classes "
            f"({len(missing)} without D-layer, {len(extra)} without metrics)")

    columns = {DLAYER_COLUMN: [float(dlayers.dlayer_of[c]) for c in ids]}
    for metric in METRIC_NAMES:
        columns[metric] = [float(v) for v in table.column(metric, ids)]
    return columns


def correlation_matrix(table: MetricsTable, dlayers: LayerAssignment) -> CorrelationMatrix:
    """
    D-layer와 메트릭 간 Spearman 상관 행렬

    Args:
        table: 메트릭 표
        dlayers: 같은 클래스 집합의 D-layer

    Returns:
        상삼각 CorrelationMatrix (상수 컬럼은 정의 불가로 표시)
    """
    columns = correlation_columns(table, dlayers)
    n = len(table)
    if n < 4:
        raise ValueError(f"correlation_matrix() requires at least 4 classes, got {n}")

    constant = {name for name, values in columns.items() if min(values) == max(values)}
    for name in sorted(constant, key=CORRELATION_COLUMNS.index):
        logger.warning(f"{name} 컬럼이 상수라서 상관계수를 정의할 수 없음")

    entries: Dict[Tuple[str, str], CorrelationEntry] = {}
    attrs = CORRELATION_COLUMNS
    for i, a in enumerate(attrs):
        for b in attrs[i:]:
            if a in constant or b in constant:
                entries[(a, b)] = CorrelationEntry(rho=None, n=n, p_value=None)
            elif a == b:
                entries[(a, b)] = CorrelationEntry(rho=1.0, n=n, p_value=0.0)
            else:
                entries[(a, b)] = significance(spearman(columns[a], columns[b]), n)

    return CorrelationMatrix(attributes=tuple(attrs), entries=entries)


def select_correlated(matrix: CorrelationMatrix, alpha: float = DEFAULT_ALPHA,
                      target: str = DLAYER_COLUMN) -> List[str]:
    """
    target 컬럼과 유의하게 상관된 메트릭 (METRIC_NAMES 순서)

    Args:
        matrix: 상관 행렬
        alpha: 유의수준 (p < alpha)
        target: 기준 컬럼

    Returns:
        선택된 메트릭 이름 리스트
    """
    if target not in matrix.attributes:
        raise ValueError(f"matrix has no {target} row")

    selected = []
    for metric in METRIC_NAMES:
        if metric == target or metric not in matrix.attributes:
            continue
        entry = matrix.entry(target, metric)
        if entry.defined and entry.p_value is not None and entry.p_value < alpha:
            selected.append(metric)

    logger.info(f"{target}와 상관된 메트릭 (alpha={alpha}): {', '.join(selected) or '없음'}")
    return selected


def describe_table(table: MetricsTable, dlayers: LayerAssignment) -> Dict[str, DescriptiveStats]:
    """D-layer와 8개 메트릭의 기술 통계"""
    columns = correlation_columns(table, dlayers)
    return {name: describe(values) for name, values in columns.items()}


def common_correlated(selections: Mapping[str, Iterable[str]]) -> List[str]:
    """
    모든 프로젝트에서 D-layer와 상관된 메트릭

    Args:
        selections: 프로젝트명 -> 선택된 메트릭

    Returns:
        공통 메트릭 (METRIC_NAMES 순서)
    """
    sets = [set(v) for v in selections.values()]
    if not sets:
        return []
    common = set.intersection(*sets)
    return [m for m in METRIC_NAMES if m in common]


def format_rho(rho: Optional[float], flag: str = "", decimal: str = "dot") -> str:
    """
    상관계수 표시 문자열

    Args:
        rho: 상관계수 (None이면 n/a)
        flag: 유의성 별표
        decimal: 'dot' (0.341**) 또는 'comma' (,341**)

    Returns:
        소수점 3자리 문자열
    """
    if rho is None:
        return "n/a"
    text = f"{rho:.3f}"
    if decimal == "comma":
        text = text.replace('.', ',')
        if text.startswith('0,'):
            text = text[1:]
        elif text.startswith('-0,'):
            text = '-' + text[2:]
    return text + flag


def correlation_frame(matrix: CorrelationMatrix, decimal: str = "dot") -> pd.DataFrame:
    """상삼각 표시용 DataFrame (하삼각은 빈 문자열)"""
    attrs = list(matrix.attributes)
    data = []
    for i, a in enumerate(attrs):
        row = []
        for j, b in enumerate(attrs):
            if j < i:
                row.append("")
            else:
                entry = matrix.entry(a, b)
                row.append(format_rho(entry.rho, entry.flag, decimal))
        data.append(row)
    return pd.DataFrame(data, index=pd.Index(attrs, name=""), columns=attrs)

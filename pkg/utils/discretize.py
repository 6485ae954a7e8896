"""
MDLP 지도 이산화 (Fayyad-Irani 기준)
메트릭 값을 잠정 레이어 기준으로 구간화해서 규칙 학습용 명목 데이터셋 생성
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import METRIC_NAMES
from utils.model import ClassId, MetricsTable

logger = logging.getLogger(__name__)

GAIN_TOLERANCE = 1e-12


def entropy(labels: Iterable[Hashable]) -> float:
    """
    Shannon 엔트로피 (bit)

    Args:
        labels: 클래스 레이블 멀티셋

    Returns:
        엔트로피, 비어있으면 0
    """
    counts = Counter(labels)
    return _entropy_from_counts([counts[key] for key in sorted(counts)])


def _entropy_from_counts(counts: Sequence[int]) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    result = 0.0
    for count in counts:
        if count > 0:
            p = count / total
            result -= p * math.log2(p)
    return result


@dataclass(frozen=True)
class CutCandidate:
    """best_cut 결과: 경계값, 정보 이득과 분할 양쪽 엔트로피"""
    cut: float
    gain: float
    ent: float
    ent_left: float
    ent_right: float
    k: int
    k_left: int
    k_right: int


def _sorted_groups(values: Sequence[float], labels: Sequence[Hashable]):
    """값 오름차순 (같은 값끼리 묶음) -> [(값, Counter)]"""
    groups: Dict[float, Counter] = {}
    for value, label in zip(values, labels):
        groups.setdefault(float(value), Counter())[label] += 1
    return sorted(groups.items())


def _find_cut(values: Sequence[float], labels: Sequence[Hashable]) -> Optional[CutCandidate]:
    """
    경계점 중 이득 최대 후보

    인접한 두 값을 건너뛰는 것은 두 값의 레이블을 합쳐 한 종류뿐일 때만이다.
    두 값 모두 여러 레이블을 가지면 레이블 집합이 같아도 경계점이다
    (정렬 순서상 서로 다른 레이블이 맞닿는 쌍이 존재하므로).
    """
    if len(values) != len(labels):
        raise ValueError(f"length mismatch: {len(values)} values vs {len(labels)} labels")
    if len(values) < 2:
        return None

    groups = _sorted_groups(values, labels)
    if len(groups) < 2:
        return None

    classes = sorted({label for _, counter in groups for label in counter})
    index = {label: i for i, label in enumerate(classes)}
    matrix = np.zeros((len(groups), len(classes)), dtype=np.int64)
    for row, (_, counter) in enumerate(groups):
        for label, count in counter.items():
            matrix[row, index[label]] = count

    cumulative = np.cumsum(matrix, axis=0)
    total = cumulative[-1]
    n = int(total.sum())
    ent = _entropy_from_counts(total.tolist())

    best: Optional[CutCandidate] = None
    for i in range(len(groups) - 1):
        # 경계점: 인접한 두 값의 레이블 합집합이 2종류 이상
        if np.count_nonzero(matrix[i] + matrix[i + 1]) < 2:
            continue
        left = cumulative[i]
        right = total - left
        n_left = int(left.sum())
        ent_left = _entropy_from_counts(left.tolist())
        ent_right = _entropy_from_counts(right.tolist())
        gain = ent - (n_left / n) * ent_left - ((n - n_left) / n) * ent_right
        if best is None or gain > best.gain + GAIN_TOLERANCE:
            best = CutCandidate(
                cut=(groups[i][0] + groups[i + 1][0]) / 2.0,
                gain=gain,
                ent=ent,
                ent_left=ent_left,
                ent_right=ent_right,
                k=int(np.count_nonzero(total)),
                k_left=int(np.count_nonzero(left)),
                k_right=int(np.count_nonzero(right)),
            )
    return best


def best_cut(values: Sequence[float], labels: Sequence[Hashable]) -> Optional[Tuple[float, float]]:
    """
    정보 이득이 최대인 경계점

    Args:
        values: 속성 값
        labels: 같은 길이의 클래스 레이블

    Returns:
        (경계값, 이득) 또는 후보가 없으면 None. 동점이면 작은 경계값
    """
    candidate = _find_cut(values, labels)
    if candidate is None:
        return None
    return candidate.cut, candidate.gain


def mdlp_accept(gain: float, n: int, k: int, k1: int, k2: int,
                ent: float, ent1: float, ent2: float) -> bool:
    """
    MDL 기준으로 분할 채택 여부

    gain > log2(n-1)/n + [log2(3^k - 2) - (k*ent - k1*ent1 - k2*ent2)]/n
    """
    if n < 2:
        raise ValueError(f"mdlp_accept() requires n >= 2, got {n}")
    delta = math.log2(3 ** k - 2) - (k * ent - k1 * ent1 - k2 * ent2)
    threshold = math.log2(n - 1) / n + delta / n
    return gain > threshold


def mdlp_discretize(values: Sequence[float], labels: Sequence[Hashable]) -> List[float]:
    """
    재귀 이진 분할 MDLP 이산화

    Args:
        values: 속성 값
        labels: 클래스 레이블

    Returns:
        채택된 경계값 (오름차순, 없으면 빈 리스트)
    """
    values = [float(v) for v in values]
    labels = list(labels)
    if len(values) != len(labels):
        raise ValueError(f"length mismatch: {len(values)} values vs {len(labels)} labels")

    cuts: List[float] = []
    stack = [(values, labels)]
    while stack:
        part_values, part_labels = stack.pop()
        candidate = _find_cut(part_values, part_labels)
        if candidate is None:
            continue
        accepted = mdlp_accept(
            candidate.gain, len(part_values), candidate.k, candidate.k_left,
            candidate.k_right, candidate.ent, candidate.ent_left, candidate.ent_right,
        )
        if not accepted:
            continue
        cuts.append(candidate.cut)
        left = [(v, l) for v, l in zip(part_values, part_labels) if v <= candidate.cut]
        right = [(v, l) for v, l in zip(part_values, part_labels) if v > candidate.cut]
        for side in (left, right):
            if len(side) >= 2:
                stack.append(([v for v, _ in side], [l for _, l in side]))
    return sorted(cuts)


def bin_label(cuts: Sequence[float], value: float) -> int:
    """오른쪽 닫힌 구간 번호 (1부터): 1 + (value보다 작은 경계 수)"""
    return 1 + sum(1 for cut in cuts if cut < value)


@dataclass(frozen=True)
class BinningScheme:
    """속성별 경계값과 관측 범위"""
    cuts: Dict[str, Tuple[float, ...]] = field(default_factory=dict)
    observed: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for attribute, cuts in self.cuts.items():
            if any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise ValueError(f"cuts for {attribute} are not strictly increasing: {cuts}")

    @property
    def attributes(self) -> List[str]:
        return _metric_order(self.cuts)

    def active_attributes(self) -> List[str]:
        """경계가 하나 이상인 속성"""
        return [a for a in self.attributes if self.cuts[a]]

    def degenerate_attributes(self) -> List[str]:
        return [a for a in self.attributes if not self.cuts[a]]

    def domain_size(self, attribute: str) -> int:
        return len(self.cuts[attribute]) + 1

    def bin_of(self, attribute: str, value: float) -> int:
        if attribute not in self.cuts:
            raise ValueError(f"attribute {attribute} missing from binning scheme")
        return bin_label(self.cuts[attribute], value)

    def bin_ranges(self, attribute: str) -> List[Tuple[int, int]]:
        """
        정수 메트릭용 구간 범위 (양끝 포함)

        Args:
            attribute: 속성 이름

        Returns:
            [(lo, hi)] 구간마다. 첫 구간은 관측 최솟값, 마지막 구간은 관측 최댓값까지
        """
        cuts = self.cuts[attribute]
        lo_observed, hi_observed = self.observed[attribute]
        ranges = []
        lo = int(math.floor(lo_observed))
        for cut in cuts:
            hi = int(math.floor(cut))
            ranges.append((lo, hi))
            lo = hi + 1
        ranges.append((lo, int(math.floor(hi_observed))))
        return ranges

    def range_labels(self, attribute: str) -> List[str]:
        return [str(lo) if lo == hi else f"{lo}-{hi}" for lo, hi in self.bin_ranges(attribute)]


def _metric_order(attributes: Iterable[str]) -> List[str]:
    names = list(attributes)
    known = [m for m in METRIC_NAMES if m in names]
    return known + sorted(a for a in names if a not in METRIC_NAMES)


def fit_scheme(table: MetricsTable, labels: Mapping[ClassId, Hashable],
               attributes: Sequence[str]) -> BinningScheme:
    """
    선택된 메트릭마다 MDLP 경계 계산

    Args:
        table: 메트릭 표
        labels: 클래스별 지도 레이블 (잠정 레이어 또는 D-layer)
        attributes: 이산화할 메트릭

    Returns:
        BinningScheme (경계 없는 속성은 degenerate)
    """
    ids = table.class_ids()
    missing = [c for c in ids if c not in labels]
    if missing:
        raise ValueError(f"{len(missing)} classes have no supervising label")
    target = [labels[c] for c in ids]

    cuts: Dict[str, Tuple[float, ...]] = {}
    observed: Dict[str, Tuple[float, float]] = {}
    for attribute in attributes:
        values = [float(v) for v in table.column(attribute, ids)]
        cuts[attribute] = tuple(mdlp_discretize(values, target))
        observed[attribute] = (min(values), max(values)) if values else (0.0, 0.0)
        logger.debug(f"{attribute}: 경계 {len(cuts[attribute])}개 {list(cuts[attribute])}")

    scheme = BinningScheme(cuts=cuts, observed=observed)
    for attribute in scheme.degenerate_attributes():
        logger.warning(f"{attribute}: MDLP 경계가 없어서 데이터셋에서 제외")
    logger.info(
        f"이산화 완료: " +
        ', '.join(f"{a}={scheme.domain_size(a)}구간" for a in scheme.active_attributes())
    )
    return scheme


@dataclass(frozen=True)
class NominalDataset:
    """
    규칙 학습용 명목 데이터셋

    values[i, j] = class_ids[i]의 attributes[j] 구간 번호, labels[i] = 잠정 레이어
    """
    class_ids: Tuple[ClassId, ...]
    attributes: Tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray
    domain_sizes: Tuple[int, ...]

    def __post_init__(self):
        n, a = len(self.class_ids), len(self.attributes)
        if self.values.shape != (n, a):
            raise ValueError(f"values shape {self.values.shape} != ({n}, {a})")
        if self.labels.shape != (n,):
            raise ValueError(f"labels shape {self.labels.shape} != ({n},)")
        if len(self.domain_sizes) != a:
            raise ValueError("one domain size per attribute required")
        for j, size in enumerate(self.domain_sizes):
            column = self.values[:, j]
            if column.size and (column.min() < 1 or column.max() > size):
                raise ValueError(f"{self.attributes[j]} bin label outside 1..{size}")

    def __len__(self) -> int:
        return len(self.class_ids)

    def row(self, i: int) -> Dict[str, int]:
        return {a: int(self.values[i, j]) for j, a in enumerate(self.attributes)}

    def rows(self) -> List[Dict[str, int]]:
        return [self.row(i) for i in range(len(self))]

    def subset(self, indices: Sequence[int]) -> "NominalDataset":
        """행 부분집합 (도메인 크기는 유지)"""
        idx = np.asarray(sorted(indices), dtype=np.int64)
        return NominalDataset(
            class_ids=tuple(self.class_ids[i] for i in idx),
            attributes=self.attributes,
            values=self.values[idx] if idx.size else np.zeros((0, len(self.attributes)), dtype=np.int64),
            labels=self.labels[idx] if idx.size else np.zeros(0, dtype=np.int64),
            domain_sizes=self.domain_sizes,
        )

    def class_counts(self) -> Dict[int, int]:
        counts = Counter(int(v) for v in self.labels)
        return dict(sorted(counts.items()))

    def truth(self) -> Dict[ClassId, int]:
        return {c: int(l) for c, l in zip(self.class_ids, self.labels)}

    def to_frame(self) -> pd.DataFrame:
        """class,<attr>...,layer 표"""
        frame = pd.DataFrame(self.values, columns=list(self.attributes))
        frame.insert(0, "class", list(self.class_ids))
        frame["layer"] = self.labels
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame,
                   domain_sizes: Optional[Mapping[str, int]] = None) -> "NominalDataset":
        """
        CSV에서 읽은 표로 데이터셋 생성

        Args:
            frame: class,<attr>...,layer 컬럼
            domain_sizes: 속성별 구간 수 (없으면 관측 최댓값)

        Returns:
            클래스명 정렬된 NominalDataset
        """
        if "class" not in frame.columns or "layer" not in frame.columns:
            raise ValueError("dataset needs 'class' and 'layer' columns")
        frame = frame.sort_values("class", kind="mergesort").reset_index(drop=True)
        attributes = tuple(c for c in frame.columns if c not in ("class", "layer"))
        values = frame[list(attributes)].to_numpy(dtype=np.int64) if attributes \
            else np.zeros((len(frame), 0), dtype=np.int64)
        sizes = []
        for j, attribute in enumerate(attributes):
            if domain_sizes and attribute in domain_sizes:
                sizes.append(int(domain_sizes[attribute]))
            else:
                sizes.append(int(values[:, j].max()) if len(frame) else 1)
        return cls(
            class_ids=tuple(str(c) for c in frame["class"]),
            attributes=attributes,
            values=values,
            labels=frame["layer"].to_numpy(dtype=np.int64),
            domain_sizes=tuple(sizes),
        )


def apply_bins(table: MetricsTable, layers: Mapping[ClassId, int],
               scheme: BinningScheme, attributes: Optional[Sequence[str]] = None) -> NominalDataset:
    """
    메트릭 값을 구간 번호로 변환

    Args:
        table: 메트릭 표
        layers: 클래스별 잠정 레이어 (데이터셋의 클래스 레이블)
        scheme: fit_scheme 결과
        attributes: 포함할 속성 (기본: 경계가 있는 속성 전부)

    Returns:
        NominalDataset (degenerate 속성 제외)
    """
    if attributes is None:
        attributes = scheme.active_attributes()
    for attribute in attributes:
        if attribute not in scheme.cuts:
            raise ValueError(f"attribute {attribute} missing from binning scheme")
    attributes = [a for a in attributes if scheme.cuts[a]]

    ids = table.class_ids()
    missing = [c for c in ids if c not in layers]
    if missing:
        raise ValueError(f"{len(missing)} classes have no tentative layer")

    values = np.zeros((len(ids), len(attributes)), dtype=np.int64)
    for j, attribute in enumerate(attributes):
        cuts = np.asarray(scheme.cuts[attribute], dtype=float)
        column = np.asarray(table.column(attribute, ids), dtype=float)
        # 1 + (값보다 작은 경계 수)
        values[:, j] = 1 + np.searchsorted(cuts, column, side="left")

    return NominalDataset(
        class_ids=tuple(ids),
        attributes=tuple(attributes),
        values=values,
        labels=np.asarray([int(layers[c]) for c in ids], dtype=np.int64),
        domain_sizes=tuple(scheme.domain_size(a) for a in attributes),
    )

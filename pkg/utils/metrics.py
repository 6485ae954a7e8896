"""
CK 설계 메트릭 계산
WMC, DIT, NOC, CBO, RFC, LCOM, Ca, NPM (ckjm 방식)
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Optional, Tuple

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import COUNT_CONSTRUCTORS, COUNT_INITIALIZERS
from utils.model import ClassFacts, ClassId, ClassModel, MethodFacts, MetricsTable, MetricVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricOptions:
    """생성자/정적 초기화 블록을 메서드로 셀지 여부"""
    count_constructors: bool = COUNT_CONSTRUCTORS
    count_initializers: bool = COUNT_INITIALIZERS


DEFAULT_OPTIONS = MetricOptions()


def counted_methods(c: ClassFacts, options: MetricOptions = DEFAULT_OPTIONS) -> Tuple[MethodFacts, ...]:
    """WMC/NPM/RFC/LCOM에 포함되는 메서드"""
    methods = []
    for method in c.methods:
        if method.is_constructor and not options.count_constructors:
            continue
        if method.is_initializer and not options.count_initializers:
            continue
        methods.append(method)
    return tuple(methods)


def wmc(c: ClassFacts, options: MetricOptions = DEFAULT_OPTIONS) -> int:
    """Weighted Methods per Class (메서드당 가중치 1)"""
    return len(counted_methods(c, options))


def dit(c: ClassFacts, model: ClassModel) -> int:
    """
    Depth of Inheritance Tree

    모델 내부 조상 수 + 1 (모델 밖으로 나가는 슈퍼클래스 체인은 외부 루트 하나로 계산)

    Args:
        c: 대상 클래스
        model: 상속 관계가 비순환인 모델

    Returns:
        1 이상의 깊이
    """
    depth = 1
    seen = {c.class_id}
    current = c.superclass
    while current and current in model and current not in seen:
        depth += 1
        seen.add(current)
        current = model.classes[current].superclass
    return depth


def _children_index(model: ClassModel) -> Dict[ClassId, int]:
    children: Dict[ClassId, int] = defaultdict(int)
    for facts in model.classes.values():
        if facts.superclass and facts.superclass in model and facts.superclass != facts.class_id:
            children[facts.superclass] += 1
    return children


def noc(c: ClassFacts, model: ClassModel) -> int:
    """Number of Children (직접 하위 클래스 수)"""
    return _children_index(model).get(c.class_id, 0)


def cbo(c: ClassFacts) -> int:
    """Coupling Between Objects (자기 자신 외 참조 타입 수, 외부 타입 포함)"""
    return len(c.referenced_types())


def rfc(c: ClassFacts, options: MetricOptions = DEFAULT_OPTIONS) -> int:
    """
    Response For a Class (1단계 근사)

    선언 메서드 수 + 서로 다른 (수신자, 시그니처) 호출 수.
    자기 클래스에 선언된 메서드를 호출하는 경우는 제외.

    Args:
        c: 대상 클래스
        options: 메서드 집계 옵션

    Returns:
        RFC 값
    """
    methods = counted_methods(c, options)
    declared = c.declared_signatures
    calls = set()
    for method in methods:
        for receiver, signature in method.invoked:
            if receiver == c.class_id and signature in declared:
                continue
            calls.add((receiver, signature))
    return len(methods) + len(calls)


def lcom(c: ClassFacts, options: MetricOptions = DEFAULT_OPTIONS) -> int:
    """
    Lack of Cohesion in Methods (CK 정의, 0 하한)

    P = 자기 클래스 필드를 공유하지 않는 메서드 쌍, Q = 공유하는 쌍, max(P - Q, 0)
    """
    usage = [
        frozenset(name for owner, name in method.accessed_fields if owner == c.class_id)
        for method in counted_methods(c, options)
    ]
    p = q = 0
    for first, second in combinations(usage, 2):
        if first & second:
            q += 1
        else:
            p += 1
    return max(p - q, 0)


def _afferent_index(model: ClassModel) -> Dict[ClassId, int]:
    afferent: Dict[ClassId, int] = defaultdict(int)
    for facts in model.classes.values():
        for ref in facts.referenced_types():
            if ref in model:
                afferent[ref] += 1
    return afferent


def ca(c: ClassFacts, model: ClassModel) -> int:
    """Afferent Coupling (c를 참조하는 다른 모델 내부 클래스 수)"""
    return _afferent_index(model).get(c.class_id, 0)


def npm(c: ClassFacts, options: MetricOptions = DEFAULT_OPTIONS) -> int:
    """Number of Public Methods"""
    return sum(1 for m in counted_methods(c, options) if m.visibility == "public")


class MetricsCalculator:
    """
    모델 전체 메트릭 계산기

    NOC/Ca용 역방향 인덱스를 한 번만 만든다.
    """

    def __init__(self, model: ClassModel, options: Optional[MetricOptions] = None):
        self.logger = logging.getLogger(self.__class__.__name__)
        self.model = model
        self.options = options or DEFAULT_OPTIONS
        self._children = _children_index(model)
        self._afferent = _afferent_index(model)

    def vector(self, c: ClassFacts) -> MetricVector:
        """클래스 하나의 메트릭 벡터"""
        return MetricVector(
            wmc=wmc(c, self.options),
            dit=dit(c, self.model),
            noc=self._children.get(c.class_id, 0),
            cbo=cbo(c),
            rfc=rfc(c, self.options),
            lcom=lcom(c, self.options),
            ca=self._afferent.get(c.class_id, 0),
            npm=npm(c, self.options),
        )

    def compute(self) -> MetricsTable:
        rows = {c.class_id: self.vector(c) for c in self.model}
        self.logger.info(f"메트릭 계산 완료: {len(rows)}개 클래스")
        return MetricsTable(rows=rows)


def compute_metrics(model: ClassModel, options: Optional[MetricOptions] = None) -> MetricsTable:
    """
    모델의 모든 클래스에 대해 8개 메트릭 계산

    Args:
        model: 검증된 클래스 모델
        options: 메서드 집계 옵션 (기본: 생성자 포함, 초기화 블록 제외)

    Returns:
        클래스별 MetricVector 표
    """
    return MetricsCalculator(model, options).compute()


def in_model_references(c: ClassFacts, model: ClassModel) -> FrozenSet[ClassId]:
    """CBO 참조 집합 중 모델 내부 클래스"""
    return frozenset(ref for ref in c.referenced_types() if ref in model)

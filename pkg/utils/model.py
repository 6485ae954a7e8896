"""
클래스 구조 모델 및 검증
파이프라인 전 단계가 공유하는 도메인 타입
"""
import re
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    LAYER_NAMES, METRIC_NAMES, PRIMITIVE_TYPES, VISIBILITIES, CLASS_KINDS,
    CONSTRUCTOR_NAME, INITIALIZER_NAME
)

ClassId = str

# 메트릭 이름 -> MetricVector 필드명
METRIC_FIELDS = {
    "WMC": "wmc", "DIT": "dit", "NOC": "noc", "CBO": "cbo",
    "RFC": "rfc", "LCOM": "lcom", "Ca": "ca", "NPM": "npm",
}

_GENERIC_ARGS = re.compile(r"<.*>")


class TentativeLayer(IntEnum):
    """잠정 아키텍처 레이어 (D-layer 4개 구간)"""
    INFRASTRUCTURE = 1
    BUSINESS_LOGIC = 2
    CONTROLLERS = 3
    USER_INTERFACE = 4

    @property
    def display_name(self) -> str:
        return LAYER_NAMES[self.value]


def is_valid_class_id(name: str) -> bool:
    """점으로 구분된 비어있지 않은 세그먼트, 공백 없음"""
    if not name or any(ch.isspace() for ch in name):
        return False
    return all(segment for segment in name.split('.'))


def base_type(type_name: Optional[str]) -> Optional[str]:
    """
    타입 식별자에서 참조 대상 타입 추출

    Args:
        type_name: 타입 식별자 (예: "a.B[]", "java.util.List<a.C>", "int")

    Returns:
        배열/제네릭 표기를 제거한 타입명, 원시 타입/void면 None
    """
    if not type_name:
        return None
    name = _GENERIC_ARGS.sub('', type_name.strip())
    while name.endswith('[]'):
        name = name[:-2].strip()
    if not name or name in PRIMITIVE_TYPES:
        return None
    return name


@dataclass(frozen=True)
class FieldFacts:
    """필드 선언"""
    name: str
    type_name: str
    visibility: str = "private"


@dataclass(frozen=True)
class MethodFacts:
    """메서드 선언과 메서드 본문이 참조하는 대상"""
    signature: str
    visibility: str = "public"
    return_type: str = "void"
    invoked: FrozenSet[Tuple[str, str]] = frozenset()
    accessed_fields: FrozenSet[Tuple[str, str]] = frozenset()
    referenced_types: FrozenSet[str] = frozenset()

    @property
    def name(self) -> str:
        return self.signature.split('(', 1)[0].strip()

    @property
    def parameter_types(self) -> Tuple[str, ...]:
        """시그니처 괄호 안의 파라미터 타입 목록"""
        if '(' not in self.signature:
            return ()
        inner = self.signature.split('(', 1)[1].rsplit(')', 1)[0]
        # 제네릭 안의 콤마는 파라미터 구분자가 아님
        params, depth, current = [], 0, []
        for ch in inner:
            if ch == '<':
                depth += 1
            elif ch == '>':
                depth -= 1
            if ch == ',' and depth == 0:
                params.append(''.join(current).strip())
                current = []
            else:
                current.append(ch)
        tail = ''.join(current).strip()
        if tail:
            params.append(tail)
        return tuple(p for p in params if p)

    @property
    def is_constructor(self) -> bool:
        return self.name == CONSTRUCTOR_NAME

    @property
    def is_initializer(self) -> bool:
        return self.name == INITIALIZER_NAME


@dataclass(frozen=True)
class ClassFacts:
    """클래스 하나의 구조 정보 (메트릭 계산 단위)"""
    class_id: ClassId
    kind: str = "class"
    superclass: Optional[str] = None
    interfaces: FrozenSet[str] = frozenset()
    fields: Tuple[FieldFacts, ...] = ()
    methods: Tuple[MethodFacts, ...] = ()

    @property
    def declared_signatures(self) -> FrozenSet[str]:
        return frozenset(m.signature for m in self.methods)

    def referenced_types(self) -> FrozenSet[str]:
        """
        CBO/의존 그래프가 사용하는 참조 타입 집합

        슈퍼클래스, 인터페이스, 필드 타입, 파라미터/리턴 타입, 호출 수신자,
        접근 필드 소유자, referencedTypes. 원시 타입과 자기 자신은 제외.

        Returns:
            참조 타입 식별자 집합 (외부 타입 포함)
        """
        candidates: List[Optional[str]] = [self.superclass]
        candidates.extend(self.interfaces)
        candidates.extend(f.type_name for f in self.fields)
        for method in self.methods:
            candidates.append(method.return_type)
            candidates.extend(method.parameter_types)
            candidates.extend(receiver for receiver, _ in method.invoked)
            candidates.extend(owner for owner, _ in method.accessed_fields)
            candidates.extend(method.referenced_types)

        refs = set()
        for candidate in candidates:
            name = base_type(candidate)
            if name and name != self.class_id:
                refs.add(name)
        return frozenset(refs)


@dataclass(frozen=True)
class ClassModel:
    """분석 대상 클래스 전체 (ClassId -> ClassFacts)"""
    classes: Dict[ClassId, ClassFacts] = field(default_factory=dict)

    @classmethod
    def from_classes(cls, facts: Iterable[ClassFacts]) -> "ClassModel":
        classes: Dict[ClassId, ClassFacts] = {}
        for item in facts:
            if item.class_id in classes:
                raise ValueError(f"duplicate class id: {item.class_id}")
            classes[item.class_id] = item
        return cls(classes=classes)

    def __contains__(self, class_id: object) -> bool:
        return class_id in self.classes

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[ClassFacts]:
        for class_id in self.class_ids():
            yield self.classes[class_id]

    def get(self, class_id: ClassId) -> Optional[ClassFacts]:
        return self.classes.get(class_id)

    def class_ids(self) -> List[ClassId]:
        return sorted(self.classes)


@dataclass(frozen=True)
class MetricVector:
    """클래스 하나의 8개 설계 메트릭"""
    wmc: int
    dit: int
    noc: int
    cbo: int
    rfc: int
    lcom: int
    ca: int
    npm: int

    def __post_init__(self):
        for name in METRIC_FIELDS.values():
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if self.dit < 1:
            raise ValueError(f"dit must be >= 1, got {self.dit}")
        if self.npm > self.wmc:
            raise ValueError(f"npm ({self.npm}) exceeds wmc ({self.wmc})")

    @classmethod
    def from_sequence(cls, values: Sequence[int]) -> "MetricVector":
        """ckjm 순서(WMC DIT NOC CBO RFC LCOM Ca NPM)의 값으로 생성"""
        if len(values) != len(METRIC_NAMES):
            raise ValueError(f"expected {len(METRIC_NAMES)} metric values, got {len(values)}")
        return cls(*(int(v) for v in values))

    def get(self, metric: str) -> int:
        return getattr(self, METRIC_FIELDS[metric])

    def as_tuple(self) -> Tuple[int, ...]:
        return tuple(self.get(name) for name in METRIC_NAMES)


@dataclass(frozen=True)
class MetricsTable:
    """클래스별 메트릭 표"""
    rows: Dict[ClassId, MetricVector] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, class_id: object) -> bool:
        return class_id in self.rows

    def class_ids(self) -> List[ClassId]:
        return sorted(self.rows)

    def column(self, metric: str, class_ids: Optional[Sequence[ClassId]] = None) -> List[int]:
        ids = self.class_ids() if class_ids is None else class_ids
        return [self.rows[c].get(metric) for c in ids]

    def subset(self, class_ids: Iterable[ClassId]) -> "MetricsTable":
        return MetricsTable(rows={c: self.rows[c] for c in class_ids if c in self.rows})

    def to_dataframe(self) -> pd.DataFrame:
        """클래스명을 인덱스로 하는 DataFrame (컬럼 = METRIC_NAMES)"""
        ids = self.class_ids()
        data = [self.rows[c].as_tuple() for c in ids]
        frame = pd.DataFrame(data, index=pd.Index(ids, name="class"), columns=list(METRIC_NAMES))
        return frame.astype("int64")


@dataclass(frozen=True)
class Violation:
    """모델 검증 위반 항목"""
    class_id: ClassId
    rule: str
    message: str


def _inheritance_cycles(model: ClassModel) -> List[List[ClassId]]:
    """모델 내부 슈퍼클래스 관계의 사이클 (자기 자신 상속 제외)"""
    parent = {}
    for facts in model.classes.values():
        sup = facts.superclass
        if sup and sup in model.classes and sup != facts.class_id:
            parent[facts.class_id] = sup

    state: Dict[ClassId, int] = {}  # 1 = 탐색 중, 2 = 완료
    cycles = []
    for start in sorted(model.classes):
        if start in state:
            continue
        path = []
        node = start
        while node is not None and node not in state:
            state[node] = 1
            path.append(node)
            node = parent.get(node)
        if node is not None and state.get(node) == 1:
            cycles.append(sorted(path[path.index(node):]))
        for visited in path:
            state[visited] = 2
    return cycles


def validate_model(model: ClassModel) -> List[Violation]:
    """
    ClassModel/ClassFacts 불변조건 검사

    Args:
        model: 검사할 클래스 모델

    Returns:
        위반 항목 리스트 (비어있으면 통과)
    """
    violations: List[Violation] = []

    for class_id in sorted(model.classes):
        facts = model.classes[class_id]

        if facts.class_id != class_id:
            violations.append(Violation(
                class_id, "key-mismatch",
                f"class key {class_id} does not match facts id {facts.class_id}"))
        if not is_valid_class_id(facts.class_id):
            violations.append(Violation(
                class_id, "invalid-id", f"invalid class id {facts.class_id!r}"))
        if facts.kind not in CLASS_KINDS:
            violations.append(Violation(
                class_id, "invalid-kind", f"unknown kind {facts.kind!r} in {class_id}"))
        if facts.superclass == facts.class_id:
            violations.append(Violation(
                class_id, "self-superclass", f"self-superclass {class_id}"))

        seen_fields = set()
        for item in facts.fields:
            if item.name in seen_fields:
                violations.append(Violation(
                    class_id, "duplicate-field", f"duplicate field {item.name} in {class_id}"))
            seen_fields.add(item.name)
            if item.visibility not in VISIBILITIES:
                violations.append(Violation(
                    class_id, "invalid-visibility",
                    f"unknown visibility {item.visibility!r} in {class_id}.{item.name}"))

        seen_methods = set()
        for method in facts.methods:
            if method.signature in seen_methods:
                violations.append(Violation(
                    class_id, "duplicate-method",
                    f"duplicate method {method.signature} in {class_id}"))
            seen_methods.add(method.signature)
            if method.visibility not in VISIBILITIES:
                violations.append(Violation(
                    class_id, "invalid-visibility",
                    f"unknown visibility {method.visibility!r} in {class_id}.{method.signature}"))

    for members in _inheritance_cycles(model):
        violations.append(Violation(
            members[0], "inheritance-cycle", f"inheritance cycle {{{','.join(members)}}}"))

    return violations

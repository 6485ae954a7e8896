"""
합성 레이어 시스템 생성기
정답 레이어가 심어진 의존 그래프 + 메트릭 표 (또는 class-facts 모델)
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Set, Tuple

import numpy as np
import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    METRIC_NAMES, DEFAULT_SEED, SYNTH_CLASSES_PER_LAYER, SYNTH_DOWN_DEP_PROB,
    SYNTH_SKIP_DEP_PROB, SYNTH_CYCLE_PROB, SYNTH_LAYER_DEPTH, SYNTH_METRIC_PROFILES,
    SYNTH_CLASS_PREFIXES, TENTATIVE_LAYER_COUNT
)
from utils.layering import DependencyGraph, Edge
from utils.model import (
    ClassFacts, ClassId, ClassModel, FieldFacts, MethodFacts, MetricsTable, MetricVector,
    TentativeLayer
)

logger = logging.getLogger(__name__)

Range = Tuple[int, int]


@dataclass(frozen=True)
class SynthParams:
    """
    합성 시스템 파라미터

    layer_depth: 잠정 레이어 하나가 차지하는 D-layer 수
    """
    classes_per_layer: Tuple[int, ...] = SYNTH_CLASSES_PER_LAYER
    down_dep_prob: float = SYNTH_DOWN_DEP_PROB
    skip_dep_prob: float = SYNTH_SKIP_DEP_PROB
    cycle_prob: float = SYNTH_CYCLE_PROB
    metric_profiles: Mapping[int, Mapping[str, Range]] = field(
        default_factory=lambda: SYNTH_METRIC_PROFILES)
    seed: int = DEFAULT_SEED
    layer_depth: int = SYNTH_LAYER_DEPTH

    def validate(self) -> List[str]:
        """문제 목록 (비어있으면 정상)"""
        problems = []
        if len(self.classes_per_layer) != TENTATIVE_LAYER_COUNT:
            problems.append(f"classes_per_layer needs {TENTATIVE_LAYER_COUNT} counts")
        elif any(count < 1 for count in self.classes_per_layer):
            problems.append("every layer needs at least one class")
        for name in ("down_dep_prob", "skip_dep_prob", "cycle_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                problems.append(f"{name} must be in [0, 1], got {value}")
        if self.layer_depth < 1:
            problems.append(f"layer_depth must be >= 1, got {self.layer_depth}")
        for layer in range(1, TENTATIVE_LAYER_COUNT + 1):
            profile = self.metric_profiles.get(layer)
            if profile is None:
                problems.append(f"no metric profile for layer {layer}")
                continue
            for metric in METRIC_NAMES:
                if metric not in profile:
                    problems.append(f"layer {layer} profile lacks {metric}")
                    continue
                lo, hi = profile[metric]
                if lo < 0 or hi < lo:
                    problems.append(f"layer {layer} {metric} range [{lo}, {hi}] is empty or negative")
        return problems


@dataclass(frozen=True)
class SyntheticSystem:
    """생성 결과"""
    graph: DependencyGraph
    metrics: MetricsTable
    truth: Dict[ClassId, TentativeLayer]
    forced_edges: frozenset = frozenset()


class SystemGenerator:
    """
    시드 고정 합성 시스템 생성

    D-layer = (k-1) * layer_depth + 하위 단계 이므로 cycle_prob=0이면
    bin_tentative가 정답 레이어를 그대로 복원한다.
    """

    def __init__(self, params: Optional[SynthParams] = None):
        self.logger = logging.getLogger(self.__class__.__name__)
        self.params = params or SynthParams()
        problems = self.params.validate()
        if problems:
            raise ValueError("infeasible synth parameters: " + "; ".join(problems))
        self.rng = np.random.default_rng(self.params.seed)

    def _classes(self) -> Tuple[Dict[int, List[List[ClassId]]], Dict[ClassId, TentativeLayer]]:
        """레이어 -> 하위 단계별 클래스 목록"""
        depth = self.params.layer_depth
        levels: Dict[int, List[List[ClassId]]] = {}
        truth: Dict[ClassId, TentativeLayer] = {}
        for layer, count in enumerate(self.params.classes_per_layer, start=1):
            # 하위 단계마다 최소 1개 (부족하면 체인 패딩 클래스 추가)
            total = max(count, depth)
            prefix = SYNTH_CLASS_PREFIXES[layer]
            sub = [[] for _ in range(depth)]
            for index in range(total):
                class_id = f"{prefix}{index:03d}"
                sub[index % depth].append(class_id)
                truth[class_id] = TentativeLayer(layer)
            levels[layer] = sub
        return levels, truth

    def _pick(self, candidates: List[ClassId]) -> ClassId:
        return candidates[int(self.rng.integers(len(candidates)))]

    def _edges(self, levels: Dict[int, List[List[ClassId]]]) -> Tuple[Set[Edge], Set[Edge]]:
        depth = self.params.layer_depth
        forced: Set[Edge] = set()
        edges: Set[Edge] = set()

        for layer in range(1, TENTATIVE_LAYER_COUNT + 1):
            for level in range(depth):
                for class_id in levels[layer][level]:
                    if level > 0:
                        target = self._pick(levels[layer][level - 1])
                    elif layer > 1:
                        target = self._pick(levels[layer - 1][depth - 1])
                    else:
                        continue
                    forced.add((class_id, target))
        edges |= forced

        for layer in range(2, TENTATIVE_LAYER_COUNT + 1):
            below = [c for level in levels[layer - 1] for c in level]
            skip = [c for lower in range(1, layer - 1) for level in levels[lower] for c in level]
            for class_id in (c for level in levels[layer] for c in level):
                hits = self.rng.random(len(below)) < self.params.down_dep_prob
                edges.update((class_id, b) for b, hit in zip(below, hits) if hit)
                if skip:
                    hits = self.rng.random(len(skip)) < self.params.skip_dep_prob
                    edges.update((class_id, b) for b, hit in zip(skip, hits) if hit)

        return forced, edges

    def _cycles(self, edges: Set[Edge], truth: Mapping[ClassId, TentativeLayer],
                planted: Mapping[ClassId, int]) -> Set[Edge]:
        """
        위 레이어 의존자가 정확히 하나인 클래스에 역방향 엣지 추가 (2-사이클)

        위쪽 클래스에 사이클 밖의 바로 아래 단계 의존 대상이 남아 있을 때만 추가한다.
        그래서 위쪽 클래스와 나머지 클래스의 D-layer는 그대로이고, 아래쪽 클래스만
        위쪽 클래스의 D-layer로 올라간다.
        """
        dependents: Dict[ClassId, Set[ClassId]] = {c: set() for c in truth}
        anchors: Dict[ClassId, Set[ClassId]] = {c: set() for c in truth}
        for source, target in edges:
            dependents[target].add(source)
            if planted[target] == planted[source] - 1:
                anchors[source].add(target)

        added = set()
        cycled: Dict[ClassId, Set[ClassId]] = {c: set() for c in truth}
        for class_id in sorted(truth):
            layer = int(truth[class_id])
            if layer >= TENTATIVE_LAYER_COUNT or len(dependents[class_id]) != 1:
                continue
            (upper,) = dependents[class_id]
            if int(truth[upper]) != layer + 1:
                continue
            if not anchors[upper] - cycled[upper] - {class_id}:
                continue
            if self.rng.random() < self.params.cycle_prob:
                added.add((class_id, upper))
                cycled[upper].add(class_id)
        return added

    def _sample_vector(self, layer: int) -> MetricVector:
        profile = self.params.metric_profiles[layer]
        values = {}
        for metric in METRIC_NAMES:
            lo, hi = profile[metric]
            values[metric] = int(self.rng.integers(lo, hi + 1))
        # MetricVector 불변조건 (npm <= wmc, dit >= 1)
        values["NPM"] = min(values["NPM"], values["WMC"])
        values["DIT"] = max(values["DIT"], 1)
        return MetricVector.from_sequence([values[m] for m in METRIC_NAMES])

    def generate(self) -> SyntheticSystem:
        levels, truth = self._classes()
        forced, edges = self._edges(levels)
        planted = {
            class_id: (layer - 1) * self.params.layer_depth + level
            for layer, sub in levels.items()
            for level, class_ids in enumerate(sub)
            for class_id in class_ids
        }
        cycle_edges = self._cycles(edges, truth, planted)
        edges |= cycle_edges

        graph = DependencyGraph(nodes=frozenset(truth), edges=frozenset(edges))
        rows = {c: self._sample_vector(int(truth[c])) for c in sorted(truth)}

        self.logger.info(
            f"합성 시스템 생성: 클래스 {len(truth)}개, 엣지 {len(edges)}개, "
            f"사이클 엣지 {len(cycle_edges)}개 (seed={self.params.seed})")
        return SyntheticSystem(
            graph=graph,
            metrics=MetricsTable(rows=rows),
            truth=truth,
            forced_edges=frozenset(forced),
        )


def generate(params: Optional[SynthParams] = None) -> SyntheticSystem:
    """
    합성 시스템 생성 (그래프, 메트릭 표, 정답 레이어)

    Args:
        params: 생성 파라미터 (기본: config의 SYNTH_* 값)

    Returns:
        SyntheticSystem
    """
    return SystemGenerator(params).generate()


def _lcom_group_size(methods: int, target: int) -> int:
    """공유 필드 그룹 크기 g: max(T - 2*C(g,2), 0)가 target에 가장 가깝게"""
    total_pairs = methods * (methods - 1) // 2
    best_g, best_error = 0, None
    for g in range(methods + 1):
        shared = g * (g - 1) // 2
        error = abs(max(total_pairs - 2 * shared, 0) - target)
        if best_error is None or error < best_error:
            best_g, best_error = g, error
    return best_g


def _class_facts(class_id: ClassId, vector: MetricVector, targets: List[ClassId],
                 superclass: Optional[ClassId]) -> ClassFacts:
    """
    메트릭 벡터를 근사하는 ClassFacts

    WMC/NPM은 정확히, CBO/RFC는 구조적 최솟값 이상으로, LCOM은 공유 필드 그룹으로 근사
    """
    fields = [FieldFacts(name=f"dep{i}", type_name=target) for i, target in enumerate(targets)]
    fields.append(FieldFacts(name="state", type_name="int"))
    # 외부 타입으로 CBO 채우기
    for i in range(max(vector.cbo - len(targets), 0)):
        fields.append(FieldFacts(name=f"ext{i}", type_name=f"ext.T{i}"))

    group = _lcom_group_size(vector.wmc, vector.lcom)
    extra_calls = max(vector.rfc - vector.wmc, 0)
    methods = []
    for i in range(vector.wmc):
        invoked = frozenset()
        if i == 0 and extra_calls:
            invoked = frozenset((class_id, f"inherited{j}()") for j in range(extra_calls))
        accessed = frozenset({(class_id, "state")}) if i < group else frozenset()
        methods.append(MethodFacts(
            signature=f"op{i}()",
            visibility="public" if i < vector.npm else "private",
            invoked=invoked,
            accessed_fields=accessed,
        ))

    return ClassFacts(
        class_id=class_id,
        superclass=superclass,
        fields=tuple(fields),
        methods=tuple(methods),
    )


def generate_class_facts(params: Optional[SynthParams] = None) -> Tuple[ClassModel, SyntheticSystem]:
    """
    ClassFacts 모드 합성 (메트릭 엔진 경유 파이프라인용)

    build_graph(model)은 생성된 그래프와 같다. DIT>1이 뽑힌 클래스는
    강제 하향 의존 대상 중 하나를 슈퍼클래스로 둔다.

    Args:
        params: 생성 파라미터

    Returns:
        (ClassModel, 같은 시드의 SyntheticSystem)
    """
    system = generate(params)
    targets: Dict[ClassId, List[ClassId]] = {c: [] for c in system.graph.nodes}
    for source, target in sorted(system.graph.edges):
        targets[source].append(target)
    forced_target = {source: target for source, target in system.forced_edges}

    classes = []
    for class_id in sorted(system.graph.nodes):
        vector = system.metrics.rows[class_id]
        superclass = forced_target.get(class_id) if vector.dit > 1 else None
        classes.append(_class_facts(class_id, vector, targets[class_id], superclass))

    model = ClassModel.from_classes(classes)
    logger.info(f"class-facts 모델 생성: 클래스 {len(model)}개")
    return model, system


def truth_frame(truth: Mapping[ClassId, int]) -> pd.DataFrame:
    """class,layer 표 (클래스명 정렬)"""
    ids = sorted(truth)
    return pd.DataFrame({"class": ids, "layer": [int(truth[c]) for c in ids]})

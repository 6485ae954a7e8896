"""
의존 그래프, SCC 축약, D-layer 계산
D-layer를 4개 잠정 아키텍처 레이어로 묶기
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx
import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import TENTATIVE_LAYER_COUNT
from utils.errors import PipelineHalt
from utils.model import ClassId, ClassModel, TentativeLayer

logger = logging.getLogger(__name__)

Edge = Tuple[ClassId, ClassId]


@dataclass(frozen=True)
class DependencyGraph:
    """클래스 수준 의존 그래프 (자기 참조 엣지 없음)"""
    nodes: FrozenSet[ClassId] = frozenset()
    edges: FrozenSet[Edge] = frozenset()

    def __post_init__(self):
        for source, target in self.edges:
            if source == target:
                raise ValueError(f"self-edge on {source}")
            if source not in self.nodes or target not in self.nodes:
                raise ValueError(f"edge {source} -> {target} has an endpoint outside the node set")

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], nodes: Iterable[ClassId] = ()) -> "DependencyGraph":
        """엣지 목록으로 그래프 생성 (엣지 양 끝점은 자동으로 노드에 포함)"""
        edge_set = frozenset((s, t) for s, t in edges if s != t)
        node_set = set(nodes)
        for source, target in edge_set:
            node_set.add(source)
            node_set.add(target)
        return cls(nodes=frozenset(node_set), edges=edge_set)

    def restrict(self, class_ids: Iterable[ClassId]) -> Tuple["DependencyGraph", int]:
        """
        분석 대상 클래스만 남긴 그래프

        Args:
            class_ids: 유지할 클래스 (여기 없는 클래스는 외부 타입 취급)

        Returns:
            (축소된 그래프, 제거된 엣지 수)
        """
        keep = set(class_ids)
        edges = frozenset((s, t) for s, t in self.edges if s in keep and t in keep)
        return DependencyGraph(nodes=frozenset(keep), edges=edges), len(self.edges) - len(edges)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(sorted(self.nodes))
        graph.add_edges_from(sorted(self.edges))
        return graph


@dataclass(frozen=True)
class Condensation:
    """SCC 축약 그래프 (항상 DAG)"""
    components: Tuple[FrozenSet[ClassId], ...] = ()
    component_of: Dict[ClassId, int] = field(default_factory=dict)
    dag_edges: FrozenSet[Tuple[int, int]] = frozenset()


@dataclass(frozen=True)
class LayerAssignment:
    """클래스별 D-layer"""
    dlayer_of: Dict[ClassId, int] = field(default_factory=dict)
    max_layer: int = 0


@dataclass(frozen=True)
class BinEdges:
    """D-layer 4개 구간 (양끝 포함 정수 범위)"""
    bins: Tuple[Tuple[int, int], ...]

    def bin_of(self, dlayer: int) -> int:
        """D-layer가 속한 구간 번호 (1부터)"""
        for position, (lo, hi) in enumerate(self.bins, start=1):
            if lo <= dlayer <= hi:
                return position
        raise ValueError(f"D-layer {dlayer} outside bins {self.bins}")

    def labels(self) -> List[str]:
        return [str(lo) if lo == hi else f"{lo}-{hi}" for lo, hi in self.bins]


def build_graph(model: ClassModel) -> DependencyGraph:
    """
    클래스 모델에서 의존 그래프 생성

    Args:
        model: 검증된 클래스 모델

    Returns:
        모델 내부 클래스만 노드로 갖는 그래프 (외부 참조는 엣지 없음)
    """
    edges = set()
    for facts in model:
        for ref in facts.referenced_types():
            if ref in model and ref != facts.class_id:
                edges.add((facts.class_id, ref))

    graph = DependencyGraph(nodes=frozenset(model.classes), edges=frozenset(edges))
    logger.info(f"의존 그래프: 노드 {len(graph.nodes)}개, 엣지 {len(graph.edges)}개")
    return graph


def condense(graph: DependencyGraph) -> Condensation:
    """
    강한 연결 요소(SCC)로 그래프 축약

    Args:
        graph: 의존 그래프

    Returns:
        컴포넌트는 가장 작은 클래스명 순으로 정렬됨
    """
    nx_graph = graph.to_networkx()
    components = sorted(
        (frozenset(c) for c in nx.strongly_connected_components(nx_graph)),
        key=min
    )
    component_of = {}
    for index, members in enumerate(components):
        for class_id in members:
            component_of[class_id] = index

    dag_edges = frozenset(
        (component_of[s], component_of[t])
        for s, t in graph.edges
        if component_of[s] != component_of[t]
    )

    cyclic = sum(1 for c in components if len(c) > 1)
    if cyclic:
        logger.info(f"순환 의존 SCC {cyclic}개 (최대 크기 {max(len(c) for c in components)})")

    return Condensation(components=tuple(components), component_of=component_of, dag_edges=dag_edges)


def assign_dlayers(cond: Condensation) -> LayerAssignment:
    """
    축약 그래프에서 D-layer 계산 (싱크 = 0, 그 외 1 + 후속 컴포넌트 최대값)

    Args:
        cond: SCC 축약 결과

    Returns:
        클래스별 D-layer (같은 SCC는 같은 값)
    """
    dag = nx.DiGraph()
    dag.add_nodes_from(range(len(cond.components)))
    dag.add_edges_from(cond.dag_edges)

    layer_of_component: Dict[int, int] = {}
    for component in reversed(list(nx.topological_sort(dag))):
        successors = [layer_of_component[s] for s in dag.successors(component)]
        layer_of_component[component] = 1 + max(successors) if successors else 0

    dlayer_of = {
        class_id: layer_of_component[index]
        for class_id, index in cond.component_of.items()
    }
    max_layer = max(dlayer_of.values(), default=0)
    logger.info(f"D-layer 계산 완료: 최대 D-layer {max_layer}")
    return LayerAssignment(dlayer_of=dlayer_of, max_layer=max_layer)


def tentative_bin_edges(max_layer: int, groups: int = TENTATIVE_LAYER_COUNT) -> BinEdges:
    """
    0..max_layer를 연속된 groups개 구간으로 분할 (나머지는 낮은 구간부터 1씩)

    Args:
        max_layer: 최대 D-layer
        groups: 구간 수

    Returns:
        구간 경계
    """
    span = max_layer + 1
    if span < groups:
        raise PipelineHalt("layers", f"too few D-layers to form four groups (max D-layer {max_layer})")

    width, remainder = divmod(span, groups)
    bins = []
    lo = 0
    for position in range(groups):
        size = width + 1 if position < remainder else width
        bins.append((lo, lo + size - 1))
        lo += size
    return BinEdges(bins=tuple(bins))


def bin_tentative(assign: LayerAssignment) -> Tuple[BinEdges, Dict[ClassId, TentativeLayer]]:
    """
    D-layer를 4개의 잠정 아키텍처 레이어로 묶기

    Args:
        assign: D-layer 할당 결과 (max_layer >= 3)

    Returns:
        (구간 경계, 클래스별 잠정 레이어). 가장 낮은 구간 = Infrastructure(1)
    """
    edges = tentative_bin_edges(assign.max_layer)
    layers = {
        class_id: TentativeLayer(edges.bin_of(dlayer))
        for class_id, dlayer in assign.dlayer_of.items()
    }
    logger.info(f"잠정 레이어 구간: {', '.join(edges.labels())}")
    return edges, layers


def layer_assignment_frame(assign: LayerAssignment,
                           tentative: Optional[Dict[ClassId, TentativeLayer]] = None) -> pd.DataFrame:
    """class,dlayer,tentative_layer 표 (클래스명 정렬)"""
    ids = sorted(assign.dlayer_of)
    frame = pd.DataFrame({
        "class": ids,
        "dlayer": [assign.dlayer_of[c] for c in ids],
    })
    if tentative is not None:
        frame["tentative_layer"] = [int(tentative[c]) for c in ids]
    return frame


def layer_counts(tentative: Dict[ClassId, TentativeLayer]) -> Dict[int, int]:
    """잠정 레이어별 클래스 수"""
    counts = {int(layer): 0 for layer in TentativeLayer}
    for layer in tentative.values():
        counts[int(layer)] += 1
    return counts


def dependency_violations(graph: DependencyGraph, assign: LayerAssignment) -> Set[Edge]:
    """서로 다른 SCC 사이인데 높은 D-layer -> 낮은 D-layer 규칙을 어긴 엣지 (정상이면 빈 집합)"""
    cond = condense(graph)
    bad = set()
    for source, target in graph.edges:
        if cond.component_of[source] == cond.component_of[target]:
            continue
        if assign.dlayer_of[source] <= assign.dlayer_of[target]:
            bad.add((source, target))
    return bad

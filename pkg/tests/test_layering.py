"""
D-layer 계산 테스트
"""
from itertools import product

import numpy as np
import pytest

from utils.errors import PipelineHalt
from utils.layering import (
    DependencyGraph, LayerAssignment, assign_dlayers, bin_tentative, build_graph, condense,
    dependency_violations, layer_assignment_frame, tentative_bin_edges
)
from utils.model import ClassFacts, ClassModel, TentativeLayer


def dlayers(edges, nodes=()):
    graph = DependencyGraph.from_edges(edges, nodes=nodes)
    return assign_dlayers(condense(graph)).dlayer_of


def brute_force_dlayers(nodes, edges):
    """도달 가능성으로 SCC를 구하고 모든 경로를 열거해서 싱크까지 최장 경로"""
    nodes = sorted(nodes)
    reach = {n: {n} for n in nodes}
    changed = True
    while changed:
        changed = False
        for s, t in edges:
            new = reach[t] - reach[s]
            if new:
                reach[s] |= new
                changed = True

    component = {n: frozenset(m for m in nodes if n in reach[m] and m in reach[n]) for n in nodes}
    comps = set(component.values())
    succ = {c: set() for c in comps}
    for s, t in edges:
        if component[s] != component[t]:
            succ[component[s]].add(component[t])

    def longest(c, visiting):
        best = 0
        for nxt in succ[c]:
            assert nxt not in visiting
            best = max(best, 1 + longest(nxt, visiting | {nxt}))
        return best

    return {n: longest(component[n], {component[n]}) for n in nodes}


class TestAssignDlayers:
    def test_single_class(self):
        assert dlayers([], nodes=["A"]) == {"A": 0}

    def test_chain(self):
        assert dlayers([("A", "B"), ("B", "C")]) == {"A": 2, "B": 1, "C": 0}

    def test_diamond_with_cross_edge(self):
        edges = [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D"), ("C", "B")]
        assert dlayers(edges) == {"D": 0, "B": 1, "C": 2, "A": 3}

    def test_cycle_shares_one_layer(self):
        result = dlayers([("A", "B"), ("B", "A"), ("C", "A"), ("B", "D")])
        assert result["A"] == result["B"] == 1
        assert result["C"] == 2
        assert result["D"] == 0

    def test_empty_graph(self):
        cond = condense(DependencyGraph())
        assert cond.components == ()
        assert assign_dlayers(cond).max_layer == 0

    def test_random_graphs_match_brute_force(self):
        rng = np.random.default_rng(20240101)
        for _ in range(1000):
            n = int(rng.integers(1, 13))
            density = float(rng.uniform(0.0, 0.5))
            nodes = [f"n{i:02d}" for i in range(n)]
            edges = [
                (s, t) for s, t in product(nodes, nodes)
                if s != t and rng.random() < density
            ]
            assert dlayers(edges, nodes=nodes) == brute_force_dlayers(nodes, edges)

    def test_edges_point_strictly_down_across_components(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            nodes = [f"n{i}" for i in range(10)]
            edges = [(s, t) for s, t in product(nodes, nodes) if s != t and rng.random() < 0.2]
            graph = DependencyGraph.from_edges(edges, nodes=nodes)
            assign = assign_dlayers(condense(graph))
            assert dependency_violations(graph, assign) == set()

    def test_adding_an_edge_never_lowers_a_layer(self):
        rng = np.random.default_rng(11)
        nodes = [f"n{i}" for i in range(8)]
        for _ in range(100):
            edges = [(s, t) for s, t in product(nodes, nodes) if s != t and rng.random() < 0.15]
            before = dlayers(edges, nodes)
            s, t = rng.choice(nodes, size=2, replace=False)
            after = dlayers(edges + [(str(s), str(t))], nodes)
            assert all(after[c] >= before[c] for c in nodes)


class TestCondense:
    def test_acyclic_gives_singletons(self):
        cond = condense(DependencyGraph.from_edges([("A", "B"), ("B", "C")]))
        assert all(len(c) == 1 for c in cond.components)
        assert len(cond.components) == 3

    def test_cycle_component(self):
        cond = condense(DependencyGraph.from_edges([("A", "B"), ("B", "A"), ("C", "A")]))
        assert cond.components == (frozenset({"A", "B"}), frozenset({"C"}))
        assert cond.dag_edges == {(1, 0)}


class TestBinning:
    @pytest.mark.parametrize("max_layer,labels", [
        (15, ["0-3", "4-7", "8-11", "12-15"]),
        (19, ["0-4", "5-9", "10-14", "15-19"]),
        (16, ["0-4", "5-8", "9-12", "13-16"]),
        (3, ["0", "1", "2", "3"]),
    ])
    def test_bin_rows(self, max_layer, labels):
        assert tentative_bin_edges(max_layer).labels() == labels

    def test_too_few_layers(self):
        with pytest.raises(PipelineHalt, match="too few D-layers to form four groups"):
            tentative_bin_edges(2)

    def test_bin_tentative(self):
        assign = LayerAssignment(dlayer_of={"a": 0, "b": 4, "c": 8, "d": 16}, max_layer=16)
        edges, layers = bin_tentative(assign)
        assert layers == {
            "a": TentativeLayer.INFRASTRUCTURE,
            "b": TentativeLayer.INFRASTRUCTURE,
            "c": TentativeLayer.BUSINESS_LOGIC,
            "d": TentativeLayer.USER_INTERFACE,
        }
        assert edges.bin_of(13) == 4


class TestGraph:
    def test_external_superclass_has_no_edge(self):
        model = ClassModel.from_classes([ClassFacts("a.A", superclass="java.lang.Object")])
        graph = build_graph(model)
        assert graph.nodes == {"a.A"}
        assert graph.edges == frozenset()

    def test_in_model_superclass(self):
        model = ClassModel.from_classes([ClassFacts("a.A", superclass="a.B"), ClassFacts("a.B")])
        assert build_graph(model).edges == {("a.A", "a.B")}

    def test_self_edge_rejected(self):
        with pytest.raises(ValueError, match="self-edge"):
            DependencyGraph(nodes=frozenset({"A"}), edges=frozenset({("A", "A")}))

    def test_restrict_drops_outside_edges(self):
        graph = DependencyGraph.from_edges([("A", "B"), ("A", "X")])
        restricted, dropped = graph.restrict(["A", "B"])
        assert restricted.edges == {("A", "B")}
        assert dropped == 1

    def test_shop_fixture_layers(self, shop_model):
        assign = assign_dlayers(condense(build_graph(shop_model)))
        assert assign.dlayer_of == {
            "shop.Base": 0, "shop.Item": 0, "shop.Util": 0,
            "shop.Entity": 1, "shop.Order": 2, "shop.Repository": 2,
            "shop.OrderRepository": 3, "shop.OrderService": 3,
            "shop.OrderController": 4, "shop.OrderView": 5,
        }

    def test_assignment_frame_sorted(self):
        assign = LayerAssignment(dlayer_of={"b": 1, "a": 0}, max_layer=1)
        frame = layer_assignment_frame(assign)
        assert list(frame["class"]) == ["a", "b"]
        assert list(frame.columns) == ["class", "dlayer"]

"""
CK 메트릭 계산 테스트
"""
from dataclasses import replace

import numpy as np
import pytest

from utils.metrics import (
    MetricOptions, ca, cbo, compute_metrics, dit, in_model_references, lcom, noc, npm, rfc, wmc
)
from utils.model import ClassFacts, ClassModel, FieldFacts, MethodFacts
from utils.synth import SynthParams, generate_class_facts

# 손으로 계산한 값: WMC DIT NOC CBO RFC LCOM Ca NPM
SHOP_EXPECTED = {
    "shop.Base":            (2, 1, 1, 0, 2, 1, 1, 2),
    "shop.Entity":          (1, 2, 1, 2, 1, 0, 3, 1),
    "shop.Order":           (3, 3, 0, 2, 4, 0, 2, 2),
    "shop.Item":            (1, 1, 0, 0, 1, 0, 1, 1),
    "shop.Repository":      (1, 1, 0, 1, 1, 0, 2, 1),
    "shop.OrderRepository": (1, 1, 0, 3, 2, 0, 0, 1),
    "shop.OrderService":    (1, 1, 0, 2, 3, 0, 1, 1),
    "shop.OrderController": (1, 1, 0, 2, 2, 0, 1, 1),
    "shop.OrderView":       (2, 1, 0, 2, 3, 1, 0, 1),
    "shop.Util":            (3, 1, 0, 0, 3, 1, 0, 3),
}


def method(signature, visibility="public", invoked=(), accessed=()):
    return MethodFacts(
        signature=signature,
        visibility=visibility,
        invoked=frozenset(invoked),
        accessed_fields=frozenset(accessed),
    )


class TestShopFixture:
    def test_table(self, shop_model):
        table = compute_metrics(shop_model)
        assert {c: table.rows[c].as_tuple() for c in table.class_ids()} == SHOP_EXPECTED

    def test_row_equals_individual_operations(self, shop_model):
        table = compute_metrics(shop_model)
        for facts in shop_model:
            expected = (
                wmc(facts), dit(facts, shop_model), noc(facts, shop_model), cbo(facts),
                rfc(facts), lcom(facts), ca(facts, shop_model), npm(facts),
            )
            assert table.rows[facts.class_id].as_tuple() == expected

    def test_without_constructors(self, shop_model):
        table = compute_metrics(shop_model, MetricOptions(count_constructors=False))
        assert table.rows["shop.Base"].as_tuple() == (1, 1, 1, 0, 1, 0, 1, 1)

    def test_with_initializers(self, shop_model):
        table = compute_metrics(shop_model, MetricOptions(count_initializers=True))
        assert table.rows["shop.OrderView"].as_tuple() == (3, 1, 0, 2, 4, 3, 0, 1)

    def test_empty_model(self):
        assert len(compute_metrics(ClassModel())) == 0


class TestWmcNpm:
    def test_counts(self):
        facts = ClassFacts("A", methods=tuple(
            method(f"m{i}()", visibility="public" if i < 2 else "private") for i in range(5)))
        assert wmc(facts) == 5
        assert npm(facts) == 2

    def test_all_private(self):
        facts = ClassFacts("A", methods=tuple(method(f"m{i}()", "private") for i in range(3)))
        assert npm(facts) == 0

    def test_no_methods(self):
        assert wmc(ClassFacts("A")) == 0


class TestInheritance:
    def test_external_superclass_floor(self):
        model = ClassModel.from_classes([ClassFacts("A", superclass="java.lang.Thread")])
        assert dit(model.get("A"), model) == 1

    def test_eight_deep_chain(self):
        classes = [ClassFacts(f"c{i}", superclass=f"c{i - 1}" if i else None) for i in range(8)]
        model = ClassModel.from_classes(classes)
        assert dit(model.get("c7"), model) == 8

    def test_noc_ignores_grandchildren(self):
        model = ClassModel.from_classes([
            ClassFacts("P"),
            ClassFacts("C1", superclass="P"),
            ClassFacts("C2", superclass="P"),
            ClassFacts("G", superclass="C1"),
        ])
        assert noc(model.get("P"), model) == 2
        assert noc(model.get("C1"), model) == 1


class TestCoupling:
    def test_field_and_call(self):
        facts = ClassFacts(
            "A",
            fields=(FieldFacts("x", "X"),),
            methods=(method("m()", invoked=[("Y", "f()")]),),
        )
        assert cbo(facts) == 2

    def test_distinct_references(self):
        facts = ClassFacts(
            "A",
            fields=tuple(FieldFacts(f"x{i}", "X") for i in range(5)),
        )
        assert cbo(facts) == 1

    def test_ca_counts_referencing_classes(self):
        model = ClassModel.from_classes([
            ClassFacts("C"),
            ClassFacts("A", fields=(FieldFacts("c", "C"),)),
            ClassFacts("B", methods=(method("m()", invoked=[("C", "f()")]),)),
        ])
        assert ca(model.get("C"), model) == 2

    def test_self_reference_ignored(self):
        model = ClassModel.from_classes([ClassFacts("A", fields=(FieldFacts("me", "A"),))])
        assert cbo(model.get("A")) == 0
        assert ca(model.get("A"), model) == 0


class TestResponseAndCohesion:
    def test_rfc_empty(self):
        assert rfc(ClassFacts("A")) == 0

    def test_rfc_shared_call(self):
        facts = ClassFacts("A", methods=(
            method("a()", invoked=[("X", "f()")]),
            method("b()", invoked=[("X", "f()")]),
        ))
        assert rfc(facts) == 3

    def test_rfc_self_call(self):
        facts = ClassFacts("A", methods=(
            method("a()", invoked=[("A", "b()")]),
            method("b()"),
        ))
        assert rfc(facts) == 2

    @pytest.mark.parametrize("usage,expected", [
        ([{"f"}, {"f"}, {"f"}], 0),
        ([{"f1"}, {"f1"}, {"f2"}], 1),
        ([{"f"}], 0),
        ([], 0),
    ])
    def test_lcom(self, usage, expected):
        facts = ClassFacts("A", methods=tuple(
            method(f"m{i}()", accessed=[("A", name) for name in fields])
            for i, fields in enumerate(usage)
        ))
        assert lcom(facts) == expected


def rename_model(model: ClassModel, mapping) -> ClassModel:
    """모델 내부 클래스 이름을 일관되게 바꾼 모델 (외부 타입은 그대로)"""
    def rename(name):
        if name is None:
            return None
        base = name.rstrip("[]")
        return mapping.get(base, base) + name[len(base):]

    def rename_signature(signature):
        params = MethodFacts(signature=signature).parameter_types
        return f"{signature.split('(', 1)[0]}({','.join(rename(p) for p in params)})"

    classes = []
    for facts in model:
        methods = tuple(
            replace(
                m,
                signature=rename_signature(m.signature),
                return_type=rename(m.return_type),
                invoked=frozenset((rename(r), rename_signature(s)) for r, s in m.invoked),
                accessed_fields=frozenset((rename(o), f) for o, f in m.accessed_fields),
                referenced_types=frozenset(rename(t) for t in m.referenced_types),
            )
            for m in facts.methods
        )
        classes.append(replace(
            facts,
            class_id=mapping[facts.class_id],
            superclass=rename(facts.superclass),
            interfaces=frozenset(rename(i) for i in facts.interfaces),
            fields=tuple(replace(f, type_name=rename(f.type_name)) for f in facts.fields),
            methods=methods,
        ))
    return ClassModel.from_classes(classes)


def synth_model(seed):
    model, _ = generate_class_facts(SynthParams(classes_per_layer=(15, 15, 15, 15), seed=seed))
    return model


class TestModelProperties:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_ca_sums_to_in_model_coupling(self, seed):
        model = synth_model(seed)
        coupled = sum(len(in_model_references(c, model)) for c in model)
        assert coupled > 0
        assert sum(ca(c, model) for c in model) == coupled

    def test_ca_sums_to_in_model_coupling_on_fixture(self, shop_model):
        coupled = sum(len(in_model_references(c, shop_model)) for c in shop_model)
        assert sum(ca(c, shop_model) for c in shop_model) == coupled

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_renaming_preserves_metrics(self, seed):
        model = synth_model(seed)
        rng = np.random.default_rng(seed)
        ids = model.class_ids()
        # 정렬 순서도 바뀌도록 무작위 순열로 새 이름 배정
        order = rng.permutation(len(ids))
        mapping = {c: f"renamed.K{int(order[i]):03d}" for i, c in enumerate(ids)}

        before = compute_metrics(model)
        after = compute_metrics(rename_model(model, mapping))
        for class_id in ids:
            assert after.rows[mapping[class_id]] == before.rows[class_id]

    def test_renaming_preserves_fixture_metrics(self, shop_model):
        mapping = {c: c.replace("shop.", "store.Z") for c in shop_model.class_ids()}
        renamed = compute_metrics(rename_model(shop_model, mapping))
        for class_id, expected in SHOP_EXPECTED.items():
            assert renamed.rows[mapping[class_id]].as_tuple() == expected

"""
정확도 평가 테스트
"""
import numpy as np
import pytest

from conftest import make_dataset, planted_dataset
from utils.evaluation import (
    ConfusionMatrix, confusion, cross_validate, evaluate_resubstitution, format_measure,
    micro_average, parse_eval_mode, precision_recall, recovery_against_truth, report_frame,
    stratified_folds
)
from utils.rules import Condition, Rule, RuleSet


def matrix(rows):
    return ConfusionMatrix(counts=np.asarray(rows, dtype=np.int64))


class TestConfusion:
    def test_cells(self):
        cm = confusion({"a": 1, "b": 2, "c": 2}, {"a": 1, "b": 1, "c": 2})
        assert cm.cell(1, 1) == 1
        assert cm.cell(1, 2) == 1
        assert cm.cell(2, 2) == 1
        assert cm.n == 3

    def test_key_mismatch(self):
        with pytest.raises(ValueError, match="key mismatch"):
            confusion({"a": 1}, {"b": 1})

    def test_layer_out_of_range(self):
        with pytest.raises(ValueError, match="outside 1..4"):
            confusion({"a": 5}, {"a": 1})

    def test_sum(self):
        total = matrix(np.eye(4)) + matrix(np.eye(4))
        assert total.cell(3, 3) == 2


class TestPrecisionRecall:
    def test_undefined_ratios_are_zero(self):
        report = precision_recall(matrix([
            [3, 0, 0, 0],
            [0, 0, 0, 0],
            [0, 0, 0, 0],
            [1, 0, 0, 0],
        ]))
        assert report.score(2).precision == 0.0
        assert report.score(2).recall == 0.0
        assert report.score(4).recall == 0.0
        assert report.score(1).precision == pytest.approx(0.75)

    def test_column_and_row_sums(self):
        # layer 1 예측 87건 중 45건 정답, 실제 layer 1은 50건
        report = precision_recall(matrix([
            [45, 5, 0, 0],
            [30, 60, 0, 0],
            [12, 0, 20, 0],
            [0, 0, 0, 10],
        ]))
        score = report.score(1)
        assert score.precision == pytest.approx(45 / 87)
        assert score.recall == pytest.approx(45 / 50)
        assert score.predicted == 87
        assert score.support == 50
        assert report.accuracy == pytest.approx(135 / 182)

    def test_empty_matrix(self):
        report = precision_recall(ConfusionMatrix())
        assert report.accuracy == 0.0
        assert report.macro_precision == 0.0

    def test_micro_average_equals_accuracy(self):
        cm = matrix([
            [5, 1, 0, 2],
            [0, 7, 1, 0],
            [3, 0, 4, 0],
            [0, 0, 0, 9],
        ])
        report = precision_recall(cm)
        micro_p, micro_r = micro_average(cm)
        assert micro_p == pytest.approx(report.accuracy)
        assert micro_r == pytest.approx(report.accuracy)

    def test_frame_has_accuracy_row(self):
        frame = report_frame(precision_recall(matrix(np.eye(4) * 2)))
        assert list(frame["layer"]) == ["1", "2", "3", "4", "accuracy"]
        assert frame.iloc[-1]["precision"] == 1.0
        assert frame.iloc[-1]["support"] == 8


class TestResubstitution:
    def test_default_only_ruleset(self):
        dataset = make_dataset([[1], [2], [1], [2]], [1, 2, 2, 2], ["CBO"])
        report = evaluate_resubstitution(RuleSet(rules=(), default_class=2), dataset)
        assert report.accuracy == 0.75
        assert report.score(1).recall == 0.0
        assert report.mode == "resub"

    def test_rule_predictions(self):
        dataset = make_dataset([[1], [2], [1], [2]], [1, 2, 1, 2], ["CBO"])
        ruleset = RuleSet(rules=(Rule((Condition("CBO", 1),), 1),), default_class=2)
        assert evaluate_resubstitution(ruleset, dataset).accuracy == 1.0


class TestCrossValidation:
    def test_folds_partition_rows(self):
        dataset = planted_dataset(n=103)
        folds = stratified_folds(dataset, 10, seed=4)
        flat = sorted(i for fold in folds for i in fold)
        assert flat == list(range(103))
        assert max(len(f) for f in folds) - min(len(f) for f in folds) <= 1

    def test_folds_are_stratified(self):
        dataset = planted_dataset(n=400)
        for fold in stratified_folds(dataset, 4, seed=1):
            labels = dataset.labels[fold]
            for layer, count in dataset.class_counts().items():
                assert abs(int(np.sum(labels == layer)) - count / 4) <= 1

    def test_planted_rules_generalize(self):
        report = cross_validate(planted_dataset(), k=5, seed=1)
        assert report.accuracy == 1.0
        assert report.mode == "cv:5"
        assert report.matrix.n == 1000

    def test_deterministic(self):
        dataset = planted_dataset(n=300, noise=0.1, seed=9)
        first = cross_validate(dataset, k=3, seed=2)
        second = cross_validate(dataset, k=3, seed=2)
        assert np.array_equal(first.matrix.counts, second.matrix.counts)

    def test_single_layer(self):
        dataset = make_dataset([[1], [2], [1], [2]], [2, 2, 2, 2], ["CBO"])
        report = cross_validate(dataset, k=2)
        assert report.accuracy == 1.0
        assert report.score(2).precision == 1.0

    @pytest.mark.parametrize("k", [1, 5])
    def test_invalid_k(self, k):
        dataset = make_dataset([[1], [2], [1], [2]], [1, 2, 1, 2], ["CBO"])
        with pytest.raises(ValueError):
            cross_validate(dataset, k=k)


class TestRecovery:
    def test_classes_without_truth_are_skipped(self):
        report = recovery_against_truth({"a": 1, "b": 2, "x": 4}, {"a": 1, "b": 3})
        assert report.matrix.n == 2
        assert report.accuracy == 0.5


class TestFormatting:
    @pytest.mark.parametrize("value,text", [
        (0.5, "0.5"), (1.0, "1"), (0.0, "0"), (0.83333, "0.833"), (0.1004, "0.1"),
    ])
    def test_format_measure(self, value, text):
        assert format_measure(value) == text

    def test_parse_eval_mode(self):
        assert parse_eval_mode("resub") is None
        assert parse_eval_mode("cv:10") == 10

    @pytest.mark.parametrize("text", ["cv:1", "cv:x", "holdout"])
    def test_parse_eval_mode_errors(self, text):
        with pytest.raises(ValueError):
            parse_eval_mode(text)

    def test_mode_label(self):
        report = precision_recall(ConfusionMatrix(), mode="cv:10")
        assert report.mode_label() == "10-fold 교차검증"

"""
정확도 평가
혼동 행렬, 레이어별 precision/recall, 층화 k-fold 교차검증
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import DEFAULT_CV_FOLDS, DEFAULT_SEED, EVAL_RESUBSTITUTION, REPORT_TEXT
from utils.discretize import NominalDataset
from utils.matching import describe_missing
from utils.model import ClassId, TentativeLayer
from utils.rules import RipperLearner, RipperParams, RuleSet, predict_dataset

logger = logging.getLogger(__name__)

LAYERS: Tuple[int, ...] = tuple(int(layer) for layer in TentativeLayer)


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[실제-1, 예측-1]"""
    counts: np.ndarray = field(default_factory=lambda: np.zeros((4, 4), dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def cell(self, actual: int, predicted: int) -> int:
        return int(self.counts[actual - 1, predicted - 1])

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(counts=self.counts + other.counts)


@dataclass(frozen=True)
class LayerScore:
    layer: int
    precision: float
    recall: float
    support: int
    predicted: int


@dataclass(frozen=True)
class EvaluationReport:
    """레이어별 precision/recall과 전체 정확도"""
    scores: Tuple[LayerScore, ...]
    accuracy: float
    mode: str
    matrix: ConfusionMatrix

    def score(self, layer: int) -> LayerScore:
        return self.scores[layer - 1]

    @property
    def macro_precision(self) -> float:
        return float(np.mean([s.precision for s in self.scores]))

    @property
    def macro_recall(self) -> float:
        return float(np.mean([s.recall for s in self.scores]))

    def mode_label(self) -> str:
        if self.mode == EVAL_RESUBSTITUTION:
            return REPORT_TEXT["mode_resub"]
        return REPORT_TEXT["mode_cv"].format(k=self.mode.split(':', 1)[1])


def _ratio(numerator: int, denominator: int) -> float:
    # 0/0은 0으로 보고
    return numerator / denominator if denominator else 0.0


def confusion(predictions: Mapping[ClassId, int], truth: Mapping[ClassId, int]) -> ConfusionMatrix:
    """
    예측과 정답으로 4x4 혼동 행렬 생성

    Args:
        predictions: 클래스별 예측 레이어
        truth: 클래스별 실제 레이어

    Returns:
        ConfusionMatrix
    """
    if set(predictions) != set(truth):
        missing = len(set(truth) - set(predictions))
        extra = len(set(predictions) - set(truth))
        raise ValueError(f"prediction/truth key mismatch ({missing} missing, {extra} extra)")

    counts = np.zeros((len(LAYERS), len(LAYERS)), dtype=np.int64)
    for class_id, actual in truth.items():
        predicted = predictions[class_id]
        if int(actual) not in LAYERS or int(predicted) not in LAYERS:
            raise ValueError(f"layer outside 1..4 for {class_id}: {actual} / {predicted}")
        counts[int(actual) - 1, int(predicted) - 1] += 1
    return ConfusionMatrix(counts=counts)


def precision_recall(cm: ConfusionMatrix, mode: str = EVAL_RESUBSTITUTION) -> EvaluationReport:
    """
    레이어별 precision (열 합 기준)과 recall (행 합 기준)

    Args:
        cm: 혼동 행렬
        mode: 평가 방식 표시 ("resub" 또는 "cv:K")

    Returns:
        EvaluationReport (분모가 0이면 0)
    """
    scores = []
    for layer in LAYERS:
        i = layer - 1
        correct = int(cm.counts[i, i])
        predicted = int(cm.counts[:, i].sum())
        support = int(cm.counts[i, :].sum())
        scores.append(LayerScore(
            layer=layer,
            precision=_ratio(correct, predicted),
            recall=_ratio(correct, support),
            support=support,
            predicted=predicted,
        ))
    accuracy = _ratio(int(np.trace(cm.counts)), cm.n)
    return EvaluationReport(scores=tuple(scores), accuracy=accuracy, mode=mode, matrix=cm)


def micro_average(cm: ConfusionMatrix) -> Tuple[float, float]:
    """마이크로 평균 (precision, recall) - 단일 레이블이면 둘 다 정확도와 같다"""
    correct = int(np.trace(cm.counts))
    predicted = int(cm.counts.sum(axis=0).sum())
    actual = int(cm.counts.sum(axis=1).sum())
    return _ratio(correct, predicted), _ratio(correct, actual)


def evaluate_resubstitution(ruleset: RuleSet, dataset: NominalDataset) -> EvaluationReport:
    """학습 데이터 그대로 평가"""
    predictions = predict_dataset(ruleset, dataset)
    report = precision_recall(confusion(predictions, dataset.truth()), EVAL_RESUBSTITUTION)
    logger.info(f"재대입 정확도 {report.accuracy:.3f}")
    return report


def stratified_folds(dataset: NominalDataset, k: int, seed: int = DEFAULT_SEED) -> List[List[int]]:
    """
    레이어별 셔플 후 순환 배정

    Args:
        dataset: 데이터셋
        k: fold 수
        seed: 셔플 시드

    Returns:
        fold별 행 인덱스 (정렬됨)
    """
    rng = np.random.default_rng(seed)
    folds: List[List[int]] = [[] for _ in range(k)]
    offset = 0
    for layer, count in dataset.class_counts().items():
        if count < k:
            logger.warning(f"layer {layer} 인스턴스 {count}개 < fold {k}개, 일부 fold에는 없음")
        members = np.flatnonzero(dataset.labels == layer)
        members = members[rng.permutation(len(members))]
        for position, index in enumerate(members):
            folds[(offset + position) % k].append(int(index))
        offset += len(members)
    return [sorted(fold) for fold in folds]


def cross_validate(dataset: NominalDataset, k: int = DEFAULT_CV_FOLDS, seed: int = DEFAULT_SEED,
                   params: Optional[RipperParams] = None) -> EvaluationReport:
    """
    층화 k-fold 교차검증 (held-out 혼동 행렬 합산)

    Args:
        dataset: 명목 데이터셋
        k: fold 수 (2 이상)
        seed: fold 배정 시드
        params: 학습 파라미터

    Returns:
        EvaluationReport (mode = "cv:k")
    """
    if k < 2:
        raise ValueError(f"cross-validation needs k >= 2, got {k}")
    if k > len(dataset):
        raise ValueError(f"k={k} exceeds dataset size {len(dataset)}")

    params = params or RipperParams(seed=seed)
    total = ConfusionMatrix(counts=np.zeros((len(LAYERS), len(LAYERS)), dtype=np.int64))
    all_indices = set(range(len(dataset)))

    for fold_index, held_out in enumerate(stratified_folds(dataset, k, seed)):
        if not held_out:
            continue
        train = dataset.subset(sorted(all_indices - set(held_out)))
        test = dataset.subset(held_out)
        ruleset = RipperLearner(params).fit(train)
        predictions = predict_dataset(ruleset, test)
        total = total + confusion(predictions, test.truth())
        logger.debug(f"fold {fold_index + 1}/{k}: 학습 {len(train)}건, 평가 {len(test)}건")

    report = precision_recall(total, mode=f"cv:{k}")
    logger.info(f"{k}-fold 교차검증 정확도 {report.accuracy:.3f}")
    return report


def parse_eval_mode(text: str) -> Optional[int]:
    """'resub' -> None, 'cv:K' -> K"""
    if text == EVAL_RESUBSTITUTION:
        return None
    if text.startswith("cv:"):
        try:
            k = int(text[3:])
        except ValueError:
            raise ValueError(f"invalid fold count in {text!r}")
        if k < 2:
            raise ValueError(f"cross-validation needs k >= 2, got {k}")
        return k
    raise ValueError(f"unknown evaluation mode {text!r} (expected 'resub' or 'cv:K')")


def format_measure(value: float) -> str:
    """소수점 3자리, 끝의 0 제거 (0.5, 1, 0)"""
    text = f"{value:.3f}".rstrip('0').rstrip('.')
    return text or "0"


def report_frame(report: EvaluationReport) -> pd.DataFrame:
    """layer,precision,recall,support,predicted 표 + accuracy 행"""
    rows = [
        {"layer": str(s.layer), "precision": round(s.precision, 6), "recall": round(s.recall, 6),
         "support": s.support, "predicted": s.predicted}
        for s in report.scores
    ]
    rows.append({"layer": "accuracy", "precision": round(report.accuracy, 6),
                 "recall": round(report.accuracy, 6), "support": report.matrix.n,
                 "predicted": report.matrix.n})
    return pd.DataFrame(rows, columns=["layer", "precision", "recall", "support", "predicted"])


def recovery_against_truth(predictions: Mapping[ClassId, int],
                           truth: Mapping[ClassId, int]) -> EvaluationReport:
    """
    예측 레이어를 심어둔 정답 레이어와 비교

    Args:
        predictions: 규칙 예측 (분석 대상 클래스 전체)
        truth: 정답 (class,layer CSV 또는 합성 시스템)

    Returns:
        공통 클래스에 대한 EvaluationReport
    """
    common = sorted(set(predictions) & set(truth))
    skipped = sorted(set(predictions) - set(truth))
    if skipped:
        logger.warning(
            f"정답이 없는 클래스 {len(skipped)}개는 복원 평가에서 제외: {describe_missing(skipped, truth)}")
    return precision_recall(
        confusion({c: predictions[c] for c in common}, {c: int(truth[c]) for c in common}),
        mode=EVAL_RESUBSTITUTION,
    )

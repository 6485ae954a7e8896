"""
RIPPER 순서 규칙 학습
grow/prune 반복, FOIL 이득, MDL 기반 중단과 최적화 패스

규칙 텍스트 형식:
    1. IF (CBOBin = 4) and (NPMBin = 5) THEN layerBin=3
    2. ELSE layerBin=1
"""
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    DEFAULT_SEED, DEFAULT_FOLDS, DEFAULT_OPT_PASSES, DL_SLACK_BITS, MAX_PRUNE_ERROR, REPORT_TEXT
)
from utils.discretize import NominalDataset
from utils.errors import ParseError
from utils.matching import did_you_mean
from utils.model import ClassId

logger = logging.getLogger(__name__)

GAIN_TOLERANCE = 1e-12
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Condition:
    """속성 구간 일치 조건 (attribute = bin)"""
    attribute: str
    value: int

    def holds(self, row: Mapping[str, int]) -> bool:
        # 속성이 없으면 조건 불성립
        return row.get(self.attribute) == self.value

    def __str__(self) -> str:
        return f"({self.attribute}Bin = {self.value})"


@dataclass(frozen=True)
class Rule:
    """조건 논리곱 -> 레이어"""
    conditions: Tuple[Condition, ...]
    consequent: int

    def __post_init__(self):
        attributes = [c.attribute for c in self.conditions]
        if len(set(attributes)) != len(attributes):
            raise ValueError(f"duplicate attribute in rule: {attributes}")

    @property
    def attributes(self) -> Tuple[str, ...]:
        return tuple(c.attribute for c in self.conditions)

    def covers(self, row: Mapping[str, int]) -> bool:
        return all(c.holds(row) for c in self.conditions)

    def extended(self, condition: Condition) -> "Rule":
        return Rule(conditions=self.conditions + (condition,), consequent=self.consequent)

    def truncated(self, length: int) -> "Rule":
        return Rule(conditions=self.conditions[:length], consequent=self.consequent)


@dataclass(frozen=True)
class RipperParams:
    """학습 파라미터 (folds=3이면 grow:prune = 2:1)"""
    seed: int = DEFAULT_SEED
    folds: int = DEFAULT_FOLDS
    opt_passes: int = DEFAULT_OPT_PASSES

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if self.opt_passes < 0:
            raise ValueError(f"opt_passes must be >= 0, got {self.opt_passes}")


@dataclass(frozen=True)
class RuleSet:
    """순서 규칙 목록 + 기본 레이어 (첫 번째로 일치하는 규칙 적용)"""
    rules: Tuple[Rule, ...]
    default_class: int
    params: RipperParams = field(default_factory=RipperParams)

    def predict(self, row: Mapping[str, int]) -> int:
        for rule in self.rules:
            if rule.covers(row):
                return rule.consequent
        return self.default_class

    def attributes(self) -> List[str]:
        seen: List[str] = []
        for rule in self.rules:
            for attribute in rule.attributes:
                if attribute not in seen:
                    seen.append(attribute)
        return seen


def predict(ruleset: RuleSet, row: Mapping[str, int]) -> int:
    """첫 번째로 일치하는 규칙의 레이어, 없으면 기본 레이어"""
    return ruleset.predict(row)


def predict_dataset(ruleset: RuleSet, dataset: NominalDataset) -> Dict[ClassId, int]:
    """데이터셋 모든 행 예측"""
    return {
        class_id: ruleset.predict(dataset.row(i))
        for i, class_id in enumerate(dataset.class_ids)
    }


# ---------------------------------------------------------------------------
# 행렬 연산 보조
# ---------------------------------------------------------------------------

def _coverage(rule: Rule, data: NominalDataset) -> np.ndarray:
    mask = np.ones(len(data), dtype=bool)
    for condition in rule.conditions:
        if condition.attribute not in data.attributes:
            return np.zeros(len(data), dtype=bool)
        j = data.attributes.index(condition.attribute)
        mask &= data.values[:, j] == condition.value
    return mask


def _ruleset_coverage(rules: Sequence[Rule], data: NominalDataset) -> np.ndarray:
    mask = np.zeros(len(data), dtype=bool)
    for rule in rules:
        mask |= _coverage(rule, data)
    return mask


def _log2_binomial(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return float((gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / LN2)


def _foil(p0: int, n0: int, p1: int, n1: int) -> float:
    if p1 == 0:
        return -math.inf
    return p1 * (math.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))


# ---------------------------------------------------------------------------
# grow / prune
# ---------------------------------------------------------------------------

def foil_gain(candidate: Condition, rule: Rule, grow: NominalDataset, target: int) -> float:
    """
    FOIL 정보 이득

    p1 * (log2(p1/(p1+n1)) - log2(p0/(p0+n0)))

    Args:
        candidate: 추가할 조건
        rule: 현재 규칙
        grow: grow 집합
        target: 양성 레이어

    Returns:
        이득 (bit). 추가 후 양성이 없으면 -inf
    """
    positive = grow.labels == target
    before = _coverage(rule, grow)
    after = _coverage(rule.extended(candidate), grow)
    p0 = int(np.sum(before & positive))
    n0 = int(np.sum(before & ~positive))
    p1 = int(np.sum(after & positive))
    n1 = int(np.sum(after & ~positive))
    if p0 == 0:
        raise ValueError("rule covers no positive instance in the grow set")
    return _foil(p0, n0, p1, n1)


def grow_rule(target: int, grow: NominalDataset, start: Optional[Rule] = None) -> Rule:
    """
    FOIL 이득이 최대인 조건을 탐욕적으로 추가

    음성을 하나도 덮지 않거나 양의 이득을 주는 조건이 없으면 중단.
    동점이면 속성 순서, 그다음 구간 번호 오름차순.

    Args:
        target: 양성 레이어
        grow: grow 집합 (양성 1개 이상)
        start: 이어서 키울 규칙 (없으면 빈 규칙)

    Returns:
        Rule
    """
    positive = grow.labels == target
    if not positive.any():
        raise ValueError(f"grow set has no instance of layer {target}")

    rule = start if start is not None else Rule(conditions=(), consequent=target)
    covered = _coverage(rule, grow)

    while True:
        p0 = int(np.sum(covered & positive))
        n0 = int(np.sum(covered & ~positive))
        if n0 == 0 or p0 == 0:
            break

        used = set(rule.attributes)
        best: Optional[Tuple[float, Condition, np.ndarray]] = None
        for j, attribute in enumerate(grow.attributes):
            if attribute in used:
                continue
            column = grow.values[:, j]
            for value in range(1, grow.domain_sizes[j] + 1):
                mask = covered & (column == value)
                p1 = int(np.sum(mask & positive))
                if p1 == 0:
                    continue
                n1 = int(np.sum(mask & ~positive))
                gain = _foil(p0, n0, p1, n1)
                threshold = best[0] if best is not None else 0.0
                if gain > threshold + GAIN_TOLERANCE:
                    best = (gain, Condition(attribute, value), mask)

        if best is None:
            break
        rule = rule.extended(best[1])
        covered = best[2]

    return rule


def rule_worth(rule: Rule, prune: NominalDataset, target: int) -> float:
    """(p - n) / (p + n), 아무것도 덮지 않으면 -1"""
    mask = _coverage(rule, prune)
    positive = prune.labels == target
    p = int(np.sum(mask & positive))
    n = int(np.sum(mask & ~positive))
    if p + n == 0:
        return -1.0
    return (p - n) / (p + n)


def prune_rule(rule: Rule, prune: NominalDataset, target: Optional[int] = None) -> Rule:
    """
    끝 조건들을 잘라낸 버전 중 worth가 최대인 규칙 (동점이면 짧은 쪽)

    Args:
        rule: grow_rule 결과
        prune: prune 집합 (비어있으면 그대로 반환)
        target: 양성 레이어 (기본: 규칙의 결론)

    Returns:
        잘라낸 Rule
    """
    if len(prune) == 0:
        return rule
    target = rule.consequent if target is None else target

    best_rule = rule.truncated(0)
    best_worth = rule_worth(best_rule, prune, target)
    for length in range(1, len(rule.conditions) + 1):
        candidate = rule.truncated(length)
        worth = rule_worth(candidate, prune, target)
        if worth > best_worth + GAIN_TOLERANCE:
            best_rule, best_worth = candidate, worth
    return best_rule


# ---------------------------------------------------------------------------
# 기술 길이 (MDL)
# ---------------------------------------------------------------------------

def theory_bits(rule: Rule, pool_size: int) -> float:
    """0.5 * (log2(k + 1) + log2 C(a, k)), a = 가능한 조건 수"""
    k = len(rule.conditions)
    return 0.5 * (math.log2(k + 1) + _log2_binomial(pool_size, k))


def exception_bits(covered: int, uncovered: int, false_pos: int, false_neg: int) -> float:
    """log2 C(cov, fp) + log2 C(uncov, fn) + log2(cov + 1) + log2(uncov + 1)"""
    return (
        _log2_binomial(covered, false_pos)
        + _log2_binomial(uncovered, false_neg)
        + math.log2(covered + 1)
        + math.log2(uncovered + 1)
    )


def ruleset_description_length(rules: Sequence[Rule], dataset: NominalDataset,
                               target: Optional[int] = None) -> float:
    """
    규칙 집합의 전체 기술 길이 (theory + exception bits)

    Args:
        rules: 같은 레이어를 예측하는 규칙들
        dataset: 해당 레이어 단계의 데이터
        target: 양성 레이어 (기본: 첫 규칙의 결론)

    Returns:
        bit 단위 기술 길이
    """
    if target is None:
        if not rules:
            raise ValueError("target is required for an empty rule list")
        target = rules[0].consequent

    pool = int(sum(dataset.domain_sizes))
    theory = sum(theory_bits(rule, pool) for rule in rules)

    positive = dataset.labels == target
    covered = _ruleset_coverage(rules, dataset)
    cov = int(np.sum(covered))
    uncov = len(dataset) - cov
    fp = int(np.sum(covered & ~positive))
    fn = int(np.sum(~covered & positive))
    return theory + exception_bits(cov, uncov, fp, fn)


# ---------------------------------------------------------------------------
# RIPPER
# ---------------------------------------------------------------------------

class RipperLearner:
    """
    RIPPER 학습기

    레이어를 빈도 오름차순으로 처리하고 가장 많은 레이어를 기본값으로 둔다.
    모든 난수는 seed 하나에서 나온다.
    """

    def __init__(self, params: Optional[RipperParams] = None):
        self.logger = logging.getLogger(self.__class__.__name__)
        self.params = params or RipperParams()
        self._rng = np.random.default_rng(self.params.seed)

    def fit(self, dataset: NominalDataset) -> RuleSet:
        """
        데이터셋에서 RuleSet 학습

        Args:
            dataset: 명목 데이터셋 (클래스명 정렬)

        Returns:
            RuleSet (단일 레이어면 기본 규칙만)
        """
        if len(dataset) == 0:
            raise ValueError("cannot learn rules from an empty dataset")

        self._rng = np.random.default_rng(self.params.seed)
        counts = dataset.class_counts()
        order = sorted(counts, key=lambda layer: (counts[layer], layer))
        default = order[-1]

        if len(order) == 1:
            self.logger.info(f"레이어가 하나뿐이라 기본 규칙만 생성 (layer {default})")
            return RuleSet(rules=(), default_class=default, params=self.params)
        if not dataset.attributes:
            raise ValueError("cannot learn rules without attributes")

        rules: List[Rule] = []
        for position, target in enumerate(order[:-1]):
            remaining = set(order[position:])
            indices = [i for i, label in enumerate(dataset.labels) if int(label) in remaining]
            data = dataset.subset(indices)
            learned = self._learn_class(data, target)
            self.logger.debug(f"layer {target}: 규칙 {len(learned)}개 (데이터 {len(data)}건)")
            rules.extend(learned)

        self.logger.info(f"규칙 학습 완료: 규칙 {len(rules)}개, 기본 layer {default}")
        return RuleSet(rules=tuple(rules), default_class=default, params=self.params)

    def _split(self, data: NominalDataset, target: int) -> Tuple[NominalDataset, NominalDataset]:
        """레이어별 층화 셔플 후 1/folds를 prune 집합으로"""
        grow_idx: List[int] = []
        prune_idx: List[int] = []
        for label in sorted(set(int(v) for v in data.labels)):
            members = np.flatnonzero(data.labels == label)
            members = members[self._rng.permutation(len(members))]
            n_prune = len(members) // self.params.folds
            if label == target:
                # grow 집합에 양성이 최소 1개
                n_prune = min(n_prune, len(members) - 1)
            prune_idx.extend(int(i) for i in members[:n_prune])
            grow_idx.extend(int(i) for i in members[n_prune:])
        return data.subset(grow_idx), data.subset(prune_idx)

    def _learn_class(self, data: NominalDataset, target: int) -> List[Rule]:
        rules = self._cover(data, target, [])
        rules = self._delete_excess(rules, data, target)
        for _ in range(self.params.opt_passes):
            rules = self._optimize(rules, data, target)
            rules = self._cover(data, target, rules)
            rules = self._delete_excess(rules, data, target)
        return rules

    def _cover(self, data: NominalDataset, target: int, rules: Sequence[Rule]) -> List[Rule]:
        """덮이지 않은 양성이 남아있는 동안 grow/prune 반복"""
        rules = list(rules)
        positive = data.labels == target
        uncovered = ~_ruleset_coverage(rules, data)
        min_dl = ruleset_description_length(rules, data, target)

        while np.any(uncovered & positive):
            working = data.subset(np.flatnonzero(uncovered).tolist())
            grow, prune = self._split(working, target)
            rule = prune_rule(grow_rule(target, grow), prune, target)

            prune_mask = _coverage(rule, prune)
            if prune_mask.any():
                errors = int(np.sum(prune_mask & (prune.labels != target)))
                if errors / int(np.sum(prune_mask)) > MAX_PRUNE_ERROR:
                    break

            dl = ruleset_description_length(rules + [rule], data, target)
            if dl > min_dl + DL_SLACK_BITS:
                break

            newly = _coverage(rule, data) & uncovered
            if not newly.any():
                break
            rules.append(rule)
            min_dl = min(min_dl, dl)
            uncovered &= ~newly
        return rules

    def _delete_excess(self, rules: Sequence[Rule], data: NominalDataset, target: int) -> List[Rule]:
        """뒤에서부터 지워서 기술 길이가 줄어드는 규칙 삭제"""
        rules = list(rules)
        for index in range(len(rules) - 1, -1, -1):
            current = ruleset_description_length(rules, data, target)
            candidate = rules[:index] + rules[index + 1:]
            if ruleset_description_length(candidate, data, target) < current:
                rules = candidate
        return rules

    def _optimize(self, rules: Sequence[Rule], data: NominalDataset, target: int) -> List[Rule]:
        """규칙마다 original / replacement / revision 중 기술 길이 최소인 것 선택"""
        rules = list(rules)
        for index, original in enumerate(rules):
            earlier = _ruleset_coverage(rules[:index], data)
            working = data.subset(np.flatnonzero(~earlier).tolist())
            if not np.any(working.labels == target):
                continue
            grow, prune = self._split(working, target)

            variants = [original]
            variants.append(prune_rule(grow_rule(target, grow), prune, target))
            if np.any(_coverage(original, grow) & (grow.labels == target)):
                variants.append(prune_rule(grow_rule(target, grow, start=original), prune, target))

            best_rule = original
            best_dl = ruleset_description_length(rules, data, target)
            for variant in variants[1:]:
                trial = rules[:index] + [variant] + rules[index + 1:]
                dl = ruleset_description_length(trial, data, target)
                if dl < best_dl - GAIN_TOLERANCE:
                    best_rule, best_dl = variant, dl
            rules[index] = best_rule
        return rules


def learn_ripper(dataset: NominalDataset, seed: int = DEFAULT_SEED,
                 folds: int = DEFAULT_FOLDS, opt_passes: int = DEFAULT_OPT_PASSES) -> RuleSet:
    """
    RIPPER 규칙 학습

    Args:
        dataset: 명목 데이터셋
        seed: grow/prune 분할 난수 시드
        folds: 1/folds를 prune 집합으로 사용
        opt_passes: 최적화 패스 수

    Returns:
        RuleSet
    """
    params = RipperParams(seed=seed, folds=folds, opt_passes=opt_passes)
    return RipperLearner(params).fit(dataset)


# ---------------------------------------------------------------------------
# 직렬화
# ---------------------------------------------------------------------------

_LINE_PATTERN = re.compile(
    r"^(?P<index>\d+)\.\s*(?:IF\s+(?P<body>.*?)\s*THEN\s+layerBin\s*=\s*(?P<layer>\d+)"
    r"|ELSE\s+layerBin\s*=\s*(?P<default>\d+))\s*$"
)
_CONDITION_PATTERN = re.compile(r"\(\s*(?P<attribute>\w+?)Bin\s*=\s*(?P<value>\d+)\s*\)")
ALWAYS_TRUE = "TRUE"


def format_rule(rule: Rule) -> str:
    """
    규칙 한 줄 (번호 제외)

    조건이 없는 규칙은 `IF TRUE THEN ...`으로 쓴다. 기본 문법에 없는 확장이며
    parse_rules만 이를 다시 읽는다. 가지치기가 조건을 모두 지운 규칙이 이 형태가 된다.
    """
    body = ' and '.join(str(c) for c in rule.conditions) or ALWAYS_TRUE
    return f"IF {body} THEN layerBin={rule.consequent}"


def format_rules(ruleset: RuleSet) -> str:
    """
    번호 붙은 IF ... THEN 줄 + 마지막 ELSE 줄

    Args:
        ruleset: 규칙 집합

    Returns:
        줄바꿈으로 끝나는 텍스트
    """
    lines = [f"{i}. {format_rule(rule)}" for i, rule in enumerate(ruleset.rules, start=1)]
    lines.append(f"{len(ruleset.rules) + 1}. ELSE layerBin={ruleset.default_class}")
    return '\n'.join(lines) + '\n'


def _parse_conditions(body: str, lineno: int, attributes: Optional[Sequence[str]],
                      source: Optional[str]) -> Tuple[Condition, ...]:
    if body.strip().upper() == ALWAYS_TRUE:
        return ()

    conditions = []
    for match in _CONDITION_PATTERN.finditer(body):
        attribute = match.group("attribute")
        if attributes is not None and attribute not in attributes:
            raise ParseError(
                f"unknown attribute {attribute}{did_you_mean(attribute, attributes)}",
                line=lineno, column=match.start() + 1, source=source)
        conditions.append(Condition(attribute, int(match.group("value"))))

    leftover = _CONDITION_PATTERN.sub(' ', body)
    if leftover.replace('and', ' ').strip() or not conditions:
        raise ParseError(f"malformed condition list {body!r}", line=lineno, source=source)
    return tuple(conditions)


def parse_rules(text: str, attributes: Optional[Sequence[str]] = None,
                source: Optional[str] = None) -> RuleSet:
    """
    format_rules 출력 파싱

    "(CBOBin = 3)THEN", "(LCOMBin=1)" 같은 띄어쓰기 변형 허용

    Args:
        text: 규칙 텍스트
        attributes: 알려진 속성 목록 (주어지면 모르는 속성은 오류)
        source: 오류 메시지용 입력 이름

    Returns:
        RuleSet (학습 파라미터는 기본값)
    """
    rules: List[Rule] = []
    default: Optional[int] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if default is not None:
            raise ParseError("rule after ELSE line", line=lineno, source=source)
        match = _LINE_PATTERN.match(line)
        if not match:
            raise ParseError(f"malformed rule line {line!r}", line=lineno, source=source)
        if match.group("default") is not None:
            default = int(match.group("default"))
            continue
        conditions = _parse_conditions(match.group("body"), lineno, attributes, source)
        try:
            rules.append(Rule(conditions=conditions, consequent=int(match.group("layer"))))
        except ValueError as e:
            raise ParseError(str(e), line=lineno, source=source)

    if default is None:
        raise ParseError("missing ELSE line", source=source)
    return RuleSet(rules=tuple(rules), default_class=default)


def rules_to_records(ruleset: RuleSet) -> List[Dict]:
    """규칙 하나당 레코드 하나 (마지막은 기본 규칙)"""
    records = []
    for index, rule in enumerate(ruleset.rules, start=1):
        records.append({
            "index": index,
            "conditions": [{"attribute": c.attribute, "bin": c.value} for c in rule.conditions],
            "layer": rule.consequent,
            "default": False,
        })
    records.append({
        "index": len(ruleset.rules) + 1,
        "conditions": [],
        "layer": ruleset.default_class,
        "default": True,
    })
    return records


def rules_from_records(records: Sequence[Mapping]) -> RuleSet:
    rules = []
    default = None
    for record in sorted(records, key=lambda r: r["index"]):
        if record.get("default"):
            default = int(record["layer"])
            continue
        conditions = tuple(Condition(c["attribute"], int(c["bin"])) for c in record["conditions"])
        rules.append(Rule(conditions=conditions, consequent=int(record["layer"])))
    if default is None:
        raise ValueError("records contain no default rule")
    return RuleSet(rules=tuple(rules), default_class=default)


# ---------------------------------------------------------------------------
# 레이어별 규칙 프로파일
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RuleProfile:
    """레이어 규칙이 사용하는 속성과 구간 수준"""
    layer: int
    attribute: str
    bins: Tuple[int, ...]
    level: str


def bin_level(value: float, domain_size: int) -> str:
    """구간 위치를 낮음/중간/높음으로"""
    if domain_size <= 1:
        return REPORT_TEXT["level_medium"]
    position = (value - 1) / (domain_size - 1)
    if position < 1 / 3:
        return REPORT_TEXT["level_low"]
    if position > 2 / 3:
        return REPORT_TEXT["level_high"]
    return REPORT_TEXT["level_medium"]


def summarize_rule_profiles(ruleset: RuleSet, domain_sizes: Mapping[str, int]) -> List[RuleProfile]:
    """
    레이어별로 규칙이 검사하는 속성과 구간 수준 요약

    Args:
        ruleset: 학습된 규칙
        domain_sizes: 속성별 구간 수

    Returns:
        (레이어, 속성) 순으로 정렬된 RuleProfile 리스트
    """
    collected: Dict[Tuple[int, str], List[int]] = {}
    for rule in ruleset.rules:
        for condition in rule.conditions:
            collected.setdefault((rule.consequent, condition.attribute), []).append(condition.value)

    order = {a: i for i, a in enumerate(domain_sizes)}
    profiles = []
    for (layer, attribute), values in sorted(
            collected.items(), key=lambda item: (item[0][0], order.get(item[0][1], len(order)), item[0][1])):
        bins = tuple(sorted(set(values)))
        mean = sum(values) / len(values)
        profiles.append(RuleProfile(
            layer=layer,
            attribute=attribute,
            bins=bins,
            level=bin_level(mean, domain_sizes.get(attribute, max(bins))),
        ))
    return profiles

"""
리포트 표 컴포넌트
기술 통계 + 구간 표, 상관 행렬, 정확도 표, 규칙 프로파일 (Markdown / CSV)
"""
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

import pandas as pd
from tabulate import tabulate

import sys
sys.path.insert(0, str(Path(__file__).parent.parent.parent))
from config import CORRELATION_COLUMNS, DLAYER_COLUMN, LAYER_NAMES, REPORT_TEXT
from utils.discretize import BinningScheme
from utils.evaluation import EvaluationReport, format_measure
from utils.layering import BinEdges
from utils.rules import RuleProfile
from utils.stats import CorrelationMatrix, DescriptiveStats, correlation_frame


def format_number(value: float, decimal: str = "dot", digits: int = 3) -> str:
    """소수점 digits자리 (comma 모드면 소수점을 쉼표로)"""
    text = f"{value:.{digits}f}"
    return text.replace('.', ',') if decimal == "comma" else text


def render_markdown(frame: pd.DataFrame, title: Optional[str] = None, showindex: bool = False) -> str:
    """
    DataFrame을 GitHub Markdown 표로

    Args:
        frame: 문자열 셀 표
        title: 제목 (## 헤더)
        showindex: 인덱스 컬럼 표시 여부

    Returns:
        Markdown 문자열 (줄바꿈으로 끝남)
    """
    headers = list(frame.columns)
    if showindex:
        headers = [frame.index.name or ""] + headers
    body = tabulate(
        frame,
        headers=headers,
        tablefmt="github",
        showindex=showindex,
        disable_numparse=True,
    )
    parts = []
    if title:
        parts.append(f"## {title}\n\n")
    parts.append(body + "\n")
    return ''.join(parts)


def descriptive_frame(stats: Mapping[str, DescriptiveStats], edges: BinEdges,
                      scheme: Optional[BinningScheme] = None, decimal: str = "dot") -> pd.DataFrame:
    """
    기술 통계 + 구간 표 (D-layer 행은 4개 잠정 구간, 메트릭 행은 MDLP 구간)

    Args:
        stats: describe_table 결과
        edges: D-layer 구간
        scheme: 메트릭 구간 (없거나 경계 없는 속성은 빈 칸)
        decimal: 'dot' 또는 'comma'

    Returns:
        Attribute, Min, Max, Mean, Std. Deviation, Bin=1.. 컬럼 표
    """
    labels: Dict[str, List[str]] = {DLAYER_COLUMN: edges.labels()}
    if scheme is not None:
        for attribute in scheme.active_attributes():
            labels[attribute] = scheme.range_labels(attribute)
    width = max(len(v) for v in labels.values())

    rows = []
    for attribute in CORRELATION_COLUMNS:
        if attribute not in stats:
            continue
        s = stats[attribute]
        row = {
            "Attribute": attribute,
            "Min": f"{s.minimum:g}",
            "Max": f"{s.maximum:g}",
            "Mean": format_number(s.mean, decimal),
            "Std. Deviation": format_number(s.std, decimal),
        }
        bins = labels.get(attribute, [])
        for k in range(width):
            row[f"Bin={k + 1}"] = bins[k] if k < len(bins) else ""
        rows.append(row)

    columns = ["Attribute", "Min", "Max", "Mean", "Std. Deviation"] + [f"Bin={k + 1}" for k in range(width)]
    return pd.DataFrame(rows, columns=columns)


def correlations_long_frame(matrix: CorrelationMatrix) -> pd.DataFrame:
    """a,b,rho,p_value,flag,n 상삼각 목록 (CSV용)"""
    rows = []
    attrs = list(matrix.attributes)
    for i, a in enumerate(attrs):
        for b in attrs[i:]:
            entry = matrix.entry(a, b)
            rows.append({
                "a": a,
                "b": b,
                "rho": "" if entry.rho is None else f"{entry.rho:.6f}",
                "p_value": "" if entry.p_value is None else f"{entry.p_value:.6g}",
                "flag": entry.flag,
                "n": entry.n,
            })
    return pd.DataFrame(rows, columns=["a", "b", "rho", "p_value", "flag", "n"])


def render_correlations(matrix: CorrelationMatrix, decimal: str = "dot",
                        selected: Sequence[str] = ()) -> str:
    """상관 행렬 Markdown (별표 포함) + 선택된 메트릭 목록"""
    text = render_markdown(
        correlation_frame(matrix, decimal),
        title=REPORT_TEXT["correlations_title"],
        showindex=True,
    )
    text += f"\n{DLAYER_COLUMN}: {', '.join(selected) if selected else '-'}\n"
    return text


def accuracy_frame(reports: Mapping[str, EvaluationReport]) -> pd.DataFrame:
    """
    프로젝트별 precision/recall 표 (레이어 1-4 + 정확도 행)

    Args:
        reports: 프로젝트명 -> EvaluationReport

    Returns:
        D-layer, <프로젝트> Precision, <프로젝트> Recall ... 컬럼
    """
    columns = [DLAYER_COLUMN]
    for name in reports:
        columns.extend([f"{name} Precision", f"{name} Recall"])

    rows = []
    for layer in LAYER_NAMES:
        row = {DLAYER_COLUMN: str(layer)}
        for name, report in reports.items():
            score = report.score(layer)
            row[f"{name} Precision"] = format_measure(score.precision)
            row[f"{name} Recall"] = format_measure(score.recall)
        rows.append(row)

    accuracy = {DLAYER_COLUMN: "Accuracy"}
    for name, report in reports.items():
        accuracy[f"{name} Precision"] = format_measure(report.accuracy)
        accuracy[f"{name} Recall"] = format_measure(report.accuracy)
    rows.append(accuracy)
    return pd.DataFrame(rows, columns=columns)


def render_accuracy(reports: Mapping[str, EvaluationReport], title: Optional[str] = None) -> str:
    """정확도 표 Markdown (평가 방식 표시 포함)"""
    text = render_markdown(accuracy_frame(reports), title=title or REPORT_TEXT["accuracy_title"])
    modes = sorted({report.mode_label() for report in reports.values()})
    if modes:
        text += f"\n{', '.join(modes)}\n"
    return text


def rule_profiles_frame(profiles: Sequence[RuleProfile]) -> pd.DataFrame:
    rows = [{
        "Layer": f"{p.layer} ({LAYER_NAMES.get(p.layer, '?')})",
        "Attribute": p.attribute,
        "Bins": ', '.join(str(b) for b in p.bins),
        "Level": p.level,
    } for p in profiles]
    return pd.DataFrame(rows, columns=["Layer", "Attribute", "Bins", "Level"])


def render_rule_profiles(profiles: Sequence[RuleProfile], default_class: int) -> str:
    text = render_markdown(rule_profiles_frame(profiles), title=REPORT_TEXT["profiles_title"])
    text += f"\nELSE: {default_class} ({LAYER_NAMES.get(default_class, '?')})\n"
    return text


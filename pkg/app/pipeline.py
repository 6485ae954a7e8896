"""
파이프라인 오케스트레이션
입력 -> D-layer -> 메트릭 -> 상관분석 -> 이산화 -> 규칙 -> 평가 -> 리포트 번들
"""
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    BUNDLE_FILES, DEFAULT_ALPHA, DEFAULT_FOLDS, DEFAULT_OPT_PASSES, DEFAULT_SEED,
    EVAL_RESUBSTITUTION, METRIC_NAMES, REPORT_TEXT
)
from app.components.tables import (
    correlations_long_frame, descriptive_frame, render_accuracy, render_correlations,
    render_markdown, render_rule_profiles
)
from parsers.ckjm import CkjmParser
from parsers.class_facts import ClassFactsParser
from parsers.edges import EdgeListParser
from parsers.tables import TruthParser, frame_to_csv
from utils.database import complete_run, create_run, get_session
from utils.discretize import BinningScheme, NominalDataset, apply_bins, fit_scheme
from utils.errors import LayerFinderError, PipelineHalt
from utils.evaluation import (
    EvaluationReport, cross_validate, evaluate_resubstitution, parse_eval_mode,
    recovery_against_truth, report_frame
)
from utils.layering import (
    BinEdges, DependencyGraph, LayerAssignment, assign_dlayers, bin_tentative, build_graph,
    condense, layer_assignment_frame, layer_counts
)
from utils.metrics import DEFAULT_OPTIONS, MetricOptions, compute_metrics
from utils.model import ClassId, ClassModel, MetricsTable, TentativeLayer
from utils.rules import (
    RipperLearner, RipperParams, RuleSet, format_rules, predict_dataset, rules_to_records,
    summarize_rule_profiles
)
from utils.stats import (
    CorrelationMatrix, DescriptiveStats, correlation_matrix, describe_table, select_correlated
)
from utils.synth import SynthParams, generate, generate_class_facts

logger = logging.getLogger(__name__)

INPUT_CLASS_FACTS = "class-facts"
INPUT_METRICS_EDGES = "metrics+edges"
INPUT_SYNTH = "synth"
INPUT_MODES = (INPUT_CLASS_FACTS, INPUT_METRICS_EDGES, INPUT_SYNTH)
DECIMAL_MODES = ("dot", "comma")
SUPERVISE_MODES = ("tentative", "dlayer")


@dataclass(frozen=True)
class PipelineConfig:
    """파이프라인 실행 설정 (CLI 플래그에서 생성)"""
    input_mode: str
    class_facts: Optional[Path] = None
    metrics: Optional[Path] = None
    edges: Optional[Path] = None
    truth: Optional[Path] = None
    synth_params: SynthParams = field(default_factory=SynthParams)
    synth_facts: bool = False
    alpha: float = DEFAULT_ALPHA
    seed: int = DEFAULT_SEED
    folds: int = DEFAULT_FOLDS
    opt_passes: int = DEFAULT_OPT_PASSES
    eval_mode: str = EVAL_RESUBSTITUTION
    out_dir: Optional[Path] = None
    decimal: str = "dot"
    supervise: str = "tentative"
    filter_by_significance: bool = True
    metric_options: MetricOptions = DEFAULT_OPTIONS
    project: str = "project"
    history: Optional[Path] = None

    @property
    def ripper_params(self) -> RipperParams:
        return RipperParams(seed=self.seed, folds=self.folds, opt_passes=self.opt_passes)

    def validate(self, check_paths: bool = True) -> List[str]:
        """
        설정 검사

        Args:
            check_paths: 입력 파일 존재 여부까지 확인

        Returns:
            문제 목록 (비어있으면 정상)
        """
        problems = []
        if self.input_mode not in INPUT_MODES:
            problems.append(f"unknown input mode {self.input_mode!r}")

        required = {
            INPUT_CLASS_FACTS: ("class_facts",),
            INPUT_METRICS_EDGES: ("metrics", "edges"),
            INPUT_SYNTH: (),
        }.get(self.input_mode, ())
        for name in required:
            if getattr(self, name) is None:
                problems.append(f"--{name.replace('_', '-')} is required in {self.input_mode} mode")
        for name in ("class_facts", "metrics", "edges"):
            if name not in required and getattr(self, name) is not None:
                problems.append(f"--{name.replace('_', '-')} is not used in {self.input_mode} mode")

        if check_paths:
            for name in required + ("truth",):
                path = getattr(self, name)
                if path is not None and not Path(path).exists():
                    problems.append(f"{path} does not exist")

        if not 0.0 < self.alpha < 1.0:
            problems.append(f"alpha must be in (0, 1), got {self.alpha}")
        if self.folds < 2:
            problems.append(f"folds must be >= 2, got {self.folds}")
        if self.opt_passes < 0:
            problems.append(f"opt passes must be >= 0, got {self.opt_passes}")
        try:
            parse_eval_mode(self.eval_mode)
        except ValueError as e:
            problems.append(str(e))
        if self.decimal not in DECIMAL_MODES:
            problems.append(f"decimal must be one of {DECIMAL_MODES}")
        if self.supervise not in SUPERVISE_MODES:
            problems.append(f"supervise must be one of {SUPERVISE_MODES}")
        if self.input_mode == INPUT_SYNTH:
            problems.extend(self.synth_params.validate())
        return problems


@dataclass(frozen=True)
class Inputs:
    """입력 단계 결과"""
    graph: DependencyGraph
    metrics: MetricsTable
    model: Optional[ClassModel] = None
    truth: Optional[Dict[ClassId, TentativeLayer]] = None


@dataclass(frozen=True)
class LayerResult:
    assign: LayerAssignment
    edges: BinEdges
    tentative: Dict[ClassId, TentativeLayer]
    scc_count: int


@dataclass(frozen=True)
class StatsResult:
    descriptive: Dict[str, DescriptiveStats]
    matrix: CorrelationMatrix
    significant: List[str]
    selected: List[str]


@dataclass
class ReportBundle:
    """파일명 -> 내용 (모두 결정적)"""
    files: Dict[str, str] = field(default_factory=dict)
    summary: Dict = field(default_factory=dict)

    def update(self, artifacts: Mapping[str, str]):
        self.files.update(artifacts)

    def write(self, out_dir: Path) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(self.files):
            path = out_dir / name
            path.write_bytes(self.files[name].encode('utf-8'))
            written.append(path)
        logger.info(f"리포트 {len(written)}개 파일 저장: {out_dir}")
        return written


# ---------------------------------------------------------------------------
# 단계 함수 (run과 단계별 서브커맨드가 공유)
# ---------------------------------------------------------------------------

def restrict_to_metrics(edges, metrics: MetricsTable) -> DependencyGraph:
    """메트릭 표에 있는 클래스만 노드로 두고, 범위 밖 엣지는 제거"""
    graph = DependencyGraph.from_edges(((e.source, e.target) for e in edges), nodes=metrics.class_ids())
    graph, dropped = graph.restrict(metrics.class_ids())
    if dropped:
        logger.warning(f"분석 대상 밖 클래스와 연결된 엣지 {dropped}개 제거")
    return graph


def load_inputs(config: PipelineConfig) -> Inputs:
    """
    입력 모드에 따라 그래프와 메트릭 표 준비

    Args:
        config: 파이프라인 설정

    Returns:
        Inputs (class-facts 모드는 모델 포함)
    """
    truth = TruthParser().parse_file(config.truth) if config.truth else None

    if config.input_mode == INPUT_CLASS_FACTS:
        model = ClassFactsParser().parse_file(config.class_facts)
        graph = build_graph(model)
        metrics = stage_metrics(model, config.metric_options)
        return Inputs(graph=graph, metrics=metrics, model=model, truth=truth)

    if config.input_mode == INPUT_METRICS_EDGES:
        metrics = CkjmParser().parse_file(config.metrics)
        parsed = EdgeListParser().parse_file(config.edges)
        graph = restrict_to_metrics(parsed.edges, metrics)
        return Inputs(graph=graph, metrics=metrics, truth=truth)

    params = replace(config.synth_params, seed=config.seed)
    if config.synth_facts:
        model, system = generate_class_facts(params)
        graph = build_graph(model)
        metrics = stage_metrics(model, config.metric_options)
        return Inputs(graph=graph, metrics=metrics, model=model, truth=truth or system.truth)
    system = generate(params)
    return Inputs(graph=system.graph, metrics=system.metrics, truth=truth or system.truth)


def stage_metrics(model: ClassModel, options: MetricOptions = DEFAULT_OPTIONS) -> MetricsTable:
    return compute_metrics(model, options)


def stage_layers(graph: DependencyGraph) -> LayerResult:
    """SCC 축약 -> D-layer -> 4개 잠정 레이어"""
    cond = condense(graph)
    assign = assign_dlayers(cond)
    edges, tentative = bin_tentative(assign)
    counts = layer_counts(tentative)
    logger.info(f"잠정 레이어별 클래스 수: {counts}")
    return LayerResult(assign=assign, edges=edges, tentative=tentative, scc_count=len(cond.components))


def stage_stats(metrics: MetricsTable, assign: LayerAssignment, alpha: float = DEFAULT_ALPHA,
                filter_by_significance: bool = True) -> StatsResult:
    """
    기술 통계, 상관 행렬, D-layer 상관 메트릭 선택

    Args:
        metrics: 메트릭 표
        assign: D-layer
        alpha: 유의수준
        filter_by_significance: False면 8개 메트릭 전부를 이산화 대상으로

    Returns:
        StatsResult
    """
    descriptive = describe_table(metrics, assign)
    matrix = correlation_matrix(metrics, assign)
    significant = select_correlated(matrix, alpha)
    if filter_by_significance:
        if not significant:
            raise PipelineHalt("stats", REPORT_TEXT["halt_no_significant"])
        selected = significant
    else:
        selected = list(METRIC_NAMES)
    return StatsResult(descriptive=descriptive, matrix=matrix, significant=significant, selected=selected)


def stage_discretize(metrics: MetricsTable, assign: LayerAssignment,
                     tentative: Mapping[ClassId, TentativeLayer], selected: Sequence[str],
                     supervise: str = "tentative") -> Tuple[BinningScheme, NominalDataset]:
    """
    선택된 메트릭 MDLP 이산화 후 명목 데이터셋 생성

    Args:
        metrics: 메트릭 표
        assign: D-layer ('dlayer' 지도 모드용)
        tentative: 잠정 레이어 (데이터셋 클래스 레이블)
        selected: 이산화할 메트릭
        supervise: 'tentative' 또는 'dlayer'

    Returns:
        (BinningScheme, NominalDataset)
    """
    if supervise == "dlayer":
        labels = dict(assign.dlayer_of)
    else:
        labels = {c: int(layer) for c, layer in tentative.items()}
    scheme = fit_scheme(metrics, labels, selected)
    if not scheme.active_attributes():
        raise PipelineHalt("discretize", REPORT_TEXT["halt_no_cuts"])
    dataset = apply_bins(metrics, {c: int(l) for c, l in tentative.items()}, scheme)
    return scheme, dataset


def stage_rules(dataset: NominalDataset, params: RipperParams) -> RuleSet:
    return RipperLearner(params).fit(dataset)


def stage_eval(dataset: NominalDataset, ruleset: Optional[RuleSet], eval_mode: str,
               params: RipperParams) -> EvaluationReport:
    """재대입이면 주어진 규칙으로, cv:K면 fold마다 다시 학습"""
    folds = parse_eval_mode(eval_mode)
    if folds is None:
        if ruleset is None:
            raise ValueError("resubstitution needs a learned rule set")
        return evaluate_resubstitution(ruleset, dataset)
    return cross_validate(dataset, k=folds, seed=params.seed, params=params)


# ---------------------------------------------------------------------------
# 산출물 렌더링
# ---------------------------------------------------------------------------

def layers_artifacts(result: LayerResult) -> Dict[str, str]:
    frame = layer_assignment_frame(result.assign, result.tentative)
    return {BUNDLE_FILES["layers"]: frame_to_csv(frame)}


def descriptive_artifacts(descriptive: Mapping[str, DescriptiveStats], edges: BinEdges,
                          scheme: Optional[BinningScheme], decimal: str) -> Dict[str, str]:
    frame = descriptive_frame(descriptive, edges, scheme, decimal)
    csv_frame = descriptive_frame(descriptive, edges, scheme, "dot")
    return {
        BUNDLE_FILES["descriptive_md"]: render_markdown(frame, title=REPORT_TEXT["descriptive_title"]),
        BUNDLE_FILES["descriptive_csv"]: frame_to_csv(csv_frame),
    }


def correlation_artifacts(stats: StatsResult, decimal: str) -> Dict[str, str]:
    return {
        BUNDLE_FILES["correlations_md"]: render_correlations(stats.matrix, decimal, stats.selected),
        BUNDLE_FILES["correlations_csv"]: frame_to_csv(correlations_long_frame(stats.matrix)),
    }


def dataset_artifacts(dataset: NominalDataset) -> Dict[str, str]:
    return {BUNDLE_FILES["dataset"]: frame_to_csv(dataset.to_frame())}


def rules_artifacts(ruleset: RuleSet, dataset: NominalDataset) -> Dict[str, str]:
    domain_sizes = dict(zip(dataset.attributes, dataset.domain_sizes))
    profiles = summarize_rule_profiles(ruleset, domain_sizes)
    return {
        BUNDLE_FILES["rules_txt"]: format_rules(ruleset),
        BUNDLE_FILES["rules_json"]: json.dumps(rules_to_records(ruleset), indent=2, ensure_ascii=False) + "\n",
        BUNDLE_FILES["rule_profiles"]: render_rule_profiles(profiles, ruleset.default_class),
    }


def accuracy_artifacts(report: EvaluationReport, project: str) -> Dict[str, str]:
    return {
        BUNDLE_FILES["accuracy_md"]: render_accuracy({project: report}),
        BUNDLE_FILES["accuracy_csv"]: frame_to_csv(report_frame(report)),
    }


def recovery_artifacts(report: EvaluationReport, project: str) -> Dict[str, str]:
    return {
        BUNDLE_FILES["recovery_md"]: render_accuracy({project: report}, title=REPORT_TEXT["recovery_title"]),
        BUNDLE_FILES["recovery_csv"]: frame_to_csv(report_frame(report)),
    }


def report_summary(report: EvaluationReport) -> Dict:
    return {
        "mode": report.mode,
        "accuracy": round(report.accuracy, 6),
        "precision": {str(s.layer): round(s.precision, 6) for s in report.scores},
        "recall": {str(s.layer): round(s.recall, 6) for s in report.scores},
        "confusion": report.matrix.counts.tolist(),
    }


def _summary(config: PipelineConfig, inputs: Inputs, layers: LayerResult, stats: StatsResult,
             scheme: BinningScheme, ruleset: RuleSet, report: EvaluationReport,
             recovery: Optional[EvaluationReport]) -> Dict:
    summary = {
        "project": config.project,
        "input_mode": config.input_mode,
        "seed": config.seed,
        "classes": len(inputs.metrics),
        "edges": len(inputs.graph.edges),
        "components": layers.scc_count,
        "max_dlayer": layers.assign.max_layer,
        "dlayer_bins": layers.edges.labels(),
        "layer_counts": {str(k): v for k, v in layer_counts(layers.tentative).items()},
        "alpha": config.alpha,
        "correlated": stats.significant,
        "discretized": {a: len(scheme.cuts[a]) for a in scheme.active_attributes()},
        "degenerate": scheme.degenerate_attributes(),
        "rules": len(ruleset.rules),
        "default_layer": ruleset.default_class,
        "evaluation": report_summary(report),
    }
    if recovery is not None:
        summary["recovery"] = report_summary(recovery)
    return summary


def run_stage(stage: str, fn, *args, **kwargs):
    """단계 이름을 붙여 전제조건 위반을 PipelineHalt로"""
    logger.info(f"[{stage}] 시작")
    try:
        result = fn(*args, **kwargs)
    except LayerFinderError:
        raise
    except ValueError as e:
        raise PipelineHalt(stage, str(e)) from e
    logger.info(f"[{stage}] 완료")
    return result


def _execute(config: PipelineConfig) -> ReportBundle:
    inputs = run_stage("ingest", load_inputs, config)
    layers = run_stage("layers", stage_layers, inputs.graph)
    stats = run_stage("stats", stage_stats, inputs.metrics, layers.assign, config.alpha,
                    config.filter_by_significance)
    scheme, dataset = run_stage("discretize", stage_discretize, inputs.metrics, layers.assign,
                              layers.tentative, stats.selected, config.supervise)
    ruleset = run_stage("rules", stage_rules, dataset, config.ripper_params)
    report = run_stage("eval", stage_eval, dataset, ruleset, config.eval_mode, config.ripper_params)

    recovery = None
    if inputs.truth is not None:
        recovery = run_stage("eval", recovery_against_truth, predict_dataset(ruleset, dataset), inputs.truth)
        logger.info(
            f"정답 대비 복원: macro precision {recovery.macro_precision:.3f}, "
            f"macro recall {recovery.macro_recall:.3f}")

    bundle = ReportBundle()
    bundle.update(layers_artifacts(layers))
    bundle.update(descriptive_artifacts(stats.descriptive, layers.edges, scheme, config.decimal))
    bundle.update(correlation_artifacts(stats, config.decimal))
    bundle.update(dataset_artifacts(dataset))
    bundle.update(rules_artifacts(ruleset, dataset))
    bundle.update(accuracy_artifacts(report, config.project))
    if recovery is not None:
        bundle.update(recovery_artifacts(recovery, config.project))

    bundle.summary = _summary(config, inputs, layers, stats, scheme, ruleset, report, recovery)
    bundle.files[BUNDLE_FILES["summary"]] = json.dumps(
        bundle.summary, indent=2, ensure_ascii=False, sort_keys=True) + "\n"
    return bundle


def run_pipeline(config: PipelineConfig) -> ReportBundle:
    """
    전체 파이프라인 실행

    Args:
        config: 검증된 설정 (out_dir가 있으면 번들 저장)

    Returns:
        ReportBundle
    """
    problems = config.validate(check_paths=False)
    if problems:
        raise ValueError("invalid pipeline config: " + "; ".join(problems))

    session = run = None
    if config.history is not None:
        session = get_session(config.history)
        run = create_run(session, config.input_mode, config.seed,
                         str(config.out_dir) if config.out_dir else None)

    try:
        bundle = _execute(config)
        if config.out_dir is not None:
            bundle.write(config.out_dir)
        if run is not None:
            complete_run(
                session, run,
                class_count=bundle.summary["classes"],
                rule_count=bundle.summary["rules"],
                accuracy=bundle.summary["evaluation"]["accuracy"],
            )
    except PipelineHalt as e:
        if run is not None:
            complete_run(session, run, status='halted', halted_stage=e.stage, error=e.message)
        raise
    except Exception as e:
        if run is not None:
            complete_run(session, run, status='failed', error=str(e))
        raise
    finally:
        if session is not None:
            session.close()
    return bundle

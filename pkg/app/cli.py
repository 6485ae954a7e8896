"""
명령행 인터페이스
run: 전체 파이프라인, 그 외 서브커맨드: 단계별 실행 (같은 단계 함수를 공유)
"""
import argparse
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    BUNDLE_FILES, DEFAULT_ALPHA, DEFAULT_FOLDS, DEFAULT_OPT_PASSES, DEFAULT_SEED,
    EVAL_RESUBSTITUTION, EXIT_IO_ERROR, EXIT_OK, EXIT_PARSE_ERROR, EXIT_PIPELINE_HALT,
    HISTORY_DB_PATH, INGEST_FILES, REPORT_TEXT, SYNTH_CLASSES_PER_LAYER, SYNTH_CYCLE_PROB,
    SYNTH_DOWN_DEP_PROB, SYNTH_LAYER_DEPTH, SYNTH_SKIP_DEP_PROB
)
from app.components.tables import render_accuracy
from app.pipeline import (
    DECIMAL_MODES, INPUT_MODES, SUPERVISE_MODES,
    LayerResult, PipelineConfig, ReportBundle, accuracy_artifacts, correlation_artifacts,
    dataset_artifacts, descriptive_artifacts, layers_artifacts, load_inputs, restrict_to_metrics,
    rules_artifacts, run_pipeline, run_stage, stage_discretize, stage_eval, stage_layers,
    stage_metrics, stage_rules, stage_stats
)
from parsers.ckjm import CkjmParser, format_ckjm
from parsers.class_facts import ClassFactsParser, format_class_facts
from parsers.edges import EdgeListParser, EdgeRecord, format_edges
from parsers.tables import DatasetParser, LayersParser, frame_to_csv
from utils.database import get_recent_runs, get_session
from utils.errors import LayerFinderError, ModelValidationError, ParseError, PipelineHalt
from utils.evaluation import ConfusionMatrix, parse_eval_mode, precision_recall
from utils.layering import DependencyGraph, bin_tentative, build_graph, tentative_bin_edges
from utils.metrics import MetricOptions
from utils.rules import RipperParams, parse_rules
from utils.stats import common_correlated
from utils.synth import SynthParams, generate, generate_class_facts, truth_frame

logger = logging.getLogger(__name__)


def _write(out_dir: Path, artifacts: Mapping[str, str]) -> None:
    bundle = ReportBundle()
    bundle.update(artifacts)
    bundle.write(out_dir)


def _metric_options(args) -> MetricOptions:
    return MetricOptions(
        count_constructors=not args.no_constructors,
        count_initializers=args.count_initializers,
    )


def _synth_params(args) -> SynthParams:
    return SynthParams(
        classes_per_layer=tuple(args.classes_per_layer),
        down_dep_prob=args.down_prob,
        skip_dep_prob=args.skip_prob,
        cycle_prob=args.cycle_prob,
        seed=args.seed,
        layer_depth=args.layer_depth,
    )


def _ripper_params(args) -> RipperParams:
    return RipperParams(seed=args.seed, folds=args.folds, opt_passes=args.opt_passes)


def build_config(args) -> PipelineConfig:
    """run 서브커맨드 플래그 -> PipelineConfig"""
    return PipelineConfig(
        input_mode=args.input_mode,
        class_facts=args.class_facts,
        metrics=args.metrics,
        edges=args.edges,
        truth=args.truth,
        synth_params=_synth_params(args),
        synth_facts=args.synth_facts,
        alpha=args.alpha,
        seed=args.seed,
        folds=args.folds,
        opt_passes=args.opt_passes,
        eval_mode=args.eval,
        out_dir=args.out,
        decimal=args.decimal,
        supervise=args.supervise,
        filter_by_significance=args.filter_by_significance == "on",
        metric_options=_metric_options(args),
        project=args.project,
        history=args.history,
    )


# ---------------------------------------------------------------------------
# 서브커맨드
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    config = build_config(args)
    problems = config.validate(check_paths=False)
    if problems:
        for problem in problems:
            logger.error(problem)
        return EXIT_PARSE_ERROR
    bundle = run_pipeline(config)
    evaluation = bundle.summary["evaluation"]
    print(f"{REPORT_TEXT['app_title']}: {bundle.summary['classes']} classes, "
          f"{bundle.summary['rules']} rules, accuracy {evaluation['accuracy']:.3f} -> {args.out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    config = build_config(args)
    problems = config.validate(check_paths=False)
    if problems:
        for problem in problems:
            logger.error(problem)
        return EXIT_PARSE_ERROR
    inputs = run_stage("ingest", load_inputs, config)
    artifacts = {
        INGEST_FILES["metrics"]: format_ckjm(inputs.metrics),
        INGEST_FILES["edges"]: format_edges(EdgeRecord(s, t) for s, t in inputs.graph.edges),
    }
    if inputs.model is not None:
        artifacts[INGEST_FILES["class_facts"]] = format_class_facts(inputs.model)
    if inputs.truth is not None:
        artifacts[INGEST_FILES["truth"]] = frame_to_csv(truth_frame(inputs.truth))
    _write(args.out, artifacts)
    return EXIT_OK


def _graph_from_args(args) -> DependencyGraph:
    if args.class_facts:
        return build_graph(ClassFactsParser().parse_file(args.class_facts))
    if not args.edges:
        raise ValueError("layers needs --edges or --class-facts")
    parsed = EdgeListParser().parse_file(args.edges)
    if args.metrics:
        return restrict_to_metrics(parsed.edges, CkjmParser().parse_file(args.metrics))
    return DependencyGraph.from_edges((e.source, e.target) for e in parsed.edges)


def cmd_layers(args) -> int:
    result = run_stage("layers", stage_layers, _graph_from_args(args))
    _write(args.out, layers_artifacts(result))
    return EXIT_OK


def cmd_metrics(args) -> int:
    model = ClassFactsParser().parse_file(args.class_facts)
    table = run_stage("metrics", stage_metrics, model, _metric_options(args))
    _write(args.out, {INGEST_FILES["metrics"]: format_ckjm(table)})
    return EXIT_OK


def _load_layers(args) -> LayerResult:
    assign, tentative = LayersParser().parse_file(args.layers)
    if tentative:
        edges = tentative_bin_edges(assign.max_layer)
    else:
        edges, tentative = bin_tentative(assign)
    return LayerResult(assign=assign, edges=edges, tentative=tentative, scc_count=0)


def cmd_stats(args) -> int:
    metrics = CkjmParser().parse_file(args.metrics)
    layers = _load_layers(args)
    # 보고만 하므로 유의한 메트릭이 없어도 중단하지 않음
    stats = run_stage("stats", stage_stats, metrics, layers.assign, args.alpha,
                      filter_by_significance=False)
    stats = replace(stats, selected=stats.significant)
    artifacts = dict(descriptive_artifacts(stats.descriptive, layers.edges, None, args.decimal))
    artifacts.update(correlation_artifacts(stats, args.decimal))
    _write(args.out, artifacts)
    return EXIT_OK


def cmd_discretize(args) -> int:
    metrics = CkjmParser().parse_file(args.metrics)
    layers = _load_layers(args)
    stats = run_stage("stats", stage_stats, metrics, layers.assign, args.alpha,
                      args.filter_by_significance == "on")
    scheme, dataset = run_stage(
        "discretize", stage_discretize,
        metrics, layers.assign, layers.tentative, stats.selected, args.supervise)
    artifacts = dict(descriptive_artifacts(stats.descriptive, layers.edges, scheme, args.decimal))
    artifacts.update(dataset_artifacts(dataset))
    _write(args.out, artifacts)
    return EXIT_OK


def cmd_rules(args) -> int:
    dataset = DatasetParser().parse_file(args.dataset)
    ruleset = run_stage("rules", stage_rules, dataset, _ripper_params(args))
    _write(args.out, rules_artifacts(ruleset, dataset))
    return EXIT_OK


def cmd_eval(args) -> int:
    dataset = DatasetParser().parse_file(args.dataset)
    ruleset = None
    if args.rules:
        text = Path(args.rules).read_text(encoding='utf-8')
        ruleset = parse_rules(text, attributes=dataset.attributes, source=str(args.rules))
    elif parse_eval_mode(args.eval) is None:
        ruleset = run_stage("rules", stage_rules, dataset, _ripper_params(args))
    report = run_stage("eval", stage_eval, dataset, ruleset, args.eval, _ripper_params(args))
    _write(args.out, accuracy_artifacts(report, args.project))
    return EXIT_OK


def cmd_synth(args) -> int:
    params = _synth_params(args)
    problems = params.validate()
    if problems:
        for problem in problems:
            logger.error(problem)
        return EXIT_PARSE_ERROR

    if args.synth_facts:
        model, system = generate_class_facts(params)
        artifacts = {INGEST_FILES["class_facts"]: format_class_facts(model)}
    else:
        system = generate(params)
        artifacts = {
            INGEST_FILES["metrics"]: format_ckjm(system.metrics),
            INGEST_FILES["edges"]: format_edges(EdgeRecord(s, t) for s, t in system.graph.edges),
        }
    artifacts[INGEST_FILES["truth"]] = frame_to_csv(truth_frame(system.truth))
    _write(args.out, artifacts)
    return EXIT_OK


def load_summary(bundle_dir: Path) -> Dict:
    path = Path(bundle_dir) / BUNDLE_FILES["summary"]
    return json.loads(path.read_text(encoding='utf-8'))


def cmd_compare(args) -> int:
    """여러 번들의 정확도 표와 공통 상관 메트릭"""
    reports = {}
    selections = {}
    for bundle_dir in args.bundles:
        summary = load_summary(bundle_dir)
        name = summary.get("project") or Path(bundle_dir).name
        if name in reports:
            name = f"{name} ({Path(bundle_dir).name})"
        evaluation = summary["evaluation"]
        matrix = ConfusionMatrix(counts=np.asarray(evaluation["confusion"], dtype=np.int64))
        reports[name] = precision_recall(matrix, mode=evaluation["mode"])
        selections[name] = summary.get("correlated", [])

    common = common_correlated(selections)
    text = render_accuracy(reports, title=REPORT_TEXT["compare_title"])
    text += f"\n{REPORT_TEXT['common_correlated']}: {', '.join(common) if common else '-'}\n"
    if args.out:
        _write(args.out, {INGEST_FILES["comparison"]: text})
    else:
        print(text, end='')
    return EXIT_OK


def cmd_history(args) -> int:
    session = get_session(args.history)
    try:
        runs = get_recent_runs(session, limit=args.limit)
        if not runs:
            print(REPORT_TEXT["history_empty"])
        for run in runs:
            accuracy = f"{run.accuracy:.3f}" if run.accuracy is not None else "-"
            stage = f" [{run.halted_stage}]" if run.halted_stage else ""
            print(f"#{run.id} {run.started_at:%Y-%m-%d %H:%M:%S} {run.input_mode} seed={run.seed} "
                  f"{run.status}{stage} classes={run.class_count} rules={run.rule_count} "
                  f"accuracy={accuracy}")
    finally:
        session.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# 인자 파서
# ---------------------------------------------------------------------------

def _eval_mode(text: str) -> str:
    try:
        parse_eval_mode(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    return text


def _add_input_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--input-mode", choices=INPUT_MODES, required=True)
    parser.add_argument("--class-facts", type=Path)
    parser.add_argument("--metrics", type=Path)
    parser.add_argument("--edges", type=Path)
    parser.add_argument("--truth", type=Path, help="정답 레이어 CSV (class,layer)")


def _add_metric_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--no-constructors", action="store_true", help="생성자를 메서드로 세지 않음")
    parser.add_argument("--count-initializers", action="store_true", help="정적 초기화 블록을 메서드로 셈")


def _add_synth_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--classes-per-layer", type=int, nargs=4, default=list(SYNTH_CLASSES_PER_LAYER))
    parser.add_argument("--down-prob", type=float, default=SYNTH_DOWN_DEP_PROB)
    parser.add_argument("--skip-prob", type=float, default=SYNTH_SKIP_DEP_PROB)
    parser.add_argument("--cycle-prob", type=float, default=SYNTH_CYCLE_PROB)
    parser.add_argument("--layer-depth", type=int, default=SYNTH_LAYER_DEPTH)
    parser.add_argument("--synth-facts", action="store_true", help="class-facts 모델로 생성")


def _add_learner_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--folds", type=int, default=DEFAULT_FOLDS, help="1/folds를 prune 집합으로")
    parser.add_argument("--opt-passes", type=int, default=DEFAULT_OPT_PASSES)


def _add_stats_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    parser.add_argument("--decimal", choices=DECIMAL_MODES, default="dot")
    parser.add_argument("--filter-by-significance", choices=("on", "off"), default="on")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dlayer-finder",
        description="D-layer 기반 잠정 아키텍처 레이어 복원",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="전체 파이프라인")
    _add_input_flags(run)
    _add_metric_flags(run)
    _add_synth_flags(run)
    _add_learner_flags(run)
    _add_stats_flags(run)
    run.add_argument("--eval", type=_eval_mode, default=EVAL_RESUBSTITUTION, help="resub 또는 cv:K")
    run.add_argument("--supervise", choices=SUPERVISE_MODES, default="tentative")
    run.add_argument("--project", default="project")
    run.add_argument("--history", type=Path, help=f"실행 기록 DB (예: {HISTORY_DB_PATH})")
    run.add_argument("--out", type=Path, required=True)
    run.set_defaults(func=cmd_run)

    ingest = sub.add_parser("ingest", help="입력을 정규화된 중간 파일로")
    _add_input_flags(ingest)
    _add_metric_flags(ingest)
    _add_synth_flags(ingest)
    ingest.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ingest.add_argument("--out", type=Path, required=True)
    ingest.set_defaults(func=cmd_ingest, alpha=DEFAULT_ALPHA, folds=DEFAULT_FOLDS,
                        opt_passes=DEFAULT_OPT_PASSES, eval=EVAL_RESUBSTITUTION, decimal="dot",
                        supervise="tentative", filter_by_significance="on", project="project",
                        history=None)

    layers = sub.add_parser("layers", help="D-layer와 잠정 레이어 CSV")
    layers.add_argument("--edges", type=Path)
    layers.add_argument("--metrics", type=Path, help="분석 대상 클래스 집합")
    layers.add_argument("--class-facts", type=Path)
    layers.add_argument("--out", type=Path, required=True)
    layers.set_defaults(func=cmd_layers)

    metrics = sub.add_parser("metrics", help="class-facts에서 8개 메트릭 계산")
    metrics.add_argument("--class-facts", type=Path, required=True)
    _add_metric_flags(metrics)
    metrics.add_argument("--out", type=Path, required=True)
    metrics.set_defaults(func=cmd_metrics)

    stats = sub.add_parser("stats", help="기술 통계와 상관 행렬")
    stats.add_argument("--metrics", type=Path, required=True)
    stats.add_argument("--layers", type=Path, required=True)
    _add_stats_flags(stats)
    stats.add_argument("--out", type=Path, required=True)
    stats.set_defaults(func=cmd_stats)

    discretize = sub.add_parser("discretize", help="MDLP 이산화와 명목 데이터셋")
    discretize.add_argument("--metrics", type=Path, required=True)
    discretize.add_argument("--layers", type=Path, required=True)
    _add_stats_flags(discretize)
    discretize.add_argument("--supervise", choices=SUPERVISE_MODES, default="tentative")
    discretize.add_argument("--out", type=Path, required=True)
    discretize.set_defaults(func=cmd_discretize)

    rules = sub.add_parser("rules", help="RIPPER 규칙 학습")
    rules.add_argument("--dataset", type=Path, required=True)
    _add_learner_flags(rules)
    rules.add_argument("--out", type=Path, required=True)
    rules.set_defaults(func=cmd_rules)

    evaluate = sub.add_parser("eval", help="precision/recall 평가")
    evaluate.add_argument("--dataset", type=Path, required=True)
    evaluate.add_argument("--rules", type=Path, help="재대입 평가용 규칙 텍스트")
    evaluate.add_argument("--eval", type=_eval_mode, default=EVAL_RESUBSTITUTION)
    _add_learner_flags(evaluate)
    evaluate.add_argument("--project", default="project")
    evaluate.add_argument("--out", type=Path, required=True)
    evaluate.set_defaults(func=cmd_eval)

    synth = sub.add_parser("synth", help="정답이 심어진 합성 시스템")
    _add_synth_flags(synth)
    synth.add_argument("--seed", type=int, default=DEFAULT_SEED)
    synth.add_argument("--out", type=Path, required=True)
    synth.set_defaults(func=cmd_synth)

    compare = sub.add_parser("compare", help="여러 번들의 정확도 비교")
    compare.add_argument("bundles", type=Path, nargs="+")
    compare.add_argument("--out", type=Path)
    compare.set_defaults(func=cmd_compare)

    history = sub.add_parser("history", help="최근 실행 기록")
    history.add_argument("--history", type=Path, default=HISTORY_DB_PATH)
    history.add_argument("--limit", type=int, default=10)
    history.set_defaults(func=cmd_history)

    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI 진입점

    Args:
        argv: 인자 목록 (기본: sys.argv[1:])

    Returns:
        종료 코드 (0 정상, 2 파싱 오류, 3 파이프라인 중단, 4 입출력 오류)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    try:
        return args.func(args)
    except (ParseError, ModelValidationError) as e:
        logger.error(f"입력 파싱 실패: {e}")
        return EXIT_PARSE_ERROR
    except PipelineHalt as e:
        logger.error(f"파이프라인 중단 [{e.stage}]: {e.message}")
        return EXIT_PIPELINE_HALT
    except OSError as e:
        logger.error(f"입출력 오류: {e}")
        return EXIT_IO_ERROR
    except (LayerFinderError, ValueError) as e:
        logger.error(f"[{args.command}] {e}")
        return EXIT_PARSE_ERROR

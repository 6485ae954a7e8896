"""
파이프라인 통합 테스트
"""
import json

import numpy as np
import pytest

from app.cli import main
from app.components.tables import accuracy_frame
from app.pipeline import (
    INPUT_METRICS_EDGES, INPUT_SYNTH, INPUT_CLASS_FACTS, PipelineConfig, run_pipeline, run_stage
)
from config import BUNDLE_FILES, DLAYER_COLUMN, INGEST_FILES
from utils.database import get_recent_runs, get_session
from utils.errors import ParseError, PipelineHalt
from utils.evaluation import ConfusionMatrix, precision_recall
from utils.synth import SynthParams

SYNTH = SynthParams(classes_per_layer=(60, 60, 60, 60))


def synth_config(tmp_path, **kwargs):
    values = dict(input_mode=INPUT_SYNTH, synth_params=SYNTH, seed=5, out_dir=tmp_path / "bundle")
    values.update(kwargs)
    return PipelineConfig(**values)


def write_chain(tmp_path, length, metrics_line="1 1 0 0 1 0 0 1"):
    names = [f"app.C{i}" for i in range(length)]
    edges = tmp_path / "edges.txt"
    edges.write_text(''.join(f"{a} -> {b}\n" for a, b in zip(names, names[1:])), encoding='utf-8')
    metrics = tmp_path / "metrics.txt"
    metrics.write_text(''.join(f"{n} {metrics_line}\n" for n in names), encoding='utf-8')
    return metrics, edges


def read_bundle(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


class TestSynthRun:
    def test_recovers_planted_layers(self, tmp_path):
        bundle = run_pipeline(synth_config(tmp_path))
        recovery = bundle.summary["recovery"]
        precision = sum(recovery["precision"].values()) / 4
        recall = sum(recovery["recall"].values()) / 4
        assert precision >= 0.9
        assert recall >= 0.8
        assert bundle.summary["max_dlayer"] >= 3

    def test_bundle_files(self, tmp_path):
        run_pipeline(synth_config(tmp_path))
        names = {p.name for p in (tmp_path / "bundle").iterdir()}
        assert names == set(BUNDLE_FILES.values())
        summary = json.loads((tmp_path / "bundle" / BUNDLE_FILES["summary"]).read_text(encoding='utf-8'))
        assert summary["classes"] == 240
        assert sum(summary["layer_counts"].values()) == 240
        rules_text = (tmp_path / "bundle" / BUNDLE_FILES["rules_txt"]).read_text(encoding='utf-8')
        assert rules_text.splitlines()[-1].split(". ", 1)[1].startswith("ELSE layerBin=")

    def test_byte_identical_reruns(self, tmp_path):
        run_pipeline(synth_config(tmp_path, out_dir=tmp_path / "a"))
        run_pipeline(synth_config(tmp_path, out_dir=tmp_path / "b"))
        assert read_bundle(tmp_path / "a") == read_bundle(tmp_path / "b")

    def test_cross_validation_mode(self, tmp_path):
        bundle = run_pipeline(synth_config(tmp_path, eval_mode="cv:3", out_dir=None))
        assert bundle.summary["evaluation"]["mode"] == "cv:3"
        assert sum(map(sum, bundle.summary["evaluation"]["confusion"])) == 240

    def test_class_facts_synth(self, tmp_path):
        params = SynthParams(classes_per_layer=(30, 30, 30, 30))
        bundle = run_pipeline(synth_config(tmp_path, synth_params=params, synth_facts=True, out_dir=None))
        assert bundle.summary["classes"] == 120

    def test_indistinguishable_layers_score_zero(self, tmp_path):
        # layer 1만 구별되고 2-4는 같은 메트릭 (다수인 2가 기본 레이어)
        low = {"WMC": (4, 4), "DIT": (1, 1), "NOC": (2, 2), "CBO": (1, 1),
               "RFC": (6, 6), "LCOM": (10, 10), "Ca": (20, 20), "NPM": (3, 3)}
        high = {"WMC": (30, 30), "DIT": (3, 3), "NOC": (0, 0), "CBO": (15, 15),
                "RFC": (60, 60), "LCOM": (50, 50), "Ca": (5, 5), "NPM": (12, 12)}
        params = SynthParams(classes_per_layer=(60, 120, 40, 40), cycle_prob=0.0,
                             metric_profiles={1: low, 2: high, 3: high, 4: high})
        bundle = run_pipeline(synth_config(tmp_path, synth_params=params, out_dir=None))

        evaluation = bundle.summary["evaluation"]
        assert bundle.summary["default_layer"] == 2
        for layer in ("3", "4"):
            assert evaluation["precision"][layer] == 0.0
            assert evaluation["recall"][layer] == 0.0
        assert evaluation["precision"]["1"] == 1.0
        assert evaluation["precision"]["2"] == pytest.approx(0.6)
        assert evaluation["accuracy"] == pytest.approx(180 / 260, abs=1e-6)

        report = precision_recall(ConfusionMatrix(counts=np.array(evaluation["confusion"])))
        frame = accuracy_frame({"synth": report}).set_index(DLAYER_COLUMN)
        for layer in ("3", "4"):
            assert tuple(frame.loc[layer]) == ("0", "0")
        assert tuple(frame.loc["1"]) == ("1", "1")

    def test_invalid_config(self, tmp_path):
        with pytest.raises(ValueError, match="invalid pipeline config"):
            run_pipeline(synth_config(tmp_path, alpha=1.5))


class TestStagedSubcommands:
    def test_stages_compose_to_run_output(self, tmp_path):
        assert main(["-q", "synth", "--classes-per-layer", "60", "60", "60", "60",
                     "--seed", "5", "--out", str(tmp_path / "in")]) == 0
        metrics = str(tmp_path / "in" / INGEST_FILES["metrics"])
        edges = str(tmp_path / "in" / INGEST_FILES["edges"])
        truth = str(tmp_path / "in" / INGEST_FILES["truth"])

        assert main(["-q", "run", "--input-mode", "metrics+edges", "--metrics", metrics,
                     "--edges", edges, "--truth", truth, "--seed", "5",
                     "--out", str(tmp_path / "run")]) == 0

        assert main(["-q", "layers", "--edges", edges, "--metrics", metrics,
                     "--out", str(tmp_path / "s1")]) == 0
        layers = str(tmp_path / "s1" / BUNDLE_FILES["layers"])
        assert main(["-q", "discretize", "--metrics", metrics, "--layers", layers,
                     "--out", str(tmp_path / "s2")]) == 0
        dataset = str(tmp_path / "s2" / BUNDLE_FILES["dataset"])
        assert main(["-q", "rules", "--dataset", dataset, "--seed", "5",
                     "--out", str(tmp_path / "s3")]) == 0

        run = read_bundle(tmp_path / "run")
        assert read_bundle(tmp_path / "s1")[BUNDLE_FILES["layers"]] == run[BUNDLE_FILES["layers"]]
        assert read_bundle(tmp_path / "s2")[BUNDLE_FILES["dataset"]] == run[BUNDLE_FILES["dataset"]]
        assert read_bundle(tmp_path / "s3")[BUNDLE_FILES["rules_txt"]] == run[BUNDLE_FILES["rules_txt"]]

    def test_synth_and_ingested_runs_agree(self, tmp_path):
        run_pipeline(synth_config(tmp_path, out_dir=tmp_path / "direct"))
        main(["-q", "synth", "--classes-per-layer", "60", "60", "60", "60",
              "--seed", "5", "--out", str(tmp_path / "in")])
        run_pipeline(PipelineConfig(
            input_mode=INPUT_METRICS_EDGES,
            metrics=tmp_path / "in" / INGEST_FILES["metrics"],
            edges=tmp_path / "in" / INGEST_FILES["edges"],
            seed=5,
            out_dir=tmp_path / "files",
        ))
        direct, files = read_bundle(tmp_path / "direct"), read_bundle(tmp_path / "files")
        for name in ("layers", "dataset", "rules_txt", "accuracy_csv"):
            assert direct[BUNDLE_FILES[name]] == files[BUNDLE_FILES[name]]


class TestHalts:
    def test_too_few_dlayers(self, tmp_path):
        metrics, edges = write_chain(tmp_path, 3)
        config = PipelineConfig(input_mode=INPUT_METRICS_EDGES, metrics=metrics, edges=edges)
        with pytest.raises(PipelineHalt) as info:
            run_pipeline(config)
        assert info.value.stage == "layers"

    def test_no_significant_metric(self, tmp_path):
        metrics, edges = write_chain(tmp_path, 8)
        config = PipelineConfig(input_mode=INPUT_METRICS_EDGES, metrics=metrics, edges=edges)
        with pytest.raises(PipelineHalt) as info:
            run_pipeline(config)
        assert info.value.stage == "stats"

    def test_stage_value_error_becomes_halt(self):
        def failing():
            raise ValueError("cannot learn rules without attributes")

        with pytest.raises(PipelineHalt) as info:
            run_stage("rules", failing)
        assert info.value.stage == "rules"
        assert "without attributes" in info.value.message

    def test_parse_error_passes_through(self):
        def failing():
            raise ParseError("malformed edge line", line=3)

        with pytest.raises(ParseError):
            run_stage("ingest", failing)

    def test_class_facts_run(self, fixtures_dir, tmp_path):
        config = PipelineConfig(input_mode=INPUT_CLASS_FACTS, class_facts=fixtures_dir / "shop.xml",
                                filter_by_significance=False)
        try:
            bundle = run_pipeline(config)
        except PipelineHalt as e:
            # 클래스 10개로는 MDLP가 경계를 만들지 못할 수 있다
            assert e.stage == "discretize"
        else:
            assert bundle.summary["max_dlayer"] == 5
            assert bundle.summary["classes"] == 10


class TestHistory:
    def test_statuses(self, tmp_path, history_db):
        run_pipeline(synth_config(tmp_path, history=history_db, out_dir=None))
        metrics, edges = write_chain(tmp_path, 3)
        with pytest.raises(PipelineHalt):
            run_pipeline(PipelineConfig(input_mode=INPUT_METRICS_EDGES, metrics=metrics,
                                        edges=edges, history=history_db))

        session = get_session(history_db)
        try:
            runs = get_recent_runs(session)
            by_status = {run.status: run for run in runs}
            assert set(by_status) == {"completed", "halted"}
            assert by_status["completed"].class_count == 240
            assert by_status["completed"].accuracy is not None
            assert by_status["halted"].halted_stage == "layers"
        finally:
            session.close()

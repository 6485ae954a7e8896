"""
명령행 인터페이스 테스트 (종료 코드와 서브커맨드 출력)
"""
import pytest

from app.cli import build_parser, main
from config import BUNDLE_FILES, INGEST_FILES, REPORT_TEXT


def write(path, text):
    path.write_text(text, encoding='utf-8')
    return str(path)


@pytest.fixture
def chain_edges(tmp_path):
    return write(tmp_path / "edges.txt", "a.A -> a.B\na.B -> a.C\na.C -> a.D\n")


class TestExitCodes:
    def test_layers_ok(self, tmp_path, chain_edges):
        assert main(["-q", "layers", "--edges", chain_edges, "--out", str(tmp_path / "out")]) == 0
        text = (tmp_path / "out" / BUNDLE_FILES["layers"]).read_text(encoding='utf-8')
        assert text == (
            "class,dlayer,tentative_layer\n"
            "a.A,3,4\n"
            "a.B,2,3\n"
            "a.C,1,2\n"
            "a.D,0,1\n"
        )

    def test_parse_error(self, tmp_path):
        edges = write(tmp_path / "edges.txt", "a.A -> a.B\nbroken line\n")
        assert main(["-q", "layers", "--edges", edges, "--out", str(tmp_path / "out")]) == 2

    def test_pipeline_halt(self, tmp_path):
        edges = write(tmp_path / "edges.txt", "a.A -> a.B\na.B -> a.C\n")
        assert main(["-q", "layers", "--edges", edges, "--out", str(tmp_path / "out")]) == 3

    def test_stage_precondition_halts(self, tmp_path):
        # 단계 전제조건 위반은 run과 같은 종료 코드
        dataset = write(tmp_path / "dataset.csv", "class,layer\na,1\nb,2\n")
        assert main(["-q", "rules", "--dataset", dataset, "--out", str(tmp_path / "out")]) == 3
        assert main(["-q", "eval", "--dataset", dataset, "--eval", "cv:3",
                     "--out", str(tmp_path / "out")]) == 3

    def test_missing_file(self, tmp_path):
        assert main(["-q", "layers", "--edges", str(tmp_path / "nope.txt"),
                     "--out", str(tmp_path / "out")]) == 4

    def test_missing_run_input(self, tmp_path):
        assert main(["-q", "run", "--input-mode", "metrics+edges",
                     "--metrics", str(tmp_path / "m.txt"), "--edges", str(tmp_path / "e.txt"),
                     "--out", str(tmp_path / "out")]) == 4

    def test_invalid_run_config(self, tmp_path):
        assert main(["-q", "run", "--input-mode", "class-facts",
                     "--out", str(tmp_path / "out")]) == 2

    def test_invalid_synth_params(self, tmp_path):
        assert main(["-q", "synth", "--cycle-prob", "2", "--out", str(tmp_path / "out")]) == 2

    def test_bad_eval_mode_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["eval", "--dataset", "d.csv", "--eval", "cv:1", "--out", "x"])

    def test_verbosity_flags_exclusive(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["-v", "-q", "history"])


class TestSubcommands:
    def test_metrics_from_class_facts(self, fixtures_dir, tmp_path):
        assert main(["-q", "metrics", "--class-facts", str(fixtures_dir / "shop.xml"),
                     "--out", str(tmp_path / "out")]) == 0
        lines = (tmp_path / "out" / INGEST_FILES["metrics"]).read_text(encoding='utf-8').splitlines()
        assert "shop.Util 3 1 0 0 3 1 0 3" in lines
        assert len(lines) == 10

    def test_ingest_class_facts(self, fixtures_dir, tmp_path):
        assert main(["-q", "ingest", "--input-mode", "class-facts",
                     "--class-facts", str(fixtures_dir / "three_classes.xml"),
                     "--out", str(tmp_path / "out")]) == 0
        out = tmp_path / "out"
        assert (out / INGEST_FILES["edges"]).read_text(encoding='utf-8') == "a.A -> a.B\na.A -> a.C\n"
        assert (out / INGEST_FILES["class_facts"]).exists()
        assert not (out / INGEST_FILES["truth"]).exists()

    def test_synth_writes_inputs(self, tmp_path):
        assert main(["-q", "synth", "--classes-per-layer", "5", "5", "5", "5",
                     "--out", str(tmp_path / "out")]) == 0
        out = tmp_path / "out"
        truth = (out / INGEST_FILES["truth"]).read_text(encoding='utf-8').splitlines()
        assert truth[0] == "class,layer"
        assert len(truth) == 21
        assert len((out / INGEST_FILES["metrics"]).read_text(encoding='utf-8').splitlines()) == 20

    def test_synth_class_facts(self, tmp_path):
        assert main(["-q", "synth", "--synth-facts", "--classes-per-layer", "3", "3", "3", "3",
                     "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / INGEST_FILES["class_facts"]).exists()

    def test_stats_report(self, tmp_path):
        main(["-q", "synth", "--classes-per-layer", "20", "20", "20", "20",
              "--out", str(tmp_path / "in")])
        metrics = str(tmp_path / "in" / INGEST_FILES["metrics"])
        edges = str(tmp_path / "in" / INGEST_FILES["edges"])
        main(["-q", "layers", "--edges", edges, "--metrics", metrics, "--out", str(tmp_path / "l")])
        assert main(["-q", "stats", "--metrics", metrics,
                     "--layers", str(tmp_path / "l" / BUNDLE_FILES["layers"]),
                     "--decimal", "comma", "--out", str(tmp_path / "s")]) == 0
        text = (tmp_path / "s" / BUNDLE_FILES["correlations_md"]).read_text(encoding='utf-8')
        assert REPORT_TEXT["correlations_title"] in text
        assert ",000" in text

    def test_eval_with_rules_file(self, tmp_path):
        dataset = write(tmp_path / "dataset.csv",
                        "class,CBO,layer\na,1,1\nb,2,2\nc,1,1\nd,2,1\n")
        rules = write(tmp_path / "rules.txt", "1. IF (CBOBin = 2) THEN layerBin=2\n2. ELSE layerBin=1\n")
        assert main(["-q", "eval", "--dataset", dataset, "--rules", rules,
                     "--out", str(tmp_path / "out")]) == 0
        csv = (tmp_path / "out" / BUNDLE_FILES["accuracy_csv"]).read_text(encoding='utf-8')
        assert "accuracy,0.75,0.75,4,4" in csv

    def test_eval_rejects_unknown_rule_attribute(self, tmp_path):
        dataset = write(tmp_path / "dataset.csv", "class,CBO,layer\na,1,1\nb,2,2\n")
        rules = write(tmp_path / "rules.txt", "1. IF (RFCBin = 2) THEN layerBin=2\n2. ELSE layerBin=1\n")
        assert main(["-q", "eval", "--dataset", dataset, "--rules", rules,
                     "--out", str(tmp_path / "out")]) == 2


class TestCompareAndHistory:
    def run_synth(self, tmp_path, name, seed):
        return main(["-q", "run", "--input-mode", "synth", "--classes-per-layer", "40", "40", "40", "40",
                     "--seed", str(seed), "--project", name, "--history", str(tmp_path / "runs.db"),
                     "--out", str(tmp_path / name)])

    def test_compare(self, tmp_path, capsys):
        assert self.run_synth(tmp_path, "alpha", 1) == 0
        assert self.run_synth(tmp_path, "beta", 2) == 0
        capsys.readouterr()

        assert main(["-q", "compare", str(tmp_path / "alpha"), str(tmp_path / "beta")]) == 0
        text = capsys.readouterr().out
        assert REPORT_TEXT["compare_title"] in text
        assert "alpha Precision" in text and "beta Recall" in text
        assert REPORT_TEXT["common_correlated"] in text

        assert main(["-q", "compare", str(tmp_path / "alpha"), "--out", str(tmp_path / "cmp")]) == 0
        assert (tmp_path / "cmp" / INGEST_FILES["comparison"]).exists()

    def test_history(self, tmp_path, capsys):
        assert main(["-q", "history", "--history", str(tmp_path / "empty.db")]) == 0
        assert REPORT_TEXT["history_empty"] in capsys.readouterr().out

        self.run_synth(tmp_path, "alpha", 1)
        capsys.readouterr()
        assert main(["-q", "history", "--history", str(tmp_path / "runs.db")]) == 0
        out = capsys.readouterr().out
        assert "synth seed=1 completed classes=160" in out

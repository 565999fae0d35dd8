import json
import subprocess
import sys

import pytest

from pmgoal.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    data = d / "data.csv"
    assert main(["synth", "--out", str(data), "--goals", "2", "--traces", "3", "--features", "6",
                 "--regimes", "3", "--seed", "5"]) == 0
    art = d / "art"
    common = ["--data", str(data), "--artifacts", str(art)]
    assert main(["features", *common, "--n-f", "3"]) == 0
    assert main(["codebook", *common, "--n-c", "5"]) == 0
    assert main(["discover", *common, "--dot"]) == 0
    return d, data, art


def test_pipeline_artifacts(workspace):
    _, _, art = workspace
    names = {p.name for p in art.iterdir()}
    assert {"selection.json", "codebook.json", "goals.json", "model.T1.json", "model.T2.json",
            "model.T1.dot"} <= names


def test_recognize_training_trace(workspace):
    d, data, art = workspace
    out = d / "post.json"
    assert main(["recognize", "--artifacts", str(art), "--prefix", str(data), "--out", str(out)]) == 0
    post = json.loads(out.read_text())
    assert set(post) == {str(i) for i in range(1, 7)}
    for tid, goal in (("1", "T1"), ("4", "T2")):
        assert goal in post[tid]["inferred"]
        assert abs(sum(post[tid]["probabilities"].values()) - 1) < 1e-12


def test_evaluate_report_and_determinism(workspace):
    d, data, _ = workspace
    texts = []
    for w in ("1", "8"):
        rd = d / f"rep{w}"
        assert main(["evaluate", "--data", str(data), "--report-dir", str(rd), "--n-f", "3", "--n-c", "5",
                     "--workers", w]) == 0
        texts.append({n: (rd / n).read_bytes() for n in ("report.json", "report.csv", "instances.csv")})
        lines = (rd / "report.csv").read_text().splitlines()
        assert len(lines) == 5  # header + 4 observation levels
    assert texts[0] == texts[1]


def test_config_file_precedence(workspace):
    d, data, _ = workspace
    cfg = d / "cfg.json"
    cfg.write_text(json.dumps({"n-f": 2, "n_c": 4, "obs_levels": "0.5"}))
    rd = d / "repcfg"
    assert main(["evaluate", "--config", str(cfg), "--data", str(data), "--report-dir", str(rd), "--n-c", "3"]) == 0
    rep = json.loads((rd / "report.json").read_text())
    assert rep["config"]["n_f"] == 2 and rep["config"]["n_c"] == 3
    assert rep["obs_levels"] == [0.5]


def test_tune_command(workspace):
    d, data, _ = workspace
    out = d / "tune.json"
    assert main(["tune", "--data", str(data), "--nf-range", "2:3", "--nc-range", "4", "--lhs-samples", "3",
                 "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["grid"]["best"]["n_c"] == 4
    assert len(res["weights"]["table"]) == 3
    assert res["weights"]["seeds"]["lhs_seed"] == 0


def test_idempotent_features(workspace):
    _, data, art = workspace
    before = (art / "selection.json").read_bytes()
    assert main(["features", "--data", str(data), "--artifacts", str(art), "--n-f", "3"]) == 0
    assert (art / "selection.json").read_bytes() == before


def test_exit_codes(tmp_path, capsys):
    assert main(["nonsense"]) == 1
    assert main(["evaluate", "--data", str(tmp_path / "missing.csv")]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("Trace,Goal,a\n1,T1,x\n")
    assert main(["features", "--data", str(bad)]) == 1
    assert "row" in capsys.readouterr().err
    assert main(["evaluate", "--help"]) == 0
    help_text = " ".join(capsys.readouterr().out.split())
    assert "(default: 0.1,0.3,0.5,0.7)" in help_text


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "pmgoal.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "recognize" in res.stdout

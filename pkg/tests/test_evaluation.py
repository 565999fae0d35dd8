import csv
import io
import json

import numpy as np
import pytest
from scipy import stats

from pmgoal import (PipelineConfig, cross_validate, f1, instance_metrics, mean_ci, probability_gap, sidak_alpha,
                    welch_t_test)
from pmgoal.data import traces_from_arrays
from pmgoal.errors import ValidationError
from pmgoal.evaluation import aggregate, collect_alignments, score_alignments


def test_instance_metrics_definitions():
    assert instance_metrics({"T1"}, "T1") == (1, 1)
    assert instance_metrics(("T1", "T2"), "T1") == (0.5, 1)
    assert instance_metrics(("T2", "T3"), "T1") == (0, 0)
    with pytest.raises(ValidationError):
        instance_metrics((), "T1")


def test_probability_gap():
    assert probability_gap({"T1": 0.7, "T2": 0.3}, ("T1",), "T2") == pytest.approx(0.4)
    assert probability_gap({"T1": 0.7, "T2": 0.3}, ("T1",), "T1") is None


def test_mean_ci_examples():
    assert mean_ci([0.3] * 10) == (pytest.approx(0.3), 0.0)
    m, hw = mean_ci([0, 1] * 50)
    assert m == 0.5
    assert hw == pytest.approx(0.0985, abs=1e-4)
    assert hw == pytest.approx(stats.norm.ppf(0.975) * np.std([0, 1] * 50, ddof=1) / 10, abs=1e-12)


def test_welch_against_scipy():
    rng = np.random.default_rng(77)
    assert welch_t_test([1, 2, 3], [1, 2, 3]) == 1.0
    for _ in range(20):
        a = rng.normal(rng.uniform(-1, 1), rng.uniform(0.2, 2), int(rng.integers(3, 40)))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.2, 2), int(rng.integers(3, 40)))
        assert welch_t_test(a, b) == pytest.approx(stats.ttest_ind(a, b, equal_var=False).pvalue, abs=1e-6)
    a = rng.normal(0, 1e-3, 30)
    b = rng.normal(10, 1e-3, 30)
    assert welch_t_test(a, b) < 1e-6
    assert welch_t_test([1, 1, 1], [2, 2, 2]) == 0.0


def test_sidak_and_f1():
    assert sidak_alpha(0.05, 1) == pytest.approx(0.05)
    assert sidak_alpha(0.05, 4) == pytest.approx(0.012741, abs=1e-6)
    assert sidak_alpha(0.05, 2) == pytest.approx(0.025321, abs=1e-6)
    assert f1(0.4, 0.4) == pytest.approx(0.4)
    assert f1(0, 1) == 0
    assert f1(0.462, 0.826) == pytest.approx(0.5926, abs=5e-4)


def separable_dataset(n_per_goal=3):
    rows, goals = [], []
    for g, level in (("A", 0.0), ("B", 10.0), ("C", -10.0)):
        for _ in range(n_per_goal):
            rows.append(np.column_stack([np.full(12, level), np.full(12, level * 2), np.full(12, -level)]))
            goals.append(g)
    return traces_from_arrays(rows, goals)


def test_perfectly_separable_goals():
    ds = separable_dataset()
    rep = cross_validate(ds, PipelineConfig(n_f=2, n_c=3), methods=("PM",))
    for lv in (0.1, 0.3, 0.5, 0.7):
        row = rep.level("PM", lv)
        assert row["p"] == 1.0 and row["r"] == 1.0


@pytest.fixture(scope="module")
def synth_report():
    from pmgoal import synth_dataset
    ds = synth_dataset(n_goals=3, traces_per_goal=30, n_features=10, regimes=3, noise=0.3, seed=4)
    return cross_validate(ds, PipelineConfig(n_f=5, n_c=8))


def test_protocol_instance_counts(synth_report):
    for m in ("PM", "LDA"):
        assert sum(1 for x in synth_report.records if x.method == m) == 360
    assert synth_report.level("PM", 0.1)["r"] >= synth_report.level("LDA", 0.1)["r"]


def test_lda_rows_have_equal_p_and_r(synth_report):
    for lv in (0.1, 0.3, 0.5, 0.7):
        row = synth_report.level("LDA", lv)
        assert row["p"] == row["r"]


def test_tables_recompute_from_records(synth_report):
    again = aggregate(synth_report.records, synth_report.methods)
    assert json.dumps(again, sort_keys=True) == json.dumps(synth_report.tables, sort_keys=True)
    tt = synth_report.tables["t_tests"]
    assert tt["sidak_alpha"] == pytest.approx(sidak_alpha(0.05, 2))
    assert set(tt["p_values"]["PM_vs_LDA"]) == {"p", "r"}


def test_report_formats(synth_report):
    d = json.loads(synth_report.to_json())
    assert {"config", "summary", "probability_gaps", "t_tests"} <= set(d)
    rows = list(csv.DictReader(io.StringIO(synth_report.to_csv())))
    assert [r["obs_pct"] for r in rows] == ["10", "30", "50", "70"]
    inst = list(csv.DictReader(io.StringIO(synth_report.instances_csv())))
    assert len(inst) == len(synth_report.records)


def test_score_alignments_matches_cross_validate():
    from pmgoal import WeightParams, synth_dataset
    ds = synth_dataset(n_goals=2, traces_per_goal=4, n_features=6, regimes=3, noise=0.8, seed=9)
    for params in (WeightParams(), WeightParams(lam=3.5, delta=0.2, beta=0.3)):
        cfg = PipelineConfig(n_f=3, n_c=5, params=params)
        want = cross_validate(ds, cfg, methods=("PM",)).mean_level_f1("PM")
        got = score_alignments(collect_alignments(ds, cfg), params)
        assert got == pytest.approx(want, abs=1e-12)


def test_workers_do_not_change_records():
    from pmgoal import synth_dataset
    ds = synth_dataset(n_goals=2, traces_per_goal=3, n_features=5, regimes=2, seed=1)
    a = cross_validate(ds, PipelineConfig(n_f=3, n_c=4), workers=1)
    b = cross_validate(ds, PipelineConfig(n_f=3, n_c=4), workers=3)
    assert a.to_json() == b.to_json() and a.instances_csv() == b.instances_csv()

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmgoal import (Artifacts, WeightParams, alignment_weight, build_model, goal_posterior, infer_goals,
                    recognize, train_artifacts)
from pmgoal.align import LOG, MODEL, SYNC, Alignment, Move
from pmgoal.data import truncate_prefix
from pmgoal.errors import DomainError, ValidationError
from pmgoal.recognize import posterior_from_alignments, recognize_events
from pmgoal.running_example import LOG_T1, LOG_T2, TAU, running_example_dataset, running_example_query


def aln(*kinds, log_cost=1.0):
    moves = tuple(Move(k, 0, 0, log_cost if k == LOG else 0.0) for k in kinds)
    return Alignment(moves, sum(m.cost for m in moves))


def test_weight_examples():
    assert alignment_weight(aln(SYNC, SYNC), WeightParams(phi=1.5)) == 1.5
    assert alignment_weight(aln(SYNC, LOG, SYNC), WeightParams(phi=1, lam=2, delta=1)) == 3
    assert alignment_weight(aln(SYNC, LOG, LOG), WeightParams(phi=0, lam=2, delta=0)) == 8
    # a final MODEL move ends the trailing LOG run
    assert aln(SYNC, LOG, MODEL).trailing_log_moves == 0


def test_weight_by_hand_on_running_example():
    m1, m2 = build_model(LOG_T1), build_model(LOG_T2)
    from pmgoal import optimal_alignment
    # log moves at positions 3..7 of 7, five trailing: 1 + 2**5 * (3+4+5+6+7)
    assert alignment_weight(optimal_alignment(TAU, m1)) == 1 + 32 * 25
    # a single log move at position 3, nothing trailing
    assert alignment_weight(optimal_alignment(TAU, m2)) == 4


def test_posterior_examples():
    p = goal_posterior({"g1": 5.0, "g2": 1.0}, beta=1.0)
    assert p["g1"] == pytest.approx(0.0180, abs=1e-4)
    assert p["g2"] == pytest.approx(0.9820, abs=1e-4)
    assert p["g1"] == pytest.approx(1 / (1 + math.exp(4)), abs=1e-15)
    u = goal_posterior({"a": 2.0, "b": 2.0, "c": 2.0})
    assert all(v == pytest.approx(1 / 3) for v in u.values())
    assert goal_posterior({"only": 123.0}) == {"only": 1.0}


def test_posterior_infinite_weight_and_errors():
    p = goal_posterior({"a": math.inf, "b": 3.0})
    assert p == {"a": 0.0, "b": 1.0}
    with pytest.raises(ValidationError):
        goal_posterior({})
    with pytest.raises(ValidationError):
        goal_posterior({"a": float("nan")})


weights = st.dictionaries(st.sampled_from("abcdef"), st.floats(0, 1e3), min_size=1)


@settings(max_examples=200)
@given(weights, st.floats(-1e3, 1e3), st.floats(0.01, 1.0))
def test_posterior_algebra(w, shift, beta):
    p = goal_posterior(w, beta)
    assert abs(sum(p.values()) - 1) < 1e-9
    q = goal_posterior({g: v + shift for g, v in w.items()}, beta)
    for g in w:
        assert abs(p[g] - q[g]) < 1e-12
    for a in w:
        for b in w:
            # strict order needs a gap the exponential can resolve
            if w[b] - w[a] > 1e-9 * max(1.0, abs(w[a])) and p[b] > 0:
                assert p[a] > p[b]


def test_beta_widens_gap():
    w = {"a": 1.0, "b": 2.0}
    gaps = [goal_posterior(w, b)["a"] - goal_posterior(w, b)["b"] for b in (0.1, 0.5, 1.0)]
    assert gaps == sorted(gaps)


def test_lambda_and_delta_monotone():
    a = aln(SYNC, LOG, SYNC, LOG, LOG)
    lam = [alignment_weight(a, WeightParams(lam=x)) for x in (1, 1.5, 2, 4)]
    assert lam == sorted(lam)
    dl = [alignment_weight(a, WeightParams(delta=x)) for x in (0, 0.5, 1, 2)]
    assert dl == sorted(dl)


def test_param_validation():
    for bad in ({"lam": 0.5}, {"beta": 0}, {"beta": 1.5}, {"delta": -1}):
        with pytest.raises(DomainError):
            WeightParams(**bad)
    assert WeightParams.from_dict({"lambda": 3, "phi": 0}).lam == 3


def test_infer_goals_examples():
    assert infer_goals({"g1": 0.7, "g2": 0.3}) == ("g1",)
    assert infer_goals({"g1": 0.5, "g2": 0.5}) == ("g1", "g2")
    assert infer_goals({"g1": 0.4, "g2": 0.39, "g3": 0.21}, 0.02) == ("g1", "g2")


def test_failed_alignment_is_diagnosed():
    post = posterior_from_alignments({"a": None, "b": aln(SYNC)})
    assert post.probabilities == {"a": 0.0, "b": 1.0}
    assert post.inferred == ("b",)
    assert post.diagnostics and post.to_dict()["weights"]["a"] is None


def test_hand_logs_favour_second_goal():
    post = recognize_events(TAU, {"T1": build_model(LOG_T1), "T2": build_model(LOG_T2)})
    assert post.probabilities["T2"] > post.probabilities["T1"]
    assert post.inferred == ("T2",)


def test_running_example_pipeline_favours_second_goal():
    ds = running_example_dataset()
    art = train_artifacts(ds, n_f=15, n_c=10, seed=0)
    post = recognize(running_example_query(), art)
    assert post.probabilities["T2"] > post.probabilities["T1"]


def test_training_trace_fits_own_goal(small_synth):
    params = WeightParams(phi=0.75)
    art = train_artifacts(small_synth, n_f=4, n_c=6, seed=1)
    for t in small_synth.traces:
        post = recognize(t, art, params)
        assert post.alignments[t.goal].total_cost == 0
        assert post.weights[t.goal] == 0.75
        assert t.goal in post.inferred


def test_artifacts_round_trip(tmp_path, small_synth):
    art = train_artifacts(small_synth, n_f=3, n_c=5, seed=2)
    art.save(tmp_path)
    back = Artifacts.load(tmp_path)
    assert back.goals == art.goals
    t = truncate_prefix(small_synth.traces[0], 0.5)
    assert recognize(t, back).to_json() == recognize(t, art).to_json()


def test_posterior_serialises_cleanly(small_synth):
    art = train_artifacts(small_synth, n_f=3, n_c=5)
    d = recognize(small_synth.traces[0], art).to_dict()
    assert set(d) == {"probabilities", "inferred", "weights", "alignments", "diagnostics"}
    assert abs(sum(d["probabilities"].values()) - 1) < 1e-12
    assert np.isfinite(list(d["probabilities"].values())).all()

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmgoal import (ContinuousTrace, CsvSchema, Dataset, load_dataset, save_dataset, split_folds,
                    synth_dataset, truncate_prefix)
from pmgoal.data import prefix_length, traces_from_arrays
from pmgoal.errors import ParseError, SchemaError, ValidationError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_first_row_parses_verbatim(tmp_path):
    p = write(tmp_path, "Trace,Goal,f1,f2\n1,T1,5.19727337,7.02395793\n1,T1,7.76278776,8.08816201\n")
    ds = load_dataset(p)
    t = ds.trace("1")
    assert t.goal == "T1"
    assert t.rows[0, 0] == 5.19727337
    assert ds.feature_names == ("f1", "f2")


def test_header_only_gives_empty_dataset_that_fails_validation(tmp_path):
    ds = load_dataset(write(tmp_path, "Trace,Goal,f1\n"))
    assert len(ds.traces) == 0
    with pytest.raises(ValidationError):
        ds.validate()


def test_interleaved_ids_are_grouped_in_file_order(tmp_path):
    text = "Trace,Goal,a\n1,T1,1\n2,T2,10\n1,T1,2\n2,T2,20\n"
    ds = load_dataset(write(tmp_path, text))
    assert [t.trace_id for t in ds.traces] == ["1", "2"]
    np.testing.assert_array_equal(ds.trace("1").rows[:, 0], [1, 2])
    np.testing.assert_array_equal(ds.trace("2").rows[:, 0], [10, 20])


def test_missing_column_and_bad_values(tmp_path):
    with pytest.raises(SchemaError):
        load_dataset(write(tmp_path, "Id,Goal,a\n1,T1,1\n"))
    with pytest.raises(ParseError):
        load_dataset(write(tmp_path, "Trace,Goal,a\n1,T1,abc\n"))
    with pytest.raises(ValidationError):
        load_dataset(write(tmp_path, "Trace,Goal,a\n1,T1,nan\n"))


def test_custom_schema(tmp_path):
    p = write(tmp_path, "id,label,x,y\n7,up,1,2\n")
    ds = load_dataset(p, CsvSchema(trace_id="id", goal="label"))
    assert ds.trace("7").goal == "up"


def test_round_trip_is_bit_exact(tmp_path):
    ds = synth_dataset(n_goals=2, traces_per_goal=3, n_features=5, seed=3)
    p = tmp_path / "rt.csv"
    save_dataset(ds, p)
    back = load_dataset(p)
    assert back.feature_names == ds.feature_names
    assert [t.trace_id for t in back.traces] == [t.trace_id for t in ds.traces]
    for a, b in zip(ds.traces, back.traces):
        assert a.goal == b.goal
        assert np.array_equal(a.rows, b.rows)


@pytest.mark.parametrize("n, frac, want", [(10, 0.3, 3), (7, 0.1, 1), (9, 0.5, 5), (10, 0.1, 1), (10, 1.0, 10)])
def test_prefix_length_examples(n, frac, want):
    assert prefix_length(n, frac) == want


def test_truncate_full_is_identity():
    t = ContinuousTrace("1", "T1", np.arange(12.0).reshape(4, 3))
    assert truncate_prefix(t, 1.0) == t
    assert len(truncate_prefix(t, 0.5)) == 2
    with pytest.raises(ValidationError):
        truncate_prefix(t, 0.0)


@given(st.integers(1, 500), st.floats(0.001, 1.0))
def test_prefix_length_bounds(n, frac):
    k = prefix_length(n, frac)
    assert 1 <= k <= n
    assert k >= frac * n - 1e-6


def test_rows_are_read_only():
    t = ContinuousTrace("1", "T1", np.zeros((2, 2)))
    with pytest.raises(ValueError):
        t.rows[0, 0] = 1.0


def test_folds_protocol_arithmetic():
    ds = synth_dataset(n_goals=3, traces_per_goal=30, n_features=4, regimes=1, seed=0)
    plan = split_folds(ds)
    assert len(plan.folds) == 30
    seen = []
    for test, train in plan.folds:
        assert len(test) == 3 and len(train) == 87
        assert not set(test) & set(train)
        seen.extend(test)
    assert sorted(seen) == sorted(t.trace_id for t in ds.traces)


def test_folds_two_by_two_partition():
    ds = traces_from_arrays([np.zeros((1, 1))] * 4, ["A", "A", "B", "B"])
    plan = split_folds(ds)
    assert plan.folds[0][0] == ("1", "3")
    assert plan.folds[1][0] == ("2", "4")


def test_folds_degenerate_and_unequal():
    ds = traces_from_arrays([np.zeros((1, 1))], ["A"])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        plan = split_folds(ds)
    assert plan.folds == ((("1",), ()),)
    assert w
    bad = traces_from_arrays([np.zeros((1, 1))] * 3, ["A", "A", "B"])
    with pytest.raises(ValidationError, match="A=2, B=1"):
        split_folds(bad)


def test_synth_zero_noise_single_regime():
    ds = synth_dataset(n_goals=2, traces_per_goal=3, n_features=4, regimes=1, noise=0.0, seed=5)
    for g, traces in ds.by_goal().items():
        first = traces[0].rows[0]
        for t in traces:
            assert np.all(t.rows == first)


def test_synth_is_deterministic():
    a = synth_dataset(seed=11, traces_per_goal=3)
    b = synth_dataset(seed=11, traces_per_goal=3)
    assert a.goals == b.goals == ("T1", "T2", "T3")
    for x, y in zip(a.traces, b.traces):
        assert x.trace_id == y.trace_id and np.array_equal(x.rows, y.rows)
    c = synth_dataset(seed=12, traces_per_goal=3)
    assert not np.array_equal(a.traces[0].rows, c.traces[0].rows)


def test_synth_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        synth_dataset(n_goals=0)
    with pytest.raises(ValidationError):
        synth_dataset(noise=-1)


def test_dataset_goals_first_appearance():
    ds = traces_from_arrays([np.zeros((1, 1))] * 3, ["B", "A", "B"])
    assert ds.goals == ("B", "A")
    assert isinstance(ds, Dataset)
    assert [t.trace_id for t in ds.by_goal()["B"]] == ["1", "3"]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2), min_size=1, max_size=6))
def test_round_trip_property(tmp_path_factory, rows):
    ds = traces_from_arrays([np.array(rows)], ["G"])
    p = tmp_path_factory.mktemp("rt") / "x.csv"
    save_dataset(ds, p)
    assert np.array_equal(load_dataset(p).traces[0].rows, ds.traces[0].rows)

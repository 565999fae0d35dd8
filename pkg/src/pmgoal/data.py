"""Continuous trace datasets: CSV ingestion, prefixes, folds and synthetic data."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, ParseError, SchemaError, ValidationError

DEFAULT_SAMPLE_PERIOD = 0.1  # seconds per row (10 Hz)


def _frozen_rows(rows) -> np.ndarray:
    arr = np.array(rows, dtype=np.float64, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ContinuousTrace:
    """One reaching attempt: ordered rows of real-valued features."""

    trace_id: str
    goal: str
    rows: np.ndarray
    sample_period: float = DEFAULT_SAMPLE_PERIOD

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen_rows(self.rows))
        if self.rows.ndim != 2 or self.rows.shape[0] == 0:
            raise ValidationError(f"trace {self.trace_id!r} has no rows")
        if not np.all(np.isfinite(self.rows)):
            raise ValidationError(f"trace {self.trace_id!r} contains non-finite values")

    def __len__(self):
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ContinuousTrace):
            return NotImplemented
        return (
            self.trace_id == other.trace_id
            and self.goal == other.goal
            and self.sample_period == other.sample_period
            and self.rows.shape == other.rows.shape
            and np.array_equal(self.rows, other.rows)
        )


@dataclass(frozen=True)
class Dataset:
    feature_names: tuple[str, ...]
    traces: tuple[ContinuousTrace, ...]
    goals: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "traces", tuple(self.traces))
        seen = list(dict.fromkeys(t.goal for t in self.traces))
        goals = tuple(self.goals) if self.goals else tuple(seen)
        object.__setattr__(self, "goals", goals)
        F = len(self.feature_names)
        for t in self.traces:
            if t.n_features != F:
                raise ValidationError(
                    f"trace {t.trace_id!r} has {t.n_features} features, expected {F}"
                )
            if t.goal not in goals:
                raise ValidationError(f"trace {t.trace_id!r} has unknown goal {t.goal!r}")

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)

    def validate(self) -> "Dataset":
        if not self.traces:
            raise ValidationError("dataset contains no traces")
        return self

    def by_goal(self) -> dict[str, list[ContinuousTrace]]:
        out: dict[str, list[ContinuousTrace]] = {g: [] for g in self.goals}
        for t in self.traces:
            out[t.goal].append(t)
        return out

    def subset(self, trace_ids) -> "Dataset":
        wanted = set(trace_ids)
        return Dataset(
            self.feature_names,
            tuple(t for t in self.traces if t.trace_id in wanted),
            self.goals,
        )

    def trace(self, trace_id) -> ContinuousTrace:
        for t in self.traces:
            if t.trace_id == trace_id:
                return t
        raise KeyError(trace_id)

    def all_rows(self) -> np.ndarray:
        if not self.traces:
            return np.empty((0, self.feature_count))
        return np.vstack([t.rows for t in self.traces])


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for :func:`load_dataset`. ``features=None`` takes every other column."""

    trace_id: str = "Trace"
    goal: str = "Goal"
    features: tuple[str, ...] | None = None


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


def load_dataset(path, schema: CsvSchema | None = None, sample_period=DEFAULT_SAMPLE_PERIOD) -> Dataset:
    """Read a CSV of (trace id, goal, features...) rows into a :class:`Dataset`.

    Rows are grouped by trace id; within a trace the file order is the time
    order. Interleaved traces are allowed.
    """
    schema = schema or CsvSchema()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        header = [h.strip() for h in header]
        for col in (schema.trace_id, schema.goal):
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        if schema.features is None:
            features = [h for h in header if h not in (schema.trace_id, schema.goal)]
        else:
            features = list(schema.features)
            missing = [c for c in features if c not in header]
            if missing:
                raise SchemaError(f"{path}: missing feature columns {missing}")
        tid_col = header.index(schema.trace_id)
        goal_col = header.index(schema.goal)
        feat_cols = [header.index(c) for c in features]

        grouped: dict[str, tuple[str, list]] = {}
        for row_index, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"row {row_index}: expected {len(header)} cells", row_index)
            tid, goal = row[tid_col].strip(), row[goal_col].strip()
            try:
                values = [float(row[c]) for c in feat_cols]
            except ValueError:
                raise ParseError(f"row {row_index}: non-numeric feature value", row_index) from None
            if tid in grouped:
                if grouped[tid][0] != goal:
                    raise ValidationError(f"trace {tid!r} carries more than one goal label")
                grouped[tid][1].append(values)
            else:
                grouped[tid] = (goal, [values])

    traces = [
        ContinuousTrace(tid, goal, np.asarray(rows, dtype=np.float64).reshape(len(rows), len(features)), sample_period)
        for tid, (goal, rows) in grouped.items()
    ]
    return Dataset(tuple(features), tuple(traces))


def save_dataset(dataset: Dataset, path, schema: CsvSchema | None = None) -> None:
    # repr(float) round-trips exactly
    schema = schema or CsvSchema()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([schema.trace_id, schema.goal, *dataset.feature_names])
        for t in dataset.traces:
            for r in t.rows:
                writer.writerow([t.trace_id, t.goal, *(repr(float(v)) for v in r)])


def prefix_length(n_rows: int, fraction: float) -> int:
    if not 0 < fraction <= 1:
        raise DomainError(f"prefix fraction must be in (0, 1], got {fraction}")
    # round() guards against 0.1 * 10 -> 1.0000000000000002
    return max(1, math.ceil(round(fraction * n_rows, 9)))


def truncate_prefix(trace: ContinuousTrace, fraction: float) -> ContinuousTrace:
    k = prefix_length(len(trace), fraction)
    if k == len(trace):
        return trace
    return ContinuousTrace(trace.trace_id, trace.goal, trace.rows[:k], trace.sample_period)


def split_folds(dataset: Dataset) -> FoldPlan:
    """Leave-one-trace-per-goal-out folds.

    Fold ``i`` tests the ``i``-th trace of every goal and trains on the rest.
    """
    groups = dataset.by_goal()
    counts = {g: len(ts) for g, ts in groups.items()}
    if len(set(counts.values())) > 1:
        detail = ", ".join(f"{g}={n}" for g, n in counts.items())
        raise ValidationError(f"goals have unequal trace counts: {detail}")
    n = next(iter(counts.values()), 0)
    all_ids = [t.trace_id for t in dataset.traces]
    folds = []
    for i in range(n):
        test = tuple(groups[g][i].trace_id for g in dataset.goals)
        test_set = set(test)
        train = tuple(tid for tid in all_ids if tid not in test_set)
        if not train:
            warnings.warn(f"fold {i} has an empty training set", stacklevel=2)
        folds.append((test, train))
    return FoldPlan(tuple(folds))


def synth_dataset(
    n_goals: int = 3,
    traces_per_goal: int = 30,
    n_features: int = 47,
    regimes: int = 4,
    noise: float = 0.3,
    seed: int = 0,
    rows_per_regime: tuple[int, int] = (3, 8),
    n_informative: int | None = None,
) -> Dataset:
    """Seeded regime-switching dataset.

    Every goal owns ``regimes`` mean vectors; a trace visits them in order and
    emits a random number of rows per regime (``rows_per_regime`` inclusive
    bounds), each row being the regime mean plus Gaussian noise. Only the
    first ``n_informative`` features carry regime structure; the rest are
    pure noise.
    """
    for name, v in (("n_goals", n_goals), ("traces_per_goal", traces_per_goal),
                    ("n_features", n_features), ("regimes", regimes)):
        if v < 1:
            raise DomainError(f"{name} must be >= 1")
    if noise < 0:
        raise DomainError("noise must be >= 0")
    lo, hi = rows_per_regime
    if lo < 1 or hi < lo:
        raise DomainError("rows_per_regime must satisfy 1 <= lo <= hi")
    n_inf = n_features if n_informative is None else n_informative
    if not 0 <= n_inf <= n_features:
        raise DomainError("n_informative must be in [0, n_features]")

    rng = np.random.default_rng(seed)
    means = np.zeros((n_goals, regimes, n_features))
    means[:, :, :n_inf] = rng.normal(0.0, 1.0, size=(n_goals, regimes, n_inf))
    goals = tuple(f"T{g + 1}" for g in range(n_goals))
    traces = []
    tid = 1
    for g in range(n_goals):
        for _ in range(traces_per_goal):
            counts = rng.integers(lo, hi + 1, size=regimes)
            blocks = [
                means[g, r] + noise * rng.standard_normal((counts[r], n_features))
                for r in range(regimes)
            ]
            traces.append(ContinuousTrace(str(tid), goals[g], np.vstack(blocks)))
            tid += 1
    names = tuple(f"f{i + 1}" for i in range(n_features))
    return Dataset(names, tuple(traces), goals)


def traces_from_arrays(rows: Sequence, goals: Sequence[str], feature_names=None) -> Dataset:
    """Small convenience constructor used by demos and tests."""
    traces = [ContinuousTrace(str(i + 1), g, r) for i, (r, g) in enumerate(zip(rows, goals))]
    F = traces[0].n_features if traces else 0
    names = tuple(feature_names) if feature_names else tuple(f"f{i + 1}" for i in range(F))
    return Dataset(names, tuple(traces))

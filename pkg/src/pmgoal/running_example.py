"""Six-trace, two-goal worked example.

A handful of reference cells are fixed (trace 1 rows 1-7, trace 2 rows 1-2
and the last two rows of trace 6, for features f1-f3 and f29-f30); every
other cell comes from a seeded smooth-trajectory generator so the example
is complete and reproducible. The hand-built event logs give two contrasting
alignments: the T1 model only matches the first observed event while the
T2 model matches all but one.
"""
from __future__ import annotations

import numpy as np

from .data import ContinuousTrace, Dataset

N_FEATURES = 30
TRACE_LENGTHS = {"1": 7, "2": 8, "3": 8, "4": 9, "5": 8, "6": 9}
GOALS = {"1": "T1", "2": "T1", "3": "T1", "4": "T2", "5": "T2", "6": "T2"}

# (trace, row index or negative from end) -> {feature index (0-based): value}
KNOWN_CELLS = {
    ("1", 0): {0: 5.19727337, 1: 7.02395793, 2: 0.00254431, 28: 5.39759498, 29: -0.3722619},
    ("1", 1): {0: 7.76278776, 1: 8.08816201, 2: 0.00472689, 28: 1.01557531, 29: 1.37592798},
    ("1", 2): {0: 13.4185557, 1: 8.87159453, 2: 0.00821896, 28: -4.0004147, 29: 1.65328609},
    ("1", 3): {0: 22.0916619, 1: 9.04377674, 2: 0.01015369, 28: -5.5399488, 29: -1.7805512},
    ("1", 4): {0: 31.3641039, 1: 9.3586209, 2: 0.009165, 28: -3.5156837, 29: 1.36367015},
    ("1", 5): {0: 38.2312577, 1: 10.139119, 2: 0.00616715, 28: -1.4720033, 29: 5.87820456},
    ("1", 6): {0: 42.0592085, 1: 10.8827908, 2: 0.00315491, 28: -0.3338844, 29: 4.29640897},
    ("2", 0): {0: 7.39110795, 1: 6.07336937, 2: 0.00064332, 28: 2.92403705, 29: 1.46698529},
    ("2", 1): {0: 10.5229866, 1: 7.44734189, 2: 0.00194998, 28: 1.60034347, 29: 2.94734496},
    ("6", -2): {0: 64.1830578, 1: 25.2975943, 2: -0.0003433, 28: -1.1970367, 29: 0.92412363},
    ("6", -1): {0: 66.8916142, 1: 27.5304609, 2: -0.0017204, 28: 0.31022101, 29: 0.95595258},
}

# Event logs whose directly-follows models give those two alignment shapes.
LOG_T1 = [(8, 7), (0, 5, 7), (8, 7, 7), (0, 0, 5, 7)]
LOG_T2 = [
    (8, 6, 1, 1, 9, 4, 3, 7),
    (0, 0, 6, 9, 4, 3, 3, 7),
    (8, 6, 1, 4, 1, 9, 4, 3, 7),
]
TAU = (8, 6, 2, 1, 1, 9)

_SEED = 20231
_N_LATENT = 6


def _latent_endpoints(rng):
    start = rng.normal(0.0, 1.0, _N_LATENT)
    ends = {"T1": rng.normal(2.0, 1.0, _N_LATENT), "T2": rng.normal(-2.0, 1.0, _N_LATENT)}
    return start, ends


def _trajectory(goal, n_rows, rng, start, ends, loadings, offsets, noise=0.15):
    u = np.linspace(0.0, 1.0, n_rows)
    s = u * u * (3 - 2 * u)  # smoothstep
    latent = start[None, :] + (ends[goal] - start)[None, :] * s[:, None]
    latent += noise * rng.standard_normal(latent.shape)
    rows = latent[:, np.arange(N_FEATURES) % _N_LATENT] * loadings + offsets
    return rows + 0.05 * rng.standard_normal(rows.shape)


def _generator():
    rng = np.random.default_rng(_SEED)
    start, ends = _latent_endpoints(rng)
    loadings = rng.uniform(0.5, 3.0, N_FEATURES) * rng.choice([-1.0, 1.0], N_FEATURES)
    offsets = rng.normal(0.0, 5.0, N_FEATURES)
    return rng, start, ends, loadings, offsets


def running_example_dataset() -> Dataset:
    rng, start, ends, loadings, offsets = _generator()
    traces = []
    for tid, n in TRACE_LENGTHS.items():
        rows = _trajectory(GOALS[tid], n, rng, start, ends, loadings, offsets)
        for (t, r), cells in KNOWN_CELLS.items():
            if t == tid:
                for f, v in cells.items():
                    rows[r, f] = v
        traces.append(ContinuousTrace(tid, GOALS[tid], rows))
    names = tuple(f"f{i + 1}" for i in range(N_FEATURES))
    return Dataset(names, tuple(traces), ("T1", "T2"))


def running_example_query(n_rows: int = 6, deviant_row: int = 2) -> ContinuousTrace:
    """A new six-row T2 observation whose third sample is taken from a T1 trajectory."""
    rng, start, ends, loadings, offsets = _generator()
    rng = np.random.default_rng(_SEED + 1)
    full = _trajectory("T2", 9, rng, start, ends, loadings, offsets)
    rows = full[:n_rows].copy()
    odd = _trajectory("T1", 9, rng, start, ends, loadings, offsets)
    rows[deviant_row] = odd[-1]
    return ContinuousTrace("query", "T2", rows)

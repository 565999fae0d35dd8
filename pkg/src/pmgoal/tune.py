"""Structural grid search over (N_f, N_c) and Latin-hypercube weight tuning."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, InfeasibleError, TuningError
from .evaluation import OBS_LEVELS, PipelineConfig, collect_alignments, cross_validate, score_alignments
from .recognize import WeightParams

PARAM_NAMES = ("phi", "delta", "lam", "beta")
DEFAULT_BOUNDS = {"phi": (0.0, 5.0), "delta": (0.0, 2.0), "lam": (1.0, 4.0), "beta": (0.0, 1.0)}


@dataclass
class TuneResult:
    best_config: PipelineConfig
    best_f1: float
    table: list  # [{"key": ..., ...config fields..., "f1": ...}] in evaluation order
    skipped: list = field(default_factory=list)
    seeds: dict = field(default_factory=dict)

    @property
    def best_nf(self) -> int:
        return self.best_config.n_f

    @property
    def best_nc(self) -> int:
        return self.best_config.n_c

    @property
    def best_params(self) -> WeightParams:
        return self.best_config.params

    def to_dict(self) -> dict:
        return {
            "best": {"n_f": self.best_nf, "n_c": self.best_nc, "params": self.best_params.to_dict(),
                     "f1": self.best_f1},
            "table": self.table,
            "skipped": self.skipped,
            "seeds": self.seeds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Progress:
    """Resumable JSON store of finished configurations, keyed by a string."""

    def __init__(self, path):
        self.path = Path(path) if path else None
        self.done = {}
        if self.path and self.path.exists():
            self.done = json.loads(self.path.read_text(encoding="utf-8"))

    def get(self, key):
        return self.done.get(key)

    def put(self, key, value):
        self.done[key] = value
        if self.path:
            self.path.write_text(json.dumps(self.done, indent=1, sort_keys=True), encoding="utf-8")


def _score(dataset, config, obs_levels, workers) -> float:
    report = cross_validate(dataset, config, methods=("PM",), obs_levels=obs_levels, workers=workers)
    subject = sorted(report.tables["summary"])[0]
    return report.mean_level_f1("PM", subject)


def _pick_best(rows):
    # first maximum in table order
    best = None
    for row in rows:
        if best is None or row["f1"] > best["f1"]:
            best = row
    return best


def grid_search(dataset, nf_range, nc_range, base: PipelineConfig = PipelineConfig(),
                obs_levels=OBS_LEVELS, workers: int = 1, progress_path=None) -> TuneResult:
    """Cross-validate every (N_f, N_c) cell; score is the mean per-level F1 of PM.

    Cells are evaluated in sorted order so the tie rule (first maximum) does
    not depend on how the ranges were given. Infeasible cells are skipped.
    """
    cells = sorted({(int(a), int(b)) for a in nf_range for b in nc_range})
    if not cells:
        raise TuningError("empty grid")
    progress = _Progress(progress_path)
    rows, skipped = [], []
    for n_f, n_c in cells:
        key = f"nf={n_f},nc={n_c}"
        cached = progress.get(key)
        if cached is None:
            try:
                cached = {"f1": _score(dataset, replace(base, n_f=n_f, n_c=n_c), obs_levels, workers)}
            except (InfeasibleError, DomainError) as exc:
                cached = {"skipped": str(exc)}
            progress.put(key, cached)
        if "skipped" in cached:
            skipped.append({"key": key, "n_f": n_f, "n_c": n_c, "reason": cached["skipped"]})
            continue
        rows.append({"key": key, "n_f": n_f, "n_c": n_c, "f1": cached["f1"]})
    if not rows:
        raise TuningError("every grid cell was infeasible")
    best = _pick_best(rows)
    cfg = replace(base, n_f=best["n_f"], n_c=best["n_c"])
    return TuneResult(cfg, best["f1"], rows, skipped, {"codebook_seed": base.seed})


def lhs_sample(n: int, seed: int, bounds: dict | None = None, tie_epsilon: float = 1e-9) -> list:
    """Latin-hypercube sample of weight parameters.

    Each range is split into ``n`` equal strata; every stratum is used exactly
    once per parameter, at its midpoint, in a seeded random order.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    b = dict(DEFAULT_BOUNDS)
    b.update(bounds or {})
    for name in PARAM_NAMES:
        lo, hi = b[name]
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            raise DomainError(f"invalid bounds for {name}: {(lo, hi)}")
    if b["lam"][0] < 1:
        raise DomainError("lambda lower bound must be >= 1")
    if b["beta"][0] < 0 or b["beta"][1] > 1 or b["beta"][1] <= 0:
        raise DomainError("beta bounds must lie within (0, 1]")
    if b["delta"][0] < 0:
        raise DomainError("delta lower bound must be >= 0")
    rng = np.random.default_rng(seed)
    cols = {}
    for name in PARAM_NAMES:
        lo, hi = b[name]
        strata = rng.permutation(n)
        cols[name] = lo + (strata + 0.5) / n * (hi - lo)
    return [
        WeightParams(phi=float(cols["phi"][i]), delta=float(cols["delta"][i]), lam=float(cols["lam"][i]),
                     beta=float(cols["beta"][i]), tie_epsilon=tie_epsilon)
        for i in range(n)
    ]


def tune_weights(dataset, candidates, base: PipelineConfig = PipelineConfig(), obs_levels=OBS_LEVELS,
                 workers: int = 1, progress_path=None) -> TuneResult:
    candidates = list(candidates)
    if not candidates:
        raise TuningError("no candidate parameters")
    progress = _Progress(progress_path)
    collected = None  # alignments are weight-independent: compute once
    rows = []
    for i, params in enumerate(candidates):
        key = "params=" + json.dumps(params.to_dict(), sort_keys=True)
        cached = progress.get(key)
        if cached is None:
            if collected is None:
                collected = collect_alignments(dataset, base, obs_levels, workers)
            cached = {"f1": score_alignments(collected, params)}
            progress.put(key, cached)
        rows.append({"key": key, "index": i, **params.to_dict(), "f1": cached["f1"]})
    best = _pick_best(rows)
    cfg = replace(base, params=candidates[best["index"]])
    return TuneResult(cfg, best["f1"], rows, [], {"codebook_seed": base.seed})

"""Cross-validation harness, per-instance metrics and report statistics."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy.special import betainc

from .align import DEFAULT_COSTS, CostFunction
from .data import Dataset, split_folds, truncate_prefix
from .errors import PMGoalError, ValidationError
from .lda import HOLD_ROWS, fit_lda, hold_points, lda_classify
from .recognize import DEFAULT_PARAMS, WeightParams, recognize, train_artifacts

Z_975 = 1.959963984540054
OBS_LEVELS = (0.1, 0.3, 0.5, 0.7)
METHODS = ("PM", "LDA")


# -- metrics -----------------------------------------------------------------


def instance_metrics(inferred, true_goal) -> tuple[float, float]:
    inferred = tuple(inferred)
    if not inferred:
        raise ValidationError("inferred goal set is empty")
    hit = true_goal in inferred
    return (1.0 / len(inferred) if hit else 0.0, 1.0 if hit else 0.0)


def probability_gap(probabilities: dict, inferred, true_goal):
    """Max inferred probability minus the true goal's, or None when correct."""
    if true_goal in inferred:
        return None
    return max(probabilities[g] for g in inferred) - probabilities.get(true_goal, 0.0)


def f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def mean_ci(samples, level: float = 0.95) -> tuple[float, float]:
    """Mean and normal-approximation half-width (only 0.95 is tabulated)."""
    if level != 0.95:
        from scipy.stats import norm

        z = float(norm.ppf(0.5 + level / 2))
    else:
        z = Z_975
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValidationError("mean_ci needs at least one sample")
    mean = float(x.mean())
    if x.size == 1 or np.ptp(x) == 0:  # constant samples: no rounding residue in the sd
        return mean, 0.0
    sd = float(x.std(ddof=1))
    return mean, z * sd / math.sqrt(x.size)


def welch_t_test(a, b) -> float:
    """Two-sided p-value of Welch's unequal-variance t-test."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValidationError("welch_t_test needs at least 2 samples per group")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0:
        return 1.0 if diff == 0 else 0.0
    t = diff / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    # P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def sidak_alpha(alpha: float, m: int) -> float:
    if not 0 < alpha < 1 or m < 1:
        raise ValidationError("need 0 < alpha < 1 and m >= 1")
    return 1.0 - (1.0 - alpha) ** (1.0 / m)


# -- configuration and records -------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    n_f: int = 10
    n_c: int = 20
    seed: int = 0
    filter_threshold: float = 0.0
    linkage: str = "average"
    normalize: bool = True
    params: WeightParams = DEFAULT_PARAMS
    costs: CostFunction = DEFAULT_COSTS
    lda_shrinkage: float | None = None
    lda_hold_rows: int = HOLD_ROWS

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


@dataclass(frozen=True)
class InstanceResult:
    subject: str
    fold: int
    obs_level: float
    method: str
    trace_id: str
    true_goal: str
    inferred: tuple
    probabilities: dict
    p: float
    r: float
    gap: float | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inferred"] = list(self.inferred)
        return d


def _aggregate_block(records) -> dict:
    ps = [x.p for x in records]
    rs = [x.r for x in records]
    pm, pci = mean_ci(ps)
    rm, rci = mean_ci(rs)
    return {"n": len(records), "p": pm, "p_ci": pci, "r": rm, "r_ci": rci, "f1": f1(pm, rm)}


def aggregate(records, methods=None, pairwise_alpha: float = 0.05) -> dict:
    """Summary tables recomputable from the per-instance records alone."""
    records = list(records)
    subjects = sorted({x.subject for x in records})
    methods = list(methods) if methods else sorted({x.method for x in records})
    levels = sorted({x.obs_level for x in records})
    summary: dict = {}
    for s in subjects:
        summary[s] = {}
        for m in methods:
            sub = [x for x in records if x.subject == s and x.method == m]
            if not sub:
                continue
            per_level = {}
            for lv in levels:
                blk = [x for x in sub if x.obs_level == lv]
                if blk:
                    per_level[f"{lv:g}"] = _aggregate_block(blk)
            overall = _aggregate_block(sub)
            overall["mean_level_f1"] = float(np.mean([v["f1"] for v in per_level.values()]))
            summary[s][m] = {"levels": per_level, "overall": overall}

    gaps = {}
    for m in methods:
        g = [x.gap for x in records if x.method == m and x.gap is not None]
        gaps[m] = {"n_wrong": len(g), "mean_gap": float(np.mean(g)) if g else None}

    tests = {}
    pairs = list(combinations(methods, 2))
    n_comparisons = 2 * len(pairs)
    for a, b in pairs:
        xa = [x for x in records if x.method == a]
        xb = [x for x in records if x.method == b]
        entry = {}
        for metric in ("p", "r"):
            va = [getattr(x, metric) for x in xa]
            vb = [getattr(x, metric) for x in xb]
            entry[metric] = welch_t_test(va, vb) if len(va) >= 2 and len(vb) >= 2 else None
        tests[f"{a}_vs_{b}"] = entry
    return {
        "summary": summary,
        "probability_gaps": gaps,
        "t_tests": {
            "pooling": "per-instance",
            "alpha": pairwise_alpha,
            "sidak_alpha": sidak_alpha(pairwise_alpha, n_comparisons) if n_comparisons else None,
            "p_values": tests,
        },
    }


@dataclass
class EvalReport:
    records: list
    config: PipelineConfig
    methods: tuple
    obs_levels: tuple
    tables: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tables:
            self.tables = aggregate(self.records, self.methods)

    def mean_level_f1(self, method: str, subject: str | None = None) -> float:
        subject = subject or sorted(self.tables["summary"])[0]
        return self.tables["summary"][subject][method]["overall"]["mean_level_f1"]

    def level(self, method: str, obs_level: float, subject: str | None = None) -> dict:
        subject = subject or sorted(self.tables["summary"])[0]
        return self.tables["summary"][subject][method]["levels"][f"{obs_level:g}"]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "methods": list(self.methods),
            "obs_levels": list(self.obs_levels),
            **self.tables,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """Wide table: one row per (subject, level), p/r columns per method."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["subject", "features", "clusters", "obs_pct"]
        for m in self.methods:
            header += [f"{m}_p", f"{m}_p_ci", f"{m}_r", f"{m}_r_ci", f"{m}_f1"]
        w.writerow(header)
        summary = self.tables["summary"]
        for s in sorted(summary):
            for lv in self.obs_levels:
                row = [s, self.config.n_f, self.config.n_c, f"{lv * 100:g}"]
                for m in self.methods:
                    b = summary[s][m]["levels"][f"{lv:g}"]
                    row += [f"{b['p']:.6f}", f"{b['p_ci']:.6f}", f"{b['r']:.6f}", f"{b['r_ci']:.6f}", f"{b['f1']:.6f}"]
                w.writerow(row)
        return buf.getvalue()

    def instances_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subject", "fold", "obs_level", "method", "trace_id", "true_goal", "inferred", "p", "r", "gap"])
        for x in self.records:
            w.writerow([x.subject, x.fold, f"{x.obs_level:g}", x.method, x.trace_id, x.true_goal,
                        ";".join(x.inferred), repr(x.p), repr(x.r), "" if x.gap is None else repr(x.gap)])
        return buf.getvalue()


# -- cross-validation -----------------------------------------------------------


def evaluate_fold(dataset: Dataset, fold_index: int, test_ids, train_ids, config: PipelineConfig,
                  methods=METHODS, obs_levels=OBS_LEVELS, subject: str = "1") -> list:
    """Fit every artifact on the training traces and score the test traces."""
    train = dataset.subset(train_ids)
    try:
        # LDA reuses the PM feature selection, so artifacts are always fitted
        artifacts = train_artifacts(train, config.n_f, config.n_c, config.seed, config.filter_threshold,
                                    config.linkage, config.normalize)
        lda_model = None
        if "LDA" in methods:
            X, y = hold_points(train.traces, artifacts.selection.selected, config.lda_hold_rows)
            lda_model = fit_lda(X, y, config.lda_shrinkage, classes=dataset.goals)
    except PMGoalError as exc:
        raise type(exc)(f"fold {fold_index}: {exc}") from exc

    out = []
    for tid in test_ids:
        trace = dataset.trace(tid)
        for lv in obs_levels:
            prefix = truncate_prefix(trace, lv)
            for m in methods:
                try:
                    if m == "PM":
                        post = recognize(prefix, artifacts, config.params, config.costs)
                        probs, inferred = post.probabilities, post.inferred
                    elif m == "LDA":
                        point = prefix.rows[-1][list(artifacts.selection.selected)]
                        label, probs = lda_classify(lda_model, point)
                        inferred = (label,)
                    else:
                        raise ValidationError(f"unknown method {m!r}")
                except PMGoalError as exc:
                    raise type(exc)(f"fold {fold_index}, trace {tid}, level {lv}: {exc}") from exc
                p, r = instance_metrics(inferred, trace.goal)
                out.append(InstanceResult(subject, fold_index, lv, m, tid, trace.goal, tuple(inferred),
                                          probs, p, r, probability_gap(probs, inferred, trace.goal)))
    return out


def _fold_job(args):
    return evaluate_fold(*args)


def cross_validate(dataset: Dataset, config: PipelineConfig = PipelineConfig(), methods=METHODS,
                   obs_levels=OBS_LEVELS, subject: str = "1", workers: int = 1) -> EvalReport:
    dataset.validate()
    plan = split_folds(dataset)
    methods = tuple(methods)
    obs_levels = tuple(float(v) for v in obs_levels)
    jobs = [(dataset, i, test, train, config, methods, obs_levels, subject) for i, (test, train) in enumerate(plan)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_fold_job, jobs))
    else:
        chunks = [_fold_job(j) for j in jobs]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda x: (x.subject, x.fold, x.trace_id, x.obs_level, methods.index(x.method)))
    return EvalReport(records, config, methods, obs_levels)


# -- alignment reuse for weight tuning ----------------------------------------------


def _fold_alignments(args):
    dataset, test_ids, train_ids, config, obs_levels = args
    train = dataset.subset(train_ids)
    artifacts = train_artifacts(train, config.n_f, config.n_c, config.seed, config.filter_threshold,
                                config.linkage, config.normalize)
    out = []
    for tid in test_ids:
        trace = dataset.trace(tid)
        for lv in obs_levels:
            post = recognize(truncate_prefix(trace, lv), artifacts, config.params, config.costs)
            out.append((lv, trace.goal, post.alignments))
    return out


def collect_alignments(dataset: Dataset, config: PipelineConfig, obs_levels=OBS_LEVELS, workers: int = 1) -> list:
    """PM alignments of every (fold, test trace, level); weights do not affect them."""
    dataset.validate()
    obs_levels = tuple(float(v) for v in obs_levels)
    jobs = [(dataset, test, train, config, obs_levels) for test, train in split_folds(dataset)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_fold_alignments, jobs))
    else:
        chunks = [_fold_alignments(j) for j in jobs]
    return [item for chunk in chunks for item in chunk]


def score_alignments(collected, params: WeightParams) -> float:
    """Mean per-level F1 of PM under ``params``, same as ``cross_validate`` would give."""
    from .recognize import posterior_from_alignments

    by_level: dict = {}
    for lv, goal, alignments in collected:
        post = posterior_from_alignments(alignments, params)
        by_level.setdefault(lv, []).append(instance_metrics(post.inferred, goal))
    f1s = []
    for lv in sorted(by_level):
        pr = np.asarray(by_level[lv])
        f1s.append(f1(float(pr[:, 0].mean()), float(pr[:, 1].mean())))
    return float(np.mean(f1s))

"""Event discretization: z-scored rows clustered with seeded k-means."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ValidationError

N_RESTARTS = 10
MAX_ITER = 300


@dataclass(frozen=True)
class EventTrace:
    trace_id: str
    goal: str
    events: tuple[int, ...]

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True, eq=False)
class Codebook:
    n_clusters: int
    selected: tuple[int, ...]
    means: np.ndarray
    stds: np.ndarray
    centroids: np.ndarray
    seed: int
    normalize: bool = True
    wcss: float = float("nan")
    wcss_history: tuple[float, ...] = field(default=(), repr=False)

    def transform(self, rows) -> np.ndarray:
        """Project full-width rows onto the selected features and normalize."""
        X = np.asarray(rows, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        X = X[:, list(self.selected)]
        if self.normalize:
            X = (X - self.means) / self.stds
        return X

    def to_dict(self) -> dict:
        return {
            "n_clusters": self.n_clusters,
            "selected": list(self.selected),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "centroids": self.centroids.tolist(),
            "seed": self.seed,
            "normalize": self.normalize,
            "wcss": self.wcss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Codebook":
        k = int(d["n_clusters"])
        n = len(d["selected"])
        return cls(
            n_clusters=k,
            selected=tuple(int(i) for i in d["selected"]),
            means=np.asarray(d["means"], dtype=np.float64).reshape(n),
            stds=np.asarray(d["stds"], dtype=np.float64).reshape(n),
            centroids=np.asarray(d["centroids"], dtype=np.float64).reshape(k, n),
            seed=int(d["seed"]),
            normalize=bool(d.get("normalize", True)),
            wcss=float(d.get("wcss", float("nan"))),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.to_dict() == other.to_dict() or (
            self.n_clusters == other.n_clusters
            and self.selected == other.selected
            and np.array_equal(self.centroids, other.centroids)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.stds, other.stds)
        )


def fit_normalizer(train_rows, selected) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(train_rows, dtype=np.float64)[:, list(selected)]
    if X.shape[0] < 1:
        raise ValidationError("normalizer needs at least one row")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds[stds == 0] = 1.0
    return means, stds


def _sq_dists(X, C):
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _plusplus(X, k, rng):
    n = X.shape[0]
    centers = [X[int(rng.integers(n))]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            raise InfeasibleError("not enough distinct points for k-means++ seeding")
        idx = int(rng.choice(n, p=d2 / total))
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _repair_empty(X, labels, centroids, k):
    # move the worst-fitting point into each empty cluster
    for c in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[c] > 0:
            continue
        resid = ((X - centroids[labels]) ** 2).sum(axis=1)
        resid[counts[labels] <= 1] = -1.0  # never empty another cluster
        far = int(np.argmax(resid))
        labels[far] = c
        centroids[c] = X[far]
    return labels


def _transfer_cost(x, a, centroids, sizes):
    """Best target b for moving x out of cluster a: (b, cost added at b, cost removed at a)."""
    d2 = ((centroids - x) ** 2).sum(axis=1)
    gain = sizes / (sizes + 1.0) * d2
    gain[a] = np.inf
    b = int(np.argmin(gain))
    return b, gain[b], sizes[a] / (sizes[a] - 1.0) * d2[a]


def _transfer_pass(X, labels, centroids, sizes):
    """Hartigan single-point transfers; returns True if any point moved.

    Moving x from cluster a to b changes the WCSS by
    n_b/(n_b+1)*|x-c_b|^2 - n_a/(n_a-1)*|x-c_a|^2, which Lloyd's
    nearest-centroid rule does not see. Candidates are screened in bulk and
    then moved one at a time in index order, re-checking each against the
    updated centroids.
    """
    moved = False
    rows = np.arange(X.shape[0])
    while True:
        d2 = _sq_dists(X, centroids)
        own = sizes[labels]
        gain = sizes / (sizes + 1.0) * d2
        gain[rows, labels] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            loss = np.where(own > 1, own / (own - 1.0) * d2[rows, labels], -np.inf)
        candidates = np.flatnonzero(gain.min(axis=1) < loss * (1 - 1e-12))
        step = False
        for i in candidates:
            a = labels[i]
            if sizes[a] <= 1:
                continue
            b, added, removed = _transfer_cost(X[i], a, centroids, sizes)
            if added < removed * (1 - 1e-12):
                centroids[a] = (centroids[a] * sizes[a] - X[i]) / (sizes[a] - 1)
                centroids[b] = (centroids[b] * sizes[b] + X[i]) / (sizes[b] + 1)
                sizes[a] -= 1
                sizes[b] += 1
                labels[i] = b
                step = True
        if not step:
            return moved
        moved = True


def _lloyd(X, init, max_iter=MAX_ITER):
    k = init.shape[0]
    centroids = init.copy()
    labels = np.argmin(_sq_dists(X, centroids), axis=1)
    history = []
    for _ in range(max_iter):
        labels = _repair_empty(X, labels, centroids, k)
        for c in range(k):
            centroids[c] = X[labels == c].mean(axis=0)
        history.append(float(((X - centroids[labels]) ** 2).sum()))
        new = np.argmin(_sq_dists(X, centroids), axis=1)
        if np.array_equal(new, labels):
            # Lloyd is stuck; try single-point transfers before giving up
            sizes = np.bincount(labels, minlength=k).astype(np.float64)
            if not _transfer_pass(X, labels, centroids, sizes):
                break
            new = labels.copy()
        labels = new
    wcss = float(((X - centroids[labels]) ** 2).sum())
    return centroids, labels, wcss, history


def kmeans(X, k: int, seed: int, n_restarts: int = N_RESTARTS, max_iter: int = MAX_ITER):
    """Best-of-``n_restarts`` k-means++/Lloyd clustering.

    Returns ``(centroids, labels, wcss, wcss_history)``. The winner is the
    lowest (WCSS, restart index), so the outcome does not depend on the order
    in which restarts are run.
    """
    X = np.asarray(X, dtype=np.float64)
    if k < 1:
        raise InfeasibleError("k must be >= 1")
    n_distinct = np.unique(X, axis=0).shape[0]
    if k > n_distinct:
        raise InfeasibleError(f"{k} clusters requested but only {n_distinct} distinct points")
    children = np.random.SeedSequence(seed).spawn(n_restarts)
    best = None
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        init = _plusplus(X, k, rng)
        res = _lloyd(X, init, max_iter)
        if best is None or res[2] < best[2]:
            best = res
    return best


def fit_codebook(train_rows, selected, n_clusters: int, seed: int = 0, normalize: bool = True,
                 n_restarts: int = N_RESTARTS) -> Codebook:
    X = np.asarray(train_rows, dtype=np.float64)
    selected = tuple(int(i) for i in selected)
    if normalize:
        means, stds = fit_normalizer(X, selected)
    else:
        n = len(selected)
        means, stds = np.zeros(n), np.ones(n)
    Z = X[:, list(selected)]
    if normalize:
        Z = (Z - means) / stds
    centroids, _, wcss, history = kmeans(Z, n_clusters, seed, n_restarts)
    return Codebook(n_clusters, selected, means, stds, centroids, seed, normalize, wcss, tuple(history))


def assign_events(rows, codebook: Codebook) -> np.ndarray:
    X = codebook.transform(rows)
    if not np.all(np.isfinite(X)):
        raise ValidationError("non-finite feature value")
    # argmin picks the lowest centroid index on ties
    return np.argmin(_sq_dists(X, codebook.centroids), axis=1)


def assign_event(row, codebook: Codebook) -> int:
    return int(assign_events(np.asarray(row, dtype=np.float64)[None, :], codebook)[0])


def to_event_trace(trace, codebook: Codebook) -> EventTrace:
    return EventTrace(trace.trace_id, trace.goal, tuple(int(e) for e in assign_events(trace.rows, codebook)))


def discretize(dataset, selection, codebook: Codebook) -> dict[str, list[EventTrace]]:
    """Map every trace to events and group the results into per-goal logs."""
    if selection is not None and tuple(selection.selected) != codebook.selected:
        raise ValidationError("codebook was fitted on a different feature selection")
    logs: dict[str, list[EventTrace]] = {g: [] for g in dataset.goals}
    for t in dataset.traces:
        logs[t.goal].append(to_event_trace(t, codebook))
    return logs

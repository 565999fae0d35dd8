"""Feature reduction by correlation-distance agglomerative clustering.

Features are grouped by ``1 - |pearson|`` with agglomerative clustering and
each group is represented by its medoid feature.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, InsufficientDataError

LINKAGES = ("average", "single", "complete")


@dataclass(frozen=True)
class Merge:
    left: int  # slot of the surviving cluster (lowest member index)
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class FeatureSelection:
    n_selected: int
    clusters: tuple[tuple[int, ...], ...]
    merge_tree: tuple[Merge, ...]
    selected: tuple[int, ...] = ()
    linkage: str = "average"

    @property
    def n_features(self) -> int:
        return sum(len(c) for c in self.clusters)

    def to_dict(self) -> dict:
        return {
            "n_f": self.n_selected,
            "linkage": self.linkage,
            "selected": list(self.selected),
            "clusters": [list(c) for c in self.clusters],
            "merge_tree": [[m.left, m.right, m.height, m.size] for m in self.merge_tree],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSelection":
        return cls(
            n_selected=int(d["n_f"]),
            clusters=tuple(tuple(int(i) for i in c) for c in d["clusters"]),
            merge_tree=tuple(Merge(int(a), int(b), float(h), int(s)) for a, b, h, s in d.get("merge_tree", [])),
            selected=tuple(int(i) for i in d["selected"]),
            linkage=d.get("linkage", "average"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FeatureSelection":
        return cls.from_dict(json.loads(text))


def correlation_matrix(rows) -> np.ndarray:
    """Absolute Pearson correlation between columns of ``rows`` (pooled).

    Zero-variance columns are uncorrelated with everything else.
    """
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientDataError("correlation needs at least 2 rows")
    Xc = X - X.mean(axis=0)
    ss = np.einsum("ij,ij->j", Xc, Xc)
    live = ss > 0
    norms = np.sqrt(np.where(live, ss, 1.0))
    Z = Xc / norms
    C = np.abs(Z.T @ Z)
    C[~live, :] = 0.0
    C[:, ~live] = 0.0
    C = np.triu(C, 1)
    C = C + C.T
    np.clip(C, 0.0, 1.0, out=C)
    np.fill_diagonal(C, 1.0)
    return C


def _merge_distance(linkage, d_ki, d_kj, n_i, n_j):
    if linkage == "average":
        return (n_i * d_ki + n_j * d_kj) / (n_i + n_j)
    if linkage == "single":
        return np.minimum(d_ki, d_kj)
    return np.maximum(d_ki, d_kj)


def build_merge_tree(corr, linkage: str = "average") -> tuple[Merge, ...]:
    """Full agglomeration from singletons down to one cluster.

    The minimum-distance pair merges first; ties go to the lowest
    ``(slot, slot)`` pair, where a cluster's slot is its lowest member.
    """
    if linkage not in LINKAGES:
        raise DomainError(f"unknown linkage {linkage!r}")
    D = 1.0 - np.asarray(corr, dtype=np.float64)
    F = D.shape[0]
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    size = np.ones(F, dtype=int)
    active = np.ones(F, dtype=bool)
    merges = []
    for _ in range(F - 1):
        sub = np.where(active[:, None] & active[None, :], D, np.inf)
        sub = np.triu(sub, 1) + np.tril(np.full_like(sub, np.inf))
        flat = int(np.argmin(sub))  # row-major: lowest (i, j) among ties
        i, j = divmod(flat, F)
        h = float(sub[i, j])
        merges.append(Merge(i, j, h, int(size[i] + size[j])))
        new = _merge_distance(linkage, D[:, i], D[:, j], size[i], size[j])
        D[:, i] = new
        D[i, :] = new
        D[i, i] = np.inf
        D[j, :] = np.inf
        D[:, j] = np.inf
        size[i] += size[j]
        active[j] = False
    return tuple(merges)


def clusters_from_tree(n_features: int, merges, n_clusters: int) -> tuple[tuple[int, ...], ...]:
    """Partition obtained by replaying the first ``F - n_clusters`` merges."""
    members = {i: [i] for i in range(n_features)}
    for m in merges[: n_features - n_clusters]:
        members[m.left].extend(members.pop(m.right))
    return tuple(tuple(sorted(v)) for _, v in sorted(members.items()))


def cut_at_height(n_features: int, merges, height: float) -> tuple[tuple[int, ...], ...]:
    n_merges = sum(1 for m in merges if m.height <= height)
    return clusters_from_tree(n_features, merges, n_features - n_merges)


def cluster_features(corr, n_f: int, linkage: str = "average") -> FeatureSelection:
    F = np.asarray(corr).shape[0]
    if not 1 <= n_f <= F:
        raise DomainError(f"n_f must be in [1, {F}], got {n_f}")
    tree = build_merge_tree(corr, linkage)
    clusters = clusters_from_tree(F, tree, n_f)
    return FeatureSelection(n_selected=n_f, clusters=clusters, merge_tree=tree, linkage=linkage)


def select_medoids(selection: FeatureSelection, corr) -> FeatureSelection:
    D = 1.0 - np.asarray(corr, dtype=np.float64)
    selected = []
    for members in selection.clusters:
        if len(members) == 1:
            selected.append(members[0])
            continue
        idx = np.asarray(members)
        sub = D[np.ix_(idx, idx)]
        avg = (sub.sum(axis=1) - np.diag(sub)) / (len(idx) - 1)
        selected.append(int(idx[int(np.argmin(avg))]))
    return replace(selection, selected=tuple(selected))


def fit_selection(rows, n_f: int, linkage: str = "average") -> FeatureSelection:
    """Correlation, clustering and medoid selection in one call."""
    corr = correlation_matrix(rows)
    return select_medoids(cluster_features(corr, n_f, linkage), corr)

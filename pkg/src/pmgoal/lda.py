"""Linear discriminant baseline on the last observed sample."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ValidationError

SHRINKAGE_LADDER = (0.0, 1e-6, 1e-4, 1e-2)
MAX_CONDITION = 1e12
HOLD_ROWS = 10  # one second at 10 Hz


@dataclass(frozen=True, eq=False)
class LdaModel:
    classes: tuple
    means: np.ndarray  # (K, p)
    covariance: np.ndarray  # shrunk pooled covariance
    shrinkage: float
    priors: np.ndarray

    def __post_init__(self):
        coef = np.linalg.solve(self.covariance, self.means.T)  # (p, K)
        intercept = -0.5 * np.einsum("kp,pk->k", self.means, coef) + np.log(self.priors)
        object.__setattr__(self, "_coef", coef)
        object.__setattr__(self, "_intercept", intercept)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValidationError(f"expected {self.dim} features, got {X.shape[1]}")
        return X @ self._coef + self._intercept

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "means": self.means.tolist(),
            "covariance": self.covariance.tolist(),
            "shrinkage": self.shrinkage,
            "priors": self.priors.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "LdaModel":
        return cls(tuple(d["classes"]), np.asarray(d["means"], float), np.asarray(d["covariance"], float),
                   float(d["shrinkage"]), np.asarray(d["priors"], float))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _shrink(cov, gamma):
    p = cov.shape[0]
    scale = np.trace(cov) / p
    if scale <= 0:
        scale = 1.0
    return (1.0 - gamma) * cov + gamma * scale * np.eye(p)


def fit_lda(X, y, shrinkage: float | None = None, classes=None, priors=None) -> LdaModel:
    """Fit class means and a pooled, optionally shrunk, covariance.

    With ``shrinkage=None`` the smallest value of ``SHRINKAGE_LADDER`` that
    brings the condition number below 1e12 is used (falling back to 1.0).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = list(y)
    if len(y) != X.shape[0]:
        raise ValidationError("X and y lengths differ")
    classes = tuple(classes) if classes is not None else tuple(dict.fromkeys(y))
    if len(classes) < 2:
        raise InsufficientDataError("LDA needs at least two classes")
    labels = np.array([classes.index(v) for v in y])
    K, p = len(classes), X.shape[1]
    means = np.empty((K, p))
    scatter = np.zeros((p, p))
    for k in range(K):
        Xk = X[labels == k]
        if Xk.shape[0] < 2:
            raise InsufficientDataError(f"class {classes[k]!r} has fewer than 2 points")
        means[k] = Xk.mean(axis=0)
        D = Xk - means[k]
        scatter += D.T @ D
    cov = scatter / (X.shape[0] - K)
    if shrinkage is None:
        for gamma in SHRINKAGE_LADDER + (1.0,):
            shrunk = _shrink(cov, gamma)
            if np.linalg.cond(shrunk) < MAX_CONDITION:
                break
    else:
        if not 0 <= shrinkage <= 1:
            raise ValidationError("shrinkage must be in [0, 1]")
        gamma, shrunk = shrinkage, _shrink(cov, shrinkage)
    pri = np.full(K, 1.0 / K) if priors is None else np.asarray(priors, dtype=np.float64)
    return LdaModel(classes, means, shrunk, float(gamma), pri)


def lda_classify(model: LdaModel, point) -> tuple:
    s = model.scores(point)[0]
    k = int(np.argmax(s))
    ex = np.exp(s - s.max())
    post = ex / ex.sum()
    return model.classes[k], dict(zip(model.classes, (float(v) for v in post)))


def hold_points(traces, selected, hold_rows: int = HOLD_ROWS):
    """Last ``hold_rows`` rows of each trace, projected, with goal labels."""
    X, y = [], []
    for t in traces:
        rows = t.rows[-hold_rows:][:, list(selected)]
        X.append(rows)
        y.extend([t.goal] * rows.shape[0])
    return np.vstack(X), y


def lda_recognize(prefix, model: LdaModel, selection) -> str:
    if len(prefix.rows) == 0:
        raise ValidationError("empty prefix")
    label, _ = lda_classify(model, prefix.rows[-1][list(selection.selected)])
    return label

"""Goal posteriors from alignment weights, and the end-to-end recognizer."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .align import DEFAULT_COSTS, Alignment, CostFunction, optimal_alignment
from .data import ContinuousTrace, Dataset
from .discover import GoalModel, build_model
from .errors import AlignmentError, DomainError, ValidationError
from .featsel import FeatureSelection, fit_selection
from .quantize import Codebook, discretize, fit_codebook, to_event_trace


@dataclass(frozen=True)
class WeightParams:
    phi: float = 1.0
    delta: float = 1.0
    lam: float = 2.0
    beta: float = 1.0
    tie_epsilon: float = 1e-9

    def __post_init__(self):
        if self.lam < 1:
            raise DomainError("lambda must be >= 1")
        if not 0 < self.beta <= 1:
            raise DomainError("beta must be in (0, 1]")
        if self.delta < 0:
            raise DomainError("delta must be >= 0")
        if self.tie_epsilon < 0:
            raise DomainError("tie_epsilon must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "WeightParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**{k: float(v) for k, v in d.items() if k in cls.__dataclass_fields__})


DEFAULT_PARAMS = WeightParams()


def alignment_weight(alignment: Alignment, params: WeightParams = DEFAULT_PARAMS) -> float:
    """phi + lam**m * sum_i i**delta * cost_i over 1-based move positions.

    ``m`` is the length of the trailing run of LOG moves; a final MODEL move
    makes it zero.
    """
    total = 0.0
    for i, mv in enumerate(alignment.moves, start=1):
        if mv.cost:
            total += (i ** params.delta) * mv.cost
    return params.phi + (params.lam ** alignment.trailing_log_moves) * total


def goal_posterior(weights: dict, beta: float = 1.0) -> dict:
    """Softmax of ``-beta * weight``; infinite weights get probability 0."""
    if not weights:
        raise ValidationError("need at least one goal")
    w = np.array([float(v) for v in weights.values()])
    if np.any(np.isnan(w)) or np.any(w == -np.inf):
        raise ValidationError("weights must be finite or +inf")
    finite = np.isfinite(w)
    if not finite.any():
        raise AlignmentError("no goal model admits an alignment")
    shifted = np.where(finite, w - w[finite].min(), np.inf)
    ex = np.exp(-beta * shifted)
    probs = ex / ex.sum()
    return dict(zip(weights.keys(), (float(p) for p in probs)))


def infer_goals(probabilities: dict, tie_epsilon: float = 1e-9) -> tuple:
    top = max(probabilities.values())
    return tuple(g for g, p in probabilities.items() if p >= top - tie_epsilon)


@dataclass
class GoalPosterior:
    probabilities: dict
    inferred: tuple
    weights: dict
    alignments: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        summary = {}
        for g, a in self.alignments.items():
            summary[g] = None if a is None else {"cost": a.total_cost, "m": a.trailing_log_moves, "n": a.n}
        return {
            "probabilities": self.probabilities,
            "inferred": list(self.inferred),
            "weights": {g: (None if math.isinf(w) else w) for g, w in self.weights.items()},
            "alignments": summary,
            "diagnostics": list(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def posterior_from_alignments(alignments: dict, params: WeightParams = DEFAULT_PARAMS) -> GoalPosterior:
    weights = {}
    diagnostics = []
    for g, a in alignments.items():
        if a is None:
            weights[g] = math.inf
            diagnostics.append(f"goal {g}: model admits no alignment")
        else:
            weights[g] = alignment_weight(a, params)
    probs = goal_posterior(weights, params.beta)
    return GoalPosterior(probs, infer_goals(probs, params.tie_epsilon), weights, dict(alignments), diagnostics)


def recognize_events(events, models: dict, params: WeightParams = DEFAULT_PARAMS,
                     costs: CostFunction = DEFAULT_COSTS) -> GoalPosterior:
    alignments = {}
    for g, model in models.items():
        try:
            alignments[g] = optimal_alignment(events, model, costs)
        except AlignmentError:
            alignments[g] = None
    return posterior_from_alignments(alignments, params)


@dataclass
class Artifacts:
    """Everything fitted at training time: selection, codebook, goal models."""

    selection: FeatureSelection
    codebook: Codebook
    models: dict

    @property
    def goals(self) -> tuple:
        return tuple(self.models)

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "selection.json").write_text(self.selection.to_json(), encoding="utf-8")
        (d / "codebook.json").write_text(self.codebook.to_json(), encoding="utf-8")
        (d / "goals.json").write_text(json.dumps(list(self.models)), encoding="utf-8")
        for g, m in self.models.items():
            (d / f"model.{g}.json").write_text(m.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, directory) -> "Artifacts":
        d = Path(directory)
        selection = FeatureSelection.from_json((d / "selection.json").read_text(encoding="utf-8"))
        codebook = Codebook.from_json((d / "codebook.json").read_text(encoding="utf-8"))
        goals = json.loads((d / "goals.json").read_text(encoding="utf-8"))
        models = {g: GoalModel.from_json((d / f"model.{g}.json").read_text(encoding="utf-8")) for g in goals}
        return cls(selection, codebook, models)


def train_artifacts(train: Dataset, n_f: int, n_c: int, seed: int = 0, filter_threshold: float = 0.0,
                    linkage: str = "average", normalize: bool = True) -> Artifacts:
    rows = train.all_rows()
    selection = fit_selection(rows, n_f, linkage)
    codebook = fit_codebook(rows, selection.selected, n_c, seed, normalize)
    logs = discretize(train, selection, codebook)
    models = {g: build_model(logs[g], filter_threshold, goal=g) for g in train.goals if logs[g]}
    return Artifacts(selection, codebook, models)


def recognize(prefix: ContinuousTrace, artifacts: Artifacts, params: WeightParams = DEFAULT_PARAMS,
              costs: CostFunction = DEFAULT_COSTS) -> GoalPosterior:
    events = to_event_trace(prefix, artifacts.codebook).events
    return recognize_events(events, artifacts.models, params, costs)

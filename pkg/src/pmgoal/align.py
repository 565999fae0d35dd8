"""Optimal alignments between event traces and directly-follows models.

The search runs over the synchronous product of the trace and the model:
node ``(i, s)`` means ``i`` trace events consumed and the model in state
``s``. Three moves leave a node:

* SYNC  -- the next trace event labels an arc out of ``s``;
* MODEL -- follow any arc out of ``s`` without consuming the trace;
* LOG   -- consume the next trace event, model stays put.

An alignment is complete at ``(len(trace), s)`` with ``s -> END`` an arc.

Exact cost-to-go values are computed layer by layer (backward in ``i``);
inside a layer only MODEL moves exist, so the cost-to-go is a min over
model-graph hop distances, evaluated with numpy. A greedy forward pass over
the optimal edges then emits the canonical alignment: among all minimum-cost
alignments of minimum length, the lexicographically smallest under the move
order SYNC < MODEL (by target symbol) < LOG.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .discover import END, START, GoalModel
from .errors import AlignmentError, OracleInfeasibleError

SYNC, MODEL, LOG = "SYNC", "MODEL", "LOG"
SKIP = "≫"  # rendered skip symbol
_TOL = 1e-9


@dataclass(frozen=True)
class CostFunction:
    log: float = 1.0
    model: float = 0.0
    sync: float = 0.0

    def __post_init__(self):
        if min(self.log, self.model, self.sync) < 0:
            raise ValueError("move costs must be non-negative")


DEFAULT_COSTS = CostFunction()


@dataclass(frozen=True)
class Move:
    kind: str
    trace_event: int | None
    model_event: int | None
    cost: float


@dataclass(frozen=True)
class Alignment:
    moves: tuple[Move, ...]
    total_cost: float

    @property
    def n(self) -> int:
        return len(self.moves)

    def __len__(self):
        return len(self.moves)

    @property
    def trailing_log_moves(self) -> int:
        m = 0
        for mv in reversed(self.moves):
            if mv.kind != LOG:
                break
            m += 1
        return m

    def trace_projection(self) -> tuple[int, ...]:
        return tuple(m.trace_event for m in self.moves if m.kind != MODEL)

    def model_projection(self) -> tuple[int, ...]:
        return tuple(m.model_event for m in self.moves if m.kind != LOG)

    def counts(self) -> dict[str, int]:
        out = {SYNC: 0, MODEL: 0, LOG: 0}
        for m in self.moves:
            out[m.kind] += 1
        return out

    def to_table(self) -> str:
        """Two-row text table, trace on top and model below."""
        def cell(v):
            return SKIP if v is None else f"e{v}"

        top = [cell(m.trace_event) for m in self.moves]
        bot = [cell(m.model_event) for m in self.moves]
        w = max([len(c) for c in top + bot] + [1])
        fmt = lambda row: "| " + " | ".join(c.ljust(w) for c in row) + " |"
        return f"trace {fmt(top)}\nmodel {fmt(bot)}"

    def to_dict(self) -> dict:
        return {
            "cost": self.total_cost,
            "n": self.n,
            "m": self.trailing_log_moves,
            "moves": [[m.kind, m.trace_event, m.model_event, m.cost] for m in self.moves],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class _Product:
    """Per-model arrays reused across alignments."""

    def __init__(self, model: GoalModel):
        states = [s for s in model.states if s != END]
        self.states = states
        self.index = {s: k for k, s in enumerate(states)}
        S = len(states)
        adj = np.zeros((S, S), dtype=bool)
        for a, b in model.arcs:
            if b != END:
                adj[self.index[a], self.index[b]] = True
        self.adj = adj
        self.can_end = np.array([s in model.can_end for s in states])
        hops = shortest_path(csr_matrix(adj.astype(np.float64)), method="D", unweighted=True)
        self.reach = np.isfinite(hops)
        self.hops = np.where(self.reach, hops, 0.0)
        self.hops_int = self.hops.astype(np.int64)


def _product(model: GoalModel) -> _Product:
    # cached on the (immutable) model itself; a hash-keyed cache would have to
    # compare whole arc tables whenever goal names collide
    prod = model.__dict__.get("_product")
    if prod is None:
        prod = _Product(model)
        object.__setattr__(model, "_product", prod)
    return prod


def _model_closure(cost0, len0, prod: _Product, c_model: float):
    """Cost-to-go after MODEL moves inside one layer, as (cost, length)."""
    # candidate t reachable from s: cost0[t] + c_model * hops[s, t]
    cand = np.where(prod.reach, cost0[None, :] + c_model * prod.hops, np.inf)
    best = cand.min(axis=1)
    tie = cand <= best[:, None] + _TOL
    lens = np.where(tie & np.isfinite(cand), len0[None, :] + prod.hops_int, np.iinfo(np.int64).max)
    return best, lens.min(axis=1)


def _pair_min(c1, l1, c2, l2):
    take2 = (c2 < c1 - _TOL) | ((np.abs(c2 - c1) <= _TOL) & (l2 < l1))
    return np.where(take2, c2, c1), np.where(take2, l2, l1)


def _cost_to_go(events, prod: _Product, costs: CostFunction):
    n = len(events)
    S = len(prod.states)
    big = np.iinfo(np.int64).max
    H = np.full((n + 1, S), np.inf)
    L = np.full((n + 1, S), big, dtype=np.int64)
    c0 = np.where(prod.can_end, 0.0, np.inf)
    l0 = np.where(prod.can_end, 0, big)
    H[n], L[n] = _model_closure(c0, l0, prod, costs.model)
    for i in range(n - 1, -1, -1):
        # LOG: stay in s
        nxt_l = np.where(L[i + 1] < big, L[i + 1] + 1, big)
        c, l = costs.log + H[i + 1], nxt_l
        e = events[i]
        k = prod.index.get(e)
        if k is not None and k != prod.index[START]:
            ok = prod.adj[:, k]
            sc = np.where(ok, costs.sync + H[i + 1, k], np.inf)
            sl = np.where(ok & (L[i + 1, k] < big), L[i + 1, k] + 1, big)
            c, l = _pair_min(c, l, sc, sl)
        H[i], L[i] = _model_closure(c, l, prod, costs.model)
    return H, L


def optimal_alignment(events, model: GoalModel, costs: CostFunction = DEFAULT_COSTS) -> Alignment:
    events = tuple(int(e) for e in events)
    prod = _product(model)
    H, L = _cost_to_go(events, prod, costs)
    s = prod.index[START]
    if not np.isfinite(H[0, s]):
        raise AlignmentError(f"model for goal {model.goal!r} has no START-END path")

    def optimal(i, k, step_cost, i2, k2):
        return (abs(step_cost + H[i2, k2] - H[i, k]) <= _TOL) and L[i2, k2] + 1 == L[i, k]

    moves = []
    i, k, n = 0, s, len(events)
    while L[i, k] > 0:
        chosen = None
        if i < n:
            e = events[i]
            k2 = prod.index.get(e)
            if k2 is not None and prod.adj[k, k2] and optimal(i, k, costs.sync, i + 1, k2):
                chosen = (Move(SYNC, e, e, costs.sync), i + 1, k2)
        if chosen is None:
            for k2 in np.flatnonzero(prod.adj[k]):  # ascending symbol order
                if optimal(i, k, costs.model, i, k2):
                    chosen = (Move(MODEL, None, prod.states[k2], costs.model), i, int(k2))
                    break
        if chosen is None and i < n and optimal(i, k, costs.log, i + 1, k):
            chosen = (Move(LOG, events[i], None, costs.log), i + 1, k)
        if chosen is None:  # pragma: no cover - guarded by the cost-to-go invariant
            raise AlignmentError("inconsistent cost-to-go table")
        mv, i, k = chosen
        moves.append(mv)
    total = float(sum(m.cost for m in moves))
    return Alignment(tuple(moves), total)


def align_all(events, models: dict, costs: CostFunction = DEFAULT_COSTS, workers: int = 1) -> dict:
    """Align one trace against every goal model; results keyed like ``models``."""
    goals = list(models)
    if workers <= 1 or len(goals) <= 1:
        return {g: optimal_alignment(events, models[g], costs) for g in goals}
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(optimal_alignment, tuple(events), models[g], costs) for g in goals]
        return {g: f.result() for g, f in zip(goals, futures)}


# ---------------------------------------------------------------------------
# verification oracle


def _bfs_hops(model: GoalModel):
    """hops[a][b]: fewest arcs from a to b, at least one arc."""
    succ = {}
    for a, b in model.arcs:
        if b != END:
            succ.setdefault(a, []).append(b)
    states = [s for s in model.states if s != END]
    out = {}
    for a in states:
        dist = {}
        frontier = list(succ.get(a, ()))
        d = 1
        while frontier:
            nxt = []
            for x in frontier:
                if x not in dist:
                    dist[x] = d
                    nxt.extend(succ.get(x, ()))
            frontier = nxt
            d += 1
        out[a] = dist
    return out


def brute_force_alignment(events, model: GoalModel, costs: CostFunction = DEFAULT_COSTS,
                          depth_cap: int = 16) -> float:
    """Minimal alignment cost by exhaustive enumeration (test oracle).

    Every alignment is characterised by the set of trace positions that move
    synchronously plus the model run stitched around them; for a fixed set
    the cheapest run concatenates shortest model paths between consecutive
    synced symbols. All ``2**len(events)`` subsets are enumerated.
    """
    events = tuple(events)
    n = len(events)
    if n > depth_cap:
        raise OracleInfeasibleError(f"trace of length {n} exceeds depth cap {depth_cap}")
    hops = _bfs_hops(model)
    can_end = model.can_end

    def to_end(a):
        if a in can_end:
            return 0
        return min((d for b, d in hops[a].items() if b in can_end), default=None)

    best = None
    for k in range(n + 1):
        for subset in combinations(range(n), k):
            syms = [events[p] for p in subset]
            run = 0
            cur = START
            feasible = True
            for x in syms:
                d = hops.get(cur, {}).get(x)
                if d is None:
                    feasible = False
                    break
                run += d
                cur = x
            if not feasible:
                continue
            tail = to_end(cur)
            if tail is None:
                continue
            run += tail
            cost = costs.sync * k + costs.log * (n - k) + costs.model * (run - k)
            if best is None or cost < best:
                best = cost
    if best is None:
        raise AlignmentError("model has no START-END path")
    return float(best)

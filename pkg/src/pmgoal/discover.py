"""Directly-follows process discovery, one automaton per goal."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

from .errors import DiscoveryError, ValidationError

START = -1
END = -2


def state_name(s: int) -> str:
    if s == START:
        return "START"
    if s == END:
        return "END"
    return f"e{s}"


def _parse_state(name: str) -> int:
    if name == "START":
        return START
    if name == "END":
        return END
    return int(name.lstrip("e"))


@dataclass(frozen=True)
class GoalModel:
    """Directly-follows automaton with artificial START/END states.

    A state is an event symbol; taking the arc ``s -> e`` emits ``e``. The arc
    into END is silent.
    """

    goal: str
    arcs: dict = field(hash=False)  # (src, dst) -> frequency
    filter_threshold: float = 0.0

    @cached_property
    def states(self) -> tuple[int, ...]:
        out = {START, END}
        for a, b in self.arcs:
            out.add(a)
            out.add(b)
        return tuple(sorted(out))

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        """Event successors of each state, ascending; END excluded."""
        succ: dict[int, list[int]] = {s: [] for s in self.states}
        for a, b in self.arcs:
            if b != END:
                succ[a].append(b)
        return {s: tuple(sorted(v)) for s, v in succ.items()}

    @cached_property
    def can_end(self) -> frozenset:
        return frozenset(a for a, b in self.arcs if b == END)

    @property
    def total_count(self) -> int:
        return sum(self.arcs.values())

    def has_path(self) -> bool:
        seen = {START}
        stack = [START]
        while stack:
            s = stack.pop()
            if s in self.can_end:
                return True
            for t in self.successors.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return False

    def to_dict(self) -> dict:
        return {
            "goal": self.goal,
            "filter_threshold": self.filter_threshold,
            "states": [state_name(s) for s in self.states],
            "arcs": [[state_name(a), state_name(b), n] for (a, b), n in sorted(self.arcs.items())],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GoalModel":
        arcs = {(_parse_state(a), _parse_state(b)): int(n) for a, b, n in d["arcs"]}
        return cls(d["goal"], arcs, float(d.get("filter_threshold", 0.0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GoalModel":
        return cls.from_dict(json.loads(text))

    def to_dot(self) -> str:
        lines = [f'digraph "{self.goal}" {{', "  rankdir=LR;"]
        for s in self.states:
            shape = "circle" if s in (START, END) else "box"
            lines.append(f'  "{state_name(s)}" [shape={shape}];')
        for (a, b), n in sorted(self.arcs.items()):
            lines.append(f'  "{state_name(a)}" -> "{state_name(b)}" [label="{n}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _prune(arcs: dict) -> dict:
    fwd: dict[int, set] = {}
    bwd: dict[int, set] = {}
    for a, b in arcs:
        fwd.setdefault(a, set()).add(b)
        bwd.setdefault(b, set()).add(a)

    def reach(start, adj):
        seen = {start}
        stack = [start]
        while stack:
            for t in adj.get(stack.pop(), ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    keep = reach(START, fwd) & reach(END, bwd)
    return {(a, b): n for (a, b), n in arcs.items() if a in keep and b in keep}


def build_model(log, filter_threshold: float = 0.0, goal: str | None = None) -> GoalModel:
    """Directly-follows automaton of ``log`` (EventTraces or plain sequences).

    Arcs whose relative frequency falls below ``filter_threshold`` are dropped,
    then states off every START-END path are pruned.
    """
    if not 0 <= filter_threshold < 1:
        raise ValidationError("filter_threshold must be in [0, 1)")
    log = list(log)
    if not log:
        raise ValidationError("cannot discover a model from an empty log")
    counts: Counter = Counter()
    for t in log:
        events = tuple(getattr(t, "events", t))
        if not events:
            raise ValidationError("log contains an empty trace")
        counts[(START, events[0])] += 1
        for a, b in zip(events, events[1:]):
            counts[(a, b)] += 1
        counts[(events[-1], END)] += 1
    if goal is None:
        goal = getattr(log[0], "goal", "")
    arcs = dict(sorted(counts.items()))
    if filter_threshold > 0:
        total = sum(arcs.values())
        arcs = {k: n for k, n in arcs.items() if n / total >= filter_threshold}
        arcs = _prune(arcs)
    model = GoalModel(goal, arcs, filter_threshold)
    if not arcs or not model.has_path():
        raise DiscoveryError(f"filtering removed every START-END path for goal {goal!r}")
    return model


def accepts(model: GoalModel, events) -> bool:
    state = START
    for e in events:
        if e not in model.successors.get(state, ()):
            return False
        state = e
    return state in model.can_end

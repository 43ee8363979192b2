"""Reset Petri nets, workflow nets and their firing semantics.

Markings are plain tuples of non-negative ints indexed by place position.
Runs are tuples of transition indices. Both are immutable, so nets and
everything derived from them can be shared freely.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

Marking = tuple
Run = tuple


class NetError(ValueError):
    """Malformed net or marking (bad names, wrong dimensions)."""


class DisabledError(RuntimeError):
    """Raised by :func:`fire_run` when a transition cannot fire."""

    def __init__(self, index: int, transition: int, marking: Marking):
        super().__init__(f"transition #{transition} disabled at step {index}")
        self.index = index
        self.transition = transition
        self.marking = marking


def _check_name(name: str, kind: str) -> None:
    if not isinstance(name, str) or not name or any(c.isspace() for c in name):
        raise NetError(f"invalid {kind} name {name!r}")


@dataclass(frozen=True)
class ResetNet:
    places: tuple[str, ...]
    transitions: tuple[str, ...]
    pre: tuple[tuple[int, ...], ...]
    post: tuple[tuple[int, ...], ...]
    reset: tuple[frozenset, ...]
    _pidx: dict = field(init=False, repr=False, compare=False, hash=False)
    _tidx: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for p in self.places:
            _check_name(p, "place")
        for t in self.transitions:
            _check_name(t, "transition")
        if len(set(self.places)) != len(self.places):
            raise NetError("duplicate place name")
        if len(set(self.transitions)) != len(self.transitions):
            raise NetError("duplicate transition name")
        n, m = len(self.places), len(self.transitions)
        if not (len(self.pre) == len(self.post) == len(self.reset) == m):
            raise NetError("pre/post/reset must have one entry per transition")
        for vecs in (self.pre, self.post):
            for v in vecs:
                if len(v) != n or any(x < 0 for x in v):
                    raise NetError("arc weight vectors must be non-negative, one entry per place")
        for r in self.reset:
            if any(not 0 <= p < n for p in r):
                raise NetError("reset set refers to an unknown place")
        object.__setattr__(self, "_pidx", {p: k for k, p in enumerate(self.places)})
        object.__setattr__(self, "_tidx", {t: k for k, t in enumerate(self.transitions)})

    @classmethod
    def build(cls, places: Sequence[str], transitions: Iterable[tuple]) -> "ResetNet":
        """Build from names.

        ``transitions`` holds ``(name, pre, post)`` or ``(name, pre, post, reset)``
        where ``pre``/``post`` map place names to weights (or are iterables of
        names, weight 1 each) and ``reset`` is an iterable of place names.
        """
        places = tuple(places)
        idx = {p: k for k, p in enumerate(places)}

        def vec(spec):
            v = [0] * len(places)
            items = spec.items() if isinstance(spec, Mapping) else ((p, 1) for p in spec)
            for p, w in items:
                if p not in idx:
                    raise NetError(f"unknown place {p!r}")
                v[idx[p]] += w
            return tuple(v)

        names, pre, post, reset = [], [], [], []
        for tr in transitions:
            name, tpre, tpost, *rest = tr
            treset = rest[0] if rest else ()
            names.append(name)
            pre.append(vec(tpre))
            post.append(vec(tpost))
            for p in treset:
                if p not in idx:
                    raise NetError(f"unknown place {p!r}")
            reset.append(frozenset(idx[p] for p in treset))
        return cls(places, tuple(names), tuple(pre), tuple(post), tuple(reset))

    @property
    def num_places(self) -> int:
        return len(self.places)

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    @property
    def has_resets(self) -> bool:
        return any(self.reset)

    def place(self, name: str) -> int:
        try:
            return self._pidx[name]
        except KeyError:
            raise NetError(f"unknown place {name!r}") from None

    def transition(self, name: str) -> int:
        try:
            return self._tidx[name]
        except KeyError:
            raise NetError(f"unknown transition {name!r}") from None

    def zero(self) -> Marking:
        return (0,) * len(self.places)

    def marking(self, counts: Mapping[str, int] | None = None, **kw: int) -> Marking:
        """Marking from a ``{place: count}`` mapping; omitted places are 0."""
        m = [0] * len(self.places)
        for name, c in {**(counts or {}), **kw}.items():
            if c < 0:
                raise NetError(f"negative token count for {name!r}")
            m[self.place(name)] = c
        return tuple(m)

    def unit(self, place: int, count: int = 1) -> Marking:
        m = [0] * len(self.places)
        m[place] = count
        return tuple(m)

    def run(self, names: str | Iterable[str]) -> Run:
        """Parse a run given as transition names (whitespace separated string or list)."""
        if isinstance(names, str):
            names = names.split()
        return tuple(self.transition(n) for n in names)

    def run_names(self, run: Run) -> list[str]:
        return [self.transitions[t] for t in run]

    def preset_of_place(self, p: int) -> list[int]:
        return [t for t in range(len(self.transitions)) if self.post[t][p] > 0]

    def postset_of_place(self, p: int) -> list[int]:
        return [t for t in range(len(self.transitions)) if self.pre[t][p] > 0]

    def is_plain(self) -> bool:
        return not self.has_resets


@dataclass(frozen=True)
class WorkflowNet:
    net: ResetNet
    initial: int
    final: int

    def initial_marking(self, k: int) -> Marking:
        return self.net.unit(self.initial, k)

    def final_marking(self, k: int) -> Marking:
        return self.net.unit(self.final, k)


def leq(a: Sequence, b: Sequence) -> bool:
    return all(x <= y for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> Marking:
    return tuple(x + y for x, y in zip(a, b))


def enabled(net: ResetNet, m: Marking, t: int) -> bool:
    return all(x >= w for x, w in zip(m, net.pre[t]))


def fire(net: ResetNet, m: Marking, t: int) -> Marking | None:
    """Fire ``t`` in ``m``; ``None`` when ``t`` is disabled.

    Consume the preset, empty the reset places, then produce the postset.
    """
    if len(m) != len(net.places):
        raise NetError(f"marking has dimension {len(m)}, net has {len(net.places)} places")
    pre, post, reset = net.pre[t], net.post[t], net.reset[t]
    out = []
    for p, (x, a, b) in enumerate(zip(m, pre, post)):
        if x < a:
            return None
        out.append(b if p in reset else x - a + b)
    return tuple(out)


def fire_run(net: ResetNet, m: Marking, run: Iterable[int]) -> Marking:
    """Replay ``run`` from ``m``; raises :class:`DisabledError` on the first disabled step."""
    for k, t in enumerate(run):
        nxt = fire(net, m, t)
        if nxt is None:
            raise DisabledError(k, t, m)
        m = nxt
    return m


def trace(net: ResetNet, m: Marking, run: Iterable[int]) -> list[Marking]:
    """All intermediate markings of ``run`` including start and end."""
    out = [m]
    for k, t in enumerate(run):
        nxt = fire(net, out[-1], t)
        if nxt is None:
            raise DisabledError(k, t, out[-1])
        out.append(nxt)
    return out


def successors(net: ResetNet, m: Marking):
    for t in range(len(net.transitions)):
        nxt = fire(net, m, t)
        if nxt is not None:
            yield t, nxt


class BudgetExceeded(RuntimeError):
    """A configured size/step/time budget was exhausted."""


class StateSpaceLimit(BudgetExceeded):
    """Forward exploration visited more markings than allowed."""


def explore(net: ResetNet, m0: Marking, limit: int | None = None) -> dict:
    """Breadth-first reachability from ``m0``.

    Returns ``{marking: (parent, transition)}`` with ``(None, None)`` for the
    root. Raises :class:`StateSpaceLimit` once more than ``limit`` markings
    have been discovered.
    """
    parents = {m0: (None, None)}
    queue = deque([m0])
    while queue:
        m = queue.popleft()
        for t, nxt in successors(net, m):
            if nxt not in parents:
                parents[nxt] = (m, t)
                if limit is not None and len(parents) > limit:
                    raise StateSpaceLimit(f"more than {limit} reachable markings")
                queue.append(nxt)
    return parents


def path_to(parents: Mapping, m: Marking) -> Run:
    """Run leading from the exploration root to ``m``."""
    run = []
    while True:
        prev, t = parents[m]
        if prev is None:
            return tuple(reversed(run))
        run.append(t)
        m = prev


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return self.message


def validate_workflow(net: ResetNet, initial: int, final: int, strict: bool = False) -> list[Violation]:
    """Every violated workflow-net condition; empty list means valid."""
    out: list[Violation] = []
    P, T = net.places, net.transitions
    if initial == final:
        out.append(Violation("initial_is_final", f"initial and final place coincide ({P[initial]})"))
    for t in range(len(T)):
        if net.post[t][initial] > 0:
            out.append(Violation("initial_has_producer", f"transition {T[t]} produces into initial place {P[initial]}"))
        if net.pre[t][final] > 0:
            out.append(Violation("final_has_consumer", f"transition {T[t]} consumes from final place {P[final]}"))
        if final in net.reset[t]:
            out.append(Violation("final_is_reset", f"transition {T[t]} resets final place {P[final]}"))
        if strict and any(w > 1 for w in net.pre[t] + net.post[t]):
            out.append(Violation("weighted_arc", f"transition {T[t]} has an arc of weight > 1"))

    # arc graph without reset arcs; nodes: ("p", k) / ("t", k)
    fwd: dict = {}
    bwd: dict = {}
    for t in range(len(T)):
        for p in range(len(P)):
            if net.pre[t][p] > 0:
                fwd.setdefault(("p", p), []).append(("t", t))
                bwd.setdefault(("t", t), []).append(("p", p))
            if net.post[t][p] > 0:
                fwd.setdefault(("t", t), []).append(("p", p))
                bwd.setdefault(("p", p), []).append(("t", t))

    def reach(start, edges):
        seen = {start}
        stack = [start]
        while stack:
            for v in edges.get(stack.pop(), ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    from_i = reach(("p", initial), fwd)
    to_f = reach(("p", final), bwd)
    for kind, names in (("p", P), ("t", T)):
        label = "place" if kind == "p" else "transition"
        for k, name in enumerate(names):
            node = (kind, k)
            if node not in from_i or node not in to_f:
                out.append(Violation(
                    "not_on_path",
                    f"{label} {name} is not on a path from {P[initial]} to {P[final]}",
                ))
    return out


def remove_subnet(net: ResetNet, places: Iterable[int], transitions: Iterable[int]):
    """Remove places ``Q`` and transitions ``S`` plus any node left isolated.

    A place survives if it is outside ``Q`` and touches an arc of some
    transition outside ``S``; a transition survives if it is outside ``S`` and
    touches an arc of some place outside ``Q``. Returns
    ``(subnet, place_map, trans_map)`` mapping old indices to new ones.
    """
    Q, S = set(places), set(transitions)
    P, T = range(len(net.places)), range(len(net.transitions))

    def adj_p(p):
        return {t for t in T if net.pre[t][p] > 0 or net.post[t][p] > 0}

    def adj_t(t):
        return {p for p in P if net.pre[t][p] > 0 or net.post[t][p] > 0}

    keep_p = [p for p in P if p not in Q and not adj_p(p) <= S]
    keep_t = [t for t in T if t not in S and not adj_t(t) <= Q]
    place_map = {p: k for k, p in enumerate(keep_p)}
    trans_map = {t: k for k, t in enumerate(keep_t)}
    sub = ResetNet(
        tuple(net.places[p] for p in keep_p),
        tuple(net.transitions[t] for t in keep_t),
        tuple(tuple(net.pre[t][p] for p in keep_p) for t in keep_t),
        tuple(tuple(net.post[t][p] for p in keep_p) for t in keep_t),
        tuple(frozenset(place_map[p] for p in net.reset[t] if p in place_map) for t in keep_t),
    )
    return sub, place_map, trans_map

"""Two-counter Minsky machines and their encoding as reset (workflow) nets.

Counters are simulated by a place ``x<c>`` and a budget place ``xb<c>`` whose
sum never grows; zero-tests become resets of ``x<c>``. A reset that throws
tokens away loses budget for good, so a run that restores full budgets
simulated every zero-test faithfully.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .net import ResetNet, WorkflowNet

OPS = ("inc1", "dec1", "zrt1", "inc2", "dec2", "zrt2")


class MachineError(ValueError):
    pass


@dataclass(frozen=True)
class MinskyMachine:
    states: tuple
    transitions: tuple  # (src, op, dst)
    source: str
    target: str

    def __post_init__(self):
        if self.source == self.target:
            raise MachineError("source and target states must differ")
        known = set(self.states)
        if len(known) != len(self.states):
            raise MachineError("duplicate state")
        for q in (self.source, self.target):
            if q not in known:
                raise MachineError(f"undeclared state {q!r}")
        for src, op, dst in self.transitions:
            if op not in OPS:
                raise MachineError(f"unknown operation {op!r}")
            if src not in known or dst not in known:
                raise MachineError(f"transition {src} -{op}-> {dst} uses an undeclared state")

    @classmethod
    def of(cls, transitions, source="qsrc", target="qtgt", states=None) -> "MinskyMachine":
        transitions = tuple(tuple(t) for t in transitions)
        if states is None:
            seen = {source: None, target: None}
            for s, _, d in transitions:
                seen.setdefault(s)
                seen.setdefault(d)
            states = tuple(seen)
        return cls(tuple(states), transitions, source, target)


def _counter(op: str) -> int:
    return int(op[-1]) - 1


def minsky_step(M: MinskyMachine, cfg: tuple, bound: int | None = None) -> set:
    """Successor configurations of ``(state, a, b)``; optionally keep counters within ``[0..bound]``."""
    state, *v = cfg
    out = set()
    for src, op, dst in M.transitions:
        if src != state:
            continue
        c = _counter(op)
        nv = list(v)
        if op.startswith("inc"):
            nv[c] += 1
        elif op.startswith("dec"):
            if v[c] == 0:
                continue
            nv[c] -= 1
        elif v[c] != 0:
            continue
        if bound is not None and max(nv) > bound:
            continue
        out.add((dst, *nv))
    return out


def minsky_reach_bounded(M: MinskyMachine, k: int, source: str | None = None, target: str | None = None) -> bool:
    """Does ``source(0,0)`` reach ``target(0,0)`` with counters kept in ``[0..k]``?"""
    start = (source or M.source, 0, 0)
    goal = (target or M.target, 0, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        cfg = queue.popleft()
        if cfg == goal:
            return True
        for nxt in sorted(minsky_step(M, cfg, k)):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def _fresh(name: str, taken) -> str:
    while name in taken:
        name += "'"
    return name


def preprocess(M: MinskyMachine) -> MinskyMachine:
    """Trim states off every source-to-target path and prepend the counter-shuffling gadget.

    The new source may move both counters freely, then must zero-test both
    before entering the old source; this makes every counter place lie on a
    path of the generated net without changing bounded reachability.
    """
    fwd, bwd = {}, {}
    for s, _, d in M.transitions:
        fwd.setdefault(s, set()).add(d)
        bwd.setdefault(d, set()).add(s)

    def closure(start, edges):
        seen, stack = {start}, [start]
        while stack:
            for n in edges.get(stack.pop(), ()):
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return seen

    keep = closure(M.source, fwd) & closure(M.target, bwd)
    if M.target not in keep:
        raise MachineError(f"target {M.target!r} is not reachable from {M.source!r} in the state graph")
    states = [q for q in M.states if q in keep]
    trans = [t for t in M.transitions if t[0] in keep and t[2] in keep]
    src2 = _fresh(M.source + "'", states)
    mid = _fresh("r", states + [src2])
    gadget = [(src2, op, src2) for op in ("inc1", "dec1", "inc2", "dec2")]
    gadget += [(src2, "zrt1", mid), (mid, "zrt2", M.source)]
    return MinskyMachine(tuple(states) + (src2, mid), tuple(trans) + tuple(gadget), src2, M.target)


def state_place(q: str) -> str:
    return f"q.{q}"


COUNTER_PLACES = ("x1", "x2", "xb1", "xb2")


def _transition_name(k: int, src: str, op: str, dst: str) -> str:
    return f"m{k}.{op}"


def minsky_to_reset_pn(M: MinskyMachine) -> ResetNet:
    """Places ``q.<state>`` plus ``x1 x2 xb1 xb2``; one transition per machine transition."""
    places = [state_place(q) for q in M.states] + list(COUNTER_PLACES)
    trans = []
    for k, (src, op, dst) in enumerate(M.transitions):
        c = op[-1]
        pre = {state_place(src): 1}
        post = {state_place(dst): 1}
        reset = []
        if op.startswith("inc"):
            pre[f"xb{c}"] = 1
            post[f"x{c}"] = 1
        elif op.startswith("dec"):
            pre[f"x{c}"] = 1
            post[f"xb{c}"] = 1
        else:
            reset.append(f"x{c}")
        trans.append((_transition_name(k, src, op, dst), pre, post, reset))
    return ResetNet.build(places, trans)


def budget_marking(net: ResetNet, state: str, k: int):
    """``{q.<state>: 1, xb1: k, xb2: k}``."""
    return net.marking({state_place(state): 1, "xb1": k, "xb2": k})


def minsky_to_rwf(M: MinskyMachine) -> WorkflowNet:
    """Reset workflow net that is generalised sound iff ``M`` cannot reach its target.

    ``t1`` starts a simulation with fresh budgets, ``t3`` ends a successful
    one (keeping the target token, which then can never leave), ``t2``
    aborts by wiping the simulation area.
    """
    M2 = preprocess(M)
    pn = minsky_to_reset_pn(M2)
    pn_places = list(pn.places)
    taken = set(pn_places)
    i, r, f = (_fresh(n, taken) for n in ("i", "r", "f"))
    places = [i] + pn_places + [r, f]
    trans = [
        (name, {p: w for p, w in zip(pn.places, pn.pre[k]) if w},
         {p: w for p, w in zip(pn.places, pn.post[k]) if w},
         [pn.places[p] for p in sorted(pn.reset[k])])
        for k, name in enumerate(pn.transitions)
    ]
    tnames = set(pn.transitions)
    t1, t2, t3 = (_fresh(n, tnames) for n in ("t1", "t2", "t3"))
    qsrc, qtgt = state_place(M2.source), state_place(M2.target)
    trans.append((t1, {i: 1}, {r: 1, qsrc: 1, "xb1": 1, "xb2": 1},
                  [p for p in pn_places if p not in ("xb1", "xb2")]))
    trans.append((t2, {r: 1}, {f: 1}, list(pn_places)))
    trans.append((t3, {r: 1, "xb1": 1, "xb2": 1, qtgt: 1}, {f: 1, qtgt: 1}, ["x1", "x2"]))
    net = ResetNet.build(places, trans)
    return WorkflowNet(net, net.place(i), net.place(f))

"""Reachability of mixed up/down-closed targets in plain Petri nets.

Decided by witness search plus unreachability certificates: an atom is
discharged when the marking equation has no non-negative integer solution,
or when the forward state space turns out to be finite and exhausted.
Everything else is reported as unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .budget import Budget
from .closed import Atom, BudgetExceeded, MixedTarget
from .cover import PreconditionError
from .net import Marking, ResetNet, Run, fire_run, successors


def _check_plain(net: ResetNet) -> None:
    if net.has_resets:
        raise PreconditionError("marking-equation reasoning requires a net without reset arcs")


def state_equation_feasible(net: ResetNet, m0: Marking, atom: Atom) -> bool:
    """Whether ``m = m0 + C x`` has a solution with ``x >= 0`` integral and ``m`` in ``atom``.

    ``False`` proves the atom unreachable from ``m0``. A ``True`` answer is
    only a relaxation verdict; solver hiccups also answer ``True``.
    """
    _check_plain(net)
    if atom.empty:
        return False
    nP, nT = net.num_places, net.num_transitions
    if nT == 0:
        return m0 in atom
    C = np.array([[net.post[t][p] - net.pre[t][p] for t in range(nT)] for p in range(nP)], dtype=float)
    # variables: x (nT firing counts) followed by m (nP target values); m - C x = m0
    A = np.hstack([-C, np.eye(nP)])
    lo = np.concatenate([np.zeros(nT), np.array(atom.lower, dtype=float)])
    hi = np.concatenate([np.full(nT, np.inf), np.array(atom.upper, dtype=float)])
    res = milp(
        c=np.zeros(nT + nP),
        constraints=LinearConstraint(A, np.array(m0, dtype=float), np.array(m0, dtype=float)),
        integrality=np.ones(nT + nP),
        bounds=Bounds(lo, hi),
    )
    if res.status == 2:  # infeasible
        return False
    return True


@dataclass(frozen=True)
class ReachVerdict:
    status: str  # "found" | "unreachable" | "unknown"
    run: Run | None = None
    end: Marking | None = None
    certificates: tuple = ()
    report: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "found"


def _search(net, m0, tgt, cap, meter):
    """Layered BFS over markings bounded by ``cap``.

    Returns ``(run, end, pruned)``; ``run`` is ``None`` when no target
    marking was met. ``pruned`` tells whether any successor exceeded the cap.
    """
    parents = {m0: (None, None)}
    layer = [m0]
    pruned = False
    while layer:
        nxt_layer = []
        for m in layer:
            for t, nxt in successors(net, m):
                if nxt in parents:
                    continue
                if max(nxt, default=0) > cap:
                    pruned = True
                    continue
                meter.tick()
                parents[nxt] = (m, t)
                if nxt in tgt:
                    run = []
                    cur = nxt
                    while parents[cur][0] is not None:
                        prev, tr = parents[cur]
                        run.append(tr)
                        cur = prev
                    return tuple(reversed(run)), nxt, pruned
                nxt_layer.append(nxt)
        layer = sorted(nxt_layer, key=lambda m: (sum(m), m))
    return None, None, pruned


def decide_mixed_reach(net: ResetNet, m0: Marking, tgt: MixedTarget, budget: Budget | None = None) -> ReachVerdict:
    _check_plain(net)
    budget = budget or Budget()
    meter = budget.meter()
    if m0 in tgt:
        return ReachVerdict("found", (), m0, report=meter.report())

    certs = []
    open_atoms = []
    for k, atom in enumerate(tgt.atoms):
        if atom.empty:
            certs.append({"atom": k, "by": "empty_atom"})
        elif not state_equation_feasible(net, m0, atom):
            certs.append({"atom": k, "by": "state_equation"})
        else:
            open_atoms.append((k, atom))
    if not open_atoms:
        return ReachVerdict("unreachable", certificates=tuple(certs), report=meter.report())

    live = MixedTarget(tuple(a for _, a in open_atoms))
    finite = [lo for _, a in open_atoms for lo in a.lower]
    cap = max([1, *m0, *finite])
    try:
        while True:
            run, end, pruned = _search(net, m0, live, cap, meter)
            if run is not None:
                assert fire_run(net, m0, run) == end and end in tgt
                return ReachVerdict("found", run, end, tuple(certs), meter.report())
            if not pruned:
                certs.extend({"atom": k, "by": "exhausted_state_space", "states": meter.states} for k, _ in open_atoms)
                return ReachVerdict("unreachable", certificates=tuple(certs), report=meter.report())
            cap *= 2
    except BudgetExceeded as exc:
        return ReachVerdict("unknown", certificates=tuple(certs), report={**meter.report(), "reason": str(exc)})

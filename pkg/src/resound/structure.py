"""Redundancy, resetable places, skeletons, projections and siphon/trap checks."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

from .closed import minimize
from .cover import CoverBasis, backward_cover, extract_covering_run
from .net import (Marking, ResetNet, Run, Violation, WorkflowNet, fire_run,
                  remove_subnet, validate_workflow)


@dataclass(frozen=True)
class Witness:
    """``k`` tokens in the initial place and a run from ``{i:k}`` marking/enabling the item."""

    k: int
    run: Run


@dataclass(frozen=True)
class RedundancyInfo:
    places: dict          # nonredundant place -> Witness
    transitions: dict     # nonredundant transition -> Witness (run ends with t enabled)
    redundant_places: frozenset
    redundant_transitions: frozenset


class CoverCache:
    """Memoised backward coverability per target for one net.

    With a budget, each new target may generate at most ``budget.states``
    elements within ``budget.seconds``; otherwise BudgetExceeded propagates.
    """

    def __init__(self, net: ResetNet, budget=None):
        self.net = net
        self.budget = budget
        self._cache: dict = {}

    def __call__(self, target: Iterable[Marking]) -> CoverBasis:
        up = minimize(target)
        if up.basis not in self._cache:
            b = self.budget
            self._cache[up.basis] = backward_cover(
                self.net, up,
                max_elements=b.states if b else None,
                deadline=time.monotonic() + b.seconds if b else None,
            )
        return self._cache[up.basis]


def _initial_witness(w: WorkflowNet, cb: CoverBasis) -> Witness | None:
    i = w.initial
    ks = [b[i] for b in cb.basis.basis if all(x == 0 for p, x in enumerate(b) if p != i)]
    if not ks:
        return None
    k = min(ks)
    run = extract_covering_run(cb, w.net, w.initial_marking(k))
    return Witness(k, run)


def redundancy_info(w: WorkflowNet, covers: CoverCache | None = None) -> RedundancyInfo:
    """Nonredundant items with the least initial budget ``k`` that reaches them.

    A place ``p`` is nonredundant iff some ``{i:k}`` can cover ``{p:1}``, i.e.
    the coverability basis for ``{p:1}`` has an element supported on ``i``
    alone; likewise for a transition with its preset as the target.
    """
    net = w.net
    covers = covers or CoverCache(net)
    places, trans = {}, {}
    for p in range(net.num_places):
        wit = _initial_witness(w, covers([net.unit(p)]))
        if wit is not None:
            places[p] = wit
    for t in range(net.num_transitions):
        wit = _initial_witness(w, covers([net.pre[t]]))
        if wit is not None:
            trans[t] = wit
    return RedundancyInfo(
        places,
        trans,
        frozenset(range(net.num_places)) - set(places),
        frozenset(range(net.num_transitions)) - set(trans),
    )


def resetable_places(w: WorkflowNet, info: RedundancyInfo) -> frozenset:
    out = set()
    for t in info.transitions:
        out |= w.net.reset[t]
    return frozenset(out)


@dataclass(frozen=True)
class SkeletonResult:
    skeleton: ResetNet
    place_map: dict   # original place -> skeleton place
    trans_map: dict   # original transition -> skeleton transition
    resetable: frozenset
    violations: tuple
    initial: int | None = None  # skeleton index of i (None if removed)
    final: int | None = None
    trans_back: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def workflow(self) -> WorkflowNet:
        if not self.ok:
            raise ValueError("skeleton is not a workflow net: " + "; ".join(map(str, self.violations)))
        return WorkflowNet(self.skeleton, self.initial, self.final)

    def restrict(self, m: Marking) -> Marking:
        """Marking over the skeleton's places."""
        out = [0] * self.skeleton.num_places
        for p, q in self.place_map.items():
            out[q] = m[p]
        return tuple(out)

    def embed(self, ms: Marking, dim: int) -> Marking:
        """Skeleton marking seen as a marking of the original net."""
        out = [0] * dim
        for p, q in self.place_map.items():
            out[p] = ms[q]
        return tuple(out)


def skeleton(w: WorkflowNet, info: RedundancyInfo) -> SkeletonResult:
    """Remove redundant items and resetable places, then isolated transitions."""
    resetable = resetable_places(w, info)
    skel, pmap, tmap = remove_subnet(w.net, info.redundant_places | resetable, info.redundant_transitions)
    assert not skel.has_resets
    names = w.net.places
    violations = []
    for role, p in (("initial", w.initial), ("final", w.final)):
        if p not in pmap:
            why = "resetable" if p in resetable else "redundant" if p in info.redundant_places else "isolated"
            violations.append(Violation(f"{role}_removed", f"{role} place {names[p]} is not in the skeleton ({why})"))
    if not violations:
        violations = validate_workflow(skel, pmap[w.initial], pmap[w.final])
    return SkeletonResult(
        skel, pmap, tmap, resetable, tuple(violations),
        pmap.get(w.initial), pmap.get(w.final),
        {v: k for k, v in tmap.items()},
    )


def res_project(w: WorkflowNet, skel: SkeletonResult, m: Marking) -> Marking:
    """Zero every coordinate outside the skeleton's places."""
    return tuple(x if p in skel.place_map else 0 for p, x in enumerate(m))


def project_run(w: WorkflowNet, skel: SkeletonResult, start: Marking, run: Run) -> Run:
    """Image of ``run`` in the skeleton, checked to replay between the projected endpoints."""
    end = fire_run(w.net, start, run)
    image = tuple(skel.trans_map[t] for t in run if t in skel.trans_map)
    got = fire_run(skel.skeleton, skel.restrict(start), image)
    if got != skel.restrict(end):
        raise AssertionError("projected run does not land on the projected end marking")
    return image


def lift_skeleton_run(w: WorkflowNet, skel: SkeletonResult, frr, run_s: Run, l: int) -> tuple:
    """Simulate a skeleton run from ``{i:l}`` inside the original net.

    Each skeleton step ``t`` is realised as ``rho t' zeta xi`` where ``zeta``
    is the full reset run, ``rho`` its prefix before the first ``t'`` (the
    original of ``t``) and ``xi`` the completion certificate of that prefix;
    every step borrows ``2z`` extra initial tokens and returns them in the
    final place.

    Returns ``(start, run, end, extra)`` with ``start = {i: l + extra}`` and
    ``end = m_s + {f: extra}``.
    """
    net, z, zeta = w.net, frr.z, frr.run
    extra = 2 * z * len(run_s)
    start = w.initial_marking(l + extra)
    ms = skel.skeleton.unit(skel.initial, l)
    ms = fire_run(skel.skeleton, ms, run_s)  # validates the input run
    out: list = []
    for ts in run_s:
        t = skel.trans_back[ts]
        j = zeta.index(t)
        out.extend(zeta[:j])
        out.append(t)
        out.extend(zeta)
        out.extend(frr.certificates[j])
    end = fire_run(net, start, out)
    expect = tuple(a + b for a, b in zip(skel.embed(ms, net.num_places), w.final_marking(extra)))
    if end != expect:
        raise AssertionError("lifted run does not end at m_s + {f: k'}")
    return start, tuple(out), end, extra


def is_siphon(net: ResetNet, S: Iterable[int]) -> bool:
    S = set(S)
    for t in range(net.num_transitions):
        if any(net.post[t][p] > 0 for p in S) and not any(net.pre[t][p] > 0 for p in S):
            return False
    return True


def is_trap(net: ResetNet, S: Iterable[int]) -> bool:
    S = set(S)
    for t in range(net.num_transitions):
        if any(net.pre[t][p] > 0 for p in S) and not any(net.post[t][p] > 0 for p in S):
            return False
    return True

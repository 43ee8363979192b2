"""Backward coverability for reset nets and the Karp-Miller tree for plain nets."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .closed import OMEGA, BudgetExceeded, UpSet, minimize, pred_element
from .net import Marking, ResetNet, Run, fire, leq


@dataclass(frozen=True)
class CoverBasis:
    """Minimal markings from which ``target`` can be covered.

    ``provenance`` maps every element ever generated (including ones later
    subsumed) to ``(transition, successor)``; target elements map to ``None``.
    Following the chain from any element reaches a target element.
    """

    target: UpSet
    basis: UpSet
    provenance: dict = field(repr=False, compare=False)

    def __contains__(self, m) -> bool:
        return m in self.basis


def backward_cover(net: ResetNet, target: UpSet, max_elements: int | None = None,
                   deadline: float | None = None) -> CoverBasis:
    """Least fixpoint of ``U -> min(U ∪ pre_t(U))`` starting from ``target``.

    Terminates on every input (Dickson's lemma); the optional budgets only
    exist to bound wall-clock in batch use.
    """
    basis = _Antichain(net.num_places)
    for b in minimize(target.basis).basis:
        basis.add(b)
    provenance: dict = {b: None for b in target.basis}
    work = deque(sorted(basis))
    while work:
        b = work.popleft()
        if b not in basis:
            continue  # subsumed since it was queued; its preds are covered too
        for t in range(net.num_transitions):
            m = pred_element(net, t, b)
            if m is None or basis.covers(m):
                continue
            basis.discard_above(m)
            basis.add(m)
            provenance.setdefault(m, (t, b))
            work.append(m)
            if max_elements is not None and len(provenance) > max_elements:
                raise BudgetExceeded(f"backward coverability generated more than {max_elements} elements")
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("backward coverability ran out of time")
    return CoverBasis(target, UpSet(tuple(sorted(basis))), provenance)


class _Antichain:
    """Mutable set of markings stored row-wise for vectorised comparisons."""

    def __init__(self, dim: int):
        self.rows = np.zeros((16, dim), dtype=np.int64)
        self.alive = np.zeros(16, dtype=bool)
        self.n = 0
        self.where: dict = {}

    def __contains__(self, m) -> bool:
        return m in self.where

    def __iter__(self):
        return iter(list(self.where))

    def covers(self, m) -> bool:
        """Some element is <= m."""
        n = self.n
        return bool(np.any(self.alive[:n] & np.all(self.rows[:n] <= np.asarray(m), axis=1)))

    def discard_above(self, m) -> None:
        n = self.n
        hit = np.flatnonzero(self.alive[:n] & np.all(self.rows[:n] >= np.asarray(m), axis=1))
        for r in hit:
            del self.where[tuple(int(x) for x in self.rows[r])]
        self.alive[hit] = False
        if 2 * len(self.where) < self.n and self.n > 64:
            self._compact()

    def _compact(self) -> None:
        keep = np.flatnonzero(self.alive[:self.n])
        size = max(16, 2 * len(keep))
        rows = np.zeros((size, self.rows.shape[1]), dtype=np.int64)
        rows[:len(keep)] = self.rows[keep]
        self.rows = rows
        self.alive = np.zeros(size, dtype=bool)
        self.alive[:len(keep)] = True
        self.n = len(keep)
        self.where = {tuple(int(x) for x in r): k for k, r in enumerate(rows[:self.n])}

    def add(self, m) -> None:
        if self.n == len(self.alive):
            self.rows = np.vstack([self.rows, np.zeros_like(self.rows)])
            self.alive = np.concatenate([self.alive, np.zeros_like(self.alive)])
        self.rows[self.n] = m
        self.alive[self.n] = True
        self.where[tuple(m)] = self.n
        self.n += 1


def extract_covering_run(cb: CoverBasis, net: ResetNet, m: Marking) -> Run | None:
    """A run from ``m`` to some marking covering the target, or ``None``.

    Follows the provenance chain of a basis element below ``m``; by
    monotonicity each step stays enabled. The end marking may overshoot.
    """
    start = next((b for b in cb.basis.basis if leq(b, m)), None)
    if start is None:
        return None
    run = []
    cur, b = m, start
    while cb.provenance[b] is not None:
        t, b = cb.provenance[b]
        cur = fire(net, cur, t)
        assert cur is not None and leq(b, cur), "provenance chain broken"
        run.append(t)
    return tuple(run)


class PreconditionError(ValueError):
    """An operation was applied outside its domain (e.g. a net with resets)."""


@dataclass
class KMNode:
    marking: tuple
    parent: int | None
    transition: int | None


@dataclass
class KMTree:
    nodes: list
    bounded: bool
    reach_set: frozenset | None

    def omega_nodes(self) -> list:
        return [n for n in self.nodes if OMEGA in n.marking]


def karp_miller(net: ResetNet, m0: Marking, max_nodes: int = 10**6) -> KMTree:
    """Karp-Miller tree with acceleration against all strict ancestors.

    Nodes whose label was already expanded elsewhere are kept as leaves.
    Without omega this explores exactly the reachability set, so
    ``reach_set`` is exact whenever the net is bounded from ``m0``.
    """
    if net.has_resets:
        raise PreconditionError("Karp-Miller acceleration is unsound with reset arcs")
    nodes = [KMNode(tuple(m0), None, None)]
    expanded: set = set()
    stack = [0]
    while stack:
        k = stack.pop()
        node = nodes[k]
        if node.marking in expanded:
            continue
        expanded.add(node.marking)
        for t in range(net.num_transitions):
            nxt = fire(net, node.marking, t)
            if nxt is None:
                continue
            nxt = list(nxt)
            a = k
            while a is not None:
                anc = nodes[a].marking
                if leq(anc, nxt) and anc != tuple(nxt):
                    for p, (x, y) in enumerate(zip(anc, nxt)):
                        if x < y:
                            nxt[p] = OMEGA
                a = nodes[a].parent
            nodes.append(KMNode(tuple(nxt), k, t))
            if len(nodes) > max_nodes:
                raise BudgetExceeded(f"Karp-Miller tree exceeded {max_nodes} nodes")
            stack.append(len(nodes) - 1)
    bounded = not any(OMEGA in n.marking for n in nodes)
    reach = frozenset(n.marking for n in nodes) if bounded else None
    return KMTree(nodes, bounded, reach)

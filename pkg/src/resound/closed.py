"""Upward-closed sets (antichain bases), downward-closed sets (ideals) and
mixed at-least/at-most targets over N^P.

The unbounded value of an ideal coordinate is ``OMEGA`` (``math.inf``), which
already behaves as required: it compares above every int and absorbs
addition and subtraction of finite values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .net import BudgetExceeded, Marking, ResetNet, leq

OMEGA = math.inf


def minimal_elements(ms: Iterable[Sequence]) -> tuple:
    """The <=-minimal elements of ``ms``, deduplicated and sorted."""
    items = sorted(set(tuple(m) for m in ms), key=lambda m: (sum(m), m))
    basis: list = []
    for m in items:
        # anything <= m has a smaller or equal sum, so it is already in basis
        if not any(leq(b, m) for b in basis):
            basis.append(m)
    return tuple(sorted(basis))


def _size(d) -> tuple:
    # (number of OMEGAs, sum of the finite part): any d' >= d has a size >= d's
    return (sum(x == OMEGA for x in d), sum(x for x in d if x != OMEGA))


def maximal_elements(ds: Iterable[Sequence]) -> tuple:
    items = sorted(set(tuple(d) for d in ds), key=lambda d: (tuple(-x for x in _size(d)), d))
    out: list = []
    for d in items:
        if not any(leq(d, o) for o in out):
            out.append(d)
    return tuple(sorted(out))


@dataclass(frozen=True)
class UpSet:
    """Upward closure of a finite antichain ``basis`` (kept sorted)."""

    basis: tuple

    def __contains__(self, m) -> bool:
        return any(leq(b, m) for b in self.basis)

    def __len__(self):
        return len(self.basis)

    def __iter__(self):
        return iter(self.basis)


@dataclass(frozen=True)
class DownSet:
    """Union of the ideals ``{m : m <= d}`` for ``d`` in ``ideals``."""

    ideals: tuple

    def __contains__(self, m) -> bool:
        return any(leq(m, d) for d in self.ideals)

    def __len__(self):
        return len(self.ideals)

    def __iter__(self):
        return iter(self.ideals)


def minimize(ms: Iterable[Sequence]) -> UpSet:
    return UpSet(minimal_elements(ms))


def complement_up_to_down(u: UpSet, dim: int, max_ideals: int | None = None) -> DownSet:
    """Ideal decomposition of ``N^dim`` minus the upward closure of ``u``.

    The complement of one cone ``↑b`` is the union over positions ``p`` with
    ``b[p] > 0`` of the ideal bounding ``p`` by ``b[p] - 1``; the complement of
    a union is the intersection of these unions, computed by pointwise minima.
    """
    current = [(OMEGA,) * dim]
    for b in u.basis:
        pieces = [
            tuple(b[p] - 1 if q == p else OMEGA for q in range(dim))
            for p in range(dim) if b[p] > 0
        ]
        nxt = [tuple(map(min, d, c)) for d in current for c in pieces]
        current = list(maximal_elements(nxt))
        if max_ideals is not None and len(current) > max_ideals:
            raise BudgetExceeded(f"complement needs more than {max_ideals} ideals")
        if not current:
            break
    return DownSet(tuple(sorted(current)))


def pred_element(net: ResetNet, t: int, b: Marking) -> Marking | None:
    """Least marking from which firing ``t`` covers ``b`` (``None`` if none does)."""
    pre, post, reset = net.pre[t], net.post[t], net.reset[t]
    out = []
    for p, (x, a, c) in enumerate(zip(b, pre, post)):
        if p in reset:
            if x > c:
                return None
            out.append(a)
        else:
            out.append(max(a, x + a - c))
    return tuple(out)


def pred_basis(net: ResetNet, t: int, u: UpSet) -> UpSet:
    preds = (pred_element(net, t, b) for b in u.basis)
    return minimize(m for m in preds if m is not None)


@dataclass(frozen=True)
class Atom:
    """Conjunction of per-place interval constraints ``lower[p] <= m[p] <= upper[p]``.

    An at-least constraint is ``(l, OMEGA)``, an at-most one ``(0, b)``.
    """

    lower: tuple
    upper: tuple

    def __contains__(self, m) -> bool:
        return all(lo <= x <= hi for x, lo, hi in zip(m, self.lower, self.upper))

    @property
    def empty(self) -> bool:
        return any(lo > hi for lo, hi in zip(self.lower, self.upper))

    @classmethod
    def build(cls, dim: int, at_least: dict | None = None, at_most: dict | None = None) -> "Atom":
        lo = [0] * dim
        hi = [OMEGA] * dim
        for p, v in (at_least or {}).items():
            lo[p] = v
        for p, v in (at_most or {}).items():
            hi[p] = v
        return cls(tuple(lo), tuple(hi))


@dataclass(frozen=True)
class MixedTarget:
    atoms: tuple

    def __contains__(self, m) -> bool:
        return any(m in a for a in self.atoms)


def mixed_contains(tgt: MixedTarget, m: Marking) -> bool:
    return m in tgt

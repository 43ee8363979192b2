"""Brute-force reference implementations used only by the tests.

They deliberately avoid the package's algorithms: everything here is plain
enumeration over explicit state spaces or direct set formulas.
"""

from collections import deque
from itertools import product


def fire_by_names(net, m, t):
    """Firing via a name-keyed dict, written independently of ``net.fire``."""
    cur = dict(zip(net.places, m))
    for k, p in enumerate(net.places):
        if cur[p] < net.pre[t][k]:
            return None
    for k, p in enumerate(net.places):
        cur[p] -= net.pre[t][k]
    for k in net.reset[t]:
        cur[net.places[k]] = 0
    for k, p in enumerate(net.places):
        cur[p] += net.post[t][k]
    return tuple(cur[p] for p in net.places)


def reachable(net, m0, limit=200_000):
    seen = {m0}
    queue = deque([m0])
    while queue:
        m = queue.popleft()
        for t in range(net.num_transitions):
            n = fire_by_names(net, m, t)
            if n is not None and n not in seen:
                seen.add(n)
                if len(seen) > limit:
                    raise RuntimeError("oracle state space too large")
                queue.append(n)
    return seen


def coverable_capped(net, m0, target, cap):
    """Coverability searching only markings with at most ``cap`` tokens per place.

    Exact for positive answers; used where the full space is infinite.
    """
    seen = {m0}
    queue = deque([m0])
    while queue:
        m = queue.popleft()
        if all(x >= y for x, y in zip(m, target)):
            return True
        for t in range(net.num_transitions):
            n = fire_by_names(net, m, t)
            if n is not None and max(n, default=0) <= cap and n not in seen:
                seen.add(n)
                queue.append(n)
    return False


def coverable(net, m0, target, limit=200_000):
    return any(all(x >= y for x, y in zip(m, target)) for m in reachable(net, m0, limit))


def reaches(net, m0, target, limit=200_000):
    return target in reachable(net, m0, limit)


def box(dim, hi):
    return product(range(hi + 1), repeat=dim)


def up_member(basis, m):
    return any(all(b <= x for b, x in zip(bb, m)) for bb in basis)


def removal_by_formula(net, Q, S):
    """Surviving place and transition names by the set equations, on names."""
    P, T = net.places, net.transitions
    pre_p = {p: {T[t] for t in range(len(T)) if net.post[t][k]} for k, p in enumerate(P)}
    post_p = {p: {T[t] for t in range(len(T)) if net.pre[t][k]} for k, p in enumerate(P)}
    pre_t = {T[t]: {P[k] for k in range(len(P)) if net.pre[t][k]} for t in range(len(T))}
    post_t = {T[t]: {P[k] for k in range(len(P)) if net.post[t][k]} for t in range(len(T))}
    Qn = {P[q] for q in Q}
    Sn = {T[s] for s in S}
    keep_p = [p for p in P if p not in Qn and not (pre_p[p] | post_p[p]) <= Sn]
    keep_t = [t for t in T if t not in Sn and not (pre_t[t] | post_t[t]) <= Qn]
    return keep_p, keep_t


def sound_by_definition(net, initial, final, k, limit=50_000):
    """Every marking reachable from {i:k} reaches exactly {f:k}."""
    start = tuple(k if p == initial else 0 for p in range(net.num_places))
    goal = tuple(k if p == final else 0 for p in range(net.num_places))
    space = reachable(net, start, limit)
    succ = {m: [n for t in range(net.num_transitions) if (n := fire_by_names(net, m, t)) is not None]
            for m in space}
    good = {goal} if goal in space else set()
    changed = True
    while changed:
        changed = False
        for m in space:
            if m not in good and any(n in good for n in succ[m]):
                good.add(m)
                changed = True
    return good == space

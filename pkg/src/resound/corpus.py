"""Seeded random nets for property tests and the acceptance suite."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .net import Marking, ResetNet, StateSpaceLimit, WorkflowNet, explore, validate_workflow


def random_net(rng: random.Random, places: int, transitions: int, resets: bool = True,
               max_weight: int = 2, reset_prob: float = 0.2) -> ResetNet:
    P = [f"p{k}" for k in range(places)]
    specs = []
    for k in range(transitions):
        pre = {p: rng.randint(1, max_weight) for p in rng.sample(P, rng.randint(1, min(2, places)))}
        post = {p: rng.randint(1, max_weight) for p in rng.sample(P, rng.randint(0, min(2, places)))}
        reset = [p for p in P if resets and rng.random() < reset_prob]
        specs.append((f"t{k}", pre, post, reset))
    return ResetNet.build(P, specs)


@dataclass(frozen=True)
class BoundedInstance:
    net: ResetNet
    m0: Marking
    reach: dict  # explore() result


def bounded_corpus(seed: int, count: int, resets: bool = True, max_states: int = 5000, min_states: int = 1,
                   max_tokens: int = 2) -> list:
    """``count`` nets with at most 6 places/transitions whose space from ``m0``
    has between ``min_states`` and ``max_states`` markings."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        net = random_net(rng, rng.randint(2, 6), rng.randint(1, 6), resets=resets)
        m0 = tuple(rng.randint(0, max_tokens) for _ in net.places)
        try:
            reach = explore(net, m0, limit=max_states)
        except StateSpaceLimit:
            continue
        if len(reach) < min_states:
            continue
        out.append(BoundedInstance(net, m0, reach))
    return out


def random_plain_nets(seed: int, count: int) -> list:
    rng = random.Random(seed)
    return [random_net(rng, rng.randint(2, 6), rng.randint(1, 6), resets=False) for _ in range(count)]


def random_workflow(rng: random.Random, inner: int = 3, transitions: int = 4, resets: bool = True,
                    reset_prob: float = 0.15, tries: int = 1000) -> WorkflowNet:
    """Generate-and-filter: random unit-weight nets until one passes workflow validation."""
    P = ["i"] + [f"p{k}" for k in range(inner)] + ["f"]
    mids = P[1:-1]
    for _ in range(tries):
        specs = []
        for k in range(transitions):
            src = ["i"] + mids
            dst = mids + ["f"]
            pre = rng.sample(src, rng.randint(1, min(2, len(src))))
            post = rng.sample(dst, rng.randint(1, min(2, len(dst))))
            reset = [p for p in P[:-1] if resets and rng.random() < reset_prob]
            specs.append((f"t{k}", pre, post, reset))
        net = ResetNet.build(P, specs)
        if not validate_workflow(net, 0, len(P) - 1):
            return WorkflowNet(net, 0, len(P) - 1)
    raise RuntimeError("no valid workflow net generated")


def workflow_corpus(seed: int, count: int, resets: bool = True) -> list:
    rng = random.Random(seed)
    return [
        random_workflow(rng, inner, rng.randint(inner + 1, inner + 3), resets=resets)
        for inner in (rng.randint(1, 3) for _ in range(count))
    ]


def structured_workflow(rng: random.Random, depth: int = 3, cancel_prob: float = 0.3) -> WorkflowNet:
    """Block-structured net: sequence, choice, parallel split/join, and
    parallel blocks whose first branch may finish alone by resetting the other."""
    places = ["i", "f"]
    specs: list = []

    def place() -> str:
        places.insert(-1, f"p{len(places) - 2}")
        return places[-2]

    def trans(pre, post, reset=()):
        specs.append((f"t{len(specs)}", pre, post, list(reset)))

    def block(src: str, dst: str, d: int) -> list:
        """Fill the region between ``src`` and ``dst``; returns the inner places created."""
        kind = rng.choice(["task", "seq", "xor", "and"]) if d > 0 else "task"
        if kind == "task":
            trans([src], [dst])
            return []
        if kind == "seq":
            mid = place()
            return [mid] + block(src, mid, d - 1) + block(mid, dst, d - 1)
        if kind == "xor":
            return block(src, dst, d - 1) + block(src, dst, d - 1)
        a, b, a2, b2 = place(), place(), place(), place()
        trans([src], [a, b])
        inner_a = block(a, a2, d - 1)
        inner_b = block(b, b2, d - 1)
        trans([a2, b2], [dst])
        if rng.random() < cancel_prob:
            trans([a2], [dst], [b, b2] + inner_b)
        return [a, b, a2, b2] + inner_a + inner_b

    block("i", "f", depth)
    net = ResetNet.build(places, specs)
    w = WorkflowNet(net, 0, len(places) - 1)
    assert not validate_workflow(net, w.initial, w.final)
    return w


def structured_corpus(seed: int, count: int, depth: int = 3) -> list:
    rng = random.Random(seed)
    return [structured_workflow(rng, rng.randint(1, depth)) for _ in range(count)]

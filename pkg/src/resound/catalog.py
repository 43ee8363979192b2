"""Small named nets used by the CLI, tests and documentation."""

from __future__ import annotations

from .net import ResetNet, WorkflowNet


def _wf(places, transitions, i="i", f="f") -> WorkflowNet:
    net = ResetNet.build(places, transitions)
    return WorkflowNet(net, net.place(i), net.place(f))


def fig1() -> ResetNet:
    # t3 consumes p2, resets p3
    return ResetNet.build(
        ["p1", "p2", "p3", "p4"],
        [
            ("t1", ["p1"], ["p2", "p3"]),
            ("t2", ["p2"], ["p1"]),
            ("t3", ["p2"], ["p4"], ["p3"]),
        ],
    )


def fig2() -> WorkflowNet:
    return _wf(
        ["i", "p1", "p2", "q1", "q2", "q3", "f"],
        [
            ("s", ["i"], ["p1", "p2"]),
            ("t1", ["p1"], ["q1"]),
            ("t2", ["p2"], ["q2", "q3"]),
            ("u1", ["q1", "q3"], ["f"], ["q2"]),
            ("u2", ["q2"], ["f"], ["p1", "p2", "q1", "q2", "q3"]),
        ],
    )


def chain() -> WorkflowNet:
    return _wf(["i", "f"], [("t", ["i"], ["f"])])


def pump() -> WorkflowNet:
    """Plain, unbounded: ``t2`` keeps adding to ``q`` while ``p`` is marked."""
    return _wf(
        ["i", "p", "q", "f"],
        [
            ("t1", ["i"], ["p"]),
            ("t2", ["p"], ["p", "q"]),
            ("t3", ["q"], ["f"]),
            ("t4", ["p"], ["f"]),
        ],
    )


def reset_diamond() -> WorkflowNet:
    """Generalised sound; ``u`` may skip the parallel branch by resetting ``q``."""
    return _wf(
        ["i", "p", "q", "f"],
        [
            ("s", ["i"], ["p", "q"]),
            ("u", ["p"], ["f"], ["q"]),
            ("v", ["p", "q"], ["f"]),
        ],
    )


def mutex_reset() -> WorkflowNet:
    """Two branches that reset each other's work; ``g``/``a``/``h`` are dead."""
    return _wf(
        ["i", "b1", "b2", "c1", "c2", "a", "f"],
        [
            ("s1", ["i"], ["b1"]),
            ("s2", ["i"], ["b2"]),
            ("d1", ["b1"], ["c1"], ["c2"]),
            ("d2", ["b2"], ["c2"], ["c1"]),
            ("e1", ["c1"], ["f"]),
            ("e2", ["c2"], ["f"]),
            ("g", ["c1", "c2"], ["a"]),
            ("h", ["a"], ["f"]),
        ],
    )


def stuck() -> WorkflowNet:
    """Plain net where a lone ``b`` or ``c`` token can never leave."""
    return _wf(
        ["i", "b", "c", "f"],
        [
            ("s", ["i"], ["b"]),
            ("v", ["i"], ["c"]),
            ("u", ["b", "c"], ["f"]),
        ],
    )


def reset_initial() -> WorkflowNet:
    """``s`` is fireable and resets the initial place."""
    return _wf(
        ["i", "p", "f"],
        [
            ("s", ["i"], ["p"], ["i"]),
            ("t", ["p"], ["f"]),
        ],
    )


CATALOG = {
    "fig1": fig1,
    "fig2": fig2,
    "chain": chain,
    "pump": pump,
    "reset-diamond": reset_diamond,
    "mutex-reset": mutex_reset,
    "stuck": stuck,
    "reset-initial": reset_initial,
}


def builtin(name: str):
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown builtin net {name!r}; choose from {', '.join(CATALOG)}") from None

import random

import pytest

from oracles import reachable
from resound.budget import Budget
from resound.minsky import (MachineError, MinskyMachine, budget_marking, minsky_reach_bounded, minsky_step,
                            minsky_to_reset_pn, minsky_to_rwf, preprocess, state_place)
from resound.net import fire_run, validate_workflow
from resound.soundness import k_sound_semi

M0 = MinskyMachine.of([("qsrc", "zrt1", "qtgt")])
M1 = MinskyMachine.of([("qsrc", "inc1", "qtgt")])
M2 = MinskyMachine.of([("qsrc", "inc1", "a"), ("a", "dec1", "qtgt")])


def test_step_examples():
    M = MinskyMachine.of([("q", "inc1", "r")], "q", "r")
    assert minsky_step(M, ("q", 0, 0)) == {("r", 1, 0)}
    M = MinskyMachine.of([("q", "dec1", "r")], "q", "r")
    assert minsky_step(M, ("q", 0, 0)) == set()
    M = MinskyMachine.of([("q", "zrt1", "r")], "q", "r")
    assert minsky_step(M, ("q", 0, 5)) == {("r", 0, 5)}
    assert minsky_step(M, ("q", 1, 0)) == set()
    M = MinskyMachine.of([("q", "inc2", "r")], "q", "r")
    assert minsky_step(M, ("q", 0, 2), bound=2) == set()


def test_machine_checks():
    with pytest.raises(MachineError):
        MinskyMachine.of([("a", "inc1", "a")], "a", "a")
    with pytest.raises(MachineError):
        MinskyMachine(("a", "b"), (("a", "mul1", "b"),), "a", "b")
    with pytest.raises(MachineError):
        MinskyMachine(("a", "b"), (("a", "inc1", "c"),), "a", "b")


def test_bounded_reach_examples():
    assert [minsky_reach_bounded(M0, k) for k in range(3)] == [True, True, True]
    assert [minsky_reach_bounded(M1, k) for k in range(4)] == [False] * 4
    assert [minsky_reach_bounded(M2, k) for k in range(3)] == [False, True, True]


def test_preprocess_examples():
    P = preprocess(M0)
    assert len(P.states) == len(M0.states) + 2
    assert len(P.transitions) == len(M0.transitions) + 6
    assert P.source == "qsrc'" and P.target == "qtgt"
    assert ("qsrc'", "zrt1", "r") in P.transitions and ("r", "zrt2", "qsrc") in P.transitions
    M = MinskyMachine(("qsrc", "s", "qtgt"), (("qsrc", "inc1", "qtgt"),), "qsrc", "qtgt")
    assert "s" not in preprocess(M).states
    M = MinskyMachine(("qsrc", "qtgt"), (("qtgt", "inc1", "qsrc"),), "qsrc", "qtgt")
    with pytest.raises(MachineError):
        preprocess(M)


def test_reset_pn_places_and_gadget_replay():
    P = preprocess(M0)
    net = minsky_to_reset_pn(P)
    assert set(net.places) == {state_place(q) for q in P.states} | {"x1", "x2", "xb1", "xb2"}
    start = budget_marking(net, "qsrc'", 0)
    zr1 = next(t for t in net.transitions if t.endswith("zrt1") and
               net.pre[net.transition(t)][net.place("q.qsrc'")])
    zr2 = next(t for t in net.transitions if t.endswith("zrt2"))
    end = fire_run(net, start, net.run(f"{zr1} {zr2}"))
    assert end == net.marking({"q.qsrc": 1})


def random_machine(rng, n_states):
    states = ["qsrc", "qtgt"] + [f"s{j}" for j in range(n_states - 2)]
    trans = {(rng.choice(states), rng.choice(("inc1", "dec1", "zrt1", "inc2", "dec2", "zrt2")), rng.choice(states))
             for _ in range(rng.randint(1, 6))}
    return MinskyMachine(tuple(states), tuple(sorted(trans)), "qsrc", "qtgt")


def test_simulation_equivalence_small_machines():
    rng = random.Random(5)
    machines = [M0, M1, M2] + [random_machine(rng, rng.randint(2, 4)) for _ in range(60)]
    positives = 0
    for M in machines:
        net = minsky_to_reset_pn(M)
        Q = [net.place(state_place(q)) for q in M.states]
        for k in range(4):
            start = budget_marking(net, M.source, k)
            space = reachable(net, start)
            goal = budget_marking(net, M.target, k)
            assert (goal in space) == minsky_reach_bounded(M, k), (M, k)
            positives += goal in space
            for m in space:
                assert sum(m[q] for q in Q) == 1
                for c in "12":
                    assert m[net.place("x" + c)] + m[net.place("xb" + c)] <= k
    assert positives >= 10


def test_rwf_valid_and_named():
    for M in (M0, M1, M2):
        w = minsky_to_rwf(M)
        assert validate_workflow(w.net, w.initial, w.final) == []
        assert {"t1", "t2", "t3"} <= set(w.net.transitions)
        assert {"x1", "x2", "xb1", "xb2", "q.qsrc", "q.qtgt"} <= set(w.net.places)
        t3 = w.net.transition("t3")
        assert w.net.pre[t3][w.net.place("q.qtgt")] == 1 and w.net.post[t3][w.net.place("q.qtgt")] == 1
        assert w.net.reset[t3] == {w.net.place("x1"), w.net.place("x2")}


def test_rwf_verdicts():
    w = minsky_to_rwf(M0)
    v = k_sound_semi(w, 1, Budget(states=10**5))
    assert v.fails and fire_run(w.net, v.start, v.run) == v.witness
    assert w.net.run_names(v.run)[0] == "t1" and "t3" in w.net.run_names(v.run)
    w = minsky_to_rwf(M1)
    for k in (1, 2):
        assert not k_sound_semi(w, k, Budget(states=10**5)).fails


def test_rwf_generated_nets_valid():
    rng = random.Random(6)
    for _ in range(40):
        M = random_machine(rng, rng.randint(2, 4))
        try:
            w = minsky_to_rwf(M)
        except MachineError:
            continue
        assert validate_workflow(w.net, w.initial, w.final) == []


@pytest.mark.parametrize("k", [1, 2])
def test_rwf_explored_markings_keep_one_state_token(k):
    w = minsky_to_rwf(M2)
    Q = [p for p, name in enumerate(w.net.places) if name.startswith("q.")]
    r = w.net.place("r")
    for m in reachable(w.net, w.initial_marking(k), limit=50_000):
        # t1 refills the state places after resetting them; t2 may then wipe them
        assert sum(m[q] for q in Q) <= 1
        if k == 1 and m[r]:
            assert sum(m[q] for q in Q) == 1

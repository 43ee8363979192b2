"""Soundness deciders for reset workflow nets and the k-in-between pipeline.

Verdicts are three-valued. A failing verdict always carries a concrete
witness marking together with the run producing it from ``{i:k}``; these are
re-validated by replay before being returned.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .budget import Budget
from .closed import OMEGA, Atom, BudgetExceeded, MixedTarget, complement_up_to_down
from .cover import PreconditionError, extract_covering_run, karp_miller
from .net import (Marking, ResetNet, Run, WorkflowNet, explore, fire_run, leq,
                  path_to, successors, trace)
from .reach import decide_mixed_reach
from .structure import (CoverCache, RedundancyInfo, SkeletonResult, lift_skeleton_run,
                        redundancy_info, res_project, skeleton)

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"


@dataclass(frozen=True)
class Verdict:
    status: str
    k: int | None = None
    start: Marking | None = None
    run: Run | None = None
    witness: Marking | None = None
    reason: str = ""
    evidence: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS


@dataclass(frozen=True)
class Completion:
    kind: str  # "completes" | "overshoot" | "cannot_cover"
    run: Run | None = None
    end: Marking | None = None


def can_complete_or_witness(w: WorkflowNet, m: Marking, k: int, covers: CoverCache | None = None) -> Completion:
    """Classify ``m`` against the final marking ``{f:k}``.

    ``completes``: the extracted covering run lands exactly on ``{f:k}``.
    ``overshoot``: it lands strictly above; the end marking can never reach
    ``{f:k}`` since ``f`` is never consumed or reset and every firing
    produces a token. ``cannot_cover``: ``m`` cannot even cover ``{f:k}``.
    """
    covers = covers or CoverCache(w.net)
    target = w.final_marking(k)
    cb = covers([target])
    run = extract_covering_run(cb, w.net, m)
    if run is None:
        return Completion("cannot_cover")
    end = fire_run(w.net, m, run)
    assert leq(target, end)
    return Completion("completes" if end == target else "overshoot", run, end)


def _fail(w, k, path, comp, m, reason, **evidence) -> Verdict:
    start = w.initial_marking(k)
    if comp.kind == "overshoot":
        run, witness = tuple(path) + comp.run, comp.end
    else:
        run, witness = tuple(path), m
    assert fire_run(w.net, start, run) == witness
    return Verdict(FAILS, k, start, run, witness, reason, {"classification": comp.kind, **evidence})


def k_sound_semi(w: WorkflowNet, k: int, budget: Budget | None = None, covers: CoverCache | None = None) -> Verdict:
    """Forward search from ``{i:k}`` screening every marking for completability."""
    budget = budget or Budget()
    covers = covers or CoverCache(w.net, budget)
    meter = budget.meter()
    start = w.initial_marking(k)
    parents = {start: (None, None)}
    queue = deque([start])
    try:
        while queue:
            m = queue.popleft()
            comp = can_complete_or_witness(w, m, k, covers)
            if comp.kind != "completes":
                return _fail(w, k, path_to(parents, m), comp, m, "witness of unsoundness", states=len(parents))
            for t, nxt in successors(w.net, m):
                if nxt not in parents:
                    meter.tick()
                    parents[nxt] = (m, t)
                    queue.append(nxt)
    except BudgetExceeded as exc:
        return Verdict(UNKNOWN, k, start, reason=str(exc), evidence=meter.report())
    return Verdict(HOLDS, k, start, reason="state space exhausted, every marking completes",
                   evidence={"states": len(parents)})


def up_to_k(w: WorkflowNet, k: int, budget: Budget | None = None, covers: CoverCache | None = None) -> Verdict:
    """Conjunction of ``k_sound_semi`` for ``j = 1..k``; the first failure wins."""
    covers = covers or CoverCache(w.net, budget or Budget())
    unknown = None
    per_j = {}
    for j in range(1, k + 1):
        v = k_sound_semi(w, j, budget, covers)
        per_j[j] = v.status
        if v.fails:
            return Verdict(FAILS, j, v.start, v.run, v.witness, f"not {j}-sound", {**v.evidence, "per_k": per_j})
        if v.status == UNKNOWN and unknown is None:
            unknown = v
    if unknown is not None:
        return Verdict(UNKNOWN, k, reason=f"{unknown.k}-soundness undetermined: {unknown.reason}", evidence={"per_k": per_j})
    return Verdict(HOLDS, k, reason=f"j-sound for all j in 1..{k}", evidence={"per_k": per_j})


def _pumping_pair(net: ResetNet, m0: Marking, limit: int):
    """Concrete ``m1 < m2`` on one BFS-tree path from ``m0`` (exists iff unbounded)."""
    parents = {m0: (None, None)}
    queue = deque([m0])
    while queue:
        m = queue.popleft()
        for t, nxt in successors(net, m):
            if nxt in parents:
                continue
            parents[nxt] = (m, t)
            if len(parents) > limit:
                raise BudgetExceeded(f"pumping search exceeded {limit} markings")
            anc = m
            while anc is not None:
                if leq(anc, nxt):
                    return parents, anc, nxt
                anc = parents[anc][0]
            queue.append(nxt)
    return parents, None, None


def k_sound_exact_plain(w: WorkflowNet, k: int, max_nodes: int = 10**6, covers: CoverCache | None = None) -> Verdict:
    """Exact k-soundness for nets without resets (up to the node budget).

    Unbounded from ``{i:k}`` means unsound: given reachable ``m1 < m2``,
    either ``m1`` cannot complete, or its completion replayed from ``m2``
    ends strictly above ``{f:k}``. Bounded nets are decided on the finite
    reachability graph.
    """
    net = w.net
    if net.has_resets:
        raise PreconditionError("exact k-soundness is only implemented for nets without resets")
    covers = covers or CoverCache(net)
    start = w.initial_marking(k)
    try:
        tree = karp_miller(net, start, max_nodes)
        if not tree.bounded:
            parents, m1, m2 = _pumping_pair(net, start, max_nodes)
            assert m1 is not None
            comp = can_complete_or_witness(w, m1, k, covers)
            if comp.kind != "completes":
                return _fail(w, k, path_to(parents, m1), comp, m1, "unbounded", pump=[list(m1), list(m2)])
            pumped = fire_run(net, m2, comp.run)
            run = path_to(parents, m2) + comp.run
            assert pumped != w.final_marking(k) and leq(w.final_marking(k), pumped)
            return _fail(w, k, run, Completion("cannot_cover"), pumped, "unbounded",
                         pump=[list(m1), list(m2)], classification="overshoot")
        parents = explore(net, start, max_nodes)
    except BudgetExceeded as exc:
        return Verdict(UNKNOWN, k, start, reason=str(exc))
    target = w.final_marking(k)
    back: dict = {}
    for m in parents:
        for _, nxt in successors(net, m):
            back.setdefault(nxt, []).append(m)
    good = {target} if target in parents else set()
    stack = list(good)
    while stack:
        for prev in back.get(stack.pop(), ()):
            if prev not in good:
                good.add(prev)
                stack.append(prev)
    for m in parents:  # BFS order
        if m not in good:
            return _fail(w, k, path_to(parents, m), Completion("cannot_reach"), m, "cannot reach final marking",
                         states=len(parents))
    return Verdict(HOLDS, k, start, reason="bounded; every reachable marking reaches the final marking",
                   evidence={"states": len(parents)})


def strict_cover_run(w: WorkflowNet, k: int, covers: CoverCache | None = None) -> Run | None:
    """A run from ``{i:k}`` to some marking strictly above ``{f:k}``, if any."""
    covers = covers or CoverCache(w.net)
    net, start = w.net, w.initial_marking(k)
    targets = [tuple(x + (1 if q == p else 0) for q, x in enumerate(w.final_marking(k)))
               for p in range(net.num_places)]
    cb = covers(targets)
    return extract_covering_run(cb, net, start)


def coverability_clean(w: WorkflowNet, k: int, covers: CoverCache | None = None) -> bool:
    return strict_cover_run(w, k, covers) is None


@dataclass(frozen=True)
class FullResetRun:
    z: int
    run: Run
    markings: tuple        # markings along the run from {i:z}
    certificates: tuple    # certificates[j]: run from Res(markings[j]) to exactly {f:z}


@dataclass(frozen=True)
class NotGS:
    step: str
    reason: str
    start: Marking | None = None
    run: Run | None = None
    witness: Marking | None = None


def full_reset_run(w: WorkflowNet, info: RedundancyInfo, skel: SkeletonResult | None = None,
                   covers: CoverCache | None = None):
    """Build and self-check a full reset run, or show the net is not generalised sound."""
    net = w.net
    covers = covers or CoverCache(net)
    skel = skel or skeleton(w, info)
    i = w.initial
    resetters = [net.transitions[t] for t in info.transitions if i in net.reset[t]]
    if resetters:
        return NotGS("initial_resetable", f"initial place is reset by nonredundant {', '.join(resetters)}")
    delta: list = []
    z = 0
    for t in sorted(info.transitions):
        wit = info.transitions[t]
        z += wit.k
        delta.extend(wit.run)
        delta.append(t)
    start = w.initial_marking(z)
    m = fire_run(net, start, delta)
    comp = can_complete_or_witness(w, m, z, covers)
    if comp.kind == "cannot_cover":
        return NotGS("cannot_complete", f"marking after the enabling run cannot cover {{f:{z}}}",
                     start, tuple(delta), m)
    if comp.kind == "overshoot":
        return NotGS("overshoot", f"completion from the enabling run overshoots {{f:{z}}}",
                     start, tuple(delta) + comp.run, comp.end)
    zeta = tuple(delta) + comp.run
    marks = trace(net, start, zeta)
    assert marks[-1] == w.final_marking(z)
    certs = []
    for j in range(len(zeta)):
        proj = res_project(w, skel, marks[j])
        c = can_complete_or_witness(w, proj, z, covers)
        if c.kind != "completes":
            return NotGS("prefix_not_completable",
                         f"projection of the marking after prefix of length {j} does not complete ({c.kind})",
                         start, zeta[:j], marks[j])
        certs.append(c.run)
    return FullResetRun(z, zeta, tuple(marks), tuple(certs))


@dataclass(frozen=True)
class GsVerdict:
    kind: str  # "not_gs" | "holds_proved" | "bounded_only"
    k: int | None = None
    verdict: Verdict | None = None
    reason: str = ""


def is_state_machine(net: ResetNet) -> bool:
    return not net.has_resets and all(
        sum(net.pre[t]) == 1 and sum(net.post[t]) == 1 for t in range(net.num_transitions))


def skeleton_gs_check(skel: WorkflowNet, k_max: int = 3, max_nodes: int = 10**5,
                      covers: CoverCache | None = None) -> GsVerdict:
    covers = covers or CoverCache(skel.net)
    undecided = []
    for k in range(1, k_max + 1):
        v = k_sound_exact_plain(skel, k, max_nodes, covers)
        if v.fails:
            return GsVerdict("not_gs", k, v, f"skeleton is not {k}-sound")
        if v.status == UNKNOWN:
            undecided.append(k)
        elif k == 1 and is_state_machine(skel.net):
            return GsVerdict("holds_proved", reason="state machine and 1-sound: tokens evolve independently")
    why = f"k-sound for k in 1..{k_max}" if not undecided else f"undecided for k in {undecided}"
    return GsVerdict("bounded_only", k_max, reason=why)


def _fresh(name: str, taken) -> str:
    while name in taken:
        name += "'"
    return name


def build_pns(skel: WorkflowNet) -> ResetNet:
    """Skeleton plus a source transition for ``i`` and a place summing non-final places."""
    net, f = skel.net, skel.final
    p_all = _fresh("p_all", net.places)
    t_i = _fresh("t_i", net.transitions)

    def ext(vec):
        return tuple(vec) + (sum(x for p, x in enumerate(vec) if p != f),)

    src = tuple(1 if p == skel.initial else 0 for p in range(net.num_places))
    return ResetNet(
        net.places + (p_all,),
        net.transitions + (t_i,),
        tuple(ext(v) for v in net.pre) + (ext((0,) * net.num_places),),
        tuple(ext(v) for v in net.post) + (ext(src),),
        tuple(frozenset() for _ in range(net.num_transitions + 1)),
    )


def stuck_target(w: WorkflowNet, skel: SkeletonResult, covers: CoverCache | None = None,
                 max_ideals: int | None = 10**5) -> tuple:
    """Atoms over the augmented skeleton describing projected stuck markings.

    Returns ``(target, ideals, dropped)`` where ``ideals`` are the nonzero ideals
    of the markings unable to cover ``{f:1}``.
    """
    covers = covers or CoverCache(w.net)
    cb = covers([w.final_marking(1)])
    down = complement_up_to_down(cb.basis, w.net.num_places, max_ideals)
    ideals = [d for d in down.ideals if any(x > 0 for x in d)]
    for d in ideals:
        # a marking with a token in f covers {f:1} already
        assert d[w.final] == 0, "stuck ideal with tokens in the final place"
    nS = skel.skeleton.num_places
    fs = skel.final
    atoms, dropped = [], 0
    for d in ideals:
        bounds = skel.restrict(d)
        if all(bounds[q] == 0 for q in range(nS) if q != fs):
            dropped += 1
            continue
        lower = [0] * (nS + 1)
        upper = [bounds[q] if q != fs else OMEGA for q in range(nS)] + [OMEGA]
        lower[nS] = 1
        atoms.append(Atom(tuple(lower), tuple(upper)))
    return MixedTarget(tuple(dict.fromkeys(atoms))), ideals, dropped


def property5_check(w: WorkflowNet, skel: SkeletonResult, budget: Budget | None = None,
                    covers: CoverCache | None = None, frr: FullResetRun | None = None) -> Verdict:
    """Can the skeleton, from some ``{i:j}``, reach a nonzero projected stuck marking?"""
    sw = skel.workflow()
    tgt, ideals, dropped = stuck_target(w, skel, covers)
    ev = {"stuck_ideals": len(ideals), "dropped_atoms": dropped, "atoms": len(tgt.atoms)}
    if not tgt.atoms:
        return Verdict(HOLDS, reason="no satisfiable stuck atom over the skeleton", evidence=ev)
    pns = build_pns(sw)
    rv = decide_mixed_reach(pns, pns.zero(), tgt, budget)
    ev.update(rv.report)
    if rv.status == "unreachable":
        return Verdict(HOLDS, reason="projected stuck markings unreachable",
                       evidence={**ev, "certificates": list(rv.certificates)})
    if rv.status == "unknown":
        return Verdict(UNKNOWN, reason="stuck-marking reachability undetermined", evidence=ev)
    t_i = pns.num_transitions - 1
    j = sum(1 for t in rv.run if t == t_i)
    run_s = tuple(t for t in rv.run if t != t_i)
    ms = fire_run(sw.net, sw.initial_marking(j), run_s)
    ev.update({"skeleton_start_tokens": j, "skeleton_run": list(run_s), "skeleton_marking": list(ms)})
    if frr is None:
        return Verdict(FAILS, reason="skeleton reaches a projected stuck marking", evidence=ev)
    start, run, end, extra = lift_skeleton_run(w, skel, frr, run_s, j)
    k = j + extra
    comp = can_complete_or_witness(w, end, k, covers)
    assert comp.kind != "completes"
    return Verdict(FAILS, k, start, run, end, "stuck marking reachable in the original net",
                   {**ev, "classification": comp.kind})


@dataclass
class PropertyRecord:
    status: str  # holds | fails | unknown | skipped
    detail: str = ""
    tag: str = ""
    evidence: dict = field(default_factory=dict)


@dataclass
class PkReport:
    k: int
    properties: dict
    overall: str  # up_to_k_sound | not_generalised_sound | unknown
    failed: str | None = None
    witness: Verdict | None = None
    full_reset_run: FullResetRun | None = None
    skeleton: SkeletonResult | None = None


UP_TO_K_SOUND = "up_to_k_sound"
NOT_GS = "not_generalised_sound"


def pk_check(w: WorkflowNet, k: int, budget: Budget | None = None, k_max_gs: int = 3,
             max_nodes: int = 10**5) -> PkReport:
    """Evaluate the five k-in-between properties and combine them.

    All five are evaluated where their inputs exist, so reports show every
    failing property; the overall verdict follows the first definite failure.
    The stuck-marking check (5) needs a workflow skeleton and a full reset run.
    A property whose computation exhausts the budget is recorded as unknown.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    budget = budget or Budget()
    covers = CoverCache(w.net, budget)
    props: dict = {}
    names = w.net.places
    witness = None
    out_of_budget = "budget exhausted: {}"

    try:
        info = redundancy_info(w, covers)
    except BudgetExceeded as exc:
        why = out_of_budget.format(exc)
        props = {n: PropertyRecord(UNKNOWN, why) for n in ("P1", "P2", "P3", "P4", "P5")}
        return PkReport(k, props, UNKNOWN)
    skel = skeleton(w, info)

    bad = [names[p] for p in (w.initial, w.final) if p in skel.resetable]
    props["P1"] = (PropertyRecord(FAILS, f"resetable: {', '.join(bad)}", "initial_or_final_resetable") if bad
                   else PropertyRecord(HOLDS, "initial and final places are not resetable"))

    try:
        frr = full_reset_run(w, info, skel, covers)
    except BudgetExceeded as exc:
        frr = None
        props["P2"] = PropertyRecord(UNKNOWN, out_of_budget.format(exc))
    else:
        if isinstance(frr, FullResetRun):
            props["P2"] = PropertyRecord(HOLDS, f"full reset run with z={frr.z}, length {len(frr.run)}",
                                         evidence={"z": frr.z, "run": list(frr.run)})
        else:
            props["P2"] = PropertyRecord(FAILS, frr.reason, "no_full_reset_run", {"step": frr.step})
            if frr.witness is not None and frr.step in ("cannot_complete", "overshoot"):
                witness = Verdict(FAILS, frr.start[w.initial], frr.start, frr.run, frr.witness, frr.reason)
            frr = None

    if not skel.ok:
        props["P3"] = PropertyRecord(FAILS, "; ".join(map(str, skel.violations)), "skeleton_not_workflow",
                                     {"violations": [v.code for v in skel.violations]})
    else:
        gs = skeleton_gs_check(skel.workflow(), k_max_gs, max_nodes)
        if gs.kind == "not_gs":
            props["P3"] = PropertyRecord(FAILS, gs.reason, "skeleton_not_generalised_sound", {"k": gs.k})
        elif gs.kind == "holds_proved":
            props["P3"] = PropertyRecord(HOLDS, gs.reason)
        else:
            props["P3"] = PropertyRecord(UNKNOWN, gs.reason, evidence={"k_max": gs.k})

    p4 = PropertyRecord(HOLDS, f"no strict cover of {{f:j}} for j in 1..{k}")
    try:
        for j in range(1, k + 1):
            run = strict_cover_run(w, j, covers)
            if run is not None:
                start = w.initial_marking(j)
                end = fire_run(w.net, start, run)
                p4 = PropertyRecord(FAILS, f"{{i:{j}}} strictly covers {{f:{j}}}", "strict_cover_reachable",
                                    {"j": j, "run": list(run)})
                witness = witness or Verdict(FAILS, j, start, run, end, "strict cover")
                break
    except BudgetExceeded as exc:
        p4 = PropertyRecord(UNKNOWN, out_of_budget.format(exc))
    props["P4"] = p4

    if frr is None or not skel.ok:
        props["P5"] = PropertyRecord("skipped", "needs a full reset run and a workflow skeleton")
    else:
        try:
            v = property5_check(w, skel, budget, covers, frr)
        except BudgetExceeded as exc:
            v = Verdict(UNKNOWN, reason=out_of_budget.format(exc))
        props["P5"] = PropertyRecord(v.status, v.reason, "stuck_marking_reachable" if v.fails else "",
                                     v.evidence)
        if v.fails:
            witness = witness or v

    failed = next((name for name, r in props.items() if r.status == FAILS), None)
    if failed is not None:
        overall = NOT_GS
    elif all(r.status == HOLDS for r in props.values()):
        overall = UP_TO_K_SOUND
    else:
        overall = UNKNOWN
    return PkReport(k, props, overall, failed, witness, frr, skel)

"""``resound`` command line.

Exit codes: 0 the property holds (or the query is answered positively),
1 it fails (any witness is replayed before printing), 2 unknown within
budget, 3 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time

from . import __version__
from .budget import DEFAULT_SECONDS, DEFAULT_STATES, Budget
from .catalog import CATALOG, builtin
from .closed import UpSet
from .corpus import random_workflow
from .cover import PreconditionError, backward_cover, extract_covering_run
from .minsky import MachineError, minsky_to_rwf
from .net import BudgetExceeded, DisabledError, NetError, ResetNet, WorkflowNet, fire_run, trace, validate_workflow
from .netio import (InputError, LoadedNet, emit_net, format_marking, format_tuple, json_safe,
                    load_net, machine_from_obj, net_digest, parse_marking,
                    parse_run, parse_target, target_to_obj, upset_to_obj)
from .reach import decide_mixed_reach
from .soundness import (FAILS, HOLDS, UNKNOWN, Verdict, coverability_clean, k_sound_exact_plain,
                        k_sound_semi, pk_check, strict_cover_run, up_to_k, NOT_GS, UP_TO_K_SOUND)
from .structure import redundancy_info, skeleton

EXIT_HOLDS, EXIT_FAILS, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_INPUT)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--k", type=int, default=1, help="token count in the initial place (default 1)")
    p.add_argument("--budget-states", "--budget", dest="budget_states", type=int, default=None,
                   help=f"markings explored per search (default {DEFAULT_STATES})")
    p.add_argument("--budget-secs", type=float, default=None,
                   help=f"seconds per search (default $RESOUND_BUDGET_SECS or {DEFAULT_SECONDS})")
    p.add_argument("--kmax-gs", type=int, default=3, help="largest k tried on the skeleton (default 3)")
    p.add_argument("--format", choices=("json", "text"), default=None)
    p.add_argument("--lenient", action="store_true", help="accept workflow nets failing validation")
    p.add_argument("--seed", type=int, default=0, help="seed for generated nets")
    p.add_argument("-o", "--output", help="write the produced net here")
    return p


def build_parser() -> Parser:
    common = _common()
    ap = Parser(prog="resound", description="Soundness analysis for reset workflow nets.")
    ap.add_argument("--version", action="version", version=f"resound {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("validate", parents=[common], help="check workflow-net conditions")
    p.add_argument("net")
    p.add_argument("--strict", action="store_true", help="also require unit arc weights")

    p = sub.add_parser("simulate", parents=[common], help="replay a run")
    p.add_argument("net")
    p.add_argument("--from", dest="start", help="start marking, e.g. '{i:2}' (default {i:k})")
    p.add_argument("--run", default="", help="transition names separated by spaces")
    p.add_argument("--trace", action="store_true", help="print every intermediate marking")
    p.add_argument("--tuples", action="store_true", help="render markings as tuples in place order")

    p = sub.add_parser("cover", parents=[common], help="backward coverability basis")
    p.add_argument("net")
    p.add_argument("--target", required=True, help="marking to cover, e.g. '{f:1}'")
    p.add_argument("--from", dest="start", help="also decide coverability from this marking")

    p = sub.add_parser("reach", parents=[common], help="reachability of an at-least/at-most target (no resets)")
    p.add_argument("net")
    tg = p.add_mutually_exclusive_group(required=True)
    tg.add_argument("--target", help='JSON {"atoms": [...]} or a marking to cover')
    tg.add_argument("--target-file", help="file holding the JSON target")
    p.add_argument("--from", dest="start", help="start marking (default {i:k})")

    p = sub.add_parser("redundancy", parents=[common], help="nonredundant places and transitions")
    p.add_argument("net")

    p = sub.add_parser("skeleton", parents=[common], help="skeleton net and its validation")
    p.add_argument("net")

    p = sub.add_parser("check", parents=[common], help="soundness properties")
    p.add_argument("net")
    p.add_argument("--property", required=True, choices=("ksound", "upto", "clean", "pk"))
    p.add_argument("--exact", action="store_true", help="ksound: exact decision (nets without resets)")

    p = sub.add_parser("generate", parents=[common], help="emit a net")
    gen = p.add_subparsers(dest="source", required=True, parser_class=Parser)
    g = gen.add_parser("minsky", parents=[common], help="reset workflow net from a Minsky machine")
    g.add_argument("machine")
    g = gen.add_parser("builtin", parents=[common], help="a named example net")
    g.add_argument("name", choices=sorted(CATALOG))
    g = gen.add_parser("random", parents=[common], help="seeded random workflow net")
    g.add_argument("--places", type=int, default=3, help="inner places")
    g.add_argument("--transitions", type=int, default=4)
    g.add_argument("--plain", action="store_true", help="no reset arcs")
    return ap


def _budget(args) -> Budget:
    secs = args.budget_secs
    if secs is None:
        env = os.environ.get("RESOUND_BUDGET_SECS")
        try:
            secs = float(env) if env else DEFAULT_SECONDS
        except ValueError:
            raise UsageError(f"RESOUND_BUDGET_SECS must be a number, got {env!r}") from None
    try:
        return Budget(args.budget_states or DEFAULT_STATES, secs)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _workflow(loaded: LoadedNet) -> WorkflowNet:
    w = loaded.workflow
    if w is None:
        raise UsageError("this command needs a workflow net (with 'initial' and 'final')")
    return w


def _run_names(net: ResetNet, run) -> list:
    return net.run_names(run) if run is not None else None


def _verdict_obj(net: ResetNet, v: Verdict) -> dict:
    out = {"status": v.status, "k": v.k, "reason": v.reason}
    if v.start is not None:
        out["start"] = format_marking(net, v.start)
    if v.witness is not None:
        out["witness"] = format_marking(net, v.witness)
        out["run"] = _run_names(net, v.run)
    if v.evidence:
        out["evidence"] = json_safe(v.evidence)
    return out


def _verified(net: ResetNet, v: Verdict) -> None:
    """Replay a failing verdict's run; a mismatch is a bug, never printed as a result."""
    if v.fails and v.witness is not None:
        if fire_run(net, v.start, v.run) != v.witness:
            raise AssertionError("witness does not replay")


_STATUS_EXIT = {HOLDS: EXIT_HOLDS, FAILS: EXIT_FAILS, UNKNOWN: EXIT_UNKNOWN}


def cmd_validate(args, loaded):
    w = _workflow(loaded)
    bad = validate_workflow(w.net, w.initial, w.final, strict=args.strict)
    res = {"valid": not bad, "violations": [{"code": v.code, "message": v.message} for v in bad]}
    text = ["valid workflow net"] if not bad else [f"violation [{v.code}]: {v.message}" for v in bad]
    return (EXIT_HOLDS if not bad else EXIT_FAILS), res, text


def cmd_simulate(args, loaded):
    net = loaded.net
    if args.start:
        start = parse_marking(net, args.start)
    else:
        start = _workflow(loaded).initial_marking(args.k)
    run = parse_run(net, args.run)
    show = format_tuple if args.tuples else (lambda m: format_marking(net, m))
    try:
        marks = trace(net, start, run)
    except DisabledError as e:
        res = {"enabled": False, "step": e.index, "transition": net.transitions[e.transition],
               "marking": show(e.marking)}
        return EXIT_FAILS, res, [f"{net.transitions[e.transition]} is disabled at step {e.index} in {show(e.marking)}"]
    res = {"enabled": True, "start": show(start), "run": net.run_names(run), "end": show(marks[-1])}
    if args.trace:
        res["trace"] = [show(m) for m in marks]
        line = show(marks[0]) + "".join(f" -{net.transitions[t]}-> {show(m)}" for t, m in zip(run, marks[1:]))
        return EXIT_HOLDS, res, [line]
    return EXIT_HOLDS, res, [show(marks[-1])]


def cmd_cover(args, loaded, budget):
    net = loaded.net
    target = parse_marking(net, args.target)
    deadline = time.monotonic() + budget.seconds
    cb = backward_cover(net, UpSet((target,)), max_elements=budget.states, deadline=deadline)
    res = {"target": format_marking(net, target), "basis": upset_to_obj(net, cb.basis)}
    text = [f"basis of markings covering {format_marking(net, target)}:"]
    text += ["  " + format_marking(net, b) for b in cb.basis]
    code = EXIT_HOLDS
    if args.start:
        m = parse_marking(net, args.start)
        run = extract_covering_run(cb, net, m)
        res["from"] = format_marking(net, m)
        res["coverable"] = run is not None
        res["run"] = None
        if run is not None:
            end = fire_run(net, m, run)
            res["run"] = net.run_names(run)
            res["end"] = format_marking(net, end)
            text.append(f"coverable from {res['from']} by {' '.join(res['run']) or '(empty run)'} reaching {res['end']}")
        else:
            code = EXIT_FAILS
            text.append(f"not coverable from {res['from']}")
    return code, res, text


def cmd_reach(args, loaded, budget):
    net = loaded.net
    if args.target_file:
        try:
            with open(args.target_file, encoding="utf-8") as fh:
                tgt = parse_target(net, fh.read())
        except OSError as e:
            raise InputError(f"cannot read {args.target_file}: {e.strerror}") from None
    else:
        tgt = parse_target(net, args.target)
    start = parse_marking(net, args.start) if args.start else _workflow(loaded).initial_marking(args.k)
    v = decide_mixed_reach(net, start, tgt, budget)
    res = {"status": v.status, "from": format_marking(net, start), "target": target_to_obj(net, tgt),
           "certificates": json_safe(list(v.certificates)), "search": json_safe(v.report)}
    if v.found:
        if fire_run(net, start, v.run) != v.end:
            raise AssertionError("reach run does not replay")
        res["run"] = net.run_names(v.run)
        res["end"] = format_marking(net, v.end)
        text = [f"reachable: {' '.join(res['run']) or '(empty run)'} -> {res['end']}"]
        return EXIT_HOLDS, res, text
    if v.status == "unreachable":
        return EXIT_FAILS, res, ["unreachable (" + ", ".join(c["by"] for c in v.certificates) + ")"]
    return EXIT_UNKNOWN, res, ["unknown within budget"]


def cmd_redundancy(args, loaded):
    w = _workflow(loaded)
    net = w.net
    info = redundancy_info(w)
    res = {
        "nonredundant_places": {net.places[p]: {"k": x.k, "run": net.run_names(x.run)} for p, x in sorted(info.places.items())},
        "nonredundant_transitions": {net.transitions[t]: {"k": x.k, "run": net.run_names(x.run)}
                                     for t, x in sorted(info.transitions.items())},
        "redundant_places": [net.places[p] for p in sorted(info.redundant_places)],
        "redundant_transitions": [net.transitions[t] for t in sorted(info.redundant_transitions)],
    }
    text = [f"redundant places: {' '.join(res['redundant_places']) or '-'}",
            f"redundant transitions: {' '.join(res['redundant_transitions']) or '-'}"]
    return EXIT_HOLDS, res, text


def cmd_skeleton(args, loaded):
    w = _workflow(loaded)
    info = redundancy_info(w)
    sk = skeleton(w, info)
    net = w.net
    res = {
        "resetable": [net.places[p] for p in sorted(sk.resetable)],
        "workflow": sk.ok,
        "violations": [{"code": v.code, "message": v.message} for v in sk.violations],
        "net": json.loads(emit_net(sk.skeleton, sk.initial, sk.final) if sk.ok else emit_net(sk.skeleton)),
    }
    if args.output:
        _write(args.output, emit_net(sk.skeleton, sk.initial, sk.final) if sk.ok else emit_net(sk.skeleton))
    text = [f"skeleton: {len(sk.skeleton.places)} places, {len(sk.skeleton.transitions)} transitions"]
    text += ["workflow net" if sk.ok else f"violation [{v.code}]: {v.message}" for v in (sk.violations or [None])]
    return (EXIT_HOLDS if sk.ok else EXIT_FAILS), res, text


def _pk_obj(net, r) -> dict:
    out = {
        "k": r.k,
        "overall": r.overall,
        "failed": r.failed,
        "properties": {n: {"status": p.status, "detail": p.detail, "tag": p.tag, "evidence": json_safe(p.evidence)}
                       for n, p in r.properties.items()},
    }
    if r.witness is not None:
        out["witness"] = _verdict_obj(net, r.witness)
    if r.full_reset_run is not None:
        out["full_reset_run"] = {"z": r.full_reset_run.z, "run": net.run_names(r.full_reset_run.run)}
    return out


def cmd_check(args, loaded, budget):
    w = _workflow(loaded)
    net = w.net
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    prop = args.property
    if prop == "pk":
        r = pk_check(w, args.k, budget, k_max_gs=args.kmax_gs, max_nodes=budget.states)
        if r.witness is not None:
            _verified(net, r.witness)
        res = _pk_obj(net, r)
        text = [f"P_{args.k}: {r.overall}" + (f" (first failing: {r.failed})" if r.failed else "")]
        text += [f"  {n}: {p.status}{' [' + p.tag + ']' if p.tag else ''} {p.detail}" for n, p in r.properties.items()]
        code = {UP_TO_K_SOUND: EXIT_HOLDS, NOT_GS: EXIT_FAILS}.get(r.overall, EXIT_UNKNOWN)
        return code, res, text
    if prop == "clean":
        bad = None
        for j in range(1, args.k + 1):
            run = strict_cover_run(w, j)
            if run is not None:
                start = w.initial_marking(j)
                bad = Verdict(FAILS, j, start, run, fire_run(net, start, run), f"{{i:{j}}} strictly covers {{f:{j}}}")
                break
        v = bad or Verdict(HOLDS, args.k, reason=f"coverability-clean for j in 1..{args.k}")
        assert v.holds == all(coverability_clean(w, j) for j in range(1, args.k + 1))
    elif prop == "upto":
        v = up_to_k(w, args.k, budget)
    elif args.exact:
        v = k_sound_exact_plain(w, args.k, budget.states)
    else:
        v = k_sound_semi(w, args.k, budget)
    _verified(net, v)
    res = _verdict_obj(net, v)
    text = [f"{prop} k={args.k}: {v.status}" + (f" ({v.reason})" if v.reason else "")]
    if v.fails and v.witness is not None:
        text.append(f"  witness {format_marking(net, v.witness)} via {' '.join(net.run_names(v.run)) or '(empty run)'} "
                    f"from {format_marking(net, v.start)}")
    return _STATUS_EXIT[v.status], res, text


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror}") from None


def cmd_generate(args):
    if args.source == "builtin":
        net = builtin(args.name)
    elif args.source == "minsky":
        try:
            with open(args.machine, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as e:
            raise InputError(f"cannot read {args.machine}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"malformed JSON: {e.msg}", e.lineno) from None
        net = minsky_to_rwf(machine_from_obj(obj))
    else:
        net = random_workflow(random.Random(args.seed), args.places, args.transitions, resets=not args.plain)
    text = emit_net(net)
    if args.output:
        _write(args.output, text)
    return EXIT_HOLDS, json.loads(text), text.rstrip("\n").splitlines()


def _digest(loaded: LoadedNet) -> dict:
    return net_digest(loaded.net, loaded.initial, loaded.final)


def dispatch(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    t0 = time.monotonic()
    fmt = args.format or ("text" if args.command in ("simulate", "generate") else "json")
    digest = None
    try:
        budget = _budget(args)
        if args.command == "generate":
            code, res, text = cmd_generate(args)
        else:
            loaded = load_net(args.net, lenient=args.lenient or args.command == "validate",
                              strict=getattr(args, "strict", False))
            digest = _digest(loaded)
            if args.command == "validate":
                code, res, text = cmd_validate(args, loaded)
            elif args.command == "simulate":
                code, res, text = cmd_simulate(args, loaded)
            elif args.command == "cover":
                code, res, text = cmd_cover(args, loaded, budget)
            elif args.command == "reach":
                code, res, text = cmd_reach(args, loaded, budget)
            elif args.command == "redundancy":
                code, res, text = cmd_redundancy(args, loaded)
            elif args.command == "skeleton":
                code, res, text = cmd_skeleton(args, loaded)
            else:
                code, res, text = cmd_check(args, loaded, budget)
    except BudgetExceeded as e:
        sys.stderr.write(f"resound: budget exhausted: {e}\n")
        return EXIT_UNKNOWN
    except (InputError, NetError, MachineError, PreconditionError, UsageError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) else str(e)
        sys.stderr.write(f"resound: error: {msg}\n")
        return EXIT_INPUT
    if fmt == "text":
        out.write("\n".join(text) + "\n")
    else:
        report = {
            "tool": "resound",
            "version": __version__,
            "command": argv,
            "net": digest,
            "exit_code": code,
            "result": res,
            "timing": {"elapsed_secs": round(time.monotonic() - t0, 3)},
        }
        out.write(json.dumps(report, indent=2) + "\n")
    return code


def main(argv: list[str] | None = None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()

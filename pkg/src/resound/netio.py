"""JSON and text formats for nets, markings, targets and machines."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass

from .closed import OMEGA, Atom, DownSet, MixedTarget, UpSet
from .minsky import MinskyMachine, MachineError
from .net import Marking, NetError, ResetNet, WorkflowNet, validate_workflow

NET_FIELDS = {"places", "transitions", "initial", "final", "kind"}
TRANSITION_FIELDS = {"name", "pre", "post", "reset"}


class InputError(ValueError):
    """Rejected input; ``line`` is 1-based when the problem can be located."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line

    def __str__(self):
        msg = super().__str__()
        return f"line {self.line}: {msg}" if self.line else msg


def _line_of(text: str | None, needle: str) -> int | None:
    if not text:
        return None
    k = text.find(needle)
    return text.count("\n", 0, k) + 1 if k >= 0 else None


@dataclass(frozen=True)
class LoadedNet:
    net: ResetNet
    initial: int | None
    final: int | None
    kind: str

    @property
    def workflow(self) -> WorkflowNet | None:
        if self.initial is None or self.final is None:
            return None
        return WorkflowNet(self.net, self.initial, self.final)


def _weights(obj, where: str, text) -> dict:
    if not isinstance(obj, dict):
        raise InputError(f"{where} must be an object of place weights", _line_of(text, where.split(".")[0]))
    for p, w in obj.items():
        if not isinstance(w, int) or isinstance(w, bool) or w < 0:
            raise InputError(f"{where}: weight for {p!r} must be a non-negative integer", _line_of(text, f'"{p}"'))
    return obj


def net_from_obj(obj, text: str | None = None, lenient: bool = False, strict: bool = False) -> LoadedNet:
    """Schema-check a decoded net object; workflow nets are validated unless ``lenient``."""
    if not isinstance(obj, dict):
        raise InputError("top level must be a JSON object", 1)
    extra = set(obj) - NET_FIELDS
    if extra:
        key = sorted(extra)[0]
        raise InputError(f"unknown field {key!r}", _line_of(text, f'"{key}"'))
    places = obj.get("places")
    if not isinstance(places, list) or not all(isinstance(p, str) for p in places):
        raise InputError("'places' must be an array of strings", _line_of(text, '"places"'))
    seen = set()
    for p in places:
        if p in seen:
            raise InputError(f"duplicate place name {p!r}", _line_of(text, f'"{p}"'))
        seen.add(p)
    trans = obj.get("transitions")
    if not isinstance(trans, list):
        raise InputError("'transitions' must be an array", _line_of(text, '"transitions"'))
    specs = []
    for k, t in enumerate(trans):
        if not isinstance(t, dict):
            raise InputError(f"transition #{k} must be an object", _line_of(text, '"transitions"'))
        extra = set(t) - TRANSITION_FIELDS
        if extra:
            key = sorted(extra)[0]
            raise InputError(f"unknown field {key!r} in transition #{k}", _line_of(text, f'"{key}"'))
        name = t.get("name")
        if not isinstance(name, str):
            raise InputError(f"transition #{k} needs a string 'name'", _line_of(text, '"transitions"'))
        reset = t.get("reset", [])
        if not isinstance(reset, list) or not all(isinstance(p, str) for p in reset):
            raise InputError(f"{name}.reset must be an array of place names", _line_of(text, f'"{name}"'))
        specs.append((name, _weights(t.get("pre", {}), f"{name}.pre", text),
                       _weights(t.get("post", {}), f"{name}.post", text), reset))
    try:
        net = ResetNet.build(places, specs)
    except NetError as e:
        m = re.search(r"'([^']*)'", str(e))
        raise InputError(str(e), _line_of(text, f'"{m.group(1)}"') if m else None) from None

    kind = obj.get("kind")
    has_ends = "initial" in obj or "final" in obj
    if kind is None:
        kind = "workflow" if has_ends else "petri"
    if kind not in ("workflow", "petri"):
        raise InputError(f"'kind' must be \"workflow\" or \"petri\", not {kind!r}", _line_of(text, '"kind"'))
    ends = {}
    for key in ("initial", "final"):
        if key in obj:
            try:
                ends[key] = net.place(obj[key])
            except (NetError, TypeError):
                raise InputError(f"'{key}' names unknown place {obj[key]!r}", _line_of(text, f'"{key}"')) from None
    if kind == "workflow":
        if len(ends) != 2:
            raise InputError("a workflow net needs both 'initial' and 'final'", 1)
        if not lenient:
            bad = validate_workflow(net, ends["initial"], ends["final"], strict=strict)
            if bad:
                raise InputError("not a workflow net: " + "; ".join(v.message for v in bad), None)
    return LoadedNet(net, ends.get("initial"), ends.get("final"), kind)


def parse_net(text: str, lenient: bool = False, strict: bool = False) -> LoadedNet:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e.msg} (column {e.colno})", e.lineno) from None
    return net_from_obj(obj, text, lenient=lenient, strict=strict)


def load_net(path: str, lenient: bool = False, strict: bool = False) -> LoadedNet:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return parse_net(text, lenient=lenient, strict=strict)


def net_to_obj(net: ResetNet, initial: int | None = None, final: int | None = None) -> dict:
    P = net.places
    obj: dict = {"places": list(P), "transitions": []}
    for k, name in enumerate(net.transitions):
        obj["transitions"].append({
            "name": name,
            "pre": {P[p]: w for p, w in enumerate(net.pre[k]) if w},
            "post": {P[p]: w for p, w in enumerate(net.post[k]) if w},
            "reset": [P[p] for p in sorted(net.reset[k])],
        })
    if initial is not None and final is not None:
        obj["initial"] = P[initial]
        obj["final"] = P[final]
        obj["kind"] = "workflow"
    else:
        obj["kind"] = "petri"
    return obj


def emit_net(net, initial: int | None = None, final: int | None = None) -> str:
    """Canonical text: places and transitions in declaration order, 2-space indent, trailing newline."""
    if isinstance(net, WorkflowNet):
        net, initial, final = net.net, net.initial, net.final
    elif isinstance(net, LoadedNet):
        net, initial, final = net.net, net.initial, net.final
    return json.dumps(net_to_obj(net, initial, final), indent=2) + "\n"


def net_digest(net: ResetNet, initial=None, final=None) -> dict:
    text = emit_net(net, initial, final)
    return {
        "places": net.num_places,
        "transitions": net.num_transitions,
        "sha256": hashlib.sha256(text.encode()).hexdigest(),
    }


_ENTRY = re.compile(r"\s*([^\s:,{}]+)\s*:\s*(\d+)\s*")


def parse_marking(net: ResetNet, text: str) -> Marking:
    """``{p1:2, f:1}``; repeated places add up, ``{}`` is the zero marking."""
    s = text.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise InputError(f"marking must look like {{p:1, q:2}}, got {text!r}")
    body = s[1:-1].strip()
    counts: dict = {}
    if body:
        for part in body.split(","):
            m = _ENTRY.fullmatch(part)
            if not m:
                raise InputError(f"bad marking entry {part.strip()!r}")
            p, c = m.group(1), int(m.group(2))
            if p not in net.places:
                raise InputError(f"unknown place {p!r} in marking")
            counts[p] = counts.get(p, 0) + c
    return net.marking(counts)


def format_marking(net: ResetNet, m: Marking) -> str:
    return "{" + ", ".join(f"{p}:{x}" for p, x in zip(net.places, m) if x) + "}"


def format_tuple(m: Marking) -> str:
    return "(" + ", ".join(str(x) for x in m) + ")"


def marking_to_obj(net: ResetNet, m: Marking) -> dict:
    return {p: x for p, x in zip(net.places, m) if x}


def parse_run(net: ResetNet, text: str):
    try:
        return net.run(text.replace(",", " "))
    except NetError as e:
        raise InputError(str(e)) from None


def _omega_out(x):
    return "w" if x == OMEGA else x


def _omega_in(x):
    if x in ("w", "ω", "omega"):
        return OMEGA
    if isinstance(x, int) and not isinstance(x, bool) and x >= 0:
        return x
    raise InputError(f"expected a natural number or \"w\", got {x!r}")


def upset_to_obj(net: ResetNet, u: UpSet) -> list:
    return [marking_to_obj(net, b) for b in u.basis]


def downset_to_obj(net: ResetNet, d: DownSet) -> list:
    return [{p: _omega_out(x) for p, x in zip(net.places, ideal) if x} for ideal in d.ideals]


def target_from_obj(net: ResetNet, obj) -> MixedTarget:
    """``{"atoms": [{"f": {"at_least": 1}, "q": {"at_most": 0}}, ...]}``."""
    if not isinstance(obj, dict) or set(obj) != {"atoms"} or not isinstance(obj["atoms"], list):
        raise InputError('target must be an object {"atoms": [...]}')
    atoms = []
    for a in obj["atoms"]:
        if not isinstance(a, dict):
            raise InputError("each atom must be an object of place constraints")
        lo, hi = {}, {}
        for p, c in a.items():
            if p not in net.places:
                raise InputError(f"unknown place {p!r} in target")
            if not isinstance(c, dict) or not set(c) <= {"at_least", "at_most"}:
                raise InputError(f"constraint on {p!r} must use at_least/at_most")
            if "at_least" in c:
                lo[net.place(p)] = _omega_in(c["at_least"])
            if "at_most" in c:
                hi[net.place(p)] = _omega_in(c["at_most"])
        atoms.append(Atom.build(net.num_places, lo, hi))
    return MixedTarget(tuple(atoms))


def target_to_obj(net: ResetNet, tgt: MixedTarget) -> dict:
    atoms = []
    for a in tgt.atoms:
        d = {}
        for p, lo, hi in zip(net.places, a.lower, a.upper):
            c = {}
            if lo:
                c["at_least"] = _omega_out(lo)
            if hi != OMEGA:
                c["at_most"] = hi
            if c:
                d[p] = c
        atoms.append(d)
    return {"atoms": atoms}


def parse_target(net: ResetNet, text: str) -> MixedTarget:
    """A JSON target object, or a marking literal meaning "cover this marking"."""
    s = text.strip()
    if s.startswith("{") and not s.startswith('{"'):
        m = parse_marking(net, s)
        return MixedTarget((Atom.build(net.num_places, {p: x for p, x in enumerate(m) if x}),))
    try:
        return target_from_obj(net, json.loads(s))
    except json.JSONDecodeError as e:
        raise InputError(f"malformed target JSON: {e.msg}", e.lineno) from None


def machine_from_obj(obj) -> MinskyMachine:
    if not isinstance(obj, dict) or set(obj) - {"states", "transitions", "source", "target"}:
        raise InputError("machine must be {states, transitions, source, target}")
    try:
        return MinskyMachine(
            tuple(obj["states"]),
            tuple(tuple(t) for t in obj["transitions"]),
            obj["source"],
            obj["target"],
        )
    except KeyError as e:
        raise InputError(f"machine is missing {e.args[0]!r}") from None
    except (MachineError, TypeError, ValueError) as e:
        raise InputError(str(e)) from None


def machine_to_obj(M: MinskyMachine) -> dict:
    return {
        "states": list(M.states),
        "transitions": [list(t) for t in M.transitions],
        "source": M.source,
        "target": M.target,
    }


def json_safe(x):
    """Replace infinities so reports stay valid JSON."""
    if isinstance(x, float) and math.isinf(x):
        return "w"
    if isinstance(x, dict):
        return {k: json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_safe(v) for v in x]
    return x

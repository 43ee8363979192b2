import json

import pytest
from hypothesis import given, settings, strategies as st

from resound.catalog import CATALOG, builtin
from resound.closed import OMEGA
from resound.corpus import random_net
from resound.minsky import MinskyMachine
from resound.netio import (InputError, emit_net, format_marking, format_tuple, machine_from_obj, machine_to_obj,
                           net_digest, parse_marking, parse_net, parse_target, target_to_obj)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_builtin_round_trip(name):
    text = emit_net(builtin(name))
    assert emit_net(parse_net(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_round_trip(seed):
    import random
    net = random_net(random.Random(seed), 4, 4)
    text = emit_net(net)
    loaded = parse_net(text)
    assert loaded.kind == "petri" and loaded.net == net
    assert emit_net(loaded) == text


def test_fig2_file():
    loaded = parse_net(emit_net(builtin("fig2")))
    assert loaded.kind == "workflow"
    assert loaded.net.num_places == 7 and loaded.net.num_transitions == 5


def test_petri_without_ends():
    loaded = parse_net('{"places": ["a"], "transitions": [{"name": "t", "pre": {"a": 1}}]}')
    assert loaded.kind == "petri" and loaded.workflow is None


BAD = [
    ('{\n  "places": ["a", "b"],\n  "transitions": [],\n  "colour": 1\n}', 4, "unknown field"),
    ('{\n  "places": ["a",\n    "a"],\n  "transitions": []\n}', 2, "duplicate"),
    ('{\n  "places": ["a"]\n  "transitions": []\n}', 3, "malformed JSON"),
    ('{\n  "places": ["a"],\n  "transitions": [\n    {"name": "t", "pre": {"a": -1}}\n  ]\n}', 2, "non-negative"),
]


@pytest.mark.parametrize("text,line,words", BAD)
def test_rejections_are_line_anchored(text, line, words):
    with pytest.raises(InputError) as exc:
        parse_net(text)
    assert exc.value.line == line
    assert words in str(exc.value) and str(exc.value).startswith(f"line {line}:")


def test_invalid_workflow_needs_lenient():
    text = json.dumps({"places": ["i", "p", "f"], "initial": "i", "final": "f",
                       "transitions": [{"name": "t", "pre": {"i": 1}, "post": {"f": 1}}]})
    with pytest.raises(InputError, match="not a workflow net"):
        parse_net(text)
    assert parse_net(text, lenient=True).workflow is not None


def test_markings():
    net = builtin("fig2").net
    m = parse_marking(net, "{i:2, f:1, i:1}")
    assert m == net.marking(i=3, f=1)
    assert format_marking(net, m) == "{i:3, f:1}"
    assert parse_marking(net, "{}") == net.zero()
    assert format_tuple((1, 0, 2)) == "(1, 0, 2)"
    for bad in ("i:1", "{x:1}", "{i:-1}", "{i}"):
        with pytest.raises(InputError):
            parse_marking(net, bad)


def test_targets():
    net = builtin("pump").net
    t = parse_target(net, '{"atoms": [{"q": {"at_least": 3}, "p": {"at_most": "w"}}, {"f": {"at_most": 0}}]}')
    assert len(t.atoms) == 2
    assert t.atoms[0].upper[net.place("p")] == OMEGA
    assert net.marking(q=3, p=7) in t
    assert target_to_obj(net, t) == {"atoms": [{"q": {"at_least": 3}}, {"f": {"at_most": 0}}]}
    t = parse_target(net, "{f:1}")
    assert net.marking(f=2) in t and net.zero() not in t
    with pytest.raises(InputError):
        parse_target(net, '{"atoms": [{"z": {"at_least": 1}}]}')


def test_machines():
    M = MinskyMachine.of([("qsrc", "zrt1", "qtgt")])
    assert machine_from_obj(machine_to_obj(M)) == M
    with pytest.raises(InputError):
        machine_from_obj({"states": ["a"], "transitions": [], "source": "a", "target": "a"})
    with pytest.raises(InputError):
        machine_from_obj({"states": ["a", "b"], "transitions": [], "source": "a"})


def test_digest_is_stable():
    a = net_digest(builtin("fig1"))
    assert a == net_digest(builtin("fig1"))
    assert a["places"] == 4 and len(a["sha256"]) == 64
    assert a != net_digest(builtin("chain").net)

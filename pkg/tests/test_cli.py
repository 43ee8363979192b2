import io
import json

import pytest

from resound.catalog import builtin
from resound.cli import dispatch
from resound.minsky import MinskyMachine
from resound.net import fire_run
from resound.netio import emit_net, machine_to_obj, parse_marking


@pytest.fixture
def netfile(tmp_path):
    def make(name):
        path = tmp_path / f"{name}.json"
        path.write_text(emit_net(builtin(name)))
        return str(path)
    return make


def run(*argv):
    out = io.StringIO()
    code = dispatch(list(argv), out)
    return code, out.getvalue()


def report(*argv):
    code, text = run(*argv)
    rep = json.loads(text)
    assert rep["exit_code"] == code and rep["tool"] == "resound"
    return code, rep


def test_simulate_fig2(netfile):
    code, text = run("simulate", "--from", "{i:2}", "--run", "s s t2 u2", netfile("fig2"))
    assert code == 0 and text == "{f:1}\n"


def test_simulate_disabled(netfile):
    code, text = run("simulate", "--run", "t1", netfile("fig2"))
    assert code == 1 and "disabled at step 0" in text


def test_simulate_petri_requires_from(netfile):
    code, text = run("simulate", "--from", "{p1:1}", "--run", "t1 t3", "--tuples", netfile("fig1"))
    assert code == 0 and text == "(0, 0, 0, 1)\n"


def test_check_upto_fig2(netfile):
    f = netfile("fig2")
    code, rep = report("check", "--property", "upto", "--k", "1", f)
    assert code == 0 and rep["result"]["status"] == "holds"
    code, rep = report("check", "--property", "upto", "--k", "2", f)
    assert code == 1
    res = rep["result"]
    net = builtin("fig2").net
    start = parse_marking(net, res["start"])
    assert fire_run(net, start, net.run(" ".join(res["run"]))) == parse_marking(net, res["witness"])
    assert parse_marking(net, res["witness"]) == net.marking(f=1)


def test_check_pk_fig2(netfile):
    code, rep = report("check", "--property", "pk", "--k", "1", netfile("fig2"))
    assert code == 1
    assert rep["result"]["overall"] == "not_generalised_sound"
    assert rep["result"]["properties"]["P3"]["tag"] == "skeleton_not_workflow"


def test_check_pk_holds(netfile):
    code, rep = report("check", "--property", "pk", "--k", "2", netfile("reset-diamond"))
    assert code == 0 and rep["result"]["overall"] == "up_to_k_sound"


def test_check_other_properties(netfile):
    assert report("check", "--property", "ksound", "--k", "2", "--exact", netfile("chain"))[0] == 0
    assert run("check", "--property", "ksound", "--exact", netfile("fig2"))[0] == 3
    assert report("check", "--property", "clean", "--k", "2", netfile("fig2"))[0] == 0
    code, rep = report("check", "--property", "clean", netfile("pump"))
    assert code == 1 and rep["result"]["run"]


def test_unknown_on_tiny_budget(netfile):
    code, rep = report("check", "--property", "ksound", "--budget-states", "3", netfile("pump"))
    assert code in (1, 2)


def test_budget_env_fallback(netfile, monkeypatch):
    monkeypatch.setenv("RESOUND_BUDGET_SECS", "abc")
    assert run("check", "--property", "upto", netfile("chain"))[0] == 3
    monkeypatch.setenv("RESOUND_BUDGET_SECS", "5")
    assert run("check", "--property", "upto", netfile("chain"))[0] == 0


def test_validate(netfile, tmp_path):
    assert report("validate", netfile("fig2"))[0] == 0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"places": ["i", "p", "f"], "initial": "i", "final": "f",
                                "transitions": [{"name": "t", "pre": {"i": 1}, "post": {"f": 1}}]}))
    code, rep = report("validate", str(path))
    assert code == 1 and rep["result"]["violations"][0]["code"] == "not_on_path"
    assert run("check", "--property", "upto", str(path))[0] == 3


def test_cover_and_reach(netfile):
    code, rep = report("cover", "--target", "{p4:1}", "--from", "{p1:1}", netfile("fig1"))
    assert code == 0 and rep["result"]["coverable"]
    code, rep = report("cover", "--target", "{f:2}", "--from", "{i:1}", netfile("chain"))
    assert code == 1 and rep["result"]["run"] is None
    code, rep = report("reach", "--target", "{q:3}", netfile("pump"))
    assert code == 0 and rep["result"]["run"] == ["t1", "t2", "t2", "t2"]
    code, rep = report("reach", "--target", '{"atoms": [{"f": {"at_least": 2}}]}', netfile("chain"))
    assert code == 1
    assert run("reach", "--target", "{f:1}", netfile("fig2"))[0] == 3


def test_redundancy_and_skeleton(netfile, tmp_path):
    code, rep = report("redundancy", netfile("mutex-reset"))
    assert rep["result"]["redundant_transitions"] == ["g", "h"]
    out = tmp_path / "sk.json"
    code, rep = report("skeleton", netfile("reset-diamond"), "-o", str(out))
    assert code == 0 and json.loads(out.read_text())["places"] == ["i", "p", "f"]
    code, rep = report("skeleton", netfile("fig2"))
    assert code == 1 and not rep["result"]["workflow"]


def test_generate(tmp_path):
    out = tmp_path / "fig2.json"
    code, text = run("generate", "builtin", "fig2", "-o", str(out))
    assert code == 0 and out.read_text() == emit_net(builtin("fig2"))
    mfile = tmp_path / "m0.json"
    mfile.write_text(json.dumps(machine_to_obj(MinskyMachine.of([("qsrc", "zrt1", "qtgt")]))))
    code, text = run("generate", "minsky", str(mfile))
    assert code == 0 and '"t3"' in text
    a = run("generate", "random", "--seed", "3")[1]
    assert a == run("generate", "random", "--seed", "3")[1]


def test_reports_are_deterministic(netfile):
    f = netfile("fig2")
    a = report("check", "--property", "pk", "--k", "1", f)[1]
    b = report("check", "--property", "pk", "--k", "1", f)[1]
    a.pop("timing"), b.pop("timing")
    assert a == b


def test_usage_errors(netfile):
    with pytest.raises(SystemExit) as exc:
        run("check", "--no-such-flag", netfile("chain"))
    assert exc.value.code == 3
    assert run("check", "--property", "upto", "--k", "0", netfile("chain"))[0] == 3
    assert run("check", "--property", "upto", "/nonexistent.json")[0] == 3
    assert run("simulate", "--run", "zz", netfile("chain"))[0] == 3

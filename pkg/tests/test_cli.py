import io
import json
import subprocess
import sys

import pytest

from dbexplain.cli import COMMANDS, run

from conftest import FIXTURES

F = str(FIXTURES)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def test_causes_rs():
    got = report("causes", "--data", f"{F}/rs", "--query", f"{F}/rs/q.cq")
    by_fact = {c["fact"]: c for c in got["causes"]}
    assert by_fact["S(b)"]["responsibility"] == "1/1" and by_fact["S(b)"]["kind"] == "COUNTERFACTUAL"
    for fact in ("R(a,b)", "R(b,b)", "S(a)"):
        assert by_fact[fact]["responsibility"] == "1/2"


def test_inc_degree():
    assert report("inc-degree", "--data", f"{F}/pqr", "--dcs", f"{F}/pqr/dcs.dc") == {"inc_degree": "1/4"}


def test_xresp():
    got = report("xresp", "--tree", f"{F}/tennis/tree.json", "--entity", "sunny,normal,weak", "--feature", "humidity")
    assert got["x_resp"] == "1/1" and got["flip_value"] == "high"


def test_decimal_flag():
    got = report("causal-effect", "--data", f"{F}/ce", "--query", f"{F}/ce/q.cq", "--tid", "4", "--decimal")
    assert got == {"tid": 4, "causal_effect": "0.5625"}


def test_data_from_environment(monkeypatch):
    monkeypatch.setenv("DBEXPLAIN_DATA", f"{F}/rs")
    got = report("query", "--query", f"{F}/rs/q.cq")
    assert got == {"query": "q", "result": True}


def test_open_query_answers():
    got = report("query", "--data", f"{F}/dep", "--query", f"{F}/dep/q.cq")
    assert ["john"] in got["answers"]
    got = report("resp", "--data", f"{F}/dep", "--query", f"{F}/dep/q.cq", "--answer", "john", "--tid", "1")
    assert got["kind"] == "COUNTERFACTUAL"


def test_shapley_reports():
    got = report("shapley", "--data", f"{F}/graph", "--query", f"{F}/graph/q.cq", "--tid", "1")
    assert got["shapley"] == "7/12" and got["banzhaf"] == "21/32" and got["hierarchical"] is None
    assert got["method"] == "exact" and got["samples"] is None
    all_ = report("shapley", "--data", f"{F}/rs", "--query", f"{F}/rs/q.cq")
    assert [s["tid"] for s in all_["scores"]] == [1, 2, 3, 4, 5, 6]
    support = report("shapley", "--data", f"{F}/rs", "--query", f"{F}/rs/q.cq", "--support-only")
    assert [s["tid"] for s in support["scores"]] == [1, 3, 4, 6]


def test_sampled_shapley_is_reproducible():
    argv = ["shapley", "--data", f"{F}/graph", "--query", f"{F}/graph/q.cq", "--tid", "1", "--sampled", "--seed", "3"]
    a, b = call(*argv), call(*argv)
    assert a == b and a[0] == 0
    got = json.loads(a[1])
    assert got["samples"] == 738 and got["method"] == "sampled" and got["guarantee"].startswith("additive")


def test_sampled_needs_seed():
    code, _, err = call("shapley", "--data", f"{F}/graph", "--query", f"{F}/graph/q.cq", "--tid", "1", "--sampled")
    assert code == 2 and "--seed" in err


def test_usage_errors():
    assert call("causes", "--query", f"{F}/rs/q.cq")[0] == 2
    assert call("nonsense")[0] == 2
    assert call("xresp", "--tree", f"{F}/tennis/tree.json", "--feature", "wind")[0] == 2
    code, _, err = call("query", "--data", f"{F}/dep", "--query", f"{F}/dep/q.cq", "--name", "zzz")
    assert code == 2


def test_domain_errors_are_module_qualified(tmp_path):
    code, _, err = call("causes", "--data", f"{F}/rs", "--query", f"{F}/pqr/dcs.dc")
    assert code == 2
    bad = tmp_path / "q.cq"
    bad.write_text("q() :- R(X,X), S(d).")
    code, _, err = call("causes", "--data", f"{F}/rs", "--query", bad)
    assert code == 1 and err.startswith("error: causality-engine:")
    bad.write_text("q() :- R(X")
    code, _, err = call("causes", "--data", f"{F}/rs", "--query", bad)
    assert code == 1 and err.startswith("error: query-lang:")
    code, _, err = call("ingest-check", "--data", tmp_path / "missing")
    assert code == 1 and "error:" in err


def test_repairs_and_attr():
    got = report("repairs", "--data", f"{F}/pqr", "--dcs", f"{F}/pqr/dcs.dc", "--semantics", "C")
    assert len(got["repairs"]) == 1
    got = report("repairs", "--data", f"{F}/rs", "--dcs", f"{F}/rs/dcs.dc", "--attr", "--semantics", "C")
    assert len(got["interventions"]) == 1


def test_emit_asp_to_file(tmp_path):
    out = tmp_path / "p.dlv"
    code, stdout, _ = call("emit-asp", "--family", "cip", "--tree", f"{F}/tennis/tree.json",
                           "--entity", "sunny,normal,weak", "--forbid", "rain,strong", "--output", out)
    assert code == 0 and stdout == ""
    assert out.read_text().rstrip().endswith(":- ent(E,rain,X,strong,tr).")


def test_emission_is_byte_identical():
    argv = ["emit-asp", "--data", f"{F}/rs", "--dcs", f"{F}/rs/dcs.dc", "--weak", "--responsibility"]
    assert call(*argv) == call(*argv)


# one invocation per command, each reproducing a worked value
WORKED_VALUES = {
    "ingest-check": (["--data", "rs"], lambda r: r["size"] == 6),
    "query": (["--data", "rs", "--query", "rs/q.cq"], lambda r: r["result"] is True),
    "causes": (["--data", "rs", "--query", "rs/q.cq"], lambda r: len(r["causes"]) == 4),
    "resp": (["--data", "rs", "--query", "rs/q.cq", "--tid", "6"], lambda r: r["responsibility"] == "1/1"),
    "attr-causes": (["--data", "srnull", "--query", "srnull/q.cq"], lambda r: r["causes"][0]["cell"] == [2, 1]),
    "causes-ics": (
        ["--data", "dep", "--query", "dep/q2.cq", "--answer", "john", "--ics", "dep/psi.ic"],
        lambda r: {c["tid"]: c["responsibility"] for c in r["causes"]} == {4: "1/3", 8: "1/3"},
    ),
    "causal-effect": (["--data", "ce", "--query", "ce/q.cq", "--tid", "4"], lambda r: r["causal_effect"] == "9/16"),
    "shapley": (["--data", "graph", "--query", "graph/q.cq", "--tid", "1"], lambda r: r["shapley"] == "7/12"),
    "banzhaf": (["--data", "ce", "--query", "ce/q.cq", "--tid", "4"], lambda r: r["banzhaf"] == "9/16"),
    "inc-degree": (["--data", "abcde", "--dcs", "abcde/dcs.dc"], lambda r: r["inc_degree"] == "2/5"),
    "repairs": (["--data", "pqr", "--dcs", "pqr/dcs.dc"], lambda r: len(r["repairs"]) == 2),
    "xresp": (
        ["--tree", "tennis/tree.json", "--entity", "sunny,normal,weak", "--feature", "outlook"],
        lambda r: r["x_resp"] == "1/2",
    ),
    "counter": (
        ["--tree", "tennis/tree.json", "--entity", "sunny,normal,weak", "--feature", "humidity"],
        lambda r: r["counter"] == "1/2",
    ),
    "resp-score": (
        ["--tree", "tennis/tree.json", "--entity", "sunny,normal,weak", "--feature", "humidity"],
        lambda r: r["resp"] == "1/2",
    ),
    "shap": (
        ["--tree", "tennis/tree.json", "--entity", "sunny,normal,weak"],
        lambda r: r["shap"] == {"outlook": "-1/12", "humidity": "1/3", "wind": "1/12"},
    ),
}


def _resolve(args):
    out = []
    for i, a in enumerate(args):
        flag = args[i - 1] if i else ""
        out.append(f"{F}/{a}" if flag in ("--data", "--query", "--dcs", "--ics", "--tree") else a)
    return out


@pytest.mark.parametrize("command", sorted(set(COMMANDS) - {"emit-asp"}))
def test_every_command_has_a_fixture(command):
    args, check = WORKED_VALUES[command]
    assert check(report(command, *_resolve(args)))


def test_console_script():
    out = subprocess.run(
        [sys.executable, "-m", "dbexplain.cli", "inc-degree", "--data", f"{F}/pqr", "--dcs", f"{F}/pqr/dcs.dc"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0 and json.loads(out.stdout) == {"inc_degree": "1/4"}

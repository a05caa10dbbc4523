import json

import pytest

from recveq.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_prove_skip_ahead_fibonacci(capsys):
    code, out, _ = run(capsys, "prove", "fib.mrc", "--pair", "f1:f2", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == 1
    (pair,) = data["pairs"]
    assert pair["verdict"] == "Equivalent"
    assert pair["strategy"] == "full-part-eq"


def test_prove_missing_name(capsys):
    code, _, err = run(capsys, "prove", "fib.mrc", "--pair", "f1:missing")
    assert code == 3 and "missing" in err


def test_prove_pascal_small_depth(capsys):
    code, out, _ = run(capsys, "prove", "pascal.mrc", "--pair", "p1:p2", "--depth-bound", "6")
    assert code == 1 and "Inconclusive" in out


def test_prove_refuted(capsys, tmp_path):
    src = tmp_path / "bad.mrc"
    src.write_text("int a(int n) { if (n <= 0) return 0; return n + a(n - 1); }\n"
                   "int b(int n) { if (n <= 1) return n; return n + b(n - 1); }\n")
    code, out, _ = run(capsys, "prove", str(src), "--pair", "a:b", "--json")
    assert code == 2
    w = json.loads(out)["pairs"][0]["witness"]
    assert w["v1"] != w["v2"]


def test_sync_then_basecase(capsys, tmp_path):
    code, out, _ = run(capsys, "sync", "fib.mrc", "--pair", "f1:f2", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["found"] and data["leaves"][0] == data["leaves"][1]
    su = tmp_path / "su.json"
    su.write_text(out)
    code, out, _ = run(capsys, "basecase", "fib.mrc", "--fn", "f1", "--su", str(su), "--json")
    assert code == 0
    info = json.loads(out)
    assert set(info) >= {"rho", "bcpc"}


def test_paths(capsys, tmp_path):
    dump = tmp_path / "paths.json"
    code, out, _ = run(capsys, "paths", "fib.mrc", "--fn", "h2", "--dump-paths", str(dump))
    assert code == 0
    assert len(json.loads(dump.read_text())["paths"]) == 4


def test_oracle_commands(capsys):
    code, out, _ = run(capsys, "oracle", "check", "fib.mrc", "f1", "f2", "--range", "-8:12")
    assert code == 0 and "FuelLimited" in out
    code, out, _ = run(capsys, "oracle", "eval", "fib.mrc", "f1", "7", "--json")
    assert code == 0 and json.loads(out)["value"] == 13


def test_emit_smt(capsys, tmp_path):
    out_file = tmp_path / "q.smt2"
    code, _, _ = run(capsys, "emit-smt", "fib.mrc", "--pair", "f1:f2", "--out", str(out_file))
    assert code == 0
    text = out_file.read_text()
    assert "(check-sat)" in text and "declare-fun" in text


@pytest.mark.parametrize("argv", [
    ["prove", "fib.mrc"],
    ["prove", "fib.mrc", "--pair", "f1-f2"],
    ["prove", "nothere.mrc", "--pair", "a:b"],
    ["frobnicate"],
    ["prove", "fib.mrc", "--pair", "f1:f2", "--engine", "z3"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 3


def test_frontend_error_exit(capsys, tmp_path):
    src = tmp_path / "broken.mrc"
    src.write_text("int f(int n) { return g(n); }")
    code, _, err = run(capsys, "prove", str(src), "--pair", "f:f")
    assert code == 3 and "UndefinedCallee" in err


def test_corpus_uw_zero_reports_diff(capsys):
    code, out, _ = run(capsys, "corpus", "--uw-max", "0", "--json")
    assert code == 1
    rows = json.loads(out)["cases"]
    flipped = {tuple(r["pair"]) for r in rows if not r["ok"]}
    assert ("f1", "f2") in flipped and ("sum1", "sum2") not in flipped


def test_repeated_runs_are_identical(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "prove", "fib.mrc", "--pair", "h1:h2", "--json")
        data = json.loads(out)
        for p in data["pairs"]:
            p.pop("timings")
        outs.append((code, data))
    assert outs[0] == outs[1]

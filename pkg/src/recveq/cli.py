"""Command-line interface: ``recveq <command> ...``.

Exit codes: 0 Equivalent, 1 NotProven or Inconclusive, 2 NotEquivalent,
3 usage or front-end error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import List, Optional, Sequence

from . import cases
from .config import Config
from .errors import RecveqError
from .lang import load
from .lang.ast import SourceUnit
from .oracle import (DomainSpec, EquivalentOnDomain, FuelLimited, Interpreter, Value, Witness,
                     brute_force_equiv)
from .lang.check import recursive_call_sites
from .pathex import get_all_paths, natural_base_case_precondition, paths_json
from .prover import (Equivalent, NotEquivalent, NotProven, PairMapping, Side, base_case_info,
                     prove_path_base_equiv, prove_path_step_equiv, prove_programs, separate,
                     step_task)
from .sync import NotFound, find_sync_unrolling
from .transforms import NO_UNROLLING, SyncUnrolling, render_tree

EXIT_OK, EXIT_UNPROVEN, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2, 3
SCHEMA = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("bounds and budgets")
    g.add_argument("--width", type=int, default=8)
    g.add_argument("--uw-max", type=int, default=6)
    g.add_argument("--depth-bound", type=int, default=16)
    g.add_argument("--path-bound", type=int, default=4096)
    g.add_argument("--step-bound", type=int, default=200_000)
    g.add_argument("--timeout", type=float, default=10.0, help="per solver query, seconds")
    g.add_argument("--conflicts", type=int, default=200_000, help="per SAT query")
    g.add_argument("--sync-budget", type=float, default=60.0, help="seconds per sync search")
    g.add_argument("--strict-size-guard", action="store_true")
    g.add_argument("--engine", choices=("auto", "enumerate", "satcore"), default="auto")
    g.add_argument("--fuel", type=int, default=256, help="interpreter fuel for replays")
    g.add_argument("--no-sweep", action="store_true", help="skip the refutation sweep")
    g.add_argument("--sweep-budget", type=float, default=20.0)
    g.add_argument("--dump-dir", default=None)
    g.add_argument("--emit-smt", default=None, metavar="DIR")
    g.add_argument("--emit-cnf", default=None, metavar="DIR")
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--seed", type=int, default=None, help="accepted for compatibility; unused")


def _config(a) -> Config:
    kw = dict(width=a.width, uw_max=a.uw_max, depth_bound=a.depth_bound, path_bound=a.path_bound,
              step_bound=a.step_bound, solver_timeout=a.timeout, conflict_limit=a.conflicts,
              sync_budget=a.sync_budget, strict_size_guard=a.strict_size_guard, engine=a.engine,
              oracle_fuel=a.fuel, refute_sweep=not a.no_sweep, sweep_budget=a.sweep_budget,
              emit_smt=a.emit_smt, emit_cnf=a.emit_cnf, jobs=a.jobs)
    if a.dump_dir:
        kw["dump_dir"] = a.dump_dir
    try:
        return Config.from_env(**kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def _read(path: str) -> SourceUnit:
    if not os.path.exists(path) and path in cases.corpus_files():
        return cases.corpus_unit(path)
    try:
        with open(path) as fh:
            return load(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _function(unit: SourceUnit, name: str):
    if name not in unit:
        raise UsageError(f"no function {name!r}")
    return unit.function(name)


def _pair(spec: str):
    try:
        return PairMapping.parse([spec]).pairs[0]
    except ValueError as exc:
        raise UsageError(str(exc))


def _emit(a, data: dict, text: str):
    if a.json:
        print(json.dumps({"schema": SCHEMA, **data}, indent=2))
    else:
        print(text)


def exit_code(verdicts) -> int:
    verdicts = list(verdicts)
    if any(isinstance(v, NotEquivalent) for v in verdicts):
        return EXIT_REFUTED
    return EXIT_OK if all(isinstance(v, Equivalent) for v in verdicts) else EXIT_UNPROVEN


def _load_su(path: str) -> SyncUnrolling:
    try:
        with open(path) as fh:
            return SyncUnrolling.from_json(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad unrolling file {path}: {exc}")


# -- commands ------------------------------------------------------------------------------

def cmd_prove(a) -> int:
    u1 = _read(a.files[0])
    u2 = _read(a.files[1]) if len(a.files) > 1 else u1
    pairs = [_pair(p) for p in a.pair]
    for n1, n2 in pairs:
        _function(u1, n1)
        _function(u2, n2)
    config = _config(a)
    if a.su_file:
        if len(pairs) != 1:
            raise UsageError("--su-file needs exactly one --pair")
        return _prove_with_su(a, u1, u2, pairs[0], _load_su(a.su_file), config)
    report = prove_programs(u1, u2, PairMapping(tuple(pairs)), config)
    lines = [report.table()]
    for p in report.pairs:
        o = p.outcome
        if o.su is not None:
            f1, f2 = u1.function(p.names[0]), u2.function(p.names[1])
            c1, c2 = len(recursive_call_sites(f1)), len(recursive_call_sites(f2))
            lines.append(f"\nsync-unrolling for {p.names[0]}/{p.names[1]}:")
            lines.append(render_tree(o.su.side1, f1.name, c1))
            lines.append(render_tree(o.su.side2, f2.name, c2))
        if a.verbose:
            lines.append(f"\nevidence for {p.names[0]}/{p.names[1]}:")
            lines += [f"  {t}: {r}" for t, r in o.evidence]
    _emit(a, report.to_json(), "\n".join(lines))
    return exit_code(p.outcome.verdict for p in report.pairs)


def _prove_with_su(a, u1, u2, pair, su, config) -> int:
    """Path rule with a user-supplied unrolling, no search."""
    s1 = Side(u1.function(pair[0]), SourceUnit(tuple(g for g in u1.functions if g.name != pair[0]),
                                                  u1.externs), u1, pair[0])
    s2 = Side(u2.function(pair[1]), SourceUnit(tuple(g for g in u2.functions if g.name != pair[1]),
                                                  u2.externs), u2, pair[1])
    t = time.monotonic()
    base, info = prove_path_base_equiv(s1, s2, su, config)
    evidence = list(base.evidence)
    verdict = base.verdict
    if info is not None and not isinstance(verdict, (NotEquivalent, NotProven)):
        step = prove_path_step_equiv(s1, s2, su, info.ebcp, config)
        evidence += step.evidence
        # a failed step outranks an inconclusive base
        if isinstance(step.verdict, NotProven) or isinstance(verdict, Equivalent):
            verdict = step.verdict
    data = {"pairs": [{"names": list(pair), "verdict": str(verdict), "strategy": "path-part-eq",
                       "su": {"side1": repr(su.side1), "side2": repr(su.side2)},
                       "evidence": [list(e) for e in evidence],
                       "timings": {"total": round(time.monotonic() - t, 3)}}]}
    text = f"{pair[0]}/{pair[1]}: {verdict}\n" + "\n".join(f"  {k}: {v}" for k, v in evidence)
    _emit(a, data, text)
    return exit_code([verdict])


def cmd_sync(a) -> int:
    u1 = _read(a.files[0])
    u2 = _read(a.files[1]) if len(a.files) > 1 else u1
    n1, n2 = _pair(a.pair)
    s1, s2 = separate(Side(_function(u1, n1)), Side(_function(u2, n2)))
    config = _config(a)
    rho1 = natural_base_case_precondition(s1.f, config, u1)
    rho2 = natural_base_case_precondition(s2.f, config, u2)
    r = find_sync_unrolling(s1.f, s2.f, rho1, rho2, config)
    if isinstance(r, NotFound):
        _emit(a, {"found": False, "reason": r.reason, "uw": r.uw, "detail": r.detail},
              f"no sync-unrolling: {r.reason} (uw {r.uw}) {r.detail}".rstrip())
        return EXIT_UNPROVEN
    c1, c2 = len(recursive_call_sites(s1.f)), len(recursive_call_sites(s2.f))
    w = r.witness
    data = {"found": True, "uw": r.uw, "input": list(w.input),
            "leaves": [sorted(map(list, w.leaf_multiset(i).elements())) for i in (1, 2)],
            "su": r.su.to_json(c1, c2)}
    text = "\n".join([f"uw {r.uw}, witness input {list(w.input)}",
                      render_tree(r.su.side1, n1, c1), render_tree(r.su.side2, n2, c2),
                      json.dumps(r.su.to_json(c1, c2))])
    _emit(a, data, text)
    return EXIT_OK


def cmd_paths(a) -> int:
    u = _read(a.file)
    f = _function(u, a.fn)
    paths = get_all_paths(f, _config(a), u)
    doc = json.loads(paths_json(f, paths))
    if a.dump_paths:
        with open(a.dump_paths, "w") as fh:
            json.dump({"schema": SCHEMA, **doc}, fh, indent=2)
    text = "\n".join(f"{'R' if p.recursive else ' '} {p}" for p in paths)
    _emit(a, doc, text)
    return EXIT_OK


def cmd_basecase(a) -> int:
    u = _read(a.file)
    f = _function(u, a.fn)
    config = _config(a)
    su = _load_su(a.su) if a.su else NO_UNROLLING
    tree = su.side(a.side)
    side = Side(f, SourceUnit(tuple(g for g in u.functions if g.name != f.name), u.externs))
    info = base_case_info(side, side, SyncUnrolling(tree, tree), config)
    data = {"function": f.name, "rho": str(info.rho1), "bcpc": str(info.bcpc1)}
    _emit(a, data, f"rho:  {info.rho1}\nbcpc: {info.bcpc1}")
    return EXIT_OK


def _ranges(specs: Sequence[str], arity: int):
    if not specs:
        return None
    out = []
    for s in specs:
        lo, sep, hi = s.partition(":")
        try:
            out.append((int(lo), int(hi)))
        except ValueError:
            raise UsageError(f"range must look like lo:hi, got {s!r}")
    if len(out) == 1 and arity > 1:
        out *= arity
    if len(out) != arity:
        raise UsageError(f"{len(out)} ranges for {arity} parameters")
    return tuple(out)


def cmd_oracle(a) -> int:
    u = _read(a.file)
    if a.action == "eval":
        f = _function(u, a.names[0])
        try:
            args = [int(x) for x in a.names[1:]]
        except ValueError:
            raise UsageError("arguments must be integers")
        if len(args) != f.arity:
            raise UsageError(f"{f.name} takes {f.arity} arguments")
        interp = Interpreter(u, a.width)
        r = interp.run(f.name, args, fuel=a.fuel, trace=True)
        trace = interp.trace
        data = {"result": type(r).__name__, "value": r.value if isinstance(r, Value) else None}
        if a.trace:
            data["trace"] = [{"depth": t.depth, "name": t.name, "args": list(t.args)} for t in trace]
        text = str(r.value) if isinstance(r, Value) else type(r).__name__
        if a.trace:
            text += "\n" + "\n".join("  " * t.depth + f"{t.name}({', '.join(map(str, t.args))})"
                                     for t in trace)
        _emit(a, data, text)
        return EXIT_OK
    if len(a.names) != 2:
        raise UsageError("oracle check needs two function names")
    f1, f2 = _function(u, a.names[0]), _function(u, a.names[1])
    if f1.arity != f2.arity:
        raise UsageError("arity mismatch")
    d = DomainSpec(_ranges(a.range, f1.arity), a.fuel, a.width)
    r = brute_force_equiv(f1, f2, d, u, u)
    if isinstance(r, Witness):
        data = {"verdict": "Witness", "input": list(r.input), "v1": r.v1, "v2": r.v2}
        _emit(a, data, f"disagree at {list(r.input)}: {r.v1} != {r.v2}")
        return EXIT_REFUTED
    kind = "FuelLimited" if isinstance(r, FuelLimited) else "EquivalentOnDomain"
    data = {"verdict": kind, "checked": r.checked, "fuel_limited": len(r.fuel_limited)}
    _emit(a, data, f"{kind}: {r.checked} inputs agree, {len(r.fuel_limited)} out of fuel")
    assert isinstance(r, EquivalentOnDomain)
    return EXIT_OK


def cmd_emit_smt(a) -> int:
    from .backend.encode import encode
    from .backend.smtlib import emit_smtlib
    from .backend.solve import Formula
    from .transforms import MAIN
    u1 = _read(a.files[0])
    u2 = _read(a.files[1]) if len(a.files) > 1 else u1
    n1, n2 = _pair(a.pair)
    s1, s2 = separate(Side(_function(u1, n1)), Side(_function(u2, n2)))
    config = _config(a)
    unit = step_task(s1, s2, NO_UNROLLING, [])
    enc = encode(unit, MAIN, unit.function(MAIN).params, config.width, None, config.step_bound)
    text = emit_smtlib(Formula.of(*enc.violation(), var_order=s1.f.params,
                                  label=f"part-eq {n1}/{n2}"))
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_corpus(a) -> int:
    config = _config(a)
    rows = []
    for case in cases.CASES:
        u = cases.corpus_unit(case.source)
        t = time.monotonic()
        report = prove_programs(u, u, PairMapping((case.pair,)), config)
        v = report.pairs[0].outcome.verdict
        rows.append({"source": case.source, "pair": list(case.pair), "tag": case.tag,
                     "expected": case.expected(), "got": _short(v), "ok": cases.matches(case, v),
                     "seconds": round(time.monotonic() - t, 2)})
    ok = sum(r["ok"] for r in rows)
    table = [("case", "expected", "got", "time", "")]
    for r in rows:
        table.append((f"{r['source']} {r['pair'][0]}/{r['pair'][1]}", r["expected"], r["got"],
                      f"{r['seconds']:.1f}s", "ok" if r["ok"] else "MISMATCH"))
    widths = [max(len(x[i]) for x in table) for i in range(5)]
    text = "\n".join("  ".join(c.ljust(w) for c, w in zip(x, widths)).rstrip() for x in table)
    text += f"\n{ok}/{len(rows)} expected verdicts"
    _emit(a, {"cases": rows, "matched": ok, "total": len(rows)}, text)
    return EXIT_OK if ok == len(rows) else EXIT_UNPROVEN


def _short(v) -> str:
    reason = getattr(v, "reason", None)
    return f"{type(v).__name__}({reason})" if reason else type(v).__name__


# -- entry point ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="recveq", description="Partial equivalence of recursive functions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, fn, help):
        c = sub.add_parser(name, help=help)
        c.set_defaults(handler=fn)
        c.add_argument("--json", action="store_true")
        _config_flags(c)
        return c

    c = command("prove", cmd_prove, "prove pairs of functions equivalent")
    c.add_argument("files", nargs="+", help="one source file, or two (left and right program)")
    c.add_argument("--pair", action="append", required=True, metavar="F1:F2")
    c.add_argument("--su-file", help="use this unrolling instead of searching")
    c.add_argument("-v", "--verbose", action="store_true")

    c = command("sync", cmd_sync, "search a synchronizing unrolling")
    c.add_argument("files", nargs="+")
    c.add_argument("--pair", required=True, metavar="F1:F2")

    c = command("paths", cmd_paths, "list the top-frame paths of a function")
    c.add_argument("file")
    c.add_argument("--fn", required=True)
    c.add_argument("--dump-paths", metavar="FILE")

    c = command("basecase", cmd_basecase, "natural and unrolled base-case preconditions")
    c.add_argument("file")
    c.add_argument("--fn", required=True)
    c.add_argument("--su", help="unrolling file as written by sync --json")
    c.add_argument("--side", type=int, choices=(1, 2), default=1)

    c = command("oracle", cmd_oracle, "brute-force check or evaluate")
    c.add_argument("action", choices=("check", "eval"))
    c.add_argument("file")
    c.add_argument("names", nargs="+", help="check: F1 F2; eval: F ARGS...")
    c.add_argument("--range", action="append", metavar="LO:HI")
    c.add_argument("--trace", action="store_true")

    c = command("emit-smt", cmd_emit_smt, "write the shared-UF equivalence query as SMT-LIB")
    c.add_argument("files", nargs="+")
    c.add_argument("--pair", required=True, metavar="F1:F2")
    c.add_argument("--out")

    command("corpus", cmd_corpus, "run the bundled corpus against expected verdicts")
    return p


def _attach_negative(argv: Sequence[str]) -> List[str]:
    """``--range -8:12`` -> ``--range=-8:12`` so argparse does not read an option."""
    out = []
    it = iter(argv)
    for x in it:
        if x == "--range":
            v = next(it, None)
            out.append(x if v is None else f"{x}={v}")
        else:
            out.append(x)
    return out


def main(argv: Optional[List[str]] = None) -> int:
    try:
        a = build_parser().parse_args(_attach_negative(sys.argv[1:] if argv is None else argv))
        return a.handler(a)
    except UsageError as exc:
        print(f"recveq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RecveqError as exc:
        print(f"recveq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

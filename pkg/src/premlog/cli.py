"""Command-line front end: ``premlog run|certify|explain|bench``.

Exit codes:
  0  success
  1  other error (missing files, bad arguments, evaluation errors)
  3  parse error (program or fact files)
  4  analysis error (stratification, safety, rewriting, invalid program)
  5  iteration cap exceeded
  6  certification violation (``--certify`` and ``certify`` only)
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import corpus
from .analysis import inline_condition_rules, safety_check
from .engine.evaluate import DEFAULT_CAP, eval_constrained, eval_seminaive
from .engine.foreign import registry_for
from .errors import (
    AnalysisError,
    CapExceeded,
    FactFileError,
    ParseError,
    PremlogError,
    ProgramError,
    RewriteError,
)
from .facts import _cell
from .pipeline import MODES, load_program, parse_value, prepare, pushed_form, rewrite_diff, run_query
from .prem.certify import certify_program
from .syntax import format_rule, tuple_sort_key

EXIT_OK, EXIT_OTHER, EXIT_PARSE, EXIT_ANALYSIS, EXIT_CAP, EXIT_VIOLATION = 0, 1, 3, 4, 5, 6


def exit_code_for(exc):
    if isinstance(exc, (ParseError, FactFileError)):
        return EXIT_PARSE
    if isinstance(exc, (AnalysisError, ProgramError, RewriteError)):
        return EXIT_ANALYSIS
    if isinstance(exc, CapExceeded):
        return EXIT_CAP
    return EXIT_OTHER


def default_cap():
    value = os.environ.get("PREMLOG_CAP")
    return int(value) if value else DEFAULT_CAP


def resolve_program(text):
    """A program path, a case directory, or the name of a corpus case."""
    path = Path(text)
    if path.is_dir():
        path = path / "program.dl"
    if not path.exists() and text in corpus.CASES:
        path = corpus.case_dir(text) / "program.dl"
    if not path.exists():
        raise FileNotFoundError(f"no such program: {text}")
    return path


def parse_consts(items):
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ValueError(f"--const expects NAME=VALUE, got {item!r}")
        out[name.strip()] = parse_value(value)
    return out


def format_tsv(pred, tuples):
    rows = sorted(tuples, key=tuple_sort_key)
    return "".join("\t".join([pred] + [_cell(v) for v in t]) + "\n" for t in rows)


def _json_value(v):
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    if isinstance(v, float) and v != v:
        return None
    return v


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", encoding="utf-8") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


def _load(args):
    path = resolve_program(args.program)
    program, edb = load_program(path, args.facts)
    return program, edb


def _dump(obj, fh):
    fh.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_run(args):
    program, edb = _load(args)
    consts = parse_consts(args.const)
    try:
        res = run_query(program, args.query, args.mode, edb, args.cap, consts)
    except CapExceeded as exc:
        stats = exc.stats.to_json() if exc.stats is not None else None
        print(json.dumps({"v": 1, "error": "cap exceeded", "message": str(exc), "stats": stats}),
              file=sys.stderr)
        return EXIT_CAP
    print(json.dumps({"v": 1, "stats": res.stats.to_json(), "log": res.prepared.log}), file=sys.stderr)
    rel = res.relation
    with _Output(args.output) as fh:
        if args.format == "json":
            rows = [[_json_value(v) for v in t] for t in rel.sorted()]
            _dump({"v": 1, "predicate": rel.pred, "rows": rows, "stats": res.stats.to_json()}, fh)
        else:
            fh.write(format_tsv(rel.pred, rel.tuples))
    if args.certify:
        report = _certify(program, edb, consts, args.cap)
        print(json.dumps(report.to_json()), file=sys.stderr)
        if not report.ok:
            return EXIT_VIOLATION
    return EXIT_OK


def _certify(program, edb, consts, cap):
    p = pushed_form(program, consts)
    return certify_program(p, foreign=registry_for(p, consts), cap=cap, edb=edb)


def cmd_certify(args):
    program, edb = _load(args)
    consts = parse_consts(args.const)
    report = _certify(program, edb, consts, args.cap)
    with _Output(args.output) as fh:
        _dump(report.to_json(), fh)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def explain(program, mode="auto", query=None, consts=None):
    """Analysis report as a JSON-ready dict; no evaluation."""
    prep = prepare(program, mode, query, consts)
    sp = prep.sp
    strata = [
        {
            "index": st.index,
            "predicates": list(st.predicates),
            "recursive": st.recursive,
            "pushed": st.pushed,
            "exit_rules": [format_rule(r) for r in st.exit_rules],
            "recursive_rules": [format_rule(r) for r in st.recursive_rules],
        }
        for st in sp.strata
    ]
    classes = [
        {"rule": format_rule(r), "gamma": str(g), **c.to_json()} for r, g, c in prep.classes
    ]
    bottom_up = safety_check(inline_condition_rules(prep.original))
    return {
        "v": 1,
        "mode": mode,
        "query": None if prep.query is None else str(prep.query),
        "strata": strata,
        "sccs": [list(st.predicates) for st in sp.strata],
        "classes": classes,
        "selections": prep.selections,
        "demand": {k: list(v) for k, v in prep.demand.items()},
        "safety": {"bottom_up": bottom_up, "evaluated": safety_check(prep.program)},
        "rewrite_diff": rewrite_diff(prep),
        "log": prep.log,
    }


def cmd_explain(args):
    program, _ = _load(args)
    report = explain(program, args.mode, args.query, parse_consts(args.const))
    with _Output(args.output) as fh:
        _dump(report, fh)
    return EXIT_OK


def bench_rows(program, edb, name, cap=DEFAULT_CAP, consts=None):
    """One row per mode: stratified semi-naive versus pushed constrained."""
    rows = []
    for mode in ("stratified", "pushed"):
        prep = prepare(program, mode, None, consts)
        evaluate = eval_seminaive if mode == "stratified" else eval_constrained
        foreign = registry_for(prep.program, consts)
        try:
            _, stats = evaluate(prep.sp, edb, cap=cap, foreign=foreign)
            status = "ok"
        except CapExceeded as exc:
            stats, status = exc.stats, "CapExceeded"
        rows.append({
            "case": name,
            "mode": mode,
            "status": status,
            "iterations": stats.iterations if stats else None,
            "derivations": stats.derivations_attempted if stats else None,
            "wall_time": round(stats.wall_time, 6) if stats else None,
        })
    return rows


def cmd_bench(args):
    targets = args.program or [c for c in corpus.GRAPH_CASES]
    consts = parse_consts(args.const)
    rows = []
    for target in targets:
        path = resolve_program(target)
        program, edb = load_program(path, args.facts)
        name = target if target in corpus.CASES else str(path)
        rows += bench_rows(program, edb, name, args.cap, consts)
    with _Output(args.output) as fh:
        if args.format == "json":
            _dump({"v": 1, "rows": rows}, fh)
        else:
            cols = ["case", "mode", "status", "iterations", "derivations", "wall_time"]
            fh.write("\t".join(cols) + "\n")
            for r in rows:
                fh.write("\t".join("" if r[c] is None else str(r[c]) for c in cols) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="premlog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, many=False):
        if many:
            p.add_argument("program", nargs="*", help="program files, case dirs or corpus case names")
        else:
            p.add_argument("program", help="program file, case dir or corpus case name")
        p.add_argument("--facts", help="fact directory (default: the program's directory)")
        p.add_argument("--cap", type=int, default=default_cap(), help="iteration cap per stratum")
        p.add_argument("--const", action="append", metavar="NAME=VALUE", help="override a .const value")
        p.add_argument("--output", help="write results to this file instead of stdout")

    p = sub.add_parser("run", help="evaluate a query")
    common(p)
    p.add_argument("--query", help="query atom, e.g. 'num(9, N)' (default: the program's ?- query)")
    p.add_argument("--mode", choices=MODES, default="auto")
    p.add_argument("--certify", action="store_true", help="also certify the pushed form")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", help="check pre-mappability on every reached interpretation")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("explain", help="show strata, rule classes and rewrites")
    common(p)
    p.add_argument("--query")
    p.add_argument("--mode", choices=MODES, default="auto")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="compare stratified and pushed evaluation")
    common(p, many=True)
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PremlogError as exc:
        print(f"premlog: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except (OSError, ValueError) as exc:
        print(f"premlog: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())

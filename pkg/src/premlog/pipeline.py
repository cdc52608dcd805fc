"""End-to-end query pipeline: analyze, rewrite, evaluate, select."""
from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .analysis import (
    analyze,
    apply_config,
    check_program,
    inline_condition_rules,
    safety_check,
)
from .engine.evaluate import DEFAULT_CAP, eval_constrained, eval_seminaive
from .engine.foreign import registry_for
from .engine.relation import Interpretation, Relation
from .errors import NotPushable, NotRadical, UnsafeRule
from .facts import load_fact_dir
from .parser import parse_atom, parse_program
from .prem.classify import classify_stratum
from .prem.rewrite import demand_rewrite, push_aggregate, push_constant, pushable_rules
from .syntax import Atom, Const, Program, Var, format_rule

MODES = ("stratified", "pushed", "auto")
_INT = re.compile(r"[+-]?\d+\Z")


def parse_value(text):
    """Interpret a command-line constant: int, float, else a symbol."""
    text = text.strip()
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def load_program(path, facts_dir=None):
    """Read a ``.dl`` file and its fact directory (defaults to the file's directory)."""
    path = Path(path)
    program = parse_program(path.read_text(encoding="utf-8"))
    directory = Path(facts_dir) if facts_dir is not None else path.parent
    return program, load_fact_dir(program, directory)


@dataclass
class Prepared:
    original: object
    program: object
    sp: object
    mode: str
    query: Atom | None
    log: list = field(default_factory=list)
    classes: list = field(default_factory=list)  # (rule, gamma, PremClass)
    pushed: list = field(default_factory=list)  # aggregate rules pushed
    selections: list = field(default_factory=list)
    demand: dict = field(default_factory=dict)


def prepare(program, mode="auto", query=None, config=None) -> Prepared:
    """Turn a parsed program into the form that will be evaluated.

    ``auto`` pushes an upper-stratum extremum into recursion only when the
    classifier proves every rule of the resulting stratum PreM; ``pushed``
    pushes whatever is structurally pushable; ``stratified`` never pushes and
    evaluates aggregates written inside recursion after their stratum
    converges.  Bound query arguments are pushed as constants when that is
    radical and through a demand rewrite otherwise.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(query, str):
        query = parse_atom(query)
    p = apply_config(program, config)
    if query is not None:
        query = apply_config(Program(query=query, config=p.config)).query
    query = query or p.query
    if query is not None:
        p = replace(p, query=query)
    check_program(p)
    prep = Prepared(original=p, program=p, sp=None, mode=mode, query=query)
    log = prep.log

    # aggregate pushdown
    if mode != "stratified":
        for agg_rule in pushable_rules(analyze(p)):
            try:
                candidate = push_aggregate(analyze(p), agg_rule)
            except NotPushable as exc:
                log.append(f"not pushed: {exc}")
                continue
            new_rule = next(r for r in candidate.rules if r.head.pred == agg_rule.body[0].pred)
            csp = analyze(candidate)
            classes = classify_stratum(csp, csp.stratum_of(new_rule.head.pred), candidate)
            ok = all(c.is_full for _, _, c in classes)
            if mode == "auto" and not ok:
                log.append(f"kept stratified: {format_rule(agg_rule)} (PreM not established)")
                prep.classes.extend(classes)
                continue
            p = candidate
            prep.pushed.append(agg_rule)
            log.append(f"pushed: {format_rule(agg_rule)}")
    sp = analyze(p)
    for st in sp.pushed_strata:
        seen = {id(r) for r, _, _ in prep.classes}
        prep.classes.extend(c for c in classify_stratum(sp, st, p) if id(c[0]) not in seen)

    p = inline_condition_rules(p)

    # bound query arguments
    demand = {}
    if query is not None:
        bound = [(i, a.value) for i, a in enumerate(query.args) if isinstance(a, Const)]
        needs_demand = False
        for i, value in bound:
            before = p
            try:
                p = push_constant(p, (query.pred, i, value))
            except NotRadical as exc:
                log.append(f"constant not pushed: {exc}")
                needs_demand = True
                continue
            prep.selections.append(_selection_record(before, p, query.pred, i, value))
        if needs_demand:
            p = demand_rewrite(p, query)
            demand[query.pred] = tuple(i for i, _ in bound)
            log.append(f"demand rewrite for {query}")
    prep.demand = demand

    violations = safety_check(p)
    if violations:
        raise UnsafeRule("; ".join(violations))
    prep.program = p
    prep.sp = analyze(p)
    log.extend(p.notes)
    return prep


def _selection_record(before, after, pred, index, value):
    """Which rules a constant push specialized, per predicate."""
    old = {format_rule(r) for r in before.rules}
    new = {format_rule(r) for r in after.rules}
    sp = analyze(after)
    changed = [format_rule(r) for r in after.rules if format_rule(r) not in old]
    untouched_recursive = []
    for st in sp.strata:
        if st.recursive:
            untouched_recursive += [format_rule(r) for r in st.recursive_rules if format_rule(r) in old]
    return {
        "predicate": pred,
        "index": index,
        "value": value,
        "verdict": "radical",
        "specialized": changed,
        "removed": sorted(old - new),
        "recursive_unchanged": untouched_recursive,
    }


def rewrite_diff(prep: Prepared):
    before = [format_rule(r) for r in prep.original.rules]
    after = [format_rule(r) for r in prep.program.rules]
    return list(difflib.unified_diff(before, after, "original", "rewritten", lineterm="", n=0))


@dataclass
class QueryResult:
    relation: Relation
    db: Interpretation
    stats: object
    prepared: Prepared


def _matches(query, t):
    seen = {}
    for a, v in zip(query.args, t):
        if isinstance(a, Const):
            if a.value != v:
                return False
        elif isinstance(a, Var) and not a.name.startswith("_"):
            if seen.setdefault(a.name, v) != v:
                return False
    return True


def select(query, db):
    rel = db.get(query.pred)
    tuples = [] if rel is None else [t for t in rel.tuples if _matches(query, t)]
    return Relation(query.pred, query.arity, tuples)


def run_query(program, query=None, mode="auto", edb=None, cap=DEFAULT_CAP, config=None, foreign=None):
    """Prepare and evaluate; returns a :class:`QueryResult`."""
    prep = prepare(program, mode, query, config)
    if foreign is None:
        foreign = registry_for(prep.program, config)
    evaluate = eval_seminaive if mode == "stratified" else eval_constrained
    db, stats = evaluate(prep.sp, edb, cap=cap, foreign=foreign)
    q = prep.query
    if q is None:
        rel = Relation("", 0)
    else:
        rel = select(q, db)
    return QueryResult(rel, db, stats, prep)


def eval_query(p, query=None, mode="auto", edb=None, cap=DEFAULT_CAP, config=None, foreign=None) -> Relation:
    """Answers to ``query`` (an Atom or text) over program ``p``."""
    return run_query(p, query, mode, edb, cap, config, foreign).relation


def pushed_form(program, config=None):
    """The program as it will be evaluated in pushed mode (for certification)."""
    return prepare(program, "pushed", None, config).program


"""Bottom-up evaluation: naive, semi-naive and aggregate-constrained fixpoints."""
from __future__ import annotations

import operator
import time
from dataclasses import asdict, dataclass, field

from ..analysis import analyze
from ..errors import CapExceeded, EvaluationError
from ..syntax import AggregateSpec, Atom, Program
from .compile import compile_rule
from .foreign import check_foreign
from .relation import Interpretation, Relation

DEFAULT_CAP = 10_000


@dataclass
class FixpointStats:
    iterations: int = 0
    derivations_attempted: int = 0
    tuples_retained: int = 0
    wall_time: float = 0.0
    strata: list = field(default_factory=list)

    def stratum_for(self, pred):
        for s in self.strata:
            if pred in s["predicates"]:
                return s
        return None

    def to_json(self):
        d = asdict(self)
        d["v"] = 1
        return d


# ---------------------------------------------------------------------------
# aggregate operators


def _better(kind):
    return operator.lt if kind == "min" else operator.gt


def apply_gamma(spec: AggregateSpec, tuples):
    """Keep, per group, every tuple attaining the group extremum."""
    pick = min if spec.kind == "min" else max
    groups = {}
    for t in tuples:
        groups.setdefault(tuple(t[c] for c in spec.groupby_cols), []).append(t)
    out = set()
    for ts in groups.values():
        best = pick(t[spec.value_col] for t in ts)
        out.update(t for t in ts if t[spec.value_col] == best)
    return out


def apply_count(spec: AggregateSpec, tuples):
    groups = {}
    for t in tuples:
        groups.setdefault(tuple(t[c] for c in spec.groupby_cols), set()).add(t)
    out = set()
    for key, ts in groups.items():
        row = [None] * (len(spec.groupby_cols) + 1)
        for c, v in zip(spec.groupby_cols, key):
            row[c] = v
        row[spec.value_col] = len(ts)
        out.add(tuple(row))
    return out


def apply_gamma_interp(specs, interp: Interpretation) -> Interpretation:
    """γ applied to every constrained predicate of ``interp`` (others copied)."""
    out = Interpretation()
    for pred, rel in interp.items():
        spec = specs.get(pred)
        if spec is not None and spec.is_extremum:
            out[pred] = Relation(pred, rel.arity, apply_gamma(spec, rel.tuples))
        else:
            out[pred] = rel.copy()
    return out


class _GroupIndex:
    """Per-group current extremum and the tuples attaining it."""

    def __init__(self, spec, rel):
        self.spec = spec
        self.better = _better(spec.kind)
        self.groups = {}
        for t in apply_gamma(spec, rel.tuples) if len(rel) else ():
            self._slot(t)[1].add(t)
        # relation must hold exactly the group extrema
        for t in list(rel.tuples):
            key = self.key(t)
            if t not in self.groups[key][1]:
                rel.discard(t)

    def key(self, t):
        return tuple(t[c] for c in self.spec.groupby_cols)

    def _slot(self, t):
        key = self.key(t)
        slot = self.groups.get(key)
        if slot is None:
            slot = self.groups[key] = [t[self.spec.value_col], set()]
        return slot

    def admit(self, rel, cands):
        vc = self.spec.value_col
        pick = min if self.spec.kind == "min" else max
        by_group = {}
        for t in cands:
            if t not in rel.tuples:
                by_group.setdefault(self.key(t), []).append(t)
        delta = set()
        for key, ts in by_group.items():
            best = pick(t[vc] for t in ts)
            slot = self.groups.get(key)
            if slot is None or self.better(best, slot[0]):
                if slot is not None:
                    for old in slot[1]:
                        rel.discard(old)
                new = {t for t in ts if t[vc] == best}
                self.groups[key] = [best, new]
            elif best == slot[0]:
                new = {t for t in ts if t[vc] == best}
                slot[1] |= new
            else:
                continue
            for t in new:
                rel.add(t)
            delta |= new
        return delta


# ---------------------------------------------------------------------------
# evaluator


class Evaluator:
    """Evaluates a stratified program stratum by stratum.

    ``strategy`` is ``"naive"`` or ``"seminaive"``.  With ``constrain=True``
    predicates carrying an extremum aggregate inside a recursive stratum are
    maintained through a group index (only improving or tying tuples are
    admitted); with ``constrain=False`` such strata are evaluated without the
    aggregate and the extremum is applied once the stratum is final, which is
    the stratified baseline.
    """

    def __init__(self, sp, foreign=None, cap=DEFAULT_CAP, strategy="seminaive", constrain=True):
        if isinstance(sp, Program):
            sp = analyze(sp)
        if strategy not in ("naive", "seminaive"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.sp = sp
        self.program = sp.program
        self.foreign = dict(foreign or {})
        check_foreign(self.program, self.foreign)
        self.modes = {f.name: f.modes for f in self.program.foreign}
        self.cap = cap
        self.strategy = strategy
        self.constrain = constrain
        self.arities = self.program.arities()
        self._plans = {}
        self.stats = FixpointStats()

    # -- helpers ---------------------------------------------------------------
    def plan(self, rule, delta=None):
        key = (rule, delta)
        p = self._plans.get(key)
        if p is None:
            p = self._plans[key] = compile_rule(rule, self.modes, delta)
        return p

    def fcall_for(self, db):
        def fcall(name, inputs):
            fp = self.foreign.get(name)
            if fp is None:
                raise EvaluationError(f"foreign predicate {name} is not registered")
            return fp.call(inputs, db)

        return fcall

    def _rel(self, db, pred):
        return db.relation(pred, self.arities.get(pred, 0))

    def fire(self, rule, db, out, delta_pos=None, deltas=None, members=()):
        """Run one rule (variant) and append head tuples to ``out``."""
        srcs = []
        for i, lit in enumerate(rule.body):
            if isinstance(lit, Atom) and lit.pred not in self.modes:
                rel = self._rel(db, lit.pred)
                if delta_pos is None or lit.negated or lit.pred not in members:
                    srcs.append((rel, None))
                elif i == delta_pos:
                    srcs.append((deltas[lit.pred], None))
                elif i < delta_pos:
                    srcs.append((rel, deltas[lit.pred].tuples))
                else:
                    srcs.append((rel, None))
            else:
                srcs.append(None)
        before = len(out)
        self.plan(rule, delta_pos).run(srcs, out.append, self.fcall_for(db))
        return len(out) - before

    # -- main loop -------------------------------------------------------------
    def run(self, edb=None):
        t0 = time.perf_counter()
        db = Interpretation()
        for pred, rel in (edb or {}).items():
            db[pred] = rel.copy()
        for fact in self.program.facts:
            self._rel(db, fact.pred).add(tuple(a.value for a in fact.args))
        try:
            for st in self.sp.strata:
                self._run_stratum(st, db)
        except CapExceeded as exc:
            self._finish(db, t0)
            exc.partial, exc.stats = db, self.stats
            raise
        self._finish(db, t0)
        return db, self.stats

    def _finish(self, db, t0):
        idb = self.program.idb_predicates()
        self.stats.tuples_retained = sum(len(r) for p, r in db.items() if p in idb)
        self.stats.wall_time = time.perf_counter() - t0

    def _run_stratum(self, st, db):
        members = set(st.predicates)
        for pred in st.predicates:
            self._rel(db, pred)
        record = {"index": st.index, "predicates": list(st.predicates), "iterations": 0, "derivations": 0}
        self.stats.strata.append(record)
        constrained = st.constrained if (self.constrain or not st.recursive) else {}
        groups = {p: _GroupIndex(s, db[p]) for p, s in constrained.items()}

        def admit(cands):
            delta = {}
            for pred, ts in cands.items():
                rel = db[pred]
                if pred in groups:
                    new = groups[pred].admit(rel, ts)
                else:
                    new = {t for t in ts if rel.add(t)}
                if new:
                    delta[pred] = new
            return delta

        def tick(n_derivations):
            record["iterations"] += 1
            record["derivations"] += n_derivations
            self.stats.iterations += 1
            self.stats.derivations_attempted += n_derivations
            if record["iterations"] > self.cap:
                raise CapExceeded(
                    f"stratum {st.index} ({', '.join(st.predicates)}) exceeded {self.cap} iterations"
                )

        counts = {p: s for p, s in st.specs.items() if s.kind == "count"}
        if counts:
            cands = {p: [] for p in st.predicates}
            n = sum(self.fire(r, db, cands[r.head.pred]) for r in st.rules)
            tick(n)
            for pred, ts in cands.items():
                spec = counts.get(pred)
                for t in apply_count(spec, ts) if spec else ts:
                    db[pred].add(t)
            return

        if not st.recursive:
            cands = {p: [] for p in st.predicates}
            n = sum(self.fire(r, db, cands[r.head.pred]) for r in st.rules)
            tick(n)
            admit(cands)
            return

        # first round: every rule over the full (initial) relations
        cands = {p: [] for p in st.predicates}
        n = sum(self.fire(r, db, cands[r.head.pred]) for r in st.rules)
        tick(n)
        delta = admit(cands)
        while delta:
            cands = {p: [] for p in st.predicates}
            n = 0
            if self.strategy == "naive":
                for r in st.rules:
                    n += self.fire(r, db, cands[r.head.pred])
            else:
                drels = {
                    p: Relation(p, db[p].arity, delta.get(p, ())) for p in st.predicates
                }
                for r in st.recursive_rules:
                    for i, lit in enumerate(r.body):
                        if (
                            isinstance(lit, Atom)
                            and not lit.negated
                            and lit.pred in members
                            and lit.pred in delta
                        ):
                            n += self.fire(r, db, cands[r.head.pred], i, drels, members)
            tick(n)
            delta = admit(cands)

        if not self.constrain:
            for pred, spec in st.constrained.items():
                rel = db[pred]
                keep = apply_gamma(spec, rel.tuples)
                for t in list(rel.tuples):
                    if t not in keep:
                        rel.discard(t)


# ---------------------------------------------------------------------------
# public entry points


def _sp(p):
    return analyze(p) if isinstance(p, Program) else p


def eval_stratified(sp, edb=None, cap=DEFAULT_CAP, foreign=None):
    """Naive iterated fixpoint per stratum (aggregates after their input is final)."""
    return Evaluator(_sp(sp), foreign, cap, "naive", constrain=False).run(edb)


def eval_seminaive(sp, edb=None, cap=DEFAULT_CAP, foreign=None):
    """Semi-naive counterpart of :func:`eval_stratified`; same final model."""
    return Evaluator(_sp(sp), foreign, cap, "seminaive", constrain=False).run(edb)


def eval_constrained(sp, edb=None, cap=DEFAULT_CAP, foreign=None, method="seminaive"):
    """Fixpoint with extremum aggregates enforced inside recursion.

    ``method`` is ``"seminaive"`` (default) or ``"naive"``.
    """
    if method not in ("seminaive", "naive"):
        raise ValueError(f"unknown method {method!r}")
    return Evaluator(_sp(sp), foreign, cap, method, constrain=True).run(edb)


def consequences(rules, db, foreign=None, modes=None, arities=None):
    """One-step consequences of ``rules`` over ``db`` (not inflationary)."""
    out = {}
    ev = _RuleRunner(foreign, modes, arities)
    for r in rules:
        buf = []
        ev.fire(r, db, buf)
        out.setdefault(r.head.pred, set()).update(buf)
    return out


def apply_T(rules, db, foreign=None, modes=None, arities=None) -> Interpretation:
    """Immediate consequence step: ``db`` plus the one-step consequences of ``rules``."""
    result = db.copy()
    for pred, ts in consequences(rules, db, foreign, modes, arities).items():
        arity = len(next(iter(ts))) if ts else (arities or {}).get(pred, 0)
        rel = result.relation(pred, arity)
        for t in ts:
            rel.add(t)
    return result


class _RuleRunner:
    """Minimal rule firing without a stratified program (used by apply_T)."""

    _cache = {}

    def __init__(self, foreign=None, modes=None, arities=None):
        self.foreign = foreign or {}
        self.modes = modes if modes is not None else {n: f.modes for n, f in self.foreign.items()}
        self.arities = arities or {}

    def fire(self, rule, db, out):
        srcs = []
        for lit in rule.body:
            if isinstance(lit, Atom) and lit.pred not in self.modes:
                rel = db.get(lit.pred)
                if rel is None:
                    rel = Relation(lit.pred, lit.arity)
                srcs.append((rel, None))
            else:
                srcs.append(None)
        key = (rule, tuple(sorted(self.modes.items())))
        plan = self._cache.get(key)
        if plan is None:
            plan = self._cache[key] = compile_rule(rule, self.modes)
        foreign = self.foreign

        def fcall(name, inputs):
            return foreign[name].call(inputs, db)

        plan.run(srcs, out.append, fcall)

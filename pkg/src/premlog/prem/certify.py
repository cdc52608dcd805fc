"""Runtime certification of the PreM identities on reached interpretations.

For every pushed stratum the certifier replays the constrained fixpoint one
naive step at a time.  At each reached interpretation I it computes T(I) and
T(γ(I)) over the stratum's recursive rules and records whether

* full:      γ(T(I)) = γ(T(γ(I)))
* intrinsic: T(I) = T(γ(I))        (compared on the rules' new consequences)
* radical:   γ(T(I)) = T(γ(I))

holds.  This checks the executions that actually happen, not every
interpretation; reports say so explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..analysis import analyze
from ..engine.evaluate import (
    DEFAULT_CAP,
    apply_gamma,
    apply_T,
    consequences,
    eval_constrained,
    eval_seminaive,
)
from ..engine.relation import Interpretation, Relation
from ..errors import CapExceeded
from ..syntax import format_value, tuple_sort_key

SCOPE = "reached interpretations"


@dataclass
class CertificationReport:
    per_iteration: list = field(default_factory=list)
    end_to_end: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    scope: str = SCOPE

    @property
    def violations(self):
        return [r for r in self.per_iteration if not r["full_ok"]]

    @property
    def ok(self):
        return not self.violations

    @property
    def first_witness(self):
        for r in self.per_iteration:
            if r["witness"] is not None:
                return r["witness"]
        return None

    def to_json(self):
        return {
            "v": 1,
            "scope": self.scope,
            "per_iteration": [
                {**r, "witness": _witness_json(r["witness"])} for r in self.per_iteration
            ],
            "end_to_end": dict(self.end_to_end),
            "notes": list(self.notes),
        }


def _witness_json(w):
    if w is None:
        return None
    pred, t = w
    return {"pred": pred, "args": [_jsonable(v) for v in t], "text": f"{pred}({', '.join(format_value(v) for v in t)})"}


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def _gamma(specs, interp, members):
    out = Interpretation()
    for pred, rel in interp.items():
        spec = specs.get(pred)
        if pred in members and spec is not None and spec.is_extremum:
            out[pred] = Relation(pred, rel.arity, apply_gamma(spec, rel.tuples))
        else:
            out[pred] = rel
    return out


def _facts(interp, members):
    return {(p, t) for p in members if p in interp for t in interp[p].tuples}


def _smallest(diff):
    if not diff:
        return None
    return min(diff, key=lambda pt: (pt[0], tuple_sort_key(pt[1])))


def certify_step(rules, specs, I, members=None, foreign=None, modes=None, arities=None):
    """Check the three identities at interpretation ``I``.

    ``specs`` maps constrained predicates to their AggregateSpec (a single
    ConstraintGamma is accepted too).  Returns a dict with ``full_ok``,
    ``intrinsic_ok``, ``radical_ok`` and ``witness``: the smallest
    ``(pred, tuple)`` in the symmetric difference of the full check.
    """
    if hasattr(specs, "predicate"):
        specs = {specs.predicate: specs.spec}
    if members is None:
        members = {r.head.pred for r in rules} | set(specs)
    members = set(members)
    gI = _gamma(specs, I, members)
    TI = apply_T(rules, I, foreign, modes, arities)
    TgI = apply_T(rules, gI, foreign, modes, arities)
    g_TI = _facts(_gamma(specs, TI, members), members)
    g_TgI = _facts(_gamma(specs, TgI, members), members)
    full_diff = g_TI ^ g_TgI
    cI = consequences(rules, I, foreign, modes, arities)
    cgI = consequences(rules, gI, foreign, modes, arities)
    c1 = {(p, t) for p, ts in cI.items() if p in members for t in ts}
    c2 = {(p, t) for p, ts in cgI.items() if p in members for t in ts}
    return {
        "full_ok": not full_diff,
        "intrinsic_ok": c1 == c2,
        "radical_ok": g_TI == _facts(TgI, members),
        "witness": _smallest(full_diff),
    }


def certify_program(p, foreign=None, cap=DEFAULT_CAP, baseline=True, baseline_cap=None, edb=None):
    """Certify every pushed stratum of ``p`` and compare with the stratified baseline.

    ``p`` must already be in pushed form (aggregates inside recursion).
    """
    sp = analyze(p)
    report = CertificationReport()
    pushed = sp.pushed_strata
    if not pushed:
        report.notes.append("no aggregate inside recursion: nothing to certify")
        report.end_to_end = {"baseline_terminated": None, "equal": None}
        return report
    foreign = foreign or {}
    modes = {f.name: f.modes for f in p.foreign}
    arities = p.arities()
    constrained_db, _ = eval_constrained(sp, edb, cap=cap, foreign=foreign)

    for st in pushed:
        members = set(st.predicates)
        later = {q for s in sp.strata if s.index >= st.index for q in s.predicates}
        J = Interpretation({q: r.copy() for q, r in constrained_db.items() if q not in later})
        for q in st.predicates:
            J.relation(q, arities.get(q, 0))
        specs = st.constrained
        for k in range(cap + 1):
            if k == cap:
                report.notes.append(f"stratum {st.index}: certification stopped at the cap of {cap} steps")
                break
            I = apply_T(st.rules, J, foreign, modes, arities)
            rec = certify_step(st.recursive_rules, specs, I, members, foreign, modes, arities)
            rec = {"stratum": st.index, "iter": k, **rec}
            report.per_iteration.append(rec)
            nxt = _gamma(specs, I, members)
            if _facts(nxt, members) == _facts(J, members):
                break
            J = Interpretation({q: r.copy() for q, r in nxt.items()})

    report.end_to_end = {"baseline_terminated": None, "equal": None}
    if baseline:
        try:
            base_db, _ = eval_seminaive(sp, edb, cap=baseline_cap or cap, foreign=foreign)
        except CapExceeded as exc:
            report.end_to_end = {"baseline_terminated": False, "equal": None}
            report.notes.append(f"baseline did not terminate: {exc}")
        else:
            idb = p.idb_predicates()
            equal = all(base_db.tuples(q) == constrained_db.tuples(q) for q in sorted(idb))
            report.end_to_end = {"baseline_terminated": True, "equal": equal}
            if equal and not report.ok:
                report.notes.append(
                    "final results coincide although the identity failed on a reached "
                    "interpretation; distinct fixpoints can agree on a given input"
                )
    return report

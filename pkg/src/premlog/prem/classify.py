"""Static PreM classification of recursive rules.

The analysis is deliberately narrow: it reasons about polynomial arithmetic
chains with sign facts taken from column declarations, and about comparison
filters that are closed in the direction the constraint prunes.  Anything it
cannot establish comes back as ``unknown``.
"""
from __future__ import annotations

from ..analysis import condition_predicates, inline_condition_rules
from ..syntax import Atom, Comparison, Program, Var
from .gamma import ConstraintGamma, PremClass, Selection
from .monotone import (
    definitions,
    depends_on,
    is_definition,
    is_nonneg,
    is_nonpos,
    monotonicity,
    normalize_comparison,
    poly_key,
    poly_sign,
    poly_sub,
    to_poly,
    variable_signs,
)


def rule_alternatives(rule, program=None):
    """The rule with condition predicates expanded into one body per alternative."""
    if program is None:
        return [rule]
    conds = condition_predicates(program)
    used = {l.pred for l in rule.body if isinstance(l, Atom) and l.pred in conds}
    if not used:
        return [rule]
    # pull in the condition rules reachable from this rule
    todo, seen = list(used), set()
    while todo:
        c = todo.pop()
        if c in seen:
            continue
        seen.add(c)
        for r in program.rules_for(c):
            todo.extend(l.pred for l in r.body if isinstance(l, Atom) and l.pred in conds)
    mini = Program(
        rules=(rule,) + tuple(r for r in program.rules if r.head.pred in seen),
        decls=program.decls,
    )
    return [r for r in inline_condition_rules(mini).rules if r.head.pred == rule.head.pred]


class _Alt:
    """One expanded body analysed against the constrained body atoms."""

    def __init__(self, rule, constrained, decls):
        self.rule = rule
        self.body = rule.body
        atom_bound = set()
        for lit in self.body:
            if isinstance(lit, Atom) and not lit.negated:
                atom_bound |= {a.name for a in lit.args if isinstance(a, Var)}
        self.defs = definitions(self.body, atom_bound)
        self.signs = variable_signs(self.body, decls)
        # constrained atoms: (index, atom, spec)
        self.catoms = [
            (i, l, constrained[l.pred])
            for i, l in enumerate(self.body)
            if isinstance(l, Atom) and not l.negated and l.pred in constrained
        ]

    def filters(self):
        return [
            l for l in self.body
            if isinstance(l, Comparison) and not is_definition(l, self.defs)
        ]


def _sensitive(atom, spec):
    """(value var, companion vars) of a constrained body atom, or None if not plain."""
    value = atom.args[spec.value_col]
    if not isinstance(value, Var):
        return None
    comps = []
    for c in spec.companion_cols:
        a = atom.args[c]
        if not isinstance(a, Var):
            return None
        comps.append(a.name)
    names = [value.name] + comps
    if len(set(names)) != len(names):
        return None
    group = {a.name for c, a in enumerate(atom.args) if c in spec.groupby_cols and isinstance(a, Var)}
    if group & set(names):
        return None
    return value.name, tuple(comps)


def _closed(poly_op, v, kind, signs):
    """True when ``poly op 0`` surviving at v also survives at a better v."""
    poly, op = poly_op
    if op not in (">", ">="):
        return False
    slope = monotonicity(poly, v, signs)
    # better means smaller for min: need poly nonincreasing in v
    return is_nonpos(slope) if kind == "min" else is_nonneg(slope)


class _Checker:
    def __init__(self, rule, gamma, constrained, program):
        self.rule = rule
        self.gamma = gamma
        self.constrained = constrained
        self.program = program
        self.decls = program.decl_map if program is not None else {}
        self.evidence = []

    def note(self, msg):
        self.evidence.append(msg)

    def run(self):
        alts = [_Alt(r, self.constrained, self.decls) for r in rule_alternatives(self.rule, self.program)]
        if len(alts) > 1:
            self.note(f"condition predicates expand the rule into {len(alts)} alternatives")
        if not any(a.catoms for a in alts):
            self.note("the body reads no constrained predicate, so constraining the input changes nothing")
            return PremClass("intrinsic", tuple(self.evidence))
        head_spec = self.constrained.get(self.rule.head.pred)
        if head_spec is not None and not head_spec.is_extremum:
            head_spec = None
        verdicts = []
        for alt in alts:
            v = self.check_alt(alt, alts, head_spec)
            if v is None:
                return PremClass("unknown", tuple(self.evidence))
            verdicts.append(v)
        verdict = "intrinsic" if all(v == "intrinsic" for v in verdicts) else "full"
        return PremClass(verdict, tuple(self.evidence))

    # -- per alternative -----------------------------------------------------
    def check_alt(self, alt, alts, head_spec):
        result = "intrinsic"
        for idx, atom, spec in alt.catoms:
            sens = _sensitive(atom, spec)
            if sens is None:
                self.note(f"{atom}: aggregated or companion argument is not a distinct variable")
                return None
            value, comps = sens
            names = {value, *comps}
            # sensitive variables may only flow into arithmetic and filters
            for j, lit in enumerate(alt.body):
                if j == idx or not isinstance(lit, Atom):
                    continue
                clash = {a.name for a in lit.args if isinstance(a, Var)} & names
                if clash:
                    self.note(f"{', '.join(sorted(clash))} of {atom} also used by {lit}")
                    return None
            verdict = self.check_atom(alt, alts, atom, spec, value, comps, head_spec)
            if verdict is None:
                return None
            if verdict == "full":
                result = "full"
        return result

    def head_dependence(self, alt, names, head_spec):
        """(head value term, whether it depends on ``names``, rejection reason)."""
        head = self.rule.head
        for c, a in enumerate(head.args):
            if head_spec is not None and c == head_spec.value_col:
                continue
            if isinstance(a, Var) and depends_on(a, names, alt.defs):
                return None, True, f"head argument {a} depends on {', '.join(sorted(names))}"
        if head_spec is None:
            return None, False, None
        term = head.args[head_spec.value_col]
        return term, depends_on(term, names, alt.defs), None

    def check_atom(self, alt, alts, atom, spec, value, comps, head_spec):
        names = {value, *comps}
        kind = spec.kind
        term, dep, why = self.head_dependence(alt, names, head_spec)
        if why:
            self.note(why)
            return None
        if head_spec is not None and dep and head_spec.kind != kind:
            self.note(f"head constraint {head_spec.kind} does not match body constraint {kind}")
            return None
        if not self.filters_ok(alt, alts, atom, value, comps, kind, allow_cover=not dep):
            return None
        if not dep:
            self.note(f"head of the rule does not depend on {value} of {atom}")
            return "intrinsic"
        # head value depends on the constrained input: monotone chain required
        if comps and depends_on(term, set(comps), alt.defs):
            self.note(f"head value depends on companion arguments of {atom}")
            return None
        poly = to_poly(term, alt.defs)
        if poly is None:
            self.note(f"head value {term} is not a polynomial in its inputs")
            return None
        signs = dict(alt.signs)
        slope = monotonicity(poly, value, signs)
        good = is_nonneg(slope)
        if not good:
            self.note(f"head value {_show(poly)} is not provably nondecreasing in {value} (derivative sign {slope})")
            return None
        gap = poly_sign(poly_sub(poly, {(value,): 1}), signs)
        ok_gap = is_nonneg(gap) if kind == "min" else is_nonpos(gap)
        if not ok_gap:
            self.note(
                f"cannot show {_show(poly)} - {value} is {'>= 0' if kind == 'min' else '<= 0'}; "
                "declare sign constraints on the contributing columns"
            )
            return None
        self.note(
            f"head value {_show(poly)} is nondecreasing in {value} and never "
            f"{'below' if kind == 'min' else 'above'} it, so every input violating the "
            f"{kind} constraint yields a head value violating it too"
        )
        return "full"

    def filters_ok(self, alt, alts, atom, value, comps, kind, allow_cover):
        names = {value, *comps}
        touching = [
            lit for lit in alt.filters()
            if depends_on(lit.left, names, alt.defs) or depends_on(lit.right, names, alt.defs)
        ]
        if allow_cover and touching:
            lit = self.covering_literal(alt, alts, touching, value, names, kind)
            if lit is not None:
                self.note(
                    f"alternative with {', '.join(str(l) for l in touching)} is covered by a "
                    f"sibling alternative holding the strict form of {lit}"
                )
                return True
        for lit in touching:
            norm = normalize_comparison(lit, alt.defs)
            uses_comp = depends_on(lit.left, set(comps), alt.defs) or depends_on(lit.right, set(comps), alt.defs)
            if norm is not None and not uses_comp and _closed(norm, value, kind, alt.signs):
                continue
            self.note(f"filter {lit} is not closed under improving {value}")
            return False
        return True

    def covering_literal(self, alt, alts, touching, value, names, kind):
        """Find an equality/non-strict filter whose strict form a sibling holds.

        For a filter ``E = v`` (or ``E >= v`` under min), every strictly better
        input v' satisfies ``E > v'``.  When a sibling alternative consists of
        this alternative's input-independent literals plus that strict filter,
        the better input reproduces every head tuple this alternative derives
        from a worse one, whatever the other input-dependent filters say.
        """
        rest = {_lit_key(l, alt.defs) for l in alt.body if l not in touching}
        for lit in touching:
            for side_v, other, op in ((lit.right, lit.left, lit.op), (lit.left, lit.right, _flip(lit.op))):
                if not (isinstance(side_v, Var) and side_v.name == value):
                    continue
                if depends_on(other, names, alt.defs):
                    continue
                # lit reads: other op v
                if kind == "min" and op in ("=", ">="):
                    want = Comparison(">", other, side_v)
                elif kind == "max" and op in ("=", "<="):
                    want = Comparison("<", other, side_v)
                else:
                    continue
                key = _lit_key(want, alt.defs)
                for sib in alts:
                    if sib is alt:
                        continue
                    sib_keys = {_lit_key(l, sib.defs) for l in sib.body}
                    if key in sib_keys and (sib_keys - {key}) <= rest:
                        return lit
        return None


def _flip(op):
    return {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}[op]


def _lit_key(lit, defs):
    if isinstance(lit, Comparison):
        norm = normalize_comparison(lit, defs)
        if norm is not None:
            return ("cmp", poly_key(norm[0]), norm[1])
        return ("raw", str(lit))
    return ("atom", str(lit))


def _show(poly):
    if not poly:
        return "0"
    parts = []
    for m, c in sorted(poly.items(), key=lambda kv: (len(kv[0]), kv[0])):
        mon = "*".join(m)
        if not m:
            parts.append(f"{c}")
        elif c == 1:
            parts.append(mon)
        elif c == -1:
            parts.append(f"-{mon}")
        else:
            parts.append(f"{c}*{mon}")
    return " + ".join(parts).replace("+ -", "- ")


def classify_prem(rule, gamma, program=None, constrained=None) -> PremClass:
    """Classify ``rule`` against ``gamma``.

    ``constrained`` maps every constrained predicate of the stratum to its
    spec (defaults to just ``gamma``); ``program`` supplies column
    declarations and condition predicates.
    """
    if isinstance(gamma, Selection):
        return classify_selection(rule, gamma)
    if constrained is None:
        constrained = {gamma.predicate: gamma.spec}
    return _Checker(rule, gamma, constrained, program).run()


def classify_selection(rule, sel: Selection) -> PremClass:
    """A constant selection commutes with T when the position is copied unchanged."""
    head_arg = rule.head.args[sel.index] if sel.index < rule.head.arity else None
    rec = [l for l in rule.body if isinstance(l, Atom) and l.pred == sel.predicate and not l.negated]
    if rule.head.pred != sel.predicate:
        return PremClass("unknown", (f"rule does not define {sel.predicate}",))
    if not rec:
        return PremClass("radical", ("exit rule: the selection applies directly to its output",))
    if not isinstance(head_arg, Var):
        return PremClass("unknown", (f"head position {sel.index} is not a variable",))
    for atom in rec:
        if atom.args[sel.index] != head_arg:
            return PremClass(
                "unknown",
                (f"position {sel.index} changes between {atom} and the head",),
            )
    return PremClass(
        "radical",
        (f"position {sel.index} of {sel.predicate} is copied unchanged through the recursion",),
    )


def classify_stratum(sp, stratum, program=None):
    """PremClass for every rule of a pushed stratum, keyed by rule."""
    program = program or sp.program
    constrained = stratum.constrained
    out = []
    for r in stratum.rules:
        pred = r.head.pred
        spec = constrained.get(pred)
        if spec is None:
            # unconstrained head reading constrained predicates
            reads = [l.pred for l in r.body if isinstance(l, Atom) and l.pred in constrained]
            target = reads[0] if reads else None
            if target is None:
                out.append((r, None, PremClass("intrinsic", ("the body reads no constrained predicate",))))
                continue
            gamma = ConstraintGamma(target, constrained[target])
        else:
            gamma = ConstraintGamma(pred, spec)
        out.append((r, gamma, classify_prem(r, gamma, program, constrained)))
    return out

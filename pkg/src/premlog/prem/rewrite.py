"""Program rewrites: aggregate pushdown, constant pushdown, demand, negation."""
from __future__ import annotations

from dataclasses import replace

from ..analysis import StratifiedProgram, analyze
from ..errors import DemandNotDerivable, NotPushable, NotRadical
from ..syntax import AggregateSpec, Atom, Comparison, Const, Program, Rule, Var, expr_vars, substitute
from .classify import classify_selection
from .gamma import Selection
from .monotone import definitions, poly_sign, poly_sub, to_poly, variable_signs

# ---------------------------------------------------------------------------
# aggregate pushdown


def pushable_rules(sp: StratifiedProgram):
    """Aggregate rules sitting above a recursive stratum (r1.3 shape)."""
    out = []
    for st in sp.strata:
        if st.recursive:
            continue
        for r in st.rules:
            if r.agg is None or not r.agg.is_extremum:
                continue
            atoms = [l for l in r.body if isinstance(l, Atom)]
            if len(atoms) == 1:
                src = sp.stratum_of(atoms[0].pred)
                if src is not None and src.recursive:
                    out.append(r)
    return out


def pushed_spec(agg_rule: Rule, body_arity=None) -> AggregateSpec:
    """The spec an aggregate rule induces on its (single) body atom."""
    spec = agg_rule.agg
    if spec is None or not spec.is_extremum:
        raise NotPushable(f"{agg_rule}: only min/max aggregates can be pushed")
    if len(agg_rule.body) != 1 or not isinstance(agg_rule.body[0], Atom) or agg_rule.body[0].negated:
        raise NotPushable(f"{agg_rule}: body must be a single positive atom")
    atom = agg_rule.body[0]
    pos = {}
    for i, a in enumerate(atom.args):
        if not isinstance(a, Var) or a.name in pos:
            raise NotPushable(f"{agg_rule}: body arguments must be distinct variables")
        pos[a.name] = i
    head = agg_rule.head
    for a in head.args:
        if not isinstance(a, Var) or a.name not in pos:
            raise NotPushable(f"{agg_rule}: head argument {a} is not a body variable")
    value = pos[head.args[spec.value_col].name]
    groups = {pos[head.args[c].name] for c in spec.groupby_cols}
    if value in groups:
        raise NotPushable(f"{agg_rule}: aggregated variable also groups")
    companions = [i for i in range(atom.arity) if i != value and i not in groups]
    return AggregateSpec.build(spec.kind, value, atom.arity, companions)


def push_aggregate(sp, agg_rule: Rule) -> Program:
    """Copy the extremum of ``agg_rule`` onto the recursive predicate it reads."""
    if isinstance(sp, Program):
        sp = analyze(sp)
    p = sp.program
    if agg_rule not in p.rules:
        raise NotPushable(f"{agg_rule} is not a rule of the program")
    spec = pushed_spec(agg_rule)
    target = agg_rule.body[0].pred
    st = sp.stratum_of(target)
    if st is None or not st.recursive:
        raise NotPushable(f"{target} is not a recursive predicate")
    if target in st.specs:
        raise NotPushable(f"{target} already carries an aggregate")
    members = set(st.predicates)
    for r in p.rules:
        if r is agg_rule or r.head.pred in members:
            continue
        if any(isinstance(l, Atom) and l.pred == target for l in r.body):
            raise NotPushable(f"{target} is also read by {r}; constraining it would change that rule")
    if p.query is not None and p.query.pred == target:
        raise NotPushable(f"the query reads {target} directly")
    rules = []
    for r in p.rules:
        if r is agg_rule:
            rules.append(Rule(r.head, r.body, None))
        elif r.head.pred == target:
            rules.append(Rule(r.head, r.body, spec))
        else:
            rules.append(r)
    return p.with_rules(
        rules,
        note=f"pushed {spec.kind} from {agg_rule.head.pred} into recursive {target}",
    )


# ---------------------------------------------------------------------------
# constant pushdown (r-PreM)


def _consumers(p, pred):
    return [r for r in p.rules if any(isinstance(l, Atom) and l.pred == pred for l in r.body)]


def _specialize(rule, index, value):
    """Rule restricted to head[index] == value, or None when it cannot match."""
    a = rule.head.args[index]
    if isinstance(a, Const):
        return rule if a.value == value else None
    return substitute(rule, {a.name: Const(value)})


def push_constant(p: Program, binding, _via=None) -> Program:
    """Push the selection ``pred[index] = value`` as far down as it commutes.

    Raises NotRadical when ``pred`` is recursive and the position changes
    inside the recursion (use :func:`demand_rewrite` instead).
    """
    pred, index, value = binding
    sp = analyze(p)
    st = sp.stratum_of(pred)
    if st is None:
        return p  # EDB: the selection is applied when the relation is read
    members = set(st.predicates)
    outside = [r for r in _consumers(p, pred) if r.head.pred not in members and r.head.pred != _via]
    if outside:
        raise NotRadical(f"{pred} is also read by {outside[0]}; a selection on it would leak")
    if st.recursive:
        if len(st.predicates) != 1:
            raise NotRadical(f"{pred} is mutually recursive; constant pushing needs a single-predicate cycle")
        sel = Selection(pred, index, value)
        for r in st.recursive_rules:
            verdict = classify_selection(r, sel)
            if verdict.verdict != "radical":
                raise NotRadical(f"{pred}[{index}] is modified inside recursion: {verdict.evidence[0]}")
        new_rules = []
        for r in p.rules:
            if r in st.exit_rules:
                s = _specialize(r, index, value)
                if s is not None:
                    new_rules.append(s)
            else:
                new_rules.append(r)
        return p.with_rules(
            new_rules,
            note=f"r-PreM: {pred}[{index}] = {value!r} pushed into exit rules only "
            "(the position is copied unchanged through the recursion)",
        )
    # non-recursive: specialize each defining rule, then continue into a
    # single-consumer body predicate through a copied variable
    out_rules = []
    follow = []
    for r in p.rules:
        if r.head.pred != pred:
            out_rules.append(r)
            continue
        if r.agg is not None and index not in r.agg.groupby_cols:
            out_rules.append(r)  # selecting an aggregated column does not commute
            continue
        s = _specialize(r, index, value)
        if s is None:
            continue
        out_rules.append(s)
        head_arg = r.head.args[index]
        if isinstance(head_arg, Var):
            for lit in r.body:
                if isinstance(lit, Atom) and not lit.negated and lit.pred in p.idb_predicates():
                    for j, a in enumerate(lit.args):
                        if a == head_arg:
                            follow.append((lit.pred, j))
    q = p.with_rules(out_rules, note=f"selection {pred}[{index}] = {value!r} applied to its rules")
    for child, j in dict.fromkeys(follow):
        if q.query is not None and q.query.pred == child:
            continue
        try:
            q = push_constant(q, (child, j, value), _via=pred)
        except NotRadical:
            pass  # the selection stays where it is, which is still correct
    return q


# ---------------------------------------------------------------------------
# demand rewrite


def demand_rewrite(p: Program, query: Atom | None = None) -> Program:
    """Restrict bottom-up evaluation of a recursive predicate to demanded bindings."""
    query = query or p.query
    if query is None:
        return p
    bound = [i for i, a in enumerate(query.args) if isinstance(a, Const)]
    if not bound:
        return p
    pred = query.pred
    sp = analyze(p)
    st = sp.stratum_of(pred)
    if st is None or not st.recursive:
        return p
    if len(st.predicates) != 1:
        raise DemandNotDerivable(f"{pred} is mutually recursive")
    spec = st.specs.get(pred)
    if spec is not None and spec.value_col in bound:
        raise DemandNotDerivable(f"{pred}: the aggregated column cannot be demanded")
    arity = len(query.args)
    adorn = "".join("b" if i in bound else "f" for i in range(arity))
    dname = f"d_{pred}_{adorn}"
    cols = p.decl_map.get(pred)
    seed = Atom(dname, tuple(query.args[i] for i in bound))

    new_rules, prop_rules = [], []
    for r in p.rules:
        if r.head.pred != pred:
            new_rules.append(r)
            continue
        guard = Atom(dname, tuple(r.head.args[i] for i in bound))
        new_rules.append(Rule(r.head, (guard,) + r.body, r.agg))
        for k, lit in enumerate(r.body):
            if isinstance(lit, Atom) and lit.pred == pred and not lit.negated:
                prop_rules.append(_propagation_rule(p, r, lit, guard, bound, dname, cols))
    rules = new_rules + prop_rules
    facts = p.facts + (seed,)
    out = replace(p, facts=facts).with_rules(
        rules,
        note=f"demand rewrite: {dname} seeded with {seed}; {len(prop_rules)} propagation rule(s)",
    )
    return out


def _propagation_rule(p, rule, call, guard, bound, dname, cols):
    """``d(child) <- d(parent), <non-recursive literals computing child>``."""
    pred = rule.head.pred
    avail = {a.name for a in guard.args if isinstance(a, Var)}
    lits = []
    rest = [l for l in rule.body if not (isinstance(l, Atom) and l.pred == pred)]
    # finite positive atoms first, then builtins as they become computable
    for l in rest:
        if isinstance(l, Atom) and not l.negated and l.pred not in p.foreign_map:
            lits.append(l)
            avail |= {a.name for a in l.args if isinstance(a, Var)}
    changed = True
    pending = [l for l in rest if l not in lits]
    while changed:
        changed = False
        for l in list(pending):
            if isinstance(l, Comparison):
                lv, rv = set(expr_vars(l.left)), set(expr_vars(l.right))
                ok = (lv | rv) <= avail
                if not ok and l.op == "=":
                    if isinstance(l.left, Var) and rv <= avail:
                        ok = True
                    elif isinstance(l.right, Var) and lv <= avail:
                        ok = True
                if ok:
                    lits.append(l)
                    avail |= lv | rv
                    pending.remove(l)
                    changed = True
            elif isinstance(l, Atom) and l.negated and {a.name for a in l.args if isinstance(a, Var)} <= avail:
                lits.append(l)
                pending.remove(l)
                changed = True
    child = []
    guards = []
    atom_bound = set()
    for l in lits:
        if isinstance(l, Atom) and not l.negated:
            atom_bound |= {a.name for a in l.args if isinstance(a, Var)}
    defs = definitions(lits, atom_bound)
    signs = variable_signs(lits, p.decl_map)
    for i in bound:
        t = call.args[i]
        if isinstance(t, Var) and t.name not in avail:
            raise DemandNotDerivable(f"{rule}: demanded argument {t} of {call} is not computable from bound variables")
        child.append(t)
        parent = rule.head.args[i]
        g = _finiteness_guard(t, parent, defs, signs, atom_bound, cols[i] if cols else None, rule)
        if g is not None:
            guards.append(g)
    head = Atom(dname, tuple(child))
    return Rule(head, (guard,) + tuple(lits) + tuple(guards))


def _finiteness_guard(child, parent, defs, signs, atom_bound, col, rule):
    """None if the child binding is trivially finite, else a bounding literal.

    Raises DemandNotDerivable when the closure cannot be shown finite.
    """
    if isinstance(child, Const) or child == parent:
        return None
    if isinstance(child, Var) and child.name in atom_bound:
        return None  # drawn from a finite relation
    cp = to_poly(child, defs)
    pp = to_poly(parent, defs)
    if cp is not None and pp is not None:
        step = poly_sub(pp, cp)  # parent - child
        step_vars = {v for m in step for v in m}
        finite_steps = step_vars <= atom_bound
        s = poly_sign(step, signs)
        if finite_steps and s == "pos" and col is not None and col.op in (">", ">="):
            return Comparison(col.op, child, Const(col.bound))
        if finite_steps and s == "neg" and col is not None and col.op in ("<", "<="):
            return Comparison(col.op, child, Const(col.bound))
        if s in ("pos", "neg"):
            raise DemandNotDerivable(
                f"{rule}: demanded argument {child} moves strictly but the column has no "
                f"declared {'lower' if s == 'pos' else 'upper'} bound, so the demand closure may be infinite"
            )
    raise DemandNotDerivable(
        f"{rule}: cannot show the demand closure of {child} is finite"
    )


# ---------------------------------------------------------------------------
# negation rewrite (reference semantics of extremum aggregates)


def negation_rewrite(source: str, spec: AggregateSpec, arity: int, result: str = "best", better: str = "better"):
    """Rules defining ``result`` as the extremum tuples of ``source`` via negation.

    ``result(X..) <- source(X..), !better(G.., V).`` and
    ``better(G.., V) <- source(X..), source(X'..), V' < V.`` (``>`` for max),
    where G are the group-by columns and companions are fresh in each atom.
    """
    xs = [Var(f"A{i}") for i in range(arity)]
    ys = [xs[i] if i in spec.groupby_cols else Var(f"B{i}") for i in range(arity)]
    group = [xs[i] for i in spec.groupby_cols]
    v, w = xs[spec.value_col], ys[spec.value_col]
    key = tuple(group) + (v,)
    op = "<" if spec.kind == "min" else ">"
    r1 = Rule(Atom(result, tuple(xs)), (Atom(source, tuple(xs)), Atom(better, key, negated=True)))
    r2 = Rule(
        Atom(better, key),
        (Atom(source, tuple(xs)), Atom(source, tuple(ys)), Comparison(op, w, v)),
    )
    return [r1, r2]

"""Dependency graph, SCCs, stratification, condition inlining and safety."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import count, product

from .errors import InliningCycle, NotStratifiable, ProgramError
from .syntax import (
    Atom,
    Comparison,
    Const,
    Program,
    Rule,
    Var,
    expr_vars,
    literal_vars,
    substitute,
)

POSITIVE, NEGATIVE, AGGREGATED = "positive", "negative", "aggregated"


@dataclass(frozen=True)
class PredicateGraph:
    nodes: frozenset
    edges: frozenset  # (from, to, polarity)

    def successors(self, node):
        return sorted({b for a, b, _ in self.edges if a == node})


@dataclass
class Stratum:
    index: int
    predicates: tuple
    recursive: bool
    exit_rules: list = field(default_factory=list)
    recursive_rules: list = field(default_factory=list)
    pushed: bool = False
    specs: dict = field(default_factory=dict)  # pred -> AggregateSpec

    @property
    def rules(self):
        return self.exit_rules + self.recursive_rules

    @property
    def constrained(self):
        return {p: s for p, s in self.specs.items() if s.is_extremum}


@dataclass
class StratifiedProgram:
    program: Program
    graph: PredicateGraph
    strata: list
    agg_in_recursion: list = field(default_factory=list)  # (stratum, rule, spec)

    def stratum_of(self, pred):
        for s in self.strata:
            if pred in s.predicates:
                return s
        return None

    @property
    def pushed_strata(self):
        return [s for s in self.strata if s.pushed]


# ---------------------------------------------------------------------------
# graph


def build_graph(p: Program) -> PredicateGraph:
    foreign = set(p.foreign_map)
    nodes, edges = set(), set()
    for fact in p.facts:
        nodes.add(fact.pred)
    for pred, _ in p.decls:
        if pred not in foreign:
            nodes.add(pred)
    for r in p.rules:
        nodes.add(r.head.pred)
        for lit in r.body:
            if not isinstance(lit, Atom) or lit.pred in foreign:
                continue
            nodes.add(lit.pred)
            if lit.negated:
                pol = NEGATIVE
            elif r.agg is not None:
                pol = AGGREGATED
            else:
                pol = POSITIVE
            edges.add((lit.pred, r.head.pred, pol))
    return PredicateGraph(frozenset(nodes), frozenset(edges))


def tarjan_scc(nodes, successors):
    """Iterative Tarjan; returns SCCs in reverse topological order."""
    index, low, on_stack = {}, {}, set()
    stack, result = [], []
    counter = count()
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = next(counter)
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(successors(succ))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                result.append(tuple(sorted(comp)))
    return result


def predicate_specs(p: Program):
    """Aggregate spec per predicate; all annotated rules must agree."""
    specs = {}
    for r in p.rules:
        if r.agg is None:
            continue
        prev = specs.setdefault(r.head.pred, r.agg)
        if prev != r.agg:
            raise ProgramError(f"conflicting aggregates for {r.head.pred}: {r}")
    for pred, spec in specs.items():
        if spec.kind == "count":
            plain = [r for r in p.rules_for(pred) if r.agg is None]
            if plain:
                raise ProgramError(f"count predicate {pred} also has plain rules: {plain[0]}")
    return specs


def stratify(g: PredicateGraph, p: Program) -> StratifiedProgram:
    idb = p.idb_predicates()
    succ = {n: sorted({b for a, b, _ in g.edges if a == n}) for n in g.nodes}
    sccs = tarjan_scc(sorted(g.nodes), lambda n: succ.get(n, ()))
    comp_of = {}
    for comp in sccs:
        for n in comp:
            comp_of[n] = comp
    specs = predicate_specs(p)

    # Kahn over the condensation, lexicographic tie-break
    idb_comps = [c for c in sccs if any(n in idb for n in c)]
    deps = {c: set() for c in idb_comps}
    for a, b, _ in g.edges:
        ca, cb = comp_of[a], comp_of[b]
        if ca != cb and ca in deps and cb in deps:
            deps[cb].add(ca)
    order = []
    ready = sorted(c for c in idb_comps if not deps[c])
    while ready:
        c = ready.pop(0)
        order.append(c)
        for other in idb_comps:
            if c in deps[other]:
                deps[other].discard(c)
                if not deps[other] and other not in order and other not in ready:
                    ready.append(other)
        ready.sort()

    strata, agg_in_rec = [], []
    for i, comp in enumerate(order):
        members = set(comp)
        internal = [(a, b, pol) for a, b, pol in g.edges if a in members and b in members]
        recursive = len(comp) > 1 or bool(internal)
        pushed = False
        for a, b, pol in sorted(internal):
            if pol == NEGATIVE:
                raise NotStratifiable(f"negation through recursion: {b} depends negatively on {a}")
            if pol == AGGREGATED:
                if specs[b].kind == "count":
                    raise NotStratifiable(f"count aggregate through recursion: {b} <- {a}")
                pushed = True
        st = Stratum(
            index=i,
            predicates=comp,
            recursive=recursive,
            pushed=pushed,
            specs={pr: specs[pr] for pr in comp if pr in specs},
        )
        for r in p.rules:
            if r.head.pred in members:
                st.recursive_rules.append(r)
                if pushed and r.agg is not None:
                    agg_in_rec.append((i, r, r.agg))
        strata.append(st)
    return classify_rules(StratifiedProgram(p, g, strata, agg_in_rec))


def classify_rules(sp: StratifiedProgram) -> StratifiedProgram:
    """Split each stratum's rules into exit and recursive rules."""
    for st in sp.strata:
        members = set(st.predicates)
        rules = st.exit_rules + st.recursive_rules
        rules.sort(key=lambda r: sp.program.rules.index(r))
        st.exit_rules = [r for r in rules if not _touches(r, members)]
        st.recursive_rules = [r for r in rules if _touches(r, members)]
    return sp


def _touches(rule, members):
    return any(isinstance(l, Atom) and l.pred in members for l in rule.body)


def analyze(p: Program) -> StratifiedProgram:
    return stratify(build_graph(p), p)


# ---------------------------------------------------------------------------
# config constants and condition rules


def apply_config(p: Program, overrides=None) -> Program:
    """Substitute ``.const`` values (and overrides) for same-named variables."""
    config = dict(p.config)
    config.update(overrides or {})
    mapping = {k: Const(v) for k, v in config.items()}
    rules = []
    for r in p.rules:
        new = substitute(r, mapping)
        rules.append(new)
    query = substitute(p.query, mapping) if p.query is not None else None
    return replace(p, rules=tuple(rules), query=query, config=tuple(config.items()))


def condition_predicates(p: Program):
    """Predicates defined purely by builtins (possibly via other such predicates)."""
    foreign = set(p.foreign_map)
    edb = {f.pred for f in p.facts} | {d for d, _ in p.decls if d not in p.idb_predicates()}
    cands = {r.head.pred for r in p.rules if r.body and r.agg is None} - edb - foreign
    if p.query is not None:
        cands.discard(p.query.pred)
    for r in p.rules:
        if r.head.pred in cands and (r.agg is not None or not r.body):
            cands.discard(r.head.pred)
    changed = True
    while changed:
        changed = False
        for r in p.rules:
            if r.head.pred not in cands:
                continue
            for lit in r.body:
                if isinstance(lit, Atom) and (lit.negated or lit.pred not in cands):
                    cands.discard(r.head.pred)
                    changed = True
                    break
    return cands


def inline_condition_rules(p: Program) -> Program:
    conds = condition_predicates(p)
    if not conds:
        return p
    # cycle check among condition predicates
    deps = {c: sorted({l.pred for r in p.rules_for(c) for l in r.body if isinstance(l, Atom)}) for c in conds}
    for comp in tarjan_scc(sorted(conds), lambda c: deps[c]):
        if len(comp) > 1 or comp[0] in deps[comp[0]]:
            raise InliningCycle(f"condition rules reference each other cyclically: {', '.join(comp)}")

    fresh = count()
    cache = {}

    def alternatives(pred):
        # list of (params, builtins) with rules renamed apart lazily at use site
        if pred not in cache:
            alts = []
            for r in p.rules_for(pred):
                for body in expand_body(r.body):
                    alts.append((r.head.args, body))
            cache[pred] = alts
        return cache[pred]

    def instantiate(params, body, call_args):
        tag = next(fresh)
        names = set()
        for lit in body:
            names |= literal_vars(lit)
        for a in params:
            if isinstance(a, Var):
                names.add(a.name)
        ren = {n: Var(f"{n}_c{tag}") for n in names}
        params = [substitute(a, ren) for a in params]
        body = [substitute(l, ren) for l in body]
        mapping, extra = {}, []
        for param, arg in zip(params, call_args):
            if isinstance(param, Var) and param.name not in mapping:
                mapping[param.name] = arg
            else:
                extra.append(Comparison("=", substitute(param, mapping), arg))
        return [substitute(l, mapping) for l in body] + extra

    def expand_body(body):
        options = []
        for lit in body:
            if isinstance(lit, Atom) and lit.pred in conds:
                if lit.negated:
                    raise ProgramError(f"negated condition predicate {lit.pred} is not supported")
                options.append([instantiate(ps, b, lit.args) for ps, b in alternatives(lit.pred)])
            else:
                options.append([[lit]])
        for combo in product(*options):
            yield tuple(l for part in combo for l in part)

    rules = []
    for r in p.rules:
        if r.head.pred in conds:
            continue
        if any(isinstance(l, Atom) and l.pred in conds for l in r.body):
            for body in expand_body(r.body):
                rules.append(Rule(r.head, body, r.agg))
        else:
            rules.append(r)
    removed = ", ".join(sorted(conds))
    return p.with_rules(rules, note=f"inlined condition predicates: {removed}")


# ---------------------------------------------------------------------------
# safety


def bound_variables(rule: Rule, foreign_modes=None, seed=()):
    """Variables bindable by positive atoms, arithmetic and foreign calls."""
    foreign_modes = foreign_modes or {}
    bound = set(seed)
    for lit in rule.body:
        if isinstance(lit, Atom) and not lit.negated and lit.pred not in foreign_modes:
            bound |= literal_vars(lit)
    changed = True
    while changed:
        changed = False
        for lit in rule.body:
            if isinstance(lit, Comparison) and lit.op == "=":
                for target, src in ((lit.left, lit.right), (lit.right, lit.left)):
                    if (
                        isinstance(target, Var)
                        and target.name not in bound
                        and set(expr_vars(src)) <= bound
                    ):
                        bound.add(target.name)
                        changed = True
            elif isinstance(lit, Atom) and lit.pred in foreign_modes and not lit.negated:
                modes = foreign_modes[lit.pred]
                ins = {a.name for a, m in zip(lit.args, modes) if m == "+" and isinstance(a, Var)}
                if ins <= bound:
                    outs = {a.name for a in lit.args if isinstance(a, Var)} - bound
                    if outs:
                        bound |= outs
                        changed = True
    return bound


def safety_check(p: Program, demand=None):
    """Return a list of human-readable violations (empty when safe).

    ``demand`` maps predicate -> bound argument positions; head variables at
    those positions count as bound (demand-driven evaluation).
    """
    demand = demand or {}
    modes = {f.name: f.modes for f in p.foreign}
    violations = []
    for r in p.rules:
        seed = {
            r.head.args[i].name
            for i in demand.get(r.head.pred, ())
            if isinstance(r.head.args[i], Var)
        }
        bound = bound_variables(r, modes, seed)
        for v in sorted(literal_vars(r.head) - bound):
            violations.append(f"{r}: head variable {v} is unbound")
        for lit in r.body:
            if isinstance(lit, Atom) and lit.negated:
                for v in sorted(literal_vars(lit) - bound):
                    violations.append(f"{r}: variable {v} in negated {lit.pred} is unbound")
            elif isinstance(lit, Comparison):
                for v in sorted(literal_vars(lit) - bound):
                    violations.append(f"{r}: variable {v} in '{lit}' is unbound")
            elif isinstance(lit, Atom) and lit.pred in modes:
                for a, m in zip(lit.args, modes[lit.pred]):
                    if m == "+" and isinstance(a, Var) and a.name not in bound:
                        violations.append(f"{r}: input {a.name} of foreign {lit.pred} is unbound")
    return violations


def check_program(p: Program):
    """Validate that every referenced predicate is defined somewhere."""
    defined = (
        p.idb_predicates()
        | {f.pred for f in p.facts}
        | {d for d, _ in p.decls}
        | set(p.foreign_map)
    )
    missing = []
    for r in p.rules:
        for lit in r.body:
            if isinstance(lit, Atom) and lit.pred not in defined:
                missing.append(lit.pred)
    if missing:
        raise ProgramError(f"undefined predicates: {', '.join(sorted(set(missing)))}")

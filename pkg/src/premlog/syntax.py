"""Abstract syntax for the Datalog dialect and its canonical printer."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Union

SYMBOL_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")

AGG_KINDS = ("min", "max", "count")
COMPANION_KINDS = ("cmin", "cmax")
KEYWORDS = frozenset(AGG_KINDS + COMPANION_KINDS + ("nil",))
COMPARISON_OPS = ("<", "<=", ">", ">=", "=", "!=")
ARITH_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """A ground value: int, float, str (symbol) or tuple of floats (vector)."""

    value: Any

    def __str__(self):
        return format_value(self.value)


Term = Union[Var, Const]


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"{_expr_operand(self.left, self.op, False)} {self.op} {_expr_operand(self.right, self.op, True)}"


Expr = Union[Var, Const, BinOp]

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _expr_operand(e, parent_op, is_right):
    if isinstance(e, BinOp):
        p, q = _PRECEDENCE[e.op], _PRECEDENCE[parent_op]
        # '^' is right-associative, the others left-associative
        needs = p < q or (p == q and (is_right != (parent_op == "^")))
        if needs:
            return f"({e})"
    return str(e)


@dataclass(frozen=True)
class Comparison:
    """Builtin literal ``left op right``.

    With ``op == '='`` and an unbound variable on one side this acts as an
    arithmetic assignment; otherwise it is a test.
    """

    op: str
    left: Expr
    right: Expr

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()
    negated: bool = False

    @property
    def arity(self):
        return len(self.args)

    def __str__(self):
        neg = "!" if self.negated else ""
        if not self.args:
            return f"{neg}{self.pred}"
        return f"{neg}{self.pred}({', '.join(str(a) for a in self.args)})"


Literal = Union[Atom, Comparison]


@dataclass(frozen=True)
class AggregateSpec:
    kind: str
    value_col: int
    companion_cols: tuple = ()
    groupby_cols: tuple = ()

    def __post_init__(self):
        if self.kind not in AGG_KINDS:
            raise ValueError(f"unknown aggregate kind {self.kind!r}")
        if self.companion_cols and self.kind == "count":
            raise ValueError("companion columns require min or max")
        if self.value_col in self.groupby_cols:
            raise ValueError("value column cannot be a group-by column")
        if set(self.companion_cols) & set(self.groupby_cols):
            raise ValueError("companion and group-by columns overlap")

    @property
    def is_extremum(self):
        return self.kind in ("min", "max")

    @classmethod
    def build(cls, kind, value_col, arity, companion_cols=()):
        companions = tuple(sorted(companion_cols))
        groupby = tuple(i for i in range(arity) if i != value_col and i not in companions)
        return cls(kind, value_col, companions, groupby)


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple = ()
    agg: AggregateSpec | None = None

    def positive_atoms(self):
        return [l for l in self.body if isinstance(l, Atom) and not l.negated]

    def __str__(self):
        return format_rule(self)


@dataclass(frozen=True)
class ColumnType:
    """Declared column type with an optional bound such as ``int >= 0``."""

    name: str
    op: str | None = None
    bound: Any = None

    def __str__(self):
        if self.op is None:
            return self.name
        return f"{self.name} {self.op} {format_value(self.bound)}"


@dataclass(frozen=True)
class ForeignDecl:
    name: str
    params: tuple  # names, as written
    modes: str  # one of '+' / '-' per argument

    def __str__(self):
        args = ", ".join(f"{p}{m}" for p, m in zip(self.params, self.modes))
        return f".foreign {self.name}({args})."


@dataclass(frozen=True)
class Program:
    rules: tuple = ()
    facts: tuple = ()
    query: Atom | None = None
    config: tuple = ()  # ordered (name, value) pairs
    decls: tuple = ()  # ordered (pred, tuple[ColumnType]) pairs
    foreign: tuple = ()  # ForeignDecl
    notes: tuple = field(default=(), compare=False)

    @property
    def config_map(self):
        return dict(self.config)

    @property
    def decl_map(self):
        return dict(self.decls)

    @property
    def foreign_map(self):
        return {f.name: f for f in self.foreign}

    def idb_predicates(self):
        return {r.head.pred for r in self.rules}

    def rules_for(self, pred):
        return [r for r in self.rules if r.head.pred == pred]

    def with_rules(self, rules, note=None):
        notes = self.notes + ((note,) if note else ())
        return replace(self, rules=tuple(rules), notes=notes)

    def arities(self):
        """Map every predicate mentioned to its arity (first occurrence wins)."""
        out = {}
        for pred, cols in self.decls:
            out.setdefault(pred, len(cols))
        for f in self.foreign:
            out.setdefault(f.name, len(f.modes))
        for fact in self.facts:
            out.setdefault(fact.pred, fact.arity)
        for r in self.rules:
            for a in (r.head, *r.body):
                if isinstance(a, Atom):
                    out.setdefault(a.pred, a.arity)
        if self.query is not None:
            out.setdefault(self.query.pred, self.query.arity)
        return out

    def __str__(self):
        return pretty_print(self)


# ---------------------------------------------------------------------------
# formatting


def format_value(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        r = repr(v)
        if r in ("inf", "-inf", "nan"):
            raise ValueError(f"cannot print non-finite number {r}")
        if "." not in r and "e" not in r:
            r += ".0"
        return r
    if isinstance(v, tuple):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, str):
        if SYMBOL_RE.match(v) and v not in KEYWORDS:
            return v
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"unsupported constant {v!r}")


def format_head(rule):
    head, agg = rule.head, rule.agg
    if agg is None:
        return str(head)
    if not head.args:
        return head.pred
    parts = []
    companion_kind = "cmin" if agg.kind == "min" else "cmax"
    for i, a in enumerate(head.args):
        if i == agg.value_col:
            parts.append(f"{agg.kind}<{a}>")
        elif i in agg.companion_cols:
            parts.append(f"{companion_kind}<{a}>")
        else:
            parts.append(str(a))
    return f"{head.pred}({', '.join(parts)})"


def format_rule(rule):
    head = format_head(rule)
    if not rule.body:
        return f"{head}."
    return f"{head} <- {', '.join(str(l) for l in rule.body)}."


def pretty_print(p: Program) -> str:
    """Canonical text of ``p``; parsing it yields an equal Program."""
    lines = []
    for pred, cols in p.decls:
        lines.append(f".decl {pred}({', '.join(str(c) for c in cols)}).")
    for name, value in p.config:
        lines.append(f".const {name} = {format_value(value)}.")
    for f in p.foreign:
        lines.append(str(f))
    for fact in p.facts:
        lines.append(f"{fact}.")
    for r in p.rules:
        lines.append(format_rule(r))
    if p.query is not None:
        lines.append(f"?- {p.query}.")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# traversal helpers


def expr_vars(e) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)


def literal_vars(lit) -> set:
    if isinstance(lit, Atom):
        return {a.name for a in lit.args if isinstance(a, Var)}
    return set(expr_vars(lit.left)) | set(expr_vars(lit.right))


def rule_vars(rule) -> set:
    out = literal_vars(rule.head)
    for lit in rule.body:
        out |= literal_vars(lit)
    return out


def substitute(x, mapping):
    """Replace variables by terms according to ``mapping`` (name -> Term)."""
    if isinstance(x, Var):
        return mapping.get(x.name, x)
    if isinstance(x, Const):
        return x
    if isinstance(x, BinOp):
        return BinOp(x.op, substitute(x.left, mapping), substitute(x.right, mapping))
    if isinstance(x, Comparison):
        return Comparison(x.op, substitute(x.left, mapping), substitute(x.right, mapping))
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(substitute(a, mapping) for a in x.args), x.negated)
    if isinstance(x, Rule):
        return Rule(
            substitute(x.head, mapping),
            tuple(substitute(l, mapping) for l in x.body),
            x.agg,
        )
    raise TypeError(f"cannot substitute into {x!r}")


def value_sort_key(v):
    """Total order over mixed ground values (numbers < symbols < vectors)."""
    if isinstance(v, (int, float)):
        return (0, v, "")
    if isinstance(v, str):
        return (1, 0, v)
    return (2, 0, tuple(v))


def tuple_sort_key(t):
    return tuple(value_sort_key(v) for v in t)

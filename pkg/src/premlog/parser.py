"""Lexer and recursive-descent parser for ``.dl`` program text.

Grammar sketch::

    program   := statement*
    statement := rule | fact | query | directive
    rule      := head '<-' literal (',' literal)* '.'
    head      := pred '(' headarg (',' headarg)* ')' | pred
    headarg   := ('min'|'max'|'count'|'cmin'|'cmax') '<' term '>' | term
    literal   := '!'? atom | expr cmp expr
    query     := '?-' atom '.'
    directive := '.decl' pred '(' type (',' type)* ')' '.'
               | '.const' Name '=' value '.'
               | '.foreign' pred '(' Name ('+'|'-') (',' ...)* ')' '.'
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import count

from .errors import ParseError, ProgramError
from .syntax import (
    AGG_KINDS,
    COMPANION_KINDS,
    COMPARISON_OPS,
    AggregateSpec,
    Atom,
    BinOp,
    ColumnType,
    Comparison,
    Const,
    ForeignDecl,
    Program,
    Rule,
    Var,
)

COLUMN_TYPES = ("sym", "int", "float", "vec")

_TOKEN_SPEC = [
    ("COMMENT", r"%[^\n]*|//[^\n]*"),
    ("WS", r"[ \t\r]+"),
    ("NL", r"\n"),
    ("DIRECTIVE", r"\.(?:decl|const|foreign)\b"),
    ("FLOAT", r"\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+"),
    ("INT", r"\d+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("VAR", r"[A-Z_][A-Za-z0-9_]*"),
    ("SYM", r"[a-z][A-Za-z0-9_]*"),
    ("OP", r"<-|\?-|<=|>=|!=|[<>=+\-*/^!(),.\[\]]"),
    ("BAD", r"."),
]
_MASTER = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, line_start = 1, 0
    for m in _MASTER.finditer(text):
        kind, value = m.lastgroup, m.group()
        col = m.start() - line_start + 1
        if kind == "NL":
            line += 1
            line_start = m.end()
            continue
        if kind in ("WS", "COMMENT"):
            continue
        if kind == "BAD":
            raise ParseError(f"unexpected character {value!r}", line, col)
        tokens.append(Token(kind, value, line, col))
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


def _unquote(s):
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self._fresh = count()

    # -- token helpers -------------------------------------------------------
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def at(self, text):
        return self.tok.kind == "OP" and self.tok.text == text

    def expect(self, text):
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    # -- statements ----------------------------------------------------------
    def parse(self):
        rules, facts, config, decls, foreign = [], [], [], [], []
        query = None
        while self.tok.kind != "EOF":
            t = self.tok
            if t.kind == "DIRECTIVE":
                d = self.directive()
                if isinstance(d, ForeignDecl):
                    foreign.append(d)
                elif d[0] == "const":
                    config.append(d[1:])
                else:
                    decls.append(d[1:])
            elif self.at("?-"):
                self.advance()
                if query is not None:
                    self.error("only one query per program", t)
                query = self.atom()
                self.expect(".")
            else:
                rule = self.rule()
                if not rule.body and rule.agg is None and _is_ground(rule.head):
                    facts.append(rule.head)
                else:
                    rules.append(rule)
        return Program(
            rules=tuple(rules),
            facts=tuple(facts),
            query=query,
            config=tuple(config),
            decls=tuple(decls),
            foreign=tuple(foreign),
        )

    def directive(self):
        t = self.advance()
        kind = t.text[1:]
        if kind == "decl":
            pred = self.symbol()
            self.expect("(")
            cols = [self.column_type()]
            while self.at(","):
                self.advance()
                cols.append(self.column_type())
            self.expect(")")
            self.expect(".")
            return ("decl", pred, tuple(cols))
        if kind == "const":
            if self.tok.kind != "VAR":
                self.error("expected constant name (capitalised)")
            name = self.advance().text
            self.expect("=")
            value = self.constant().value
            self.expect(".")
            return ("const", name, value)
        pred = self.symbol()
        self.expect("(")
        params, modes = [], []
        while True:
            if self.tok.kind not in ("VAR", "SYM"):
                self.error("expected parameter name")
            params.append(self.advance().text)
            if not (self.at("+") or self.at("-")):
                self.error("expected mode '+' or '-'")
            modes.append(self.advance().text)
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        self.expect(".")
        return ForeignDecl(pred, tuple(params), "".join(modes))

    def column_type(self):
        t = self.tok
        if t.kind != "SYM" or t.text not in COLUMN_TYPES:
            self.error(f"expected column type ({', '.join(COLUMN_TYPES)})")
        self.advance()
        if self.tok.kind == "OP" and self.tok.text in ("<", "<=", ">", ">="):
            op = self.advance().text
            bound = self.constant().value
            if not isinstance(bound, (int, float)):
                self.error("column bound must be numeric")
            return ColumnType(t.text, op, bound)
        return ColumnType(t.text)

    def symbol(self):
        if self.tok.kind != "SYM":
            self.error("expected predicate name")
        return self.advance().text

    def rule(self):
        head, agg = self.head()
        body = []
        if self.at("<-"):
            self.advance()
            body.append(self.literal())
            while self.at(","):
                self.advance()
                body.append(self.literal())
        self.expect(".")
        return Rule(head, tuple(body), agg)

    def head(self):
        pred = self.symbol()
        if not self.at("("):
            return Atom(pred), None
        open_tok = self.advance()
        args, value_col, kind, companions = [], None, None, []
        while True:
            t = self.tok
            if t.kind == "SYM" and t.text in AGG_KINDS + COMPANION_KINDS and self.peek().text == "<":
                self.advance()
                self.advance()
                term = self.term()
                self.expect(">")
                if t.text in AGG_KINDS:
                    if value_col is not None:
                        self.error("a head carries at most one aggregate", t)
                    value_col, kind = len(args), t.text
                else:
                    companions.append((len(args), t.text))
                args.append(term)
            else:
                args.append(self.term())
            if self.at(","):
                self.advance()
                continue
            if self.at(")"):
                self.advance()
                break
            self.error("expected ',' or ')'", None if self.tok.kind != "EOF" else open_tok)
        agg = None
        if companions:
            if kind not in ("min", "max"):
                self.error("cmin/cmax need a min or max aggregate in the same head", t)
            want = "cmin" if kind == "min" else "cmax"
            for _, ck in companions:
                if ck != want:
                    self.error(f"{ck} cannot accompany {kind}", t)
        if kind is not None:
            agg = AggregateSpec.build(kind, value_col, len(args), [c for c, _ in companions])
        return Atom(pred, tuple(args)), agg

    def atom(self, negated=False):
        pred = self.symbol()
        args = []
        if self.at("("):
            open_tok = self.advance()
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
            if not self.at(")"):
                self.error("expected ',' or ')' to close argument list", None if self.tok.kind != "EOF" else open_tok)
            self.advance()
        return Atom(pred, tuple(args), negated)

    def literal(self):
        if self.at("!"):
            self.advance()
            return self.atom(negated=True)
        t = self.tok
        if t.kind == "SYM" and t.text not in ("nil",):
            nxt = self.peek()
            if nxt.text in ("(", ",", ".") and nxt.kind == "OP":
                return self.atom()
        left = self.expr()
        if not (self.tok.kind == "OP" and self.tok.text in COMPARISON_OPS):
            self.error("expected comparison operator")
        op = self.advance().text
        right = self.expr()
        return Comparison(op, left, right)

    # -- terms and expressions -------------------------------------------------
    def term(self):
        t = self.tok
        if t.kind == "VAR":
            self.advance()
            if t.text == "_":
                return Var(f"_G{next(self._fresh)}")
            return Var(t.text)
        return self.constant()

    def constant(self):
        t = self.tok
        if self.at("-") and self.peek().kind in ("INT", "FLOAT"):
            self.advance()
            return Const(-self.number().value)
        if t.kind in ("INT", "FLOAT"):
            return self.number()
        if t.kind == "STRING":
            self.advance()
            return Const(_unquote(t.text))
        if t.kind == "SYM":
            if t.text in AGG_KINDS + COMPANION_KINDS and self.peek().text == "<":
                self.error(f"aggregate {t.text!r} only allowed in rule heads")
            self.advance()
            return Const(0 if t.text == "nil" else t.text)
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                items.append(float(self.signed_number()))
                while self.at(","):
                    self.advance()
                    items.append(float(self.signed_number()))
            self.expect("]")
            return Const(tuple(items))
        self.error("expected a term")

    def signed_number(self):
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        v = self.number().value
        return -v if neg else v

    def number(self):
        t = self.advance()
        if t.kind == "INT":
            return Const(int(t.text))
        if t.kind == "FLOAT":
            return Const(float(t.text))
        self.error("expected a number", t)

    def expr(self):
        left = self.mul()
        while self.tok.kind == "OP" and self.tok.text in ("+", "-"):
            op = self.advance().text
            left = BinOp(op, left, self.mul())
        return left

    def mul(self):
        left = self.power()
        while self.tok.kind == "OP" and self.tok.text in ("*", "/"):
            op = self.advance().text
            left = BinOp(op, left, self.power())
        return left

    def power(self):
        base = self.unary()
        if self.at("^"):
            self.advance()
            return BinOp("^", base, self.power())
        return base

    def unary(self):
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("-") and self.peek().kind not in ("INT", "FLOAT"):
            self.advance()
            return BinOp("*", Const(-1), self.unary())
        return self.term()


def _is_ground(atom):
    return all(isinstance(a, Const) for a in atom.args)


def check_arities(p: Program):
    seen = {}

    def note(pred, arity, what):
        prev = seen.setdefault(pred, (arity, what))
        if prev[0] != arity:
            raise ProgramError(
                f"arity conflict for {pred}: {prev[0]} ({prev[1]}) vs {arity} ({what})"
            )

    for pred, cols in p.decls:
        note(pred, len(cols), "declaration")
    for f in p.foreign:
        note(f.name, len(f.modes), "foreign declaration")
    for fact in p.facts:
        note(fact.pred, fact.arity, f"fact {fact}")
    for r in p.rules:
        for a in (r.head, *r.body):
            if isinstance(a, Atom):
                note(a.pred, a.arity, f"rule {r}")
    if p.query is not None:
        note(p.query.pred, p.query.arity, "query")


def parse_program(text: str) -> Program:
    """Parse program text; raises ParseError / ProgramError."""
    program = _Parser(text).parse()
    check_arities(program)
    return program


def parse_atom(text: str) -> Atom:
    """Parse a single atom such as ``num(9, N)`` (trailing '.' optional)."""
    p = _Parser(text.strip().rstrip(".") + ".")
    a = p.atom()
    p.expect(".")
    if p.tok.kind != "EOF":
        p.error("trailing input after atom")
    return a

"""Compile rule bodies into nested-loop Python functions.

A compiled plan is a plain function ``fn(srcs, emit, fcall)``:

* ``srcs[k]`` is ``(Relation, exclude)`` for the k-th body literal when it is
  a relational atom (``exclude`` is a set of tuples to skip, or ``None``);
* ``emit`` receives each derived head tuple;
* ``fcall(name, inputs)`` evaluates a foreign predicate and returns the
  output tuples.

Join order follows the written order, except that the designated delta atom
(semi-naive variants) goes first and builtins run as soon as their inputs
are bound.
"""
from __future__ import annotations

from ..errors import EvaluationError, UnsafeRule
from ..syntax import Atom, BinOp, Comparison, Const, Var, expr_vars, literal_vars

_PY_OPS = {"+": "+", "-": "-", "*": "*", "/": "/", "^": "**"}
_PY_CMP = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "=": "==", "!=": "!="}


def _v(name):
    return f"v_{name}"


def _expr(e):
    if isinstance(e, Var):
        return _v(e.name)
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, BinOp):
        return f"({_expr(e.left)} {_PY_OPS[e.op]} {_expr(e.right)})"
    raise TypeError(e)


def _term(t):
    return _v(t.name) if isinstance(t, Var) else repr(t.value)


def plan_order(rule, foreign_modes, first=None):
    """Return the scheduled list of body literal indices."""
    body = rule.body
    pending = list(range(len(body)))
    order, bound = [], set()

    def relational(i):
        lit = body[i]
        return isinstance(lit, Atom) and not lit.negated and lit.pred not in foreign_modes

    def ready(i):
        lit = body[i]
        if isinstance(lit, Comparison):
            lv, rv = set(expr_vars(lit.left)), set(expr_vars(lit.right))
            if lit.op == "=":
                if isinstance(lit.left, Var) and rv <= bound:
                    return True
                if isinstance(lit.right, Var) and lv <= bound:
                    return True
            return (lv | rv) <= bound
        if lit.negated:
            return literal_vars(lit) <= bound
        if lit.pred in foreign_modes:
            modes = foreign_modes[lit.pred]
            return all(
                not isinstance(a, Var) or a.name in bound
                for a, m in zip(lit.args, modes)
                if m == "+"
            )
        return False

    def take(i):
        pending.remove(i)
        order.append(i)
        lit = body[i]
        if isinstance(lit, Comparison):
            bound.update(expr_vars(lit.left))
            bound.update(expr_vars(lit.right))
        else:
            bound.update(literal_vars(lit))

    if first is not None:
        take(first)
    while pending:
        progress = True
        while progress:
            progress = False
            for i in list(pending):
                if not relational(i) and ready(i):
                    take(i)
                    progress = True
        rel = [i for i in pending if relational(i)]
        if not rel:
            break
        connected = [
            i for i in rel
            if any(isinstance(a, Const) or a.name in bound for a in body[i].args)
        ]
        take((connected or rel)[0])
    if pending:
        raise UnsafeRule(f"cannot schedule {', '.join(str(body[i]) for i in pending)} in {rule}")
    return order


def compile_rule(rule, foreign_modes=None, delta=None):
    """Compile ``rule``; ``delta`` is the body index scheduled first."""
    foreign_modes = foreign_modes or {}
    order = plan_order(rule, foreign_modes, delta)
    lines = ["def _rule(srcs, emit, fcall):"]
    pre = []
    body_lines = []
    bound = set()
    depth = 1

    def emit_line(s):
        body_lines.append("    " * depth + s)

    for i in order:
        lit = rule.body[i]
        if isinstance(lit, Comparison):
            lv = set(expr_vars(lit.left))
            rv = set(expr_vars(lit.right))
            if lit.op == "=" and isinstance(lit.left, Var) and lit.left.name not in bound and rv <= bound:
                emit_line(f"{_v(lit.left.name)} = {_expr(lit.right)}")
                bound.add(lit.left.name)
            elif lit.op == "=" and isinstance(lit.right, Var) and lit.right.name not in bound and lv <= bound:
                emit_line(f"{_v(lit.right.name)} = {_expr(lit.left)}")
                bound.add(lit.right.name)
            else:
                emit_line(f"if not ({_expr(lit.left)} {_PY_CMP[lit.op]} {_expr(lit.right)}): continue" if depth > 1
                          else f"if not ({_expr(lit.left)} {_PY_CMP[lit.op]} {_expr(lit.right)}): return")
            continue
        if lit.pred in foreign_modes:
            if lit.negated:
                raise UnsafeRule(f"negated foreign predicate in {rule}")
            modes = foreign_modes[lit.pred]
            ins = [_term(a) for a, m in zip(lit.args, modes) if m == "+"]
            outs = [(k, a) for k, (a, m) in enumerate(zip(lit.args, modes)) if m == "-"]
            emit_line(f"for o{i} in fcall({lit.pred!r}, ({', '.join(ins)}{',' if len(ins) == 1 else ''})):")
            depth += 1
            for j, (_, a) in enumerate(outs):
                if isinstance(a, Var) and a.name not in bound:
                    emit_line(f"{_v(a.name)} = o{i}[{j}]")
                    bound.add(a.name)
                else:
                    emit_line(f"if o{i}[{j}] != {_term(a)}: continue")
            continue
        # relational atom
        pre.append(f"    R{i}, X{i} = srcs[{i}]")
        key_cols, key_vals, outs, checks = [], [], [], []
        local = set()
        for pos, a in enumerate(lit.args):
            if isinstance(a, Const):
                key_cols.append(pos)
                key_vals.append(repr(a.value))
            elif a.name in bound:
                key_cols.append(pos)
                key_vals.append(_v(a.name))
            elif a.name in local:
                checks.append(f"t{i}[{pos}] == {_v(a.name)}")
            else:
                outs.append(f"{_v(a.name)} = t{i}[{pos}]")
                local.add(a.name)
        key = f"({', '.join(key_vals)}{',' if len(key_vals) == 1 else ''})"
        if lit.negated:
            if len(key_cols) == lit.arity:
                emit_line(f"if {key} in R{i}.tuples: {'continue' if depth > 1 else 'return'}")
            else:
                pre.append(f"    I{i} = R{i}.index({tuple(key_cols)!r})")
                emit_line(f"if {key} in I{i}: {'continue' if depth > 1 else 'return'}")
            continue
        if len(key_cols) == lit.arity:
            emit_line(f"for t{i} in ((({key}),) if {key} in R{i}.tuples else ()):")
        elif key_cols:
            pre.append(f"    I{i} = R{i}.index({tuple(key_cols)!r})")
            emit_line(f"for t{i} in I{i}.get({key}, ()):")
        else:
            emit_line(f"for t{i} in R{i}.tuples:")
        depth += 1
        emit_line(f"if X{i} is not None and t{i} in X{i}: continue")
        for s in outs:
            emit_line(s)
        for c in checks:
            emit_line(f"if not ({c}): continue")
        bound |= local
    head = rule.head.args
    emit_line(f"emit(({', '.join(_term(a) for a in head)}{',' if len(head) == 1 else ''}))")
    src = "\n".join(lines + pre + body_lines) + "\n"
    namespace = {}
    exec(compile(src, f"<rule {rule}>", "exec"), namespace)
    fn = namespace["_rule"]
    return CompiledRule(rule, fn, order, src)


class CompiledRule:
    __slots__ = ("rule", "fn", "order", "source")

    def __init__(self, rule, fn, order, source):
        self.rule = rule
        self.fn = fn
        self.order = order
        self.source = source

    def run(self, srcs, emit, fcall):
        try:
            self.fn(srcs, emit, fcall)
        except (ZeroDivisionError, TypeError, OverflowError, ValueError) as exc:
            bindings = _frame_bindings(exc)
            raise EvaluationError(
                f"{type(exc).__name__} in rule {self.rule}: {exc}; bindings {bindings}"
            ) from exc


def _frame_bindings(exc):
    tb = exc.__traceback__
    found = {}
    while tb is not None:
        if tb.tb_frame.f_code.co_name == "_rule":
            found = {
                k[2:]: v for k, v in tb.tb_frame.f_locals.items() if k.startswith("v_")
            }
        tb = tb.tb_next
    return found

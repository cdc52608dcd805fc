"""Polynomial normal forms with sign reasoning for monotonicity proofs.

A polynomial is a dict mapping a monomial (sorted tuple of variable names,
repeated for powers) to its numeric coefficient.  Signs form a small lattice:
``"pos"`` (> 0), ``"nonneg"`` (>= 0), ``"zero"``, ``"nonpos"`` (<= 0),
``"neg"`` (< 0) and ``None`` for unknown.
"""
from __future__ import annotations

from ..syntax import Atom, BinOp, Comparison, Const, Var, expr_vars

MAX_POWER = 8


def _add(p, q, scale=1):
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + scale * c
        if out[m] == 0:
            del out[m]
    return out


def _mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = tuple(sorted(m1 + m2))
            out[m] = out.get(m, 0) + c1 * c2
            if out[m] == 0:
                del out[m]
    return out


def to_poly(e, defs=None, _seen=()):
    """Polynomial for ``e``, chasing arithmetic definitions; None if not polynomial."""
    defs = defs or {}
    if isinstance(e, Var):
        if e.name in defs and e.name not in _seen:
            return to_poly(defs[e.name], defs, _seen + (e.name,))
        return {(e.name,): 1}
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            return None
        return {(): v} if v != 0 else {}
    if isinstance(e, BinOp):
        left = to_poly(e.left, defs, _seen)
        right = to_poly(e.right, defs, _seen)
        if left is None or right is None:
            return None
        if e.op == "+":
            return _add(left, right)
        if e.op == "-":
            return _add(left, right, -1)
        if e.op == "*":
            return _mul(left, right)
        if e.op == "/":
            if set(right) == {()} and right[()] != 0:
                return {m: c / right[()] for m, c in left.items()}
            return None
        if e.op == "^":
            if set(right) == {()}:
                k = right[()]
                if isinstance(k, int) and 0 <= k <= MAX_POWER:
                    out = {(): 1}
                    for _ in range(k):
                        out = _mul(out, left)
                    return out
            return None
    return None


def poly_sub(p, q):
    return _add(p, q, -1)


def poly_vars(p):
    return {v for m in p for v in m}


def poly_key(p):
    return tuple(sorted(p.items()))


# -- sign lattice -----------------------------------------------------------

_NEG = {"pos": "neg", "nonneg": "nonpos", "zero": "zero", "nonpos": "nonneg", "neg": "pos", None: None}


def sign_of_number(c):
    if c > 0:
        return "pos"
    if c < 0:
        return "neg"
    return "zero"


def sign_neg(s):
    return _NEG[s]


def sign_mul(a, b):
    if a == "zero" or b == "zero":
        return "zero"
    if a is None or b is None:
        return None
    pos_a, pos_b = a in ("pos", "nonneg"), b in ("pos", "nonneg")
    strict = a in ("pos", "neg") and b in ("pos", "neg")
    if pos_a == pos_b:
        return "pos" if strict else "nonneg"
    return "neg" if strict else "nonpos"


def sign_add(a, b):
    if a == "zero":
        return b
    if b == "zero":
        return a
    if a is None or b is None:
        return None
    if a in ("pos", "nonneg") and b in ("pos", "nonneg"):
        return "pos" if "pos" in (a, b) else "nonneg"
    if a in ("neg", "nonpos") and b in ("neg", "nonpos"):
        return "neg" if "neg" in (a, b) else "nonpos"
    return None


def monomial_sign(m, var_signs):
    s = "pos"
    counts = {}
    for v in m:
        counts[v] = counts.get(v, 0) + 1
    for v, k in counts.items():
        vs = var_signs.get(v)
        if k % 2 == 0:
            # even power: never negative; strictly positive if the base is nonzero
            vs2 = "pos" if vs in ("pos", "neg") else "nonneg"
        else:
            vs2 = vs
        s = sign_mul(s, vs2)
    return s


def poly_sign(p, var_signs):
    s = "zero"
    for m, c in p.items():
        s = sign_add(s, sign_mul(sign_of_number(c), monomial_sign(m, var_signs)))
    return s


def derivative(p, v):
    """Partial derivative of ``p`` in ``v``; None when ``v`` occurs non-linearly."""
    out = {}
    for m, c in p.items():
        k = m.count(v)
        if k == 0:
            continue
        if k > 1:
            return None
        rest = list(m)
        rest.remove(v)
        rest = tuple(rest)
        out[rest] = out.get(rest, 0) + c
        if out[rest] == 0:
            del out[rest]
    return out


def monotonicity(p, v, var_signs):
    """Sign of d p / d v: 'zero' independent, 'nonneg' nondecreasing, ..."""
    d = derivative(p, v)
    if d is None:
        return None
    return poly_sign(d, var_signs)


def is_nonneg(s):
    return s in ("pos", "nonneg", "zero")


def is_nonpos(s):
    return s in ("neg", "nonpos", "zero")


# -- rule-level helpers -------------------------------------------------------


def column_sign(col):
    """Sign implied by a declared column bound such as ``int >= 0``."""
    if col is None or col.op is None:
        return None
    b = col.bound
    if col.op in (">", ">="):
        if b > 0 or (b == 0 and col.op == ">"):
            return "pos"
        if b == 0:
            return "nonneg"
    if col.op in ("<", "<="):
        if b < 0 or (b == 0 and col.op == "<"):
            return "neg"
        if b == 0:
            return "nonpos"
    return None


def variable_signs(body, decls):
    """Signs of variables from declared column bounds of the atoms binding them."""
    signs = {}
    for lit in body:
        if not isinstance(lit, Atom) or lit.negated or lit.pred not in decls:
            continue
        cols = decls[lit.pred]
        for a, col in zip(lit.args, cols):
            if isinstance(a, Var):
                s = column_sign(col)
                if s is not None:
                    signs[a.name] = s
    return signs


def definitions(body, atom_bound):
    """Arithmetic assignments ``V = expr`` for variables not bound by atoms."""
    defs = {}
    for lit in body:
        if not isinstance(lit, Comparison) or lit.op != "=":
            continue
        for target, src in ((lit.left, lit.right), (lit.right, lit.left)):
            if isinstance(target, Var) and target.name not in atom_bound and target.name not in defs:
                if target.name not in set(expr_vars(src)):
                    defs[target.name] = src
                    break
    return defs


def is_definition(lit, defs):
    if not isinstance(lit, Comparison) or lit.op != "=":
        return False
    return (isinstance(lit.left, Var) and defs.get(lit.left.name) is lit.right) or (
        isinstance(lit.right, Var) and defs.get(lit.right.name) is lit.left
    )


def depends_on(e, names, defs, _seen=()):
    """True if expression ``e`` (through definitions) mentions any of ``names``."""
    for v in expr_vars(e):
        if v in names:
            return True
        if v in defs and v not in _seen and depends_on(defs[v], names, defs, _seen + (v,)):
            return True
    return False


def normalize_comparison(lit, defs):
    """Return (poly, op) with op in {'>', '>=', '=', '!='} meaning ``poly op 0``."""
    left = to_poly(lit.left, defs)
    right = to_poly(lit.right, defs)
    if left is None or right is None:
        return None
    op = lit.op
    if op in ("<", "<="):
        return poly_sub(right, left), ">" if op == "<" else ">="
    if op in (">", ">="):
        return poly_sub(left, right), op
    q = poly_sub(left, right)
    # canonical orientation for symmetric relations
    if q and sorted(q.items())[0][1] < 0:
        q = {m: -c for m, c in q.items()}
    return q, op

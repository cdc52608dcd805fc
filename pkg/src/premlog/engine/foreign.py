"""Foreign (host-language) predicates and the shipped linear-regression family."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from ..errors import DimensionMismatch, EvaluationError, UnboundModeArg


@dataclass(frozen=True)
class ForeignPredicate:
    """A predicate computed by a Python function.

    ``modes`` holds one character per argument: ``+`` inputs must be bound
    when called, ``-`` outputs are produced.  ``fn(inputs, db)`` returns an
    iterable of output tuples; it must be deterministic in its inputs.
    """

    name: str
    modes: str
    fn: Callable[[tuple, object], Iterable[tuple]]

    @property
    def arity(self):
        return len(self.modes)

    def call(self, inputs, db=None):
        return [tuple(o) for o in self.fn(tuple(inputs), db)]


def eval_foreign(fp: ForeignPredicate, args, db=None):
    """Complete ``args`` (``None`` marks a free position) into ground tuples."""
    args = tuple(args)
    if len(args) != fp.arity:
        raise EvaluationError(f"{fp.name}: expected {fp.arity} arguments, got {len(args)}")
    inputs = []
    for a, m in zip(args, fp.modes):
        if m == "+":
            if a is None:
                raise UnboundModeArg(f"{fp.name}: input argument is unbound")
            inputs.append(a)
    out = set()
    for outs in fp.call(inputs, db):
        it = iter(outs)
        full = tuple(next(it) if m == "-" else a for a, m in zip(args, fp.modes))
        if all(a is None or a == v for a, v in zip(args, full)):
            out.add(full)
    return out


def check_foreign(program, registry):
    """Every declared foreign predicate must be registered with matching modes."""
    for decl in program.foreign:
        fp = registry.get(decl.name)
        if fp is None:
            raise EvaluationError(f"foreign predicate {decl.name} is declared but not registered")
        if fp.modes != decl.modes:
            raise EvaluationError(
                f"foreign predicate {decl.name}: declared modes {decl.modes}, registered {fp.modes}"
            )


class LinearRegression:
    """Batch gradient descent for least-squares linear regression.

    Training rows live in ``data_predicate(Id, R)`` where ``R`` is a vector of
    features followed by the target.  Provides ``init_model(M-)``,
    ``compute(M+, R+, E-, G-)`` and ``update(M+, G+, M2-)``.  ``compute``
    always reads the whole training relation, so every row yields the same
    batch error and gradient.
    """

    def __init__(self, dim, eta, data_predicate="training_data"):
        self.dim = int(dim)
        self.eta = float(eta)
        self.data_predicate = data_predicate
        self._data_key = None
        self._data = None
        self._cache = {}

    def _arrays(self, db):
        rel = db.get(self.data_predicate) if db is not None else None
        if rel is None or not len(rel):
            raise EvaluationError(f"compute: no rows in {self.data_predicate}")
        key = (id(rel), len(rel))
        if key != self._data_key:
            rows = [t[1] for t in sorted(rel.tuples, key=lambda t: t[0])]
            width = {len(r) for r in rows}
            if len(width) != 1:
                raise DimensionMismatch(f"{self.data_predicate}: rows of differing width")
            data = np.asarray(rows, dtype=float)
            self._data = (data[:, :-1], data[:, -1])
            self._data_key = key
            self._cache.clear()
        return self._data

    def mse_and_gradient(self, model, features, target):
        with np.errstate(all="ignore"):
            resid = target - features @ model
            error = float(np.mean(resid * resid))
            grad = -2.0 * (features.T @ resid) / len(target)
        return error, tuple(float(g) for g in grad)

    def init_model(self, inputs, db):
        return [((0.0,) * self.dim,)]

    def compute(self, inputs, db):
        m, row = inputs
        features, target = self._arrays(db)
        if len(m) != features.shape[1] or len(row) != len(m) + 1:
            raise DimensionMismatch(
                f"compute: model has {len(m)} coefficients, rows have {features.shape[1]} features"
            )
        hit = self._cache.get(m)
        if hit is None:
            hit = self._cache[m] = self.mse_and_gradient(np.asarray(m, dtype=float), features, target)
        return [hit]

    def update(self, inputs, db):
        m, g = inputs
        if len(m) != len(g):
            raise DimensionMismatch(f"update: model of length {len(m)}, gradient of length {len(g)}")
        with np.errstate(all="ignore"):
            new = np.asarray(m, dtype=float) - self.eta * np.asarray(g, dtype=float)
        return [(tuple(float(x) for x in new),)]

    def predicates(self):
        return {
            "init_model": ForeignPredicate("init_model", "-", self.init_model),
            "compute": ForeignPredicate("compute", "++--", self.compute),
            "update": ForeignPredicate("update", "++-", self.update),
        }


def registry_for(program, overrides=None):
    """Build the foreign registry a program asks for.

    The linear-regression family is registered when the program declares
    ``compute``; its dimension and step size come from the ``Dim`` and ``Eta``
    constants.
    """
    names = set(program.foreign_map)
    if not names:
        return {}
    config = dict(program.config)
    config.update(overrides or {})
    if {"init_model", "compute", "update"} & names:
        missing = [k for k in ("Dim", "Eta") if k not in config]
        if missing:
            raise EvaluationError(f"linear regression needs constants {', '.join(missing)}")
        data = config.get("Data", "training_data")
        return LinearRegression(config["Dim"], config["Eta"], data).predicates()
    return {}

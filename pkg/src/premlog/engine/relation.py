"""Set-semantics tuple stores with lazily built hash indices."""
from __future__ import annotations

from ..syntax import tuple_sort_key

_EMPTY = frozenset()


class Relation:
    """A named set of ground tuples of fixed arity.

    Hash indices are built on demand for a tuple of column positions and are
    kept up to date by :meth:`add` and :meth:`discard`.
    """

    __slots__ = ("pred", "arity", "tuples", "_indices")

    def __init__(self, pred, arity, tuples=()):
        self.pred = pred
        self.arity = arity
        self.tuples = set()
        self._indices = {}
        for t in tuples:
            self.add(tuple(t))

    def add(self, t):
        if t in self.tuples:
            return False
        if len(t) != self.arity:
            raise ValueError(f"{self.pred}: expected arity {self.arity}, got {t!r}")
        self.tuples.add(t)
        for cols, idx in self._indices.items():
            idx.setdefault(tuple(t[c] for c in cols), set()).add(t)
        return True

    def discard(self, t):
        if t not in self.tuples:
            return False
        self.tuples.discard(t)
        for cols, idx in self._indices.items():
            key = tuple(t[c] for c in cols)
            bucket = idx.get(key)
            if bucket is not None:
                bucket.discard(t)
                if not bucket:
                    del idx[key]
        return True

    def index(self, cols):
        idx = self._indices.get(cols)
        if idx is None:
            idx = {}
            for t in self.tuples:
                idx.setdefault(tuple(t[c] for c in cols), set()).add(t)
            self._indices[cols] = idx
        return idx

    def lookup(self, cols, key):
        if not cols:
            return self.tuples
        return self.index(cols).get(key, _EMPTY)

    def copy(self):
        r = Relation(self.pred, self.arity)
        r.tuples = set(self.tuples)
        return r

    def sorted(self):
        return sorted(self.tuples, key=tuple_sort_key)

    def __contains__(self, t):
        return t in self.tuples

    def __iter__(self):
        return iter(self.tuples)

    def __len__(self):
        return len(self.tuples)

    def __eq__(self, other):
        if isinstance(other, Relation):
            return self.pred == other.pred and self.tuples == other.tuples
        return NotImplemented

    def __repr__(self):
        return f"Relation({self.pred!r}, {self.arity}, {len(self.tuples)} tuples)"


class Interpretation(dict):
    """Mapping predicate -> Relation.

    Equality ignores empty relations so that an absent predicate and an
    empty one compare equal.
    """

    def relation(self, pred, arity):
        r = self.get(pred)
        if r is None:
            r = self[pred] = Relation(pred, arity)
        return r

    def tuples(self, pred):
        r = self.get(pred)
        return set(r.tuples) if r is not None else set()

    def copy(self):
        return Interpretation({p: r.copy() for p, r in self.items()})

    def restrict(self, preds):
        return Interpretation({p: r.copy() for p, r in self.items() if p in preds})

    def as_sets(self):
        return {p: frozenset(r.tuples) for p, r in self.items() if r.tuples}

    def size(self):
        return sum(len(r) for r in self.values())

    def __eq__(self, other):
        if isinstance(other, Interpretation):
            return self.as_sets() == other.as_sets()
        return NotImplemented

    __hash__ = None

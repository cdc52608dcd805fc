from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Any

from ..engine.evaluate import apply_gamma
from ..engine.relation import Relation
from ..syntax import AggregateSpec


@dataclass(frozen=True)
class ConstraintGamma:
    """Extremum constraint on one predicate (min keeps smallest per group)."""

    predicate: str
    spec: AggregateSpec

    @property
    def comparator(self):
        return operator.lt if self.spec.kind == "min" else operator.gt

    def apply(self, rel: Relation) -> Relation:
        return Relation(rel.pred, rel.arity, apply_gamma(self.spec, rel.tuples))

    def __str__(self):
        groups = ", ".join(f"#{c}" for c in self.spec.groupby_cols)
        return f"{self.predicate}({groups}; {self.spec.kind}<#{self.spec.value_col}>)"


@dataclass(frozen=True)
class Selection:
    """Constant selection ``predicate[index] = value``."""

    predicate: str
    index: int
    value: Any

    def __str__(self):
        return f"{self.predicate}[{self.index}] = {self.value!r}"


@dataclass(frozen=True)
class PremClass:
    verdict: str  # full | intrinsic | radical | unknown
    evidence: tuple = ()

    @property
    def is_full(self):
        """Intrinsic pre-mappability is a special case of full."""
        return self.verdict in ("full", "intrinsic")

    def to_json(self):
        return {"verdict": self.verdict, "evidence": list(self.evidence)}

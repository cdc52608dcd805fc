"""Comparing the temporal and the pushed-aggregate training templates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine.evaluate import DEFAULT_CAP
from .errors import CapExceeded, NonConvergence
from .pipeline import run_query

TOLERANCE = 1e-9


@dataclass
class TrainingRun:
    models: list  # [(J, M)] sorted by J
    errors: list  # [(J, E)] sorted by J
    delta: float
    stats: object

    @property
    def final(self):
        return self.models[-1]

    @property
    def stop_iteration(self):
        return self.models[-1][0]

    def errors_nonincreasing(self):
        es = [e for _, e in self.errors]
        return all(b <= a for a, b in zip(es, es[1:]))

    def stops_at_first_small_error(self):
        """The last model is the first whose error is at most delta."""
        errs = dict(self.errors)
        last = self.stop_iteration
        if last not in errs or not errs[last] <= self.delta:
            return False
        return all(errs[j] > self.delta for j, _ in self.models if j < last)


def train(program, edb=None, config=None, cap=DEFAULT_CAP, mode="auto", foreign=None) -> TrainingRun:
    """Run a training template to its stopping condition.

    Raises NonConvergence when the error never drops to delta (including a
    run that hits the iteration cap or produces non-finite errors).
    """
    try:
        res = run_query(program, "model(J, M)", mode, edb, cap, config, foreign)
    except CapExceeded as exc:
        raise NonConvergence(f"training did not stop within the cap: {exc}") from exc
    db = res.db
    cfg = dict(res.prepared.program.config)
    delta = float(cfg.get("Delta", 0.0))
    models = sorted(db.tuples("model"), key=lambda t: t[0])
    js = [j for j, _ in models]
    if len(set(js)) != len(js):
        raise NonConvergence("several models share one iteration number")
    errors = sorted({(j, e) for j, e, _ in db.tuples("stats")}, key=lambda t: t[0])
    run = TrainingRun(models, errors, delta, res.stats)
    last = dict(errors).get(run.stop_iteration)
    if last is None or not np.isfinite(last) or not last <= delta:
        raise NonConvergence(
            f"error {last} at iteration {run.stop_iteration} is not below delta {delta}"
        )
    return run


@dataclass
class TemplateComparison:
    equivalent: bool
    trajectories_equal: bool
    final_equal: bool
    max_deviation: float
    a: TrainingRun
    b: TrainingRun


def _models_close(m1, m2, tol):
    return len(m1) == len(m2) and all(abs(x - y) <= tol for x, y in zip(m1, m2))


def compare_templates(pA, pB, edb=None, config=None, cap=DEFAULT_CAP, tol=TOLERANCE, foreign=None):
    """Train with both templates and compare trajectories and final models."""
    a = train(pA, edb, config, cap, "auto", foreign)
    b = train(pB, edb, config, cap, "auto", foreign)
    same_js = [j for j, _ in a.models] == [j for j, _ in b.models]
    dev = 0.0
    if same_js:
        for (_, m1), (_, m2) in zip(a.models, b.models):
            if len(m1) != len(m2):
                dev = float("inf")
                break
            dev = max([dev] + [abs(x - y) for x, y in zip(m1, m2)])
    traj = same_js and dev <= tol
    final = a.stop_iteration == b.stop_iteration and _models_close(a.final[1], b.final[1], tol)
    return TemplateComparison(traj and final, traj, final, dev, a, b)


def ml_template_equivalence(pA, pB, edb=None, config=None, cap=DEFAULT_CAP, tol=TOLERANCE, foreign=None) -> bool:
    """True iff both templates stop at the same iteration with the same model."""
    return compare_templates(pA, pB, edb, config, cap, tol, foreign).equivalent

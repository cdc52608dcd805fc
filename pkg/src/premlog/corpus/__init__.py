"""The shipped case studies: programs, datasets, golden outputs and oracles.

Each case lives in ``corpus/<name>/`` with ``program.dl``, one ``<pred>.tsv``
per extensional predicate, ``golden.tsv`` (the expected query answer, one
``pred<TAB>args`` row per tuple) and ``meta.json``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..engine.evaluate import DEFAULT_CAP
from ..engine.relation import Relation
from ..facts import load_fact_dir
from ..parser import parse_program
from ..pipeline import pushed_form, run_query
from . import oracles

ROOT = Path(__file__).resolve().parent

CASES = (
    "shortest_path_line3",
    "shortest_path_dag",
    "shortest_path_cyclic",
    "shortest_path_from_a",
    "shortest_path_scaled",
    "non_prem_minus",
    "coin_change_9",
    "coin_change_6",
    "knn_small",
    "ml_linreg_temporal",
    "ml_linreg",
)

GRAPH_CASES = tuple(c for c in CASES if c.startswith("shortest_path") or c == "non_prem_minus")


def case_dir(name):
    if name not in CASES:
        raise KeyError(f"unknown corpus case {name!r}")
    return ROOT / name


@dataclass
class CorpusCase:
    name: str
    directory: Path
    program: object
    edb: object
    meta: dict

    @property
    def query(self):
        return self.program.query


def load_case(name) -> CorpusCase:
    d = case_dir(name)
    program = parse_program((d / "program.dl").read_text(encoding="utf-8"))
    meta = json.loads((d / "meta.json").read_text(encoding="utf-8"))
    return CorpusCase(name, d, program, load_fact_dir(program, d), meta)


def read_golden(name):
    """Golden rows as lists of cell strings (predicate first)."""
    path = case_dir(name) / "golden.tsv"
    lines = path.read_text(encoding="utf-8").splitlines()
    return [line.split("\t") for line in lines if line]


@dataclass
class CaseResult:
    result: Relation
    stats: object
    certification: object
    prepared: object
    db: object


def run_case(name, mode="auto", cap=DEFAULT_CAP, certify=True, baseline_cap=None) -> CaseResult:
    """Run a case end to end; optionally certify its pushed form."""
    case = load_case(name)
    res = run_query(case.program, None, mode, case.edb, cap)
    report = None
    if certify:
        from ..prem.certify import certify_program
        from ..engine.foreign import registry_for

        pushed = pushed_form(case.program)
        report = certify_program(
            pushed, foreign=registry_for(pushed), cap=cap, baseline_cap=baseline_cap, edb=case.edb
        )
    return CaseResult(res.relation, res.stats, report, res.prepared, res.db)


def run_oracle(name) -> Relation:
    """Ground truth for a case computed without the engine."""
    case = load_case(name)
    edb = case.edb
    q = case.query
    kind = case.meta["oracle"]
    if kind in ("floyd_warshall", "scaled_paths", "minus_paths"):
        arcs = edb["arc"].tuples
        fn = {
            "floyd_warshall": oracles.shortest_paths,
            "scaled_paths": oracles.scaled_paths,
            "minus_paths": oracles.minus_paths,
        }[kind]
        tuples = fn(arcs)
        src = q.args[0]
        if hasattr(src, "value"):
            tuples = {t for t in tuples if t[0] == src.value}
        return Relation(q.pred, 3, tuples)
    if kind == "coin_search":
        value = q.args[0].value
        n = oracles.min_coins(value, [c for (c,) in edb["coins"].tuples])
        return Relation(q.pred, 2, [] if n is None else [(value, n)])
    if kind == "knn_sort_vote":
        k = case.program.config_map["K"]
        return Relation(q.pred, 3, oracles.knn_classify(edb["tr"].tuples, edb["te"].tuples, k))
    if kind == "gradient_descent":
        cfg = case.program.config_map
        models, _ = oracles.gradient_descent(
            edb["training_data"].tuples, cfg["Dim"], cfg["Eta"], cfg["Delta"]
        )
        return Relation(q.pred, 2, models)
    raise ValueError(f"unknown oracle {kind!r}")

"""Regenerate the corpus datasets, golden answers and metadata.

Run with ``python -m premlog.corpus.build``.  Datasets come from fixed inputs
or seeded generators; golden answers come from the independent oracles, never
from the engine.
"""
from __future__ import annotations

import json
import sys

from ..facts import _cell, write_tsv
from ..syntax import tuple_sort_key
from . import CASES, case_dir, generators, load_case, run_oracle

_LINE3 = [("a", "b", 1), ("b", "c", 2)]
_CYCLIC = [("a", "b", 1), ("b", "a", 1), ("b", "c", 2)]
_SCALED = [("a", "b", 2), ("b", "c", 1), ("a", "c", 9), ("c", "d", 3), ("b", "d", 8)]
_MINUS = [("a", "b", 1), ("a", "b", 5), ("b", "c", 4)]
_COINS = [(2,), (3,), (6,)]

# Expected classifier verdicts for the rules of each pushed stratum, written
# out by hand from the algebra of each rule.  Rules appear as evaluated:
# constants substituted and nil read as 0.
_SP_CLASSES = {
    "path(X, Y, min<D>) <- arc(X, Y, D).": "intrinsic",
    "path(X, Y, min<D>) <- path(X, Z, Dxz), arc(Z, Y, Dzy), D = Dxz + Dzy.": "full",
}
_SCALED_CLASSES = {
    "path(X, Y, min<D>) <- arc(X, Y, D).": "intrinsic",
    "path(X, Y, min<D>) <- path(X, Z, Dxz), arc(Z, Y, Dzy), D = 3.14 * Dzy.": "intrinsic",
}
_MINUS_CLASSES = {
    "path(X, Y, min<D>) <- arc(X, Y, D).": "intrinsic",
    "path(X, Y, min<D>) <- path(X, Z, Dxz), arc(Z, Y, Dzy), D = Dzy - Dxz.": "unknown",
}
_COIN_CLASSES = {
    "num(C, 1) <- coins(C).": "intrinsic",
    "num(V, min<N>) <- coins(C), C < V, X = V - C, num(X, Y), N = Y + 1.": "full",
}
_KNN_CLASSES = {
    "nearestK(Id, -1, -1, 0) <- te(Id, X, Y).": "intrinsic",
    "nearestK(Id1, min<D>, cmin<Id2>, J1) <- dist(Id1, Id2, D), nearestK(Id1, S, Id3, J), "
    "larger(S, Id3, D, Id2), J1 = J + 1, J1 <= 3.": "intrinsic",
}
_ML_CLASSES = {
    "model(0, M) <- init_model(M).": "intrinsic",
    "stats(J, E, G) <- model(J, M), training_data(Id, R), compute(M, R, E, G).": "intrinsic",
    "find(max<J>, cmax<M>, cmax<E>, cmax<G>) <- model(J, M), stats(J, E, G), E > 0.0001.": "intrinsic",
    "model(J1, M2) <- find(J, M, E, G), update(M, G, M2), J1 = J + 1.": "unknown",
}


def _graph_meta(name, description, oracle, seed=None, classes=_SP_CLASSES, baseline=True, strata=2):
    return {
        "name": name,
        "description": description,
        "oracle": oracle,
        "seed": seed,
        "strata": strata,
        "classes": classes,
        "baseline_terminates": baseline,
    }


def datasets():
    """{case: (facts {pred: rows}, meta)} for every case."""
    dag = generators.random_graph(7, 12, 24, acyclic=True)
    from_a = generators.random_cyclic_graph(11, 10, 8)
    train, test = generators.random_knn(3, 12, 3)
    line = generators.line_data(2024, 20)
    ml_meta = {
        "oracle": "gradient_descent",
        "seed": 2024,
        "baseline_terminates": True,
    }
    return {
        "shortest_path_line3": (
            {"arc": _LINE3},
            _graph_meta("shortest_path_line3", "three-node line a->b->c", "floyd_warshall"),
        ),
        "shortest_path_dag": (
            {"arc": dag},
            _graph_meta("shortest_path_dag", "random acyclic graph, 12 nodes, 24 arcs", "floyd_warshall", 7),
        ),
        "shortest_path_cyclic": (
            {"arc": _CYCLIC},
            _graph_meta(
                "shortest_path_cyclic", "a<->b cycle plus b->c", "floyd_warshall", baseline=False
            ),
        ),
        "shortest_path_from_a": (
            {"arc": from_a},
            _graph_meta(
                "shortest_path_from_a",
                "random cyclic graph, 10 nodes, single-source query",
                "floyd_warshall",
                11,
                baseline=False,
            ),
        ),
        "shortest_path_scaled": (
            {"arc": _SCALED},
            _graph_meta(
                "shortest_path_scaled", "recursive step 3.14 * Dzy on a small DAG", "scaled_paths",
                classes=_SCALED_CLASSES,
            ),
        ),
        "non_prem_minus": (
            {"arc": _MINUS},
            _graph_meta(
                "non_prem_minus", "recursive step Dzy - Dxz; pushing min is unsound", "minus_paths",
                classes=_MINUS_CLASSES,
            ),
        ),
        "coin_change_9": (
            {"coins": _COINS},
            {"name": "coin_change_9", "description": "coins 2, 3, 6; value 9", "oracle": "coin_search",
             "seed": None, "strata": 2, "classes": _COIN_CLASSES, "baseline_terminates": True},
        ),
        "coin_change_6": (
            {"coins": _COINS},
            {"name": "coin_change_6", "description": "coins 2, 3, 6; value 6", "oracle": "coin_search",
             "seed": None, "strata": 2, "classes": _COIN_CLASSES, "baseline_terminates": True},
        ),
        "knn_small": (
            {"tr": train, "te": test},
            {"name": "knn_small", "description": "12 training points, 3 test points, K = 3",
             "oracle": "knn_sort_vote", "seed": 3, "strata": 4, "classes": _KNN_CLASSES,
             "baseline_terminates": True},
        ),
        "ml_linreg_temporal": (
            {"training_data": line},
            {"name": "ml_linreg_temporal", "description": "linear regression, temporal template",
             "strata": 1, "classes": {}, **ml_meta},
        ),
        "ml_linreg": (
            {"training_data": line},
            {"name": "ml_linreg", "description": "linear regression, max-aggregate template",
             "strata": 1, "classes": _ML_CLASSES, **ml_meta},
        ),
    }


def build(names=CASES):
    data = datasets()
    for name in names:
        d = case_dir(name)
        facts, meta = data[name]
        for pred, rows in facts.items():
            write_tsv(d / f"{pred}.tsv", rows)
        program_text = (d / "program.dl").read_text(encoding="utf-8")
        query = next(l for l in program_text.splitlines() if l.startswith("?-"))
        meta = {"v": 1, **meta, "query": query[2:].strip().rstrip(".")}
        (d / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        case = load_case(name)
        rel = run_oracle(name)
        with open(d / "golden.tsv", "w", encoding="utf-8") as fh:
            for t in sorted(rel.tuples, key=tuple_sort_key):
                fh.write("\t".join([case.query.pred] + [_cell(v) for v in t]) + "\n")
        print(f"{name}: {len(rel.tuples)} golden rows")


if __name__ == "__main__":
    build(sys.argv[1:] or CASES)

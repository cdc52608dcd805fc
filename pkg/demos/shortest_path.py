"""Shortest paths: the stratified program against its pushed-min form.

Run with ``python3 demos/shortest_path.py``.
"""
from premlog import CapExceeded, certify_program, run_query
from premlog.corpus import generators, load_case, oracles
from premlog.pipeline import pushed_form
from premlog.syntax import pretty_print

from _common import arc_edb

case = load_case("shortest_path_line3")
print("stratified program:\n" + pretty_print(case.program))
print("pushed program:\n" + pretty_print(pushed_form(case.program)))

# a DAG: both modes terminate, pushed does less work
arcs = generators.random_graph(7, 12, 24, acyclic=True)
edb = arc_edb(arcs)
for mode in ("stratified", "pushed"):
    res = run_query(case.program, "shortestpath(X, Y, D)", mode, edb)
    s = res.stats
    print(f"dag {mode:10s} rows={len(res.relation)} iterations={s.iterations} derivations={s.derivations_attempted}")
assert res.relation.tuples == oracles.shortest_paths(arcs)

# a cycle: the stratified program keeps finding longer paths
arcs = generators.random_cyclic_graph(11, 10, 8)
edb = arc_edb(arcs)
try:
    run_query(case.program, "shortestpath(X, Y, D)", "stratified", edb, cap=200)
except CapExceeded as exc:
    print(f"cyclic stratified: stopped at cap after {exc.stats.iterations} iterations")
res = run_query(case.program, "shortestpath(a, Y, D)", "auto", edb)
print(f"cyclic auto from a: {sorted(res.relation.tuples)}")

rep = certify_program(pushed_form(case.program), edb=edb, baseline_cap=200)
print(f"certified {len(rep.per_iteration)} iterations, ok={rep.ok}")

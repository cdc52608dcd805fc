"""Coin change, kNN and gradient-descent regression from the bundled corpus.

Run with ``python3 demos/case_studies.py``.
"""
from premlog import certify_program, eval_query
from premlog.corpus import load_case, run_case, run_oracle
from premlog.ml import compare_templates, train
from premlog.pipeline import pushed_form

coin = load_case("coin_change_9")
for v in (6, 7, 9, 11):
    print(f"fewest coins for {v}: {sorted(eval_query(coin.program, f'num({v}, N)', 'auto', coin.edb).tuples)}")

knn = run_case("knn_small")
print(f"kNN classify: {sorted(knn.result.tuples)}")
print(f"kNN matches sort-and-vote oracle: {knn.result.tuples == run_oracle('knn_small').tuples}")

ml_t, ml_p = load_case("ml_linreg_temporal"), load_case("ml_linreg")
run = train(ml_t.program, ml_t.edb)
print(f"regression stopped at iteration {run.stop_iteration} with model {run.final[1]}")
print(f"temporal and pushed templates agree: {compare_templates(ml_t.program, ml_p.program, ml_t.edb).equivalent}")

# subtraction is not preserved by min: certification finds a witness
minus = load_case("non_prem_minus")
rep = certify_program(pushed_form(minus.program), edb=minus.edb)
print(f"non-PreM program certified ok={rep.ok}, witness={rep.first_witness}")

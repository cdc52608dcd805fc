import numpy as np
import pytest

from premlog.corpus import load_case
from premlog.engine.foreign import ForeignPredicate, LinearRegression, eval_foreign
from premlog.engine.relation import Interpretation, Relation
from premlog.errors import DimensionMismatch, NonConvergence, UnboundModeArg
from premlog.ml import compare_templates, ml_template_equivalence, train


def _data(rows):
    db = Interpretation()
    db["training_data"] = Relation("training_data", 2, rows)
    return db


def test_init_model_zero_vector():
    lr = LinearRegression(dim=2, eta=0.1)
    assert eval_foreign(lr.predicates()["init_model"], [None]) == {((0.0, 0.0),)}


def test_compute_at_true_coefficients_is_exact():
    lr = LinearRegression(dim=2, eta=0.1)
    db = _data([(1, (1.0, 0.0, 1.0)), (2, (1.0, 1.0, 3.0)), (3, (1.0, 2.0, 5.0))])
    (m, r, e, g), = eval_foreign(lr.predicates()["compute"], [(1.0, 2.0), (1.0, 0.0, 1.0), None, None], db)
    assert e == 0.0 and all(x == 0.0 for x in g)


def test_single_update_step():
    lr = LinearRegression(dim=1, eta=0.1)
    db = _data([(1, (1.0, 2.0))])
    preds = lr.predicates()
    (_, _, e, g), = eval_foreign(preds["compute"], [(0.0,), (1.0, 2.0), None, None], db)
    assert g == pytest.approx((-4.0,))
    (_, _, m2), = eval_foreign(preds["update"], [(0.0,), g, None], db)
    assert m2 == pytest.approx((0.4,))


def test_unbound_input_rejected():
    lr = LinearRegression(dim=1, eta=0.1)
    with pytest.raises(UnboundModeArg):
        eval_foreign(lr.predicates()["update"], [None, (1.0,), None])


def test_dimension_mismatch():
    lr = LinearRegression(dim=2, eta=0.1)
    db = _data([(1, (1.0, 2.0, 3.0, 4.0))])
    with pytest.raises(DimensionMismatch):
        eval_foreign(lr.predicates()["compute"], [(0.0, 0.0), (1.0,), None, None], db)


def test_custom_foreign_is_deterministic():
    fp = ForeignPredicate("double", "+-", lambda ins, db: [(ins[0] * 2,)])
    assert eval_foreign(fp, [3, None]) == eval_foreign(fp, [3, None]) == {(3, 6)}
    assert eval_foreign(fp, [3, 7]) == set()


ML_T = load_case("ml_linreg_temporal")
ML_P = load_case("ml_linreg")


def test_templates_equivalent_on_shipped_data():
    assert ml_template_equivalence(ML_T.program, ML_P.program, ML_T.edb)


def test_large_delta_stops_at_init_model():
    cmp = compare_templates(ML_T.program, ML_P.program, ML_T.edb, config={"Delta": 1e6})
    assert cmp.equivalent
    assert cmp.a.stop_iteration == cmp.b.stop_iteration == 0
    assert cmp.a.final[1] == (0.0, 0.0)


def test_divergent_step_size_raises():
    for p in (ML_T.program, ML_P.program):
        with pytest.raises(NonConvergence):
            train(p, ML_T.edb, config={"Eta": 1e3}, cap=500)


def test_errors_nonincreasing_and_first_small_stop():
    run = train(ML_P.program, ML_P.edb)
    assert run.errors_nonincreasing()
    assert run.stops_at_first_small_error()


def test_matches_direct_gradient_descent_loop():
    from premlog.corpus.oracles import gradient_descent

    run = train(ML_T.program, ML_T.edb)
    models, _ = gradient_descent(ML_T.edb.tuples("training_data"), 2, 0.05, 1e-4)
    assert [j for j, _ in run.models] == [j for j, _ in models]
    assert np.allclose([m for _, m in run.models], [m for _, m in models], atol=1e-9, rtol=0)

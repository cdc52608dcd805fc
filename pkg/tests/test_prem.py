import pytest

from premlog.analysis import analyze
from premlog.corpus import load_case, oracles
from premlog.engine.evaluate import eval_constrained, eval_seminaive
from premlog.engine.relation import Interpretation, Relation
from premlog.errors import DemandNotDerivable, NotPushable, NotRadical
from premlog.parser import parse_atom, parse_program
from premlog.pipeline import eval_query, prepare, pushed_form
from premlog.prem.certify import certify_program, certify_step
from premlog.prem.classify import classify_prem, classify_selection
from premlog.prem.gamma import ConstraintGamma, PremClass, Selection
from premlog.prem.monotone import derivative, monotonicity, poly_sign, to_poly
from premlog.prem.rewrite import demand_rewrite, push_aggregate, push_constant, pushable_rules
from premlog.syntax import AggregateSpec, format_rule, pretty_print

SP = load_case("shortest_path_line3").program
PATH_MIN = ConstraintGamma("path", AggregateSpec.build("min", 2, 3))


def _pushed_variant(step, decl=".decl arc(sym, sym, int >= 0).\n"):
    text = (
        decl
        + "path(X, Y, min<D>) <- arc(X, Y, D).\n"
        + f"path(X, Y, min<D>) <- path(X, Z, Dxz), arc(Z, Y, Dzy), D = {step}.\n"
        + "shortestpath(X, Y, D) <- path(X, Y, D).\n"
    )
    p = parse_program(text)
    return p, p.rules[1]


# monotonicity ---------------------------------------------------------------------


def test_poly_algebra():
    p = to_poly(parse_program("r(D) <- q(A, B), D = (A + 2) * B - A.").rules[0].body[1].right)
    assert derivative(p, "A") is not None
    assert poly_sign(to_poly(parse_atom("p(3)").args[0]), {}) == "pos"


def test_monotonicity_with_signs():
    p = to_poly(parse_program("r(D) <- q(A, B), D = A + B.").rules[0].body[1].right)
    assert monotonicity(p, "A", {"B": "nonneg"}) == "pos"
    q = to_poly(parse_program("r(D) <- q(A, B), D = B - A.").rules[0].body[1].right)
    assert monotonicity(q, "A", {}) == "neg"


# classification -------------------------------------------------------------------


def test_sum_with_nonnegative_weights_full():
    p, r = _pushed_variant("Dxz + Dzy")
    assert classify_prem(r, PATH_MIN, p).verdict == "full"


def test_sum_without_sign_declaration_unknown():
    p, r = _pushed_variant("Dxz + Dzy", decl="")
    assert classify_prem(r, PATH_MIN, p).verdict == "unknown"


def test_constant_multiple_intrinsic():
    p, r = _pushed_variant("3.14 * Dzy")
    cls = classify_prem(r, PATH_MIN, p)
    assert cls.verdict == "intrinsic" and cls.is_full


def test_difference_unknown():
    p, r = _pushed_variant("Dzy - Dxz")
    assert classify_prem(r, PATH_MIN, p).verdict == "unknown"


def test_classification_carries_evidence():
    p, r = _pushed_variant("Dxz + Dzy")
    assert classify_prem(r, PATH_MIN, p).evidence


def test_selection_on_copied_position_radical():
    p, r = _pushed_variant("Dxz + Dzy")
    assert classify_selection(r, Selection("path", 0, "a")).verdict == "radical"
    assert classify_selection(r, Selection("path", 1, "c")).verdict == "unknown"


def test_prem_class_json():
    assert PremClass("full", ("x",)).to_json() == {"verdict": "full", "evidence": ["x"]}


def test_gamma_object():
    rel = Relation("path", 3, [("a", "b", 2), ("a", "b", 1)])
    assert PATH_MIN.apply(rel).tuples == {("a", "b", 1)}
    assert PATH_MIN.comparator(1, 2)


# aggregate pushdown -----------------------------------------------------------------


def test_push_aggregate_reproduces_pushed_program():
    sp = analyze(SP)
    (agg,) = pushable_rules(sp)
    pushed = push_aggregate(sp, agg)
    rules = {format_rule(r) for r in pushed.rules}
    assert rules == {
        "path(X, Y, min<D>) <- arc(X, Y, D).",
        "path(X, Y, min<D>) <- path(X, Z, Dxz), arc(Z, Y, Dzy), D = Dxz + Dzy.",
        "shortestpath(X, Y, D) <- path(X, Y, D).",
    }
    assert analyze(pushed).stratum_of("path").pushed


def test_no_aggregate_nothing_pushable():
    p = parse_program("e(a, b).\np(X, Y) <- e(X, Y).\np(X, Y) <- p(X, Z), e(Z, Y).")
    assert pushable_rules(analyze(p)) == []


def test_aggregate_over_join_not_pushable():
    p = parse_program(
        "arc(a, b, 1).\npath(X, Y, D) <- arc(X, Y, D).\n"
        "path(X, Y, D) <- path(X, Z, A), arc(Z, Y, B), D = A + B.\n"
        "s(X, min<D>) <- path(X, Y, D), arc(Y, Z, W)."
    )
    sp = analyze(p)
    assert pushable_rules(sp) == []
    with pytest.raises(NotPushable):
        push_aggregate(sp, p.rules[2])


# constant pushdown -------------------------------------------------------------------


def test_push_constant_into_exit_rule_only():
    p = push_constant(pushed_form(SP), ("shortestpath", 0, "a"))
    rules = [format_rule(r) for r in p.rules]
    assert "path(a, Y, min<D>) <- arc(a, Y, D)." in rules
    assert "path(X, Y, min<D>) <- path(X, Z, Dxz), arc(Z, Y, Dzy), D = Dxz + Dzy." in rules
    assert p.notes


def test_push_constant_modified_position_not_radical():
    coin = load_case("coin_change_9").program
    with pytest.raises(NotRadical):
        push_constant(coin, ("num", 0, 9))


def test_push_constant_outside_scc():
    p = parse_program("e(a, b).\ne(b, c).\nq(X, Y) <- e(X, Y).")
    out = push_constant(p, ("q", 0, "a"))
    assert [format_rule(r) for r in out.rules] == ["q(a, Y) <- e(a, Y)."]


@pytest.mark.parametrize("case", ["shortest_path_line3", "shortest_path_dag", "shortest_path_scaled"])
def test_constant_push_equals_selection_on_baseline(case):
    c = load_case(case)
    base, _ = eval_seminaive(prepare(c.program, "stratified").sp, c.edb)
    for x in sorted({t[0] for t in c.edb.tuples("arc")}):
        got = eval_query(c.program, f"shortestpath({x}, Y, D)", "auto", c.edb).tuples
        assert got == {t for t in base.tuples("shortestpath") if t[0] == x}


# demand rewrite ------------------------------------------------------------------------


def test_demand_closure_for_coin_change():
    c = load_case("coin_change_9")
    prep = prepare(c.program, "auto")
    db, _ = eval_constrained(prep.sp, c.edb)
    demand = {t[0] for t in db.tuples("d_num_bf")}
    # closure of 9 under subtracting a coin while staying positive
    assert demand == {9, 7, 6, 5, 4, 3, 2, 1}


def test_demand_unbound_query_unchanged():
    p = load_case("shortest_path_line3").program
    assert demand_rewrite(p, parse_atom("shortestpath(X, Y, D)")) == p


def test_demand_growing_binding_rejected():
    p = parse_program(
        ".decl c(int > 0).\n.decl n(int >= 0, int >= 0).\n"
        "n(C, 1) <- c(C).\nn(V, min<N>) <- c(C), X = V * 2, n(X, Y), N = Y + 1.\n"
    )
    with pytest.raises(DemandNotDerivable):
        demand_rewrite(p, parse_atom("n(3, N)"))


def test_demand_answers_match_exhaustive_search():
    c = load_case("coin_change_9")
    coins = [t[0] for t in c.edb.tuples("coins")]
    for v in range(1, 16):
        got = eval_query(c.program, f"num({v}, N)", "auto", c.edb).tuples
        n = oracles.min_coins(v, coins)
        assert got == (set() if n is None else {(v, n)})


# certification --------------------------------------------------------------------------


def test_certify_step_minus_witness():
    p, r = _pushed_variant("Dzy - Dxz")
    I = Interpretation()
    I["arc"] = Relation("arc", 3, [("a", "b", 1), ("a", "b", 5), ("b", "c", 4)])
    I["path"] = Relation("path", 3, [("a", "b", 1), ("a", "b", 5), ("b", "c", 4)])
    res = certify_step([r], PATH_MIN, I)
    assert not res["full_ok"]
    assert res["witness"][0] == "path"


def test_certify_step_sum_ok():
    p, r = _pushed_variant("Dxz + Dzy")
    I = Interpretation()
    I["arc"] = Relation("arc", 3, [("a", "b", 1), ("b", "c", 2), ("a", "c", 5)])
    I["path"] = Relation("path", 3, [("a", "b", 1), ("a", "b", 4), ("b", "c", 2)])
    assert certify_step([r], PATH_MIN, I)["full_ok"]


def test_certify_acyclic_shortest_path():
    c = load_case("shortest_path_dag")
    rep = certify_program(pushed_form(c.program), edb=c.edb)
    assert rep.ok and rep.end_to_end == {"baseline_terminated": True, "equal": True}


def test_certify_cyclic_baseline_cap():
    c = load_case("shortest_path_cyclic")
    rep = certify_program(pushed_form(c.program), edb=c.edb, baseline_cap=200)
    assert rep.ok and rep.end_to_end["baseline_terminated"] is False


def test_certify_scaled_intrinsic_every_iteration():
    c = load_case("shortest_path_scaled")
    rep = certify_program(pushed_form(c.program), edb=c.edb)
    assert rep.per_iteration and all(r["intrinsic_ok"] for r in rep.per_iteration)


def test_certify_minus_violation():
    c = load_case("non_prem_minus")
    rep = certify_program(pushed_form(c.program), edb=c.edb)
    assert not rep.ok and rep.first_witness is not None
    assert rep.end_to_end["equal"] is False
    j = rep.to_json()
    assert j["v"] == 1 and j["scope"] == "reached interpretations"


def test_certify_no_aggregates_note():
    rep = certify_program(parse_program("e(a, b).\np(X) <- e(X, Y)."))
    assert rep.per_iteration == [] and rep.notes and rep.ok


def test_pretty_pushed_program():
    assert "min<" in pretty_print(pushed_form(SP))


import pytest

from premlog.analysis import (
    AGGREGATED,
    NEGATIVE,
    POSITIVE,
    analyze,
    apply_config,
    build_graph,
    classify_rules,
    inline_condition_rules,
    safety_check,
    stratify,
)
from premlog.corpus import CASES, load_case
from premlog.errors import InliningCycle, NotStratifiable
from premlog.parser import parse_program
from premlog.pipeline import prepare, pushed_form
from premlog.syntax import format_rule

SP = load_case("shortest_path_line3").program


def test_graph_edges_shortest_path():
    g = build_graph(SP)
    assert ("arc", "path", POSITIVE) in g.edges
    assert ("path", "path", POSITIVE) in g.edges
    assert ("path", "shortestpath", AGGREGATED) in g.edges


def test_graph_facts_only_has_no_edges():
    assert not build_graph(parse_program("e(a, b).\ne(b, c).")).edges


def test_graph_negative_edge():
    p = parse_program(
        "better(X, Y, D) <- path(X, Y, D), path(X, Y, D1), D1 < D.\n"
        "shortestpath(X, Y, D) <- path(X, Y, D), !better(X, Y, D).\n"
        "path(X, Y, D) <- arc(X, Y, D).\narc(a, b, 1)."
    )
    assert ("better", "shortestpath", NEGATIVE) in build_graph(p).edges


def test_two_strata_for_stratified_shortest_path():
    sp = analyze(SP)
    assert [s.predicates for s in sp.strata] == [("path",), ("shortestpath",)]
    assert sp.strata[0].recursive and not sp.strata[1].recursive


def test_pushed_min_accepted_inside_scc():
    sp = analyze(pushed_form(SP))
    path = sp.stratum_of("path")
    assert path.pushed and path.constrained["path"].kind == "min"


def test_negative_self_loop_rejected():
    p = parse_program("q(a).\np(X) <- q(X), !p(X).")
    with pytest.raises(NotStratifiable):
        analyze(p)


def test_count_through_recursion_rejected():
    with pytest.raises(NotStratifiable):
        analyze(parse_program("q(1, 2).\np(X, count<Y>) <- q(X, Y), p(Y, Z)."))


def test_exit_and_recursive_rules():
    sp = classify_rules(stratify(build_graph(pushed_form(SP)), pushed_form(SP)))
    path = sp.stratum_of("path")
    assert [format_rule(r) for r in path.exit_rules] == ["path(X, Y, min<D>) <- arc(X, Y, D)."]
    assert len(path.recursive_rules) == 1
    assert not sp.stratum_of("shortestpath").recursive_rules

    coin = analyze(load_case("coin_change_9").program).stratum_of("num")
    assert len(coin.exit_rules) == 1 and len(coin.recursive_rules) == 1


def test_deterministic_lexicographic_order():
    p = parse_program("b(X) <- e(X).\na(X) <- e(X).\nc(X) <- a(X), b(X).\ne(1).")
    assert [s.predicates for s in analyze(p).strata] == [("a",), ("b",), ("c",)]


def test_inline_knn_condition_rules():
    p = inline_condition_rules(load_case("knn_small").program)
    texts = [format_rule(r) for r in p.rules if r.head.pred == "nearestK" and len(r.body) > 1]
    assert len(texts) == 2
    assert any("D > S" in t for t in texts)
    assert any("D = S, Id2 > Id3" in t for t in texts)
    assert not p.rules_for("larger")


def test_inline_without_condition_rules_is_identity():
    assert inline_condition_rules(SP) == SP


def test_inline_cycle():
    bad = parse_program("a(X) <- X > 1, b(X).\nb(X) <- X < 5, a(X).\np(X) <- q(X), a(X).\nq(1).")
    with pytest.raises(InliningCycle):
        inline_condition_rules(bad)


def test_safety():
    knn = apply_config(load_case("knn_small").program)
    assert safety_check(inline_condition_rules(knn)) == []
    assert any("Y" in v for v in safety_check(parse_program("p(X, Y) <- q(X).\nq(1).")))


def test_coin_rule_safe_only_with_demand():
    coin = load_case("coin_change_9").program
    assert safety_check(coin)  # V unbound bottom-up
    assert safety_check(coin, demand={"num": (0,)}) == []
    assert safety_check(prepare(coin, "auto").program) == []


@pytest.mark.parametrize("case", CASES)
def test_strata_counts_match_documented_values(case):
    c = load_case(case)
    assert len(prepare(c.program, "auto").sp.strata) == c.meta["strata"]

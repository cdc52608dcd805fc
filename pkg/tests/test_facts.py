import pytest

from premlog.errors import FactFileError
from premlog.facts import load_fact_dir, load_facts, write_tsv
from premlog.parser import parse_program
from premlog.syntax import ColumnType


def test_single_row(tmp_path):
    f = tmp_path / "arc.tsv"
    f.write_text("a\tb\t1\n")
    rel = load_facts(f, "arc", ["sym", "sym", "int"])
    assert rel.tuples == {("a", "b", 1)}


def test_duplicates_collapse(tmp_path):
    f = tmp_path / "arc.tsv"
    f.write_text("a\tb\t1\na\tb\t1\n\n")
    assert len(load_facts(f, "arc", ["sym", "sym", "int"]).tuples) == 1


def test_type_error_reports_row(tmp_path):
    f = tmp_path / "arc.tsv"
    f.write_text("a\tb\tx\n")
    with pytest.raises(FactFileError) as exc:
        load_facts(f, "arc", ["sym", "sym", "int"])
    assert exc.value.row == 1


def test_arity_mismatch(tmp_path):
    f = tmp_path / "arc.tsv"
    f.write_text("a\tb\t1\nc\td\n")
    with pytest.raises(FactFileError) as exc:
        load_facts(f, "arc", ["sym", "sym", "int"])
    assert exc.value.row == 2


def test_declared_bound_enforced(tmp_path):
    f = tmp_path / "arc.tsv"
    f.write_text("a\tb\t-1\n")
    with pytest.raises(FactFileError):
        load_facts(f, "arc", ["sym", "sym", ColumnType("int", ">=", 0)])


def test_csv_and_vectors(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1,1.0 2.0 3.5\n")
    assert load_facts(f, "d", ["int", "vec"]).tuples == {(1, (1.0, 2.0, 3.5))}


def test_order_insensitive_and_idempotent(tmp_path):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    a.write_text("x\t1\ny\t2\n")
    b.write_text("y\t2\nx\t1\nx\t1\n")
    schema = ["sym", "int"]
    assert load_facts(a, "p", schema).tuples == load_facts(b, "p", schema).tuples


def test_write_then_load_round_trip(tmp_path):
    rows = {("a", 1.5), ("b", -2.0)}
    write_tsv(tmp_path / "p.tsv", rows)
    assert load_facts(tmp_path / "p.tsv", "p", ["sym", "float"]).tuples == rows


def test_fact_dir_loads_declared_edb_only(tmp_path):
    p = parse_program(".decl arc(sym, sym, int).\np(X) <- arc(X, Y, D).")
    (tmp_path / "arc.tsv").write_text("a\tb\t1\n")
    edb = load_fact_dir(p, tmp_path)
    assert edb.tuples("arc") == {("a", "b", 1)}


def test_fact_dir_missing_files_is_empty(tmp_path):
    p = parse_program(".decl arc(sym, sym, int).\np(X) <- arc(X, Y, D).")
    assert load_fact_dir(p, tmp_path).tuples("arc") == set()

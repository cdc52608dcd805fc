import pytest

from premlog.corpus import load_case
from premlog.engine.relation import Interpretation, Relation


def graph_edb(arcs):
    edb = Interpretation()
    edb["arc"] = Relation("arc", 3, arcs)
    return edb


def vertices(arcs):
    return {x for x, _, _ in arcs} | {y for _, y, _ in arcs}


@pytest.fixture(scope="session")
def sp_program():
    """The all-pairs shortest-path program in its stratified form."""
    return load_case("shortest_path_dag").program


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line past pytest's capture, then assert."""

    def emit(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        assert ok, f"{label}: {detail}"

    return emit

"""Loading extensional relations from TSV/CSV fact files."""
from __future__ import annotations

import csv
import operator
import re
from pathlib import Path

from .engine.relation import Interpretation, Relation
from .errors import FactFileError
from .syntax import ColumnType, format_value, tuple_sort_key

_INT_RE = re.compile(r"[+-]?\d+\Z")
_BOUND_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def coerce(text, col: ColumnType):
    """Convert one cell to the declared column type (raises ValueError)."""
    text = text.strip()
    if col.name == "sym":
        if not text:
            raise ValueError("empty symbol")
        value = text
    elif col.name == "int":
        if not _INT_RE.match(text):
            raise ValueError(f"{text!r} is not an integer")
        value = int(text)
    elif col.name == "float":
        value = float(text)
    elif col.name == "vec":
        value = tuple(float(x) for x in text.split())
    else:
        raise ValueError(f"unknown column type {col.name!r}")
    if col.op is not None and not _BOUND_OPS[col.op](value, col.bound):
        raise ValueError(f"{value!r} violates declared bound {col}")
    return value


def _rows(path):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        if path.suffix.lower() == ".csv":
            yield from csv.reader(fh)
        else:
            for line in fh:
                line = line.rstrip("\r\n")
                yield line.split("\t") if line else []


def load_facts(path, predicate, schema) -> Relation:
    """Read ``path`` into a relation named ``predicate``.

    ``schema`` is a sequence of :class:`ColumnType` (or bare type names).
    Rows are deduplicated; blank lines are skipped.
    """
    schema = [c if isinstance(c, ColumnType) else ColumnType(c) for c in schema]
    rel = Relation(predicate, len(schema))
    for rowno, cells in enumerate(_rows(path), start=1):
        if not cells or (len(cells) == 1 and not cells[0].strip()):
            continue
        if len(cells) != len(schema):
            raise FactFileError(
                f"{predicate}: expected {len(schema)} columns, got {len(cells)}", rowno
            )
        try:
            rel.add(tuple(coerce(c, t) for c, t in zip(cells, schema)))
        except ValueError as exc:
            raise FactFileError(f"{predicate}: {exc}", rowno) from None
    return rel


def fact_file_for(directory, pred):
    for ext in (".tsv", ".csv"):
        candidate = Path(directory) / f"{pred}{ext}"
        if candidate.exists():
            return candidate
    return None


def load_fact_dir(program, directory) -> Interpretation:
    """Load ``<pred>.tsv`` / ``<pred>.csv`` for every declared predicate found."""
    edb = Interpretation()
    if directory is None:
        return edb
    idb = program.idb_predicates()
    for pred, cols in program.decls:
        if pred in idb:
            continue
        path = fact_file_for(directory, pred)
        if path is not None:
            edb[pred] = load_facts(path, pred, cols)
    return edb


def write_tsv(path, tuples):
    with open(path, "w", encoding="utf-8") as fh:
        for t in sorted(tuples, key=tuple_sort_key):
            fh.write("\t".join(_cell(v) for v in t) + "\n")


def _cell(v):
    if isinstance(v, tuple):
        return " ".join(repr(float(x)) for x in v)
    if isinstance(v, str):
        return v
    return format_value(v)

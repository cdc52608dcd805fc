"""Independent ground-truth implementations for the corpus cases.

None of these touch the Datalog engine; they work directly on the fact
relations with plain Python and numpy.
"""
from __future__ import annotations

from collections import Counter

import numpy as np


def shortest_paths(arcs):
    """All-pairs shortest non-empty paths by Floyd-Warshall.

    ``arcs`` is an iterable of (x, y, w); returns {(x, y, d)} for every pair
    connected by at least one arc sequence (x == y only through a cycle).
    """
    arcs = list(arcs)
    nodes = sorted({a for a, _, _ in arcs} | {b for _, b, _ in arcs})
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    d = np.full((n, n), np.inf)
    for x, y, w in arcs:
        i, j = idx[x], idx[y]
        d[i, j] = min(d[i, j], w)
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    out = set()
    for i in range(n):
        for j in range(n):
            if np.isfinite(d[i, j]):
                v = d[i, j]
                out.add((nodes[i], nodes[j], int(v) if float(v).is_integer() else float(v)))
    return out


def scaled_paths(arcs, factor=3.14):
    """Minimum over path(X,Y,D) when recursive steps yield ``factor * Dzy``.

    path(X, Y, D) holds for every arc, and for every arc (Z, Y, w) with Z
    reachable from X by a non-empty path, with D = factor * w.
    """
    arcs = list(arcs)
    succ = {}
    for x, y, _ in arcs:
        succ.setdefault(x, set()).add(y)
    best = {}

    def offer(x, y, v):
        if (x, y) not in best or v < best[(x, y)]:
            best[(x, y)] = v

    for x, y, w in arcs:
        offer(x, y, w)
    for x in list(succ):
        seen, stack = set(), list(succ.get(x, ()))
        while stack:
            z = stack.pop()
            if z in seen:
                continue
            seen.add(z)
            stack.extend(succ.get(z, ()))
        for z, y, w in arcs:
            if z in seen:
                offer(x, y, factor * w)
    return {(x, y, v) for (x, y), v in best.items()}


def minus_paths(arcs):
    """Stratified meaning of the ``D = Dzy - Dxz`` variant on an acyclic graph.

    Enumerates every path value, then keeps the minimum per (X, Y).
    """
    arcs = list(arcs)
    vals = {}
    frontier = set(arcs)
    for _ in range(len(arcs) + 1):
        new = set()
        for t in frontier:
            if t not in vals:
                vals[t] = True
                new.add(t)
        nxt = set()
        for x, z, dxz in new:
            for z2, y, dzy in arcs:
                if z2 == z:
                    nxt.add((x, y, dzy - dxz))
        frontier = nxt
        if not frontier:
            break
    else:
        raise ValueError("graph has a cycle")
    best = {}
    for x, y, d in vals:
        if (x, y) not in best or d < best[(x, y)]:
            best[(x, y)] = d
    return {(x, y, d) for (x, y), d in best.items()}


def min_coins(value, coins):
    """Fewest coins summing to ``value`` by breadth-first search over coin counts.

    Mirrors the program: a single coin makes its own value; otherwise a coin
    C < V is combined with a solution for V - C.  Returns None if unreachable.
    """
    coins = sorted(set(coins))
    level = set(coins)
    seen = set()
    n = 1
    while level:
        if value in level:
            return n
        seen |= level
        level = {s + c for s in level for c in coins if s + c <= value} - seen
        n += 1
    return None


def knn_classify(train, test, k):
    """Sort-and-vote kNN with the (distance, Id) tie-break.

    ``train`` rows are (Id, X, Y, Label), ``test`` rows (Id, X, Y).  Returns
    {(test_id, votes, label)} keeping every label tied for the most votes.
    """
    out = set()
    for tid, x1, y1 in test:
        ranked = sorted(
            ((x1 - x2) ** 2 + (y1 - y2) ** 2, rid, label) for rid, x2, y2, label in train
        )
        votes = Counter(label for _, _, label in ranked[:k])
        if not votes:
            continue
        top = max(votes.values())
        out |= {(tid, v, lab) for lab, v in votes.items() if v == top}
    return out


def knn_votes(train, test, k):
    out = set()
    for tid, x1, y1 in test:
        ranked = sorted(
            ((x1 - x2) ** 2 + (y1 - y2) ** 2, rid, label) for rid, x2, y2, label in train
        )
        for lab, v in Counter(label for _, _, label in ranked[:k]).items():
            out.add((tid, lab, v))
    return out


def gradient_descent(rows, dim, eta, delta, max_iter=10_000):
    """Direct batch gradient-descent loop for least squares.

    ``rows`` are (Id, vector) with the vector holding features then target.
    Returns the model trajectory [(j, model tuple)] up to and including the
    first model whose mean squared error is at most ``delta``, and the
    matching error list.
    """
    data = np.asarray([r for _, r in sorted(rows)], dtype=float)
    X, y = data[:, :-1], data[:, -1]
    assert X.shape[1] == dim
    m = np.zeros(dim)
    models, errors = [], []
    for j in range(max_iter + 1):
        resid = y - X @ m
        err = float(np.mean(resid * resid))
        models.append((j, tuple(float(v) for v in m)))
        errors.append((j, err))
        if not err > delta:
            return models, errors
        grad = -2.0 * (X.T @ resid) / len(y)
        m = m - eta * grad
    raise RuntimeError("gradient descent did not reach delta")

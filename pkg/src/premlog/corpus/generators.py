"""Seeded random instances for the case studies."""
from __future__ import annotations

import numpy as np


def node_names(n):
    """a..z for small graphs, v0.. otherwise."""
    if n <= 26:
        return [chr(ord("a") + i) for i in range(n)]
    return [f"v{i}" for i in range(n)]


def random_graph(seed, n, m, max_weight=9, acyclic=False, min_weight=0):
    """Up to ``m`` distinct weighted arcs over ``n`` named vertices."""
    rng = np.random.default_rng(seed)
    names = node_names(n)
    arcs = {}
    attempts = 0
    while len(arcs) < m and attempts < 50 * m:
        attempts += 1
        i, j = (int(v) for v in rng.integers(0, n, size=2))
        if i == j:
            continue
        if acyclic and i > j:
            i, j = j, i
        arcs.setdefault((names[i], names[j]), int(rng.integers(min_weight, max_weight + 1)))
    return sorted((x, y, w) for (x, y), w in arcs.items())


def random_cyclic_graph(seed, n, extra, max_weight=9):
    """A directed cycle through all vertices plus ``extra`` random arcs (weights > 0)."""
    names = node_names(n)
    rng = np.random.default_rng(seed)
    arcs = {(names[i], names[(i + 1) % n]): int(rng.integers(1, max_weight + 1)) for i in range(n)}
    for x, y, w in random_graph(seed + 1, n, extra, max_weight, min_weight=1):
        arcs.setdefault((x, y), w)
    return sorted((x, y, w) for (x, y), w in arcs.items())


def random_coins(seed, k, max_coin=20):
    rng = np.random.default_rng(seed)
    return sorted({int(c) for c in rng.integers(1, max_coin + 1, size=k)})


def random_knn(seed, n_train, n_test, labels=("blue", "red"), spread=1.0):
    """Labelled training points around one centre per label, plus test points.

    Coordinates are real numbers, so exact distance ties have probability zero.
    """
    rng = np.random.default_rng(seed)
    centres = rng.uniform(-2, 2, size=(len(labels), 2))
    train = []
    for i in range(n_train):
        k = i % len(labels)
        x, y = centres[k] + rng.normal(0, spread, size=2)
        train.append((i + 1, float(x), float(y), labels[k]))
    test = []
    for i in range(n_test):
        x, y = rng.uniform(-3, 3, size=2)
        test.append((1001 + i, float(x), float(y)))
    return train, test


def line_data(seed=2024, n=20, slope=2.0, intercept=1.0, noise=0.001):
    """Rows (Id, (1, x, y)) for y = slope*x + intercept plus small Gaussian noise."""
    rng = np.random.default_rng(seed)
    xs = np.linspace(-1.0, 1.0, n)
    ys = slope * xs + intercept + rng.normal(0.0, noise, size=n)
    return [(i + 1, (1.0, float(x), float(y))) for i, (x, y) in enumerate(zip(xs, ys))]

"""Shared graph generators for the test suite."""
import numpy as np
import pytest

from graphkrig import from_edge_list
from graphkrig.graphs import WeightedDigraph


def strongly_connected_digraph(n: int, seed: int, extra_edges: int | None = None) -> WeightedDigraph:
    """Directed cycle plus random extra edges; every node has an in-link
    and an out-link and the walk is irreducible."""
    rng = np.random.default_rng(seed)
    rows = [(i, (i + 1) % n, float(rng.uniform(0.5, 2.0))) for i in range(n)]
    for _ in range(2 * n if extra_edges is None else extra_edges):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            rows.append((int(i), int(j), float(rng.uniform(0.5, 2.0))))
    return from_edge_list(rows)


def connected_undirected_graph(n: int, seed: int, extra_edges: int | None = None) -> WeightedDigraph:
    """Random spanning tree plus extra symmetric edges."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    rows = []
    for a, b in zip(order[:-1], order[1:]):
        w = float(rng.uniform(0.5, 2.0))
        rows += [(int(a), int(b), w), (int(b), int(a), w)]
    for _ in range(2 * n if extra_edges is None else extra_edges):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            w = float(rng.uniform(0.5, 2.0))
            rows += [(int(i), int(j), w), (int(j), int(i), w)]
    return from_edge_list(rows)


def path_graph(weights=(1.0, 1.0)) -> WeightedDigraph:
    """Undirected path 0 - 1 - ... with the given edge weights."""
    rows = []
    for i, w in enumerate(weights):
        rows += [(i, i + 1, float(w)), (i + 1, i, float(w))]
    return from_edge_list(rows)


@pytest.fixture
def rng():
    return np.random.default_rng(2026)

"""Weighted directed graphs and the random-walk / spectral quantities
derived from the link structure alone.

Graphs are dense: the target scale is a few hundred to a couple of
thousand nodes, where O(n^3) linear algebra is acceptable.
"""
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError

DENSE_NODE_CAP = 2000
STATIONARY_TOL = 1e-12
STATIONARY_MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Immutable weighted digraph held as a dense adjacency matrix.

    ``weights[i, j]`` is the weight of the edge i -> j; the diagonal is
    always zero (self-loops are dropped at construction).
    """

    weights: np.ndarray
    self_loops_dropped: int = 0

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def out_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def in_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def volume(self) -> float:
        return float(self.weights.sum())

    def edge_list(self) -> list[tuple[int, int, float]]:
        src, dst = np.nonzero(self.weights)
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(src, dst)]

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.weights, self.weights.T))


@dataclass(frozen=True, eq=False)
class WalkQuantities:
    """Transition matrix, stationary distribution and its diagonal matrix
    for the (possibly teleport-adjusted) random walk on a graph."""

    P: np.ndarray
    pi: np.ndarray
    teleport: float

    @property
    def Pi(self) -> np.ndarray:
        return np.diag(self.pi)


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    """Symmetric similarity matrix together with its graph Laplacian."""

    s: np.ndarray
    laplacian: np.ndarray


@dataclass(frozen=True, eq=False)
class HubAuthorityQuantities:
    """Hub and authority walks: transition matrices, closed-form stationary
    vectors, and the Laplacians of the two similarity graphs.

    Rows of ``P_H`` for nodes that are not hubs (no out-link) are zero and
    flagged in ``hub_mask``; likewise ``P_A`` and ``authority_mask``.
    """

    P_H: np.ndarray
    P_A: np.ndarray
    pi_H: np.ndarray
    pi_A: np.ndarray
    lap_H: np.ndarray
    lap_A: np.ndarray
    hub_mask: np.ndarray
    authority_mask: np.ndarray


def from_edge_list(
    rows: Iterable[tuple[int, int, float]],
    n: int | None = None,
) -> WeightedDigraph:
    """Build a graph from (src, dst, weight) triples.

    Duplicate (src, dst) pairs are summed, self-loops are dropped and
    counted. Node count defaults to ``max index + 1``.
    """
    rows = list(rows)
    if not rows and n is None:
        raise ValueError("empty edge list and no node count given")
    if n is None:
        n = 1 + max(max(i, j) for i, j, _ in rows)
    if n <= 0:
        raise ValueError("graph must have at least one node")
    if n > DENSE_NODE_CAP:
        raise ValueError(f"node count {n} exceeds the dense-representation cap {DENSE_NODE_CAP}")
    W = np.zeros((n, n))
    dropped = 0
    for i, j, w in rows:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
        w = float(w)
        if not np.isfinite(w) or w <= 0:
            raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
        if i == j:
            dropped += 1
            continue
        W[i, j] += w
    return WeightedDigraph(weights=W, self_loops_dropped=dropped)


def symmetrized(g: WeightedDigraph) -> WeightedDigraph:
    """The graph with adjacency W + W'."""
    return WeightedDigraph(weights=g.weights + g.weights.T,
                           self_loops_dropped=g.self_loops_dropped)


def as_undirected(g: WeightedDigraph) -> WeightedDigraph:
    """Return ``g`` unchanged if already symmetric, else symmetrize to W + W'."""
    return g if g.is_symmetric() else symmetrized(g)


def is_strongly_connected(g: WeightedDigraph) -> bool:
    ncomp, _ = connected_components(csr_matrix(g.weights), directed=True,
                                    connection="strong")
    return ncomp == 1


def walk_quantities(g: WeightedDigraph, teleport: float = 0.0) -> WalkQuantities:
    """Row-stochastic transition matrix and its stationary distribution.

    With ``teleport`` t > 0, P = (1 - t) * W / row_sums + t / n; rows with
    zero out-degree become uniform. With t = 0 every node must have an
    out-link.

    The stationary vector is the power-iteration fixed point (uniform
    start, averaged with the identity so periodic chains converge too),
    iterated until the residual against P drops below 1e-12.
    """
    if not (0.0 <= teleport < 1.0):
        raise ValueError(f"teleport must be in [0, 1), got {teleport}")
    n = g.n
    out = g.out_degrees()
    dangling = out <= 0
    if teleport == 0.0 and dangling.any():
        bad = int(np.flatnonzero(dangling)[0])
        raise ValueError(
            f"node {bad} has no out-link; set teleport > 0 to make the walk well defined"
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        P = np.where(dangling[:, None], 0.0, g.weights / np.where(dangling, 1.0, out)[:, None])
    if teleport > 0.0:
        P = (1.0 - teleport) * P + teleport / n
        P[dangling] = 1.0 / n

    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(STATIONARY_MAX_ITER):
        residual = float(np.max(np.abs(pi @ P - pi)))
        if residual < STATIONARY_TOL:
            break
        # lazy-walk step: same fixed point, converges for periodic chains
        pi = 0.5 * (pi @ P + pi)
        pi = pi / pi.sum()
    else:
        raise ConvergenceError(
            f"stationary distribution did not converge (residual {residual:.3e})",
            residual=residual,
        )
    return WalkQuantities(P=P, pi=pi, teleport=teleport)


def _laplacian_of(s: np.ndarray) -> np.ndarray:
    """Graph Laplacian of a symmetric similarity matrix; self-similarities
    on the diagonal do not contribute."""
    return np.diag(s.sum(axis=1)) - s


def similarity_matrix(wq: WalkQuantities) -> SimilarityGraph:
    """Similarity s_ij = pi_i P_ij + pi_j P_ji and its Laplacian."""
    flow = wq.pi[:, None] * wq.P
    s = flow + flow.T
    return SimilarityGraph(s=s, laplacian=_laplacian_of(s))


def weight_laplacian(g: WeightedDigraph, symmetrize: bool = False) -> SimilarityGraph:
    """Laplacian of the edge-weight graph itself (similarity = weight).

    With ``symmetrize`` the weights become W + W'; without it the graph
    must already be symmetric.
    """
    if symmetrize:
        W = g.weights + g.weights.T
    else:
        if not g.is_symmetric():
            raise ValueError("graph is not symmetric; pass symmetrize=True to use W + W'")
        W = g.weights
    return SimilarityGraph(s=W, laplacian=_laplacian_of(W))


def hub_authority(g: WeightedDigraph) -> HubAuthorityQuantities:
    """Hub and authority walks with their closed-form stationary vectors.

    The hub walk steps between nodes with out-links through a shared
    target; the authority walk steps between nodes with in-links through
    a shared source. Stationary mass is out-degree / volume for hubs and
    in-degree / volume for authorities, zero for nodes outside each role.
    """
    vol = g.volume()
    if vol <= 0:
        raise ValueError("graph has no edges")
    out = g.out_degrees()
    ind = g.in_degrees()
    hubs = out > 0
    auths = ind > 0
    inv_out = np.where(hubs, 1.0 / np.where(hubs, out, 1.0), 0.0)
    inv_in = np.where(auths, 1.0 / np.where(auths, ind, 1.0), 0.0)
    row_norm = g.weights * inv_out[:, None]   # w_ij / w_i+
    col_norm = g.weights * inv_in[None, :]    # w_ij / w_+j
    P_H = row_norm @ col_norm.T
    P_A = col_norm.T @ row_norm
    pi_H = out / vol
    pi_A = ind / vol

    flow_H = pi_H[:, None] * P_H
    s_H = flow_H + flow_H.T
    flow_A = pi_A[:, None] * P_A
    s_A = flow_A + flow_A.T
    return HubAuthorityQuantities(
        P_H=P_H, P_A=P_A, pi_H=pi_H, pi_A=pi_A,
        lap_H=_laplacian_of(s_H), lap_A=_laplacian_of(s_A),
        hub_mask=hubs, authority_mask=auths,
    )


def read_edge_list(lines: Iterable[str]) -> tuple[WeightedDigraph, list[str]]:
    """Parse tab-separated edge lines ``src<TAB>dst[<TAB>weight]``.

    Node ids are arbitrary strings mapped to dense indices in first-seen
    order. Returns the graph and the id list. Blank lines are skipped.
    """
    ids: dict[str, int] = {}
    rows: list[tuple[int, int, float]] = []

    def index(token: str) -> int:
        if token not in ids:
            ids[token] = len(ids)
        return ids[token]

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 2 or 3 tab-separated fields, got {len(parts)}")
        src, dst = parts[0], parts[1]
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ValueError(f"line {lineno}: bad weight {parts[2]!r}") from None
        else:
            weight = 1.0
        if weight <= 0 or not np.isfinite(weight):
            raise ValueError(f"line {lineno}: non-positive weight {weight}")
        rows.append((index(src), index(dst), weight))
    if not ids:
        raise ValueError("edge list is empty")
    return from_edge_list(rows, n=len(ids)), list(ids)

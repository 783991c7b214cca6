"""Tests for graph construction and random-walk / spectral quantities."""
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphkrig import (
    from_edge_list,
    hub_authority,
    read_edge_list,
    similarity_matrix,
    walk_quantities,
    weight_laplacian,
)
from graphkrig.errors import ConvergenceError
from graphkrig.graphs import as_undirected, is_strongly_connected, symmetrized

from conftest import connected_undirected_graph, path_graph, strongly_connected_digraph


class TestFromEdgeList:
    def test_two_node_volume(self):
        g = from_edge_list([(0, 1, 1.0), (1, 0, 1.0)])
        assert g.volume() == 2.0

    def test_self_loop_dropped(self):
        g = from_edge_list([(0, 0, 5.0)])
        assert g.n == 1
        assert g.volume() == 0.0
        assert g.self_loops_dropped == 1

    def test_duplicates_summed(self):
        g = from_edge_list([(0, 1, 2.0), (0, 1, 3.0)])
        assert g.weights[0, 1] == 5.0

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError, match="weight"):
            from_edge_list([(0, 1, -1.0)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            from_edge_list([])

    def test_degrees(self):
        g = from_edge_list([(0, 1, 1.0), (0, 2, 2.0), (2, 0, 4.0)])
        assert np.allclose(g.out_degrees(), [3.0, 0.0, 4.0])
        assert np.allclose(g.in_degrees(), [4.0, 1.0, 2.0])
        assert g.volume() == 7.0


class TestWalkQuantities:
    def test_triangle_uniform(self):
        rows = [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0), (0, 2, 1.0), (2, 0, 1.0)]
        wq = walk_quantities(from_edge_list(rows))
        assert np.allclose(wq.pi, 1.0 / 3.0, atol=1e-10)

    def test_path_closed_form(self):
        wq = walk_quantities(path_graph())
        assert np.allclose(wq.pi, [0.25, 0.5, 0.25], atol=1e-10)

    def test_directed_two_cycle(self):
        wq = walk_quantities(from_edge_list([(0, 1, 1.0), (1, 0, 1.0)]))
        assert np.allclose(wq.pi, [0.5, 0.5], atol=1e-12)

    def test_rows_stochastic(self):
        g = strongly_connected_digraph(10, 3)
        wq = walk_quantities(g)
        assert np.max(np.abs(wq.P.sum(axis=1) - 1.0)) < 1e-12

    def test_stationarity_residual(self):
        g = strongly_connected_digraph(12, 4)
        wq = walk_quantities(g)
        assert np.max(np.abs(wq.pi @ wq.P - wq.pi)) < 1e-10
        assert abs(wq.pi.sum() - 1.0) < 1e-10
        assert np.all(wq.pi >= 0)

    def test_dangling_rejected_without_teleport(self):
        g = from_edge_list([(0, 1, 1.0)])
        with pytest.raises(ValueError, match="out-link"):
            walk_quantities(g)

    def test_teleport_fixes_dangling(self):
        g = from_edge_list([(0, 1, 1.0)])
        wq = walk_quantities(g, teleport=0.15)
        assert np.max(np.abs(wq.P.sum(axis=1) - 1.0)) < 1e-12
        assert np.all(wq.pi > 0)

    def test_teleport_formula(self):
        g = from_edge_list([(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
        t = 0.2
        wq = walk_quantities(g, teleport=t)
        assert wq.P[0, 1] == pytest.approx((1 - t) * 1.0 + t / 3)
        assert wq.P[0, 0] == pytest.approx(t / 3)

    def test_bad_teleport_rejected(self):
        g = from_edge_list([(0, 1, 1.0), (1, 0, 1.0)])
        with pytest.raises(ValueError):
            walk_quantities(g, teleport=1.0)

    @given(st.integers(0, 500))
    @settings(max_examples=25, deadline=None)
    def test_matches_direct_eigensolve(self, seed):
        n = int(np.random.default_rng(seed).integers(3, 20))
        g = strongly_connected_digraph(n, seed)
        wq = walk_quantities(g)
        evals, evecs = np.linalg.eig(wq.P.T)
        k = int(np.argmin(np.abs(evals - 1.0)))
        direct = np.real(evecs[:, k])
        direct = direct / direct.sum()
        assert np.max(np.abs(direct - wq.pi)) < 1e-8


class TestSimilarity:
    def test_path_value(self):
        s = similarity_matrix(walk_quantities(path_graph())).s
        assert s[0, 1] == pytest.approx(0.5, abs=1e-12)

    def test_zero_diagonal(self):
        g = strongly_connected_digraph(8, 1)
        s = similarity_matrix(walk_quantities(g)).s
        assert np.allclose(np.diag(s), 0.0)

    def test_directed_two_cycle(self):
        s = similarity_matrix(walk_quantities(from_edge_list([(0, 1, 1.0), (1, 0, 1.0)]))).s
        assert s[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_symmetric(self):
        g = strongly_connected_digraph(9, 2)
        simg = similarity_matrix(walk_quantities(g))
        assert np.allclose(simg.s, simg.s.T)

    def test_laplacian_rows_and_psd(self):
        g = strongly_connected_digraph(9, 5)
        simg = similarity_matrix(walk_quantities(g))
        assert np.max(np.abs(simg.laplacian.sum(axis=1))) < 1e-12
        evals = np.linalg.eigvalsh(simg.laplacian)
        assert evals[0] >= -1e-10
        # connected similarity graph: exactly one zero eigenvalue
        assert np.sum(np.abs(evals) < 1e-10) == 1

    def test_closed_forms_on_undirected(self):
        for seed in range(5):
            g = connected_undirected_graph(10, seed)
            wq = walk_quantities(g)
            deg = g.out_degrees()
            assert np.max(np.abs(wq.pi - deg / g.volume())) < 1e-10
            s = similarity_matrix(wq).s
            assert np.max(np.abs(s - 2.0 * g.weights / g.volume())) < 1e-10


class TestWeightLaplacian:
    def test_two_node(self):
        g = from_edge_list([(0, 1, 1.0), (1, 0, 1.0)])
        lap = weight_laplacian(g).laplacian
        assert np.allclose(lap, [[1.0, -1.0], [-1.0, 1.0]])

    def test_row_sums_zero(self):
        g = connected_undirected_graph(8, 3)
        assert np.max(np.abs(weight_laplacian(g).laplacian.sum(axis=1))) < 1e-12

    def test_path_structure(self):
        lap = weight_laplacian(path_graph()).laplacian
        expected = np.diag([1.0, 2.0, 1.0]) - path_graph().weights
        assert np.allclose(lap, expected)

    def test_asymmetric_rejected_without_flag(self):
        g = from_edge_list([(0, 1, 1.0)])
        with pytest.raises(ValueError, match="symmetrize"):
            weight_laplacian(g)

    def test_symmetrize_equals_explicit(self):
        g = strongly_connected_digraph(7, 9)
        explicit = symmetrized(g)
        assert np.array_equal(weight_laplacian(g, symmetrize=True).laplacian,
                              weight_laplacian(explicit).laplacian)

    def test_as_undirected_identity_on_symmetric(self):
        g = connected_undirected_graph(6, 4)
        assert as_undirected(g) is g


class TestHubAuthority:
    def test_single_edge_stationary(self):
        haq = hub_authority(from_edge_list([(0, 1, 1.0)]))
        assert np.allclose(haq.pi_H, [1.0, 0.0])
        assert np.allclose(haq.pi_A, [0.0, 1.0])

    def test_single_edge_hub_self_loop(self):
        haq = hub_authority(from_edge_list([(0, 1, 1.0)]))
        assert haq.P_H[0, 0] == pytest.approx(1.0)

    def test_complete_graph_walks_coincide(self):
        n = 5
        rows = [(i, j, 1.0) for i in range(n) for j in range(n) if i != j]
        haq = hub_authority(from_edge_list(rows))
        assert np.allclose(haq.P_H, haq.P_A)
        assert np.allclose(haq.lap_H, haq.lap_A)
        assert np.allclose(haq.pi_H, haq.pi_A)

    def test_rows_sum_for_roles(self):
        g = strongly_connected_digraph(9, 12)
        haq = hub_authority(g)
        assert np.max(np.abs(haq.P_H.sum(axis=1) - 1.0)) < 1e-10
        assert np.max(np.abs(haq.P_A.sum(axis=1) - 1.0)) < 1e-10

    def test_non_hub_rows_zero_and_flagged(self):
        haq = hub_authority(from_edge_list([(0, 1, 1.0)]))
        assert not haq.hub_mask[1]
        assert np.allclose(haq.P_H[1], 0.0)
        assert not haq.authority_mask[0]
        assert np.allclose(haq.P_A[0], 0.0)

    def test_closed_forms(self):
        g = strongly_connected_digraph(8, 13)
        haq = hub_authority(g)
        assert np.allclose(haq.pi_H, g.out_degrees() / g.volume())
        assert np.allclose(haq.pi_A, g.in_degrees() / g.volume())


class TestEdgeListParsing:
    def test_basic(self):
        g, ids = read_edge_list(io.StringIO("a\tb\t2\nb\tc\nc\ta\t0.5\n"))
        assert ids == ["a", "b", "c"]
        assert g.weights[0, 1] == 2.0
        assert g.weights[1, 2] == 1.0  # default weight
        assert g.weights[2, 0] == 0.5

    def test_first_seen_order(self):
        _, ids = read_edge_list(io.StringIO("z\ty\nx\tz\n"))
        assert ids == ["z", "y", "x"]

    def test_malformed_line_number(self):
        with pytest.raises(ValueError, match="line 2"):
            read_edge_list(io.StringIO("a\tb\nc\n"))

    def test_bad_weight_line_number(self):
        with pytest.raises(ValueError, match="line 1"):
            read_edge_list(io.StringIO("a\tb\tx\n"))

    def test_blank_lines_skipped(self):
        g, ids = read_edge_list(io.StringIO("a\tb\n\nb\ta\n"))
        assert g.n == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            read_edge_list(io.StringIO(""))


def test_strong_connectivity_check():
    assert is_strongly_connected(strongly_connected_digraph(6, 0))
    assert not is_strongly_connected(from_edge_list([(0, 1, 1.0)]))


def test_power_iteration_converges_on_bipartite():
    # bipartite undirected graphs make the plain walk periodic; the
    # stationary solver must still converge
    g = path_graph((1.0, 1.0, 1.0))
    wq = walk_quantities(g)
    assert np.max(np.abs(wq.pi @ wq.P - wq.pi)) < 1e-10

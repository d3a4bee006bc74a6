"""Nearest-neighbor graph construction, kernel weights and temperature grids."""

import numpy as np
import pytest

from gibbsplaid.graph import (RelationalGraph, avg_nn_bandwidth, build_knn_graph,
                              build_temperature_grid, correlation_distance,
                              correlation_distance_matrix, edge_weight)


def _dist(coords):
    coords = np.asarray(coords, dtype=float)
    return np.abs(coords[:, None] - coords[None, :])


class TestEdgeWeight:
    def test_zero_distance(self):
        assert edge_weight(0.0, 2.0, 1.0) == pytest.approx(0.5)

    def test_half_weight_distance(self):
        sigma = 0.7
        d = sigma * np.sqrt(2.0 * np.log(2.0))
        assert edge_weight(d, 1.0, sigma) == pytest.approx(0.5)

    def test_monotone_in_temperature_and_distance(self):
        assert edge_weight(1.0, 1.0, 1.0) > edge_weight(1.0, 2.0, 1.0)
        assert edge_weight(0.5, 1.0, 1.0) > edge_weight(1.5, 1.0, 1.0)

    def test_pure_inverse_temperature_scaling(self):
        for T in (0.5, 1.0, 3.0, 10.0):
            assert edge_weight(0.8, T, 1.3) * T == pytest.approx(
                edge_weight(0.8, 1.0, 1.3))

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            edge_weight(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            edge_weight(-1.0, 1.0, 1.0)


class TestAvgNnBandwidth:
    def test_two_points(self):
        assert avg_nn_bandwidth(_dist([0.0, 2.5])) == pytest.approx(2.5)

    def test_three_collinear_points(self):
        # nearest-neighbor distances are 1, 1, 2
        assert avg_nn_bandwidth(_dist([0.0, 1.0, 3.0])) == pytest.approx(4.0 / 3.0)

    def test_duplicated_points_rejected(self):
        with pytest.raises(ValueError):
            avg_nn_bandwidth(np.zeros((3, 3)))

    def test_asymmetric_rejected(self):
        D = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(ValueError):
            avg_nn_bandwidth(D)


class TestBuildKnnGraph:
    def test_collinear_points_r1(self):
        g = build_knn_graph(_dist([0.0, 1.0, 3.0]), 1)
        edges = set(zip(g.edges_i.tolist(), g.edges_j.tolist()))
        assert edges == {(0, 1), (1, 2)}

    def test_full_r_gives_complete_graph(self):
        n = 5
        rng = np.random.default_rng(0)
        coords = rng.normal(size=n)
        g = build_knn_graph(_dist(coords), n - 1)
        assert g.n_edges == n * (n - 1) // 2

    def test_equal_distances_tie_break_by_index(self):
        n = 4
        D = np.ones((n, n)) - np.eye(n)
        g = build_knn_graph(D, 1)
        edges = set(zip(g.edges_i.tolist(), g.edges_j.tolist()))
        # every node picks its lowest-index other node
        assert edges == {(0, 1), (0, 2), (0, 3)}

    def test_every_node_has_degree_one_or_more(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(3, 12))
            r = int(rng.integers(1, n))
            g = build_knn_graph(_dist(rng.normal(size=n)), r)
            deg = np.zeros(n, dtype=int)
            np.add.at(deg, g.edges_i, 1)
            np.add.at(deg, g.edges_j, 1)
            assert deg.min() >= 1
            assert g.n_edges <= n * r

    def test_mask_excludes_pairs(self):
        D = _dist([0.0, 1.0, 2.0])
        mask = np.array([[False, True, False],
                         [True, False, True],
                         [False, True, False]])
        g = build_knn_graph(D, 2, mask=mask)
        edges = set(zip(g.edges_i.tolist(), g.edges_j.tolist()))
        assert (0, 2) not in edges

    def test_r_out_of_range(self):
        with pytest.raises(ValueError):
            build_knn_graph(_dist([0.0, 1.0]), 2)

    def test_kernel_weights_use_bandwidth(self):
        g = build_knn_graph(_dist([0.0, 1.0, 3.0]), 1)
        w = g.kernel_weights()
        np.testing.assert_allclose(
            w, np.exp(-0.5 * (g.distances / g.bandwidth) ** 2))


class TestRelationalGraphValidation:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            RelationalGraph(3, np.array([0]), np.array([0]), np.array([1.0]), 1.0)

    def test_rejects_duplicate_edges(self):
        with pytest.raises(ValueError):
            RelationalGraph(3, np.array([0, 1]), np.array([1, 0]),
                            np.array([1.0, 1.0]), 1.0)

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            RelationalGraph(2, np.array([0]), np.array([1]), np.array([-1.0]), 1.0)


class TestCorrelationDistance:
    def test_lag_beyond_three_is_zero(self):
        assert correlation_distance(0, 4, 0.8) == 0.0

    def test_adjacent_lag(self):
        assert correlation_distance(2, 3, 0.8) == pytest.approx(0.4)

    def test_same_condition(self):
        assert correlation_distance(5, 5, 0.3) == 0.0

    def test_symmetry(self):
        for lag in range(6):
            assert correlation_distance(0, lag, 0.6) == correlation_distance(lag, 0, 0.6)

    def test_xi_out_of_range(self):
        with pytest.raises(ValueError):
            correlation_distance(0, 1, 1.0)

    def test_matrix_masks_far_pairs_as_non_edges(self):
        D, mask = correlation_distance_matrix(8, 0.8)
        assert D[0, 4] == 0.0 and not mask[0, 4]
        assert mask[0, 3] and D[0, 3] == pytest.approx(2 * (1 - 0.8 ** 3))
        assert not mask.diagonal().any()
        g = build_knn_graph(D, 3, mask=mask)
        lags = np.abs(g.edges_i - g.edges_j)
        assert lags.max() <= 3


class TestTemperatureGrid:
    def test_single_point(self):
        g = build_temperature_grid(1.0, 1.0, 1)
        assert g.values.tolist() == [1.0]

    def test_geometric_three_points(self):
        g = build_temperature_grid(1.0, 4.0, 3)
        np.testing.assert_allclose(g.values, [1.0, 2.0, 4.0])

    def test_linear_three_points(self):
        g = build_temperature_grid(1.0, 3.0, 3, spacing="linear")
        np.testing.assert_allclose(g.values, [1.0, 2.0, 3.0])

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            build_temperature_grid(0.0, 1.0, 2)
        with pytest.raises(ValueError):
            build_temperature_grid(2.0, 1.0, 2)
        with pytest.raises(ValueError):
            build_temperature_grid(1.0, 1.0, 2)
        with pytest.raises(ValueError):
            build_temperature_grid(1.0, 2.0, 1)

    def test_strictly_increasing(self):
        g = build_temperature_grid(0.5, 5.0, 10)
        assert np.all(np.diff(g.values) > 0)

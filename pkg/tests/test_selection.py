"""MAP extraction, information criteria, thresholding, F1 and redundancy."""

import numpy as np
import pytest

from gibbsplaid.engine import SamplerTrace, TraceRecord
from gibbsplaid.graph import build_temperature_grid
from gibbsplaid.selection import (Bicluster, aic, aic_parameter_count,
                                  biclusters_from_labels, dic_c, f1_average,
                                  f1_pair, map_estimate, relative_redundancy,
                                  threshold_memberships)


def _record(it, loglik, logpost, rho=None, kappa=None):
    rho = np.ones((2, 1)) if rho is None else np.asarray(rho, dtype=float)
    kappa = np.ones((2, 1)) if kappa is None else np.asarray(kappa, dtype=float)
    K = rho.shape[1]
    return TraceRecord(iteration=it, loglik=loglik, logpost=logpost,
                       mu0=0.0, mu=np.zeros(K), sigma2=1.0,
                       raw_gene_effects=np.zeros((rho.shape[0], K)),
                       raw_cond_effects=np.zeros((kappa.shape[0], K)),
                       rho=rho, kappa=kappa, t_rho_idx=0, t_kappa_idx=0)


def _trace(records):
    grid = build_temperature_grid(1.0, 1.0, 1)
    return SamplerTrace(records=records, grid_rho=grid, grid_kappa=grid,
                        log_psi=np.zeros(1), visits_epoch=np.zeros(1),
                        visits_total=np.zeros(1), visits_second_half=np.zeros(1),
                        rho_marginal=np.zeros((2, 1)),
                        kappa_marginal=np.zeros((2, 1)),
                        n_marginal_samples=len(records))


class TestMapEstimate:
    def test_single_record(self):
        r = _record(0, -3.0, -5.0)
        assert map_estimate(_trace([r])) is r

    def test_ties_take_earliest(self):
        r0 = _record(0, -3.0, -5.0)
        r1 = _record(1, -2.0, -5.0)
        assert map_estimate(_trace([r0, r1])) is r0

    def test_higher_posterior_wins(self):
        r0 = _record(0, -3.0, -5.0)
        r1 = _record(1, -9.0, -4.0)
        assert map_estimate(_trace([r0, r1])) is r1

    def test_empty_trace_rejected(self):
        with pytest.raises(ValueError):
            map_estimate(_trace([]))


class TestDicC:
    def test_degenerate_posterior(self):
        recs = [_record(i, -7.0, -7.0) for i in range(4)]
        d, p_c = dic_c(_trace(recs))
        assert p_c == pytest.approx(0.0)
        assert d == pytest.approx(14.0)

    def test_two_sample_case(self):
        recs = [_record(0, -10.0, -10.0), _record(1, -12.0, -12.0)]
        d, p_c = dic_c(_trace(recs))
        assert p_c == pytest.approx(2.0)
        assert d == pytest.approx(24.0)

    def test_constant_shift(self):
        rng = np.random.default_rng(0)
        lls = rng.normal(-20, 3, size=8)
        base = _trace([_record(i, ll, ll) for i, ll in enumerate(lls)])
        c = 4.25
        shifted = _trace([_record(i, ll + c, ll + c) for i, ll in enumerate(lls)])
        d0, p0 = dic_c(base)
        d1, p1 = dic_c(shifted)
        assert d1 - d0 == pytest.approx(-2.0 * c)
        assert p1 == pytest.approx(p0)

    def test_empty_trace_rejected(self):
        with pytest.raises(ValueError):
            dic_c(_trace([]))


class TestAic:
    def test_single_cell_bicluster(self):
        r = _record(0, -5.0, -5.0, rho=[[1], [0]], kappa=[[1], [0]])
        assert aic_parameter_count(r.rho, r.kappa) == 3
        assert aic(r) == pytest.approx(16.0)

    def test_empty_bicluster_contributes_only_mean(self):
        full = aic_parameter_count(np.array([[1], [1]]), np.array([[1], [1]]))
        empty = aic_parameter_count(np.zeros((2, 1)), np.zeros((2, 1)))
        assert full == 2 + 1 + 1 + 1
        assert empty == 2 + 1

    def test_growth_by_added_rows_and_columns(self):
        rho = np.zeros((6, 1)); rho[:2] = 1
        kappa = np.zeros((5, 1)); kappa[:2] = 1
        d0 = aic_parameter_count(rho, kappa)
        rho2 = rho.copy(); rho2[2:5] = 1       # +3 rows
        kappa2 = kappa.copy(); kappa2[2:4] = 1  # +2 columns
        assert aic_parameter_count(rho2, kappa2) == d0 + 5


class TestThresholdMemberships:
    def test_boundary_probability_included(self):
        out = threshold_memberships(np.array([[0.5], [0.4]]),
                                    np.array([[0.5]]), 0.5)
        assert out == [Bicluster(frozenset({0}), frozenset({0}))]

    def test_all_zero_probabilities_give_empty_set(self):
        with pytest.warns(UserWarning):
            out = threshold_memberships(np.zeros((3, 1)), np.zeros((2, 1)), 0.5)
        assert out == []

    def test_selects_above_threshold_only(self):
        out = threshold_memberships(np.array([[0.9], [0.2]]),
                                    np.array([[0.8], [0.7]]), 0.5)
        assert out[0].rows == frozenset({0})
        assert out[0].cols == frozenset({0, 1})

    def test_empty_layer_dropped_with_warning(self):
        probs_r = np.array([[0.9, 0.1], [0.8, 0.2]])
        probs_c = np.array([[0.9, 0.9], [0.9, 0.9]])
        with pytest.warns(UserWarning, match="dropped"):
            out = threshold_memberships(probs_r, probs_c, 0.5)
        assert len(out) == 1

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            threshold_memberships(np.zeros((2, 1)), np.zeros((2, 1)), 1.5)
        with pytest.raises(ValueError):
            threshold_memberships(np.array([[1.2]]), np.array([[0.5]]), 0.5)
        with pytest.raises(ValueError):
            threshold_memberships(np.zeros((2, 1)), np.zeros((2, 2)), 0.5)

    def test_from_hard_labels(self):
        out = biclusters_from_labels(np.array([[1], [0], [1]]),
                                     np.array([[0], [1]]))
        assert out == [Bicluster(frozenset({0, 2}), frozenset({1}))]


class TestF1:
    def test_identical(self):
        a = Bicluster(frozenset({0, 1}), frozenset({2, 3}))
        assert f1_pair(a, a) == (1.0, 1.0, 1.0)

    def test_nested_two_by_three_case(self):
        a = Bicluster(frozenset({0, 1}), frozenset({0, 1}))
        b = Bicluster(frozenset({0, 1}), frozenset({0, 1, 2}))
        recall, precision, f1 = f1_pair(a, b)
        assert recall == pytest.approx(4.0 / 6.0)
        assert precision == pytest.approx(1.0)
        assert f1 == pytest.approx(0.8)
        assert f1_pair(b, a)[2] == pytest.approx(0.8)  # F1 symmetric

    def test_disjoint_rows(self):
        a = Bicluster(frozenset({0}), frozenset({0}))
        b = Bicluster(frozenset({1}), frozenset({0}))
        assert f1_pair(a, b) == (0.0, 0.0, 0.0)

    def test_empty_bicluster_rejected(self):
        with pytest.raises(ValueError):
            Bicluster(frozenset(), frozenset({0}))

    def test_average_identity(self):
        m = [Bicluster(frozenset({0}), frozenset({0})),
             Bicluster(frozenset({1, 2}), frozenset({1}))]
        assert f1_average(m, m) == pytest.approx(1.0)

    def test_average_single_pair(self):
        a = Bicluster(frozenset({0, 1}), frozenset({0, 1}))
        b = Bicluster(frozenset({0, 1}), frozenset({0, 1, 2}))
        assert f1_average([a], [b]) == pytest.approx(0.8)

    def test_average_unchanged_by_extra_candidates(self):
        a = Bicluster(frozenset({0, 1}), frozenset({0, 1}))
        b = Bicluster(frozenset({0, 1}), frozenset({0, 1, 2}))
        extra = Bicluster(frozenset({9}), frozenset({9}))
        assert f1_average([a], [b, extra]) == f1_average([a], [b])

    def test_average_rejects_empty_sets(self):
        a = Bicluster(frozenset({0}), frozenset({0}))
        with pytest.raises(ValueError):
            f1_average([], [a])
        with pytest.raises(ValueError):
            f1_average([a], [])

    def test_f1_is_harmonic_mean_of_recall_precision(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            rows_a = frozenset(rng.choice(8, size=rng.integers(1, 6),
                                          replace=False).tolist())
            cols_a = frozenset(rng.choice(6, size=rng.integers(1, 5),
                                          replace=False).tolist())
            rows_b = frozenset(rng.choice(8, size=rng.integers(1, 6),
                                          replace=False).tolist())
            cols_b = frozenset(rng.choice(6, size=rng.integers(1, 5),
                                          replace=False).tolist())
            a, b = Bicluster(rows_a, cols_a), Bicluster(rows_b, cols_b)
            recall, precision, f1 = f1_pair(a, b)
            if recall + precision > 0:
                assert f1 == pytest.approx(
                    2 * recall * precision / (recall + precision))
            else:
                assert f1 == 0.0


class TestRelativeRedundancy:
    def test_identical(self):
        a = Bicluster(frozenset({0, 1}), frozenset({0}))
        assert relative_redundancy(a, a, "rows") == 1.0

    def test_disjoint(self):
        a = Bicluster(frozenset({0, 1}), frozenset({0}))
        b = Bicluster(frozenset({2, 3}), frozenset({0}))
        assert relative_redundancy(a, b, "rows") == 0.0

    def test_partial_overlap(self):
        a = Bicluster(frozenset({0, 1, 2, 3}), frozenset({0}))
        b = Bicluster(frozenset({0, 1}), frozenset({0}))
        assert relative_redundancy(a, b, "rows") == pytest.approx(0.75)

    def test_columns_dimension(self):
        a = Bicluster(frozenset({0}), frozenset({0, 1, 2, 3}))
        b = Bicluster(frozenset({0}), frozenset({0, 1}))
        assert relative_redundancy(a, b, "columns") == pytest.approx(0.75)

    def test_invalid_dimension(self):
        a = Bicluster(frozenset({0}), frozenset({0}))
        with pytest.raises(ValueError):
            relative_redundancy(a, a, "cells")

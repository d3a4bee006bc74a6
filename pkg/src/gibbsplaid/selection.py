"""Model choice and evaluation: MAP extraction, DIC_c/AIC, F1, redundancy."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .engine import SamplerTrace, TraceRecord


@dataclass(frozen=True)
class Bicluster:
    """An index-set bicluster: a set of rows crossed with a set of columns."""

    rows: frozenset
    cols: frozenset

    def __post_init__(self):
        object.__setattr__(self, "rows", frozenset(int(r) for r in self.rows))
        object.__setattr__(self, "cols", frozenset(int(c) for c in self.cols))
        if not self.rows or not self.cols:
            raise ValueError("bicluster must be non-empty in both dimensions")

    @property
    def size(self) -> int:
        return len(self.rows) * len(self.cols)


BiclusterSet = list


def map_estimate(trace: SamplerTrace) -> TraceRecord:
    """Retained sample with the highest joint log-posterior (earliest on ties)."""
    if not trace.records:
        raise ValueError("trace is empty")
    lp = trace.logposts()
    return trace.records[int(np.argmax(lp))]


def dic_c(trace: SamplerTrace) -> tuple[float, float]:
    """Conditional DIC and its effective dimension p_c from a trace.

    Expectations are trace averages of the log-likelihood; the plug-in term
    uses the log-likelihood at the MAP sample.
    """
    if not trace.records:
        raise ValueError("trace is empty")
    mean_ll = float(trace.logliks().mean())
    map_ll = map_estimate(trace).loglik
    p_c = -2.0 * mean_ll + 2.0 * map_ll
    return -4.0 * mean_ll + 2.0 * map_ll, p_c


def aic_parameter_count(rho: np.ndarray, kappa: np.ndarray) -> int:
    """Free parameters at a label snapshot: mu0, sigma^2, K means and the
    identifiable sum-to-zero effects (r_k - 1) + (c_k - 1) per bicluster."""
    r = np.asarray(rho).sum(axis=0)
    c = np.asarray(kappa).sum(axis=0)
    K = r.size
    return int(2 + K + np.maximum(r - 1, 0).sum() + np.maximum(c - 1, 0).sum())


def aic(map_record: TraceRecord) -> float:
    """AIC evaluated at the MAP sample: -2 loglik + 2 d."""
    d = aic_parameter_count(map_record.rho, map_record.kappa)
    return -2.0 * map_record.loglik + 2.0 * d


def threshold_memberships(prob_rows: np.ndarray, prob_cols: np.ndarray,
                          threshold: float = 0.5) -> list[Bicluster]:
    """Biclusters from marginal membership probabilities (inclusive threshold).

    Biclusters empty in either dimension are dropped with a warning.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    prob_rows = np.asarray(prob_rows, dtype=float)
    prob_cols = np.asarray(prob_cols, dtype=float)
    if (prob_rows.min(initial=0.0) < 0 or prob_rows.max(initial=0.0) > 1
            or prob_cols.min(initial=0.0) < 0 or prob_cols.max(initial=0.0) > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    if prob_rows.shape[1] != prob_cols.shape[1]:
        raise ValueError("row and column probabilities disagree on K")
    out = []
    for k in range(prob_rows.shape[1]):
        rows = np.flatnonzero(prob_rows[:, k] >= threshold)
        cols = np.flatnonzero(prob_cols[:, k] >= threshold)
        if rows.size and cols.size:
            out.append(Bicluster(frozenset(rows.tolist()), frozenset(cols.tolist())))
        else:
            warnings.warn(f"bicluster {k} empty at threshold {threshold}; dropped",
                          stacklevel=2)
    return out


def biclusters_from_labels(rho: np.ndarray, kappa: np.ndarray) -> list[Bicluster]:
    """Bicluster set from hard 0/1 label matrices, dropping empty layers."""
    return threshold_memberships(np.asarray(rho, dtype=float),
                                 np.asarray(kappa, dtype=float), 0.5)


def f1_pair(a: Bicluster, b: Bicluster) -> tuple[float, float, float]:
    """(recall, precision, F1) of bicluster a against b.

    The shared block has r rows and c columns; recall divides by |b|,
    precision by |a|, and F1 = 2rc / (|a| + |b|).
    """
    shared = len(a.rows & b.rows) * len(a.cols & b.cols)
    recall = shared / b.size
    precision = shared / a.size
    f1 = 2.0 * shared / (a.size + b.size)
    return recall, precision, f1


def f1_average(m1: list, m2: list) -> float:
    """Mean over m1 of the best F1 match in m2 (not symmetric in general)."""
    if not m1 or not m2:
        raise ValueError("bicluster sets must be non-empty")
    return float(np.mean([max(f1_pair(a, b)[2] for b in m2) for a in m1]))


def relative_redundancy(a: Bicluster, b: Bicluster, dimension: str = "rows") -> float:
    """Average of the two shared-fraction ratios along one dimension."""
    if dimension == "rows":
        sa, sb = a.rows, b.rows
    elif dimension == "columns":
        sa, sb = a.cols, b.cols
    else:
        raise ValueError("dimension must be 'rows' or 'columns'")
    shared = len(sa & sb)
    return 0.5 * (shared / len(sa) + shared / len(sb))

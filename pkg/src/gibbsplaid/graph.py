"""Relational graphs: r-nearest-neighbor construction, edge weights and grids.

Graphs carry the pairwise distances between genes (or conditions); the label
prior couples neighbors through temperature-scaled Gaussian-kernel weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RelationalGraph:
    """Sparse undirected weighted graph with a fixed kernel bandwidth."""

    n_nodes: int
    edges_i: np.ndarray
    edges_j: np.ndarray
    distances: np.ndarray
    bandwidth: float

    def __post_init__(self):
        ei = np.asarray(self.edges_i, dtype=np.intp)
        ej = np.asarray(self.edges_j, dtype=np.intp)
        d = np.asarray(self.distances, dtype=float)
        if not (ei.shape == ej.shape == d.shape) or ei.ndim != 1:
            raise ValueError("edge arrays must be 1-D and of equal length")
        if ei.size:
            if np.any(ei == ej):
                raise ValueError("self-loops are not allowed")
            if ei.min() < 0 or max(ei.max(), ej.max()) >= self.n_nodes:
                raise ValueError("edge endpoint out of range")
            lo, hi = np.minimum(ei, ej), np.maximum(ei, ej)
            if len({(a, b) for a, b in zip(lo.tolist(), hi.tolist())}) != ei.size:
                raise ValueError("duplicate undirected edges")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("edge distances must be finite and non-negative")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        object.__setattr__(self, "edges_i", ei)
        object.__setattr__(self, "edges_j", ej)
        object.__setattr__(self, "distances", d)

    @property
    def n_edges(self) -> int:
        return self.edges_i.size

    def kernel_weights(self, sigma: float | None = None) -> np.ndarray:
        """Per-edge kernel exp(-d^2 / (2 sigma^2)); multiply by 1/T for the coupling."""
        s = self.bandwidth if sigma is None else float(sigma)
        if not s > 0:
            raise ValueError("sigma must be positive")
        return np.exp(-0.5 * (self.distances / s) ** 2)


@dataclass(frozen=True)
class TemperatureGrid:
    """Strictly increasing grid of positive temperatures."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise ValueError("temperature grid must be non-empty")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("temperatures must be positive and finite")
        if v.size > 1 and np.any(np.diff(v) <= 0):
            raise ValueError("temperatures must be strictly increasing")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size


def edge_weight(d, T, sigma):
    """Coupling weight (1/T) exp(-d^2 / (2 sigma^2)) of an edge at distance d."""
    if not T > 0:
        raise ValueError("temperature must be positive")
    if not sigma > 0:
        raise ValueError("bandwidth must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    w = np.exp(-0.5 * (d / sigma) ** 2) / T
    return float(w) if w.ndim == 0 else w


def _validated_distances(distances: np.ndarray) -> np.ndarray:
    D = np.asarray(distances, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix contains non-finite values")
    if not np.allclose(D, D.T, atol=1e-12):
        raise ValueError("distance matrix must be symmetric")
    if not np.allclose(np.diag(D), 0.0, atol=1e-12):
        raise ValueError("distance matrix must have a zero diagonal")
    if np.any(D < 0):
        raise ValueError("distances must be non-negative")
    return D


def avg_nn_bandwidth(distances: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean over nodes of the distance to each node's nearest eligible neighbor."""
    D = _validated_distances(distances)
    n = D.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    work = D.copy()
    np.fill_diagonal(work, np.inf)
    if mask is not None:
        work[~np.asarray(mask, dtype=bool)] = np.inf
    mins = work.min(axis=1)
    if np.any(np.isinf(mins)):
        raise ValueError("some node has no eligible neighbor")
    sigma = float(mins.mean())
    if sigma <= 0:
        raise ValueError("degenerate distances: all nearest-neighbor distances are zero")
    return sigma


def build_knn_graph(distances: np.ndarray, r: int,
                    mask: np.ndarray | None = None) -> RelationalGraph:
    """r-nearest-neighbor graph, symmetrized by union of neighbor relations.

    Ties are broken by ascending node index.  ``mask`` (boolean, symmetric)
    restricts which pairs are eligible as neighbors; ineligible pairs never
    become edges.  The kernel bandwidth is fixed at the average
    nearest-neighbor distance of the eligible pairs.
    """
    D = _validated_distances(distances)
    n = D.shape[0]
    if not 1 <= r < n:
        raise ValueError(f"r={r} out of range for n={n}")
    work = D.copy()
    np.fill_diagonal(work, np.inf)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != D.shape:
            raise ValueError("mask shape does not match distances")
        work[~mask] = np.inf
    sigma = avg_nn_bandwidth(D, mask=mask)
    pairs: set[tuple[int, int]] = set()
    for i in range(n):
        order = np.argsort(work[i], kind="stable")[:r]
        for j in order.tolist():
            if np.isinf(work[i, j]):
                break
            pairs.add((i, j) if i < j else (j, i))
    edges = sorted(pairs)
    ei = np.array([e[0] for e in edges], dtype=np.intp)
    ej = np.array([e[1] for e in edges], dtype=np.intp)
    return RelationalGraph(n, ei, ej, D[ei, ej], sigma)


def correlation_distance(j: int, jp: int, xi: float) -> float:
    """Distance between conditions j, j': 2(1 - xi^|j-j'|) within lag 3, else 0."""
    if not 0 < xi < 1:
        raise ValueError("xi must be in (0, 1)")
    lag = abs(int(j) - int(jp))
    if lag > 3:
        return 0.0
    return 2.0 * (1.0 - xi ** lag)


def correlation_distance_matrix(q: int, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense condition distances plus the eligibility mask for the band |lag| <= 3.

    Pairs beyond lag 3 have printed distance 0 but are never edges (a zero
    distance would read as maximal similarity, contradicting intent), so they
    are masked out of neighbor selection.
    """
    idx = np.arange(q)
    lag = np.abs(idx[:, None] - idx[None, :])
    D = np.where(lag <= 3, 2.0 * (1.0 - float(xi) ** lag), 0.0)
    np.fill_diagonal(D, 0.0)
    mask = (lag <= 3) & (lag > 0)
    if not 0 < xi < 1:
        raise ValueError("xi must be in (0, 1)")
    return D, mask


def build_temperature_grid(t_min: float, t_max: float, m: int,
                           spacing: str = "geometric") -> TemperatureGrid:
    """Grid of m temperatures spanning [t_min, t_max], linear or geometric."""
    if m < 1:
        raise ValueError("grid size must be at least 1")
    if not 0 < t_min <= t_max:
        raise ValueError("need 0 < t_min <= t_max")
    if m == 1:
        if t_min != t_max:
            raise ValueError("a single-point grid requires t_min == t_max")
        return TemperatureGrid(np.array([t_min]))
    if t_min == t_max:
        raise ValueError("t_min must be < t_max when m > 1")
    if spacing == "linear":
        vals = np.linspace(t_min, t_max, m)
    elif spacing == "geometric":
        vals = np.geomspace(t_min, t_max, m)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    return TemperatureGrid(vals)

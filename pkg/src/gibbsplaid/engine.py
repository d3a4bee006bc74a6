"""Posterior sampler: Swendsen-Wang label blocks, Wang-Landau temperature
moves with an adaptive normalizing-weight table, and conjugate parameter
updates.

One chain iteration performs, in order: a temperature move on the gene side,
a temperature move on the condition side, the adaptive log-weight update, a
Swendsen-Wang sweep over all bicluster label vectors (genes, then
conditions), and a full conjugate Gibbs scan of the plaid parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, gammaln

from .core import (BiclusterState, ExpressionMatrix, Hyperparameters, LOG_2PI,
                   PlaidParameters, constrained_cond_effects,
                   constrained_gene_effects, log_likelihood, mean_surface,
                   partial_residuals)
from .graph import RelationalGraph, TemperatureGrid, build_temperature_grid

DEFAULT_T_MIN = 0.5
DEFAULT_T_MAX = 5.0
DEFAULT_T_COUNT = 10


@dataclass
class ChainConfig:
    """Sampler settings: sizes, schedule constants and hyperparameters."""

    K: int
    max_iters: int
    burn_in: int = 0
    thin: int = 1
    rng_seed: int = 0
    hyper: Hyperparameters = field(default_factory=Hyperparameters)
    grid_rho: TemperatureGrid | None = None
    grid_kappa: TemperatureGrid | None = None
    flatness_fraction: float = 0.8
    flatness_min_mean: float = 20.0
    gamma_floor_coef: float = 0.0001
    gamma_floor_exp: float = 0.7

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.max_iters <= self.burn_in or self.burn_in < 0:
            raise ValueError("need max_iters > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if not 0 < self.flatness_fraction < 1:
            raise ValueError("flatness_fraction must be in (0, 1)")
        if self.gamma_floor_coef <= 0:
            raise ValueError("gamma_floor_coef must be positive")


@dataclass
class WangLandauState:
    """Adaptive state of the temperature chain.

    ``log_psi`` holds the log normalizing-weight table over the temperature
    grid; ``visits`` is the within-epoch histogram used for the flatness
    test, ``visits_total`` the never-reset histogram.
    """

    grid_rho: TemperatureGrid
    grid_kappa: TemperatureGrid
    log_psi: np.ndarray
    visits: np.ndarray
    visits_total: np.ndarray
    gamma: float = 1.0
    epoch: int = 0
    floor_active: bool = False
    idx_rho: int = 0
    idx_kappa: int = 0

    @classmethod
    def initial(cls, grid_rho: TemperatureGrid, grid_kappa: TemperatureGrid) -> "WangLandauState":
        shape = (grid_rho.size, grid_kappa.size)
        return cls(grid_rho, grid_kappa,
                   log_psi=np.zeros(shape),
                   visits=np.zeros(shape, dtype=np.int64),
                   visits_total=np.zeros(shape, dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_psi.shape

    def normalized_psi(self) -> np.ndarray:
        shifted = self.log_psi - self.log_psi.max()
        w = np.exp(shifted)
        return w / w.sum()


def propose_temperature(idx: int, m: int, rng) -> tuple[int, float]:
    """Adjacent-cell proposal on a grid of size m.

    Returns the proposed index and log of q(cur|prop)/q(prop|cur); boundary
    cells propose their single neighbor with probability one, interior cells
    move up or down with probability one half each.
    """
    if m < 1:
        raise ValueError("grid size must be at least 1")
    if m == 1:
        return idx, 0.0
    if idx == 0:
        prop, fwd = 1, 1.0
    elif idx == m - 1:
        prop, fwd = m - 2, 1.0
    else:
        prop = idx + 1 if rng.random() < 0.5 else idx - 1
        fwd = 0.5
    bwd = 1.0 if prop in (0, m - 1) else 0.5
    return prop, math.log(bwd / fwd)


def bond_probability(weight: float, same_label: bool, is_edge: bool) -> float:
    """Freezing probability (1 - e^{-B}) for same-label neighbors, else 0."""
    if weight < 0:
        raise ValueError("edge weight must be non-negative")
    if not (same_label and is_edge):
        return 0.0
    return float(-np.expm1(-weight))


def swendsen_wang_update(n: int, edges_i: np.ndarray, edges_j: np.ndarray,
                         p_freeze: np.ndarray, labels: np.ndarray,
                         fld: np.ndarray, rng) -> np.ndarray:
    """One Swendsen-Wang block update of a binary label vector.

    Bonds on same-label edges freeze independently with ``p_freeze``; frozen
    bonds glue nodes into connected components, and each component draws a
    fresh label with 1-to-0 log-odds equal to the component's field sum.
    """
    n_edges = edges_i.size
    if n_edges:
        same = labels[edges_i] == labels[edges_j]
        frozen = same & (rng.random(n_edges) < p_freeze)
        parent = np.arange(n, dtype=np.intp)
        if frozen.any():
            par = parent  # local alias, hot loop
            for a, b in zip(edges_i[frozen].tolist(), edges_j[frozen].tolist()):
                while par[a] != a:
                    par[a] = par[par[a]]
                    a = par[a]
                while par[b] != b:
                    par[b] = par[par[b]]
                    b = par[b]
                if a != b:
                    # union by minimum index: the component root is its smallest node
                    if a < b:
                        par[b] = a
                    else:
                        par[a] = b
            # full path compression by repeated pointer jumping
            while True:
                grand = par[par]
                if np.array_equal(grand, par):
                    break
                par = grand
            roots = par
        else:
            roots = parent
        comp_sum = np.bincount(roots, weights=fld, minlength=n)
        u = rng.random(n)
        return (u[roots] < expit(comp_sum[roots])).astype(np.int8)
    # edgeless graph: independent logistic draws
    return (rng.random(n) < expit(fld)).astype(np.int8)


def same_label_kernel_sum(labels: np.ndarray, edges_i: np.ndarray,
                          edges_j: np.ndarray, kernel_w: np.ndarray) -> float:
    """Sum over biclusters and edges of the kernel weight on same-label pairs."""
    if edges_i.size == 0:
        return 0.0
    same = labels[edges_i, :] == labels[edges_j, :]
    return float(kernel_w @ same.sum(axis=1))


def wl_accept_temperature(side: str, prop_idx: int, log_ratio: float,
                          wl: WangLandauState, kernel_sum: float, rng) -> bool:
    """Metropolis accept/reject of a proposed temperature-grid cell.

    ``kernel_sum`` is the label-dependent energy sum at unit inverse
    temperature; the coupling difference is kernel_sum * (1/T' - 1/T).
    The acceptance ratio folds in the proposal ratio and the inverse ratio
    of the adaptive weights.  The current index is updated on acceptance.
    """
    if side == "rho":
        cur_idx, grid = wl.idx_rho, wl.grid_rho
        cur_cell, prop_cell = (wl.idx_rho, wl.idx_kappa), (prop_idx, wl.idx_kappa)
    elif side == "kappa":
        cur_idx, grid = wl.idx_kappa, wl.grid_kappa
        cur_cell, prop_cell = (wl.idx_rho, wl.idx_kappa), (wl.idx_rho, prop_idx)
    else:
        raise ValueError("side must be 'rho' or 'kappa'")
    if prop_idx == cur_idx:
        return False
    t_cur = grid.values[cur_idx]
    t_prop = grid.values[prop_idx]
    log_alpha = (log_ratio
                 + wl.log_psi[cur_cell] - wl.log_psi[prop_cell]
                 + kernel_sum * (1.0 / t_prop - 1.0 / t_cur))
    if log_alpha >= 0.0 or math.log(rng.random()) < log_alpha:
        if side == "rho":
            wl.idx_rho = prop_idx
        else:
            wl.idx_kappa = prop_idx
        return True
    return False


def update_log_psi(wl: WangLandauState, cell: tuple[int, int] | None = None) -> None:
    """Stochastic-approximation step: raise the visited cell, lower the rest.

    Adds gamma * (1{cell} - 1/(mn)) to every cell of the log table; the
    increments sum to zero by construction.
    """
    if cell is None:
        cell = (wl.idx_rho, wl.idx_kappa)
    m, n = wl.shape
    wl.log_psi -= wl.gamma / (m * n)
    wl.log_psi[cell] += wl.gamma


def gamma_schedule(wl: WangLandauState, t: int, config: ChainConfig) -> float:
    """Advance the adaptation gain at iteration t.

    Within an epoch gamma is constant.  When the within-epoch histogram is
    flat (minimum count >= flatness_fraction * mean, with a minimum mean
    count so tiny histograms do not trigger spuriously) the gain halves, the
    histogram resets and a new epoch starts.  Once the halving sequence drops
    below the polynomial floor coef/t^exp, the floor is used thereafter.
    """
    if t < 1:
        raise ValueError("iteration index must be >= 1")
    visits = wl.visits
    mean = visits.mean()
    if mean >= config.flatness_min_mean and visits.min() >= config.flatness_fraction * mean:
        wl.epoch += 1
        visits[:] = 0
    candidate = 0.5 ** wl.epoch
    floor = config.gamma_floor_coef / t ** config.gamma_floor_exp
    if wl.floor_active or candidate < floor:
        wl.floor_active = True
        wl.gamma = floor
    else:
        wl.gamma = candidate
    return wl.gamma


def _gene_field(z: np.ndarray, kappa_k: np.ndarray, mu_k: float,
                alpha_k: np.ndarray, beta_k: np.ndarray, sigma2: float,
                offsets: np.ndarray) -> np.ndarray:
    shift = mu_k + alpha_k[:, None] + beta_k[None, :]
    # (z - shift)^2 - z^2 = shift * (shift - 2 z)
    diff = shift * (shift - 2.0 * z)
    return offsets - 0.5 / sigma2 * (diff @ kappa_k)


def _cond_field(z: np.ndarray, rho_k: np.ndarray, mu_k: float,
                alpha_k: np.ndarray, beta_k: np.ndarray, sigma2: float,
                offsets: np.ndarray) -> np.ndarray:
    shift = mu_k + alpha_k[:, None] + beta_k[None, :]
    diff = shift * (shift - 2.0 * z)
    return offsets - 0.5 / sigma2 * (rho_k @ diff)


def compute_field(y: ExpressionMatrix, state: BiclusterState,
                  params: PlaidParameters, hyper: Hyperparameters, k: int,
                  side: str = "genes") -> np.ndarray:
    """Singleton field of the label full conditional for bicluster k.

    For genes this is A_ik = a_i - (1/(2 sigma^2)) sum_j kappa_jk
    [(z_ijk - mu_k - alpha_ik - beta_jk)^2 - z_ijk^2]; the condition side is
    the symmetric counterpart.
    """
    z = partial_residuals(y, state, params, k)
    alpha = constrained_gene_effects(state, params)[:, k]
    beta = constrained_cond_effects(state, params)[:, k]
    if side == "genes":
        out = _gene_field(z, state.kappa[:, k].astype(float), params.mu[k],
                          alpha, beta, params.sigma2, hyper.gene_offsets(y.p))
    elif side == "conditions":
        out = _cond_field(z, state.rho[:, k].astype(float), params.mu[k],
                          alpha, beta, params.sigma2, hyper.cond_offsets(y.q))
    else:
        raise ValueError("side must be 'genes' or 'conditions'")
    if not np.all(np.isfinite(out)):
        raise ValueError("field computation produced non-finite values")
    return out


# ---------------------------------------------------------------------------
# Conjugate parameter updates
# ---------------------------------------------------------------------------

def sample_mu0(y: ExpressionMatrix, state: BiclusterState, params: PlaidParameters,
               hyper: Hyperparameters, rng) -> float:
    """Draw mu0 from its Normal full conditional."""
    layers = mean_surface(state, params) - params.mu0
    e = y.values - layers
    n = e.size
    prec = n / params.sigma2 + 1.0 / hyper.sigma2_mu0
    mean = (e.sum() / params.sigma2) / prec
    return float(rng.normal(mean, math.sqrt(1.0 / prec)))


def sample_sigma2(y: ExpressionMatrix, state: BiclusterState, params: PlaidParameters,
                  hyper: Hyperparameters, rng) -> float:
    """Draw sigma^2 from its scaled-inverse-chi-squared full conditional."""
    resid = y.values - mean_surface(state, params)
    ssr = float(np.sum(resid * resid))
    if not np.isfinite(ssr):
        raise ValueError("non-finite residual sum of squares")
    df = hyper.nu + resid.size
    scale = (hyper.nu * hyper.s2 + ssr) / df
    return float(df * scale / rng.chisquare(df))


def _center_col(raw_col: np.ndarray, labels_col: np.ndarray) -> np.ndarray:
    """Center one raw effect column by its member mean (zero if no members)."""
    m = labels_col.sum()
    if m == 0:
        return raw_col
    return raw_col - float(raw_col @ labels_col) / m


def _layer_matrix(rho_k: np.ndarray, kappa_k: np.ndarray, mu_k: float,
                  alpha_k: np.ndarray, beta_k: np.ndarray) -> np.ndarray:
    """Contribution of one bicluster layer to the mean surface."""
    return (np.outer(rho_k * (mu_k + alpha_k), kappa_k)
            + np.outer(rho_k, kappa_k * beta_k))


def _total_layers(state: BiclusterState, params: PlaidParameters) -> np.ndarray:
    """Sum of all layer contributions (the mean surface minus mu0)."""
    rho = state.rho.astype(float)
    kappa = state.kappa.astype(float)
    alpha = constrained_gene_effects(state, params)
    beta = constrained_cond_effects(state, params)
    return (rho * (params.mu[None, :] + alpha)) @ kappa.T + rho @ (kappa * beta).T


def _sample_effect_block(resid_sums: np.ndarray, n_other: int, sigma2: float,
                         prior_var: float, rng) -> np.ndarray:
    """Draw the member block of a raw effect vector.

    The likelihood acts through the centering projection, so the posterior
    splits: the centered part has variance 1/(n_other/sigma2 + 1/prior_var)
    around the scaled centered residual sums, while the all-ones direction
    keeps its prior.
    """
    m = resid_sums.size
    v1 = 1.0 / (n_other / sigma2 + 1.0 / prior_var)
    mean = v1 * (resid_sums - resid_sums.mean()) / sigma2
    eps = rng.normal(size=m)
    ebar = eps.mean()
    return mean + math.sqrt(v1) * (eps - ebar) + math.sqrt(prior_var) * ebar


def gibbs_update_parameters(y: ExpressionMatrix, state: BiclusterState,
                            params: PlaidParameters, hyper: Hyperparameters,
                            rng) -> PlaidParameters:
    """One full conjugate Gibbs scan over (mu0, mu_k, a_k, b_k, sigma^2).

    Non-member raw effects have no likelihood term, so they are refreshed
    from their prior.  Constrained effects stay sum-to-zero over members by
    construction (centering is applied wherever they are used).
    """
    params = params.copy()
    p, q = y.values.shape
    layers = _total_layers(state, params)
    # overall mean
    e = y.values - layers
    prec0 = e.size / params.sigma2 + 1.0 / hyper.sigma2_mu0
    params.mu0 = float(rng.normal((e.sum() / params.sigma2) / prec0,
                                  math.sqrt(1.0 / prec0)))
    y0 = y.values - params.mu0
    for k in range(state.K):
        rho_k = state.rho[:, k].astype(float)
        kappa_k = state.kappa[:, k].astype(float)
        members_i = np.flatnonzero(state.rho[:, k])
        members_j = np.flatnonzero(state.kappa[:, k])
        r_k, c_k = members_i.size, members_j.size
        n_k = r_k * c_k
        alpha_k = _center_col(params.raw_gene_effects[:, k], rho_k)
        beta_k = _center_col(params.raw_cond_effects[:, k], kappa_k)
        old_layer = _layer_matrix(rho_k, kappa_k, params.mu[k], alpha_k, beta_k)
        z = y0 - layers + old_layer
        # bicluster mean
        prec = n_k / params.sigma2 + 1.0 / hyper.sigma2_mu
        if n_k:
            w = z - alpha_k[:, None] - beta_k[None, :]
            total = float(rho_k @ w @ kappa_k)
        else:
            total = 0.0
        params.mu[k] = rng.normal((total / params.sigma2) / prec, math.sqrt(1.0 / prec))
        # gene effects
        new_a = rng.normal(0.0, math.sqrt(hyper.sigma2_alpha), size=p)
        if n_k:
            g = ((z - params.mu[k] - beta_k[None, :]) @ kappa_k)[members_i]
            new_a[members_i] = _sample_effect_block(g, c_k, params.sigma2,
                                                    hyper.sigma2_alpha, rng)
        params.raw_gene_effects[:, k] = new_a
        alpha_k = _center_col(new_a, rho_k)
        # condition effects
        new_b = rng.normal(0.0, math.sqrt(hyper.sigma2_beta), size=q)
        if n_k:
            h = (rho_k @ (z - params.mu[k] - alpha_k[:, None]))[members_j]
            new_b[members_j] = _sample_effect_block(h, r_k, params.sigma2,
                                                    hyper.sigma2_beta, rng)
        params.raw_cond_effects[:, k] = new_b
        beta_k = _center_col(new_b, kappa_k)
        layers += _layer_matrix(rho_k, kappa_k, params.mu[k], alpha_k, beta_k) - old_layer
    # noise variance
    resid = y0 - layers
    ssr = float(np.sum(resid * resid))
    if not np.isfinite(ssr):
        raise ValueError("non-finite residual sum of squares")
    df = hyper.nu + resid.size
    scale = (hyper.nu * hyper.s2 + ssr) / df
    params.sigma2 = float(df * scale / rng.chisquare(df))
    return params


# ---------------------------------------------------------------------------
# Joint log-posterior (for MAP extraction)
# ---------------------------------------------------------------------------

def log_scaled_inv_chi2(x: float, nu: float, s2: float) -> float:
    """Log density of the scaled-inverse-chi-squared(nu, s2) distribution."""
    if x <= 0:
        return -math.inf
    half = 0.5 * nu
    return (half * math.log(half * s2) - float(gammaln(half))
            - (1.0 + half) * math.log(x) - half * s2 / x)


def _log_normal(x, var) -> float:
    x = np.asarray(x, dtype=float)
    return float(-0.5 * (LOG_2PI + math.log(var)) * x.size - 0.5 * np.sum(x * x) / var)


def label_prior_logterm(labels: np.ndarray, offsets: np.ndarray,
                        edges_i: np.ndarray, edges_j: np.ndarray,
                        coupling: np.ndarray) -> float:
    """Unnormalized auto-logistic log term summed over the K label vectors."""
    total = float(offsets @ labels.sum(axis=1))
    if edges_i.size:
        same = labels[edges_i, :] == labels[edges_j, :]
        total += float(coupling @ same.sum(axis=1))
    return total


def joint_log_posterior(y: ExpressionMatrix, state: BiclusterState,
                        params: PlaidParameters, hyper: Hyperparameters,
                        wl: WangLandauState,
                        gene_edges: tuple[np.ndarray, np.ndarray, np.ndarray],
                        cond_edges: tuple[np.ndarray, np.ndarray, np.ndarray]) -> float:
    """Unnormalized log of the adaptive joint target at the current state."""
    ll = log_likelihood(y, state, params)
    lp = _log_normal(params.mu0, hyper.sigma2_mu0)
    lp += _log_normal(params.mu, hyper.sigma2_mu)
    for k in range(state.K):
        mi = np.flatnonzero(state.rho[:, k])
        mj = np.flatnonzero(state.kappa[:, k])
        lp += _log_normal(params.raw_gene_effects[mi, k], hyper.sigma2_alpha)
        lp += _log_normal(params.raw_cond_effects[mj, k], hyper.sigma2_beta)
    lp += log_scaled_inv_chi2(params.sigma2, hyper.nu, hyper.s2)
    t_rho = wl.grid_rho.values[wl.idx_rho]
    t_kappa = wl.grid_kappa.values[wl.idx_kappa]
    ei, ej, w = gene_edges
    lp += label_prior_logterm(state.rho, hyper.gene_offsets(y.p), ei, ej, w / t_rho)
    ei, ej, w = cond_edges
    lp += label_prior_logterm(state.kappa, hyper.cond_offsets(y.q), ei, ej, w / t_kappa)
    return ll + lp - float(wl.log_psi[wl.idx_rho, wl.idx_kappa])


# ---------------------------------------------------------------------------
# Chain orchestration
# ---------------------------------------------------------------------------

@dataclass
class TraceRecord:
    iteration: int
    loglik: float
    logpost: float
    mu0: float
    mu: np.ndarray
    sigma2: float
    raw_gene_effects: np.ndarray
    raw_cond_effects: np.ndarray
    rho: np.ndarray
    kappa: np.ndarray
    t_rho_idx: int
    t_kappa_idx: int


@dataclass
class SamplerTrace:
    """Retained samples plus the final adaptive state and label marginals."""

    records: list[TraceRecord]
    grid_rho: TemperatureGrid
    grid_kappa: TemperatureGrid
    log_psi: np.ndarray
    visits_epoch: np.ndarray
    visits_total: np.ndarray
    visits_second_half: np.ndarray
    rho_marginal: np.ndarray
    kappa_marginal: np.ndarray
    n_marginal_samples: int

    def logliks(self) -> np.ndarray:
        return np.array([r.loglik for r in self.records])

    def logposts(self) -> np.ndarray:
        return np.array([r.logpost for r in self.records])


def _edge_arrays(graph: RelationalGraph | None, n_expected: int, what: str):
    if graph is None:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty, np.zeros(0)
    if graph.n_nodes != n_expected:
        raise ValueError(f"{what} graph has {graph.n_nodes} nodes, expected {n_expected}")
    return graph.edges_i, graph.edges_j, graph.kernel_weights()


def run_chain(y: ExpressionMatrix, config: ChainConfig,
              gene_graph: RelationalGraph | None = None,
              cond_graph: RelationalGraph | None = None,
              progress=None) -> SamplerTrace:
    """Run one chain; deterministic given the config seed.

    An absent graph on either side means independent labels there: couplings
    are zero and the corresponding temperature grid degenerates to a single
    cell.
    """
    p, q = y.values.shape
    K = config.K
    hyper = config.hyper
    rng = np.random.default_rng(config.rng_seed)

    if gene_graph is not None:
        grid_rho = config.grid_rho or build_temperature_grid(
            DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_T_COUNT)
    else:
        grid_rho = TemperatureGrid(np.array([1.0]))
    if cond_graph is not None:
        grid_kappa = config.grid_kappa or build_temperature_grid(
            DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_T_COUNT)
    else:
        grid_kappa = TemperatureGrid(np.array([1.0]))

    gene_edges = _edge_arrays(gene_graph, p, "gene")
    cond_edges = _edge_arrays(cond_graph, q, "condition")
    gene_offsets = hyper.gene_offsets(p)
    cond_offsets = hyper.cond_offsets(q)

    state = BiclusterState(rng.integers(0, 2, size=(p, K)),
                           rng.integers(0, 2, size=(q, K)))
    # Start every layer mean at an upper quantile of the centered data so the
    # layers attach to elevated signal; a zero start lets the chain fall into
    # sign-mirrored modes (inflated overall mean cancelled by negative layers)
    # that block updates cannot leave.
    mu_start = float(np.quantile(y.values - y.values.mean(), 0.9))
    params = PlaidParameters(
        mu0=float(y.values.mean()),
        mu=np.full(K, mu_start),
        raw_gene_effects=rng.normal(0.0, math.sqrt(hyper.sigma2_alpha), size=(p, K)),
        raw_cond_effects=rng.normal(0.0, math.sqrt(hyper.sigma2_beta), size=(q, K)),
        sigma2=max(float(y.values.var()), hyper.s2),
    )
    wl = WangLandauState.initial(grid_rho, grid_kappa)

    records: list[TraceRecord] = []
    rho_acc = np.zeros((p, K))
    kappa_acc = np.zeros((q, K))
    n_acc = 0
    visits_second_half = np.zeros(wl.shape, dtype=np.int64)
    half_point = config.max_iters // 2

    for t in range(1, config.max_iters + 1):
        # (i)-(ii) temperature moves
        for side, grid, edges, labels in (("rho", grid_rho, gene_edges, state.rho),
                                          ("kappa", grid_kappa, cond_edges, state.kappa)):
            if grid.size > 1:
                cur = wl.idx_rho if side == "rho" else wl.idx_kappa
                prop, log_ratio = propose_temperature(cur, grid.size, rng)
                ks = same_label_kernel_sum(labels, edges[0], edges[1], edges[2])
                wl_accept_temperature(side, prop, log_ratio, wl, ks, rng)
        # (iii) adaptive weight update and gain schedule
        cell = (wl.idx_rho, wl.idx_kappa)
        wl.visits[cell] += 1
        wl.visits_total[cell] += 1
        if t > half_point:
            visits_second_half[cell] += 1
        update_log_psi(wl, cell)
        gamma_schedule(wl, t, config)
        # (iv) Swendsen-Wang label sweep: genes for every bicluster, then conditions
        t_rho = grid_rho.values[wl.idx_rho]
        t_kappa = grid_kappa.values[wl.idx_kappa]
        p_freeze_rho = -np.expm1(-gene_edges[2] / t_rho) if gene_edges[0].size else np.zeros(0)
        p_freeze_kappa = -np.expm1(-cond_edges[2] / t_kappa) if cond_edges[0].size else np.zeros(0)
        y0 = y.values - params.mu0
        layers = _total_layers(state, params)
        for k in range(K):
            rho_k = state.rho[:, k].astype(float)
            kappa_k = state.kappa[:, k].astype(float)
            alpha_k = _center_col(params.raw_gene_effects[:, k], rho_k)
            beta_k = _center_col(params.raw_cond_effects[:, k], kappa_k)
            old_layer = _layer_matrix(rho_k, kappa_k, params.mu[k], alpha_k, beta_k)
            z = y0 - layers + old_layer
            fld = _gene_field(z, kappa_k, params.mu[k], alpha_k, beta_k,
                              params.sigma2, gene_offsets)
            state.rho[:, k] = swendsen_wang_update(p, gene_edges[0], gene_edges[1],
                                                   p_freeze_rho, state.rho[:, k],
                                                   fld, rng)
            rho_k = state.rho[:, k].astype(float)
            alpha_k = _center_col(params.raw_gene_effects[:, k], rho_k)
            layers += _layer_matrix(rho_k, kappa_k, params.mu[k], alpha_k,
                                    beta_k) - old_layer
        for k in range(K):
            rho_k = state.rho[:, k].astype(float)
            kappa_k = state.kappa[:, k].astype(float)
            alpha_k = _center_col(params.raw_gene_effects[:, k], rho_k)
            beta_k = _center_col(params.raw_cond_effects[:, k], kappa_k)
            old_layer = _layer_matrix(rho_k, kappa_k, params.mu[k], alpha_k, beta_k)
            z = y0 - layers + old_layer
            fld = _cond_field(z, rho_k, params.mu[k], alpha_k, beta_k,
                              params.sigma2, cond_offsets)
            state.kappa[:, k] = swendsen_wang_update(q, cond_edges[0], cond_edges[1],
                                                     p_freeze_kappa, state.kappa[:, k],
                                                     fld, rng)
            kappa_k = state.kappa[:, k].astype(float)
            beta_k = _center_col(params.raw_cond_effects[:, k], kappa_k)
            layers += _layer_matrix(rho_k, kappa_k, params.mu[k], alpha_k,
                                    beta_k) - old_layer
        # (v) conjugate parameter scan
        params = gibbs_update_parameters(y, state, params, hyper, rng)

        if t > config.burn_in:
            rho_acc += state.rho
            kappa_acc += state.kappa
            n_acc += 1
            if (t - config.burn_in) % config.thin == 0:
                ll = log_likelihood(y, state, params)
                lp = joint_log_posterior(y, state, params, hyper, wl,
                                         gene_edges, cond_edges)
                records.append(TraceRecord(
                    iteration=t, loglik=ll, logpost=lp,
                    mu0=params.mu0, mu=params.mu.copy(), sigma2=params.sigma2,
                    raw_gene_effects=params.raw_gene_effects.copy(),
                    raw_cond_effects=params.raw_cond_effects.copy(),
                    rho=state.rho.copy(), kappa=state.kappa.copy(),
                    t_rho_idx=wl.idx_rho, t_kappa_idx=wl.idx_kappa))
        if progress is not None and t % 10_000 == 0:
            progress(t, config.max_iters)

    return SamplerTrace(
        records=records,
        grid_rho=grid_rho,
        grid_kappa=grid_kappa,
        log_psi=wl.log_psi.copy(),
        visits_epoch=wl.visits.copy(),
        visits_total=wl.visits_total.copy(),
        visits_second_half=visits_second_half,
        rho_marginal=rho_acc / max(n_acc, 1),
        kappa_marginal=kappa_acc / max(n_acc, 1),
        n_marginal_samples=n_acc,
    )

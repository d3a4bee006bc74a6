"""Plaid model core: data containers, mean surface, residuals and likelihood.

The data matrix is decomposed additively into an overall mean plus K
overlapping bicluster layers.  Each layer contributes a bicluster mean and
sum-to-zero gene/condition effects on the cells it covers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class ExpressionMatrix:
    """A p x q matrix of log-expression values with row/column identifiers."""

    values: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("expression matrix must be 2-D and non-empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("expression matrix contains non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", tuple(str(r) for r in self.row_ids))
        object.__setattr__(self, "col_ids", tuple(str(c) for c in self.col_ids))
        p, q = values.shape
        if len(self.row_ids) != p or len(self.col_ids) != q:
            raise ValueError("id lengths do not match matrix shape")
        if len(set(self.row_ids)) != p:
            raise ValueError("row ids are not unique")
        if len(set(self.col_ids)) != q:
            raise ValueError("column ids are not unique")

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> int:
        return self.values.shape[1]


@dataclass
class BiclusterState:
    """Binary membership matrices: rho (p x K) for genes, kappa (q x K) for conditions."""

    rho: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        self.rho = np.ascontiguousarray(self.rho, dtype=np.int8)
        self.kappa = np.ascontiguousarray(self.kappa, dtype=np.int8)
        if self.rho.ndim != 2 or self.kappa.ndim != 2:
            raise ValueError("rho and kappa must be 2-D")
        if self.rho.shape[1] != self.kappa.shape[1]:
            raise ValueError("rho and kappa disagree on the number of biclusters")
        for name, m in (("rho", self.rho), ("kappa", self.kappa)):
            if not np.isin(m, (0, 1)).all():
                raise ValueError(f"{name} entries must be 0 or 1")

    @property
    def K(self) -> int:
        return self.rho.shape[1]

    def row_counts(self) -> np.ndarray:
        return self.rho.sum(axis=0, dtype=int)

    def col_counts(self) -> np.ndarray:
        return self.kappa.sum(axis=0, dtype=int)

    def sizes(self) -> np.ndarray:
        return self.row_counts() * self.col_counts()

    def copy(self) -> "BiclusterState":
        return BiclusterState(self.rho.copy(), self.kappa.copy())


@dataclass
class PlaidParameters:
    """Plaid parameters with full-length raw effect vectors.

    Raw effects are stored for every gene/condition; the constrained
    (sum-to-zero) effects are obtained by centering over the current members
    of each bicluster, so that no transdimensional bookkeeping is needed when
    labels change.
    """

    mu0: float
    mu: np.ndarray
    raw_gene_effects: np.ndarray
    raw_cond_effects: np.ndarray
    sigma2: float

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float).ravel()
        self.raw_gene_effects = np.asarray(self.raw_gene_effects, dtype=float)
        self.raw_cond_effects = np.asarray(self.raw_cond_effects, dtype=float)
        self.mu0 = float(self.mu0)
        self.sigma2 = float(self.sigma2)
        K = self.mu.size
        if self.raw_gene_effects.ndim != 2 or self.raw_gene_effects.shape[1] != K:
            raise ValueError("raw_gene_effects must be p x K")
        if self.raw_cond_effects.ndim != 2 or self.raw_cond_effects.shape[1] != K:
            raise ValueError("raw_cond_effects must be q x K")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @property
    def K(self) -> int:
        return self.mu.size

    def copy(self) -> "PlaidParameters":
        return PlaidParameters(self.mu0, self.mu.copy(), self.raw_gene_effects.copy(),
                               self.raw_cond_effects.copy(), self.sigma2)


@dataclass
class Hyperparameters:
    """Prior variances, noise prior and label field offsets.

    ``field_gene``/``field_cond`` are the singleton offsets of the
    auto-logistic label priors; ``None`` means all zeros (even prior odds).
    """

    sigma2_mu0: float = 0.5
    sigma2_mu: float = 0.5
    sigma2_alpha: float = 0.5
    sigma2_beta: float = 0.5
    nu: float = 1.0
    s2: float = 0.05
    field_gene: np.ndarray | None = None
    field_cond: np.ndarray | None = None

    def __post_init__(self):
        for name in ("sigma2_mu0", "sigma2_mu", "sigma2_alpha", "sigma2_beta", "nu", "s2"):
            if not float(getattr(self, name)) > 0:
                raise ValueError(f"{name} must be positive")
        if self.field_gene is not None:
            self.field_gene = np.asarray(self.field_gene, dtype=float).ravel()
        if self.field_cond is not None:
            self.field_cond = np.asarray(self.field_cond, dtype=float).ravel()

    def gene_offsets(self, p: int) -> np.ndarray:
        if self.field_gene is None:
            return np.zeros(p)
        if self.field_gene.size != p:
            raise ValueError("field_gene length does not match p")
        return self.field_gene

    def cond_offsets(self, q: int) -> np.ndarray:
        if self.field_cond is None:
            return np.zeros(q)
        if self.field_cond.size != q:
            raise ValueError("field_cond length does not match q")
        return self.field_cond


def project_effects(raw: np.ndarray) -> np.ndarray:
    """Center a raw effect vector so it sums to zero (apply I - (1/m)11')."""
    raw = np.asarray(raw, dtype=float).ravel()
    if raw.size == 0:
        raise ValueError("cannot project an empty effect vector")
    return raw - raw.mean()


def constrained_gene_effects(state: BiclusterState, params: PlaidParameters) -> np.ndarray:
    """Full-length p x K constrained gene effects.

    Each column is the raw column centered by the mean over the *current*
    members, so the member restriction sums to zero; non-member entries carry
    the would-be effect used when proposing new memberships.
    """
    return _center_by_members(params.raw_gene_effects, state.rho)


def constrained_cond_effects(state: BiclusterState, params: PlaidParameters) -> np.ndarray:
    """Full-length q x K constrained condition effects (see gene counterpart)."""
    return _center_by_members(params.raw_cond_effects, state.kappa)


def _center_by_members(raw: np.ndarray, labels: np.ndarray) -> np.ndarray:
    counts = labels.sum(axis=0)
    sums = (raw * labels).sum(axis=0)
    means = np.divide(sums, counts, out=np.zeros_like(sums, dtype=float),
                      where=counts > 0)
    return raw - means[None, :]


def _check_dims(y: ExpressionMatrix, state: BiclusterState, params: PlaidParameters):
    p, q = y.values.shape
    if state.rho.shape[0] != p or state.kappa.shape[0] != q:
        raise ValueError("label matrices do not match data dimensions")
    if params.raw_gene_effects.shape[0] != p or params.raw_cond_effects.shape[0] != q:
        raise ValueError("effect matrices do not match data dimensions")
    if params.K != state.K:
        raise ValueError("parameters and labels disagree on K")


def mean_surface(state: BiclusterState, params: PlaidParameters) -> np.ndarray:
    """The plaid mean: mu0 + sum_k (mu_k + alpha_ik + beta_jk) rho_ik kappa_jk."""
    if params.K != state.K:
        raise ValueError("parameters and labels disagree on K")
    if (params.raw_gene_effects.shape[0] != state.rho.shape[0]
            or params.raw_cond_effects.shape[0] != state.kappa.shape[0]):
        raise ValueError("effect matrices do not match label dimensions")
    rho = state.rho.astype(float)
    kappa = state.kappa.astype(float)
    alpha = constrained_gene_effects(state, params)
    beta = constrained_cond_effects(state, params)
    return (params.mu0
            + (rho * (params.mu[None, :] + alpha)) @ kappa.T
            + rho @ (kappa * beta).T)


def partial_residuals(y: ExpressionMatrix, state: BiclusterState,
                      params: PlaidParameters, k: int) -> np.ndarray:
    """Residuals excluding layer k: z_ijk = y_ij - mu0 - sum_{k' != k} layer_{k'}."""
    _check_dims(y, state, params)
    if not 0 <= k < state.K:
        raise ValueError(f"bicluster index {k} out of range for K={state.K}")
    alpha = constrained_gene_effects(state, params)
    beta = constrained_cond_effects(state, params)
    layer_k = (np.outer(state.rho[:, k], state.kappa[:, k])
               * (params.mu[k] + alpha[:, k][:, None] + beta[:, k][None, :]))
    return y.values - mean_surface(state, params) + layer_k


def log_likelihood(y: ExpressionMatrix, state: BiclusterState,
                   params: PlaidParameters) -> float:
    """Gaussian log-likelihood of the data under the plaid mean surface."""
    _check_dims(y, state, params)
    resid = y.values - mean_surface(state, params)
    n = resid.size
    ll = -0.5 * n * (LOG_2PI + np.log(params.sigma2)) - 0.5 * np.sum(resid * resid) / params.sigma2
    if not np.isfinite(ll):
        raise ValueError("log-likelihood is not finite")
    return float(ll)

"""Closed-form Gaussian oracles for linear drifts and quadratic potentials.

Full Gaussians are ``GaussianState(mean, cov)`` on ``R^{n d}``; product laws
are ``ProductGaussian`` with one ``d``-dimensional factor per coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import integrate, linalg

__all__ = [
    "GaussianState",
    "ProductGaussian",
    "ou_moments_exact",
    "ip_moments_exact",
    "w2_gaussian",
    "kl_gaussian",
    "gibbs_gaussian",
    "log_partition",
    "mean_field_jacobi",
    "stationary_mf_gaussian",
    "projected_fisher_gaussian",
    "fisher_gaussian",
    "entropy_growth_rate_gaussian",
    "perturbed_growth_rate_gaussian",
    "path_entropy_linear_gaussian",
]

_PSD_TOL = 1e-10


def _check_psd(S: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if np.max(np.abs(S - S.T), initial=0.0) > _PSD_TOL * scale:
        raise ValueError(f"{what} is not symmetric")
    if S.size and np.linalg.eigvalsh(S)[0] < -_PSD_TOL * scale:
        raise ValueError(f"{what} is not positive semidefinite")


def _sqrtm_psd(S: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.array(self.mean, dtype=float))
        cov = np.atleast_2d(np.array(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        _check_psd(cov, "covariance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class ProductGaussian:
    """``N(m_1, S_1) x ... x N(m_n, S_n)``.

    ``covs`` may be an ``(n, d, d)`` stack or, for ``d = 1``, a length-``n``
    vector of variances.
    """

    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        covs = np.array(self.covs, dtype=float)
        if covs.ndim == 1:
            covs = covs[:, None, None]
        if covs.ndim != 3 or covs.shape[1] != covs.shape[2]:
            raise ValueError(f"covs must be (n, d, d) or (n,), got {covs.shape}")
        n, d = covs.shape[0], covs.shape[1]
        means = np.array(self.means, dtype=float).reshape(n, d)
        for i in range(n):
            _check_psd(covs[i], f"block covariance {i}")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", 0.5 * (covs + covs.transpose(0, 2, 1)))

    @property
    def n(self) -> int:
        return self.means.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @classmethod
    def standard(cls, n: int, d: int = 1, mean=0.0, var=1.0) -> "ProductGaussian":
        means = np.broadcast_to(np.asarray(mean, dtype=float), (n, d)) if np.ndim(mean) < 2 else mean
        return cls(np.array(means, dtype=float).reshape(n, d), np.tile(var * np.eye(d), (n, 1, 1)))

    def to_gaussian(self) -> GaussianState:
        return GaussianState(self.means.reshape(-1), linalg.block_diag(*self.covs))

    def variances(self) -> np.ndarray:
        """Per-component variances, shape ``(n, d)``."""
        return np.diagonal(self.covs, axis1=1, axis2=2).copy()

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        roots = np.stack([_sqrtm_psd(S) for S in self.covs])
        z = rng.standard_normal((m, self.n, self.d))
        x = self.means[None] + np.einsum("iab,mib->mia", roots, z)
        return x.reshape(m, self.n * self.d)


GaussianLike = Union[GaussianState, ProductGaussian]


def _as_full(g: GaussianLike) -> GaussianState:
    return g.to_gaussian() if isinstance(g, ProductGaussian) else g


# --- moment flows --------------------------------------------------------------


def _is_symmetric(A: np.ndarray) -> bool:
    return bool(np.allclose(A, A.T, rtol=0.0, atol=1e-14 * max(1.0, np.max(np.abs(A)))))


def _phi1(x: np.ndarray) -> np.ndarray:
    """``(e^x - 1) / x`` with the removable singularity filled in."""
    out = np.ones_like(x)
    nz = np.abs(x) > 1e-300
    out[nz] = np.expm1(x[nz]) / x[nz]
    return out


def ou_moments_exact(A_full, m0, S0, t: float, offset=None) -> GaussianState:
    """Moments of ``dY = (A Y + c) dt + sqrt(2) dB`` at time ``t``.

    Solves ``m' = A m + c`` and ``S' = A S + S A^T + 2 I`` exactly: by
    eigendecomposition when ``A`` is symmetric, otherwise through matrix
    exponentials of augmented block matrices.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    A = np.atleast_2d(np.asarray(A_full, dtype=float))
    N = A.shape[0]
    m0 = np.asarray(m0, dtype=float).reshape(N)
    S0 = np.asarray(S0, dtype=float).reshape(N, N)
    c = np.zeros(N) if offset is None else np.asarray(offset, dtype=float).reshape(N)
    if t == 0:
        return GaussianState(m0, S0)
    if _is_symmetric(A):
        lam, V = np.linalg.eigh(0.5 * (A + A.T))
        e = np.exp(lam * t)
        mean = V @ (e * (V.T @ m0) + t * _phi1(lam * t) * (V.T @ c))
        S0t = V.T @ S0 @ V
        St = np.outer(e, e) * S0t + np.diag(2.0 * t * _phi1(2.0 * lam * t))
        cov = V @ St @ V.T
    else:
        aug = np.zeros((N + 1, N + 1))
        aug[:N, :N] = A
        aug[:N, N] = c
        E = linalg.expm(aug * t)
        Phi = E[:N, :N]
        mean = Phi @ m0 + E[:N, N]
        # Van Loan: expm([[-A, W], [0, A^T]] t) holds Phi^{-1} Qd in its upper-right block.
        M = np.zeros((2 * N, 2 * N))
        M[:N, :N] = -A
        M[:N, N:] = 2.0 * np.eye(N)
        M[N:, N:] = A.T
        F = linalg.expm(M * t)
        Qd = Phi @ F[:N, N:]
        cov = Phi @ S0 @ Phi.T + Qd
    return GaussianState(mean, 0.5 * (cov + cov.T))


def ip_moments_exact(A_full, mu0: ProductGaussian, t: float, offset=None) -> ProductGaussian:
    """Law at time ``t`` of the independent projection of ``b(x) = A x + c``.

    Means follow the full system ``m' = A m + c``; block covariances only
    see the diagonal blocks, ``S_i' = A_ii S_i + S_i A_ii^T + 2 I``.
    """
    A = np.atleast_2d(np.asarray(A_full, dtype=float))
    n, d = mu0.n, mu0.d
    if A.shape != (n * d, n * d):
        raise ValueError(f"A_full must be {n * d}x{n * d} to match mu0")
    mean = ou_moments_exact(A, mu0.means.reshape(-1), np.zeros((n * d, n * d)), t, offset).mean
    covs = np.empty_like(mu0.covs)
    for i in range(n):
        sl = slice(i * d, (i + 1) * d)
        covs[i] = ou_moments_exact(A[sl, sl], np.zeros(d), mu0.covs[i], t).cov
    return ProductGaussian(mean.reshape(n, d), covs)


# --- distances -----------------------------------------------------------------


def _bures2(m1, S1, m2, S2) -> float:
    r2 = _sqrtm_psd(S2)
    cross = _sqrtm_psd(r2 @ S1 @ r2)
    val = float(np.sum((m1 - m2) ** 2) + np.trace(S1) + np.trace(S2) - 2.0 * np.trace(cross))
    return max(val, 0.0)


def w2_gaussian(g1: GaussianLike, g2: GaussianLike) -> float:
    """Bures-Wasserstein distance; product inputs are handled factor by factor."""
    if isinstance(g1, ProductGaussian) and isinstance(g2, ProductGaussian):
        if (g1.n, g1.d) != (g2.n, g2.d):
            raise ValueError("product Gaussians have different shapes")
        total = sum(_bures2(g1.means[i], g1.covs[i], g2.means[i], g2.covs[i]) for i in range(g1.n))
        return float(np.sqrt(total))
    a, b = _as_full(g1), _as_full(g2)
    if a.dim != b.dim:
        raise ValueError("Gaussians have different dimensions")
    return float(np.sqrt(_bures2(a.mean, a.cov, b.mean, b.cov)))


def kl_gaussian(g1: GaussianLike, g2: GaussianLike) -> float:
    """Relative entropy ``H(g1 | g2)``; ``inf`` when ``g1`` is degenerate."""
    a, b = _as_full(g1), _as_full(g2)
    if a.dim != b.dim:
        raise ValueError("Gaussians have different dimensions")
    try:
        L2 = np.linalg.cholesky(b.cov)
    except np.linalg.LinAlgError:
        raise ValueError("second argument has a singular covariance") from None
    w1 = np.linalg.eigvalsh(a.cov)
    if w1[0] <= 1e-14 * max(1.0, w1[-1]):
        return float("inf")
    N = a.dim
    X = linalg.solve_triangular(L2, a.cov, lower=True)
    tr = float(np.trace(linalg.solve_triangular(L2, X.T, lower=True)))
    dm = linalg.solve_triangular(L2, b.mean - a.mean, lower=True)
    logdet2 = 2.0 * float(np.sum(np.log(np.diag(L2))))
    logdet1 = float(np.sum(np.log(w1)))
    return max(0.5 * (tr - N + float(dm @ dm) + logdet2 - logdet1), 0.0)


# --- quadratic potentials ------------------------------------------------------


def gibbs_gaussian(Q, l=None) -> GaussianState:
    """``rho_* ∝ exp(-x^T Q x / 2 + l.x) = N(Q^{-1} l, Q^{-1})``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    l = np.zeros(Q.shape[0]) if l is None else np.asarray(l, dtype=float)
    try:
        cf = linalg.cho_factor(Q)
    except linalg.LinAlgError:
        raise ValueError("Q must be positive definite") from None
    return GaussianState(linalg.cho_solve(cf, l), linalg.cho_solve(cf, np.eye(Q.shape[0])))


def log_partition(Q, l=None) -> float:
    """``log of the integral of exp(-x^T Q x / 2 + l.x)``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    l = np.zeros(Q.shape[0]) if l is None else np.asarray(l, dtype=float)
    sign, logdet = np.linalg.slogdet(Q)
    if sign <= 0:
        raise ValueError("Q must be positive definite")
    N = Q.shape[0]
    return float(0.5 * N * np.log(2 * np.pi) - 0.5 * logdet + 0.5 * l @ np.linalg.solve(Q, l))


@dataclass(frozen=True)
class JacobiReport:
    means: np.ndarray
    iterations: int
    spectral_radius: float
    residual: float
    used_direct_solve: bool


def mean_field_jacobi(Q, l, d: int = 1, tol: float = 1e-12, max_iter: int = 10_000) -> JacobiReport:
    """Block-Jacobi solve of the mean-field mean equations ``Q m = l``.

    Each sweep sets ``m_i <- Q_ii^{-1} (l_i - sum_{j != i} Q_ij m_j)``. Falls
    back to a direct solve when the iteration matrix has spectral radius >= 1
    or the residual does not reach ``tol``.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    N = Q.shape[0]
    l = np.zeros(N) if l is None else np.asarray(l, dtype=float).reshape(N)
    n = N // d
    blocks = [slice(i * d, (i + 1) * d) for i in range(n)]
    D = np.zeros_like(Q)
    for sl in blocks:
        D[sl, sl] = Q[sl, sl]
    try:
        Dinv = np.linalg.inv(D)
    except np.linalg.LinAlgError:
        raise ValueError("diagonal blocks of Q must be invertible") from None
    iteration = -Dinv @ (Q - D)
    rho = float(np.max(np.abs(np.linalg.eigvals(iteration)))) if N > 1 else 0.0
    scale = max(1.0, float(np.linalg.norm(l)))
    m = np.zeros(N)
    it = 0
    residual = float(np.linalg.norm(Q @ m - l)) / scale
    if rho < 1.0:
        g = Dinv @ l
        while residual > tol and it < max_iter:
            m = iteration @ m + g
            it += 1
            residual = float(np.linalg.norm(Q @ m - l)) / scale
    if residual <= tol:
        return JacobiReport(m, it, rho, residual, False)
    try:
        m = np.linalg.solve(Q, l)
    except np.linalg.LinAlgError:
        raise ValueError("Q is singular") from None
    if not np.all(np.isfinite(m)):
        raise ValueError("Q is singular")
    return JacobiReport(m, it, rho, float(np.linalg.norm(Q @ m - l)) / scale, True)


def stationary_mf_gaussian(Q, l=None, d: int = 1) -> ProductGaussian:
    """Gaussian product solving the mean-field equations of ``f = -x^T Q x / 2 + l.x``.

    Block means solve ``Q m = l``; block covariances are ``Q_ii^{-1}``.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    N = Q.shape[0]
    if np.linalg.matrix_rank(Q) < N:
        raise ValueError("Q is singular")
    n = N // d
    covs = np.empty((n, d, d))
    for i in range(n):
        sl = slice(i * d, (i + 1) * d)
        blk = Q[sl, sl]
        if np.linalg.eigvalsh(0.5 * (blk + blk.T))[0] <= 0:
            raise ValueError(f"diagonal block {i} of Q is not positive definite")
        covs[i] = np.linalg.inv(blk)
    report = mean_field_jacobi(Q, l, d)
    return ProductGaussian(report.means.reshape(n, d), covs)


def _score_gap(mu: ProductGaussian, Q, l):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n, d = mu.n, mu.d
    l = np.zeros(n * d) if l is None else np.asarray(l, dtype=float).reshape(n * d)
    precs = []
    for i in range(n):
        try:
            precs.append(np.linalg.inv(mu.covs[i]))
        except np.linalg.LinAlgError:
            raise ValueError(f"block {i} of mu is singular") from None
    gap = (Q @ mu.means.reshape(-1) - l).reshape(n, d)
    return Q, precs, gap


def projected_fisher_gaussian(mu: ProductGaussian, Q, l=None) -> float:
    """Projected Fisher information of ``mu`` against ``rho_* ∝ exp(-x^T Q x / 2 + l.x)``.

    Given ``X^i``, the conditional score is ``(Q_ii - S_i^{-1})(x - m_i) + (Q m - l)_i``.
    """
    Q, precs, gap = _score_gap(mu, Q, l)
    d = mu.d
    total = 0.0
    for i in range(mu.n):
        sl = slice(i * d, (i + 1) * d)
        M = Q[sl, sl] - precs[i]
        total += float(np.trace(M @ mu.covs[i] @ M.T)) + float(gap[i] @ gap[i])
    return total


def fisher_gaussian(mu: ProductGaussian, Q, l=None) -> float:
    """Unprojected Fisher information ``E|grad log(d mu / d rho_*)|^2``."""
    Q, precs, gap = _score_gap(mu, Q, l)
    S = linalg.block_diag(*mu.covs)
    M = Q - linalg.block_diag(*precs)
    return float(np.trace(M @ S @ M.T)) + float(np.sum(gap ** 2))


# --- entropy growth ------------------------------------------------------------


def entropy_growth_rate_gaussian(mu: ProductGaussian, A_full) -> float:
    """``1/4 sum_i E|b^i(X) - E[b^i(X) | X^i]|^2`` for ``b = A x`` under ``mu``."""
    A = np.atleast_2d(np.asarray(A_full, dtype=float))
    n, d = mu.n, mu.d
    if A.shape != (n * d, n * d):
        raise ValueError("A_full does not match mu")
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            Aij = A[i * d:(i + 1) * d, j * d:(j + 1) * d]
            total += float(np.trace(Aij @ mu.covs[j] @ Aij.T))
    return 0.25 * total


def perturbed_growth_rate_gaussian(mu: ProductGaussian, A_full, eps: float) -> float:
    """Growth rate of the independent drift ``E[b^i | X^i] + eps (x^i - m_i)``.

    The perturbation is orthogonal to the projection residual, so the rate is
    the unperturbed one plus ``eps^2 / 4 * sum_i tr(S_i)``.
    """
    return entropy_growth_rate_gaussian(mu, A_full) + 0.25 * eps ** 2 * float(
        np.trace(mu.covs, axis1=1, axis2=2).sum()
    )


def path_entropy_linear_gaussian(A_full, mu0: ProductGaussian, rho0: GaussianState, T: float) -> float:
    """``H(mu[T] | rho[T])`` for linear drift: initial entropy plus the integrated growth rate."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    h0 = kl_gaussian(mu0, rho0)
    if T == 0:
        return h0
    A = np.atleast_2d(np.asarray(A_full, dtype=float))
    rate = lambda t: entropy_growth_rate_gaussian(ip_moments_exact(A, mu0, t), A)
    val, _ = integrate.quad(rate, 0.0, T, epsabs=1e-10, epsrel=1e-10, limit=200)
    return h0 + val

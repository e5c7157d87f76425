"""Grid solvers over product measures on the line: CAVI and the product JKO scheme.

Marginals live on a uniform grid as normalized log-densities. The JKO step
works on quantile functions sampled at ``K`` midpoint levels
``u_k = (k - 1/2) / K``; there the squared Wasserstein distance is the mean
squared quantile difference, the entropy is ``-sum_k du log((q_{k+1}-q_k)/du)``
and potentials are averaged over the quantile nodes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp, ndtri

from .gaussian import ProductGaussian
from .model import QuadraticPotential

__all__ = [
    "Grid1D",
    "GridMarginal",
    "ProductGridMeasure",
    "TabulatedPotential",
    "JKOConfig",
    "CAVIResult",
    "JKOTrajectory",
    "conditional_potential",
    "cavi_step",
    "cavi_solve",
    "mean_field_residual",
    "free_energy",
    "quantile_levels",
    "jko_step_product",
    "jko_trajectory",
    "w2_quantiles",
    "w2_to_product_gaussian",
    "write_marginals_csv",
    "write_history_csv",
]

LOG_FLOOR = -690.0
TENSOR_BUDGET = 50_000_000


@dataclass(frozen=True)
class Grid1D:
    lo: float = -8.0
    hi: float = 8.0
    npoints: int = 512

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("grid needs lo < hi")
        if self.npoints < 16:
            raise ValueError("grid needs at least 16 points")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.npoints - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.npoints)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.npoints, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


def _normalize(grid: Grid1D, log_density: np.ndarray) -> np.ndarray:
    ld = np.asarray(log_density, dtype=float)
    if not np.all(np.isfinite(ld) | (ld == -np.inf)):
        raise ValueError("log density contains NaN or +inf")
    ld = ld - logsumexp(ld, b=grid.weights)
    return np.maximum(ld, LOG_FLOOR)


@dataclass(frozen=True)
class GridMarginal:
    """Normalized density on a grid, stored as its logarithm.

    ``quantiles`` optionally caches the quantile representation produced by a
    JKO step so that consecutive steps do not round-trip through the grid.
    """

    grid: Grid1D
    log_density: np.ndarray
    quantiles: Optional[np.ndarray] = field(default=None, compare=False)
    mass_error: float = field(init=False, compare=False)

    def __post_init__(self):
        ld = np.asarray(self.log_density, dtype=float)
        if ld.shape != (self.grid.npoints,):
            raise ValueError("log density does not match the grid")
        ld.setflags(write=False)
        object.__setattr__(self, "log_density", ld)
        mass = float(np.sum(self.grid.weights * np.exp(ld)))
        object.__setattr__(self, "mass_error", abs(mass - 1.0))
        if self.mass_error > 1e-6:
            raise ValueError(f"marginal is not normalized (mass error {self.mass_error:.3g})")

    @classmethod
    def from_log_density(cls, grid: Grid1D, log_density, quantiles=None) -> "GridMarginal":
        return cls(grid, _normalize(grid, log_density), quantiles)

    @classmethod
    def from_function(cls, grid: Grid1D, log_density_fn: Callable) -> "GridMarginal":
        return cls.from_log_density(grid, log_density_fn(grid.points))

    @classmethod
    def gaussian(cls, grid: Grid1D, mean: float, var: float) -> "GridMarginal":
        x = grid.points
        return cls.from_log_density(grid, -0.5 * (x - mean) ** 2 / var)

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    def expect(self, values) -> float:
        return float(np.sum(self.grid.weights * self.density * values))

    def mean(self) -> float:
        return self.expect(self.grid.points)

    def second_moment(self) -> float:
        return self.expect(self.grid.points ** 2)

    def var(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def entropy(self) -> float:
        """``integral of rho log rho``."""
        return self.expect(self.log_density)

    def to_quantiles(self, levels: int = 256) -> np.ndarray:
        """Quantiles at the midpoint levels, inverting the piecewise-linear-density CDF exactly."""
        if self.quantiles is not None and self.quantiles.size == levels:
            return self.quantiles.copy()
        x, h = self.grid.points, self.grid.spacing
        p = self.density
        cell = 0.5 * h * (p[:-1] + p[1:])
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        total = cdf[-1]
        u = quantile_levels(levels) * total
        idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, x.size - 2)
        pa, pb = p[idx], p[idx + 1]
        r = u - cdf[idx]
        slope = (pb - pa) / h
        # solve pa s + slope s^2 / 2 = r for s in [0, h]
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(pa ** 2 + 2.0 * slope * r, 0.0))
            s = np.where(np.abs(slope) * h > 1e-12 * np.maximum(pa, 1e-300), 2.0 * r / (pa + disc), r / pa)
        s = np.clip(np.nan_to_num(s, nan=0.0), 0.0, h)
        return x[idx] + s

    @classmethod
    def from_quantiles(cls, grid: Grid1D, q: np.ndarray) -> "GridMarginal":
        """Density of a quantile representation, interpolated onto ``grid``.

        Interval densities ``du / (q_{k+1} - q_k)`` sit at interval midpoints;
        log-density is spline-interpolated inside and continued outside by the
        concave quadratic fitted to the three outermost values.
        """
        q = np.asarray(q, dtype=float)
        if np.any(np.diff(q) <= 0):
            raise ValueError("quantiles must be strictly increasing")
        du = 1.0 / q.size
        mid = 0.5 * (q[:-1] + q[1:])
        width = np.diff(q)
        lavg = np.log(du / width)
        # an interval average overstates the midpoint value of a log-curved
        # density; undo it assuming the density is locally exponential
        lrho = lavg
        for _ in range(3):
            z = 0.5 * np.gradient(lrho, mid) * width
            lrho = lavg - np.log(_sinhc(z))
        x = grid.points
        ld = CubicSpline(mid, lrho)(x)
        lo, hi = x < mid[0], x > mid[-1]
        ld[lo] = _tail_extrapolate(mid[:3], lrho[:3], x[lo])
        ld[hi] = _tail_extrapolate(mid[-3:], lrho[-3:], x[hi])
        return cls.from_log_density(grid, ld, quantiles=q.copy())


def _sinhc(z: np.ndarray) -> np.ndarray:
    z = np.abs(z)
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z * z / 6.0, np.sinh(zs) / zs)


def _tail_extrapolate(xs: np.ndarray, ys: np.ndarray, x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        return x
    c2, c1, c0 = np.polyfit(xs - xs[1], ys, 2)
    c2 = min(c2, 0.0)
    edge = xs[0] if x[0] < xs[0] else xs[-1]
    y_edge = ys[0] if edge == xs[0] else ys[-1]
    z_edge = edge - xs[1]
    slope = 2 * c2 * z_edge + c1
    z = x - edge
    return y_edge + slope * z + c2 * z * z


@dataclass(frozen=True)
class ProductGridMeasure:
    marginals: tuple

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def n(self) -> int:
        return len(self.marginals)

    def __getitem__(self, i: int) -> GridMarginal:
        return self.marginals[i]

    def replace_marginal(self, i: int, marginal: GridMarginal) -> "ProductGridMeasure":
        ms = list(self.marginals)
        ms[i] = marginal
        return ProductGridMeasure(tuple(ms))

    def means(self) -> np.ndarray:
        return np.array([mg.mean() for mg in self.marginals])

    def variances(self) -> np.ndarray:
        return np.array([mg.var() for mg in self.marginals])

    @classmethod
    def gaussian(cls, grid: Grid1D, means, variances) -> "ProductGridMeasure":
        return cls(tuple(GridMarginal.gaussian(grid, m, v) for m, v in zip(means, variances)))

    @classmethod
    def from_product_gaussian(cls, grid: Grid1D, g: ProductGaussian) -> "ProductGridMeasure":
        if g.d != 1:
            raise ValueError("grid measures are one-dimensional per coordinate")
        return cls.gaussian(grid, g.means[:, 0], g.covs[:, 0, 0])


@dataclass(frozen=True)
class TabulatedPotential:
    """Log-density ``f(x_1, ..., x_n)`` given as a broadcasting callable."""

    func: Callable
    n: int


PotentialSpec = Union[QuadraticPotential, TabulatedPotential]


def _check_potential(f_spec: PotentialSpec, mu: ProductGridMeasure) -> None:
    if isinstance(f_spec, QuadraticPotential):
        if f_spec.d != 1:
            raise ValueError("grid solvers need d = 1")
    elif not isinstance(f_spec, TabulatedPotential):
        raise TypeError("potential must be a QuadraticPotential or TabulatedPotential")
    if f_spec.n != mu.n:
        raise ValueError(f"potential has n={f_spec.n} but the measure has {mu.n} marginals")


def _quadratic_conditional(Q, l, means, second, i, x):
    n = means.size
    others = [j for j in range(n) if j != i]
    lin = l[i] - sum(Q[i, j] * means[j] for j in others)
    const = 0.0
    for j in others:
        const += l[j] * means[j]
        for k in others:
            exx = second[j] if j == k else means[j] * means[k]
            const -= 0.5 * Q[j, k] * exx
    return -0.5 * Q[i, i] * x * x + lin * x + const


def _tensor_conditional(func, nodes, weights, i, x, chunk=None):
    """``sum over other-coordinate nodes of w * f(x, nodes)`` for each ``x``."""
    n = len(nodes)
    others = [j for j in range(n) if j != i]
    inner = int(np.prod([nodes[j].size for j in others])) if others else 1
    if x.size * inner > TENSOR_BUDGET:
        raise NotImplementedError(
            f"tensor quadrature needs {x.size * inner:.3g} evaluations (budget {TENSOR_BUDGET:.3g})"
        )
    chunk = chunk or max(1, 4_000_000 // max(inner, 1))
    out = np.empty(x.size)
    W = np.ones(())
    for j in others:
        W = np.multiply.outer(W, weights[j])
    for s in range(0, x.size, chunk):
        xc = x[s:s + chunk]
        args = []
        pos = 1
        for j in range(n):
            if j == i:
                args.append(xc.reshape((-1,) + (1,) * len(others)))
            else:
                shape = [1] * (1 + len(others))
                shape[pos] = nodes[j].size
                args.append(nodes[j].reshape(shape))
                pos += 1
        vals = np.asarray(func(*args), dtype=float)
        vals = np.broadcast_to(vals, (xc.size,) + W.shape)
        out[s:s + chunk] = np.tensordot(vals, W, axes=len(others))
    return out


def _pruned_nodes(mg: GridMarginal, rel: float = 1e-16):
    w = mg.grid.weights * mg.density
    keep = w > rel * w.max()
    return mg.grid.points[keep], w[keep] / w[keep].sum()


def conditional_potential(f_spec: PotentialSpec, mu: ProductGridMeasure, i: int, x=None) -> np.ndarray:
    """``E_mu[f(x, X^{-i})]`` evaluated on the grid of marginal ``i`` (or at ``x``)."""
    _check_potential(f_spec, mu)
    x = mu[i].grid.points if x is None else np.asarray(x, dtype=float)
    if isinstance(f_spec, QuadraticPotential):
        means = mu.means()
        second = np.array([mg.second_moment() for mg in mu.marginals])
        return _quadratic_conditional(f_spec.Q, f_spec.l, means, second, i, x)
    if mu.n > 4:
        raise NotImplementedError("tensor quadrature supports at most 4 coordinates")
    nodes, weights = zip(*(_pruned_nodes(mg) for mg in mu.marginals))
    return _tensor_conditional(f_spec.func, list(nodes), list(weights), i, x)


def _expected_f(f_spec: PotentialSpec, mu: ProductGridMeasure) -> float:
    if isinstance(f_spec, QuadraticPotential):
        means = mu.means()
        second = np.array([mg.second_moment() for mg in mu.marginals])
        E = np.outer(means, means)
        np.fill_diagonal(E, second)
        return float(-0.5 * np.sum(f_spec.Q * E) + f_spec.l @ means)
    return mu[0].expect(conditional_potential(f_spec, mu, 0))


def free_energy(f_spec: PotentialSpec, mu: ProductGridMeasure) -> float:
    """``sum_i int mu^i log mu^i - E_mu[f]``, i.e. ``H(mu | rho_*) - log Z``."""
    _check_potential(f_spec, mu)
    return sum(mg.entropy() for mg in mu.marginals) - _expected_f(f_spec, mu)


def cavi_step(f_spec: PotentialSpec, mu: ProductGridMeasure, i: int) -> ProductGridMeasure:
    """Replace marginal ``i`` by the normalized ``exp`` of its conditional potential."""
    cp = conditional_potential(f_spec, mu, i)
    return mu.replace_marginal(i, GridMarginal.from_log_density(mu[i].grid, cp))


def mean_field_residual(f_spec: PotentialSpec, mu: ProductGridMeasure) -> float:
    """Largest sup-norm gap between ``log mu^i`` and its normalized conditional potential."""
    worst = 0.0
    for i in range(mu.n):
        target = _normalize(mu[i].grid, conditional_potential(f_spec, mu, i))
        worst = max(worst, float(np.max(np.abs(mu[i].log_density - target))))
    return worst


@dataclass
class CAVIResult:
    measure: ProductGridMeasure
    residuals: list
    free_energies: list
    converged: bool

    @property
    def sweeps(self) -> int:
        return len(self.residuals)


def cavi_solve(f_spec: PotentialSpec, mu0: ProductGridMeasure, max_sweeps: int = 100, tol: float = 1e-10) -> CAVIResult:
    """Cyclic coordinate updates until the largest log-density change falls below ``tol``.

    Non-convergence is reported through ``converged``; it never raises.
    """
    mu = mu0
    residuals, energies = [], [free_energy(f_spec, mu)]
    for _ in range(max_sweeps):
        change = 0.0
        for i in range(mu.n):
            new = cavi_step(f_spec, mu, i)
            change = max(change, float(np.max(np.abs(new[i].log_density - mu[i].log_density))))
            mu = new
        residuals.append(change)
        energies.append(free_energy(f_spec, mu))
        if change < tol:
            return CAVIResult(mu, residuals, energies, True)
    return CAVIResult(mu, residuals, energies, False)


# --- JKO -----------------------------------------------------------------------


def quantile_levels(K: int) -> np.ndarray:
    return (np.arange(K) + 0.5) / K


@dataclass(frozen=True)
class JKOConfig:
    """``inner_iters`` and ``inner_lr`` bound the damped Newton iterations of each block solve."""

    tau: float
    inner_iters: int = 200
    inner_lr: float = 1.0
    coord_sweeps: int = 20
    levels: int = 256
    sweep_tol: float = 1e-11

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 0 < self.inner_lr <= 1:
            raise ValueError("inner_lr must lie in (0, 1]")
        if self.levels < 16:
            raise ValueError("need at least 16 quantile levels")


class _BlockPotential:
    """Conditional potential of block ``i`` against the other blocks' quantile nodes."""

    def __init__(self, f_spec: PotentialSpec, Q: list, i: int):
        self.f_spec, self.i = f_spec, i
        if isinstance(f_spec, QuadraticPotential):
            means = np.array([q.mean() for q in Q])
            second = np.array([np.mean(q * q) for q in Q])
            self.quad = (f_spec.Q[i, i], _quadratic_conditional(f_spec.Q, f_spec.l, means, second, i, 0.0),
                         f_spec.l[i] - sum(f_spec.Q[i, j] * means[j] for j in range(len(Q)) if j != i))
        else:
            self.quad = None
            K = Q[0].size
            self.nodes = list(Q)
            self.weights = [np.full(K, 1.0 / K) for _ in Q]

    def _tab(self, x):
        return _tensor_conditional(self.f_spec.func, self.nodes, self.weights, self.i, np.asarray(x, dtype=float))

    def value(self, x):
        if self.quad is not None:
            a, c, b = self.quad
            return -0.5 * a * x * x + b * x + c
        return self._tab(x)

    def derivs(self, x):
        if self.quad is not None:
            a, c, b = self.quad
            return -a * x + b, np.full_like(x, -a)
        h = 1e-4 * (1.0 + np.abs(x))
        vp, v0, vm = self._tab(x + h), self._tab(x), self._tab(x - h)
        return (vp - vm) / (2 * h), (vp - 2 * v0 + vm) / (h * h)


def _entropy_q(q: np.ndarray) -> float:
    du = 1.0 / q.size
    return -du * float(np.sum(np.log(np.diff(q) / du)))


def _block_objective(q, p, pot: _BlockPotential, tau: float) -> float:
    dq = np.diff(q)
    if np.any(dq <= 0):
        return np.inf
    du = 1.0 / q.size
    return _entropy_q(q) - du * float(np.sum(pot.value(q))) + du * float(np.sum((q - p) ** 2)) / (2 * tau)


def _solve_block(q, p, pot: _BlockPotential, cfg: JKOConfig) -> np.ndarray:
    """Damped Newton on one block; the Hessian is tridiagonal."""
    K = q.size
    du = 1.0 / K
    tau = cfg.tau
    obj = _block_objective(q, p, pot, tau)
    for _ in range(cfg.inner_iters):
        inv = 1.0 / np.diff(q)
        g_ent = np.zeros(K)
        g_ent[:-1] += inv
        g_ent[1:] -= inv
        vp, vpp = pot.derivs(q)
        grad = du * (g_ent - vp + (q - p) / tau)
        inv2 = inv * inv
        diag = np.zeros(K)
        diag[:-1] += inv2
        diag[1:] += inv2
        diag = du * (diag - vpp + 1.0 / tau)
        off = -du * inv2
        shift = 0.0
        while True:
            ab = np.vstack([np.concatenate([[0.0], off]), diag + shift])
            try:
                step = -linalg.solveh_banded(ab, grad)
                break
            except linalg.LinAlgError:
                shift = max(2 * shift, 1e-8 + float(np.max(np.abs(diag))) * 1e-6)
        decrement = -float(grad @ step)
        if decrement < 1e-22:
            break
        alpha = cfg.inner_lr
        while alpha > 1e-12:
            trial = q + alpha * step
            val = _block_objective(trial, p, pot, tau)
            if val <= obj - 1e-4 * alpha * decrement:
                break
            alpha *= 0.5
        else:
            break
        q, obj = trial, val
        if decrement < 1e-18:
            break
    if np.any(np.diff(q) <= 0):
        raise RuntimeError("quantile monotonicity lost in JKO block solve")
    return q


def _product_objective(f_spec, Q: list, P: Optional[list], tau: float) -> float:
    """Discrete free energy plus the Wasserstein penalty (when ``P`` is given)."""
    ent = sum(_entropy_q(q) for q in Q)
    pot = _BlockPotential(f_spec, Q, 0)
    ef = float(np.mean(pot.value(Q[0])))
    val = ent - ef
    if P is not None:
        val += sum(float(np.mean((q - p) ** 2)) for q, p in zip(Q, P)) / (2 * tau)
    return val


def _measure_quantiles(mu: ProductGridMeasure, K: int) -> list:
    return [mg.to_quantiles(K) for mg in mu.marginals]


def jko_step_product(f_spec: PotentialSpec, mu_prev: ProductGridMeasure, cfg: JKOConfig) -> ProductGridMeasure:
    """One product-constrained JKO step by block-coordinate descent over marginals."""
    _check_potential(f_spec, mu_prev)
    P = _measure_quantiles(mu_prev, cfg.levels)
    Q = _jko_quantile_step(f_spec, P, cfg)
    return ProductGridMeasure(tuple(GridMarginal.from_quantiles(mg.grid, q) for mg, q in zip(mu_prev.marginals, Q)))


def _jko_quantile_step(f_spec, P: list, cfg: JKOConfig) -> list:
    Q = [p.copy() for p in P]
    start = _product_objective(f_spec, Q, P, cfg.tau)
    for _ in range(cfg.coord_sweeps):
        change = 0.0
        for i in range(len(Q)):
            new = _solve_block(Q[i], P[i], _BlockPotential(f_spec, Q, i), cfg)
            change = max(change, float(np.max(np.abs(new - Q[i]))))
            Q[i] = new
        if change < cfg.sweep_tol:
            break
    end = _product_objective(f_spec, Q, P, cfg.tau)
    if end > start + 1e-9 * max(1.0, abs(start)):
        raise RuntimeError(f"JKO objective increased from {start!r} to {end!r}")
    return Q


@dataclass
class JKOTrajectory:
    """Iterates ``mu^{tau,k}`` (``measures[0]`` is the initial law) and their free energies."""

    measures: list
    times: list
    free_energies: list
    tau: float

    def __len__(self):
        return len(self.measures)

    def __getitem__(self, k):
        return self.measures[k]

    @property
    def final(self) -> ProductGridMeasure:
        return self.measures[-1]


def jko_trajectory(f_spec: PotentialSpec, mu0: ProductGridMeasure, tau: float, t_end: float,
                   cfg: Optional[JKOConfig] = None) -> JKOTrajectory:
    """Iterate ``ceil(t_end / tau)`` JKO steps; free energies use the quantile discretization."""
    cfg = replace(cfg, tau=tau) if cfg is not None else JKOConfig(tau=tau)
    _check_potential(f_spec, mu0)
    steps = math.ceil(t_end / tau - 1e-9) if t_end > 0 else 0
    Q = _measure_quantiles(mu0, cfg.levels)
    measures, times = [mu0], [0.0]
    energies = [_product_objective(f_spec, Q, None, tau)]
    grids = [mg.grid for mg in mu0.marginals]
    for k in range(1, steps + 1):
        Q = _jko_quantile_step(f_spec, Q, cfg)
        measures.append(ProductGridMeasure(tuple(GridMarginal.from_quantiles(g, q) for g, q in zip(grids, Q))))
        times.append(k * tau)
        energies.append(_product_objective(f_spec, Q, None, tau))
    return JKOTrajectory(measures, times, energies, tau)


def w2_quantiles(q1: np.ndarray, q2: np.ndarray) -> float:
    """1-d Wasserstein distance between two quantile representations on the same levels."""
    q1, q2 = np.asarray(q1, dtype=float), np.asarray(q2, dtype=float)
    if q1.shape != q2.shape:
        raise ValueError("quantile vectors differ in length")
    return float(np.sqrt(np.mean((q1 - q2) ** 2)))


def w2_to_product_gaussian(mu: ProductGridMeasure, g: ProductGaussian, levels: int = 256) -> float:
    """Product W2 between a grid measure and a product Gaussian, summed over marginals."""
    if g.d != 1 or g.n != mu.n:
        raise ValueError("shape mismatch between grid measure and Gaussian")
    z = ndtri(quantile_levels(levels))
    total = 0.0
    for i, mg in enumerate(mu.marginals):
        ref = g.means[i, 0] + math.sqrt(g.covs[i, 0, 0]) * z
        total += w2_quantiles(mg.to_quantiles(levels), ref) ** 2
    return math.sqrt(total)


def write_marginals_csv(mu: ProductGridMeasure, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coord", "x", "density"])
        for i, mg in enumerate(mu.marginals):
            for x, p in zip(mg.grid.points, mg.density):
                w.writerow([i, format(x, ".17g"), format(p, ".17g")])


def write_history_csv(residuals: Sequence[float], energies: Sequence[float], path) -> None:
    """Rows ``(sweep, residual, free_energy)``; sweep 0 is the initial state."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep", "residual", "free_energy"])
        for s, fe in enumerate(energies):
            res = "" if s == 0 else format(residuals[s - 1], ".17g")
            w.writerow([s, res, format(fe, ".17g")])

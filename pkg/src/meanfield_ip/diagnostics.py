"""Empirical and analytic metrics: 1-d Wasserstein, k-marginal distances, growth rates, proximity bounds."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from itertools import permutations
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from . import _rng
from .dynamics import FULL, EnsembleState, SimConfig, simulate, simulate_mckean_vlasov, swap_drift
from .gaussian import GaussianState, ProductGaussian, w2_gaussian
from .model import DriftSpec, InteractionMatrix, Pairwise, eval_drift

__all__ = [
    "MetricSample",
    "BoundInputs",
    "empirical_w2_1d",
    "jackknife_stderr",
    "w_k_marginal_distance",
    "w_k_gaussian",
    "entropy_growth_rate_mc",
    "poincare_constant_bound",
    "integrated_poincare_constant",
    "proximity_bound",
    "proximity_bound_uniform",
    "ChaosRow",
    "chaos_scaling_experiment",
    "write_metrics_csv",
]

JACKKNIFE_GROUPS = 20


@dataclass(frozen=True)
class MetricSample:
    """A Monte Carlo estimate. ``lower_bound`` marks estimates that under-report the true distance."""

    value: float
    stderr: float
    m_used: int
    lower_bound: bool = False

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("stderr must be nonnegative")


@dataclass(frozen=True)
class BoundInputs:
    L: float
    c0: float
    T: float = 1.0
    h0: Optional[float] = None
    eta0: Optional[float] = None
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.L < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        if self.c0 < 0:
            raise ValueError("Poincare constant must be nonnegative")
        if self.T < 0:
            raise ValueError("horizon must be nonnegative")
        if self.eta0 is not None and self.eta0 < 0:
            raise ValueError("LSI constant must be nonnegative")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# --- Wasserstein -----------------------------------------------------------------


def empirical_w2_1d(xs, ys) -> float:
    """Exact W2 between two empirical measures on the line.

    Equal sizes pair sorted samples. Unequal sizes integrate the squared
    difference of the two step quantile functions over their merged breakpoints.
    """
    x = np.sort(np.asarray(xs, dtype=float).ravel())
    y = np.sort(np.asarray(ys, dtype=float).ravel())
    if x.size == 0 or y.size == 0:
        raise ValueError("empirical_w2_1d needs non-empty samples")
    if x.size == y.size:
        return float(np.sqrt(np.mean((x - y) ** 2)))
    cuts = np.union1d(np.arange(1, x.size) / x.size, np.arange(1, y.size) / y.size)
    edges = np.concatenate([[0.0], cuts, [1.0]])
    mid = 0.5 * (edges[:-1] + edges[1:])
    ix = np.minimum((mid * x.size).astype(int), x.size - 1)
    iy = np.minimum((mid * y.size).astype(int), y.size - 1)
    return float(np.sqrt(np.sum(np.diff(edges) * (x[ix] - y[iy]) ** 2)))


def jackknife_stderr(stat: Callable[[np.ndarray], float], m: int, groups: int = JACKKNIFE_GROUPS) -> float:
    """Delete-a-group jackknife; ``stat(keep_mask)`` evaluates the estimator on the kept rows."""
    g = min(groups, m)
    labels = np.arange(m) % g
    reps = np.array([stat(labels != k) for k in range(g)])
    return float(np.sqrt((g - 1) / g * np.sum((reps - reps.mean()) ** 2)))


def _subset_weights(n: int, k: int, subsets: int, seed: int) -> np.ndarray:
    """How often each coordinate appears across the sampled ordered ``k``-subsets, normalized by subset count."""
    total = math.perm(n, k)
    counts = np.zeros(n)
    if total <= subsets:
        for v in permutations(range(n), k):
            counts[list(v)] += 1
        return counts / total
    rng = _rng.generator(seed, _rng.STREAM_AUX)
    for _ in range(subsets):
        counts[rng.choice(n, size=k, replace=False)] += 1
    return counts / subsets


def _sampled_subsets(n: int, k: int, subsets: int, seed: int) -> list:
    if math.perm(n, k) <= subsets:
        return [list(v) for v in permutations(range(n), k)]
    rng = _rng.generator(seed, _rng.STREAM_AUX)
    return [list(rng.choice(n, size=k, replace=False)) for _ in range(subsets)]


def w_k_marginal_distance(ens_mu: EnsembleState, ens_rho: EnsembleState, k: int, subsets: int = 200,
                          seed: int = 42) -> MetricSample:
    """Estimate ``W_(k)^2``: the mean over ordered ``k``-subsets of squared marginal distances.

    A subset's distance is approximated by summing squared 1-d distances of its
    components, which is exact only when both laws are products on the subset.
    The result is flagged as a lower bound whenever ``k > 1`` or ``d > 1``.
    """
    if (ens_mu.n, ens_mu.d) != (ens_rho.n, ens_rho.d):
        raise ValueError("ensembles have different dimensions")
    n, d = ens_mu.n, ens_mu.d
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    weights = np.repeat(_subset_weights(n, k, subsets, seed), d)
    X, Y = ens_mu.particles, ens_rho.particles

    def value(keep_x, keep_y):
        per = np.array([empirical_w2_1d(X[keep_x, c], Y[keep_y, c]) ** 2 for c in range(n * d)])
        return float(weights @ per)

    full_x = np.ones(X.shape[0], bool)
    full_y = np.ones(Y.shape[0], bool)
    est = value(full_x, full_y)
    g = min(JACKKNIFE_GROUPS, X.shape[0], Y.shape[0])
    lx, ly = np.arange(X.shape[0]) % g, np.arange(Y.shape[0]) % g
    reps = np.array([value(lx != j, ly != j) for j in range(g)])
    se = float(np.sqrt((g - 1) / g * np.sum((reps - reps.mean()) ** 2)))
    return MetricSample(est, se, min(X.shape[0], Y.shape[0]), lower_bound=k > 1 or d > 1)


def w_k_gaussian(mu: ProductGaussian, rho: GaussianState, k: int, subsets: int = 200, seed: int = 42) -> float:
    """``W_(k)^2`` between a product Gaussian and a Gaussian, exact Bures distance per subset."""
    n, d = mu.n, mu.d
    if rho.dim != n * d:
        raise ValueError("dimension mismatch")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    total = 0.0
    vs = _sampled_subsets(n, k, subsets, seed)
    for v in vs:
        idx = np.concatenate([np.arange(i * d, (i + 1) * d) for i in v])
        sub = ProductGaussian(mu.means[v], mu.covs[v])
        total += w2_gaussian(sub.to_gaussian(), GaussianState(rho.mean[idx], rho.cov[np.ix_(idx, idx)])) ** 2
    return total / len(vs)


# --- entropy growth --------------------------------------------------------------


def entropy_growth_rate_mc(state: EnsembleState, spec: DriftSpec, g: Optional[Callable] = None,
                           eps: float = 0.0) -> MetricSample:
    """Swap estimate of ``1/4 sum_i E|b^i(X) - beta^i(X^i)|^2``.

    ``beta^i`` is the conditional expectation ``E[b^i(X) | X^i]`` plus
    ``eps * g^i(X^i)``; ``g`` maps ``(m, n*d)`` arrays to ``(m, n*d)`` and its
    block ``i`` must depend on ``x^i`` only. Without ``g`` this is the growth
    rate of the independent projection itself.
    """
    Z = state.particles
    m = Z.shape[0]
    if m < 100:
        raise ValueError("growth-rate estimate needs m >= 100 particles")
    resid = eval_drift(spec, Z) - swap_drift(Z, spec)
    if g is not None and eps != 0.0:
        resid = resid - eps * np.asarray(g(Z), dtype=float).reshape(Z.shape)
    per = 0.25 * np.einsum("ij,ij->i", resid, resid)
    se = jackknife_stderr(lambda keep: per[keep].mean(), m)
    return MetricSample(float(per.mean()), se, m)


# --- proximity bounds ------------------------------------------------------------


def poincare_constant_bound(c0: float, L: float, t: float) -> float:
    """``c_t = c0 e^{2 L^2 t} + (e^{2 L^2 t} - 1) / L^2``, continued by ``c0 + 2t`` at ``L = 0``."""
    a = 2.0 * L * L * t
    if L == 0.0:
        return c0 + 2.0 * t
    return c0 * math.exp(a) + math.expm1(a) / (L * L)


def integrated_poincare_constant(c0: float, L: float, T: float) -> float:
    """Closed form of ``int_0^T c_t dt``."""
    if L == 0.0:
        return c0 * T + T * T
    a = 2.0 * L * L
    grow = math.expm1(a * T) / a
    return c0 * grow + (grow - T) / (L * L)


HessTrace = Union[float, Callable[[float], float], tuple]


def _check_h0(inputs: BoundInputs) -> float:
    if inputs.h0 is None:
        raise ValueError("bound needs the initial relative entropy h0")
    return inputs.h0


def proximity_bound(inputs: BoundInputs, hess_trace: HessTrace) -> float:
    """``h0 + 1/4 int_0^T c_t G(t) dt`` for the cross-Hessian trace ``G``.

    ``hess_trace`` may be a constant (closed form), a callable (adaptive
    quadrature) or a ``(times, values)`` pair of snapshots (trapezoid rule).
    """
    h0 = _check_h0(inputs)
    T, L, c0 = inputs.T, inputs.L, inputs.c0
    if isinstance(hess_trace, tuple):
        times, vals = (np.asarray(a, dtype=float) for a in hess_trace)
        ct = np.array([poincare_constant_bound(c0, L, t) for t in times])
        return h0 + 0.25 * float(np.trapezoid(ct * vals, times))
    if callable(hess_trace):
        val, _ = integrate.quad(lambda t: poincare_constant_bound(c0, L, t) * hess_trace(t), 0.0, T,
                                epsabs=1e-8, epsrel=1e-10, limit=200)
        return h0 + 0.25 * val
    return h0 + 0.25 * float(hess_trace) * integrated_poincare_constant(c0, L, T)


def proximity_bound_uniform(inputs: BoundInputs, hess_trace: HessTrace, t: float) -> float:
    """``e^{-eta t} h0 + (c/2) int_0^t e^{-eta (t-s)} G(s) ds`` with ``eta = min(kappa, eta0)``, ``c = max(c0, 1/kappa)``."""
    h0 = _check_h0(inputs)
    if inputs.kappa is None or inputs.kappa <= 0:
        raise NotImplementedError("the uniform bound needs a strictly concave potential (kappa > 0)")
    if inputs.eta0 is None or inputs.eta0 <= 0:
        raise ValueError("the uniform bound needs a positive LSI constant eta0")
    eta = min(inputs.kappa, inputs.eta0)
    c = max(inputs.c0, 1.0 / inputs.kappa)
    if isinstance(hess_trace, tuple):
        times, vals = (np.asarray(a, dtype=float) for a in hess_trace)
        integral = float(np.trapezoid(np.exp(-eta * (t - times)) * vals, times))
    elif callable(hess_trace):
        integral, _ = integrate.quad(lambda s: math.exp(-eta * (t - s)) * hess_trace(s), 0.0, t,
                                     epsabs=1e-12, epsrel=1e-10, limit=200)
    else:
        integral = float(hess_trace) * -math.expm1(-eta * t) / eta
    return math.exp(-eta * t) * h0 + 0.5 * c * integral


# --- chaos scaling ---------------------------------------------------------------


@dataclass(frozen=True)
class ChaosRow:
    """``noise_floor`` is the same statistic between two independent limit ensembles."""

    n: int
    trace_ratio: float
    w2_1: float
    stderr: float
    noise_floor: float


def _coordinatewise_w2(X: np.ndarray, Y: np.ndarray, pooled: bool) -> MetricSample:
    n = X.shape[1]

    def value(kx, ky):
        if pooled:
            return empirical_w2_1d(X[kx].ravel(), Y[ky]) ** 2
        return float(np.mean([empirical_w2_1d(X[kx, i], Y[ky]) ** 2 for i in range(n)]))

    g = JACKKNIFE_GROUPS
    lx, ly = np.arange(X.shape[0]) % g, np.arange(Y.shape[0]) % g
    est = value(np.ones(X.shape[0], bool), np.ones(Y.shape[0], bool))
    reps = np.array([value(lx != j, ly != j) for j in range(g)])
    se = float(np.sqrt((g - 1) / g * np.sum((reps - reps.mean()) ** 2)))
    return MetricSample(est, se, X.shape[0], lower_bound=pooled)


def chaos_scaling_experiment(matrices: Sequence[InteractionMatrix], K1, K2, T: float = 1.0, m: int = 10_000,
                             seed: int = 42, dt: float = 1e-3, affine: Optional[tuple] = None,
                             init_var: float = 1.0, m_limit: Optional[int] = None,
                             pooled: bool = False) -> list:
    """Compare each particle system's coordinate laws at ``T`` with the McKean-Vlasov limit.

    ``affine = (k1, k2x, k2y)`` declares ``K1(x) = k1 x`` and
    ``K2(x, y) = k2x x + k2y y`` (scalar coordinates) and enables the fast paths.
    Both systems start from i.i.d. ``N(0, init_var)`` coordinates; the limit is
    simulated with ``m_limit`` particles (default ``m``).

    By default ``W_(1)^2`` averages the per-coordinate squared distances. With
    ``pooled=True`` all coordinates are pooled into one sample, which cuts the
    small-sample bias of empirical distances by a factor of about ``n``; it
    equals the per-coordinate average when all coordinates share one law (for
    instance on vertex-transitive graphs) and is a lower bound otherwise.
    """
    for A in matrices:
        if not A.has_unit_row_sums():
            raise ValueError("chaos scaling needs interaction matrices with unit row sums")
    m_limit = m if m_limit is None else m_limit
    cfg = SimConfig(dt=dt, t_end=T, scheme=FULL, record_every=10 ** 9)
    sd = math.sqrt(init_var)
    init1 = lambda rng, k: sd * rng.standard_normal((k, 1))
    coefs = None if affine is None else (affine[1], affine[2])
    k1 = K1 if affine is None else (lambda x, a=affine[0]: a * x)
    mv, _ = simulate_mckean_vlasov(k1, K2, cfg, init1, m=m_limit, seed=seed + 1, k2_coefs=coefs)
    mv_ref, _ = simulate_mckean_vlasov(k1, K2, cfg, init1, m=m_limit, seed=seed + 2, k2_coefs=coefs)
    Y, Yref = mv.particles[:, 0], mv_ref.particles[:, 0]
    floor = empirical_w2_1d(Y, Yref) ** 2
    rows = []
    for r, A in enumerate(matrices):
        if affine is not None:
            spec = Pairwise.affine(A, affine[0], affine[1], affine[2])
        else:
            spec = Pairwise(K1=K1, K2=K2, A=A, d=1)
        init = ProductGaussian.standard(A.n, 1, 0.0, init_var)
        final, _ = simulate(spec, cfg, init, seed=seed + 10 + r, m=m)
        est = _coordinatewise_w2(final.particles, Y, pooled)
        rows.append(ChaosRow(A.n, A.trace_aat / A.n, est.value, est.stderr, floor))
    return rows


def write_metrics_csv(rows: Sequence[tuple], path) -> None:
    """Rows ``(metric, t, value, stderr, m_used)``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "t", "value", "stderr", "m_used"])
        for metric, t, value, se, m in rows:
            w.writerow([metric, format(float(t), ".17g"), format(float(value), ".17g"),
                        format(float(se), ".17g"), int(m)])

"""Ensemble simulation of the coupled SDE, its independent projection and the
McKean-Vlasov limit.

All schemes are Euler-Maruyama with diffusion coefficient ``sqrt(2)``. The
independent projection is approximated by the coordinate-swap ensemble: the
conditional expectation ``E[b^i(X) | X^i]`` at particle ``k`` is replaced by
the average of ``b^i`` over the other particles with their ``i``-th
coordinate swapped for particle ``k``'s.
"""

from __future__ import annotations

import csv
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _rng
from .gaussian import ProductGaussian
from .model import Custom, DriftSpec, Linear, Pairwise, QuadraticPotential, block, eval_drift

__all__ = [
    "FULL",
    "SWAP",
    "MCKEAN_VLASOV",
    "BlowUpError",
    "EnsembleState",
    "SimConfig",
    "MomentTrace",
    "ProductSampler",
    "swap_drift",
    "step_full_langevin",
    "step_independent_projection_swap",
    "project_drift",
    "simulate",
    "simulate_mckean_vlasov",
    "sample_init",
    "write_trace_csv",
    "write_particles",
    "read_particles",
]

FULL = "full_langevin"
SWAP = "independent_projection_swap"
MCKEAN_VLASOV = "mckean_vlasov_selfconsistent"
SCHEMES = (FULL, SWAP, MCKEAN_VLASOV)

LONG_HORIZON_NOTE = (
    "swap-ensemble estimates carry an unquantified finite-m bias that may grow with the horizon"
)


class BlowUpError(FloatingPointError):
    """Raised when a step produces a non-finite particle coordinate."""

    def __init__(self, last_finite_time: float, step: int):
        super().__init__(f"non-finite state at step {step}; last finite time t={last_finite_time:g}")
        self.last_finite_time = last_finite_time
        self.step = step


@dataclass(frozen=True)
class EnsembleState:
    """``m`` particles in ``(R^d)^n``, stored as an ``(m, n*d)`` read-only array."""

    particles: np.ndarray
    n: int
    d: int = 1
    t: float = 0.0
    step: int = 0
    seed: int = 0

    def __post_init__(self):
        p = np.array(self.particles, dtype=float)
        if p.ndim != 2 or p.shape[1] != self.n * self.d:
            raise ValueError(f"particles must have shape (m, {self.n * self.d}), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise BlowUpError(self.t, self.step)
        p.setflags(write=False)
        object.__setattr__(self, "particles", p)

    @property
    def m(self) -> int:
        return self.particles.shape[0]

    @property
    def rng_key(self) -> tuple[int, int]:
        return (self.seed, self.step)

    def coords(self) -> np.ndarray:
        """View of shape ``(m, n, d)``."""
        return self.particles.reshape(self.m, self.n, self.d)

    def _advance(self, particles: np.ndarray, dt: float) -> "EnsembleState":
        if not np.all(np.isfinite(particles)):
            raise BlowUpError(self.t, self.step + 1)
        return replace(self, particles=particles, t=self.t + dt, step=self.step + 1)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = SWAP
    record_every: int = 100

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")

    def step_sizes(self) -> list[float]:
        nsteps = math.ceil(self.t_end / self.dt - 1e-9) if self.t_end > 0 else 0
        if nsteps == 0:
            return []
        sizes = [self.dt] * nsteps
        sizes[-1] = self.t_end - (nsteps - 1) * self.dt
        return sizes


@dataclass
class MomentTrace:
    """Snapshots of per-coordinate moments along a run."""

    n: int
    d: int
    m: int
    times: list = field(default_factory=list)
    means: list = field(default_factory=list)
    variances: list = field(default_factory=list)
    max_abs_corr: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)
    second_moment_se: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def record(self, state: EnsembleState) -> None:
        Z = state.particles
        m = Z.shape[0]
        self.times.append(state.t)
        self.means.append(Z.mean(axis=0))
        self.variances.append(Z.var(axis=0, ddof=1) if m > 1 else np.zeros(Z.shape[1]))
        self.max_abs_corr.append(max_cross_correlation(Z, self.n, self.d))
        sq = np.einsum("ij,ij->i", Z, Z)
        self.second_moment.append(float(sq.mean()))
        self.second_moment_se.append(float(sq.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0)

    def stderr(self) -> np.ndarray:
        """Standard errors of the recorded means, ``sqrt(var / m)``."""
        return np.sqrt(np.asarray(self.variances) / self.m)

    def as_arrays(self) -> dict:
        return {
            "times": np.asarray(self.times),
            "means": np.asarray(self.means),
            "variances": np.asarray(self.variances),
            "max_abs_corr": np.asarray(self.max_abs_corr),
            "second_moment": np.asarray(self.second_moment),
            "second_moment_se": np.asarray(self.second_moment_se),
        }


def max_cross_correlation(Z: np.ndarray, n: int, d: int) -> float:
    """Largest ``|corr|`` between components belonging to different coordinate blocks."""
    if n < 2 or Z.shape[0] < 3:
        return 0.0
    sd = Z.std(axis=0)
    if np.any(sd == 0):
        return 0.0
    C = np.corrcoef(Z, rowvar=False)
    owner = np.repeat(np.arange(n), d)
    mask = owner[:, None] != owner[None, :]
    return float(np.max(np.abs(C[mask])))


@dataclass(frozen=True)
class ProductSampler:
    """Independent per-coordinate samplers ``sampler(rng, m) -> (m,) or (m, d)``."""

    samplers: Sequence[Callable]
    d: int = 1

    @property
    def n(self) -> int:
        return len(self.samplers)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        cols = [np.asarray(s(rng, m), dtype=float).reshape(m, self.d) for s in self.samplers]
        return np.concatenate(cols, axis=1)


InitLike = Union[ProductGaussian, ProductSampler, EnsembleState, Callable, np.ndarray]


def sample_init(init: InitLike, m: int, seed: int, n: int, d: int, require_product: bool) -> EnsembleState:
    if isinstance(init, EnsembleState):
        if (init.n, init.d) != (n, d):
            raise ValueError("initial ensemble dimensions do not match the drift")
        return init
    rng = _rng.generator(seed, _rng.STREAM_INIT)
    if isinstance(init, ProductGaussian):
        if (init.n, init.d) != (n, d):
            raise ValueError("initial ProductGaussian dimensions do not match the drift")
        Z = init.sample(rng, m)
    elif isinstance(init, ProductSampler):
        if (init.n, init.d) != (n, d):
            raise ValueError("initial sampler dimensions do not match the drift")
        Z = init.sample(rng, m)
    else:
        if require_product:
            raise ValueError(
                "the independent projection needs a product initial law; "
                "pass a ProductGaussian, ProductSampler or an explicit EnsembleState"
            )
        Z = init(rng, m) if callable(init) else np.asarray(init, dtype=float)
    return EnsembleState(np.asarray(Z, dtype=float).reshape(m, n * d), n, d, seed=seed)


# --- swap averages -------------------------------------------------------------


def _affine_parts(spec: DriftSpec):
    """Block-diagonal part, off-block part and offset of an affine drift, or None."""
    if isinstance(spec, QuadraticPotential):
        A, c = -spec.Q, spec.l
    elif isinstance(spec, Linear):
        A, c = spec.A_full, None
    else:
        return None
    n, d = spec.n, spec.d
    mask = np.kron(np.eye(n), np.ones((d, d))).astype(bool)
    return np.where(mask, A, 0.0), np.where(mask, 0.0, A), c


def _column_sums(Z: np.ndarray) -> np.ndarray:
    # a BLAS product beats the strided reduction of Z.sum(axis=0) on tall arrays
    return np.ones(Z.shape[0]) @ Z


def _exclusive_means(Z: np.ndarray) -> np.ndarray:
    m = Z.shape[0]
    return (_column_sums(Z)[None, :] - Z) / (m - 1)


def _swap_rows_generic(Z: np.ndarray, spec: DriftSpec, rows: Sequence[int]) -> np.ndarray:
    m = Z.shape[0]
    n, d = spec.n, spec.d
    out = np.empty((len(rows), n * d))
    for r, k in enumerate(rows):
        others = np.delete(np.arange(m), k)
        for i in range(n):
            sl = block(i, d)
            Y = Z[others].copy()
            Y[:, sl] = Z[k, sl]
            out[r, sl] = eval_drift(spec, Y)[:, sl].mean(axis=0)
    return out


def _swap_pairwise(Z: np.ndarray, spec: Pairwise, chunk: int = 256) -> np.ndarray:
    m, n, d = Z.shape[0], spec.n, spec.d
    X = Z.reshape(m, n, d)
    out = np.asarray(spec.K1(X), dtype=float).copy()
    if spec.K2 is None:
        return out.reshape(m, n * d)
    a = spec.A.entries
    for i, j in zip(*np.nonzero(a)):
        for s in range(0, m, chunk):
            xi = X[s:s + chunk, i][:, None, :]
            pair = np.asarray(spec.K2(xi, X[None, :, j, :]))  # (c, m, d)
            total = pair.sum(axis=1)
            idx = np.arange(s, min(s + chunk, m))
            self_term = pair[np.arange(len(idx)), idx]
            out[s:s + chunk, i] += a[i, j] * (total - self_term) / (m - 1)
    return out.reshape(m, n * d)


def swap_drift(Z: np.ndarray, spec: DriftSpec, method: str = "auto") -> np.ndarray:
    """Swap-average drift for every particle of the ``(m, n*d)`` array ``Z``.

    ``method="naive"`` forces the generic ``O(m^2 n)`` evaluation.
    """
    Z = np.asarray(Z, dtype=float)
    m = Z.shape[0]
    if m < 2:
        raise ValueError("the swap estimator needs at least two particles")
    if method not in ("auto", "naive"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        parts = _affine_parts(spec)
        if parts is not None:
            D, O, c = parts
            # Z D' + ((S - Z) / (m - 1)) O' folded into one product
            row = (_column_sums(Z) @ O.T) / (m - 1)
            if c is not None:
                row = row + c
            return Z @ (D - O / (m - 1)).T + row
        if isinstance(spec, Pairwise):
            if spec.affine_coefs is not None:
                M1, Mx, My = spec.affine_coefs
                X = Z.reshape(m, spec.n, spec.d)
                Xbar = _exclusive_means(Z).reshape(m, spec.n, spec.d)
                out = X @ M1.T + spec.A.row_sums[None, :, None] * (X @ Mx.T)
                out = out + np.einsum("ij,mjd->mid", spec.A.entries, Xbar) @ My.T
                return out.reshape(m, -1)
            return _swap_pairwise(Z, spec)
    workers = min(_rng.worker_count(), m)
    chunks = [c for c in np.array_split(np.arange(m), workers) if len(c)]
    if len(chunks) == 1:
        return _swap_rows_generic(Z, spec, chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda rows: _swap_rows_generic(Z, spec, rows), chunks))
    return np.concatenate(parts, axis=0)


def project_drift(state: EnsembleState, spec: DriftSpec, k: int) -> np.ndarray:
    """Estimate of ``(E[b^1(X)|X^1], ..., E[b^n(X)|X^n])`` at particle ``k``."""
    if state.m < 2:
        raise ValueError("projection estimate needs at least two particles")
    if not 0 <= k < state.m:
        raise IndexError(f"particle index {k} out of range")
    if _affine_parts(spec) is not None or isinstance(spec, Pairwise):
        return swap_drift(state.particles, spec)[k]
    return _swap_rows_generic(state.particles, spec, [k])[0]


# --- steppers ------------------------------------------------------------------


def _noise(state: EnsembleState, dt: float, noise: bool) -> np.ndarray:
    if not noise:
        return 0.0
    return math.sqrt(2.0 * dt) * _rng.step_normals(state.seed, state.step, state.particles.shape)


def step_full_langevin(state: EnsembleState, spec: DriftSpec, dt: float, noise: bool = True) -> EnsembleState:
    """One Euler-Maruyama step of ``dY = b(Y) dt + sqrt(2) dB`` for every particle."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    Z = state.particles
    return state._advance(Z + eval_drift(spec, Z) * dt + _noise(state, dt, noise), dt)


def step_independent_projection_swap(
    state: EnsembleState, spec: DriftSpec, dt: float, noise: bool = True, method: str = "auto"
) -> EnsembleState:
    """One step of the swap particle approximation, drifts frozen at the pre-step snapshot."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if state.m < 2:
        raise ValueError("swap scheme needs m >= 2")
    Z = state.particles
    return state._advance(Z + swap_drift(Z, spec, method) * dt + _noise(state, dt, noise), dt)


def _as_matrix(c, d: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    return c * np.eye(d) if c.ndim == 0 else c.reshape(d, d)


def _mv_drift(X: np.ndarray, K1, K2, k2_coefs=None, chunk: int = 512) -> np.ndarray:
    """``K1(X^k) + mean_{l != k} K2(X^k, X^l)`` for an ``(m, d)`` array."""
    m = X.shape[0]
    out = np.asarray(K1(X), dtype=float).copy() if K1 is not None else np.zeros_like(X)
    if k2_coefs is not None:
        Mx, My = k2_coefs
        return out + X @ Mx.T + _exclusive_means(X) @ My.T
    if K2 is None:
        return out
    for s in range(0, m, chunk):
        pair = np.asarray(K2(X[s:s + chunk, None, :], X[None, :, :]))
        idx = np.arange(s, min(s + chunk, m))
        out[s:s + chunk] += (pair.sum(axis=1) - pair[np.arange(len(idx)), idx]) / (m - 1)
    return out


def _step_mv_coords(state: EnsembleState, spec: Pairwise, dt: float) -> EnsembleState:
    Z = state.particles
    coefs = None
    if spec.affine_coefs is not None:
        M1, Mx, My = spec.affine_coefs
        K1 = lambda x: x @ M1.T
        coefs = (Mx, My)
    else:
        K1 = spec.K1
    drift = np.empty_like(Z)
    for i in range(spec.n):
        sl = block(i, spec.d)
        drift[:, sl] = _mv_drift(Z[:, sl], K1, spec.K2, coefs)
    return state._advance(Z + drift * dt + _noise(state, dt, True), dt)


def simulate(
    spec: DriftSpec,
    config: SimConfig,
    init: InitLike,
    seed: int = 42,
    m: int = 10_000,
    callback: Optional[Callable[[EnsembleState], None]] = None,
) -> tuple[EnsembleState, MomentTrace]:
    """Run ``config.scheme`` to ``config.t_end``, recording moments every ``record_every`` steps.

    ``mckean_vlasov_selfconsistent`` needs a pairwise spec with unit row sums;
    each coordinate then evolves as its own McKean-Vlasov particle system.
    """
    n, d = spec.n, spec.d
    state = sample_init(init, m, seed, n, d, require_product=config.scheme == SWAP)
    state = replace(state, seed=seed)
    if config.scheme != FULL and state.m < 2:
        raise ValueError("ensemble schemes need m >= 2")
    if config.scheme == MCKEAN_VLASOV:
        if not isinstance(spec, Pairwise) or not spec.A.has_unit_row_sums():
            raise ValueError("the McKean-Vlasov scheme needs a pairwise drift with unit row sums")
    trace = MomentTrace(n, d, state.m)
    if config.scheme == SWAP:
        trace.notes.append(LONG_HORIZON_NOTE)
    trace.record(state)
    sizes = config.step_sizes()
    for s, h in enumerate(sizes, 1):
        if config.scheme == FULL:
            state = step_full_langevin(state, spec, h)
        elif config.scheme == SWAP:
            state = step_independent_projection_swap(state, spec, h)
        else:
            state = _step_mv_coords(state, spec, h)
        if s % config.record_every == 0 or s == len(sizes):
            trace.record(state)
            if callback is not None:
                callback(state)
    return state, trace


def simulate_mckean_vlasov(
    K1,
    K2,
    config: SimConfig,
    init,
    m: int = 10_000,
    seed: int = 42,
    d: int = 1,
    k2_coefs=None,
) -> tuple[EnsembleState, MomentTrace]:
    """Mean-field particle method for ``dX = (K1(X) + E K2(X, X')) dt + sqrt(2) dB``.

    ``init`` is a one-coordinate law: a callable ``(rng, m) -> samples``, a
    ``ProductGaussian`` with ``n == 1`` or an explicit ``(m, d)`` array.
    ``k2_coefs = (Mx, My)`` declares ``K2(x, y) = Mx x + My y`` and enables the
    ``O(m)`` path; otherwise pair averages cost ``O(m^2)`` per step.
    """
    if m < 2:
        raise ValueError("McKean-Vlasov particle method needs m >= 2")
    rng = _rng.generator(seed, _rng.STREAM_INIT)
    if isinstance(init, ProductGaussian):
        if init.n != 1:
            raise ValueError("initial law must be one coordinate")
        X0 = init.sample(rng, m)
    elif callable(init):
        X0 = init(rng, m)
    else:
        X0 = init
    state = EnsembleState(np.asarray(X0, dtype=float).reshape(m, d), 1, d, seed=seed)
    if k2_coefs is not None:
        k2_coefs = tuple(_as_matrix(c, d) for c in k2_coefs)
    trace = MomentTrace(1, d, m)
    trace.record(state)
    sizes = config.step_sizes()
    for s, h in enumerate(sizes, 1):
        X = state.particles
        state = state._advance(X + _mv_drift(X, K1, K2, k2_coefs) * h + _noise(state, h, True), h)
        if s % config.record_every == 0 or s == len(sizes):
            trace.record(state)
    return state, trace


# --- export --------------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_trace_csv(trace: MomentTrace, path) -> None:
    """CSV with columns ``t, coord_index, mean, var, stderr``.

    Each snapshot is followed by two summary rows whose ``coord_index`` is
    ``max_abs_corr`` and ``second_moment`` (the latter carries its standard
    error in ``stderr``).
    """
    se = trace.stderr()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "coord_index", "mean", "var", "stderr"])
        for s, t in enumerate(trace.times):
            for c in range(trace.n * trace.d):
                w.writerow([_fmt(t), c, _fmt(trace.means[s][c]), _fmt(trace.variances[s][c]), _fmt(se[s][c])])
            w.writerow([_fmt(t), "max_abs_corr", _fmt(trace.max_abs_corr[s]), "", ""])
            w.writerow([_fmt(t), "second_moment", _fmt(trace.second_moment[s]), "",
                        _fmt(trace.second_moment_se[s])])


_HEADER = struct.Struct("<QQQ")


def write_particles(state: EnsembleState, path) -> None:
    """Little-endian float64 dump preceded by a 24-byte ``(m, n, d)`` uint64 header."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(state.m, state.n, state.d))
        fh.write(np.ascontiguousarray(state.particles, dtype="<f8").tobytes())


def read_particles(path) -> np.ndarray:
    with open(path, "rb") as fh:
        m, n, d = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != m * n * d:
        raise ValueError(f"{path}: expected {m * n * d} values, found {data.size}")
    return data.reshape(m, n * d).astype(float)

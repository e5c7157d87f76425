"""Drift specifications, interaction matrices and structural constants.

A drift ``b = (b^1, ..., b^n)`` acts on ``(R^d)^n``; points are stored
flattened as vectors of length ``n*d`` (coordinate ``i`` occupies the slice
``i*d:(i+1)*d``). Every evaluator accepts a single point of shape ``(n*d,)``
or a batch of shape ``(m, n*d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "QuadraticPotential",
    "Pairwise",
    "Linear",
    "Custom",
    "DriftSpec",
    "InteractionMatrix",
    "StructuralConstants",
    "eval_drift",
    "cross_hessian_frobenius",
    "mean_field_matrix",
    "random_walk_matrix",
    "ring_adjacency",
    "star_adjacency",
    "complete_adjacency",
    "load_edge_list",
    "structural_constants",
    "block",
]


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class InteractionMatrix:
    """Weight matrix ``A`` with zero diagonal and cached row sums / ``Tr(A A^T)``."""

    entries: np.ndarray
    row_sums: np.ndarray = field(init=False, repr=False)
    trace_aat: float = field(init=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"interaction matrix must be square, got shape {a.shape}")
        if np.any(np.diag(a) != 0.0):
            raise ValueError("interaction matrix must have an exactly zero diagonal")
        object.__setattr__(self, "entries", _readonly(a))
        object.__setattr__(self, "row_sums", _readonly(a.sum(axis=1)))
        object.__setattr__(self, "trace_aat", float(np.sum(a * a)))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def has_unit_row_sums(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.row_sums - 1.0) <= tol))


@dataclass(frozen=True)
class QuadraticPotential:
    """Gradient drift of ``f(x) = -x^T Q x / 2 + l.x``, i.e. ``b(x) = -Q x + l``.

    ``Q`` is stored symmetric so that ``f`` is ``kappa``-concave exactly when
    ``Q >= kappa I``.
    """

    Q: np.ndarray
    l: np.ndarray
    n: int
    d: int = 1

    def __post_init__(self):
        Q = np.atleast_2d(np.array(self.Q, dtype=float))
        dim = self.n * self.d
        if Q.shape != (dim, dim):
            raise ValueError(f"Q must be {dim}x{dim}, got {Q.shape}")
        scale = max(1.0, float(np.max(np.abs(Q))))
        if np.max(np.abs(Q - Q.T)) > 1e-12 * scale:
            raise ValueError("Q must be symmetric")
        l = np.zeros(dim) if self.l is None else np.array(self.l, dtype=float).reshape(-1)
        if l.shape != (dim,):
            raise ValueError(f"l must have length {dim}, got {l.shape}")
        object.__setattr__(self, "Q", _readonly(0.5 * (Q + Q.T)))
        object.__setattr__(self, "l", _readonly(l))

    @classmethod
    def from_matrix(cls, Q, l=None, d: int = 1) -> "QuadraticPotential":
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] % d:
            raise ValueError("matrix size is not a multiple of d")
        return cls(Q, l, Q.shape[0] // d, d)

    @classmethod
    def heterogeneous_gibbs(cls, U_hess, V_hess, A: InteractionMatrix) -> "QuadraticPotential":
        """``f = sum_i U(x^i) + 1/2 sum_ij A_ij V(x^i - x^j)`` with quadratic ``U``, ``V``.

        ``U_hess`` and ``V_hess`` are the (constant, d x d) Hessians of ``U`` and ``V``;
        ``A`` must be symmetric.
        """
        U_hess = np.atleast_2d(np.asarray(U_hess, dtype=float))
        V_hess = np.atleast_2d(np.asarray(V_hess, dtype=float))
        a = A.entries
        if not np.allclose(a, a.T, atol=1e-14):
            raise ValueError("heterogeneous Gibbs form needs a symmetric A")
        n, d = A.n, U_hess.shape[0]
        # Hessian of f; Q = -Hessian.
        lap = np.diag(a.sum(axis=1)) - a
        H = np.kron(np.eye(n), U_hess) + np.kron(lap, V_hess)
        return cls(-H, None, n, d)

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -0.5 * np.einsum("...i,ij,...j->...", x, self.Q, x) + x @ self.l


@dataclass(frozen=True)
class Linear:
    """``b(x) = A_full x`` on ``R^{n d}``."""

    A_full: np.ndarray
    n: int
    d: int = 1

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A_full, dtype=float))
        dim = self.n * self.d
        if A.shape != (dim, dim):
            raise ValueError(f"A_full must be {dim}x{dim}, got {A.shape}")
        object.__setattr__(self, "A_full", _readonly(A))

    @classmethod
    def from_matrix(cls, A, d: int = 1) -> "Linear":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls(A, A.shape[0] // d, d)


@dataclass(frozen=True)
class Pairwise:
    """``b^i(x) = K1(x^i) + sum_{j != i} A_ij K2(x^i, x^j)``.

    ``K1`` and ``K2`` must broadcast over leading axes, acting on the trailing
    axis of length ``d``. When the kernels are affine, build the spec with
    :meth:`affine`; the stored coefficients enable the closed-form fast paths.
    """

    K1: Callable[[np.ndarray], np.ndarray]
    K2: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]]
    A: InteractionMatrix
    d: int = 1
    # (K1 slope, K2 x-coefficient, K2 y-coefficient), each d x d, or None
    affine_coefs: Optional[tuple] = None

    @property
    def n(self) -> int:
        return self.A.n

    @classmethod
    def affine(cls, A: InteractionMatrix, k1=0.0, k2x=0.0, k2y=1.0, d: int = 1) -> "Pairwise":
        """Pairwise drift with ``K1(x) = k1 x`` and ``K2(x, y) = k2x x + k2y y``.

        Scalars are promoted to multiples of the ``d x d`` identity.
        """
        def mat(c):
            c = np.asarray(c, dtype=float)
            return _readonly(c * np.eye(d) if c.ndim == 0 else c.reshape(d, d))

        M1, Mx, My = mat(k1), mat(k2x), mat(k2y)
        return cls(
            K1=lambda x: x @ M1.T,
            K2=lambda x, y: x @ Mx.T + y @ My.T,
            A=A,
            d=d,
            affine_coefs=(M1, Mx, My),
        )

    def as_linear(self) -> Linear:
        if self.affine_coefs is None:
            raise ValueError("only affine pairwise drifts have a linear form")
        M1, Mx, My = self.affine_coefs
        a = self.A.entries
        full = np.kron(np.diag(self.A.row_sums), Mx) + np.kron(np.eye(self.n), M1) + np.kron(a, My)
        return Linear(full, self.n, self.d)


@dataclass(frozen=True)
class Custom:
    """Arbitrary drift callback with a user-declared Lipschitz constant.

    ``vectorized=True`` means ``func`` maps ``(m, n*d)`` batches to batches;
    otherwise it is applied row by row. ``allow_fd`` permits finite-difference
    cross Hessians.
    """

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    d: int = 1
    lipschitz: float = float("nan")
    kappa: Optional[float] = None
    vectorized: bool = False
    allow_fd: bool = True

    def __post_init__(self):
        if not np.isfinite(self.lipschitz) or self.lipschitz < 0:
            raise ValueError("custom drifts must declare a finite Lipschitz constant >= 0")


DriftSpec = Union[QuadraticPotential, Pairwise, Linear, Custom]


def block(i: int, d: int) -> slice:
    return slice(i * d, (i + 1) * d)


def _as_batch(spec: DriftSpec, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.ndim != 2 or xb.shape[1] != spec.n * spec.d:
        raise ValueError(f"point dimension {x.shape} does not match n*d = {spec.n * spec.d}")
    return xb, single


def _pairwise_batch(spec: Pairwise, xb: np.ndarray, chunk: int = 2048) -> np.ndarray:
    m, n, d = xb.shape[0], spec.n, spec.d
    X = xb.reshape(m, n, d)
    if spec.affine_coefs is not None:
        M1, Mx, My = spec.affine_coefs
        a = spec.A.entries
        out = X @ M1.T + spec.A.row_sums[None, :, None] * (X @ Mx.T)
        out = out + np.einsum("ij,mjd->mid", a, X) @ My.T
        return out.reshape(m, n * d)
    out = np.asarray(spec.K1(X), dtype=float).copy()
    if spec.K2 is not None:
        a = spec.A.entries
        for s in range(0, m, chunk):
            Xc = X[s:s + chunk]
            pair = spec.K2(Xc[:, :, None, :], Xc[:, None, :, :])  # (c, n, n, d)
            out[s:s + chunk] += np.einsum("ij,cijd->cid", a, pair)
    return out.reshape(m, n * d)


def eval_drift(spec: DriftSpec, x) -> np.ndarray:
    """Evaluate the stacked drift ``(b^1(x), ..., b^n(x))``."""
    xb, single = _as_batch(spec, x)
    if isinstance(spec, QuadraticPotential):
        out = spec.l - xb @ spec.Q.T
    elif isinstance(spec, Linear):
        out = xb @ spec.A_full.T
    elif isinstance(spec, Pairwise):
        out = _pairwise_batch(spec, xb)
    elif isinstance(spec, Custom):
        if spec.vectorized:
            out = np.asarray(spec.func(xb), dtype=float).reshape(xb.shape)
        else:
            out = np.stack([np.asarray(spec.func(row), dtype=float) for row in xb])
    else:
        raise TypeError(f"unknown drift spec {type(spec).__name__}")
    return out[0] if single else out


def _block_frob2(M: np.ndarray, n: int, d: int) -> np.ndarray:
    out = (M.reshape(n, d, n, d) ** 2).sum(axis=(1, 3))
    np.fill_diagonal(out, 0.0)
    return out


def cross_hessian_frobenius(spec: DriftSpec, x=None) -> np.ndarray:
    """``n x n`` matrix of ``||grad_j b^i(x)||_F^2`` for ``j != i`` (zero diagonal)."""
    n, d = spec.n, spec.d
    if isinstance(spec, QuadraticPotential):
        return _block_frob2(spec.Q, n, d)
    if isinstance(spec, Linear):
        return _block_frob2(spec.A_full, n, d)
    if isinstance(spec, Pairwise) and spec.affine_coefs is not None:
        My = spec.affine_coefs[2]
        return spec.A.entries ** 2 * float(np.sum(My ** 2))
    if x is None:
        raise ValueError("a point x is required for non-constant Jacobians")
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Pairwise):
        if spec.K2 is None:
            return np.zeros((n, n))
        X = x.reshape(n, d)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i == j or spec.A.entries[i, j] == 0.0:
                    continue
                J = _fd_jacobian(lambda y: spec.K2(X[i], y), X[j])
                out[i, j] = spec.A.entries[i, j] ** 2 * np.sum(J ** 2)
        return out
    if isinstance(spec, Custom):
        if not spec.allow_fd:
            raise NotImplementedError("finite differences disabled for this custom drift")
        J = _fd_jacobian(lambda y: eval_drift(spec, y), x)
        return _block_frob2(J, n, d)
    raise TypeError(f"unknown drift spec {type(spec).__name__}")


def _fd_jacobian(fun, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x), dtype=float)
    J = np.empty((f0.size, x.size))
    for k in range(x.size):
        h = 1e-5 * (1.0 + abs(x[k]))
        e = np.zeros_like(x)
        e[k] = h
        J[:, k] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))).reshape(-1) / (2 * h)
    return J


def mean_field_matrix(n: int) -> InteractionMatrix:
    """``A_ij = 1/(n-1)`` off the diagonal."""
    if n < 2:
        raise ValueError("mean-field matrix needs n >= 2")
    a = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(a, 0.0)
    return InteractionMatrix(a)


def random_walk_matrix(adjacency) -> InteractionMatrix:
    """Transition matrix ``A_ij = 1{i~j} / deg(i)`` of simple random walk."""
    adj = np.asarray(adjacency)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.all((adj == 0) | (adj == 1)):
        raise ValueError("adjacency entries must be 0 or 1")
    if np.any(np.diag(adj) != 0):
        raise ValueError("adjacency must have zero diagonal")
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency must be symmetric")
    deg = adj.sum(axis=1)
    if np.any(deg < 1):
        raise ValueError(f"isolated vertices: {np.flatnonzero(deg < 1).tolist()}")
    return InteractionMatrix(adj / deg[:, None].astype(float))


def ring_adjacency(n: int) -> np.ndarray:
    if n < 3:
        raise ValueError("ring needs n >= 3")
    adj = np.zeros((n, n), dtype=int)
    idx = np.arange(n)
    adj[idx, (idx + 1) % n] = 1
    adj[(idx + 1) % n, idx] = 1
    return adj


def star_adjacency(n: int) -> np.ndarray:
    adj = np.zeros((n, n), dtype=int)
    adj[0, 1:] = 1
    adj[1:, 0] = 1
    return adj


def complete_adjacency(n: int) -> np.ndarray:
    return np.ones((n, n), dtype=int) - np.eye(n, dtype=int)


def load_edge_list(path, n: Optional[int] = None) -> np.ndarray:
    """Read a 0-indexed ``"i j"`` edge list into a symmetric 0/1 adjacency."""
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            i, j = int(parts[0]), int(parts[1])
            if i == j:
                raise ValueError(f"{path}:{lineno}: self-loop {i}")
            edges.append((i, j))
    size = n if n is not None else 1 + max((max(e) for e in edges), default=-1)
    adj = np.zeros((size, size), dtype=int)
    for i, j in edges:
        adj[i, j] = adj[j, i] = 1
    return adj


@dataclass(frozen=True)
class StructuralConstants:
    lipschitz_L: float
    kappa: Optional[float] = None
    dissipative_c1: Optional[float] = None
    dissipative_c2: Optional[float] = None


def structural_constants(spec: DriftSpec) -> StructuralConstants:
    """Lipschitz constant, concavity modulus and a dissipativity split.

    For ``b = -Q x + l`` with ``lambda_min(Q) > 0`` the split is
    ``x.b(x) <= |l|^2 / (2 lambda) - (lambda / 2) |x|^2``.
    """
    if isinstance(spec, Custom):
        return StructuralConstants(float(spec.lipschitz), spec.kappa)
    if isinstance(spec, Pairwise):
        if spec.affine_coefs is None:
            raise NotImplementedError("structural constants need an affine pairwise drift")
        spec = spec.as_linear()
    if isinstance(spec, QuadraticPotential):
        lam = np.linalg.eigvalsh(spec.Q)
        kappa = float(lam[0])
        L = float(np.max(np.abs(lam)))
        l2 = float(spec.l @ spec.l)
    else:
        A = spec.A_full
        kappa = float(np.linalg.eigvalsh(-0.5 * (A + A.T))[0])
        L = float(np.linalg.norm(A, 2))
        l2 = 0.0
    if kappa > 0:
        return StructuralConstants(L, kappa, l2 / (2 * kappa), kappa / 2)
    return StructuralConstants(L, kappa)

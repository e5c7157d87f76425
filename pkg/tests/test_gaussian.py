import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, linalg

from meanfield_ip.gaussian import (
    GaussianState,
    ProductGaussian,
    entropy_growth_rate_gaussian,
    fisher_gaussian,
    gibbs_gaussian,
    ip_moments_exact,
    kl_gaussian,
    log_partition,
    mean_field_jacobi,
    ou_moments_exact,
    path_entropy_linear_gaussian,
    perturbed_growth_rate_gaussian,
    projected_fisher_gaussian,
    stationary_mf_gaussian,
    w2_gaussian,
)
from meanfield_ip.model import mean_field_matrix

Q0 = np.array([[1.0, 0.5], [0.5, 1.0]])
A0 = np.array([[-1.0, 0.5], [0.5, -1.0]])


def g1(mean, var):
    return GaussianState(np.array([mean], float), np.array([[var]], float))


def random_spd(rng, n, floor=0.2):
    B = rng.normal(size=(n, n))
    return B @ B.T / n + floor * np.eye(n)


def test_ou_examples():
    m0, S0 = np.array([1.0, -2.0]), np.array([[1.0, 0.2], [0.2, 0.5]])
    g = ou_moments_exact(A0, m0, S0, 0.0)
    np.testing.assert_allclose(g.mean, m0)
    np.testing.assert_allclose(g.cov, S0)
    t = 0.7
    g = ou_moments_exact(-np.eye(2), m0, np.zeros((2, 2)), t)
    np.testing.assert_allclose(g.mean, math.exp(-t) * m0)
    np.testing.assert_allclose(g.cov, (1 - math.exp(-2 * t)) * np.eye(2), atol=1e-14)
    g = ou_moments_exact(A0, m0, S0, 60.0)
    np.testing.assert_allclose(g.cov, 4 / 3 * Q0, atol=1e-12)


def test_ou_against_ode_nonsymmetric():
    A = np.array([[-1.0, 0.8], [-0.3, -0.6]])
    m0, S0, t = np.array([0.5, 1.0]), np.array([[0.4, 0.1], [0.1, 0.9]]), 1.3

    def rhs(_, y):
        m, S = y[:2], y[2:].reshape(2, 2)
        return np.concatenate([A @ m, (A @ S + S @ A.T + 2 * np.eye(2)).ravel()])

    sol = integrate.solve_ivp(rhs, (0, t), np.concatenate([m0, S0.ravel()]), rtol=1e-11, atol=1e-12)
    g = ou_moments_exact(A, m0, S0, t)
    np.testing.assert_allclose(g.mean, sol.y[:2, -1], atol=1e-8)
    np.testing.assert_allclose(g.cov, sol.y[2:, -1].reshape(2, 2), atol=1e-8)


def test_ip_examples():
    mu0 = ProductGaussian(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
    for t in (0.0, 0.5, 2.0):
        g = ip_moments_exact(A0, mu0, t)
        np.testing.assert_allclose(g.means[:, 0], math.exp(-1.5 * t) * np.array([1.0, -1.0]), atol=1e-14)
    far = ip_moments_exact(A0, ProductGaussian(np.array([[3.0], [0.0]]), np.array([0.1, 5.0])), 40.0)
    np.testing.assert_allclose(far.covs[:, 0, 0], [1.0, 1.0], atol=1e-12)


def test_ip_separable_matches_ou():
    A = np.diag([-1.0, -2.5])
    mu0 = ProductGaussian(np.array([[1.0], [2.0]]), np.array([0.3, 1.7]))
    ip = ip_moments_exact(A, mu0, 0.9)
    ou = ou_moments_exact(A, mu0.means[:, 0], np.diag(mu0.covs[:, 0, 0]), 0.9)
    np.testing.assert_allclose(ip.means[:, 0], ou.mean)
    np.testing.assert_allclose(ip.covs[:, 0, 0], np.diag(ou.cov))


def test_w2_examples():
    g = GaussianState(np.zeros(2), np.eye(2))
    assert w2_gaussian(g, g) == pytest.approx(0.0, abs=1e-12)
    assert w2_gaussian(g, GaussianState(np.array([2.0, 0.0]), np.eye(2))) == pytest.approx(2.0)
    assert w2_gaussian(g1(0, 1), g1(0, 4)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        w2_gaussian(GaussianState(np.zeros(2), np.diag([1.0, -1.0])), g)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_w2_metric_properties(seed, n):
    rng = np.random.default_rng(seed)
    gs = [GaussianState(rng.normal(size=n), random_spd(rng, n)) for _ in range(3)]
    a, b, c = gs
    assert w2_gaussian(a, b) == pytest.approx(w2_gaussian(b, a), rel=1e-8, abs=1e-10)
    assert w2_gaussian(a, c) <= w2_gaussian(a, b) + w2_gaussian(b, c) + 1e-8


def test_kl_examples():
    assert kl_gaussian(g1(0, 1), g1(0, 1)) == pytest.approx(0.0, abs=1e-14)
    assert kl_gaussian(g1(1, 1), g1(0, 1)) == pytest.approx(0.5)
    assert kl_gaussian(g1(0, 2), g1(0, 1)) == pytest.approx(0.5 * (1 - math.log(2)), abs=1e-12)
    assert kl_gaussian(g1(0, 0), g1(0, 1)) == math.inf
    with pytest.raises(ValueError):
        kl_gaussian(g1(0, 1), g1(0, 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_kl_nonnegative(seed, n):
    rng = np.random.default_rng(seed)
    a = GaussianState(rng.normal(size=n), random_spd(rng, n))
    b = GaussianState(rng.normal(size=n), random_spd(rng, n))
    assert kl_gaussian(a, b) >= -1e-12


def test_gibbs_and_partition():
    l = np.array([1.0, 1.0])
    g = gibbs_gaussian(Q0, l)
    np.testing.assert_allclose(g.cov, np.linalg.inv(Q0))
    np.testing.assert_allclose(g.mean, np.linalg.solve(Q0, l))
    x, w = np.polynomial.hermite.hermgauss(60)
    X, Y = np.meshgrid(x * 4, x * 4)
    W = np.outer(w, w) * 16 * np.exp(X ** 2 / 16 + Y ** 2 / 16)
    f = -0.5 * (Q0[0, 0] * X ** 2 + 2 * Q0[0, 1] * X * Y + Q0[1, 1] * Y ** 2) + X + Y
    assert log_partition(Q0, l) == pytest.approx(math.log(np.sum(W * np.exp(f))), rel=1e-8)
    with pytest.raises(ValueError):
        gibbs_gaussian(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_stationary_examples():
    Qd = np.diag([2.0, 0.5])
    st_ = stationary_mf_gaussian(Qd, [1.0, 3.0])
    np.testing.assert_allclose(st_.means[:, 0], [0.5, 6.0])
    np.testing.assert_allclose(st_.covs[:, 0, 0], [0.5, 2.0])
    st_ = stationary_mf_gaussian(Q0, [1.0, 1.0])
    np.testing.assert_allclose(st_.means[:, 0], [2 / 3, 2 / 3], atol=1e-12)
    np.testing.assert_allclose(st_.covs[:, 0, 0], [1.0, 1.0])
    np.testing.assert_allclose(stationary_mf_gaussian(random_spd(np.random.default_rng(3), 4)).means, 0.0, atol=1e-14)


def test_jacobi_converges_to_solve():
    Q = random_spd(np.random.default_rng(7), 5, floor=1.0)
    l = np.arange(5.0)
    rep = mean_field_jacobi(Q, l)
    assert rep.residual <= 1e-10 and not rep.used_direct_solve
    np.testing.assert_allclose(rep.means.ravel(), np.linalg.solve(Q, l), atol=1e-9)


def test_projected_fisher_examples():
    l = np.array([1.0, 1.0])
    assert projected_fisher_gaussian(stationary_mf_gaussian(Q0, l), Q0, l) == pytest.approx(0.0, abs=1e-20)
    assert projected_fisher_gaussian(ProductGaussian.standard(2), Q0, np.zeros(2)) == pytest.approx(0.0, abs=1e-20)
    Qd, mu = np.diag([2.0, 0.5]), ProductGaussian(np.array([[0.3], [-1.0]]), np.array([0.7, 1.9]))
    assert projected_fisher_gaussian(mu, Qd, l) == pytest.approx(fisher_gaussian(mu, Qd, l))


def test_projected_fisher_monte_carlo():
    # E sum_i |d_i log mu_i(X^i) - E[d_i f(X) | X^i]|^2 at mu = N(0.5, 2) x N(0.5, 2)
    rng = np.random.default_rng(11)
    mu = ProductGaussian(np.full((2, 1), 0.5), np.full(2, 2.0))
    X = rng.normal(0.5, math.sqrt(2.0), size=(400_000, 2))
    score = -(X - 0.5) / 2.0
    cond = -(X * Q0[0, 0]) - Q0[0, 1] * 0.5
    mc = np.mean(np.sum((score - cond) ** 2, axis=1))
    assert projected_fisher_gaussian(mu, Q0, np.zeros(2)) == pytest.approx(mc, rel=1e-2)


def test_growth_rate_examples():
    mu = ProductGaussian.standard(2)
    assert entropy_growth_rate_gaussian(mu, np.diag([-1.0, -3.0])) == 0.0
    assert entropy_growth_rate_gaussian(mu, [[0, 0.5], [0.5, 0]]) == pytest.approx(0.125)
    assert entropy_growth_rate_gaussian(ProductGaussian.standard(3), mean_field_matrix(3).entries) == pytest.approx(0.375)
    for eps in (-1.0, 0.5):
        assert perturbed_growth_rate_gaussian(mu, [[0, 0.5], [0.5, 0]], eps) == pytest.approx(0.125 + 0.25 * eps ** 2 * 2)


def test_path_entropy_examples():
    mu0 = ProductGaussian(np.array([[0.2], [-0.4]]), np.array([0.5, 1.5]))
    rho0 = GaussianState(np.array([0.0, 0.0]), np.array([[1.0, 0.3], [0.3, 1.0]]))
    assert path_entropy_linear_gaussian(A0, mu0, rho0, 0.0) == pytest.approx(kl_gaussian(mu0, rho0))
    rho_prod = mu0.to_gaussian()
    assert path_entropy_linear_gaussian(np.diag([-1.0, -2.0]), mu0, rho_prod, 3.0) == pytest.approx(0.0, abs=1e-12)
    std = ProductGaussian.standard(2)
    assert path_entropy_linear_gaussian(A0, std, std.to_gaussian(), 1.0) == pytest.approx(0.125, abs=1e-8)
    with pytest.raises(ValueError):
        path_entropy_linear_gaussian(A0, std, GaussianState(np.zeros(2), np.zeros((2, 2))), 1.0)


def test_path_entropy_matches_quadrature():
    A = np.array([[-1.0, 0.4], [0.7, -2.0]])
    mu0 = ProductGaussian(np.array([[1.0], [0.5]]), np.array([0.8, 1.2]))
    rho0 = mu0.to_gaussian()
    T = 1.5
    rate = lambda t: entropy_growth_rate_gaussian(ip_moments_exact(A, mu0, t), A)
    val, _ = integrate.quad(rate, 0, T, epsabs=1e-12)
    assert path_entropy_linear_gaussian(A, mu0, rho0, T) == pytest.approx(val, rel=1e-7)


def test_block_dimension_d2():
    Q = random_spd(np.random.default_rng(2), 4, floor=1.0)
    st_ = stationary_mf_gaussian(Q, np.ones(4), d=2)
    assert st_.means.shape == (2, 2) and st_.covs.shape == (2, 2, 2)
    for i in range(2):
        blk = slice(2 * i, 2 * i + 2)
        np.testing.assert_allclose(st_.covs[i], linalg.inv(Q[blk, blk]), atol=1e-12)

import math

import numpy as np
import pytest
from scipy import stats

from meanfield_ip.dynamics import (
    FULL,
    MCKEAN_VLASOV,
    SWAP,
    BlowUpError,
    EnsembleState,
    ProductSampler,
    SimConfig,
    max_cross_correlation,
    project_drift,
    read_particles,
    simulate,
    simulate_mckean_vlasov,
    step_full_langevin,
    step_independent_projection_swap,
    swap_drift,
    write_particles,
    write_trace_csv,
)
from meanfield_ip.gaussian import ProductGaussian, ip_moments_exact, ou_moments_exact
from meanfield_ip.model import Custom, Linear, Pairwise, QuadraticPotential, mean_field_matrix, random_walk_matrix, ring_adjacency

A_SPEC = np.array([[-1.0, 0.5], [0.5, -1.0]])
Z3 = np.array([[1.0, 2.0], [-1.0, 0.0], [0.0, -2.0]])


def var_band(var, m, k=3.0):
    # sample variance of a Gaussian has sd var * sqrt(2 / (m - 1))
    return k * var * math.sqrt(2.0 / (m - 1))


def test_pure_brownian_step():
    state = EnsembleState(np.zeros((100_000, 1)), 1, seed=3)
    out = step_full_langevin(state, Linear.from_matrix([[0.0]]), 1.0)
    assert abs(out.particles.var(ddof=1) - 2.0) <= var_band(2.0, out.m)
    assert out.t == 1.0 and out.step == 1


def test_ou_variance_full_scheme():
    m, t = 100_000, 3.0
    final, _ = simulate(Linear.from_matrix([[-1.0]]), SimConfig(dt=5e-3, t_end=t, scheme=FULL, record_every=10 ** 6),
                        ProductGaussian.standard(1, var=0.0), seed=5, m=m)
    exact = 1 - math.exp(-2 * t)
    # Euler bias of the stationary variance is about dt / 2
    assert abs(final.particles.var(ddof=1) - exact) <= var_band(exact, m) + 2.5e-3


def test_noise_free_step_is_euler():
    spec = QuadraticPotential.from_matrix([[1.0, 0.5], [0.5, 1.0]], [0.2, -0.1])
    state = EnsembleState(Z3, 2)
    out = step_full_langevin(state, spec, 0.1, noise=False)
    np.testing.assert_array_equal(out.particles, Z3 + (spec.l - Z3 @ spec.Q.T) * 0.1)


def test_swap_example_drift():
    spec = Linear.from_matrix([[0.0, 1.0], [1.0, 0.0]])
    assert swap_drift(Z3, spec)[0, 0] == pytest.approx(-1.0)
    assert swap_drift(Z3, spec, method="naive")[0, 0] == pytest.approx(-1.0)
    assert project_drift(EnsembleState(Z3, 2), spec, 0)[0] == pytest.approx(-1.0)


@pytest.mark.parametrize("make", [
    lambda: Linear.from_matrix([[-1.0, 0.3, 0.2], [0.5, -2.0, 0.0], [0.1, 0.4, -1.0]]),
    lambda: QuadraticPotential.from_matrix([[2.0, 0.5, 0.0, 0.1], [0.5, 1.0, 0.2, 0.0],
                                            [0.0, 0.2, 1.5, 0.3], [0.1, 0.0, 0.3, 1.0]], [1.0, 0.0, -1.0, 0.5], d=2),
    lambda: Pairwise.affine(random_walk_matrix(ring_adjacency(4)), k1=-1.0, k2x=-0.5, k2y=1.0),
    lambda: Pairwise(K1=lambda x: -x ** 3, K2=lambda x, y: np.sin(y - x), A=mean_field_matrix(3)),
])
def test_fast_swap_matches_naive(make):
    spec = make()
    Z = np.random.default_rng(0).normal(size=(40, spec.n * spec.d))
    np.testing.assert_allclose(swap_drift(Z, spec), swap_drift(Z, spec, method="naive"), rtol=1e-12, atol=1e-12)


def test_threads_do_not_change_results(monkeypatch):
    spec = Custom(lambda x: np.array([-x[0] + np.tanh(x[1]), -x[1] + 0.3 * x[0]]), n=2, lipschitz=2.0)
    Z = np.random.default_rng(1).normal(size=(30, 2))
    monkeypatch.setenv("MEANFIELD_IP_THREADS", "1")
    one = swap_drift(Z, spec)
    monkeypatch.setenv("MEANFIELD_IP_THREADS", "4")
    np.testing.assert_array_equal(swap_drift(Z, spec), one)


def test_separable_swap_is_independent_stepping():
    spec = Pairwise(K1=lambda x: -x ** 3 + x, K2=None, A=mean_field_matrix(3))
    state = EnsembleState(np.random.default_rng(2).normal(size=(50, 3)), 3, seed=9)
    a = step_independent_projection_swap(state, spec, 0.01)
    b = step_full_langevin(state, spec, 0.01)
    np.testing.assert_array_equal(a.particles, b.particles)
    Z = state.particles
    np.testing.assert_array_equal(project_drift(state, spec, 4), -Z[4] ** 3 + Z[4])


def test_linear_projection_zeroes_interactions():
    m = 100_000
    Z = np.random.default_rng(4).standard_normal((m, 2))
    b = project_drift(EnsembleState(Z, 2), Linear.from_matrix(A_SPEC), 7)
    np.testing.assert_allclose(b, np.diag(A_SPEC) * Z[7], atol=5 * 0.5 / math.sqrt(m))


def test_projection_variances_match_oracle():
    m, t = 100_000, 2.0
    final, trace = simulate(Linear.from_matrix(A_SPEC), SimConfig(dt=2e-3, t_end=t, scheme=SWAP, record_every=250),
                            ProductGaussian.standard(2, var=0.0), seed=11, m=m)
    exact = ip_moments_exact(A_SPEC, ProductGaussian.standard(2, var=0.0), t).covs[:, 0, 0]
    got = final.particles.var(axis=0, ddof=1)
    # Euler bias at dt=2e-3 is about 1e-3, well inside the band
    assert np.all(np.abs(got - exact) <= var_band(exact, m) + 2e-3)
    assert max(trace.max_abs_corr) <= 5 / math.sqrt(m)


def test_full_scheme_correlation_matches_oracle():
    m, t = 100_000, 2.0
    final, _ = simulate(Linear.from_matrix(A_SPEC), SimConfig(dt=2e-3, t_end=t, scheme=FULL, record_every=10 ** 6),
                        ProductGaussian.standard(2, var=0.0), seed=12, m=m)
    S = ou_moments_exact(A_SPEC, np.zeros(2), np.zeros((2, 2)), t).cov
    rho = S[0, 1] / math.sqrt(S[0, 0] * S[1, 1])
    got = np.corrcoef(final.particles, rowvar=False)[0, 1]
    assert abs(got - rho) <= 3 * (1 - rho ** 2) / math.sqrt(m) + 2e-3


def test_zero_horizon_returns_initial_sample():
    init = ProductGaussian.standard(2)
    final, trace = simulate(Linear.from_matrix(A_SPEC), SimConfig(t_end=0.0), init, seed=1, m=20)
    first, _ = simulate(Linear.from_matrix(A_SPEC), SimConfig(t_end=0.0), init, seed=1, m=20)
    assert final.t == 0.0 and final.step == 0 and len(trace.times) == 1
    np.testing.assert_array_equal(final.particles, first.particles)


def test_same_seed_same_run():
    spec = Pairwise.affine(mean_field_matrix(3), k1=-1.0, k2x=-1.0, k2y=1.0)
    cfg = SimConfig(dt=0.01, t_end=0.2, scheme=SWAP)
    a, _ = simulate(spec, cfg, ProductGaussian.standard(3), seed=5, m=200)
    b, _ = simulate(spec, cfg, ProductGaussian.standard(3), seed=5, m=200)
    c, _ = simulate(spec, cfg, ProductGaussian.standard(3), seed=6, m=200)
    np.testing.assert_array_equal(a.particles, b.particles)
    assert not np.array_equal(a.particles, c.particles)


def test_errors():
    spec = Linear.from_matrix(A_SPEC)
    with pytest.raises(ValueError):
        step_independent_projection_swap(EnsembleState(np.zeros((1, 2)), 2), spec, 0.1)
    with pytest.raises(ValueError):
        project_drift(EnsembleState(np.zeros((1, 2)), 2), spec, 0)
    with pytest.raises(ValueError):
        simulate(spec, SimConfig(scheme=SWAP), lambda rng, m: rng.normal(size=(m, 2)), m=10)
    with pytest.raises(ValueError):
        simulate(spec, SimConfig(scheme=MCKEAN_VLASOV), ProductGaussian.standard(2), m=10)
    with pytest.raises(ValueError):
        SimConfig(dt=0.0)


def test_blow_up_reports_last_finite_time():
    with pytest.raises(BlowUpError) as err, np.errstate(all="ignore"):
        simulate(Linear.from_matrix([[800.0]]), SimConfig(dt=0.5, t_end=100.0, scheme=FULL),
                 ProductGaussian.standard(1), seed=1, m=10)
    assert err.value.last_finite_time > 0
    assert err.value.step >= 1


def test_mckean_vlasov_without_interaction_is_ou():
    m = 50_000
    final, _ = simulate_mckean_vlasov(lambda x: -x, None, SimConfig(dt=1e-2, t_end=2.0),
                                      ProductGaussian.standard(1, var=0.0), m=m, seed=2)
    exact = 1 - math.exp(-4.0)
    assert abs(final.particles.var(ddof=1) - exact) <= var_band(exact, m) + 1e-2


def test_mckean_vlasov_linear_moments():
    m, t = 100_000, 3.0
    final, _ = simulate_mckean_vlasov(lambda x: -x, None, SimConfig(dt=1e-3, t_end=t, record_every=10 ** 6),
                                      ProductGaussian.standard(1), m=m, seed=3, k2_coefs=(-1.0, 1.0))
    X = final.particles[:, 0]
    exact = 0.5 + 0.5 * math.exp(-4 * t)
    assert abs(X.mean()) <= 3 / math.sqrt(m)
    assert abs(X.var(ddof=1) - exact) <= var_band(exact, m) + 1e-3


def test_mckean_vlasov_generic_matches_affine():
    cfg = SimConfig(dt=0.01, t_end=0.3)
    a, _ = simulate_mckean_vlasov(lambda x: -x, lambda x, y: y - x, cfg, ProductGaussian.standard(1), m=300, seed=4)
    b, _ = simulate_mckean_vlasov(lambda x: -x, None, cfg, ProductGaussian.standard(1), m=300, seed=4,
                                  k2_coefs=(-1.0, 1.0))
    np.testing.assert_allclose(a.particles, b.particles, atol=1e-12)


def test_swap_mean_field_matches_mckean_vlasov():
    n, m = 4, 10_000
    cfg = SimConfig(dt=1e-3, t_end=1.0, record_every=10 ** 6)
    init = ProductSampler([lambda rng, k: rng.exponential(1.0, k)] * n)
    ip, _ = simulate(Pairwise.affine(mean_field_matrix(n), k1=-1.0, k2x=-1.0, k2y=1.0),
                     SimConfig(dt=1e-3, t_end=1.0, scheme=SWAP, record_every=10 ** 6), init, seed=21, m=m)
    mv, _ = simulate_mckean_vlasov(lambda x: -x, None, cfg, lambda rng, k: rng.exponential(1.0, (k, 1)),
                                   m=100_000, seed=22, k2_coefs=(-1.0, 1.0))
    assert stats.ks_2samp(ip.particles[:, 0], mv.particles[:, 0]).statistic <= 0.02


def test_mckean_vlasov_scheme_in_simulate():
    spec = Pairwise.affine(mean_field_matrix(3), k1=-1.0, k2x=-1.0, k2y=1.0)
    final, _ = simulate(spec, SimConfig(dt=0.01, t_end=0.5, scheme=MCKEAN_VLASOV), ProductGaussian.standard(3), m=500)
    assert final.particles.shape == (500, 3)


def test_cross_correlation_detects_dependence():
    rng = np.random.default_rng(0)
    x = rng.normal(size=5000)
    assert max_cross_correlation(np.column_stack([x, x + 0.1 * rng.normal(size=5000)]), 2, 1) > 0.9
    assert max_cross_correlation(rng.normal(size=(5000, 3)), 3, 1) < 5 / math.sqrt(5000)


def test_particle_and_trace_files(tmp_path):
    spec = Linear.from_matrix(A_SPEC)
    final, trace = simulate(spec, SimConfig(dt=0.01, t_end=0.1, scheme=SWAP, record_every=5),
                            ProductGaussian.standard(2), seed=1, m=50)
    write_particles(final, tmp_path / "p.bin")
    np.testing.assert_array_equal(read_particles(tmp_path / "p.bin"), final.particles)
    write_trace_csv(trace, tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,coord_index,mean,var,stderr"
    assert len(lines) == 1 + len(trace.times) * 4

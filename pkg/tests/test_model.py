import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meanfield_ip.model import (
    Custom,
    InteractionMatrix,
    Linear,
    Pairwise,
    QuadraticPotential,
    complete_adjacency,
    cross_hessian_frobenius,
    eval_drift,
    load_edge_list,
    mean_field_matrix,
    random_walk_matrix,
    ring_adjacency,
    star_adjacency,
    structural_constants,
)


def half_matrix(n):
    a = np.full((n, n), 0.5)
    np.fill_diagonal(a, 0.0)
    return InteractionMatrix(a)


def test_pairwise_direct_sum():
    spec = Pairwise(K1=lambda x: 0 * x, K2=lambda x, y: y - x, A=half_matrix(3))
    np.testing.assert_allclose(eval_drift(spec, [0.0, 1.0, 2.0]), [1.5, 0.0, -1.5])


def test_pairwise_affine_matches_callable():
    A = random_walk_matrix(ring_adjacency(5))
    slow = Pairwise(K1=lambda x: -x, K2=lambda x, y: 2 * y - x, A=A)
    fast = Pairwise.affine(A, k1=-1.0, k2x=-1.0, k2y=2.0)
    x = np.random.default_rng(0).normal(size=(7, 5))
    np.testing.assert_allclose(eval_drift(fast, x), eval_drift(slow, x), atol=1e-13)
    np.testing.assert_allclose(eval_drift(fast.as_linear(), x), eval_drift(slow, x), atol=1e-13)


def test_no_interaction_leaves_self_term():
    spec = Pairwise(K1=lambda x: np.sin(x), K2=None, A=mean_field_matrix(4))
    x = np.array([0.1, -2.0, 3.0, 0.5])
    np.testing.assert_allclose(eval_drift(spec, x), np.sin(x))


def test_linear_minus_identity():
    x = np.array([0.3, -1.2, 4.0])
    np.testing.assert_allclose(eval_drift(Linear.from_matrix(-np.eye(3)), x), -x)


def test_quadratic_drift_is_gradient():
    spec = QuadraticPotential.from_matrix([[1.0, 0.5], [0.5, 1.0]], [1.0, -2.0])
    x = np.array([0.4, 0.9])
    h = 1e-6
    grad = [(spec.value(x + h * e) - spec.value(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(eval_drift(spec, x), grad, atol=1e-8)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_drift(Linear.from_matrix(-np.eye(3)), np.zeros(2))


def test_asymmetric_q_rejected():
    with pytest.raises(ValueError):
        QuadraticPotential.from_matrix([[1.0, 0.5], [0.4, 1.0]])


def test_cross_hessian_examples():
    Q = np.array([[2.0, 0.3, -0.1], [0.3, 1.0, 0.2], [-0.1, 0.2, 1.5]])
    H = cross_hessian_frobenius(QuadraticPotential.from_matrix(Q))
    expected = Q ** 2
    np.fill_diagonal(expected, 0.0)
    np.testing.assert_allclose(H, expected)

    A = random_walk_matrix(star_adjacency(4))
    np.testing.assert_allclose(cross_hessian_frobenius(Pairwise.affine(A, k2x=-1.0, k2y=1.0)), A.entries ** 2)
    generic = Pairwise(K1=lambda x: 0 * x, K2=lambda x, y: y - x, A=A)
    np.testing.assert_allclose(cross_hessian_frobenius(generic, np.arange(4.0)), A.entries ** 2, atol=1e-8)

    lin = Linear.from_matrix([[0.0, 0.5], [0.5, 0.0]])
    np.testing.assert_allclose(cross_hessian_frobenius(lin), [[0, 0.25], [0.25, 0]])


def test_cross_hessian_custom_fd_permission():
    f = lambda x: np.array([-x[0] + np.tanh(x[1]), -x[1]])
    H = cross_hessian_frobenius(Custom(f, n=2, lipschitz=2.0), np.zeros(2))
    np.testing.assert_allclose(H, [[0, 1], [0, 0]], atol=1e-8)
    with pytest.raises(NotImplementedError):
        cross_hessian_frobenius(Custom(f, n=2, lipschitz=2.0, allow_fd=False), np.zeros(2))


def test_mean_field_matrix():
    np.testing.assert_array_equal(mean_field_matrix(2).entries, [[0, 1], [1, 0]])
    assert mean_field_matrix(5).trace_aat == pytest.approx(1.25, abs=1e-12)
    np.testing.assert_allclose(mean_field_matrix(3).row_sums, [1, 1, 1])
    with pytest.raises(ValueError):
        mean_field_matrix(1)


def test_random_walk_matrices():
    assert random_walk_matrix(ring_adjacency(6)).trace_aat == pytest.approx(3.0, abs=1e-12)
    np.testing.assert_allclose(random_walk_matrix(complete_adjacency(7)).entries, mean_field_matrix(7).entries)
    assert random_walk_matrix(star_adjacency(4)).trace_aat == pytest.approx(10 / 3, abs=1e-12)
    iso = np.zeros((3, 3))
    iso[0, 1] = iso[1, 0] = 1
    with pytest.raises(ValueError):
        random_walk_matrix(iso)


def test_edge_list(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("# ring\n0 1\n1 2\n2 3\n3 0\n")
    np.testing.assert_array_equal(load_edge_list(p), ring_adjacency(4))


def test_nonzero_diagonal_rejected():
    with pytest.raises(ValueError):
        InteractionMatrix(np.eye(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_trace_aat_matches_entries(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    np.fill_diagonal(a, 0.0)
    A = InteractionMatrix(a)
    assert abs(A.trace_aat - np.sum(a * a)) <= 1e-12 * max(1.0, np.sum(a * a))
    np.testing.assert_allclose(A.row_sums, a.sum(axis=1))


def test_structural_constants():
    sc = structural_constants(QuadraticPotential.from_matrix(np.eye(3)))
    assert (sc.kappa, sc.lipschitz_L) == (1.0, 1.0)
    sc = structural_constants(QuadraticPotential.from_matrix([[1.0, 0.5], [0.5, 1.0]]))
    assert sc.kappa == pytest.approx(0.5) and sc.lipschitz_L == pytest.approx(1.5)
    sc = structural_constants(Custom(lambda x: -x, n=2, lipschitz=2.0))
    assert sc.lipschitz_L == 2.0 and sc.kappa is None


def test_dissipative_split_holds():
    spec = QuadraticPotential.from_matrix([[2.0, 0.5], [0.5, 1.0]], [1.0, -3.0])
    sc = structural_constants(spec)
    x = np.random.default_rng(1).normal(scale=5.0, size=(2000, 2))
    lhs = np.einsum("ij,ij->i", x, eval_drift(spec, x))
    assert np.all(lhs <= sc.dissipative_c1 - sc.dissipative_c2 * np.einsum("ij,ij->i", x, x) + 1e-9)


def test_heterogeneous_gibbs_hessian():
    A = random_walk_matrix(ring_adjacency(4))
    spec = QuadraticPotential.heterogeneous_gibbs([[-2.0]], [[-1.0]], InteractionMatrix(0.5 * (A.entries + A.entries.T)))
    assert np.allclose(spec.Q, spec.Q.T)
    assert structural_constants(spec).kappa == pytest.approx(2.0)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covrank.numlin import (ConvergenceError, NumericalError, SpectralConfig, cholesky_jitter,
                            dense_sym_eig, fiedler_vector, fix_sign, generalized_top_eig,
                            laplacian, ones_complement_basis, power_top_eigenvector,
                            restricted_eig, top_eigenpair)


def test_dense_diag():
    w, V = dense_sym_eig(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(w, [1, 2, 3])
    assert np.allclose(V, np.eye(3))


def test_dense_2x2_closed_form():
    w, V = dense_sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [-1, 1])
    s = 1 / np.sqrt(2)
    assert np.allclose(np.abs(V[:, 0]), [s, s]) and V[0, 0] * V[1, 0] < 0
    assert np.allclose(V[:, 1], [s, s])


def test_dense_zero_matrix():
    w, _ = dense_sym_eig(np.zeros((4, 4)))
    assert np.all(w == 0)


def test_dense_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        dense_sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_dense_reconstruction(rng):
    A = rng.standard_normal((20, 20))
    A = A + A.T
    w, V = dense_sym_eig(A)
    assert np.linalg.norm(A - V @ np.diag(w) @ V.T) <= 1e-8 * np.linalg.norm(A)
    assert np.allclose(V.T @ V, np.eye(20), atol=1e-12)


def test_power_diag():
    top = power_top_eigenvector(np.diag([1.0, 2.0, 3.0]))
    assert top.value == pytest.approx(3.0)
    assert np.allclose(top.vector, [0, 0, 1], atol=1e-8)


def test_power_identity_degenerate():
    top = power_top_eigenvector(np.eye(5))
    assert top.value == pytest.approx(1.0)
    assert np.linalg.norm(top.vector) == pytest.approx(1.0)


def test_power_deflation(rng):
    X = rng.standard_normal((30, 30))
    A = X @ X.T
    w, V = dense_sym_eig(A)
    second = power_top_eigenvector(A, SpectralConfig(tol=1e-13, max_iter=200000),
                                   deflate=V[:, -1:])
    assert second.value == pytest.approx(w[-2], rel=1e-8)
    assert np.allclose(second.vector, V[:, -2], atol=1e-6)


def test_power_nonconvergence_carries_residual(rng):
    X = rng.standard_normal((20, 20))
    with pytest.raises(ConvergenceError) as info:
        power_top_eigenvector(X @ X.T, SpectralConfig(tol=1e-15, max_iter=2))
    assert info.value.residual > 0


def test_top_eigenpair_matches_dense(rng):
    X = rng.standard_normal((15, 15))
    A = X @ X.T
    w, V = dense_sym_eig(A)
    top = top_eigenpair(A)
    assert top.value == pytest.approx(w[-1])
    assert np.allclose(top.vector, V[:, -1])


def test_fix_sign():
    assert list(fix_sign(np.array([0.1, -0.9]))) == [-0.1, 0.9]


def test_ones_complement_basis():
    for n in (2, 5, 17):
        Z = ones_complement_basis(n)
        assert Z.shape == (n, n - 1)
        assert np.allclose(Z.T @ Z, np.eye(n - 1), atol=1e-12)
        assert np.allclose(Z.T @ np.ones(n), 0, atol=1e-12)


def test_fiedler_path_graph():
    lap = np.array([[1.0, -1, 0], [-1, 2, -1], [0, -1, 1]])
    v = fiedler_vector(lap)
    assert np.allclose(v, np.array([1, 0, -1]) / np.sqrt(2)) or \
        np.allclose(v, np.array([-1, 0, 1]) / np.sqrt(2))
    assert v @ lap @ v == pytest.approx(1.0)


def test_fiedler_complete_graph():
    lap = laplacian(np.ones((3, 3)) - np.eye(3))
    v = fiedler_vector(lap)
    assert v @ lap @ v == pytest.approx(3.0)
    assert abs(v.sum()) < 1e-12
    assert np.array_equal(v, fiedler_vector(lap))


def test_fiedler_two_components():
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = W[2, 3] = W[3, 2] = 1.0
    lap = laplacian(W)
    v = fiedler_vector(lap)
    assert v @ lap @ v == pytest.approx(0.0, abs=1e-12)
    assert v[0] == pytest.approx(v[1]) and v[2] == pytest.approx(v[3])
    assert v[0] == pytest.approx(-v[2])


def test_fiedler_too_small():
    with pytest.raises(ValueError):
        fiedler_vector(np.zeros((1, 1)))


def test_cholesky_identity():
    L, delta = cholesky_jitter(np.eye(3))
    assert np.array_equal(L, np.eye(3)) and delta == 0


def test_cholesky_rank_deficient_takes_one_step():
    L, delta = cholesky_jitter(np.ones((2, 2)), jitter0=1e-6)
    assert delta == 1e-6
    assert np.allclose(L @ L.T, np.ones((2, 2)) + 1e-6 * np.eye(2))


def test_cholesky_negative_definite():
    with pytest.raises(NumericalError):
        cholesky_jitter(-np.eye(3), jitter0=1e-6)


def test_generalized_identity():
    pair = generalized_top_eig(np.eye(4), np.eye(4))
    assert pair.value == pytest.approx(1.0)


def test_generalized_diag():
    pair = generalized_top_eig(np.diag([2.0, 1.0]), np.eye(2))
    assert pair.value == pytest.approx(2.0)
    assert np.allclose(pair.vector, [1, 0])


def test_generalized_matches_reduced_dense(rng):
    X = rng.standard_normal((6, 6))
    B = X @ X.T + 6 * np.eye(6)
    A = X.T @ np.diag([5.0, 1, 1, 1, 1, 1]) @ X
    pair = generalized_top_eig(A, B, jitter0=0.0)
    L = np.linalg.cholesky(B)
    Li = np.linalg.inv(L)
    w, _ = dense_sym_eig(Li @ A @ Li.T)
    assert pair.value == pytest.approx(w[-1], rel=1e-8)
    resid = A @ pair.vector - pair.value * B @ pair.vector
    assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(A)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_restricted_eig_orthogonal_to_ones(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((12, 12))
    w, V = restricted_eig(X @ X.T)
    assert np.all(np.abs(V.sum(axis=0)) <= 1e-8 * np.sqrt(12))
    assert np.allclose(np.linalg.norm(V, axis=0), 1.0)


def test_cholesky_singular_skips_zero():
    L, delta = cholesky_jitter(np.eye(2), jitter0=1e-8, singular=True)
    assert delta == 1e-8

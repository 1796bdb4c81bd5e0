import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphfilt.errors import NotSymmetric
from graphfilt.graph import ShiftOperator
from graphfilt.linalg import cayley_of_operator, eig_symmetric, solve_complex, spectral_norm


def sym(rng, n):
    x = rng.standard_normal((n, n))
    return 0.5 * (x + x.T)


def power_iteration_norm(a, iters=5000):
    # independent oracle: largest eigenvalue of A^H A by repeated multiplication
    g = a.conj().T @ a
    v = np.ones(g.shape[0], dtype=complex) / np.sqrt(g.shape[0])
    val = 0.0
    for _ in range(iters):
        w = g @ v
        val = np.linalg.norm(w)
        v = w / val
    return float(np.sqrt(np.real(v.conj() @ g @ v)))


def test_diagonal_eigendecomposition():
    d = eig_symmetric(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(d.eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(np.abs(d.eigenvectors), np.eye(3)[:, [1, 2, 0]], atol=1e-15)


def test_path_laplacian_eigenvalues():
    np.testing.assert_allclose(eig_symmetric(np.array([[1.0, -1.0], [-1.0, 1.0]])).eigenvalues, [0, 2], atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_reconstruction_oracle(seed):
    a = sym(np.random.default_rng(seed), 16)
    d = eig_symmetric(a)
    v, lam = d.eigenvectors, d.eigenvalues
    assert np.max(np.abs(v @ np.diag(lam) @ v.T - a)) <= 1e-9
    assert np.max(np.abs(v.T @ v - np.eye(16))) <= 1e-10
    assert np.max(np.abs(a @ v - v * lam)) <= 1e-9 * (1 + spectral_norm(a))
    assert np.all(np.diff(lam) >= 0)


def test_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        eig_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_permutation_consistent(rng):
    a = sym(rng, 10)
    p = rng.permutation(10)
    np.testing.assert_allclose(eig_symmetric(a[np.ix_(p, p)]).eigenvalues, eig_symmetric(a).eigenvalues, atol=1e-10)


def test_spectral_norm_trivial_cases(rng):
    assert spectral_norm(np.diag([1.0, -3.0])) == pytest.approx(3.0, rel=1e-15)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    assert abs(spectral_norm(q) - 1) <= 1e-10
    assert spectral_norm(np.zeros((3, 3))) == 0


@pytest.mark.parametrize("seed", range(5))
def test_spectral_norm_power_iteration_oracle(seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((8, 8)) + 1j * r.standard_normal((8, 8))
    assert spectral_norm(a) == pytest.approx(power_iteration_norm(a), rel=1e-8)


def test_spectral_norm_dominates_rayleigh_quotients(rng):
    a = rng.standard_normal((9, 9))
    nrm = spectral_norm(a)
    x = rng.standard_normal((9, 100))
    x /= np.linalg.norm(x, axis=0)
    assert np.all(np.linalg.norm(a @ x, axis=0) <= nrm * (1 + 1e-12))


def test_solve_identity(rng):
    b = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    np.testing.assert_array_equal(solve_complex(np.eye(5), b), b)


@pytest.mark.parametrize("seed", range(5))
def test_solve_hermitian_against_eigensolver(seed):
    r = np.random.default_rng(seed)
    a = sym(r, 8) + 6 * np.eye(8)
    b = r.standard_normal(8) + 1j * r.standard_normal(8)
    d = eig_symmetric(a)
    v = d.eigenvectors
    expected = v @ ((v.T @ b) / d.eigenvalues)
    np.testing.assert_allclose(solve_complex(a, b), expected, rtol=1e-10, atol=1e-12)


def test_solve_residual_many_systems():
    r = np.random.default_rng(3)
    for _ in range(200):
        n = int(r.integers(1, 12))
        a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n)) + 3 * n * np.eye(n)
        b = r.standard_normal(n)
        x = solve_complex(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-12 * np.linalg.norm(a, 2) * np.linalg.norm(x) + 1e-14


def test_shifted_laplacian_never_singular(lap32):
    x = solve_complex(lap32.matrix + 1j * np.eye(32), np.eye(32))
    assert np.all(np.isfinite(x))


def test_cayley_of_zero_and_identity():
    np.testing.assert_allclose(cayley_of_operator(np.zeros((3, 3))), -np.eye(3), atol=1e-15)
    np.testing.assert_allclose(cayley_of_operator(np.eye(3)), -1j * np.eye(3), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_cayley_spectral_mapping(seed):
    a = sym(np.random.default_rng(seed), 8)
    lam = eig_symmetric(a).eigenvalues
    expected = (lam - 1j) / (lam + 1j)
    got = np.linalg.eigvals(cayley_of_operator(ShiftOperator(a, "adjacency")))
    # match as multisets by sorting on the angle
    key = lambda z: np.sort_complex(np.round(z, 12))
    np.testing.assert_allclose(key(got), key(expected), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**32), scale=st.floats(1e-3, 1e3))
def test_cayley_is_unitary(n, seed, scale):
    a = sym(np.random.default_rng(seed), n) * scale
    c = cayley_of_operator(a)
    assert np.max(np.abs(c.conj().T @ c - np.eye(n))) <= 1e-10

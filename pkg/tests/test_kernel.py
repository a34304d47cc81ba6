import numpy as np
import pytest
import scipy.linalg
from scipy import sparse

from hsim.kernel import (
    RankCollapseError,
    SingularFactorError,
    dense_generalized_eig,
    ldlt_factorize,
    solve_block,
)


def random_spd(n, seed, density=0.1):
    rng = np.random.default_rng(seed)
    a = sparse.random(n, n, density=density, random_state=rng)
    a = a + a.T
    return (a + sparse.identity(n) * (abs(a).sum(axis=1).max() + 1)).tocsc()


def test_identity():
    f = ldlt_factorize(sparse.identity(5, format="csc"))
    b = np.arange(5.0)
    np.testing.assert_array_equal(f.solve(b), b)
    assert f.inertia() == (0, 5)


def test_indefinite_diagonal():
    f = ldlt_factorize(sparse.diags([2.0, -3.0]).tocsc())
    np.testing.assert_allclose(f.solve(np.array([2.0, 3.0])), [1.0, -1.0], rtol=1e-15)
    assert f.inertia() == (1, 1)


def test_factor_is_ldlt():
    a = random_spd(40, 3)
    f = ldlt_factorize(a)
    # U = D L^T: reconstruct L D L^T and compare with the permuted matrix
    L = f.L.toarray()
    rec = L @ np.diag(f.d) @ L.T
    p = f.perm
    pr = f._lu.perm_r
    np.testing.assert_array_equal(p, pr)
    ref = np.zeros_like(rec)
    ref[np.ix_(pr, p)] = a.toarray()
    np.testing.assert_allclose(rec, ref, atol=1e-12)


def test_random_roundtrip():
    a = random_spd(50, 7)
    rng = np.random.default_rng(1)
    x = rng.normal(size=50)
    y = ldlt_factorize(a).solve(a @ x)
    assert np.linalg.norm(y - x) / np.linalg.norm(x) < 1e-10


def test_indefinite_inertia_matches_eigvals():
    a = random_spd(60, 2) - 8.0 * sparse.identity(60)
    w = np.linalg.eigvalsh(a.toarray())
    f = ldlt_factorize(a.tocsc())
    assert f.inertia() == (int((w < 0).sum()), int((w > 0).sum()))


def test_singular_detected():
    a = sparse.csc_matrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    with pytest.raises(SingularFactorError):
        ldlt_factorize(a)


def test_block_solve_residual():
    a = random_spd(100, 4)
    b = np.random.default_rng(2).normal(size=(100, 8))
    x = solve_block(ldlt_factorize(a), b)
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-12


def test_block_columns_independent():
    a = random_spd(80, 5)
    f = ldlt_factorize(a)
    b = np.random.default_rng(3).normal(size=(80, 70))
    x = solve_block(f, b)
    for j in (0, 31, 32, 69):
        np.testing.assert_array_equal(x[:, j], solve_block(f, b[:, [j]])[:, 0])


def test_block_threads_deterministic():
    a = random_spd(120, 6)
    f = ldlt_factorize(a)
    b = np.random.default_rng(4).normal(size=(120, 100))
    x1 = solve_block(f, b, threads=1)
    x4 = solve_block(f, b, threads=4)
    assert x1.tobytes() == x4.tobytes()


def test_dense_eig_examples():
    w, x = dense_generalized_eig(np.diag([3.0, 1.0]), np.eye(2))
    np.testing.assert_allclose(w, [1.0, 3.0])
    w, x = dense_generalized_eig(np.eye(2), np.diag([4.0, 1.0]))
    np.testing.assert_allclose(w, [0.25, 1.0])
    np.testing.assert_allclose(x.T @ np.diag([4.0, 1.0]) @ x, np.eye(2), atol=1e-15)


def test_dense_eig_vs_lapack():
    rng = np.random.default_rng(8)
    b = rng.normal(size=(20, 20))
    s = b + b.T
    c = rng.normal(size=(20, 20))
    m = c @ c.T + 20 * np.eye(20)
    w, x = dense_generalized_eig(s, m)
    ref = scipy.linalg.eigh(s, m, eigvals_only=True)
    np.testing.assert_allclose(w, ref, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(x.T @ m @ x, np.eye(20), atol=1e-10)
    np.testing.assert_allclose(s @ x - m @ x * w, 0, atol=1e-9)
    assert (np.diff(w) >= 0).all()


def test_dense_eig_shift_property():
    rng = np.random.default_rng(9)
    b = rng.normal(size=(12, 12))
    s = b + b.T
    m = np.diag(rng.uniform(1, 2, 12))
    w0, _ = dense_generalized_eig(s, m)
    w1, _ = dense_generalized_eig(s - 0.7 * m, m)
    np.testing.assert_allclose(w1, w0 - 0.7, atol=1e-12)


def test_dense_eig_rank_collapse():
    with pytest.raises(RankCollapseError):
        dense_generalized_eig(np.eye(2), np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_dense_eig_condition_guard():
    from hsim.kernel import IllConditionedError

    m = np.diag([1.0, 1e-8])
    w, _ = dense_generalized_eig(np.eye(2), m)
    np.testing.assert_allclose(w, [1.0, 1e8])
    with pytest.raises(IllConditionedError):
        dense_generalized_eig(np.eye(2), m, max_condition=1e6)

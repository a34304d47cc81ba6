import numpy as np
import pytest
from scipy import sparse

from hsim.errors import HsimError
from hsim.oracle import DENSE_CAP, dense_reference, eigen_clusters, max_subspace_angle, sphere_analytic


def test_sphere_analytic():
    ref = sphere_analytic(10)
    assert ref.eigenvalues.tolist() == [0, 2, 2, 2, 6, 6, 6, 6, 6, 12]
    assert len(sphere_analytic(100).eigenvalues) == 100
    # 1 + 3 + ... + 19 = 100, so the 100th value closes the l = 9 block
    assert sphere_analytic(100).eigenvalues[-1] == 90


def test_dense_reference_diagonal():
    s = sparse.diags([3.0, 1.0, 2.0])
    ref = dense_reference(s, sparse.identity(3), 2)
    np.testing.assert_allclose(ref.eigenvalues, [1.0, 2.0])
    assert ref.eigenvectors.shape == (3, 2)


def test_dense_reference_cap():
    with pytest.raises(HsimError):
        dense_reference(sparse.identity(DENSE_CAP + 1), sparse.identity(DENSE_CAP + 1), 1)


def test_clusters():
    groups = eigen_clusters([0.0, 2.0, 2.0 + 1e-9, 2.0, 6.0, 6.0, 12.0])
    assert [g.tolist() for g in groups] == [[0], [1, 2, 3], [4, 5], [6]]


def test_subspace_angle_rotation_invariant():
    rng = np.random.default_rng(0)
    n = 30
    md = rng.uniform(1, 2, n)
    x = np.linalg.qr(rng.normal(size=(n, 6)))[0] / np.sqrt(md)[:, None]
    lam = np.array([0, 2, 2, 2, 6, 6, 7.0])
    c, s = np.cos(0.4), np.sin(0.4)
    y = x.copy()
    y[:, [1, 2]] = x[:, [1, 2]] @ np.array([[c, -s], [s, c]])
    y[:, 0] *= -1
    assert max_subspace_angle(x, y, md, lam, 6) < 1e-12
    # a cluster crossing the cut is skipped
    assert max_subspace_angle(x, y[:, [0, 1, 2, 3, 5, 4]], md, lam, 5) < 1e-12

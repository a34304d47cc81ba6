import numpy as np
import pytest
from scipy import sparse

from hsim import meshgen
from hsim.mesh import EdgeGraph
from hsim.operators import assemble


def path_graph(n, weight=1.0):
    i = np.arange(n - 1)
    a = sparse.coo_matrix((np.full(n - 1, weight), (i, i + 1)), shape=(n, n))
    a = (a + a.T).tocsr()
    a.sort_indices()
    return EdgeGraph(a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(float))


def random_graph(n, seed):
    """Random connected weighted graph: a spanning path plus extra random edges."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    rows = list(perm[:-1])
    cols = list(perm[1:])
    extra = rng.integers(0, n, size=(2 * n, 2))
    extra = extra[extra[:, 0] != extra[:, 1]]
    rows += list(extra[:, 0])
    cols += list(extra[:, 1])
    w = rng.uniform(0.1, 2.0, len(rows))
    a = sparse.coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
    a = a.maximum(a.T).tocsr()
    a.sort_indices()
    return EdgeGraph(a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(float))


@pytest.fixture(scope="session")
def sphere642():
    return meshgen.icosphere(3)


@pytest.fixture(scope="session")
def sphere2562():
    return meshgen.icosphere(4)


@pytest.fixture(scope="session")
def torus3000():
    return meshgen.torus(60, 50)


@pytest.fixture(scope="session")
def dome():
    # 1 + 3 * 25 * 26 = 1951 vertices
    return meshgen.disk(25, bulge=0.3)


@pytest.fixture(scope="session")
def sphere642_ops(sphere642):
    return assemble(sphere642)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])

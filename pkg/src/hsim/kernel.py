"""Linear-algebra kernels: sparse symmetric LDL^T with block solves, dense generalized eigensolver."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as sla

from .errors import NumericalError

# Columns per block solve. Fixed so that results never depend on the thread count.
SOLVE_CHUNK = 32

# Pivot magnitude ratio below which a factorization is treated as singular.
SINGULAR_PIVOT_RATIO = 1e-12


class SingularFactorError(NumericalError):
    """The matrix is singular to working precision (the shift hit an eigenvalue)."""


class RankCollapseError(NumericalError):
    """The reduced mass matrix is not positive definite."""


class LdltFactor:
    """Symmetric factorization ``P^T A P = L D L^T`` of a sparse symmetric matrix.

    Uses SuperLU with a minimum-degree ordering on ``A + A^T`` and diagonal-only
    pivoting, so ``U = D L^T`` and the factor is a genuine LDL^T with 1x1
    pivots. The object is immutable after construction.
    """

    def __init__(self, a: sparse.spmatrix):
        a = sparse.csc_matrix(a, dtype=float)
        if a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        self.n = a.shape[0]
        try:
            self._lu = sla.splu(
                a,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options=dict(SymmetricMode=True),
            )
        except RuntimeError as exc:
            raise SingularFactorError(str(exc)) from exc
        d = self._lu.U.diagonal()
        ad = np.abs(d)
        if not np.all(np.isfinite(d)) or ad.min() <= SINGULAR_PIVOT_RATIO * ad.max():
            raise SingularFactorError(f"pivot ratio {ad.min() / ad.max():.3e} below {SINGULAR_PIVOT_RATIO:g}")
        self.d = d

    @property
    def perm(self) -> np.ndarray:
        return self._lu.perm_c

    @property
    def L(self) -> sparse.csc_matrix:
        return self._lu.L

    @property
    def nnz(self) -> int:
        return self._lu.L.nnz + self._lu.U.nnz

    def inertia(self) -> tuple[int, int]:
        """(negative, positive) pivot counts; by Sylvester's law the matrix inertia."""
        return int((self.d < 0).sum()), int((self.d > 0).sum())

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float))


def ldlt_factorize(a: sparse.spmatrix) -> LdltFactor:
    return LdltFactor(a)


def solve_block(factor: LdltFactor, b: np.ndarray, threads: int = 1) -> np.ndarray:
    """Solve ``A X = B`` column block by column block.

    Chunks of :data:`SOLVE_CHUNK` columns are independent and may run on
    ``threads`` workers; the chunking itself never changes.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        return factor.solve(b)
    if b.shape[0] != factor.n:
        raise ValueError(f"block has {b.shape[0]} rows, factor has {factor.n}")
    q = b.shape[1]
    out = np.empty_like(b)
    starts = range(0, q, SOLVE_CHUNK)

    def work(s):
        out[:, s : s + SOLVE_CHUNK] = factor.solve(np.ascontiguousarray(b[:, s : s + SOLVE_CHUNK]))

    if threads > 1 and q > SOLVE_CHUNK:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    else:
        for s in starts:
            work(s)
    return out


class IllConditionedError(RankCollapseError):
    """Reduced mass matrix factors, but too ill-conditioned to trust the result."""


def dense_generalized_eig(
    s: np.ndarray, m: np.ndarray, max_condition: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``S X = M X diag(w)`` for symmetric ``S`` and SPD ``M``.

    Reduces to a standard symmetric problem with the Cholesky factor of ``M``.
    Returns ascending eigenvalues and ``M``-orthonormal eigenvectors. With
    ``max_condition`` set, a Cholesky-based lower bound on ``cond(M)`` above
    it raises ``IllConditionedError``.
    """
    s = np.asarray(s, dtype=float)
    m = np.asarray(m, dtype=float)
    try:
        chol = scipy.linalg.cholesky(0.5 * (m + m.T), lower=True)
    except np.linalg.LinAlgError as exc:
        raise RankCollapseError(f"reduced mass matrix is not positive definite: {exc}") from exc
    if max_condition is not None:
        d = np.abs(np.diag(chol))
        est = (d.max() / d.min()) ** 2
        if not est <= max_condition:
            raise IllConditionedError(f"reduced mass matrix condition >= {est:.2e}")
    c = scipy.linalg.solve_triangular(chol, s, lower=True)
    c = scipy.linalg.solve_triangular(chol, c.T, lower=True)
    w, y = np.linalg.eigh(0.5 * (c + c.T))
    x = scipy.linalg.solve_triangular(chol, y, lower=True, trans="T")
    return w, x

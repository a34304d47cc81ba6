"""Subspace Iteration Method for ``S x = lambda M x`` with shifting and locking."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse

from .errors import NumericalError
from .kernel import RankCollapseError, SingularFactorError, dense_generalized_eig, ldlt_factorize, solve_block

log = logging.getLogger(__name__)

# |lambda| below this fraction of the largest estimate counts as a kernel mode
ZERO_EIGENVALUE_RTOL = 1e-12
# above this the projected problem is solved in a re-orthonormalized basis
MAX_GRAM_CONDITION = 1e6


class NotConvergedError(NumericalError):
    pass


class NormMode(str, Enum):
    M_INVERSE = "m_inverse"
    STANDARD = "standard"


@dataclass
class SimConfig:
    p: int
    q: int
    eps: float = 1e-2
    shift: float = 0.0
    norm_mode: NormMode = NormMode.M_INVERSE
    max_iterations: int = 50
    double_step: bool = False
    lock: bool = True
    threads: int = 1
    # Replay mode: run exactly len(schedule) iterations without convergence
    # tests, freezing the columns flagged in each entry.
    lock_schedule: list[np.ndarray] | None = None

    def __post_init__(self):
        if self.p < 1 or self.q < self.p:
            raise ValueError(f"need 1 <= p <= q, got p={self.p}, q={self.q}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    converged: int
    max_residual: float
    seconds: float


@dataclass
class EigenSolution:
    """Ascending eigenvalues (``q`` of them, the first ``p`` converged),
    ``M``-orthonormal eigenvectors and per-pair relative residuals."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    p: int
    shift: float = 0.0
    trace: list[TraceRow] = field(default_factory=list)
    lock_schedule: list[np.ndarray] = field(default_factory=list)

    def truncated(self, k: int | None = None) -> EigenSolution:
        k = self.p if k is None else k
        return EigenSolution(
            self.eigenvalues[:k].copy(),
            self.eigenvectors[:, :k].copy(),
            self.residuals[:k].copy(),
            self.iterations,
            min(self.p, k),
            self.shift,
            list(self.trace),
            list(self.lock_schedule),
        )


def subspace_dimension(p: int) -> int:
    if p < 1:
        raise ValueError("p must be >= 1")
    return max(math.ceil(1.5 * p), p + 8)


def initial_basis(s: sparse.spmatrix, m: sparse.spmatrix, q: int, seed: int | None = 0) -> np.ndarray:
    """Heuristic start block: ``diag(M)``, unit vectors at the ``q - 2``
    smallest ``S_ii / M_ii`` ratios, and one random column."""
    n = s.shape[0]
    if not 1 <= q <= n:
        raise ValueError(f"need 1 <= q <= n, got q={q}, n={n}")
    sd = s.diagonal()
    md = m.diagonal()
    phi = np.zeros((n, q))
    phi[:, 0] = md
    if q >= 2:
        phi[:, q - 1] = np.random.default_rng(seed).uniform(-1.0, 1.0, n)
    if q >= 3:
        ratio = sd / md
        idx = np.argsort(ratio, kind="stable")[: q - 2]
        phi[idx, np.arange(1, q - 1)] = 1.0
    return phi


def residuals(
    s: sparse.spmatrix,
    m: sparse.spmatrix,
    lams: np.ndarray,
    phi: np.ndarray,
    norm_mode: NormMode = NormMode.M_INVERSE,
    lam_scale: float | None = None,
) -> np.ndarray:
    """Relative residuals ``||S x - l M x|| / ||S x||`` column by column.

    In ``M_INVERSE`` mode the norm is ``sqrt(v^T M^{-1} v)`` with diagonal
    ``M``; in ``STANDARD`` mode it is Euclidean. For kernel modes
    (``|l| <= 1e-12 * lam_scale``) the denominator is ``||M x||`` instead.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    phi = np.asarray(phi, dtype=float).reshape(phi.shape[0], -1)
    sx = np.asarray(s @ phi)
    mx = np.asarray(m @ phi)
    r = sx - mx * lams
    if NormMode(norm_mode) is NormMode.M_INVERSE:
        minv = 1.0 / m.diagonal()
        num = np.sqrt(np.einsum("ij,ij,i->j", r, r, minv))
        den = np.sqrt(np.einsum("ij,ij,i->j", sx, sx, minv))
        alt = np.sqrt(np.einsum("ij,ij,i->j", mx, mx, minv))
    else:
        num = np.linalg.norm(r, axis=0)
        den = np.linalg.norm(sx, axis=0)
        alt = np.linalg.norm(mx, axis=0)
    if lam_scale is None:
        lam_scale = float(np.max(np.abs(lams)))
    kernel = (np.abs(lams) <= ZERO_EIGENVALUE_RTOL * lam_scale) | (den == 0)
    den = np.where(kernel, alt, den)
    return num / den


def residual(s, m, lam: float, phi: np.ndarray, norm_mode=NormMode.M_INVERSE, lam_scale=None) -> float:
    return float(residuals(s, m, [lam], np.asarray(phi).reshape(-1, 1), norm_mode, lam_scale)[0])


def choose_shift(estimates, p: int, alpha: float = 0.1) -> float:
    """Estimate at 1-based position ``max(1, floor(alpha * p))``."""
    if not 0 <= alpha < 0.5:
        raise ValueError("alpha must lie in [0, 0.5)")
    j = max(1, math.floor(alpha * p + 1e-9))
    return float(estimates[j - 1])


def spectral_scale(s: sparse.spmatrix, m: sparse.spmatrix) -> float:
    """Median of ``S_ii / M_ii``: the natural eigenvalue scale of the pair."""
    return float(np.median(np.abs(s.diagonal() / m.diagonal())))


def factorize_shifted(s, m, mu: float):
    """Factor ``S - mu M``; on a singular shift retry once with a perturbed one.

    The perturbation is ``mu * 1e-4`` plus ``1e-6`` of the pair's spectral scale,
    so that a zero shift on a closed surface moves off the constant mode.
    """
    try:
        return ldlt_factorize((s - mu * m).tocsc()), mu
    except SingularFactorError as first:
        mu2 = mu * (1.0 - 1e-4) - max(1e-12, 1e-6 * spectral_scale(s, m))
        log.info("singular shift %.6g (%s); retrying with %.6g", mu, first, mu2)
        try:
            return ldlt_factorize((s - mu2 * m).tocsc()), mu2
        except SingularFactorError as exc:
            raise SingularFactorError(f"shift {mu!r} and retry {mu2!r} both singular: {exc}") from exc


def _orthonormalize(x: np.ndarray, m) -> np.ndarray:
    """Orthonormal columns in the inner product of the row-sum lumped ``M``.

    Householder QR works on the vectors rather than their Gram matrix, so
    directions that are tiny next to a dominant one survive. For diagonal ``M``
    the result is M-orthonormal; otherwise it is well conditioned in ``M``.
    Raises ``RankCollapseError`` for a numerically dependent block.
    """
    w = np.sqrt(np.asarray(m.sum(axis=1)).ravel())
    q, r = np.linalg.qr(w[:, None] * x)
    d = np.abs(np.diag(r))
    if not d.min() > 1e-13 * d.max():
        raise RankCollapseError(f"iterated block is numerically rank deficient (column {int(d.argmin())})")
    return q / w[:, None]


def _deflate(x: np.ndarray, held: np.ndarray, m) -> np.ndarray:
    """Remove the M-projection of ``x`` onto the (M-orthonormal) locked columns.

    The span of ``[held, x]`` is unchanged, but without this the iterated
    columns drift into the locked directions whenever those sit near the shift.
    """
    if held.shape[1] == 0:
        return x
    x = x - held @ (held.T @ np.asarray(m @ x))
    return x / np.sqrt(np.einsum("ij,ij->j", x, np.asarray(m @ x)))


def sim_solve(s, m, phi0: np.ndarray, config: SimConfig) -> EigenSolution:
    """Subspace iterations from the block ``phi0`` until the first ``p`` pairs converge.

    One factorization of ``S - mu M`` serves every iteration. Columns among the
    first ``p`` whose residual is below ``eps / 10`` skip the inverse iteration
    but stay in the Rayleigh-Ritz projection.
    """
    s = sparse.csr_matrix(s)
    m = sparse.csr_matrix(m)
    n = s.shape[0]
    phi = np.array(phi0, dtype=float)
    if phi.shape != (n, config.q):
        raise ValueError(f"initial block has shape {phi.shape}, expected {(n, config.q)}")
    if NormMode(config.norm_mode) is NormMode.M_INVERSE and (m - sparse.diags(m.diagonal())).count_nonzero():
        raise ValueError("the M^-1 norm needs a diagonal mass matrix")

    factor, mu = factorize_shifted(s, m, config.shift)
    replay = config.lock_schedule
    n_iter = len(replay) if replay is not None else config.max_iterations
    p, q, eps = config.p, config.q, config.eps
    locked = np.zeros(q, dtype=bool)
    sol = EigenSolution(np.zeros(q), phi, np.full(q, np.inf), 0, p, mu)
    t0 = time.perf_counter()

    for it in range(1, n_iter + 1):
        if replay is not None:
            locked = np.asarray(replay[it - 1], dtype=bool)
        active = np.flatnonzero(~locked)
        psi = phi.copy()
        if len(active):
            held = phi[:, locked]
            x = _deflate(solve_block(factor, np.asarray(m @ phi[:, active]), config.threads), held, m)
            if config.double_step:
                x = _deflate(solve_block(factor, np.asarray(m @ x), config.threads), held, m)
            psi[:, active] = x
        mpsi = np.asarray(m @ psi)
        scale = 1.0 / np.sqrt(np.einsum("ij,ij->j", psi, mpsi))
        psi *= scale
        mpsi *= scale
        try:
            lam, y = dense_generalized_eig(psi.T @ np.asarray(s @ psi), psi.T @ mpsi, MAX_GRAM_CONDITION)
        except RankCollapseError as exc:
            log.debug("iteration %d: %s; re-orthonormalizing the block", it, exc)
            try:
                psi = _orthonormalize(psi, m)
                lam, y = dense_generalized_eig(psi.T @ np.asarray(s @ psi), psi.T @ np.asarray(m @ psi))
            except RankCollapseError as exc2:
                raise RankCollapseError(f"iteration {it}: {exc2}") from exc2
        phi = psi @ y
        sol.lock_schedule.append(locked.copy())
        sol.iterations = it
        sol.eigenvalues = lam
        sol.eigenvectors = phi

        if replay is not None:
            continue
        res = residuals(s, m, lam, phi, config.norm_mode)
        sol.residuals = res
        n_conv = int((res[:p] < eps).sum())
        sol.trace.append(TraceRow(it, n_conv, float(res[:p].max()), time.perf_counter() - t0))
        log.debug("iteration %d: %d/%d converged, max residual %.3e", it, n_conv, p, res[:p].max())
        if n_conv == p:
            return sol
        if config.lock:
            locked = np.zeros(q, dtype=bool)
            locked[:p] = res[:p] < 0.1 * eps

    if replay is not None:
        sol.residuals = residuals(s, m, sol.eigenvalues, sol.eigenvectors, config.norm_mode)
        return sol
    raise NotConvergedError(
        f"{p} pairs not converged after {n_iter} iterations (max residual {sol.residuals[:p].max():.3e}, eps {eps:g})"
    )

"""Reference spectra for verification: full dense solves and the unit sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import HsimError

DENSE_CAP = 5000


@dataclass(frozen=True)
class ReferenceSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    provenance: str


def dense_reference(s, m, count: int) -> ReferenceSpectrum:
    """Lowest ``count`` pairs from LAPACK's generalized symmetric driver."""
    n = s.shape[0]
    if n > DENSE_CAP:
        raise HsimError(f"dense reference limited to n <= {DENSE_CAP}, got {n}")
    a = s.toarray() if hasattr(s, "toarray") else np.asarray(s)
    b = m.toarray() if hasattr(m, "toarray") else np.asarray(m)
    w, x = scipy.linalg.eigh(a, b, subset_by_index=[0, min(count, n) - 1], driver="gvx")
    return ReferenceSpectrum(w, x, "dense-full")


def sphere_analytic(count: int) -> ReferenceSpectrum:
    """``l (l + 1)`` with multiplicity ``2 l + 1``, truncated to ``count`` values."""
    if count < 1:
        raise ValueError("count must be >= 1")
    vals = []
    l = 0
    while len(vals) < count:
        vals.extend([l * (l + 1)] * (2 * l + 1))
        l += 1
    return ReferenceSpectrum(np.array(vals[:count], dtype=float), None, "analytic-sphere")


def eigen_clusters(eigenvalues, rtol: float = 1e-4) -> list[np.ndarray]:
    """Group ascending eigenvalues whose relative gap is below ``rtol``.

    Gaps are measured against ``max(|l|, l_2)`` so that the near-zero end of
    the spectrum does not split into singletons.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    floor = abs(lam[1]) if len(lam) > 1 else 1.0
    groups, cur = [], [0]
    for i in range(1, len(lam)):
        if lam[i] - lam[i - 1] <= rtol * max(abs(lam[i]), floor):
            cur.append(i)
        else:
            groups.append(np.array(cur))
            cur = [i]
    groups.append(np.array(cur))
    return groups


def max_subspace_angle(x, y, mass_diag, reference_eigenvalues, count: int, rtol: float = 1e-4) -> float:
    """Largest M-principal angle between matching eigenspaces of ``x`` and ``y``.

    Eigenspaces are the clusters of ``reference_eigenvalues`` (which should
    extend past ``count``); a cluster crossing index ``count`` is skipped
    since only part of it is available.
    """
    w = np.sqrt(np.asarray(mass_diag))[:, None]
    worst = 0.0
    for g in eigen_clusters(reference_eigenvalues, rtol):
        if g[-1] >= count:
            break
        ang = scipy.linalg.subspace_angles(w * x[:, g], w * y[:, g])
        worst = max(worst, float(ang.max()))
    return worst

"""Cotangent stiffness and lumped mass matrices on linear triangle elements."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.io
from scipy import sparse

from .mesh import TriangleMesh, triangle_areas


class Boundary(str, Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"

    @classmethod
    def parse(cls, value) -> Boundary:
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        if v in ("closed", "neumann"):
            return cls.NEUMANN
        return cls(v)


@dataclass(frozen=True)
class OperatorPair:
    """Stiffness ``S`` and diagonal mass ``M`` over the degrees of freedom ``dofs``.

    ``dofs[k]`` is the mesh vertex carried by row ``k``. For Neumann (and closed
    surfaces) this is every vertex; for Dirichlet only interior vertices.
    """

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    dofs: np.ndarray

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]


def interior_vertices(mesh: TriangleMesh) -> np.ndarray:
    keep = np.ones(mesh.n_vertices, dtype=bool)
    keep[mesh.boundary_vertices()] = False
    return np.flatnonzero(keep)


def _full_stiffness(mesh: TriangleMesh) -> sparse.csr_matrix:
    x = mesh.positions
    f = mesh.faces
    rows, cols, vals = [], [], []
    # corner k is opposite edge (i, j)
    for k, (i, j) in ((0, (1, 2)), (1, (2, 0)), (2, (0, 1))):
        a = x[f[:, i]] - x[f[:, k]]
        b = x[f[:, j]] - x[f[:, k]]
        cot = np.einsum("ij,ij->i", a, b) / np.linalg.norm(np.cross(a, b), axis=1)
        w = -0.5 * cot
        rows += [f[:, i], f[:, j]]
        cols += [f[:, j], f[:, i]]
        vals += [w, w]
    n = mesh.n_vertices
    off = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    s = (off + sparse.diags(diag)).tocsr()
    s.sort_indices()
    return s


def _restrict(a: sparse.spmatrix, dofs: np.ndarray) -> sparse.csr_matrix:
    a = a.tocsr()[dofs][:, dofs].tocsr()
    a.sort_indices()
    return a


def assemble_stiffness(mesh: TriangleMesh, boundary="neumann") -> sparse.csr_matrix:
    """Cotangent matrix ``S_ij = -(cot a_ij + cot b_ij) / 2``, rows summing to zero.

    With Dirichlet conditions the boundary rows and columns are deleted.
    """
    s = _full_stiffness(mesh)
    if Boundary.parse(boundary) is Boundary.DIRICHLET:
        return _restrict(s, interior_vertices(mesh))
    return s


def assemble_lumped_mass(mesh: TriangleMesh, boundary="neumann") -> sparse.csr_matrix:
    """Barycentric lumped mass: one third of the incident triangle areas per vertex."""
    a = triangle_areas(mesh) / 3.0
    m = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.add.at(m, mesh.faces[:, c], a)
    if Boundary.parse(boundary) is Boundary.DIRICHLET:
        m = m[interior_vertices(mesh)]
    return sparse.diags(m).tocsr()


def assemble(mesh: TriangleMesh, boundary="neumann") -> OperatorPair:
    b = Boundary.parse(boundary)
    dofs = interior_vertices(mesh) if b is Boundary.DIRICHLET else np.arange(mesh.n_vertices)
    if len(dofs) == 0:
        raise ValueError("Dirichlet conditions leave no interior vertices")
    return OperatorPair(assemble_stiffness(mesh, b), assemble_lumped_mass(mesh, b), dofs)


def write_matrix_market(path, a: sparse.spmatrix, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), sparse.coo_matrix(a), comment=comment, precision=17)


def read_matrix_market(path) -> sparse.csr_matrix:
    return sparse.csr_matrix(scipy.io.mmread(str(path)))

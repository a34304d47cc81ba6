"""Triangle mesh loading and the geometric queries used by assembly and sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import HsimError

log = logging.getLogger(__name__)


class MeshError(HsimError):
    """Raised for unreadable, malformed or topologically invalid meshes."""


class MeshParseError(MeshError):
    pass


class MeshTopologyError(MeshError):
    pass


@dataclass(frozen=True)
class EdgeGraph:
    """Undirected, edge-length weighted vertex graph in CSR form.

    ``indptr``/``indices``/``weights`` follow the scipy CSR convention: the
    neighbours of vertex ``i`` are ``indices[indptr[i]:indptr[i+1]]``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    def to_sparse(self) -> sparse.csr_matrix:
        n = self.n_vertices
        return sparse.csr_matrix((self.weights, self.indices, self.indptr), shape=(n, n))


@dataclass(frozen=True)
class TriangleMesh:
    positions: np.ndarray
    faces: np.ndarray
    n_dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "positions", np.ascontiguousarray(self.positions, dtype=float))
        object.__setattr__(self, "faces", np.ascontiguousarray(self.faces, dtype=np.int64))

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as a sorted ``(m, 2)`` array with ``i < j``."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def boundary_vertices(self) -> np.ndarray:
        """Sorted indices of vertices on edges that belong to exactly one face."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return np.unique(uniq[counts == 1])

    def is_closed(self) -> bool:
        return len(self.boundary_vertices()) == 0

    def transformed(self, matrix=None, offset=None, scale: float = 1.0) -> TriangleMesh:
        x = self.positions * scale
        if matrix is not None:
            x = x @ np.asarray(matrix).T
        if offset is not None:
            x = x + np.asarray(offset)
        return TriangleMesh(x, self.faces.copy())


def triangle_areas(mesh: TriangleMesh) -> np.ndarray:
    x = mesh.positions
    f = mesh.faces
    cr = np.cross(x[f[:, 1]] - x[f[:, 0]], x[f[:, 2]] - x[f[:, 0]])
    return 0.5 * np.linalg.norm(cr, axis=1)


def surface_area(mesh: TriangleMesh) -> float:
    return float(triangle_areas(mesh).sum())


def build_edge_graph(mesh: TriangleMesh) -> EdgeGraph:
    e = mesh.edges()
    w = np.linalg.norm(mesh.positions[e[:, 0]] - mesh.positions[e[:, 1]], axis=1)
    n = mesh.n_vertices
    a = sparse.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
        shape=(n, n),
    ).tocsr()
    a.sort_indices()
    return EdgeGraph(a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(float))


def from_arrays(positions, faces) -> TriangleMesh:
    """Validate raw arrays, drop degenerate faces and check connectivity."""
    x = np.asarray(positions, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3 or len(x) == 0:
        raise MeshError("mesh has no vertices")
    f = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if len(f) == 0:
        raise MeshError("mesh has no faces")
    if not np.isfinite(x).all():
        raise MeshParseError("non-finite vertex coordinates")
    if f.min() < 0 or f.max() >= len(x):
        bad = f[(f < 0) | (f >= len(x))][0]
        raise MeshTopologyError(f"face index {bad} out of range for {len(x)} vertices")

    repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    cr = np.cross(x[f[:, 1]] - x[f[:, 0]], x[f[:, 2]] - x[f[:, 0]])
    area2 = np.linalg.norm(cr, axis=1)
    # relative to squared edge scale, so that exact zeros and round-off slivers both go
    scale = np.max(np.abs(x)) ** 2 if np.any(x) else 1.0
    degenerate = repeated | (area2 <= 1e-14 * scale)
    n_dropped = int(degenerate.sum())
    if n_dropped:
        log.warning("dropped %d degenerate face(s)", n_dropped)
        f = f[~degenerate]
    if len(f) == 0:
        raise MeshError("mesh has no non-degenerate faces")

    mesh = TriangleMesh(x, f, n_dropped=n_dropped)
    n_comp, _ = csgraph.connected_components(build_edge_graph(mesh).to_sparse(), directed=False)
    if n_comp != 1:
        raise MeshTopologyError(f"mesh is not edge-connected ({n_comp} components)")
    return mesh


def _fan(poly: list[int]) -> list[tuple[int, int, int]]:
    return [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]


def _read_off(text: str) -> tuple[list, list]:
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    if not tokens or not tokens[0][0].upper().endswith("OFF"):
        raise MeshParseError("missing OFF header")
    head = tokens[0][1:]
    rows = tokens[1:]
    if head:  # counts on the header line
        rows = [head] + rows
    try:
        nv, nf = int(rows[0][0]), int(rows[0][1])
        verts = [[float(c) for c in r[:3]] for r in rows[1 : 1 + nv]]
        faces = []
        for r in rows[1 + nv : 1 + nv + nf]:
            k = int(r[0])
            poly = [int(c) for c in r[1 : 1 + k]]
            if k < 3 or len(poly) != k:
                raise MeshParseError(f"bad face record {' '.join(r)!r}")
            faces.extend(_fan(poly))
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"malformed OFF file: {exc}") from exc
    if len(verts) != nv or any(len(v) != 3 for v in verts):
        raise MeshParseError("truncated vertex block")
    if len(faces) == 0 and nf > 0:
        raise MeshParseError("truncated face block")
    return verts, faces


def _read_obj(text: str) -> tuple[list, list]:
    verts, faces = [], []
    try:
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(c) for c in parts[1:4]])
                if len(verts[-1]) != 3:
                    raise MeshParseError(f"bad vertex record {line!r}")
            elif parts[0] == "f":
                poly = []
                for c in parts[1:]:
                    idx = int(c.split("/")[0])
                    # OBJ is 1-based; negative indices count from the end
                    poly.append(idx - 1 if idx > 0 else len(verts) + idx)
                if len(poly) < 3:
                    raise MeshParseError(f"bad face record {line!r}")
                faces.extend(_fan(poly))
    except ValueError as exc:
        raise MeshParseError(f"malformed OBJ file: {exc}") from exc
    return verts, faces


def load_mesh(path, format: str | None = None) -> TriangleMesh:
    """Read an OFF or OBJ file. Polygons are fan-triangulated.

    ``format`` defaults to the file extension.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).upper()
    if fmt not in ("OFF", "OBJ"):
        raise MeshParseError(f"unsupported mesh format {fmt!r}")
    text = path.read_text()
    verts, faces = _read_off(text) if fmt == "OFF" else _read_obj(text)
    return from_arrays(np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def save_off(mesh: TriangleMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
        for x, y, z in mesh.positions.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")
        for a, b, c in mesh.faces.tolist():
            fh.write(f"3 {a} {b} {c}\n")


def save_obj(mesh: TriangleMesh, path) -> None:
    with open(path, "w") as fh:
        for x, y, z in mesh.positions.tolist():
            fh.write(f"v {x!r} {y!r} {z!r}\n")
        for a, b, c in mesh.faces.tolist():
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")

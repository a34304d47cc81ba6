"""Procedural meshes for tests, benchmarks and the acceptance suite."""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .mesh import TriangleMesh, from_arrays


def icosahedron(radius: float = 1.0) -> TriangleMesh:
    t = (1.0 + 5 ** 0.5) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    v *= radius / np.linalg.norm(v[0])
    return from_arrays(v, f)


def icosphere(subdivisions: int, radius: float = 1.0) -> TriangleMesh:
    """Loop-style 1:4 subdivided icosahedron projected to the sphere.

    Vertex count is ``10 * 4**subdivisions + 2`` (642, 2562, 10242, 40962, ...).
    """
    base = icosahedron()
    v = [row for row in base.positions]
    f = base.faces
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                cache[key] = len(v)
                v.append(0.5 * (v[a] + v[b]))
            return cache[key]

        nf = []
        for a, b, c in f.tolist():
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        f = np.array(nf)
    x = np.array(v)
    x *= radius / np.linalg.norm(x, axis=1, keepdims=True)
    return from_arrays(x, f)


def torus(n_major: int, n_minor: int, major: float = 1.0, minor: float = 0.4) -> TriangleMesh:
    """Regular quad grid on a torus split into triangles; ``n_major * n_minor`` vertices."""
    u = 2 * np.pi * np.arange(n_major) / n_major
    w = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, ww = np.meshgrid(u, w, indexing="ij")
    x = np.stack(
        [(major + minor * np.cos(ww)) * np.cos(uu), (major + minor * np.cos(ww)) * np.sin(uu), minor * np.sin(ww)],
        axis=-1,
    ).reshape(-1, 3)
    i, j = np.meshgrid(np.arange(n_major), np.arange(n_minor), indexing="ij")
    a = i * n_minor + j
    b = ((i + 1) % n_major) * n_minor + j
    c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
    d = i * n_minor + (j + 1) % n_minor
    f = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)])
    return from_arrays(x, f)


def disk(n_rings: int, radius: float = 1.0, bulge: float = 0.0) -> TriangleMesh:
    """Delaunay-triangulated unit disk with ``6k`` points on ring ``k``.

    ``bulge`` lifts the interior to a spherical-cap-like dome so the surface is
    not planar. Vertex count is ``1 + 3 * n_rings * (n_rings + 1)``.
    """
    pts = [np.zeros(2)]
    for k in range(1, n_rings + 1):
        th = 2 * np.pi * (np.arange(6 * k) + 0.5 * (k % 2)) / (6 * k)
        pts.extend(np.stack([np.cos(th), np.sin(th)], -1) * (k / n_rings))
    p = np.array(pts)
    tri = Delaunay(p).simplices
    z = bulge * (1.0 - (p ** 2).sum(1))
    x = np.column_stack([p * radius, z * radius])
    return from_arrays(x, tri)


def perturbed(mesh: TriangleMesh, amplitude: float, seed: int = 0) -> TriangleMesh:
    """Random radial jitter of every vertex; breaks exact symmetries."""
    rng = np.random.default_rng(seed)
    x = mesh.positions * (1.0 + amplitude * rng.uniform(-1.0, 1.0, size=(mesh.n_vertices, 1)))
    return from_arrays(x, mesh.faces)

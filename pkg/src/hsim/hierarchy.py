"""Nested function spaces on a vertex hierarchy.

Level 0 is the mesh itself. Level ``t + 1`` is spanned by hat-like functions
centred at the samples ``V^{t+1}``; the prolongation ``U^t`` lifts coefficient
vectors from level ``t + 1`` to level ``t`` and its transpose restricts.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .mesh import EdgeGraph, TriangleMesh, build_edge_graph, surface_area
from .operators import OperatorPair
from .sampling import VertexSampling, _Csr, dijkstra_within, farthest_point_sample

COARSEST_MIN = 1000
DEFAULT_SIGMA = 7.0


@dataclass(frozen=True)
class LevelPlan:
    """Level sizes ``n^0 > n^1 > ... > n^{T-1}`` and the growth rate between them."""

    T: int
    sizes: tuple[int, ...]
    growth_rate: float


def coarsest_size(p: int) -> int:
    return max(math.ceil(1.5 * p), COARSEST_MIN)


def default_level_count(p: int) -> int:
    return 2 if p <= 200 else 3


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def plan_levels(n0: int, p: int, T: int) -> LevelPlan:
    """Level sizes from the coarsest-size rule and a geometric growth rate.

    The finest size is the mesh size and the coarsest is
    ``max(ceil(1.5 p), 1000)``; intermediate sizes grow from the coarsest by
    ``(n0 / n_coarsest) ** (1 / T)`` per level, rounded to nearest. When the
    mesh is not larger than the coarsest target the plan collapses to a single
    level, solved densely.
    """
    if T < 1 or p < 1:
        raise ValueError("need T >= 1 and p >= 1")
    nc = coarsest_size(p)
    if n0 <= nc or T == 1:
        return LevelPlan(1, (n0,), 1.0)
    g = (n0 / nc) ** (1.0 / T)
    sizes = [0] * T
    sizes[0] = n0
    sizes[T - 1] = nc
    for t in range(T - 2, 0, -1):
        sizes[t] = _round_half_up(g * sizes[t + 1])
    # guard against rounding collisions on tiny meshes
    for t in range(T - 2, 0, -1):
        if not sizes[t + 1] < sizes[t] < sizes[t - 1]:
            return plan_levels(n0, p, T - 1)
    return LevelPlan(T, tuple(sizes), g)


def support_radius(level_size: int, area: float, sigma: float = DEFAULT_SIGMA) -> float:
    """Radius at which ``level_size`` Euclidean disks cover ``sigma`` times the area."""
    if level_size <= 0 or area <= 0 or sigma <= 0:
        raise ValueError("support_radius needs positive inputs")
    return math.sqrt(sigma * area / (level_size * math.pi))


def _nearest_sample(graph: EdgeGraph, sources: np.ndarray) -> np.ndarray:
    """Column index (into ``sources``) of the graph-nearest source for every vertex."""
    g = _Csr(graph)
    n = graph.n_vertices
    dist = [math.inf] * n
    label = [-1] * n
    heap = []
    for j, s in enumerate(sources.tolist()):
        dist[s] = 0.0
        label[s] = j
        heap.append((0.0, j, s))
    heapq.heapify(heap)
    while heap:
        d, j, u = heapq.heappop(heap)
        if d > dist[u] or label[u] != j:
            continue
        for k in range(g.indptr[u], g.indptr[u + 1]):
            v = g.indices[k]
            nd = d + g.weights[k]
            if nd < dist[v] or (nd == dist[v] and j < label[v]):
                dist[v] = nd
                label[v] = j
                heapq.heappush(heap, (nd, j, v))
    return np.array(label, dtype=np.int64)


def build_prolongation(graph: EdgeGraph, fine_set, coarse_set, rho: float) -> sparse.csr_matrix:
    """Row-normalized prolongation from ``coarse_set`` to ``fine_set``.

    Raw weight ``1 - d / rho`` for every (fine vertex, coarse sample) pair at
    graph distance below ``rho``; each row is then scaled to sum to one. Fine
    vertices farther than ``rho`` from every sample get weight 1 on their
    nearest sample.
    """
    fine_set = np.asarray(fine_set, dtype=np.int64)
    coarse_set = np.asarray(coarse_set, dtype=np.int64)
    row_of = np.full(graph.n_vertices, -1, dtype=np.int64)
    row_of[fine_set] = np.arange(len(fine_set))
    g = _Csr(graph)
    rows, cols, vals = [], [], []
    for j, c in enumerate(coarse_set.tolist()):
        ball = dijkstra_within(g, c, rho)
        vs = np.fromiter(ball.keys(), dtype=np.int64, count=len(ball))
        ds = np.fromiter(ball.values(), dtype=float, count=len(ball))
        r = row_of[vs]
        w = 1.0 - ds / rho
        keep = (r >= 0) & (w > 0)
        rows.append(r[keep])
        cols.append(np.full(keep.sum(), j, dtype=np.int64))
        vals.append(w[keep])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)

    covered = np.zeros(len(fine_set), dtype=bool)
    covered[rows] = True
    if not covered.all():
        orphans = np.flatnonzero(~covered)
        label = _nearest_sample(graph, coarse_set)
        rows = np.concatenate([rows, orphans])
        cols = np.concatenate([cols, label[fine_set[orphans]]])
        vals = np.concatenate([vals, np.ones(len(orphans))])

    u = sparse.csr_matrix((vals, (rows, cols)), shape=(len(fine_set), len(coarse_set)))
    u.sort_indices()
    rs = np.asarray(u.sum(axis=1)).ravel()
    u = sparse.diags(1.0 / rs) @ u
    u = u.tocsr()
    u.sort_indices()
    return u


def restrict_operator(a: sparse.spmatrix, u: sparse.spmatrix) -> sparse.csr_matrix:
    """Galerkin product ``U^T A U``, symmetrized to remove round-off asymmetry."""
    u = sparse.csr_matrix(u)
    b = (u.T @ (sparse.csr_matrix(a) @ u)).tocsr()
    b = (0.5 * (b + b.T)).tocsr()
    b.sort_indices()
    return b


def prolong_block(u: sparse.spmatrix, block: np.ndarray) -> np.ndarray:
    return np.asarray(u @ block)


@dataclass
class Hierarchy:
    """Everything HSIM needs per level.

    ``prolongations[t]`` maps level ``t + 1`` to level ``t``; ``stiffness[t]``
    and ``mass[t]`` are the level-``t`` operators (level 0 is the input pair).
    ``samples[t]`` lists the mesh vertices of ``V^t`` for ``t >= 1``.
    """

    plan: LevelPlan
    sigma: float
    area: float
    radii: list[float] = field(default_factory=list)
    samples: list[np.ndarray] = field(default_factory=list)
    prolongations: list[sparse.csr_matrix] = field(default_factory=list)
    stiffness: list[sparse.csr_matrix] = field(default_factory=list)
    mass: list[sparse.csr_matrix] = field(default_factory=list)
    sampling: VertexSampling | None = None

    @property
    def T(self) -> int:
        return len(self.stiffness)

    @property
    def dims(self) -> list[int]:
        return [s.shape[0] for s in self.stiffness]

    def mean_nnz_per_row(self) -> list[float]:
        return [u.nnz / u.shape[0] for u in self.prolongations]


def build_hierarchy(
    mesh: TriangleMesh,
    ops: OperatorPair,
    p: int,
    T: int = 0,
    sigma: float = DEFAULT_SIGMA,
    seed: int | None = 0,
    start: int | None = None,
    graph: EdgeGraph | None = None,
) -> Hierarchy:
    """Sample the vertex hierarchy, build prolongations and restricted operators.

    Level 0 is the degree-of-freedom set of ``ops``. With Dirichlet conditions
    the coarse samples are drawn from interior vertices only (graph distances
    still run over the whole mesh), so every coarse function is centred on an
    unknown and the restricted pair stays definite.
    """
    if T <= 0:
        T = default_level_count(p)
    dofs = np.asarray(ops.dofs, dtype=np.int64)
    plan = plan_levels(len(dofs), p, T)
    area = surface_area(mesh)
    h = Hierarchy(plan=plan, sigma=sigma, area=area, stiffness=[ops.stiffness], mass=[ops.mass])
    if plan.T == 1:
        return h

    graph = graph if graph is not None else build_edge_graph(mesh)
    coarse_first = list(reversed(plan.sizes[1:]))
    full = len(dofs) == mesh.n_vertices
    h.sampling = farthest_point_sample(
        graph, coarse_first, seed=seed, start=start, candidates=None if full else dofs
    )
    sets = [dofs] + [h.sampling.order[:s] for s in plan.sizes[1:]]

    for t in range(plan.T - 1):
        rho = support_radius(plan.sizes[t + 1], area, sigma)
        u = build_prolongation(graph, sets[t], sets[t + 1], rho)
        h.radii.append(rho)
        h.samples.append(sets[t + 1])
        h.prolongations.append(u)
        h.stiffness.append(restrict_operator(h.stiffness[t], u))
        h.mass.append(restrict_operator(h.mass[t], u))
    return h

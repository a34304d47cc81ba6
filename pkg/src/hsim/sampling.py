"""Nested vertex sets by farthest point sampling on the edge graph."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import HsimError
from .mesh import EdgeGraph


class SamplingError(HsimError):
    pass


@dataclass(frozen=True)
class VertexSampling:
    """Samples in insertion order; every level is a prefix of ``order``.

    ``sizes`` lists the level sizes coarsest first, so ``level(k)`` is
    ``order[:sizes[k]]``. ``distance`` holds the graph distance of every vertex
    to the full (finest sampled) set.
    """

    order: np.ndarray
    sizes: tuple[int, ...]
    distance: np.ndarray

    def level(self, k: int) -> np.ndarray:
        return self.order[: self.sizes[k]]

    @property
    def levels(self) -> list[np.ndarray]:
        return [self.level(k) for k in range(len(self.sizes))]


class _Csr:
    """Plain-list view of the graph; indexing Python lists is far cheaper than numpy scalars."""

    __slots__ = ("indptr", "indices", "weights")

    def __init__(self, graph: EdgeGraph):
        self.indptr = graph.indptr.tolist()
        self.indices = graph.indices.tolist()
        self.weights = graph.weights.tolist()


def _as_csr(graph) -> _Csr:
    return graph if isinstance(graph, _Csr) else _Csr(graph)


def dijkstra_within(graph, source: int, radius: float) -> dict[int, float]:
    """Shortest-path distances from ``source`` to every vertex within ``radius``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    g = _as_csr(graph)
    indptr, indices, weights = g.indptr, g.indices, g.weights
    dist = {source: 0.0}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd <= radius and nd < dist.get(v, np.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _insert(g: _Csr, field: list, s: int) -> list[int]:
    # Re-relax outward from s; a vertex whose tentative distance is not an
    # improvement cannot improve anything behind it either.
    indptr, indices, weights = g.indptr, g.indices, g.weights
    field[s] = 0.0
    touched = [s]
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > field[u]:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < field[v]:
                field[v] = nd
                touched.append(v)
                heapq.heappush(heap, (nd, v))
    return touched


def farthest_point_sample(
    graph: EdgeGraph, sizes, seed: int | None = 0, start: int | None = None, candidates=None
) -> VertexSampling:
    """Greedy farthest point sampling producing nested sets of the given sizes.

    ``sizes`` is ordered coarsest first and must be strictly increasing. The
    first sample is ``start`` if given, otherwise drawn from ``seed``. Ties in
    the farthest distance go to the smallest vertex index.

    ``candidates`` optionally limits which vertices may be picked; distances
    are still measured over the whole graph.
    """
    sizes = tuple(int(s) for s in sizes)
    n = graph.n_vertices
    if not sizes or sizes[0] < 1:
        raise SamplingError("sizes must be a non-empty list of positive counts")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise SamplingError(f"sizes must be strictly increasing, got {sizes}")
    allowed = np.ones(n, dtype=bool)
    if candidates is not None:
        allowed[:] = False
        allowed[np.asarray(candidates, dtype=np.int64)] = True
    pool = np.flatnonzero(allowed)
    if sizes[-1] > len(pool):
        raise SamplingError(f"requested {sizes[-1]} samples from {len(pool)} vertices")
    if start is None:
        start = int(pool[np.random.default_rng(seed).integers(len(pool))])
    if not 0 <= start < n or not allowed[start]:
        raise SamplingError(f"start vertex {start} out of range")

    g = _Csr(graph)
    field = [np.inf] * n
    order = [start]
    _insert(g, field, start)
    arr = np.array(field)
    if not np.isfinite(arr).all():
        raise SamplingError("graph is disconnected")
    # non-candidates never win the argmax
    score = np.where(allowed, arr, -1.0)
    while len(order) < sizes[-1]:
        s = int(np.argmax(score))
        order.append(s)
        touched = _insert(g, field, s)
        score[touched] = [field[v] if allowed[v] else -1.0 for v in touched]
    return VertexSampling(np.array(order, dtype=np.int64), sizes, np.array(field))


def multi_source_distance(graph: EdgeGraph, sources) -> np.ndarray:
    """From-scratch distance to the nearest source (scipy reference)."""
    from scipy.sparse import csgraph

    d = csgraph.dijkstra(graph.to_sparse(), directed=False, indices=np.asarray(sources), min_only=True)
    return np.asarray(d)

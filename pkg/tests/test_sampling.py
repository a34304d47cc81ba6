import numpy as np
import pytest
from conftest import path_graph, random_graph
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csgraph

from hsim.mesh import build_edge_graph
from hsim.sampling import (
    SamplingError,
    dijkstra_within,
    farthest_point_sample,
    multi_source_distance,
)


def test_path_graph_examples():
    g = path_graph(5)
    s = farthest_point_sample(g, [2], start=0)
    assert s.level(0).tolist() == [0, 4]
    s = farthest_point_sample(g, [2, 3], start=0)
    assert s.level(0).tolist() == [0, 4]
    assert s.level(1).tolist() == [0, 4, 2]


def test_sampling_exhausts_graph():
    g = path_graph(7)
    s = farthest_point_sample(g, [7], start=3)
    assert sorted(s.order.tolist()) == list(range(7))
    np.testing.assert_array_equal(s.distance, 0)


def test_bad_sizes():
    g = path_graph(5)
    with pytest.raises(SamplingError):
        farthest_point_sample(g, [3, 3])
    with pytest.raises(SamplingError):
        farthest_point_sample(g, [6])


def test_dijkstra_within_examples():
    g = path_graph(5)
    assert dijkstra_within(g, 0, 2.5) == {0: 0.0, 1: 1.0, 2: 2.0}
    assert dijkstra_within(g, 2, 0.5) == {2: 0.0}


def test_dijkstra_within_vs_scipy():
    g = random_graph(200, seed=11)
    full = csgraph.dijkstra(g.to_sparse(), directed=False, indices=17)
    for radius in (0.5, 1.5, 4.0):
        ball = dijkstra_within(g, 17, radius)
        inside = np.flatnonzero(full < radius)
        assert sorted(ball) == inside.tolist()
        np.testing.assert_allclose([ball[v] for v in inside], full[inside], rtol=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_field_matches_multi_source(graph_seed, seed):
    g = random_graph(120, graph_seed)
    s = farthest_point_sample(g, [5, 20, 60], seed=seed)
    ref = multi_source_distance(g, s.order)
    np.testing.assert_allclose(s.distance, ref, rtol=1e-13, atol=0)


def test_nesting_and_determinism(sphere642):
    g = build_edge_graph(sphere642)
    a = farthest_point_sample(g, [10, 50, 200], seed=5)
    b = farthest_point_sample(g, [10, 50, 200], seed=5)
    np.testing.assert_array_equal(a.order, b.order)
    levels = a.levels
    for small, big in zip(levels, levels[1:]):
        assert set(small.tolist()) <= set(big.tolist())
    assert len(set(a.order.tolist())) == 200


def test_farthest_point_property(sphere642):
    # each new sample is at the max of the field defined by the earlier ones
    g = build_edge_graph(sphere642)
    s = farthest_point_sample(g, [30], seed=1)
    for k in range(1, 30):
        d = multi_source_distance(g, s.order[:k])
        assert d[s.order[k]] == pytest.approx(d.max(), rel=1e-14)


def test_disconnected_graph():
    from scipy import sparse

    from hsim.mesh import EdgeGraph

    a = sparse.csr_matrix(([1.0, 1.0], ([0, 1], [1, 0])), shape=(3, 3))
    g = EdgeGraph(a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data)
    with pytest.raises(SamplingError):
        farthest_point_sample(g, [2], start=0)


def test_candidates_restrict_picks(dome):
    g = build_edge_graph(dome)
    inner = np.setdiff1d(np.arange(dome.n_vertices), dome.boundary_vertices())
    s = farthest_point_sample(g, [20, 100], seed=2, candidates=inner)
    assert np.isin(s.order, inner).all()
    # distances are still measured on the whole graph
    np.testing.assert_allclose(s.distance, multi_source_distance(g, s.order), rtol=1e-13)

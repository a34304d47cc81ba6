import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsim import meshgen
from hsim.mesh import from_arrays, surface_area
from hsim.operators import (
    Boundary,
    assemble,
    assemble_lumped_mass,
    assemble_stiffness,
    interior_vertices,
    read_matrix_market,
    write_matrix_market,
)

SQ3 = math.sqrt(3)


@pytest.fixture
def equilateral():
    return from_arrays([[0, 0, 0], [1, 0, 0], [0.5, SQ3 / 2, 0]], [[0, 1, 2]])


def test_equilateral_stiffness(equilateral):
    s = assemble_stiffness(equilateral).toarray()
    off = -1 / (2 * SQ3)  # -cot(60 deg) / 2
    expect = np.full((3, 3), off)
    np.fill_diagonal(expect, 1 / SQ3)
    np.testing.assert_allclose(s, expect, rtol=1e-14, atol=1e-15)


def test_right_isosceles_stiffness():
    m = from_arrays([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    s = assemble_stiffness(m).toarray()
    # edge (1, 2) faces the right angle, the legs face 45 degrees
    assert s[1, 2] == pytest.approx(0.0, abs=1e-15)
    assert s[0, 1] == pytest.approx(-0.5, rel=1e-14)
    assert s[0, 2] == pytest.approx(-0.5, rel=1e-14)
    np.testing.assert_allclose(s.sum(axis=1), 0, atol=1e-15)


def test_equilateral_mass(equilateral):
    md = assemble_lumped_mass(equilateral).diagonal()
    np.testing.assert_allclose(md, SQ3 / 12, rtol=1e-14)


def test_regular_tetrahedron_mass():
    x = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    m = from_arrays(x, [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    # each vertex touches 3 faces of area (sqrt3/4) * 8, one third each
    np.testing.assert_allclose(assemble_lumped_mass(m).diagonal(), 2 * SQ3, rtol=1e-14)


@pytest.mark.parametrize("mesh_fixture", ["sphere642", "torus3000", "dome"])
def test_operator_structure(request, mesh_fixture):
    mesh = request.getfixturevalue(mesh_fixture)
    ops = assemble(mesh)
    s, m = ops.stiffness, ops.mass
    assert abs(s - s.T).max() < 1e-14
    scale = abs(s).max()
    np.testing.assert_allclose(np.asarray(s.sum(axis=1)).ravel(), 0, atol=1e-12 * scale)
    assert m.diagonal().sum() == pytest.approx(surface_area(mesh), rel=1e-12)
    assert (m.diagonal() > 0).all()
    rng = np.random.default_rng(0)
    x = rng.normal(size=(mesh.n_vertices, 20))
    quad = np.einsum("ij,ij->j", x, s @ x)
    assert (quad >= -1e-12 * np.einsum("ij,ij->j", x, x) * scale).all()


def test_dirichlet_restriction(dome):
    full = assemble(dome, "neumann")
    dir_ = assemble(dome, Boundary.DIRICHLET)
    inner = interior_vertices(dome)
    assert dir_.n == dome.n_vertices - len(dome.boundary_vertices()) == len(inner)
    np.testing.assert_array_equal(dir_.dofs, inner)
    np.testing.assert_allclose(dir_.stiffness.toarray(), full.stiffness[inner][:, inner].toarray())
    # positive definite once the boundary is pinned
    assert np.linalg.eigvalsh(dir_.stiffness.toarray()).min() > 0


def test_dirichlet_on_closed_mesh_is_neumann(sphere642):
    a, b = assemble(sphere642, "dirichlet"), assemble(sphere642, "neumann")
    assert a.n == b.n
    assert Boundary.parse("closed") is Boundary.NEUMANN


def test_no_interior_vertices(equilateral):
    with pytest.raises(ValueError):
        assemble(equilateral, "dirichlet")


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_permutation_equivariance(seed):
    mesh = meshgen.perturbed(meshgen.icosphere(2), 0.05, seed=seed % 1000)
    perm = np.random.default_rng(seed).permutation(mesh.n_vertices)
    inv = np.argsort(perm)
    moved = from_arrays(mesh.positions[perm], inv[mesh.faces])
    a, b = assemble(mesh), assemble(moved)
    pa = b.stiffness[inv][:, inv]
    assert abs(pa - a.stiffness).max() < 1e-13
    np.testing.assert_allclose(b.mass.diagonal()[inv], a.mass.diagonal(), rtol=1e-13)


def test_matrix_market_roundtrip(tmp_path, sphere642_ops):
    s = sphere642_ops.stiffness
    write_matrix_market(tmp_path / "s.mtx", s)
    back = read_matrix_market(tmp_path / "s.mtx")
    assert abs(back - s).max() == 0.0

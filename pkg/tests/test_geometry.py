import re

import numpy as np
import pytest

from atcopt import exception, geometry, modes


def test_build_domains_radii():
    geom = geometry.build_domains(6, 4, 1)
    assert (geom.r_core, geom.r_a, geom.r_c) == (6, 24, 36)
    assert geom.r_ex == 36
    assert geom.half_widths(modes.DomainTag.kOverlap) == (24, 6)
    assert geom.area(modes.DomainTag.kOverlap) == 48.0**2-12.0**2
    assert geom.descriptor() == "Rcore6-psi4-kappa1"


@pytest.mark.parametrize(
    "args, message",
    [
        ((0, 4, 1), "R_core >= 1 violated"),
        ((6, 3, 1), "psi_a >= 4 violated"),
        ((6, 4, 0), "kappa >= 1 violated"),
        ((1, 4, 1), "(psi_a-1) r_core >= 4 r_cut violated"),
        ((4, 4, 1), "r_core^kappa > psi_a violated (4^1 = 4 <= 4)"),
    ],
)
def test_build_domains_names_violated_inequality(args, message):
    with pytest.raises(exception.GeometryError, match=re.escape(message)):
        geometry.build_domains(*args)


def test_interaction_range():
    offsets = geometry.nn_nnn_range()
    assert len(offsets) == 8
    assert offsets.r_cut == pytest.approx(np.sqrt(2))
    assert offsets.reach == 1
    with pytest.raises(ValueError, match="point symmetric"):
        geometry.InteractionRange(((1, 0),))
    with pytest.raises(ValueError, match="zero offset"):
        geometry.InteractionRange(((0, 0),))


def test_lattice_index_layers():
    index = geometry.LatticeIndex(geometry.box_points(3), geometry.nn_nnn_range())
    assert len(index) == 49
    assert tuple(index.sites[0]) == (-3, -3)
    assert tuple(index.sites[1]) == (-2, -3)
    assert np.count_nonzero(index.interior) == 25
    assert np.count_nonzero(index.double_interior) == 9
    assert np.count_nonzero(index.boundary) == 40
    assert np.all(np.abs(index.double_interior_sites).max(axis=1) <= 1)
    assert index.ordinal([[5, 5]])[0] == -1
    assert np.array_equal(index.sites[index.ordinal(index.sites)], index.sites)


def test_lattice_sets_exclude_core(small_geom):
    overlap = geometry.lattice_sets(small_geom, modes.DomainTag.kOverlap)
    norms = np.abs(overlap.sites).max(axis=1)
    assert norms.min() == small_geom.r_core+1
    assert norms.max() == small_geom.r_a


def test_unit_triangles():
    triangles = geometry.unit_triangles(2)
    assert triangles.shape == (32, 3, 2)
    (_, areas) = geometry.triangle_gradients(triangles)
    np.testing.assert_allclose(areas, 0.5)
    assert len(geometry.unit_triangles(2, 1)) == 24


def test_triangle_gradients_reproduce_affine(rng):
    G = rng.standard_normal((2, 2))
    vertices = geometry.unit_triangles(3, 1)
    values = vertices @ G.T
    (grads, _) = geometry.triangle_gradients(vertices)
    gradients = np.einsum("mai,maj->mij", values, grads)
    np.testing.assert_allclose(gradients, np.broadcast_to(G, gradients.shape), atol=1e-13)


def test_lattice_field_gauges(rng):
    index = geometry.LatticeIndex(geometry.box_points(2), geometry.nn_range())
    u = geometry.LatticeField(index, rng.standard_normal((len(index), 2)))
    np.testing.assert_allclose(u.regauge(modes.Gauge.kMeanZero).values.mean(axis=0), 0, atol=1e-15)
    pinned = u.regauge(modes.Gauge.kPinned, site=3)
    assert pinned.pinned_site == 3
    np.testing.assert_array_equal(pinned.values[3], 0)
    with pytest.raises(ValueError, match="shape"):
        geometry.LatticeField(index, np.zeros((3, 2)))


def test_lattice_field_at_outside_raises():
    index = geometry.LatticeIndex(geometry.box_points(2), geometry.nn_range())
    u = geometry.LatticeField.zeros(index)
    with pytest.raises(exception.CoverageError):
        u.at([[0, 0], [3, 0]])


def test_interpolate(rng):
    index = geometry.LatticeIndex(geometry.box_points(4), geometry.nn_range())
    G = rng.standard_normal((2, 2))
    affine = geometry.LatticeField.affine(index, G, shift=[0.5, -1.0])
    points = rng.uniform(-4, 4, (50, 2))
    np.testing.assert_allclose(affine.interpolate(points), points @ G.T+[0.5, -1.0], atol=1e-12)

    u = geometry.LatticeField(index, rng.standard_normal((len(index), 2)))
    np.testing.assert_allclose(u.interpolate(index.sites), u.values, atol=1e-14)
    # midpoint of the shared diagonal of a unit square
    np.testing.assert_allclose(u.interpolate([[0.5, 0.5]])[0], 0.5*(u.at([[0, 0]])[0]+u.at([[1, 1]])[0]))


def test_stencil(rng):
    index = geometry.LatticeIndex(geometry.box_points(3), geometry.nn_nnn_range())
    G = rng.standard_normal((2, 2))
    u = geometry.LatticeField.affine(index, G)
    np.testing.assert_allclose(geometry.stencil(u, (1, 1)), index.interaction_range.array @ G.T, atol=1e-13)
    with pytest.raises(exception.StencilRangeError):
        geometry.stencil(u, (3, 3))
    with pytest.raises(exception.StencilRangeError):
        geometry.stencils(index, u.values, np.array([0]))


def test_lattice_gradient_seminorm(rng):
    index = geometry.LatticeIndex(geometry.box_points(3), geometry.nn_range())
    G = rng.standard_normal((2, 2))
    operator = geometry.lattice_gradient(index, 3, 1)
    u = geometry.LatticeField.affine(index, G)
    assert operator.total_area == pytest.approx(36.0-4.0)
    assert operator.seminorm(u.values) == pytest.approx(np.linalg.norm(G)*np.sqrt(32.0))
    np.testing.assert_allclose(operator.gradients(u.values), np.broadcast_to(G, (len(operator), 2, 2)), atol=1e-12)
    with pytest.raises(exception.CoverageError):
        geometry.lattice_gradient(index, 4)

import io

import numpy as np
import pytest

from atcopt import exception, geometry, mesh, modes


def test_resolved_mesh(small_geom, small_mesh):
    assert len(small_mesh) == mesh.lattice_count(small_geom) == 33**2-3**2
    assert len(small_mesh.triangles) == 2*(32**2-4**2)
    assert mesh.reduction_ratio(small_mesh) == 1.0
    assert np.all(mesh.lattice_triangle_mask(small_mesh.vertices))
    assert len(small_mesh.tagged(modes.NodeTag.kGammaCore)) == 16
    assert len(small_mesh.tagged(modes.NodeTag.kGammaC)) == 128
    np.testing.assert_allclose(small_mesh.areas, 0.5)


def test_nodes_lexicographic(small_mesh):
    keys = small_mesh.nodes[:, 1]*1000+small_mesh.nodes[:, 0]
    assert np.all(np.diff(keys) > 0)
    assert small_mesh.ordinal(small_mesh.nodes[[5]])[0] == 5
    assert small_mesh.ordinal([[0, 0]])[0] == -1


def test_graded_mesh(graded_geom, graded_mesh):
    mesh.check_mesh(graded_mesh)
    assert graded_mesh.areas.sum() == pytest.approx(graded_geom.area(modes.DomainTag.kContinuum))
    assert graded_mesh.areas.sum() == pytest.approx(128.0**2-8.0**2)
    assert graded_mesh.min_angle == pytest.approx(mesh.k_transition_angle)
    assert graded_mesh.h.max() > 2
    assert mesh.reduction_ratio(graded_mesh) >= 2.5
    outer = np.abs(graded_mesh.nodes[graded_mesh.tagged(modes.NodeTag.kGammaC)]).max(axis=1)
    np.testing.assert_array_equal(outer, graded_geom.r_c)


def test_resolved_region_is_atomistic(graded_mesh):
    resolved = graded_mesh.triangles_in(modes.DomainTag.kOverlapExtended)
    assert np.all(mesh.lattice_triangle_mask(graded_mesh.vertices[resolved]))
    assert len(resolved) == 2*(64**2-8**2)


def test_layer_plan(graded_geom):
    plan = mesh.layer_plan(graded_geom, 1.5)
    assert plan[0] == (32, 2, True)
    assert all(L % h == 0 for (L, h, _) in plan)
    (L, h, _) = plan[-1]
    assert L+h == graded_geom.r_c
    sizes = [h for (_, h, _) in plan]
    assert sizes == sorted(sizes)
    assert [transition for (_, _, transition) in plan].count(True) == len(set(sizes))-(1 if sizes[0] == 1 else 0)


def test_layer_plan_delay(graded_geom):
    delayed = mesh.layer_plan(graded_geom, 1.5, delay=3)
    doublings = [i for (i, (_, _, transition)) in enumerate(delayed) if transition]
    assert np.all(np.diff(doublings) >= 3)


def test_target_size(graded_geom):
    assert mesh.target_size(graded_geom, (3, -5)) == 1.0
    assert mesh.target_size(graded_geom, (64, 0)) == pytest.approx(8.0)


def test_build_mesh_rejects(small_geom):
    with pytest.raises(ValueError, match="grading exponent"):
        mesh.build_mesh(small_geom, grading_exponent=2.0)
    too_small = geometry.DomainGeometry(2, 8, 1, geometry.nn_nnn_range())
    with pytest.raises(exception.MeshError, match="too small"):
        mesh.build_mesh(too_small)


def test_check_mesh_detects_gap(small_geom, small_mesh):
    broken = mesh.FEMesh(small_geom, small_mesh.nodes, small_mesh.triangles[1:])
    with pytest.raises(exception.MeshError, match="cover area"):
        mesh.check_mesh(broken)


def test_check_mesh_angle_bound(graded_mesh):
    with pytest.raises(exception.MeshError, match="minimum angle"):
        mesh.check_mesh(graded_mesh, min_angle=30.0)


def test_dump(small_mesh):
    stream = io.StringIO()
    small_mesh.dump(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "# nodes {}".format(len(small_mesh))
    assert lines[len(small_mesh)+1] == "# triangles {}".format(len(small_mesh.triangles))
    (_, x, y, label) = lines[1].split()
    assert (int(x), int(y)) == (-16, -16)
    assert label == "gamma_c"
    assert len(lines) == len(small_mesh)+len(small_mesh.triangles)+2

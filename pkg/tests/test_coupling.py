import dataclasses

import numpy as np
import pytest

from atcopt import config, continuum, coupling, exception, geometry, modes

from conftest import random_lattice_field


################################################################
# overlap operator
################################################################

def test_overlap_size(small_problem):
    overlap = small_problem.overlap
    assert len(overlap.atomistic) == len(overlap.continuum) == 480
    assert overlap.area == pytest.approx(240.0)


def test_overlap_affine_fields(small_problem, small_mesh, rng):
    G = rng.standard_normal((2, 2))
    u_a = geometry.LatticeField.affine(small_problem.atomistic.index, G)
    u_c = continuum.FEField.affine(small_mesh, G, shift=[0.25, -1.0])
    overlap = small_problem.overlap
    assert overlap.mismatch(u_a.values, u_c.values) == pytest.approx(0.0, abs=1e-20)
    np.testing.assert_allclose(overlap.mean_difference(u_a.values, u_c.values), [-0.25, 1.0], atol=1e-12)

    zero = continuum.FEField.zeros(small_mesh)
    assert coupling.overlap_mismatch(small_problem.geom, u_a, zero) == pytest.approx(0.5*240.0*np.sum(G**2))


def test_mean_constraint(small_problem, small_mesh, rng):
    u_a = random_lattice_field(small_problem.atomistic.index, rng)
    u_c = continuum.FEField(small_mesh, rng.standard_normal((len(small_mesh), 2)))
    shifted = coupling.apply_mean_constraint(small_problem.geom, u_a, u_c)
    np.testing.assert_allclose(small_problem.overlap.mean_difference(u_a.values, shifted.values), 0, atol=1e-12)
    np.testing.assert_allclose(shifted.values-u_c.values, np.broadcast_to(shifted.info["shift"], u_c.values.shape))


def test_overlap_needs_lattice_cover(small_geom, small_mesh, model):
    index = geometry.LatticeIndex(geometry.box_points(4), model.interaction_range)
    with pytest.raises(exception.CoverageError):
        coupling.OverlapOperator(small_geom, small_mesh, index)


################################################################
# controls
################################################################

def test_controls(small_problem, rng):
    controls = coupling.VirtualControls.zeros(small_problem)
    assert controls.flat().shape == (2*(small_problem.n_atomistic_controls+small_problem.n_continuum_controls),)
    flat = rng.standard_normal(controls.flat().shape)
    split = small_problem.split(flat)
    np.testing.assert_array_equal(split.flat(), flat)
    np.testing.assert_allclose(small_problem.project(np.ones_like(flat)), 0, atol=1e-14)
    projected = small_problem.split(small_problem.project(flat))
    np.testing.assert_allclose(projected.lambda_a.mean(axis=0), 0, atol=1e-14)
    np.testing.assert_allclose(projected.lambda_c.mean(axis=0), 0, atol=1e-14)
    with pytest.raises(ValueError, match="controls have shapes"):
        small_problem.check_controls(coupling.VirtualControls(np.zeros((3, 2)), np.zeros((3, 2))))


def test_mismatch_invariant_under_constants(small_problem, rng):
    controls = coupling.VirtualControls(
        0.01*rng.standard_normal((small_problem.n_atomistic_controls, 2)),
        0.01*rng.standard_normal((small_problem.n_continuum_controls, 2)),
    )
    state = small_problem.evaluate(controls, continuation=True)
    shifted = small_problem.evaluate(
        coupling.VirtualControls(controls.lambda_a+[1.0, 0.0], controls.lambda_c+[0.0, -2.0]), guess=state,
    )
    assert shifted.J == pytest.approx(state.J, rel=1e-6)
    both = small_problem.evaluate(controls.shifted([0.5, 0.5]), guess=state)
    assert both.J == pytest.approx(state.J, rel=1e-6)


def test_reduced_gradient_has_no_constant_component(small_problem):
    state = small_problem.evaluate(coupling.VirtualControls.zeros(small_problem), continuation=True)
    g = coupling.reduced_gradient(state)
    scale = np.linalg.norm(g.flat())
    assert scale > 0
    np.testing.assert_allclose(g.lambda_a.sum(axis=0), 0, atol=1e-8*scale)
    np.testing.assert_allclose(g.lambda_c.sum(axis=0), 0, atol=1e-8*scale)


################################################################
# outer loop
################################################################

def test_solve_atc(small_problem, small_state):
    s = small_problem.solver
    assert small_state.gradient_norm <= s.tol_outer or small_state.J <= s.tol_J
    assert small_state.controls.gauge is modes.Gauge.kMeanZero
    assert small_state.iterations == small_state.log[-1]["iteration"] >= 1
    mean = small_problem.overlap.mean_difference(small_state.u_a.values, small_state.u_c.values)
    np.testing.assert_allclose(mean, 0, atol=1e-12)
    np.testing.assert_array_equal(small_problem.continuum.trace(small_state.u_c), small_state.controls.lambda_c)

    initial = small_problem.evaluate(coupling.VirtualControls.zeros(small_problem), continuation=True)
    assert small_state.J < 0.1*initial.J
    values = [record["J"] for record in small_state.log]
    assert all(later <= earlier for (earlier, later) in zip(values, values[1:]))


def test_homogeneous_solution_is_zero(small_geom, homogeneous_model, small_mesh):
    problem = coupling.CouplingProblem(small_geom, homogeneous_model, small_mesh)
    state = coupling.solve_atc(problem)
    assert state.iterations == 0
    assert state.J == 0.0
    np.testing.assert_array_equal(state.u_a.values, 0.0)
    np.testing.assert_array_equal(state.u_c.values, 0.0)


def test_outer_iteration_limit(small_geom, model, small_mesh):
    solver = dataclasses.replace(config.SolverConfig(), max_outer=0)
    problem = coupling.CouplingProblem(small_geom, model, small_mesh, solver)
    with pytest.raises(exception.OuterConvergenceError) as info:
        coupling.solve_atc(problem)
    assert info.value.iterations == 0


def test_predictor_start(small_problem, small_state):
    predicted = coupling.initial_controls(small_problem, modes.ControlInit.kContinuumPredictor)
    small_problem.check_controls(predicted)
    state = coupling.solve_atc(small_problem, modes.ControlInit.kContinuumPredictor)
    initial = small_problem.evaluate(coupling.VirtualControls.zeros(small_problem), continuation=True)
    assert abs(state.J-small_state.J) <= 1e-3*initial.J


def test_explicit_start(small_problem, small_state):
    state = coupling.solve_atc(small_problem, small_state.controls)
    assert state.iterations <= 2
    assert state.J == pytest.approx(small_state.J, rel=1e-3, abs=1e-18)
    with pytest.raises(ValueError, match="control initialization"):
        coupling.initial_controls(small_problem, "zero")


def test_joint_constant_start_gives_same_gradients(small_problem, small_state):
    init = coupling.VirtualControls.zeros(small_problem).shifted([0.3, -0.2])
    state = coupling.solve_atc(small_problem, init)
    assert state.J == pytest.approx(small_state.J, rel=1e-6, abs=1e-18)
    for (field, base) in ((state.u_a, small_state.u_a), (state.u_c, small_state.u_c)):
        difference = field.values-base.values
        np.testing.assert_allclose(difference-difference.mean(axis=0), 0, atol=1e-6)
    overlap = small_problem.overlap
    np.testing.assert_allclose(
        overlap.atomistic.weighted(state.u_a.values), overlap.atomistic.weighted(small_state.u_a.values), atol=1e-6,
    )
    np.testing.assert_allclose(
        overlap.continuum.weighted(state.u_c.values), overlap.continuum.weighted(small_state.u_c.values), atol=1e-6,
    )


################################################################
# errors and norms
################################################################

def test_continuum_error_exact_on_graded_mesh(graded_geom, graded_mesh, model, rng):
    index = geometry.LatticeIndex(geometry.box_points(graded_geom.r_c), model.interaction_range)
    reference = random_lattice_field(index, rng)
    operator = geometry.lattice_gradient(index, graded_geom.r_c, graded_geom.r_core)

    zero = continuum.FEField.zeros(graded_mesh)
    assert coupling.continuum_error_squared(zero, reference) == pytest.approx(
        operator.seminorm(reference.values)**2, rel=1e-10
    )

    G = rng.standard_normal((2, 2))
    affine = continuum.FEField.affine(graded_mesh, G)
    g = operator.gradients(reference.values)
    first_moment = np.einsum("m,mij->ij", operator.areas, g)
    expected = np.sum(G**2)*operator.total_area-2*np.sum(G*first_moment)+operator.seminorm(reference.values)**2
    assert coupling.continuum_error_squared(affine, reference) == pytest.approx(expected, rel=1e-10)


def test_broken_error(small_geom, small_problem, small_mesh, model, rng):
    index = geometry.LatticeIndex(geometry.box_points(small_geom.r_c), model.interaction_range)
    reference = random_lattice_field(index, rng)
    u_a = reference.restrict(small_problem.atomistic.index)
    u_c = continuum.FEField.from_lattice(small_mesh, reference)
    assert coupling.broken_error(small_geom, u_a, u_c, reference) == pytest.approx(0.0, abs=1e-12)
    assert coupling.continuum_error(u_c.shifted([3.0, 1.0]), reference) == pytest.approx(0.0, abs=1e-12)

    small = geometry.LatticeIndex(geometry.box_points(small_geom.r_a), model.interaction_range)
    with pytest.raises(exception.CoverageError):
        coupling.broken_error(small_geom, u_a, u_c, reference.restrict(small))


def test_continuum_reference(small_problem, small_state):
    index = small_problem.atomistic.index
    reference = geometry.LatticeField(index, np.zeros((len(index), 2)))
    u_con = coupling.solve_continuum_reference(small_problem, reference)
    np.testing.assert_array_equal(u_con.values, 0.0)

    u_con = coupling.solve_continuum_reference(small_problem, small_state.u_a)
    np.testing.assert_allclose(small_problem.continuum.trace(u_con), small_problem.continuum.trace(small_state.u_a))


def test_control_norms(small_problem, small_state, rng):
    mu = small_problem.split(rng.standard_normal(len(small_state.controls.flat())))
    norms = coupling.control_norms(small_state, mu)
    assert norms["err"] == pytest.approx(np.hypot(norms["atomistic"], norms["continuum"]))
    assert norms["overlap_atomistic"] <= norms["atomistic"]*(1+1e-12)
    assert norms["overlap_continuum"] <= norms["continuum"]*(1+1e-12)
    assert norms["op"] <= (norms["overlap_atomistic"]+norms["overlap_continuum"])*(1+1e-12)

    constant = coupling.VirtualControls(
        np.ones((small_problem.n_atomistic_controls, 2)), np.full((small_problem.n_continuum_controls, 2), -2.0),
    )
    zero = coupling.control_norms(small_state, constant)
    assert max(zero.values()) < 1e-8

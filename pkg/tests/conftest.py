"""Shared fixtures: small geometries, models and converged states."""

import numpy as np
import pytest

from atcopt import analysis, config, coupling, geometry, mesh, modes, potential


@pytest.fixture(scope="session")
def model():
    """Default defect model on the NN+NNN range."""
    return config.PotentialConfig().site_model()


@pytest.fixture(scope="session")
def homogeneous_model(model):
    return model.homogeneous()


@pytest.fixture(scope="session")
def cb(model):
    return potential.CauchyBornDensity(model)


@pytest.fixture(scope="session")
def small_geom():
    """R_core 2, psi_a 4, kappa 3: r_a = 8, r_c = r_ex = 16, mesh fully resolved."""
    return geometry.build_domains(2, 4, 3)


@pytest.fixture(scope="session")
def graded_geom():
    """R_core 4, psi_a 4, kappa 2: resolved out to 32, graded out to 64."""
    return geometry.build_domains(4, 4, 2)


@pytest.fixture(scope="session")
def small_mesh(small_geom):
    return mesh.build_mesh(small_geom)


@pytest.fixture(scope="session")
def graded_mesh(graded_geom):
    return mesh.build_mesh(graded_geom)


@pytest.fixture(scope="session")
def small_problem(small_geom, model, small_mesh):
    return coupling.CouplingProblem(small_geom, model, small_mesh)


@pytest.fixture(scope="session")
def small_state(small_problem):
    """Converged coupled state on the small geometry."""
    return coupling.solve_atc(small_problem)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_lattice_field(index, rng, amplitude=0.1):
    return geometry.LatticeField(index, amplitude*rng.standard_normal((len(index), 2)))


def overlap_ratios(kind, R_core, model, rng, samples=10, psi_a=4, kappa=2):
    """|grad w|_{full domain} / |grad w|_{Omega_o} for random discrete-harmonic fields.

    Bases are linearized at the predictor state, as in the norm-equivalence study.
    """
    geom = geometry.build_domains(R_core, psi_a, kappa)
    problem = coupling.CouplingProblem(geom, model, mesh.build_mesh(geom))
    controls = coupling.initial_controls(problem, modes.ControlInit.kContinuumPredictor)
    state = problem.evaluate(controls, continuation=True)
    base = state.u_a if kind is modes.BasisKind.kAtomistic else state.u_c
    basis = analysis.build_harmonic_basis(kind, problem, base)
    x = rng.standard_normal((len(basis), samples))
    return np.linalg.norm(basis.full_matrix @ x, axis=0)/np.linalg.norm(basis.matrix @ x, axis=0)

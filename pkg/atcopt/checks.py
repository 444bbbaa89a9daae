"""checks.py -- invariant and finite-difference checks run by `atc check`

Each check returns a CheckResult holding the measured value and the
tolerance it must not exceed.  The suite runs on a small fully resolved
geometry (R_core 2, psi_a 4, kappa 3: Omega_a = [-8,8]^2, r_c = 16); the reduced
gradient is also checked on a graded one (R_core 4, psi_a 4, kappa 2).

- 07/10/26 (ams): Created.
- 07/17/26 (ams): Add residual report for the converged coupled state.
- 08/11/26 (ams): Add norm sandwich.
- 10/18/26 (ams): Sandwich on full-domain norms; reduced gradient at random
  controls and on a graded geometry.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from . import (
    analysis,
    atomistic,
    config,
    constants,
    continuum,
    coupling,
    geometry,
    mesh,
    modes,
    potential,
)

logger = logging.getLogger(__name__)

k_check_geometry = (2, 4, 3)
k_graded_check_geometry = (4, 4, 2)
k_random_states = 20
k_random_directions = 5
k_state_amplitude = 0.01
k_gradient_step = 1e-3       # control step for differences through full re-solves


@dataclasses.dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def line(self):
        return "{:<36s} {:12.3e} {:12.3e} {}".format(
            self.name, self.value, self.tolerance, "PASS" if self.passed else "FAIL"
        )


def _relative(a, b):
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(np.asarray(a)-np.asarray(b))/scale)


################################################################
# derivative checks
################################################################

def check_derivatives(energy, gradient, hessian_apply, dimension, rng, states, step=constants.k_fd_step,
                      amplitude=k_state_amplitude):
    """Central-difference consistency of gradient and Hessian on random states.

    Arguments:
        energy, gradient (callable): x -> float, x -> vector
        hessian_apply (callable): (x, v) -> H(x) v
        dimension (int): length of x
        rng (np.random.Generator): random source
        states (int): number of random states

    Returns:
        (tuple): worst relative errors (gradient, Hessian)
    """
    worst = [0.0, 0.0]
    for _ in range(states):
        x = amplitude*rng.standard_normal(dimension)
        v = rng.standard_normal(dimension)
        v /= np.linalg.norm(v)
        fd_first = (energy(x+step*v)-energy(x-step*v))/(2*step)
        fd_second = (gradient(x+step*v)-gradient(x-step*v))/(2*step)
        worst[0] = max(worst[0], _relative(fd_first, gradient(x) @ v))
        worst[1] = max(worst[1], _relative(fd_second, hessian_apply(x, v)))
    return tuple(worst)


def atomistic_derivative_checks(sys, rng, states=k_random_states):
    d = constants.k_dim
    lambda_a = k_state_amplitude*rng.standard_normal((len(sys.control), d))

    def values(x):
        return sys.full_values(x, lambda_a)

    (g_err, h_err) = check_derivatives(
        lambda x: atomistic.assemble_atomistic(sys, values(x), 0),
        lambda x: atomistic.assemble_atomistic(sys, values(x), 1),
        lambda x, v: atomistic.assemble_atomistic(sys, values(x), 2).free_free @ v,
        len(sys.free_dofs), rng, states,
    )
    return [
        CheckResult("atomistic gradient (FD)", g_err, 1e-6),
        CheckResult("atomistic Hessian (FD)", h_err, 1e-4),
    ]


def continuum_derivative_checks(system, rng, states=k_random_states):
    lambda_c = k_state_amplitude*rng.standard_normal((len(system.gamma_core), constants.k_dim))

    def values(z):
        return system.full_values(z, lambda_c)

    (g_err, h_err) = check_derivatives(
        lambda z: system.energy(values(z)),
        lambda z: system.P.T @ system.full_gradient(values(z)),
        lambda z, v: system.operator(values(z)).free_free @ v,
        system.n_unknowns, rng, states,
    )
    return [
        CheckResult("continuum gradient (FD)", g_err, 1e-6),
        CheckResult("continuum Hessian (FD)", h_err, 1e-4),
    ]


################################################################
# model identities
################################################################

def cauchy_born_checks(model, rng, samples=10, N=6):
    """Energy per site of affine fields against W(G); patch tests."""
    homogeneous = model.homogeneous()
    cb = potential.CauchyBornDensity(homogeneous)
    sys = atomistic.AtomisticSystem.from_box(homogeneous, N)
    worst_density = 0.0
    worst_patch = 0.0
    for _ in range(samples):
        G = rng.uniform(-1, 1, (constants.k_dim, constants.k_dim))
        G *= 0.1/np.linalg.norm(G)
        u = geometry.LatticeField.affine(sys.index, G)
        per_site = atomistic.assemble_atomistic(sys, u, 0)/len(sys.energy_sites)
        worst_density = max(worst_density, abs(per_site-float(cb.evaluate(G)))/max(abs(float(cb.evaluate(G))), 1e-300))
        worst_patch = max(worst_patch, float(np.abs(atomistic.assemble_atomistic(sys, u, 1)).max()))
    return [
        CheckResult("Cauchy-Born energy density", worst_density, 1e-12),
        CheckResult("atomistic patch test", worst_patch, 1e-12),
    ]


def continuum_patch_check(system, rng):
    G = rng.uniform(-0.05, 0.05, (constants.k_dim, constants.k_dim))
    values = system.mesh.nodes @ G.T
    force = system.full_gradient(values).reshape(-1, constants.k_dim)[system.interior]
    return CheckResult("continuum patch test", float(np.abs(force).max()), 1e-12)


def translation_checks(sys, system, rng):
    c = rng.standard_normal(constants.k_dim)
    u = k_state_amplitude*rng.standard_normal((len(sys.index), constants.k_dim))
    e_a = atomistic.assemble_atomistic(sys, u, 0)
    v = k_state_amplitude*rng.standard_normal((len(system.mesh.nodes), constants.k_dim))
    e_c = system.energy(v)
    return [
        CheckResult("atomistic translation invariance", abs(atomistic.assemble_atomistic(sys, u+c, 0)-e_a)/abs(e_a), 1e-12),
        CheckResult("continuum translation invariance", abs(system.energy(v+c)-e_c)/abs(e_c), 1e-12),
    ]


################################################################
# coupled problem
################################################################

def random_controls(problem, rng, amplitude=k_state_amplitude):
    """Random control pair of a given amplitude."""
    n = len(coupling.VirtualControls.zeros(problem).flat())
    return problem.split(amplitude*rng.standard_normal(n))


def reduced_gradient_check(problem, rng, controls=None, directions=k_random_directions, step=k_gradient_step):
    """Adjoint reduced gradient against central differences through full re-solves.

    Arguments:
        problem (coupling.CouplingProblem): problem
        rng (np.random.Generator): random directions
        controls (coupling.VirtualControls, optional): state to check at (default zero)
    """
    label = "zero" if controls is None else "random"
    if controls is None:
        controls = coupling.VirtualControls.zeros(problem)
    state = problem.evaluate(controls, continuation=True)
    g = coupling.reduced_gradient(state).flat()
    base = state.controls.flat()
    worst = 0.0
    for _ in range(directions):
        mu = problem.project(rng.standard_normal(len(base)))
        mu /= np.linalg.norm(mu)
        plus = problem.evaluate(problem.split(base+step*mu), guess=state).J
        minus = problem.evaluate(problem.split(base-step*mu), guess=state).J
        worst = max(worst, _relative((plus-minus)/(2*step), g @ mu))
    return CheckResult("reduced gradient {} {}".format(problem.geom.descriptor(), label), worst, 1e-4)


def sandwich_bounds(c, control_a, control_c, norms):
    """Bounds on |mu|_op^2 from the full-domain control norms.

    With C_a, C_c the overlap-control constants and c the sup-cosine,

        (1-c) min(C_a^-2, C_c^-2) |mu|_err^2 <= |mu|_op^2 <= 2 |mu|_err^2

    Arguments:
        c (float): sup-cosine
        control_a, control_c (float): overlap-control constants (>= 1)
        norms (dict): from coupling.control_norms

    Returns:
        (tuple of float): (lower, upper)
    """
    err2 = norms["atomistic"]**2+norms["continuum"]**2
    return ((1-c)*min(control_a**-2, control_c**-2)*err2, 2*err2)


def coupled_checks(problem, rng, samples=3):
    """Residuals, mean constraint and norm sandwich at the converged coupled state."""
    state = coupling.solve_atc(problem)
    residual_a = float(np.abs(atomistic.assemble_atomistic(problem.atomistic, state.u_a, 1)).max())
    residual_c = float(np.abs(continuum.assemble_continuum(problem.mesh, problem.continuum, state.u_c, 1)).max())
    mean = problem.overlap.mean_difference(state.u_a.values, state.u_c.values)
    logger.info("check: residual atomistic %.3e continuum %.3e", residual_a, residual_c)

    A = analysis.build_harmonic_basis(modes.BasisKind.kAtomistic, problem, state.u_a)
    C = analysis.build_harmonic_basis(modes.BasisKind.kContinuum, problem, state.u_c)
    c = analysis.sup_cosine(A, C)
    control_a = analysis.overlap_control_constant(A, A.full_gram)
    control_c = analysis.overlap_control_constant(C, C.full_gram)
    (below, above) = (-np.inf, -np.inf)
    for _ in range(samples):
        mu = problem.split(rng.standard_normal(len(state.controls.flat())))
        norms = coupling.control_norms(state, mu)
        (lower, upper) = sandwich_bounds(c, control_a, control_c, norms)
        op2 = max(norms["op"]**2, 1e-300)
        below = max(below, (lower-op2)/op2)
        above = max(above, (op2-upper)/op2)
    return [
        CheckResult("atomistic residual at coupled state", residual_a, 1e-8),
        CheckResult("continuum residual at coupled state", residual_c, 1e-8),
        CheckResult("overlap mean constraint", float(np.abs(mean).max()), 1e-12),
        CheckResult("sup-cosine below one", c, 1-1e-6),
        CheckResult("norm sandwich lower excess", max(below, 0.0), 1e-6),
        CheckResult("norm sandwich upper excess", max(above, 0.0), 1e-6),
    ]


def homogeneous_check(problem):
    homogeneous = coupling.CouplingProblem(
        problem.geom, problem.model.homogeneous(), problem.mesh, problem.solver,
    )
    state = coupling.solve_atc(homogeneous)
    size = max(float(np.abs(state.u_a.values).max()), float(np.abs(state.u_c.values).max()), state.J)
    return CheckResult("homogeneous coupled solution", size+state.iterations, 1e-12)


################################################################
# suite
################################################################

def run_checks(cfg=None, seed=0, geometries=(k_check_geometry, k_graded_check_geometry)):
    """Run the full check suite.

    The reduced gradient is checked at random controls on every geometry;
    all other checks run on the first.

    Arguments:
        cfg (config.StudyConfig, optional): potential and solver settings
        seed (int, optional): random seed
        geometries (tuple, optional): (R_core, psi_a, kappa) triples

    Returns:
        (list of CheckResult): results, in run order
    """
    cfg = cfg if cfg is not None else config.StudyConfig()
    rng = np.random.default_rng(seed)
    model = cfg.potential.site_model()
    problems = []
    for triple in geometries:
        geom = geometry.build_domains(*triple)
        fe_mesh = mesh.build_mesh(geom, cfg.mesh.grading_exponent, cfg.mesh.min_angle)
        problems.append(coupling.CouplingProblem(geom, model, fe_mesh, cfg.solver))
    problem = problems[0]

    results = []
    results += atomistic_derivative_checks(problem.atomistic, rng)
    results += continuum_derivative_checks(problem.continuum, rng)
    results += cauchy_born_checks(model, rng)
    results.append(continuum_patch_check(problem.continuum, rng))
    results += translation_checks(problem.atomistic, problem.continuum, rng)
    results.append(reduced_gradient_check(problem, rng))
    for other in problems:
        results.append(reduced_gradient_check(other, rng, random_controls(other, rng)))
    results += coupled_checks(problem, rng)
    results.append(homogeneous_check(problem))
    for result in results:
        logger.info("check: %s", result.line())
    return results

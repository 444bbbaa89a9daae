"""coupling.py -- optimization-based atomistic-to-continuum coupling

The coupled solution minimizes the overlap gradient mismatch

    J(lambda) = 1/2 |grad I u^a(lambda_a) - grad u^c(lambda_c)|^2_{L2(Omega_o)}

over the virtual controls lambda = (lambda_a, lambda_c), each subproblem
being solved for its own controls.  The outer loop is Gauss-Newton on this
least-squares functional; each normal-equation product costs one linearized
solve and one adjoint solve per subproblem, with factorizations shared
through the sensitivities held by the state.  Constant controls of either
subproblem alone leave J unchanged and are projected out of every step.

- 05/25/26 (dlk): Created.
- 06/01/26 (dlk): Gauss-Newton with CG normal equations.
- 06/08/26 (dlk): Exact continuum error term on graded meshes.
- 06/19/26 (ams): Add control_norms() and the predictor initializer.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from typing import List

import numpy as np
import scipy.sparse.linalg

from . import (
    atomistic,
    config,
    constants,
    continuum,
    exception,
    geometry,
    linalg,
    mesh,
    modes,
    potential,
)

logger = logging.getLogger(__name__)

# halvings of the outer line search before giving up
k_max_backtrack = 30


################################################################
# overlap operator
################################################################

class OverlapOperator:
    """Gradient mismatch on the overlap triangles.

    Rows of the atomistic and continuum gradient operators refer to the same
    unit triangles of Omega_o, in the same order.

    Arguments:
        geom (geometry.DomainGeometry): geometry
        fe_mesh (mesh.FEMesh): mesh resolving the overlap
        index (geometry.LatticeIndex): atomistic sites

    Raises:
        exception.MeshError: if the mesh does not resolve Omega_o into unit
            lattice triangles
        exception.CoverageError: if the lattice misses an overlap vertex
    """

    def __init__(self, geom, fe_mesh, index):
        selected = fe_mesh.triangles_in(modes.DomainTag.kOverlap)
        vertices = fe_mesh.vertices[selected]
        expected = int(round(2*geom.area(modes.DomainTag.kOverlap)))
        if len(selected) != expected or not np.all(mesh.lattice_triangle_mask(vertices)):
            raise exception.MeshError(
                "mesh does not resolve the overlap: {} of {} triangles are lattice triangles".format(
                    int(np.count_nonzero(mesh.lattice_triangle_mask(vertices))), expected
                )
            )
        connectivity = index.ordinal(vertices.reshape(-1, constants.k_dim)).reshape(-1, 3)
        if np.any(connectivity < 0):
            raise exception.CoverageError("atomistic lattice does not cover the overlap")

        self.vertices = vertices
        self.atomistic = geometry.P1Gradient(connectivity, vertices, len(index))
        self.continuum = geometry.P1Gradient(fe_mesh.triangles[selected], vertices, len(fe_mesh.nodes))

    @property
    def area(self):
        return self.continuum.total_area

    def residual(self, a_values, c_values):
        """Area-weighted gradient mismatch, flattened per triangle."""
        return self.atomistic.weighted(a_values)-self.continuum.weighted(c_values)

    def mismatch(self, a_values, c_values):
        r = self.residual(a_values, c_values)
        return 0.5*float(r @ r)

    def mean_difference(self, a_values, c_values):
        """Overlap mean of Iu^a - u^c, as a d-vector."""
        difference = np.asarray(a_values)[self.atomistic.connectivity].mean(axis=1) \
            - np.asarray(c_values)[self.continuum.connectivity].mean(axis=1)
        areas = self.continuum.areas
        return areas @ difference/areas.sum()


def overlap_mismatch(geom, u_a, u_c):
    """J = 1/2 |grad I u^a - grad u^c|^2 over Omega_o.

    Arguments:
        geom (geometry.DomainGeometry): geometry
        u_a (geometry.LatticeField): atomistic field covering Omega_o
        u_c (continuum.FEField): continuum field

    Returns:
        (float): mismatch, exact elementwise sum
    """
    return OverlapOperator(geom, u_c.mesh, u_a.index).mismatch(u_a.values, u_c.values)


################################################################
# controls and states
################################################################

@dataclasses.dataclass
class VirtualControls:
    """Dirichlet controls of the two subproblems.

    Arguments:
        lambda_a (np.ndarray): (n_control, d) values on the atomistic boundary layer
        lambda_c (np.ndarray): (n_core, d) values on Gamma_core nodes
        gauge (modes.Gauge): gauge of the pair
    """

    lambda_a: np.ndarray
    lambda_c: np.ndarray
    gauge: modes.Gauge = modes.Gauge.kRaw

    def __post_init__(self):
        self.lambda_a = np.asarray(self.lambda_a, dtype=float).reshape(-1, constants.k_dim)
        self.lambda_c = np.asarray(self.lambda_c, dtype=float).reshape(-1, constants.k_dim)

    @classmethod
    def zeros(cls, problem):
        return cls(
            np.zeros((problem.n_atomistic_controls, constants.k_dim)),
            np.zeros((problem.n_continuum_controls, constants.k_dim)),
        )

    def flat(self):
        return np.concatenate([self.lambda_a.ravel(), self.lambda_c.ravel()])

    def shifted(self, c):
        """Both controls shifted by the same constant."""
        c = np.asarray(c, dtype=float)
        return VirtualControls(self.lambda_a+c, self.lambda_c+c, self.gauge)

    def copy(self):
        return VirtualControls(self.lambda_a.copy(), self.lambda_c.copy(), self.gauge)


@dataclasses.dataclass
class AtcState:
    """Converged subproblem pair for a set of controls.

    Attributes:
        problem (CouplingProblem): problem
        controls (VirtualControls): controls
        u_a (geometry.LatticeField): restricted atomistic solution
        u_c (continuum.FEField): restricted continuum solution
        J (float): overlap mismatch
        gradient_norm (float): norm of the projected reduced gradient, once computed
        log (list of dict): outer iteration records
        iterations (int): outer iterations taken
    """

    problem: "CouplingProblem"
    controls: VirtualControls
    u_a: geometry.LatticeField
    u_c: continuum.FEField
    J: float
    gradient_norm: float = float("nan")
    log: List[dict] = dataclasses.field(default_factory=list)
    iterations: int = 0

    def __post_init__(self):
        self._sensitivities = None

    def sensitivities(self):
        """(AtomisticSensitivity, ContinuumSensitivity) at this state, cached."""
        if self._sensitivities is None:
            self._sensitivities = (
                atomistic.AtomisticSensitivity(self.problem.atomistic, self.u_a),
                continuum.ContinuumSensitivity(self.problem.continuum, self.u_c),
            )
        return self._sensitivities

    def residual(self):
        return self.problem.overlap.residual(self.u_a.values, self.u_c.values)


class CouplingProblem:
    """Subproblem systems and overlap operator for one geometry.

    Arguments:
        geom (geometry.DomainGeometry): geometry
        model (potential.SiteModel): site potential
        fe_mesh (mesh.FEMesh, optional): mesh (built with defaults if omitted)
        solver (config.SolverConfig, optional): tolerances
        cb (potential.CauchyBornDensity, optional): continuum density
    """

    def __init__(self, geom, model, fe_mesh=None, solver=None, cb=None):
        self.geom = geom
        self.model = model
        self.solver = solver if solver is not None else config.SolverConfig()
        self.mesh = fe_mesh if fe_mesh is not None else mesh.build_mesh(geom)
        self.cb = cb if cb is not None else potential.CauchyBornDensity(model)
        self.atomistic = atomistic.AtomisticSystem.from_geometry(geom, model)
        self.continuum = continuum.ContinuumSystem(self.mesh, self.cb)
        self.overlap = OverlapOperator(geom, self.mesh, self.atomistic.index)

    @property
    def n_atomistic_controls(self):
        return len(self.atomistic.control)

    @property
    def n_continuum_controls(self):
        return len(self.continuum.gamma_core)

    def split(self, flat):
        """VirtualControls from a flat control vector."""
        cut = constants.k_dim*self.n_atomistic_controls
        return VirtualControls(flat[:cut], flat[cut:])

    def project(self, flat):
        """Remove the constant direction of each control subspace."""
        cut = constants.k_dim*self.n_atomistic_controls
        return np.concatenate([linalg.project_out_constants(flat[:cut]), linalg.project_out_constants(flat[cut:])])

    def check_controls(self, controls):
        shapes = ((self.n_atomistic_controls, constants.k_dim), (self.n_continuum_controls, constants.k_dim))
        if (controls.lambda_a.shape, controls.lambda_c.shape) != shapes:
            raise ValueError("controls have shapes {}, {}; expected {}, {}".format(
                controls.lambda_a.shape, controls.lambda_c.shape, *shapes
            ))

    def evaluate(self, controls, guess=None, continuation=False):
        """Solve both subproblems for given controls.

        Arguments:
            controls (VirtualControls): controls
            guess (AtcState, optional): warm start
            continuation (bool, optional): allow defect continuation in the
                atomistic solve

        Returns:
            (AtcState): state with J evaluated
        """
        self.check_controls(controls)
        s = self.solver
        u_a = atomistic.solve_restricted_atomistic(
            self.atomistic, controls.lambda_a, u0=None if guess is None else guess.u_a,
            tol=s.tol_newton, max_iter=s.max_newton, armijo=s.armijo, continuation=continuation,
        )
        u_c = continuum.solve_restricted_continuum(
            self.mesh, self.continuum, controls.lambda_c, u0=None if guess is None else guess.u_c,
            tol=s.tol_newton, max_iter=s.max_newton, armijo=s.armijo,
        )
        J = self.overlap.mismatch(u_a.values, u_c.values)
        return AtcState(self, controls, u_a, u_c, J)


################################################################
# reduced gradient
################################################################

def _apply_adjoint(state, r):
    """M^T r for the linearized mismatch operator M, flattened."""
    (sens_a, sens_c) = state.sensitivities()
    overlap = state.problem.overlap
    grad_a = sens_a.adjoint(overlap.atomistic.matrix.T @ r)
    grad_c = sens_c.adjoint(-(overlap.continuum.matrix.T @ r))
    return np.concatenate([grad_a, grad_c])


def _apply_forward(state, flat):
    """M mu for a flat control perturbation."""
    (sens_a, sens_c) = state.sensitivities()
    mu = state.problem.split(flat)
    return state.problem.overlap.residual(sens_a.forward(mu.lambda_a), sens_c.forward(mu.lambda_c))


def reduced_gradient(state):
    """Gradient of J with respect to the virtual controls.

    One adjoint solve per subproblem, applied to the overlap residual.

    Arguments:
        state (AtcState): converged subproblem pair

    Returns:
        (VirtualControls): gradient, shaped like the controls
    """
    return state.problem.split(_apply_adjoint(state, state.residual()))


################################################################
# outer loop
################################################################

def _gauss_newton_step(state, g, rtol, maxiter):
    problem = state.problem
    n = len(g)

    def matvec(v):
        v = problem.project(np.ravel(v))
        return problem.project(_apply_adjoint(state, _apply_forward(state, v)))

    normal = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec, dtype=float)
    counter = {"iterations": 0}

    def callback(xk):
        counter["iterations"] += 1

    (step, info) = scipy.sparse.linalg.cg(normal, -g, rtol=rtol, maxiter=maxiter, callback=callback)
    if info > 0:
        warnings.warn("Gauss-Newton normal equations not converged in {} CG iterations".format(info), RuntimeWarning)
        logger.warning("outer: CG stopped after %d iterations", info)
    elif info < 0:
        raise exception.SingularSystemError("CG breakdown in Gauss-Newton normal equations")
    return (problem.project(step), counter["iterations"])


def initial_controls(problem, init=modes.ControlInit.kZero):
    """Initial virtual controls.

    Arguments:
        problem (CouplingProblem): problem
        init (modes.ControlInit or VirtualControls): choice or explicit controls

    Returns:
        (VirtualControls): controls
    """
    if isinstance(init, VirtualControls):
        problem.check_controls(init)
        return init.copy()
    if init is modes.ControlInit.kZero:
        return VirtualControls.zeros(problem)
    elif init is modes.ControlInit.kContinuumPredictor:
        return predictor(problem)
    raise ValueError("unknown control initialization {}".format(init))


def predictor(problem):
    """Controls from one pass atomistic -> continuum.

    Solves the atomistic problem with lambda_a = 0, takes lambda_c as its
    trace on Gamma_core, solves the continuum problem and takes lambda_a as
    the continuum trace on the atomistic boundary layer.

    Returns:
        (VirtualControls): predicted controls
    """
    s = problem.solver
    u_a = atomistic.solve_restricted_atomistic(
        problem.atomistic, np.zeros((problem.n_atomistic_controls, constants.k_dim)),
        tol=s.tol_newton, max_iter=s.max_newton, armijo=s.armijo, continuation=True,
    )
    lambda_c = u_a.at(problem.mesh.nodes[problem.continuum.gamma_core])
    u_c = continuum.solve_restricted_continuum(
        problem.mesh, problem.continuum, lambda_c, tol=s.tol_newton, max_iter=s.max_newton, armijo=s.armijo,
    )
    nodes = problem.mesh.ordinal(problem.atomistic.index.sites[problem.atomistic.control])
    if np.any(nodes < 0):
        raise exception.CoverageError("mesh does not resolve the atomistic boundary layer")
    return VirtualControls(u_c.values[nodes], lambda_c)


def solve_atc(problem, init=modes.ControlInit.kZero, verbose=False):
    """Minimize J over the virtual controls by Gauss-Newton.

    Arguments:
        problem (CouplingProblem): geometry, model, mesh and tolerances
        init (modes.ControlInit or VirtualControls, optional): initial controls
        verbose (bool, optional): log outer iterations at INFO level

    Returns:
        (AtcState): converged state, mean constraint applied

    Raises:
        exception.OuterConvergenceError: if the outer loop does not converge in
            max_outer iterations or its line search fails
        exception.SolverError: if a subproblem solve fails
    """
    level = logging.INFO if verbose else logging.DEBUG
    s = problem.solver
    state = problem.evaluate(initial_controls(problem, init), continuation=True)
    log = []
    for iteration in range(s.max_outer+1):
        g = problem.project(_apply_adjoint(state, state.residual()))
        state.gradient_norm = float(np.linalg.norm(g))
        record = {"iteration": iteration, "J": state.J, "gradient_norm": state.gradient_norm}
        log.append(record)
        logger.log(level, "outer: iteration %d J %.6e gradient %.3e", iteration, state.J, state.gradient_norm)
        if state.gradient_norm <= s.tol_outer or state.J <= s.tol_J:
            break
        if iteration == s.max_outer:
            raise exception.OuterConvergenceError(
                "outer loop not converged after {} iterations (gradient {:.3e})".format(
                    s.max_outer, state.gradient_norm
                ),
                iterations=s.max_outer, residual=state.gradient_norm,
            )

        (step, cg_iterations) = _gauss_newton_step(state, g, s.cg_rtol, s.cg_maxiter)
        slope = float(g @ step)
        if not slope < 0:
            logger.warning("outer: Gauss-Newton step not a descent direction; using steepest descent")
            step = -g
            slope = -state.gradient_norm**2
        record["cg_iterations"] = cg_iterations

        base = state.controls.flat()
        t = 1.0
        for _ in range(k_max_backtrack):
            try:
                trial = problem.evaluate(problem.split(base+t*step), guess=state)
            except exception.SolverError as err:
                logger.debug("outer: trial step %.3e rejected: %s", t, err)
            else:
                if trial.J <= state.J+s.armijo*t*slope:
                    break
            t *= 0.5
        else:
            raise exception.OuterConvergenceError(
                "outer line search failed at iteration {} (J {:.3e})".format(iteration, state.J),
                iterations=iteration, residual=state.gradient_norm,
            )
        record["step"] = t
        state = trial

    state.log = log
    state.iterations = log[-1]["iteration"]
    return apply_mean_constraint_state(state)


################################################################
# mean constraint
################################################################

def apply_mean_constraint(geom, u_a, u_c):
    """Shift u^c so that the overlap mean of Iu^a - u^c vanishes.

    Arguments:
        geom (geometry.DomainGeometry): geometry
        u_a (geometry.LatticeField): atomistic field
        u_c (continuum.FEField): continuum field

    Returns:
        (continuum.FEField): shifted continuum field; info["shift"] holds the
            constant added
    """
    c = OverlapOperator(geom, u_c.mesh, u_a.index).mean_difference(u_a.values, u_c.values)
    shifted = u_c.shifted(c)
    shifted.info = dict(u_c.info, shift=c)
    return shifted


def apply_mean_constraint_state(state):
    """apply_mean_constraint() on a state, shifting lambda_c along with u^c."""
    c = state.problem.overlap.mean_difference(state.u_a.values, state.u_c.values)
    u_c = state.u_c.shifted(c)
    u_c.info = dict(state.u_c.info, shift=c)
    controls = VirtualControls(state.controls.lambda_a, state.controls.lambda_c+c, modes.Gauge.kMeanZero)
    adjusted = AtcState(
        state.problem, controls, state.u_a, u_c, state.J, state.gradient_norm, state.log, state.iterations,
    )
    # Hessians are translation invariant
    adjusted._sensitivities = state._sensitivities
    return adjusted


################################################################
# errors
################################################################

def _interpolant_gradients(u, vertices):
    """Gradients (m, d, d) of Iu on lattice triangles (m, 3, 2)."""
    values = u.at(vertices.reshape(-1, constants.k_dim)).reshape(len(vertices), 3, constants.k_dim)
    (grads, _) = geometry.triangle_gradients(vertices)
    return np.einsum("mai,maj->mij", values, grads)


def _edge_breakpoints(delta):
    """Parameters where the segment 0 -> delta crosses x, y or y-x lattice lines."""
    (dx, dy) = (int(delta[0]), int(delta[1]))
    breakpoints = {0.0, 1.0}
    for length in (abs(dx), abs(dy), abs(dy-dx)):
        breakpoints.update(k/length for k in range(1, length))
    return np.array(sorted(breakpoints))


def _interpolant_moments(u, vertices):
    """Exact integrals of grad Iu over triangles (m, 3, 2), as (m, d, d).

    The integral is the boundary integral of Iu n along the edges; Iu is
    linear between the crossings of an edge with lattice lines, so the
    trapezoidal rule on those breakpoints is exact.
    """
    d = constants.k_dim
    m = len(vertices)
    starts = vertices.reshape(-1, d)
    ends = np.roll(vertices, -1, axis=1).reshape(-1, d)
    deltas = ends-starts
    (keys, inverse) = np.unique(deltas, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    means = np.zeros((len(starts), d))
    for (k, delta) in enumerate(keys):
        edges = np.flatnonzero(inverse == k)
        t = _edge_breakpoints(delta)
        weights = np.zeros(len(t))
        weights[:-1] += 0.5*np.diff(t)
        weights[1:] += 0.5*np.diff(t)
        points = starts[edges][:, None, :]+t[None, :, None]*delta[None, None, :]
        values = u.interpolate(points.reshape(-1, d)).reshape(len(edges), len(t), d)
        means[edges] = np.einsum("t,eti->ei", weights, values)
    # outward normal times edge length for counterclockwise edges
    normals = np.stack([deltas[:, 1], -deltas[:, 0]], axis=1).astype(float)
    moments = np.einsum("ei,ej->eij", means, normals)
    return moments.reshape(m, 3, d, d).sum(axis=1)


def _lattice_triangle_keys(vertices, half_width):
    """Integer keys of unit lattice triangles (m, 3, 2)."""
    corner = vertices.min(axis=1)
    upper = np.any(np.all(vertices-corner[:, None, :] == (0, 1), axis=2), axis=1)
    width = 2*half_width+1
    return ((corner[:, 0]+half_width)*width+(corner[:, 1]+half_width))*2+upper


def continuum_error_squared(u_c, reference):
    """|grad u^c - grad I u^ref|^2 over Omega_c, integrated exactly.

    Arguments:
        u_c (continuum.FEField): continuum field
        reference (geometry.LatticeField): reference covering Omega_c

    Returns:
        (float): squared seminorm error

    Raises:
        exception.CoverageError: if the reference does not cover Omega_c
    """
    fe_mesh = u_c.mesh
    geom = fe_mesh.geom
    G = fe_mesh.gradient_operator(modes.DomainTag.kContinuum).gradients(u_c.values)
    areas = fe_mesh.areas
    vertices = fe_mesh.vertices
    resolved = mesh.lattice_triangle_mask(vertices)

    difference = G[resolved]-_interpolant_gradients(reference, vertices[resolved])
    total = float(np.sum(areas[resolved]*np.sum(difference**2, axis=(1, 2))))

    coarse = ~resolved
    if np.any(coarse):
        moments = _interpolant_moments(reference, vertices[coarse])
        total += float(np.sum(areas[coarse]*np.sum(G[coarse]**2, axis=(1, 2))))
        total -= 2.0*float(np.sum(G[coarse]*moments))
        # |grad I u^ref|^2 on the lattice triangles under coarse FE triangles
        lattice = geometry.unit_triangles(geom.r_c, geom.r_core)
        covered = np.isin(
            _lattice_triangle_keys(lattice, geom.r_c), _lattice_triangle_keys(vertices[resolved], geom.r_c)
        )
        g_ref = _interpolant_gradients(reference, lattice[~covered])
        total += 0.5*float(np.sum(g_ref**2))
    return max(total, 0.0)


def continuum_error(u_c, reference):
    """|grad u^c - grad I u^ref|_{L2(Omega_c)}."""
    return float(np.sqrt(continuum_error_squared(u_c, reference)))


def broken_error(geom, u_a, u_c, reference):
    """Broken-norm error against the reference.

    (|grad(Iu^a - Iu^ref)|^2_{L2(Omega_a)} + |grad(u^c - Iu^ref)|^2_{L2(Omega_c)})^(1/2);
    gradients only, so no gauge alignment is needed.

    Arguments:
        geom (geometry.DomainGeometry): geometry
        u_a (geometry.LatticeField): atomistic field on L_a
        u_c (continuum.FEField): continuum field
        reference (geometry.LatticeField): reference covering Omega

    Returns:
        (float): error

    Raises:
        exception.CoverageError: if the reference does not cover Omega
    """
    (outer, _) = geom.half_widths(modes.DomainTag.kAtomistic)
    if np.abs(reference.index.sites).max(initial=0) < geom.r_c:
        raise exception.CoverageError("reference of half-width {} does not cover Omega (r_c = {})".format(
            int(np.abs(reference.index.sites).max(initial=0)), geom.r_c
        ))
    triangles = geometry.unit_triangles(outer)
    difference = _interpolant_gradients(u_a, triangles)-_interpolant_gradients(reference, triangles)
    atomistic_term = 0.5*float(np.sum(difference**2))
    return float(np.sqrt(atomistic_term+continuum_error_squared(u_c, reference)))


def solve_continuum_reference(problem, reference):
    """Continuum solution u^con with lambda_c = trace of the reference on Gamma_core.

    Arguments:
        problem (CouplingProblem): problem
        reference (geometry.LatticeField): reference

    Returns:
        (continuum.FEField): u^con
    """
    s = problem.solver
    lambda_c = reference.at(problem.mesh.nodes[problem.continuum.gamma_core])
    return continuum.solve_restricted_continuum(
        problem.mesh, problem.continuum, lambda_c, tol=s.tol_newton, max_iter=s.max_newton, armijo=s.armijo,
    )


################################################################
# norms of the reduced problem
################################################################

def control_norms(state, mu):
    """Norms of a control perturbation at a state.

    Arguments:
        state (AtcState): linearization state
        mu (VirtualControls): perturbation

    Returns:
        (dict): "atomistic" |grad I dU^a[mu_a]|_{L2(Omega_a)},
            "continuum" |grad dU^c[mu_c]|_{L2(Omega_c)},
            "err" (atomistic^2 + continuum^2)^(1/2),
            "op" |grad(I dU^a[mu_a] - dU^c[mu_c])|_{L2(Omega_o)},
            "overlap_atomistic", "overlap_continuum" the two seminorms on Omega_o
    """
    problem = state.problem
    problem.check_controls(mu)
    (sens_a, sens_c) = state.sensitivities()
    du_a = sens_a.forward(mu.lambda_a)
    du_c = sens_c.forward(mu.lambda_c)
    norm_a = problem.atomistic.gradient_operator(modes.DomainTag.kAtomistic).seminorm(du_a)
    norm_c = problem.mesh.gradient_operator(modes.DomainTag.kContinuum).seminorm(du_c)
    norm_op = float(np.linalg.norm(problem.overlap.residual(du_a, du_c)))
    return {
        "atomistic": norm_a,
        "continuum": norm_c,
        "err": float(np.hypot(norm_a, norm_c)),
        "op": norm_op,
        "overlap_atomistic": problem.overlap.atomistic.seminorm(du_a),
        "overlap_continuum": problem.overlap.continuum.seminorm(du_c),
    }

"""atomistic.py -- restricted atomistic problem, reference solve and sensitivities

The restricted energy sums site energies over every site whose full stencil
lies in the lattice (L°); sites of the double interior L°° are free and the
boundary layer L \\ L°° carries Dirichlet virtual controls.  For fields
constant outside the lattice this makes the restricted first variation on
free directions identical to that of the infinite-lattice energy.

- 04/14/26 (dlk): Created.
- 04/23/26 (dlk): Newton with Armijo backtracking.
- 05/12/26 (dlk): Sum energies over L° rather than L°°, so the trace of the
    reference solution reproduces it exactly.
- 05/21/26 (dlk): Add AtomisticSensitivity for repeated linearized solves.
- 06/02/26 (dlk): Add continuation in defect strength.
- 07/14/26 (ams): Add decay_profile().
- 10/18/26 (dlk): Move newton_minimize to linalg.py.
"""

from __future__ import annotations

import logging

import numpy as np

from . import (
    constants,
    exception,
    geometry,
    linalg,
    modes,
)

logger = logging.getLogger(__name__)


################################################################
# system
################################################################

class AtomisticSystem:
    """Lattice with free/control splitting and a site model.

    Arguments:
        index (geometry.LatticeIndex): lattice sites
        model (potential.SiteModel): site potential
        geom (geometry.DomainGeometry, optional): geometry the lattice came from
    """

    def __init__(self, index, model, geom=None):
        self.index = index
        self.model = model
        self.geom = geom
        d = constants.k_dim
        self.energy_sites = np.flatnonzero(index.interior)
        self.free = np.flatnonzero(index.double_interior)
        self.control = np.flatnonzero(index.boundary)
        self.free_dofs = (self.free[:, None]*d+np.arange(d)).ravel()
        self.control_dofs = (self.control[:, None]*d+np.arange(d)).ravel()
        self._gradients = {}

    @classmethod
    def from_geometry(cls, geom, model):
        """System on L_a of a geometry."""
        return cls(geometry.lattice_sets(geom, modes.DomainTag.kAtomistic), model, geom)

    @classmethod
    def from_box(cls, model, N):
        """System on Z^2 cap [-N,N]^2."""
        index = geometry.LatticeIndex(geometry.box_points(N), model.interaction_range)
        return cls(index, model)

    def __len__(self):
        return len(self.index)

    @property
    def n_dofs(self):
        return constants.k_dim*len(self.index)

    @property
    def pinned_site(self):
        """Designated boundary site for the pinned gauge."""
        return int(self.control[0])

    def gradient_operator(self, tag):
        """P1 gradient operator of the atomistic triangulation on a domain.

        Arguments:
            tag (modes.DomainTag): kAtomistic or kOverlap

        Returns:
            (geometry.P1Gradient): operator over all lattice sites
        """
        if self.geom is None:
            raise ValueError("gradient operators need a system built from a geometry")
        if tag not in self._gradients:
            (outer, inner) = self.geom.half_widths(tag)
            self._gradients[tag] = geometry.lattice_gradient(self.index, outer, inner)
        return self._gradients[tag]

    def full_values(self, free_values, control_values):
        """Combine free and control values (flattened or (m, d)) into an (n, d) array."""
        values = np.zeros((len(self.index), constants.k_dim))
        values[self.free] = np.asarray(free_values, dtype=float).reshape(-1, constants.k_dim)
        values[self.control] = np.asarray(control_values, dtype=float).reshape(-1, constants.k_dim)
        return values

    def field(self, values, gauge=modes.Gauge.kRaw):
        return geometry.LatticeField(self.index, values, gauge)

    def trace(self, u):
        """Values of a field on the control sites, (n_control, d).

        Arguments:
            u (geometry.LatticeField): field covering the control sites
        """
        return u.at(self.index.sites[self.control])


################################################################
# assembly
################################################################

def _assemble_values(sys, values, order):
    values = np.asarray(values, dtype=float)
    ordinals = sys.energy_sites
    sites = sys.index.sites[ordinals]
    Du = geometry.stencils(sys.index, values, ordinals)
    terms = sys.model.bond_terms(sites, Du, order=order)
    if order == 0:
        return float(np.sum(terms))

    d = constants.k_dim
    targets = sys.index.neighbors[ordinals]
    n_rho = targets.shape[1]
    centers = np.repeat(ordinals, n_rho)
    targets = targets.ravel()
    if order == 1:
        g = terms.reshape(-1, d)
        gradient = np.zeros((len(sys.index), d))
        for i in range(d):
            gradient[:, i] += np.bincount(targets, weights=g[:, i], minlength=len(sys.index))
            gradient[:, i] -= np.bincount(centers, weights=g[:, i], minlength=len(sys.index))
        return gradient

    blocks = terms.reshape(-1, d, d)
    rows = np.concatenate([centers, targets, centers, targets])
    cols = np.concatenate([centers, targets, targets, centers])
    data = np.concatenate([blocks, blocks, -blocks, -blocks])
    full = linalg.coo_blocks(rows, cols, data, (sys.n_dofs, sys.n_dofs))
    free_rows = full[sys.free_dofs]
    return linalg.SparseOperator(
        free_free=free_rows[:, sys.free_dofs].tocsr(),
        free_control=free_rows[:, sys.control_dofs].tocsr(),
        full=full,
    )


def assemble_atomistic(sys, u, order=0):
    """Restricted atomistic energy and its derivatives.

    Arguments:
        sys (AtomisticSystem): system
        u (geometry.LatticeField or np.ndarray): field on all sites
        order (int): 0 energy, 1 residual on free DOFs, 2 Hessian

    Returns:
        (float, np.ndarray or linalg.SparseOperator): energy, flattened
            residual over free DOFs, or Hessian blocks
    """
    values = u.values if isinstance(u, geometry.LatticeField) else u
    result = _assemble_values(sys, values, order)
    if order == 1:
        return result[sys.free].ravel()
    return result


def full_gradient(sys, u):
    """Gradient of the restricted energy over all DOFs, as (n, d)."""
    values = u.values if isinstance(u, geometry.LatticeField) else u
    return _assemble_values(sys, values, 1)


################################################################
# restricted and reference solves
################################################################

def _control_array(sys, lambda_a):
    lambda_a = np.asarray(lambda_a, dtype=float)
    if lambda_a.shape != (len(sys.control), constants.k_dim):
        raise ValueError("atomistic controls have shape {}, expected {}".format(
            lambda_a.shape, (len(sys.control), constants.k_dim)
        ))
    return lambda_a


def _solve_fixed_model(sys, lambda_a, x0, tol, max_iter, armijo, verbose):
    def energy(x):
        return assemble_atomistic(sys, sys.full_values(x, lambda_a), 0)

    def gradient(x):
        return assemble_atomistic(sys, sys.full_values(x, lambda_a), 1)

    def hessian(x):
        return assemble_atomistic(sys, sys.full_values(x, lambda_a), 2).free_free

    return linalg.newton_minimize(
        energy, gradient, hessian, x0, tol, max_iter=max_iter, armijo=armijo,
        label="atomistic", verbose=verbose,
    )


def solve_restricted_atomistic(sys, lambda_a, u0=None, tol=constants.k_tol_newton,
                               max_iter=constants.k_max_newton, armijo=constants.k_armijo,
                               continuation=False, verbose=False):
    """Solve the restricted atomistic problem with Dirichlet controls.

    Arguments:
        sys (AtomisticSystem): system
        lambda_a (np.ndarray): (n_control, d) controls on the boundary layer
        u0 (geometry.LatticeField, optional): initial guess (free values used)
        tol (float, optional): residual tolerance, scaled by 1+|lambda_a|_inf
        max_iter (int, optional): Newton iterations
        armijo (float, optional): sufficient-decrease constant
        continuation (bool, optional): on failure, ramp the defect from the
            homogeneous model in stages
        verbose (bool, optional): log iterations at INFO level

    Returns:
        (geometry.LatticeField): solution, equal to lambda_a on the control
            sites; info holds "iterations" and "residual"

    Raises:
        exception.ConvergenceError, exception.SingularSystemError
    """
    lambda_a = _control_array(sys, lambda_a)
    scaled_tol = tol*(1+(np.abs(lambda_a).max() if lambda_a.size else 0.0))
    if u0 is None:
        x0 = np.zeros(len(sys.free_dofs))
    else:
        values = u0.values if isinstance(u0, geometry.LatticeField) else np.asarray(u0)
        x0 = values[sys.free].ravel()

    try:
        (x, iterations, residual) = _solve_fixed_model(sys, lambda_a, x0, scaled_tol, max_iter, armijo, verbose)
    except exception.SolverError:
        if not continuation or sys.model.is_homogeneous:
            raise
        logger.warning("atomistic: Newton failed; continuing in defect strength")
        (x, iterations, residual) = _solve_by_continuation(sys, lambda_a, scaled_tol, max_iter, armijo, verbose)

    field = sys.field(sys.full_values(x, lambda_a))
    field.info = {"iterations": iterations, "residual": residual}
    return field


def _solve_by_continuation(sys, lambda_a, tol, max_iter, armijo, verbose):
    defect = sys.model.defect
    stages = constants.k_continuation_stages
    x = np.zeros(len(sys.free_dofs))
    total = 0
    for stage in range(1, stages+1):
        fraction = stage/stages
        staged = type(defect)(
            alpha=1+(defect.alpha-1)*fraction, misfit=defect.misfit*fraction, radius=defect.radius
        )
        staged_sys = AtomisticSystem(sys.index, sys.model.with_defect(staged), sys.geom)
        (x, iterations, residual) = _solve_fixed_model(staged_sys, lambda_a, x, tol, max_iter, armijo, verbose)
        total += iterations
    return (x, total, residual)


def solve_reference(model, N, tol=constants.k_tol_newton, max_iter=constants.k_max_newton,
                    continuation=True, verbose=False):
    """Truncated reference solve on Z^2 cap [-N,N]^2.

    The field is constant outside the box; the boundary layer is clamped to
    the shared constant zero, which pins the gauge.

    Arguments:
        model (potential.SiteModel): site potential
        N (int): truncation radius

    Returns:
        (geometry.LatticeField): reference solution, pinned gauge
    """
    sys = AtomisticSystem.from_box(model, N)
    logger.info("reference: N %d sites %d", N, len(sys))
    field = solve_restricted_atomistic(
        sys, np.zeros((len(sys.control), constants.k_dim)), tol=tol, max_iter=max_iter,
        continuation=continuation, verbose=verbose,
    )
    field.gauge = modes.Gauge.kPinned
    field.pinned_site = sys.pinned_site
    return field


################################################################
# linearized solves
################################################################

class AtomisticSensitivity:
    """Linearized restricted problem at a converged base state.

    Holds one factorization of the free-free Hessian block for repeated
    forward (delta U^a[mu]) and adjoint solves.

    Arguments:
        sys (AtomisticSystem): system
        base (geometry.LatticeField): converged restricted solution
    """

    def __init__(self, sys, base):
        self.sys = sys
        self.operator = assemble_atomistic(sys, base, 2)
        self.factorization = linalg.Factorization(self.operator.free_free)

    def forward(self, mu):
        """delta U^a[mu] as (n, d) values for controls mu of shape (n_control, d)."""
        flat = np.asarray(mu, dtype=float).ravel()
        free = -self.factorization.solve(self.operator.free_control @ flat)
        return self.sys.full_values(free, flat)

    def forward_matrix(self, mu):
        """Linearized solutions for a block of flattened controls (n_control*d, k).

        Returns:
            (np.ndarray): (n*d, k) flattened fields
        """
        free = -self.factorization.solve(np.asarray(self.operator.free_control @ mu))
        out = np.zeros((self.sys.n_dofs, mu.shape[1]))
        out[self.sys.free_dofs] = free
        out[self.sys.control_dofs] = mu
        return out

    def adjoint(self, functional):
        """Gradient with respect to mu of functional . delta U^a[mu].

        Arguments:
            functional (np.ndarray): (n*d,) linear functional on full fields

        Returns:
            (np.ndarray): (n_control*d,) gradient
        """
        functional = np.asarray(functional, dtype=float)
        p = self.factorization.solve(functional[self.sys.free_dofs])
        return functional[self.sys.control_dofs]-self.operator.free_control.T @ p


def linearized_atomistic_solve(sys, base, mu_a):
    """Linearized restricted solution delta U^a[mu_a] about a converged base.

    Arguments:
        sys (AtomisticSystem): system
        base (geometry.LatticeField): converged restricted solution
        mu_a (np.ndarray): (n_control, d) control perturbation

    Returns:
        (geometry.LatticeField): the linearized solution
    """
    mu_a = _control_array(sys, mu_a)
    return sys.field(AtomisticSensitivity(sys, base).forward(mu_a))


################################################################
# decay profile
################################################################

def decay_profile(u, r_min=1.0, r_max=None):
    """Shell maxima of the stencil magnitude.

    Shells are annuli |xi| in [2^j, 2^(j+1)) lying within [r_min, r_max];
    within each, the maximum over interior sites of max_rho |D_rho u(xi)| is
    taken.

    Arguments:
        u (geometry.LatticeField): field
        r_min (float, optional): smallest shell radius
        r_max (float, optional): largest radius covered (default: lattice extent)

    Returns:
        (list of tuple): (2^j, shell maximum) pairs

    Raises:
        exception.CoverageError: if a requested shell holds no interior site
    """
    index = u.index
    ordinals = np.flatnonzero(index.interior)
    Du = geometry.stencils(index, u.values, ordinals)
    magnitude = np.linalg.norm(Du, axis=2).max(axis=1)
    radius = np.linalg.norm(index.sites[ordinals], axis=1)
    if r_max is None:
        r_max = float(np.abs(index.interior_sites).max()) if len(ordinals) else 0.0

    profile = []
    j = int(np.ceil(np.log2(max(r_min, 1.0))))
    while 2.0**(j+1) <= r_max:
        mask = (radius >= 2.0**j) & (radius < 2.0**(j+1))
        if not np.any(mask):
            raise exception.CoverageError("shell [{}, {}) contains no interior sites".format(2**j, 2**(j+1)))
        profile.append((2.0**j, float(magnitude[mask].max())))
        j += 1
    if not profile:
        raise exception.CoverageError("no complete shell between radii {} and {}".format(r_min, r_max))
    return profile

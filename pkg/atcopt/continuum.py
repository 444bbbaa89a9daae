"""continuum.py -- restricted Cauchy-Born finite-element problem

Unknowns of the restricted problem are the displacements of interior nodes
and one shared constant K carried by every node of Gamma_c; nodes of
Gamma_core carry Dirichlet virtual controls lambda_c.  With P the
prolongation from unknowns and B the one from controls, nodal values are
u = P z + B lambda_c.

- 04/29/26 (dlk): Created.
- 05/05/26 (dlk): Tie Gamma_c to a single constant through the prolongation.
- 05/21/26 (dlk): Add ContinuumSensitivity.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np
import scipy.sparse

from . import (
    constants,
    linalg,
    modes,
)

logger = logging.getLogger(__name__)


################################################################
# fields
################################################################

@dataclasses.dataclass
class FEField:
    """Nodal P1 field on a mesh.

    Arguments:
        mesh (mesh.FEMesh): mesh
        values (np.ndarray): (n, d) nodal values; nodes of Gamma_c share K
    """

    mesh: object
    values: np.ndarray
    info: dict = dataclasses.field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.mesh.nodes), constants.k_dim):
            raise ValueError("field values have shape {}, expected {}".format(
                self.values.shape, (len(self.mesh.nodes), constants.k_dim)
            ))

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((len(mesh.nodes), constants.k_dim)))

    @classmethod
    def affine(cls, mesh, G, shift=None):
        values = mesh.nodes @ np.asarray(G, dtype=float).T
        if shift is not None:
            values = values+np.asarray(shift, dtype=float)
        return cls(mesh, values)

    @classmethod
    def from_lattice(cls, mesh, u):
        """Nodal interpolant of a lattice field (nodes are lattice points)."""
        return cls(mesh, u.at(mesh.nodes))

    @property
    def K(self):
        """Shared value on Gamma_c."""
        return self.values[self.mesh.tagged(modes.NodeTag.kGammaC)[0]].copy()

    def is_tied(self, atol=0.0):
        """Whether all Gamma_c nodes carry the same value."""
        outer = self.values[self.mesh.tagged(modes.NodeTag.kGammaC)]
        return bool(np.all(np.abs(outer-outer[0]) <= atol))

    def shifted(self, c):
        return FEField(self.mesh, self.values+np.asarray(c, dtype=float))

    def copy(self):
        return FEField(self.mesh, self.values.copy())


################################################################
# system
################################################################

class ContinuumSystem:
    """DOF map and assembly for the restricted continuum problem.

    Arguments:
        mesh (mesh.FEMesh): mesh
        cb (potential.CauchyBornDensity): strain energy density
    """

    def __init__(self, mesh, cb):
        self.mesh = mesh
        self.cb = cb
        d = constants.k_dim
        n = len(mesh.nodes)
        self.interior = mesh.tagged(modes.NodeTag.kInterior)
        self.gamma_core = mesh.tagged(modes.NodeTag.kGammaCore)
        self.gamma_c = mesh.tagged(modes.NodeTag.kGammaC)
        self.n_unknowns = d*(len(self.interior)+1)

        # prolongation from unknowns (interior nodes, then K)
        rows = np.concatenate([
            (self.interior[:, None]*d+np.arange(d)).ravel(),
            (self.gamma_c[:, None]*d+np.arange(d)).ravel(),
        ])
        cols = np.concatenate([
            np.arange(d*len(self.interior)),
            np.tile(d*len(self.interior)+np.arange(d), len(self.gamma_c)),
        ])
        self.P = scipy.sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(d*n, self.n_unknowns))
        control_rows = (self.gamma_core[:, None]*d+np.arange(d)).ravel()
        self.B = scipy.sparse.csr_matrix(
            (np.ones(len(control_rows)), (control_rows, np.arange(len(control_rows)))),
            shape=(d*n, len(control_rows)),
        )
        self.gradient = mesh.gradient_operator(modes.DomainTag.kContinuum)

    @property
    def n_controls(self):
        return constants.k_dim*len(self.gamma_core)

    @property
    def n_dofs(self):
        """Free DOFs, interior nodes plus K."""
        return self.n_unknowns

    def full_values(self, z, lambda_c):
        flat = self.P @ np.asarray(z, dtype=float)+self.B @ np.asarray(lambda_c, dtype=float).ravel()
        return flat.reshape(-1, constants.k_dim)

    def unknowns(self, values):
        """Unknown vector z of a tied field (interior values, then K)."""
        values = np.asarray(values, dtype=float)
        return np.concatenate([values[self.interior].ravel(), values[self.gamma_c[0]]])

    def trace(self, u):
        """Values on Gamma_core nodes, (n_core, d)."""
        if isinstance(u, FEField):
            return u.values[self.gamma_core].copy()
        return u.at(self.mesh.nodes[self.gamma_core])

    def energy(self, values):
        G = self.gradient.gradients(values)
        return float(np.sum(self.cb.evaluate(G, order=0)*self.gradient.areas))

    def full_gradient(self, values):
        """Energy gradient over all nodal DOFs (d n,)."""
        G = self.gradient.gradients(values)
        stress = self.cb.evaluate(G, order=1)*np.sqrt(self.gradient.areas)[:, None, None]
        return self.gradient.matrix.T @ stress.ravel()

    def full_hessian(self, values):
        """Energy Hessian over all nodal DOFs."""
        d = constants.k_dim
        G = self.gradient.gradients(values)
        tangent = self.cb.evaluate(G, order=2).reshape(-1, d*d, d*d)
        m = len(tangent)
        (a, b) = np.meshgrid(np.arange(d*d), np.arange(d*d), indexing="ij")
        rows = (np.arange(m)[:, None, None]*d*d+a[None]).ravel()
        cols = (np.arange(m)[:, None, None]*d*d+b[None]).ravel()
        middle = scipy.sparse.csr_matrix((tangent.ravel(), (rows, cols)), shape=(m*d*d, m*d*d))
        D = self.gradient.matrix
        return (D.T @ middle @ D).tocsr()

    def operator(self, values):
        H = self.full_hessian(values)
        HP = H @ self.P
        return linalg.SparseOperator(
            free_free=(self.P.T @ HP).tocsr(),
            free_control=(self.P.T @ (H @ self.B)).tocsr(),
            full=H,
        )


################################################################
# assembly
################################################################

def _system(mesh, cb):
    return cb if isinstance(cb, ContinuumSystem) else ContinuumSystem(mesh, cb)


def _values(u):
    return u.values if isinstance(u, FEField) else np.asarray(u, dtype=float)


def assemble_continuum(mesh, cb, u, order=0):
    """Restricted continuum energy and its derivatives.

    Arguments:
        mesh (mesh.FEMesh): mesh
        cb (potential.CauchyBornDensity or ContinuumSystem): density
        u (FEField): field
        order (int): 0 energy, 1 residual over unknowns, 2 Hessian blocks

    Returns:
        (float, np.ndarray or linalg.SparseOperator): energy sum_T W(grad u|_T)|T|,
            residual P^T grad E, or (P^T H P, P^T H B)
    """
    system = _system(mesh, cb)
    values = _values(u)
    if order == 0:
        return system.energy(values)
    elif order == 1:
        return system.P.T @ system.full_gradient(values)
    elif order == 2:
        return system.operator(values)
    raise ValueError("unsupported derivative order {}".format(order))


################################################################
# solves
################################################################

def _control_array(system, lambda_c):
    lambda_c = np.asarray(lambda_c, dtype=float)
    if lambda_c.shape != (len(system.gamma_core), constants.k_dim):
        raise ValueError("continuum controls have shape {}, expected {}".format(
            lambda_c.shape, (len(system.gamma_core), constants.k_dim)
        ))
    return lambda_c


def solve_restricted_continuum(mesh, cb, lambda_c, u0=None, tol=constants.k_tol_newton,
                               max_iter=constants.k_max_newton, armijo=constants.k_armijo,
                               verbose=False):
    """Solve the restricted continuum problem with Dirichlet controls on Gamma_core.

    Arguments:
        mesh (mesh.FEMesh): mesh
        cb (potential.CauchyBornDensity or ContinuumSystem): density
        lambda_c (np.ndarray): (n_core, d) controls on Gamma_core nodes
        u0 (FEField, optional): initial guess
        tol (float, optional): residual tolerance, scaled by 1+|lambda_c|_inf

    Returns:
        (FEField): solution with K solved for; info holds "iterations" and
            "residual"

    Raises:
        exception.ConvergenceError, exception.SingularSystemError
    """
    system = _system(mesh, cb)
    lambda_c = _control_array(system, lambda_c)
    scaled_tol = tol*(1+(np.abs(lambda_c).max() if lambda_c.size else 0.0))
    z0 = np.zeros(system.n_unknowns) if u0 is None else system.unknowns(_values(u0))

    def energy(z):
        return system.energy(system.full_values(z, lambda_c))

    def gradient(z):
        return system.P.T @ system.full_gradient(system.full_values(z, lambda_c))

    def hessian(z):
        H = system.full_hessian(system.full_values(z, lambda_c))
        return (system.P.T @ H @ system.P).tocsr()

    (z, iterations, residual) = linalg.newton_minimize(
        energy, gradient, hessian, z0, scaled_tol, max_iter=max_iter, armijo=armijo,
        label="continuum", verbose=verbose,
    )
    field = FEField(mesh, system.full_values(z, lambda_c))
    field.info = {"iterations": iterations, "residual": residual}
    return field


class ContinuumSensitivity:
    """Linearized restricted continuum problem at a converged base.

    Arguments:
        system (ContinuumSystem): system
        base (FEField): converged restricted solution
    """

    def __init__(self, system, base):
        self.system = system
        self.operator = system.operator(_values(base))
        self.factorization = linalg.Factorization(self.operator.free_free)

    def forward(self, mu):
        """delta U^c[mu] as (n, d) nodal values for controls mu (n_core, d)."""
        flat = np.asarray(mu, dtype=float).ravel()
        z = -self.factorization.solve(self.operator.free_control @ flat)
        return self.system.full_values(z, flat)

    def forward_matrix(self, mu):
        """Linearized solutions (d n, k) for a block of flattened controls (n_controls, k)."""
        mu = np.asarray(mu, dtype=float)
        z = -self.factorization.solve(np.asarray(self.operator.free_control @ mu))
        return np.asarray(self.system.P @ z+self.system.B @ mu)

    def adjoint(self, functional):
        """Gradient with respect to mu of functional . delta U^c[mu].

        Arguments:
            functional (np.ndarray): (d n,) linear functional on nodal values

        Returns:
            (np.ndarray): (n_controls,) gradient
        """
        functional = np.asarray(functional, dtype=float)
        p = self.factorization.solve(self.system.P.T @ functional)
        return self.system.B.T @ functional-self.operator.free_control.T @ p


def linearized_continuum_solve(mesh, cb, base, mu_c):
    """Linearized restricted solution delta U^c[mu_c] about a converged base.

    Arguments:
        mesh (mesh.FEMesh): mesh
        cb (potential.CauchyBornDensity or ContinuumSystem): density
        base (FEField): converged restricted solution
        mu_c (np.ndarray): (n_core, d) control perturbation

    Returns:
        (FEField): linearized solution
    """
    system = _system(mesh, cb)
    mu_c = _control_array(system, mu_c)
    return FEField(mesh, ContinuumSensitivity(system, base).forward(mu_c))

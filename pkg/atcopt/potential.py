"""potential.py -- site potentials, defect model and Cauchy-Born density

Site energies are Morse pair sums over the interaction range,

    V_xi(Du) = alpha_xi sum_rho w_rho [phi(|rho+D_rho u|; r0) - phi(|rho|; r0)]

with phi(r; r0) = exp(-2a(r-r0)) - 2 exp(-a(r-r0)).  Homogeneous sites use
r0 = |rho|, so every bond sits at its minimum in the reference lattice.
Defect sites (|xi| <= M) carry a bond-strength multiplier alpha and a
bond-length misfit delta, r0 = (1+delta)|rho|.  Each site energy is shifted by
its own reference value, so V_xi(0) = 0 everywhere.

- 04/05/26 (dlk): Created.
- 04/12/26 (dlk): Vectorize bond terms over sites.
- 04/28/26 (dlk): Per-shell equilibrium lengths; add bond-length misfit to
    defect sites, since a strength multiplier alone exerts no force on
    stress-free bonds.
- 05/06/26 (dlk): Add stability_probe().
"""

from __future__ import annotations

import dataclasses
import functools
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from . import constants, exception, geometry


################################################################
# Morse pair function
################################################################

def morse(r, r0, a, order=0):
    """Morse pair function phi(r; r0) and its radial derivatives.

    Arguments:
        r (np.ndarray): bond lengths
        r0 (np.ndarray or float): equilibrium lengths
        a (float): stiffness
        order (int): 0, 1 or 2

    Returns:
        (np.ndarray): phi, phi' or phi''
    """
    e = np.exp(-a*(r-r0))
    if order == 0:
        return e*e-2*e
    elif order == 1:
        return -2*a*e*e+2*a*e
    elif order == 2:
        return 4*a*a*e*e-2*a*a*e
    raise ValueError("unsupported derivative order {}".format(order))


################################################################
# pair potential parameters
################################################################

@dataclasses.dataclass(frozen=True)
class PairPotentialSpec:
    """Homogeneous Morse pair potential.

    Arguments:
        stiffness (float): Morse stiffness a
        shell_weights (tuple of float): weight per neighbor shell, shells
            ordered by increasing |rho|
        kind (str): pair form, only "morse"
    """

    stiffness: float = constants.k_morse_stiffness
    shell_weights: Tuple[float, ...] = constants.k_shell_weights
    kind: str = "morse"

    def __post_init__(self):
        if self.kind != "morse":
            raise ValueError("unsupported pair potential kind {!r}".format(self.kind))
        if not self.stiffness > 0:
            raise ValueError("Morse stiffness must be positive")


@dataclasses.dataclass(frozen=True)
class DefectSpec:
    """Point defect realized as a modified site potential.

    Arguments:
        alpha (float): bond-strength multiplier on defect sites
        misfit (float): relative bond-length misfit on defect sites
        radius (float): defect radius M; sites with |xi| <= M are defect sites
    """

    alpha: float = constants.k_defect_alpha
    misfit: float = constants.k_defect_misfit
    radius: float = constants.k_defect_radius


def shell_indices(interaction_range):
    """Shell index of each offset, shells ordered by |rho|."""
    norms2 = np.einsum("ri,ri->r", interaction_range.array, interaction_range.array)
    shells = np.unique(norms2)
    return np.searchsorted(shells, norms2)


class SiteModel:
    """Homogeneous site potential with an optional point defect.

    Arguments:
        interaction_range (geometry.InteractionRange): offsets
        pair (PairPotentialSpec): homogeneous pair potential
        defect (DefectSpec, optional): defect; None for the homogeneous model
    """

    def __init__(self, interaction_range, pair=None, defect=None):
        self.interaction_range = interaction_range
        self.pair = pair if pair is not None else PairPotentialSpec()
        self.defect = defect

        shells = shell_indices(interaction_range)
        if shells.max() >= len(self.pair.shell_weights):
            raise ValueError("{} shell weights given for {} shells".format(
                len(self.pair.shell_weights), shells.max()+1
            ))
        self.weights = np.asarray(self.pair.shell_weights, dtype=float)[shells]
        self.rho = interaction_range.array.astype(float)
        self.rho_length = np.linalg.norm(self.rho, axis=1)

    def __repr__(self):
        return "SiteModel(pair={!r}, defect={!r})".format(self.pair, self.defect)

    @property
    def is_homogeneous(self):
        return self.defect is None

    def homogeneous(self):
        """Same potential without the defect."""
        return SiteModel(self.interaction_range, self.pair, None)

    def with_defect(self, defect):
        return SiteModel(self.interaction_range, self.pair, defect)

    def defect_mask(self, sites):
        sites = np.asarray(sites, dtype=float).reshape(-1, constants.k_dim)
        if self.defect is None:
            return np.zeros(len(sites), dtype=bool)
        return np.linalg.norm(sites, axis=1) <= self.defect.radius

    def site_parameters(self, sites):
        """Strength multipliers and equilibrium lengths at sites.

        Arguments:
            sites (np.ndarray): (m, d) sites

        Returns:
            (tuple): alpha (m,), r0 (m, n_rho)
        """
        mask = self.defect_mask(sites)
        alpha = np.ones(len(mask))
        r0 = np.tile(self.rho_length, (len(mask), 1))
        if self.defect is not None and np.any(mask):
            alpha[mask] = self.defect.alpha
            r0[mask] *= 1+self.defect.misfit
        return (alpha, r0)

    def bond_terms(self, sites, Du, order=0):
        """Site energies and derivatives for many sites at once.

        Arguments:
            sites (np.ndarray): (m, d) sites
            Du (np.ndarray): (m, n_rho, d) stencils
            order (int): 0 energy, 1 gradient blocks, 2 Hessian blocks

        Returns:
            (np.ndarray): energies (m,), gradient blocks (m, n_rho, d) or
                diagonal Hessian blocks (m, n_rho, d, d); the pair form has
                no (rho, tau) coupling for rho != tau
        """
        (alpha, r0) = self.site_parameters(sites)
        a = self.pair.stiffness
        scale = alpha[:, None]*self.weights[None, :]
        bond = self.rho[None, :, :]+np.asarray(Du, dtype=float)
        r = np.linalg.norm(bond, axis=2)

        if order == 0:
            values = morse(r, r0, a)-morse(self.rho_length[None, :], r0, a)
            return np.sum(scale*values, axis=1)

        dphi = morse(r, r0, a, order=1)
        unit = bond/r[:, :, None]
        if order == 1:
            return (scale*dphi)[:, :, None]*unit

        if order == 2:
            ddphi = morse(r, r0, a, order=2)
            outer = unit[:, :, :, None]*unit[:, :, None, :]
            eye = np.eye(constants.k_dim)[None, None, :, :]
            blocks = ddphi[:, :, None, None]*outer+(dphi/r)[:, :, None, None]*(eye-outer)
            return scale[:, :, None, None]*blocks
        raise ValueError("unsupported derivative order {}".format(order))


def site_energy(model, xi, Du):
    """Site energy V_xi(Du).

    Arguments:
        model (SiteModel): potential
        xi (array-like): site
        Du (array-like): (n_rho, d) stencil

    Returns:
        (float): energy
    """
    Du = np.asarray(Du, dtype=float)
    if Du.shape != (len(model.interaction_range), constants.k_dim):
        raise ValueError("stencil must have one entry per offset")
    return float(model.bond_terms(np.asarray(xi)[None, :], Du[None], order=0)[0])


def site_derivatives(model, xi, Du, order=1):
    """Derivatives of V_xi with respect to the stencil entries.

    Arguments:
        model (SiteModel): potential
        xi (array-like): site
        Du (array-like): (n_rho, d) stencil
        order (int): 1 or 2

    Returns:
        (np.ndarray): V_{xi,rho} as (n_rho, d), or V_{xi,rho tau} as
            (n_rho, n_rho, d, d)
    """
    Du = np.asarray(Du, dtype=float)
    if Du.shape != (len(model.interaction_range), constants.k_dim):
        raise ValueError("stencil must have one entry per offset")
    if order == 1:
        return model.bond_terms(np.asarray(xi)[None, :], Du[None], order=1)[0]
    elif order == 2:
        blocks = model.bond_terms(np.asarray(xi)[None, :], Du[None], order=2)[0]
        n_rho = len(model.interaction_range)
        full = np.zeros((n_rho, n_rho, constants.k_dim, constants.k_dim))
        full[np.arange(n_rho), np.arange(n_rho)] = blocks
        return full
    raise ValueError("unsupported derivative order {}".format(order))


################################################################
# Cauchy-Born density
################################################################

class CauchyBornDensity:
    """Cauchy-Born strain energy density W(G) = V((G rho)_rho).

    Only the homogeneous part of the backing site model enters.

    Arguments:
        model (SiteModel): backing site model
    """

    def __init__(self, model):
        self.model = model.homogeneous()
        self._origin = np.zeros((1, constants.k_dim))

    def evaluate(self, G, order=0):
        """Vectorized W, W' or W'' for a stack of displacement gradients.

        Arguments:
            G (np.ndarray): (..., d, d) displacement gradients
            order (int): 0, 1 or 2

        Returns:
            (np.ndarray): (...,), (..., d, d) or (..., d, d, d, d)
        """
        G = np.asarray(G, dtype=float)
        batch = G.shape[:-2]
        flat = G.reshape(-1, constants.k_dim, constants.k_dim)
        rho = self.model.rho
        Du = np.einsum("mij,rj->mri", flat, rho)
        sites = np.zeros((len(flat), constants.k_dim))
        terms = self.model.bond_terms(sites, Du, order=order)
        if order == 0:
            return terms.reshape(batch)
        elif order == 1:
            return np.einsum("mri,rj->mij", terms, rho).reshape(batch+(2, 2))
        # W''_{iJkL} = sum_rho V_{,rho rho}[i,k] rho_J rho_L
        return np.einsum("mrik,rj,rl->mijkl", terms, rho, rho).reshape(batch+(2, 2, 2, 2))

    @functools.cached_property
    def elasticity_tensor(self):
        """C = W''(0) as (d, d, d, d) array."""
        return self.evaluate(np.zeros((constants.k_dim, constants.k_dim)), order=2)


def cauchy_born(cb, G, order=0):
    """Cauchy-Born density or derivatives at a single gradient.

    Arguments:
        cb (CauchyBornDensity): density
        G (array-like): (d, d) displacement gradient
        order (int): 0, 1 or 2

    Returns:
        (float or np.ndarray): W(G), W'(G) (d, d) or W''(G) (d, d, d, d)
    """
    G = np.asarray(G, dtype=float)
    if G.shape != (constants.k_dim, constants.k_dim):
        raise ValueError("G must be a {0}x{0} matrix".format(constants.k_dim))
    result = cb.evaluate(G, order=order)
    if order == 0:
        return float(result)
    return result


def voigt_matrix(C):
    """Flatten a (d,d,d,d) tensor to a (d*d, d*d) matrix over gradient entries."""
    n = C.shape[0]*C.shape[1]
    return C.reshape(n, n)


################################################################
# stability probe
################################################################

def periodic_hessian(model, N):
    """Homogeneous lattice Hessian at zero displacement on a periodic N x N cell.

    Arguments:
        model (SiteModel): potential (defect ignored)
        N (int): cell size

    Returns:
        (np.ndarray): dense (2 N^2, 2 N^2) Hessian
    """
    homogeneous = model.homogeneous()
    axis = np.arange(N)
    (y, x) = np.meshgrid(axis, axis, indexing="ij")
    sites = np.stack([x.ravel(), y.ravel()], axis=1)
    n = len(sites)
    Du = np.zeros((n, len(model.interaction_range), constants.k_dim))
    blocks = homogeneous.bond_terms(sites, Du, order=2)
    d = constants.k_dim
    hessian = np.zeros((n, d, n, d))
    for (r, rho) in enumerate(model.interaction_range.array):
        target = (sites+rho) % N
        j = target[:, 1]*N+target[:, 0]
        i = np.arange(n)
        block = blocks[:, r]
        np.add.at(hessian, (i, slice(None), i, slice(None)), block)
        np.add.at(hessian, (j, slice(None), j, slice(None)), block)
        np.add.at(hessian, (i, slice(None), j, slice(None)), -block)
        np.add.at(hessian, (j, slice(None), i, slice(None)), -block)
    return hessian.reshape(n*d, n*d)


def stability_probe(model, N=constants.k_stability_cell):
    """Smallest eigenvalue of the periodic homogeneous Hessian on mean-zero fields.

    A positive value certifies the parameterization (surrogate for a
    positive stability constant on the infinite lattice).

    Arguments:
        model (SiteModel): potential
        N (int, optional): periodic cell size, at least 8

    Returns:
        (float): smallest eigenvalue

    Raises:
        ValueError: if N < 8
        exception.EigensolverError: if the eigensolve fails
    """
    if N < 8:
        raise ValueError("stability probe needs a cell of size N >= 8")
    hessian = periodic_hessian(model, N)
    d = constants.k_dim
    constants_basis = np.zeros((N*N*d, d))
    for i in range(d):
        constants_basis[i::d, i] = 1.0
    try:
        mean_zero = scipy.linalg.null_space(constants_basis.T)
        eigenvalues = scipy.linalg.eigvalsh(mean_zero.T @ hessian @ mean_zero)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as err:
        raise exception.EigensolverError("stability eigensolve failed: {}".format(err)) from err
    return float(eigenvalues[0])

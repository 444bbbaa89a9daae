"""analysis.py -- norm-equivalence constants of the coupled problem

Discrete-harmonic subspaces are spanned by linearized subproblem solutions
for unit controls.  Their overlap gradients, in the L2(Omega_o) inner
product, give the sup-cosine c between the atomistic and continuum
subspaces; full-domain gradients give the constant by which overlap values
control the whole field.

- 06/22/26 (dlk): Created.
- 07/01/26 (dlk): Whiten Gram matrices with a relative eigenvalue cutoff.
- 10/18/26 (dlk): Apply the rank cutoff to singular values of the bases.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from . import (
    atomistic,
    constants,
    continuum,
    exception,
    modes,
)

logger = logging.getLogger(__name__)


################################################################
# harmonic bases
################################################################

@dataclasses.dataclass
class HarmonicBasis:
    """Overlap gradients of a discrete-harmonic subspace.

    Arguments:
        kind (modes.BasisKind): subproblem
        matrix (np.ndarray): (rows, k) area-weighted overlap gradients of the
            basis fields, one column per control direction
        full_matrix (np.ndarray, optional): (rows', k) area-weighted gradients
            over the whole subproblem domain
        constant_leak (float): largest overlap gradient norm of a constant
            control (zero up to solver tolerance)
    """

    kind: modes.BasisKind
    matrix: np.ndarray
    full_matrix: Optional[np.ndarray] = None
    constant_leak: float = 0.0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)

    def __len__(self):
        return self.matrix.shape[1]

    @property
    def gram(self):
        """Overlap Gram matrix."""
        return self.matrix.T @ self.matrix

    @property
    def full_gram(self):
        if self.full_matrix is None:
            raise ValueError("basis has no full-domain gradients")
        return self.full_matrix.T @ self.full_matrix


def constant_free_directions(n_controls, d=constants.k_dim):
    """Control directions e_j - e_last per component, as a sparse (d n, d (n-1)) matrix.

    Their span is the complement of the constant controls.
    """
    rows = []
    cols = []
    vals = []
    column = 0
    for i in range(d):
        for j in range(n_controls-1):
            rows += [j*d+i, (n_controls-1)*d+i]
            cols += [column, column]
            vals += [1.0, -1.0]
            column += 1
    return scipy.sparse.csc_matrix((vals, (rows, cols)), shape=(d*n_controls, column))


def build_harmonic_basis(which, problem, base):
    """Discrete-harmonic basis of one subproblem, linearized at a base state.

    Arguments:
        which (modes.BasisKind): subproblem
        problem (coupling.CouplingProblem): systems and overlap operator
        base (geometry.LatticeField or continuum.FEField): linearization state

    Returns:
        (HarmonicBasis): basis with d (n_controls - 1) columns
    """
    d = constants.k_dim
    if which is modes.BasisKind.kAtomistic:
        sensitivity = atomistic.AtomisticSensitivity(problem.atomistic, base)
        n_controls = problem.n_atomistic_controls
        overlap = problem.overlap.atomistic
        full = problem.atomistic.gradient_operator(modes.DomainTag.kAtomistic)
    elif which is modes.BasisKind.kContinuum:
        sensitivity = continuum.ContinuumSensitivity(problem.continuum, base)
        n_controls = problem.n_continuum_controls
        overlap = problem.overlap.continuum
        full = problem.mesh.gradient_operator(modes.DomainTag.kContinuum)
    else:
        raise ValueError("unknown basis kind {}".format(which))

    directions = constant_free_directions(n_controls)
    fields = sensitivity.forward_matrix(directions.toarray())
    constants_fields = sensitivity.forward_matrix(np.tile(np.eye(d), (n_controls, 1)))
    leak = float(np.linalg.norm(overlap.matrix @ constants_fields, axis=0).max())
    logger.debug("analysis: %s basis columns %d constant leak %.3e", which.name, fields.shape[1], leak)
    return HarmonicBasis(
        kind=which,
        matrix=np.asarray(overlap.matrix @ fields),
        full_matrix=np.asarray(full.matrix @ fields),
        constant_leak=leak,
    )


################################################################
# constants
################################################################

def _whitening(matrix, cutoff=constants.k_rank_cutoff):
    """W with (matrix W)^T (matrix W) = I on the numerical range of matrix.

    Singular values of matrix below cutoff times the largest are dropped.
    """
    try:
        (_, s, Vt) = scipy.linalg.svd(matrix, full_matrices=False)
    except (scipy.linalg.LinAlgError, ValueError) as err:
        raise exception.EigensolverError("basis SVD failed: {}".format(err)) from err
    if len(s) == 0 or s.max() <= 0:
        raise exception.EigensolverError("subspace has rank zero")
    keep = s > cutoff*s.max()
    dropped = len(s)-int(np.count_nonzero(keep))
    if dropped:
        logger.debug("analysis: dropped %d of %d basis directions", dropped, len(s))
    return Vt[keep].T/s[keep]


def sup_cosine(A, C, cutoff=constants.k_rank_cutoff):
    """Largest principal-angle cosine between two bases on the same overlap.

    Arguments:
        A, C (HarmonicBasis): bases with matching overlap rows
        cutoff (float, optional): relative singular-value cutoff of the bases

    Returns:
        (float): c in [0, 1]

    Raises:
        exception.EigensolverError: on eigensolver failure or rank-zero subspace
    """
    if A.matrix.shape[0] != C.matrix.shape[0]:
        raise ValueError("bases have {} and {} overlap rows".format(A.matrix.shape[0], C.matrix.shape[0]))
    Wa = _whitening(A.matrix, cutoff)
    Wc = _whitening(C.matrix, cutoff)
    cross = (A.matrix @ Wa).T @ (C.matrix @ Wc)
    try:
        s = scipy.linalg.svdvals(cross)
    except scipy.linalg.LinAlgError as err:
        raise exception.EigensolverError("SVD of the cross Gram failed: {}".format(err)) from err
    c = float(np.clip(s.max(initial=0.0), 0.0, 1.0))
    if c > 1-1e-12:
        warnings.warn("sup-cosine indistinguishable from 1", RuntimeWarning)
    return c


def overlap_control_constant(B, full_gram=None, cutoff=constants.k_rank_cutoff):
    """Largest ratio |grad w|_{full domain} / |grad w|_{Omega_o} over a subspace.

    Arguments:
        B (HarmonicBasis): basis
        full_gram (np.ndarray, optional): full-domain Gram (default B.full_gram)
        cutoff (float, optional): relative singular-value cutoff of the overlap basis

    Returns:
        (float): ratio, over the numerical range of the overlap Gram
    """
    if full_gram is None:
        full_gram = B.full_gram
    W = _whitening(B.matrix, cutoff)
    projected = W.T @ full_gram @ W
    try:
        top = scipy.linalg.eigvalsh(0.5*(projected+projected.T))[-1]
    except scipy.linalg.LinAlgError as err:
        raise exception.EigensolverError("generalized eigenproblem failed: {}".format(err)) from err
    return float(np.sqrt(max(top, 0.0)))


def norm_equivalence(problem, base_a, base_c):
    """Sup-cosine and overlap-control constants at one geometry.

    Arguments:
        problem (coupling.CouplingProblem): problem
        base_a (geometry.LatticeField): atomistic linearization state on L_a
        base_c (continuum.FEField): continuum linearization state

    Returns:
        (dict): "sup_cosine", "margin" (1 - c^2), "control_atomistic",
            "control_continuum", "columns_atomistic", "columns_continuum"
    """
    A = build_harmonic_basis(modes.BasisKind.kAtomistic, problem, base_a)
    C = build_harmonic_basis(modes.BasisKind.kContinuum, problem, base_c)
    c = sup_cosine(A, C)
    result = {
        "sup_cosine": c,
        "margin": 1-c**2,
        "control_atomistic": overlap_control_constant(A),
        "control_continuum": overlap_control_constant(C),
        "columns_atomistic": len(A),
        "columns_continuum": len(C),
    }
    logger.info(
        "analysis: %s c %.6f control a %.4f c %.4f", problem.geom.descriptor(),
        c, result["control_atomistic"], result["control_continuum"],
    )
    return result

"""linalg.py -- sparse linear solves and constant-mode projections

- 04/14/26 (dlk): Created, split from atomistic.py.
- 05/21/26 (dlk): Add iterative fallback and refinement.
- 06/02/26 (dlk): Add SparseOperator.
- 07/21/26 (ams): Module-level direct_limit setting.
- 10/18/26 (dlk): Move newton_minimize here from atomistic.py.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import constants, exception

logger = logging.getLogger(__name__)

# largest system factorized directly when no limit is passed (set from [solver])
max_direct_dofs = constants.k_direct_limit


################################################################
# operators
################################################################

@dataclasses.dataclass
class SparseOperator:
    """Hessian split into free-free and free-control blocks.

    Attributes:
        free_free (scipy.sparse.csr_matrix): symmetric (n_free, n_free) block
        free_control (scipy.sparse.csr_matrix): (n_free, n_control) coupling
        full (scipy.sparse.csr_matrix): Hessian over all DOFs, if retained
    """

    free_free: scipy.sparse.csr_matrix
    free_control: scipy.sparse.csr_matrix
    full: scipy.sparse.csr_matrix = None

    @property
    def n_free(self):
        return self.free_free.shape[0]

    @property
    def n_control(self):
        return self.free_control.shape[1]

    def asymmetry(self):
        """Relative asymmetry of the free-free block."""
        A = self.free_free
        scale = abs(A).max() if A.nnz else 0.0
        if scale == 0:
            return 0.0
        return abs(A-A.T).max()/scale


def coo_blocks(rows, cols, blocks, shape, d=constants.k_dim):
    """Assemble (d, d) blocks into a sparse matrix.

    Arguments:
        rows, cols (np.ndarray): (m,) block row and column indices
        blocks (np.ndarray): (m, d, d) blocks
        shape (tuple): matrix shape in scalar DOFs

    Returns:
        (scipy.sparse.csr_matrix): assembled matrix, duplicates summed
    """
    (ii, jj) = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    r = (np.asarray(rows)[:, None, None]*d+ii[None]).ravel()
    c = (np.asarray(cols)[:, None, None]*d+jj[None]).ravel()
    return scipy.sparse.coo_matrix((np.asarray(blocks).ravel(), (r, c)), shape=shape).tocsr()


################################################################
# factorization
################################################################

class Factorization:
    """Solver for a sparse symmetric system.

    A direct LU factorization is used up to direct_limit DOFs; one step of
    iterative refinement follows each direct solve.  Above the limit, or if
    the factorization fails, conjugate gradients (then MINRES) are used.

    Arguments:
        A (scipy.sparse matrix): symmetric system matrix
        direct_limit (int, optional): largest system factorized directly
            (default: module setting max_direct_dofs)
        rtol (float, optional): relative tolerance of iterative solves
    """

    def __init__(self, A, direct_limit=None, rtol=1e-13):
        self.A = scipy.sparse.csc_matrix(A)
        self.rtol = rtol
        self._lu = None
        if self.A.shape[0] == 0:
            return
        limit = max_direct_dofs if direct_limit is None else direct_limit
        if self.A.shape[0] <= limit:
            try:
                self._lu = scipy.sparse.linalg.splu(self.A)
            except (RuntimeError, MemoryError) as err:
                warnings.warn("direct factorization failed ({}); using iterative solve".format(err), RuntimeWarning)
                logger.warning("factorization: falling back to iterative solve: %s", err)

    @property
    def is_direct(self):
        return self._lu is not None

    def _iterative(self, b):
        scale = np.linalg.norm(b)
        if scale == 0:
            return np.zeros_like(b)
        (x, info) = scipy.sparse.linalg.cg(self.A, b, rtol=self.rtol, maxiter=20*self.A.shape[0])
        if info != 0:
            (x, info) = scipy.sparse.linalg.minres(self.A, b, rtol=self.rtol, maxiter=20*self.A.shape[0])
        if info != 0 or not np.all(np.isfinite(x)):
            raise exception.SingularSystemError("iterative solve failed (info {})".format(info))
        return x

    def _solve_vector(self, b):
        if self.A.shape[0] == 0:
            return np.zeros(0)
        if self._lu is None:
            return self._iterative(b)
        x = self._lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise exception.SingularSystemError("direct solve produced non-finite values")
        # one step of iterative refinement
        r = b-self.A @ x
        if np.linalg.norm(r) > 1e-12*max(np.linalg.norm(b), 1.0):
            x = x+self._lu.solve(r)
        return x

    def solve(self, b):
        """Solve A x = b for one or several right-hand sides.

        Arguments:
            b (np.ndarray): (n,) or (n, k)

        Returns:
            (np.ndarray): solution of the same shape
        """
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            return self._solve_vector(b)
        if self._lu is not None and b.shape[0]:
            x = self._lu.solve(np.ascontiguousarray(b))
            if not np.all(np.isfinite(x)):
                raise exception.SingularSystemError("direct solve produced non-finite values")
            return x
        return np.stack([self._solve_vector(b[:, k]) for k in range(b.shape[1])], axis=1)


################################################################
# Newton solver
################################################################

def newton_minimize(energy, gradient, hessian, x0, tol, max_iter=constants.k_max_newton,
                    armijo=constants.k_armijo, label="newton", verbose=False):
    """Newton iteration with Armijo backtracking on a smooth energy.

    A trial step is accepted when the Armijo condition holds, or when the
    residual norm decreases by the same sufficient-decrease factor (energy
    differences fall below round-off near convergence).

    Arguments:
        energy, gradient (callable): x -> float, x -> vector
        hessian (callable): x -> sparse symmetric matrix
        x0 (np.ndarray): initial free DOFs
        tol (float): residual tolerance (l2)
        max_iter (int, optional): Newton iterations
        armijo (float, optional): sufficient-decrease constant
        label (str, optional): log label
        verbose (bool, optional): log iterations at INFO level

    Returns:
        (tuple): (x, iterations, residual norm)

    Raises:
        exception.ConvergenceError: after max_iter or a failed line search
    """
    level = logging.INFO if verbose else logging.DEBUG
    x = np.array(x0, dtype=float)
    g = gradient(x)
    residual = float(np.linalg.norm(g))
    for iteration in range(max_iter+1):
        logger.log(level, "%s: iteration %d residual %.3e", label, iteration, residual)
        if residual <= tol:
            return (x, iteration, residual)
        if iteration == max_iter:
            break

        factorization = Factorization(hessian(x))
        p = -factorization.solve(g)
        slope = float(g @ p)
        if not slope < 0:
            logger.warning("%s: Newton direction not a descent direction; using steepest descent", label)
            p = -g
            slope = -residual**2

        e0 = energy(x)
        t = 1.0
        while True:
            trial = x+t*p
            e1 = energy(trial)
            g1 = gradient(trial)
            r1 = float(np.linalg.norm(g1))
            if np.isfinite(e1) and (e1 <= e0+armijo*t*slope or r1 <= (1-armijo*t)*residual):
                break
            t *= 0.5
            if t < 1e-12:
                raise exception.ConvergenceError(
                    "{}: line search failed at iteration {} (residual {:.3e})".format(label, iteration, residual),
                    iterations=iteration, residual=residual,
                )
        logger.log(level, "%s: step %.3e energy %.16e", label, t, e1)
        (x, g, residual) = (trial, g1, r1)

    raise exception.ConvergenceError(
        "{}: no convergence after {} iterations (residual {:.3e})".format(label, max_iter, residual),
        iterations=max_iter, residual=residual,
    )




################################################################
# constant modes
################################################################

def constant_modes(n_nodes, d=constants.k_dim):
    """(n_nodes*d, d) matrix whose columns are the unit constant fields."""
    modes = np.zeros((n_nodes*d, d))
    for i in range(d):
        modes[i::d, i] = 1.0
    return modes


def project_out_constants(v, d=constants.k_dim):
    """Remove the per-component mean of a flattened (node, component) vector."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return v.copy()
    blocks = v.reshape(-1, d)
    return (blocks-blocks.mean(axis=0)).ravel()

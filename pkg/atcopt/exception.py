"""exception.py -- exceptions raised by AtC coupling runs

- 04/02/26 (dlk): Created.
- 05/19/26 (dlk): Add ConvergenceError with iteration diagnostics.
- 06/11/26 (ams): Add exit codes for CLI.
- 06/29/26 (ams): Separate outer-loop failures from subproblem failures.
"""

################################################################
# base
################################################################

class AtcError(Exception):
    """Base class for errors raised in AtC coupling runs."""

    exit_code = 1


class ConfigError(AtcError):
    """Invalid or missing configuration."""

    exit_code = 2


class GeometryError(AtcError):
    """Domain construction precondition violated."""


class StencilRangeError(AtcError):
    """Stencil requested at a site missing some neighbor."""


class MeshError(AtcError):
    """Mesh construction or mesh/overlap consistency failure."""


class CoverageError(AtcError):
    """Reference field does not cover the evaluation domain."""

################################################################
# solver failures
################################################################

class SolverError(AtcError):
    """Base class for solver failures."""

    exit_code = 3


class ConvergenceError(SolverError):
    """Iteration failed to converge.

    Attributes:
        iterations (int): iterations taken
        residual (float): final residual (or gradient) norm
    """

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class OuterConvergenceError(ConvergenceError):
    """Outer Gauss-Newton loop failed (iteration limit or line search)."""


class SingularSystemError(SolverError):
    """Linear system could not be solved."""


class EigensolverError(SolverError):
    """Eigendecomposition failed or subspace has rank zero."""

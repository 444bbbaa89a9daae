"""modes.py -- enumerated modes for AtC coupling runs

- 04/02/26 (dlk): Created, with Gauge and DomainTag.
- 04/20/26 (dlk): Add NodeTag for mesh boundary tags.
- 06/11/26 (ams): Add RowStatus and ControlInit for study harness.
- 07/30/26 (ams): Add BasisKind.
"""

import enum

################################################################
# gauges
################################################################

@enum.unique
class Gauge(enum.Enum):
    """Gauge of a displacement field, standing in for classes modulo constants

    kMeanZero:
      - arithmetic mean over the sites (or nodes) of the field is zero
      - used for comparing fields

    kPinned:
      - displacement of one designated site is zero
      - used for solver unknowns, so that linear systems are nonsingular

    kRaw:
      - no gauge imposed
    """

    kMeanZero = 0
    kPinned = 1
    kRaw = 2

################################################################
# domains
################################################################

@enum.unique
class DomainTag(enum.Enum):
    """Tags for the nested computational domains

    kCore: Omega_core = R_core * Omega_0
    kAtomistic: Omega_a = psi_a * Omega_core
    kContinuum: Omega_c = Omega \\ Omega_core
    kOverlap: Omega_o = Omega_a \\ Omega_core
    kOverlapExtended: Omega_o,ex = (2 psi_a Omega_core) \\ Omega_core
    """

    kCore = 0
    kAtomistic = 1
    kContinuum = 2
    kOverlap = 3
    kOverlapExtended = 4


@enum.unique
class NodeTag(enum.Enum):
    """Boundary tags for finite-element nodes

    kInterior: free node
    kGammaCore: node on the inner boundary, carries Dirichlet control lambda_c
    kGammaC: node on the outer boundary, tied to the shared constant K
    """

    kInterior = 0
    kGammaCore = 1
    kGammaC = 2

    @property
    def label(self):
        return {0: "interior", 1: "gamma_core", 2: "gamma_c"}[self.value]

################################################################
# study harness
################################################################

@enum.unique
class RowStatus(enum.Enum):
    """Status of one ladder entry of a convergence study

    kOk: AtC solve converged and errors evaluated
    kSubproblemFailed: a mesh, subproblem solve or error evaluation failed
    kOuterDiverged: the outer Gauss-Newton loop hit its iteration limit
    """

    kOk = "ok"
    kSubproblemFailed = "subproblem-failed"
    kOuterDiverged = "outer-diverged"


@enum.unique
class ControlInit(enum.Enum):
    """Initial virtual controls for the outer loop

    kZero: lambda_a = 0, lambda_c = 0
    kContinuumPredictor: lambda_c from an atomistic solve with lambda_a = 0, then
        lambda_a = trace of the continuum solve with that lambda_c
    """

    kZero = "zero"
    kContinuumPredictor = "predictor"


@enum.unique
class BasisKind(enum.Enum):
    """Which subproblem a discrete-harmonic basis belongs to"""

    kAtomistic = 0
    kContinuum = 1

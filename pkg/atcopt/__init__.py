"""atcopt -- optimization-based atomistic-to-continuum coupling for a point defect

    Couples an atomistic model near a point defect in the square lattice
    Z^2 to a Cauchy-Born finite-element model away from it.  The two
    subproblems overlap on an annulus; virtual Dirichlet controls on their
    inner boundaries are chosen to minimize the gradient mismatch there.

    - 04/02/26 (dlk): Created, with geometry, potential and atomistic.
    - 04/20/26 (dlk): Add mesh and continuum.
    - 05/19/26 (dlk): Add coupling (Gauss-Newton on the virtual controls).
    - 06/11/26 (ams): Add config, harness and command-line interface.
    - 06/22/26 (dlk): Add analysis (norm-equivalence constants).
    - 07/10/26 (ams): Add checks.
"""

__ALL__ = [
    'analysis',
    'atomistic',
    'checks',
    'config',
    'constants',
    'continuum',
    'coupling',
    'environ',
    'exception',
    'geometry',
    'harness',
    'linalg',
    'mesh',
    'modes',
    'potential',
    'utils',
]
from . import (
    analysis,
    atomistic,
    checks,
    config,
    constants,
    continuum,
    coupling,
    environ,
    exception,
    geometry,
    harness,
    linalg,
    mesh,
    modes,
    potential,
    utils,
)

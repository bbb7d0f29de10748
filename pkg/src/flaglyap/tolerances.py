"""Central tolerance configuration.

Every numeric threshold used across the package lives here, so tests and
the CLI can tighten or relax them in one place.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    det: float = 1e-9            # |det - 1| for group elements
    trace: float = 1e-9          # |trace| for algebra elements
    recon: float = 1e-10         # relative reconstruction error of factorizations
    orth: float = 1e-10          # ||k^T k - I|| for orthogonal factors
    singular_diag: float = 1e-14  # smallest admissible triangular diagonal entry
    eig_sum: float = 1e-9        # |sum of log eigenvalue moduli|
    symmetry: float = 1e-10      # symmetry defect for is_positive_definite
    posdef_minor: float = 1e-12  # leading-minor threshold
    membership: float = 1e-12    # strict-positivity proxy for semigroup interiors
    symplectic: float = 1e-8     # ||g^T J g - J|| threshold
    weight_span: float = 1e-9    # residual for weight-admissibility solves
    section: float = 1e-10       # invariance residual target for sections
    transversal: float = 1e-8    # smallest singular value for transversality
    gap_floor: float = 1e-8      # spectral gaps below this count as closed
    fd_step: float = 1e-4        # default finite-difference step
    fd_agreement: float = 1e-5   # relative analytic-vs-FD agreement


DEFAULT = Tolerances()

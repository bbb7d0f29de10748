"""Exception hierarchy shared by all flaglyap modules."""


class FlaglyapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FlaglyapError):
    """A constructor input violates a documented invariant."""


class SingularInput(FlaglyapError):
    """A matrix that must be invertible is numerically singular."""


class DecompositionFailure(FlaglyapError):
    """An underlying matrix factorization did not converge."""


class AsymmetricInput(ValidationError):
    """A matrix that must be symmetric is not, beyond tolerance."""


class UnsortedInput(ValidationError):
    """A vector that must be sorted non-increasing increases somewhere."""


class MalformedPermutation(ValidationError):
    """A sequence that must be a permutation of 0..n-1 is not one."""


class DeterminantError(ValidationError):
    """A matrix that must have unit determinant does not."""


class WeightNotAdmissible(FlaglyapError):
    """The weight is not in the span allowed by the flag type."""


class TypeMismatch(FlaglyapError):
    """Two flag objects have incompatible flag types."""


class DegenerateSpectrum(FlaglyapError):
    """Eigenvalue moduli coincide where distinctness is required."""


class NotSymplectic(ValidationError):
    """A matrix fails the symplectic relation g^T J g = J."""


class SamplerExhausted(FlaglyapError):
    """An interior-element sampler hit its rejection limit."""


class NoConvergence(FlaglyapError):
    """The section solver exhausted its iteration budget.

    Carries the iteration limit, the final residual, and the residual
    history of the last attempt.
    """

    def __init__(self, max_iter: int, last_residual: float, history=()):
        self.max_iter = max_iter
        self.last_residual = last_residual
        self.history = tuple(history)
        super().__init__(
            f"no convergence after {max_iter} iterations "
            f"(last residual {last_residual:.3e})"
        )


class PredictionViolated(FlaglyapError):
    """A semigroup-theoretic prediction failed at some base point.

    This signals an implementation or tolerance problem, never a
    counterexample to the theory.
    """

    def __init__(self, message: str, point=None, root=None):
        self.point = point
        self.root = root
        super().__init__(message)

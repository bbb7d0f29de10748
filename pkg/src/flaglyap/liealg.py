"""Root and weight machinery for the traceless diagonal subalgebra of sl(d).

Cartan vectors are 1-D numpy arrays summing to zero (diagonals of
traceless matrices).  Simple roots are indexed 1..d-1, with root i
evaluating to H[i-1] - H[i].  Weights are stored as coefficient vectors
normalized so the last coefficient is 0; on traceless arguments the
representative does not matter.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MalformedPermutation, SingularInput, UnsortedInput, ValidationError
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ThetaSet",
    "WeightVector",
    "a_projection",
    "ad_action",
    "check_cartan",
    "fundamental_weight",
    "simple_root_value",
    "theta_of",
    "weight_combination",
    "weights_outside",
    "weyl_apply",
]


def check_cartan(h: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 1:
        raise ValidationError(f"expected a vector, got shape {h.shape}")
    s = h.sum()
    if abs(s) > tol.trace:
        raise ValidationError(f"entries sum to {s!r}, not 0 within {tol.trace}")
    return h


@dataclass(frozen=True)
class WeightVector:
    """Linear functional on Cartan vectors, omega(H) = coeffs . H.

    Well defined modulo constants on the traceless subspace; the stored
    representative has last coefficient 0.
    """

    dim: int
    coeffs: tuple

    def __call__(self, h: np.ndarray) -> float:
        return float(np.dot(self.coeffs, h))

    @property
    def traceless_coeffs(self) -> np.ndarray:
        """The mean-zero representative (canonical on the traceless dual)."""
        c = np.asarray(self.coeffs)
        return c - c.mean()


def _normalize_weight(dim: int, coeffs) -> WeightVector:
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (dim,):
        raise ValidationError(f"expected {dim} coefficients, got shape {c.shape}")
    c = c - c[-1]
    return WeightVector(dim=dim, coeffs=tuple(float(v) for v in c))


def fundamental_weight(i: int, dim: int) -> WeightVector:
    """omega_i(H) = H_1 + ... + H_i, for 1 <= i <= dim-1."""
    if not 1 <= i <= dim - 1:
        raise IndexError(f"fundamental weight index {i} outside 1..{dim - 1}")
    return _normalize_weight(dim, [1.0] * i + [0.0] * (dim - i))


def weight_combination(fund_coeffs, dim: int) -> WeightVector:
    """Weight sum_i a_i omega_i from coefficients a_1..a_{dim-1}."""
    a = np.asarray(fund_coeffs, dtype=float)
    if a.shape != (dim - 1,):
        raise ValidationError(f"expected {dim - 1} coefficients, got shape {a.shape}")
    c = np.zeros(dim)
    for i, ai in enumerate(a, start=1):
        if ai:
            c[:i] += ai
    return _normalize_weight(dim, c)


def simple_root_value(i: int, h: np.ndarray) -> float:
    """alpha_i(H) = H_i - H_{i+1} for 1 <= i <= d-1."""
    h = np.asarray(h, dtype=float)
    if not 1 <= i <= h.shape[0] - 1:
        raise IndexError(f"simple root index {i} outside 1..{h.shape[0] - 1}")
    return float(h[i - 1] - h[i])


@dataclass(frozen=True)
class ThetaSet:
    """A subset of the simple roots {1..d-1}; the empty set is the full
    flag type, the complement of {1} the projective type."""

    dim: int
    indices: frozenset

    def __post_init__(self):
        bad = [i for i in self.indices if not 1 <= i <= self.dim - 1]
        if bad:
            raise ValidationError(f"root indices {bad} outside 1..{self.dim - 1}")
        object.__setattr__(self, "indices", frozenset(self.indices))

    @classmethod
    def empty(cls, dim: int) -> "ThetaSet":
        return cls(dim, frozenset())

    @classmethod
    def full(cls, dim: int) -> "ThetaSet":
        return cls(dim, frozenset(range(1, dim)))

    @classmethod
    def projective(cls, dim: int) -> "ThetaSet":
        return cls(dim, frozenset(range(2, dim)))

    @classmethod
    def grassmannian(cls, k: int, dim: int) -> "ThetaSet":
        """Type of the Grassmannian of k-planes (complement of {k})."""
        return cls(dim, frozenset(i for i in range(1, dim) if i != k))

    def dual(self) -> "ThetaSet":
        """Flag type of the inverse flow: index reversal i -> d - i."""
        return ThetaSet(self.dim, frozenset(self.dim - i for i in self.indices))

    def subspace_dims(self) -> tuple:
        """Dimensions of the nested subspaces carried by flags of this type."""
        return tuple(i for i in range(1, self.dim) if i not in self.indices)

    def block_sizes(self) -> tuple:
        """Sizes of the diagonal blocks of the stabilizer."""
        cuts = (0,) + self.subspace_dims() + (self.dim,)
        return tuple(b - a for a, b in zip(cuts, cuts[1:]))

    def issubset(self, other: "ThetaSet") -> bool:
        return self.dim == other.dim and self.indices <= other.indices


def theta_of(h: np.ndarray, eps: float) -> ThetaSet:
    """Simple roots closed on H: {i : |H_i - H_{i+1}| <= eps}.

    H must be sorted non-increasing (within eps); eps must be positive.
    """
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    h = np.asarray(h, dtype=float)
    gaps = h[:-1] - h[1:]
    if np.any(gaps < -eps):
        raise UnsortedInput(f"entries increase by {-gaps.min():.3e} > eps")
    closed = frozenset(i for i in range(1, h.shape[0]) if abs(gaps[i - 1]) <= eps)
    return ThetaSet(h.shape[0], closed)


def weights_outside(theta: ThetaSet) -> list:
    """The fundamental weights omega_i with i outside theta.

    Their span is the annihilator of the subalgebra cut out by theta.
    """
    return [fundamental_weight(i, theta.dim) for i in range(1, theta.dim) if i not in theta.indices]


def a_projection(z: np.ndarray) -> np.ndarray:
    """Projection onto the diagonal against so(d) + strict upper.

    z - skew(lower part) - diag(z) is strictly upper triangular, so the
    diagonal is the unique middle component.
    """
    z = np.asarray(z, dtype=float)
    return np.diagonal(z).copy()


def ad_action(g: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Conjugation g z g^{-1}."""
    g = np.asarray(g, dtype=float)
    z = np.asarray(z, dtype=float)
    try:
        return g @ np.linalg.solve(g.T, z.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularInput("conjugating matrix is singular") from exc


def weyl_apply(w, h: np.ndarray) -> np.ndarray:
    """Permutation action (wH)_{w(j)} = H_j, with w a 0-based permutation
    of range(d)."""
    h = np.asarray(h, dtype=float)
    w = list(w)
    if sorted(w) != list(range(h.shape[0])):
        raise MalformedPermutation(f"{w} is not a permutation of 0..{h.shape[0] - 1}")
    out = np.empty_like(h)
    for j, wj in enumerate(w):
        out[wj] = h[j]
    return out

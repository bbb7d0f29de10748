"""Dense kernels for small unimodular matrices.

Iwasawa (QR) and polar (SVD) factorizations, eigenvalue log-moduli,
matrix exponential, minors and positive-definiteness tests, for real
d x d matrices with 2 <= d <= 12.  Group elements have det = 1, algebra
elements are traceless.  All functions are pure.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AsymmetricInput, DecompositionFailure, SingularInput, ValidationError
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "IwasawaFactors",
    "PolarFactors",
    "check_algebra",
    "check_group",
    "eig_log_moduli",
    "is_positive_definite",
    "iwasawa",
    "mat_exp",
    "minor",
    "polar_chamber",
]


def check_group(g: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Validate a group element: square, real, det = 1 within tolerance."""
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {g.shape}")
    d = np.linalg.det(g)
    if abs(d - 1.0) > tol.det:
        raise ValidationError(f"determinant {d!r} is not 1 within {tol.det}")
    return g


def check_algebra(z: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Validate an algebra element: square, real, traceless within tolerance."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {z.shape}")
    t = np.trace(z)
    if abs(t) > tol.trace:
        raise ValidationError(f"trace {t!r} is not 0 within {tol.trace}")
    return z


@dataclass(frozen=True)
class IwasawaFactors:
    """g = k . exp(diag(a)) . n with k special orthogonal, a the log of the
    positive diagonal, and n unit upper triangular."""

    k: np.ndarray
    a: np.ndarray
    n: np.ndarray

    def recompose(self) -> np.ndarray:
        return self.k @ (np.exp(self.a)[:, None] * self.n)


@dataclass(frozen=True)
class PolarFactors:
    """g = k1 . exp(diag(h_plus)) . k2 with k1, k2 special orthogonal and
    h_plus the log singular values sorted non-increasing."""

    k1: np.ndarray
    h_plus: np.ndarray
    k2: np.ndarray

    def recompose(self) -> np.ndarray:
        return self.k1 @ (np.exp(self.h_plus)[:, None] * self.k2)


def iwasawa(g: np.ndarray, tol: Tolerances = DEFAULT) -> IwasawaFactors:
    """QR factorization normalized to the KAN form.

    The triangular factor's diagonal is made strictly positive by sign
    flips, which pins down the unique decomposition with k in SO(d).

    Raises SingularInput when a diagonal entry of the triangular factor
    falls below the singularity threshold.
    """
    g = np.asarray(g, dtype=float)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r).copy()
    signs = np.where(diag < 0.0, -1.0, 1.0)
    diag = diag * signs
    if np.any(diag <= tol.singular_diag):
        raise SingularInput(f"triangular diagonal entry {diag.min():.3e} below threshold")
    k = q * signs                      # flip columns of q
    r = r * signs[:, None]             # flip rows of r
    n = r / diag[:, None]              # unit diagonal
    # make the strict lower triangle and the unit diagonal exact
    n = np.triu(n, k=1) + np.eye(g.shape[0])
    return IwasawaFactors(k=k, a=np.log(diag), n=n)


def polar_chamber(g: np.ndarray) -> PolarFactors:
    """SVD normalized so both orthogonal factors lie in SO(d).

    h_plus is the vector of log singular values in non-increasing order
    (the closed-positive-chamber representative).
    """
    g = np.asarray(g, dtype=float)
    try:
        u, s, vt = np.linalg.svd(g)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise DecompositionFailure(str(exc)) from exc
    if np.linalg.det(u) < 0.0:
        u = u.copy()
        vt = vt.copy()
        u[:, -1] *= -1.0
        vt[-1, :] *= -1.0
    return PolarFactors(k1=u, h_plus=np.log(s), k2=vt)


def eig_log_moduli(g: np.ndarray) -> np.ndarray:
    """Log moduli of the eigenvalues, sorted non-increasing.

    Complex conjugate pairs contribute their common modulus twice.  For
    det = 1 the entries sum to zero up to roundoff.
    """
    g = np.asarray(g, dtype=float)
    ev = np.linalg.eigvals(g)
    return np.sort(np.log(np.abs(ev)))[::-1]


def mat_exp(z: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring Pade)."""
    z = np.asarray(z, dtype=float)
    if not z.any():
        return np.eye(z.shape[0])
    return scipy.linalg.expm(z)


def minor(g: np.ndarray, rows, cols) -> float:
    """Determinant of the submatrix g[rows, cols] (0-based indices).

    Both index sets must be strictly increasing, non-empty and of equal
    size.
    """
    g = np.asarray(g, dtype=float)
    rows = list(rows)
    cols = list(cols)
    if not rows or len(rows) != len(cols):
        raise IndexError("row and column index sets must be non-empty and of equal size")
    for idx in (rows, cols):
        if any(j <= i for i, j in zip(idx, idx[1:])):
            raise IndexError(f"index set {idx} is not strictly increasing")
        if idx[0] < 0 or idx[-1] >= g.shape[0]:
            raise IndexError(f"index set {idx} out of range for dimension {g.shape[0]}")
    return float(np.linalg.det(g[np.ix_(rows, cols)]))


def is_positive_definite(m: np.ndarray, tol: Tolerances = DEFAULT) -> bool:
    """True iff all leading principal minors exceed the minor threshold.

    Raises AsymmetricInput when the symmetry defect exceeds tolerance.
    """
    m = np.asarray(m, dtype=float)
    defect = np.abs(m - m.T).max()
    if defect > tol.symmetry:
        raise AsymmetricInput(f"symmetry defect {defect:.3e} exceeds {tol.symmetry}")
    for k in range(1, m.shape[0] + 1):
        if np.linalg.det(m[:k, :k]) <= tol.posdef_minor:
            return False
    return True

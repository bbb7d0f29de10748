"""The four semigroup families: membership oracles, interior samplers,
predicted flag types, and the verification of their spectral-gap and
differentiability consequences.

Symplectic experiments run entirely inside the ambient special linear
machinery of dimension 2n; the Lagrangian flag type is read as the
complement of the middle simple root, and gauge directions are
constrained to the symplectic algebra.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .basedyn import BaseSystem, Cocycle
from .errors import NotSymplectic, PredictionViolated, SamplerExhausted, ValidationError
from .gaugediff import analytic_differential, finite_difference, random_gauge_direction
from .liealg import ThetaSet, weights_outside
from .matkit import is_positive_definite, mat_exp, minor
from .spectra import flag_type_estimate, polar_exponent_exact
from .flagdyn import attractor_section
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ConePositive",
    "MinorPositive",
    "SemigroupSpec",
    "SymplecticQ",
    "TotallyPositive",
    "interior_membership",
    "is_sign_regular_interior",
    "predicted_theta",
    "sample_interior",
    "sample_interior_cocycle",
    "verify_gap_predictions",
]


@dataclass(frozen=True)
class ConePositive:
    """Maps preserving the positive orthant; interior = positive entries."""

    dim: int


@dataclass(frozen=True)
class TotallyPositive:
    """All minors of all orders positive in the interior."""

    dim: int


@dataclass(frozen=True)
class MinorPositive:
    """Minors of the orders in k_set positive in the interior."""

    dim: int
    k_set: tuple

    def __post_init__(self):
        ks = tuple(int(k) for k in self.k_set)
        if not ks or any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValidationError("k_set must be non-empty and strictly increasing")
        if ks[0] < 1 or ks[-1] >= self.dim:
            raise ValidationError(f"k_set {ks} outside 1..{self.dim - 1}")
        object.__setattr__(self, "k_set", ks)


@dataclass(frozen=True)
class SymplecticQ:
    """Symplectic maps increasing the split quadratic form with matrix
    [[0, I], [I, 0]]."""

    n: int

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def j_matrix(self) -> np.ndarray:
        n = self.n
        return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])

    @property
    def q_matrix(self) -> np.ndarray:
        n = self.n
        return np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])


SemigroupSpec = ConePositive | TotallyPositive | MinorPositive | SymplecticQ


def _all_minors_positive(g: np.ndarray, orders, threshold: float) -> bool:
    d = g.shape[0]
    for k in orders:
        for rows in itertools.combinations(range(d), k):
            for cols in itertools.combinations(range(d), k):
                if minor(g, rows, cols) <= threshold:
                    return False
    return True


def interior_membership(spec: SemigroupSpec, g: np.ndarray, tol: Tolerances = DEFAULT) -> bool:
    """Strict interior test for the family, with thresholds as
    strict-positivity proxies."""
    g = np.asarray(g, dtype=float)
    if isinstance(spec, ConePositive):
        return bool(np.all(g > tol.membership))
    if isinstance(spec, TotallyPositive):
        return _all_minors_positive(g, range(1, spec.dim + 1), tol.membership)
    if isinstance(spec, MinorPositive):
        return _all_minors_positive(g, spec.k_set, tol.membership)
    if isinstance(spec, SymplecticQ):
        j = spec.j_matrix
        defect = np.abs(g.T @ j @ g - j).max()
        if defect > tol.symplectic:
            raise NotSymplectic(f"g^T J g - J has defect {defect:.3e}")
        q = spec.q_matrix
        return is_positive_definite(g.T @ q @ g - q, tol)
    raise ValidationError(f"unknown semigroup spec {spec!r}")


def is_sign_regular_interior(g: np.ndarray, tol: Tolerances = DEFAULT) -> bool:
    """Do all minors of each order share one strict sign?

    Totally positive matrices are the all-plus case; the family shares
    the totally positive predictions (empty theta set, simple spectrum),
    so no separate pathway exists beyond this oracle.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    for k in range(1, d + 1):
        sign = 0.0
        for rows in itertools.combinations(range(d), k):
            for cols in itertools.combinations(range(d), k):
                value = minor(g, rows, cols)
                if abs(value) <= tol.membership:
                    return False
                if sign == 0.0:
                    sign = np.sign(value)
                elif np.sign(value) != sign:
                    return False
    return True


def predicted_theta(spec: SemigroupSpec) -> ThetaSet:
    """Upper bound for the flag type of any cocycle with values in the
    interior of the family."""
    if isinstance(spec, ConePositive):
        return ThetaSet.projective(spec.dim)
    if isinstance(spec, TotallyPositive):
        return ThetaSet.empty(spec.dim)
    if isinstance(spec, MinorPositive):
        return ThetaSet(spec.dim, frozenset(i for i in range(1, spec.dim) if i not in spec.k_set))
    if isinstance(spec, SymplecticQ):
        return ThetaSet.grassmannian(spec.n, spec.dim)
    raise ValidationError(f"unknown semigroup spec {spec!r}")


def sample_interior(spec: SemigroupSpec, seed: int, max_tries: int = 100) -> np.ndarray:
    """Deterministic interior element for the given seed.

    Construction is family specific; interior_membership is the
    acceptance test, with up to max_tries rejections.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        g = _draw(spec, rng)
        if g is not None and interior_membership(spec, g):
            return g
    raise SamplerExhausted(f"no interior element of {spec!r} after {max_tries} draws")


def _unimodularize(g: np.ndarray) -> np.ndarray:
    # two rounds so the polish lands well inside the det tolerance
    for _ in range(2):
        g = g / np.linalg.det(g) ** (1.0 / g.shape[0])
    return g


def _draw(spec: SemigroupSpec, rng: np.random.Generator):
    if isinstance(spec, ConePositive):
        g = rng.uniform(0.2, 2.0, (spec.dim, spec.dim))
        if np.linalg.det(g) < 1e-3:
            return None
        return _unimodularize(g)
    if isinstance(spec, (TotallyPositive, MinorPositive)):
        # Loewner-Whitney factorization with the staircase reduced word:
        # lower factors, positive diagonal, upper factors, one elementary
        # bidiagonal per positive root on each side.  All parameters
        # positive makes every minor strictly positive; moderate
        # parameters keep period products well conditioned for the
        # eigenvalue oracle.
        d = spec.dim
        word = [i for width in range(d - 1, 0, -1) for i in range(width)]
        lower = np.eye(d)
        upper = np.eye(d)
        for i in word:
            fac = np.eye(d)
            fac[i + 1, i] = rng.uniform(0.2, 0.7)
            lower = lower @ fac
            fac = np.eye(d)
            fac[i, i + 1] = rng.uniform(0.2, 0.7)
            upper = upper @ fac
        g = lower @ np.diag(rng.uniform(0.8, 1.25, d)) @ upper
        return _unimodularize(g)
    if isinstance(spec, SymplecticQ):
        n = spec.n
        a = 0.3 * rng.standard_normal((n, n))
        b = _random_spd(n, rng)
        cm = _random_spd(n, rng)
        x = np.block([[a, b], [cm, -a.T]])
        return mat_exp(x)
    raise ValidationError(f"unknown semigroup spec {spec!r}")


def _random_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    root = rng.standard_normal((n, n))
    return root @ root.T / n + 0.3 * np.eye(n)


def sample_interior_cocycle(spec: SemigroupSpec, base: BaseSystem, seed: int) -> Cocycle:
    """One interior generator per base point, seeds derived from `seed`."""
    gens = tuple(sample_interior(spec, seed * 1000 + x) for x in range(base.n_points))
    return Cocycle(base=base, gen=gens)


def verify_gap_predictions(
    c: Cocycle,
    spec: SemigroupSpec,
    tol: Tolerances = DEFAULT,
    diff_seed: int = 0,
) -> dict:
    """Check every prediction the family makes about the cocycle.

    (a) estimated flag type contained in the predicted one; (b) open
    gaps strictly positive at every point; (c) for the symplectic family
    the pairing antisymmetry of the spectrum and positivity of the
    doubled bottom exponent; (d) differentiability of every admissible
    fundamental weight, validated against central differences.

    Returns a JSON-ready report; raises PredictionViolated on failure
    (which indicates a bug or tolerance problem, never a refutation).
    """
    for x in range(c.base.n_points):
        if not interior_membership(spec, c.gen[x], tol):
            raise ValidationError(f"generator at point {x} is not in the interior")
    predicted = predicted_theta(spec)
    estimated = flag_type_estimate(c)
    report: dict = {
        "family": type(spec).__name__,
        "dim": c.dim,
        "predicted_theta": sorted(predicted.indices),
        "estimated_theta": sorted(estimated.indices),
    }
    if not estimated.issubset(predicted):
        raise PredictionViolated(
            f"estimated flag type {sorted(estimated.indices)} not contained "
            f"in predicted {sorted(predicted.indices)}"
        )

    open_roots = [i for i in range(1, c.dim) if i not in predicted.indices]
    gap_table = {}
    for i in open_roots:
        worst_x, worst = None, np.inf
        for x in range(c.base.n_points):
            h = polar_exponent_exact(c, x)
            gap = h[i - 1] - h[i]
            if gap < worst:
                worst_x, worst = x, gap
        gap_table[str(i)] = {"min_gap": float(worst), "argmin": worst_x}
        if worst <= tol.gap_floor:
            raise PredictionViolated(
                f"root {i} gap {worst:.3e} at point {worst_x} is not open",
                point=worst_x, root=i,
            )
    report["gaps"] = gap_table

    if isinstance(spec, SymplecticQ):
        pairing_defect = 0.0
        for x in range(c.base.n_points):
            h = polar_exponent_exact(c, x)
            pairing_defect = max(pairing_defect, float(np.abs(h + h[::-1]).max()))
        report["symplectic_pairing_defect"] = pairing_defect
        if pairing_defect > tol.symplectic:
            raise PredictionViolated(
                f"symplectic pairing defect {pairing_defect:.3e}"
            )
        report["two_chi_n_min"] = gap_table[str(spec.n)]["min_gap"]

    section = attractor_section(c, predicted)
    symb = spec.n if isinstance(spec, SymplecticQ) else None
    direction = random_gauge_direction(c.base, c.dim, diff_seed, symplectic_n=symb)
    diff_rows = []
    for omega in weights_outside(predicted):
        analytic = analytic_differential(c, omega, direction, theta=predicted, section=section)
        slope, _ = finite_difference(c, omega, direction, tol.fd_step)
        rel = abs(analytic - slope) / (1.0 + abs(analytic))
        diff_rows.append({
            "weight": list(map(float, omega.coeffs)),
            "analytic": analytic,
            "central_difference": slope,
            "relative_residual": rel,
        })
        if rel > tol.fd_agreement:
            raise PredictionViolated(
                f"differential residual {rel:.3e} for weight {omega.coeffs}"
            )
    report["differentials"] = diff_rows
    report["verdict"] = "all predictions hold"
    return report

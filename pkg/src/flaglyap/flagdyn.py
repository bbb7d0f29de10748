"""Flag-manifold points, the induced cocycle dynamics, and Morse-section
solvers.

A (partial) flag of type theta is carried as a full special-orthogonal
frame; only the nested column spans of dimensions theta.subspace_dims()
are meaningful, and the block-orthogonal stabilizer freedom is quotiented
out in flag_distance and equality checks.  The attractor section is the
fixed point of the graph transform
    sigma <- (x -> act(rho(1, tau^{-1}x), sigma(tau^{-1}x)))
which contracts at the rate of the smallest open spectral gap.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .basedyn import Cocycle, cycle_decomposition
from .errors import NoConvergence, TypeMismatch, ValidationError, WeightNotAdmissible
from .liealg import ThetaSet, WeightVector, weights_outside
from .matkit import eig_log_moduli, iwasawa
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "FlagPoint",
    "Section",
    "act",
    "attractor_section",
    "cocycle_a",
    "cocycle_omega",
    "estimated_contraction_gap",
    "flag_distance",
    "random_flag",
    "repeller_section",
    "standard_flag",
    "transversality_check",
]


@dataclass(frozen=True)
class FlagPoint:
    theta: ThetaSet
    frame: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=float)
        d = self.theta.dim
        if f.shape != (d, d):
            raise ValidationError(f"frame shape {f.shape} does not match dimension {d}")
        defect = np.abs(f.T @ f - np.eye(d)).max()
        if defect > 1e-8:
            raise ValidationError(f"frame is not orthonormal (defect {defect:.3e})")
        object.__setattr__(self, "frame", f)


def standard_flag(theta: ThetaSet) -> FlagPoint:
    """The flag of coordinate subspaces (identity frame)."""
    return FlagPoint(theta=theta, frame=np.eye(theta.dim))


def random_flag(theta: ThetaSet, rng: np.random.Generator) -> FlagPoint:
    q, r = np.linalg.qr(rng.standard_normal((theta.dim, theta.dim)))
    q = q * np.where(np.diagonal(r) < 0, -1.0, 1.0)
    if np.linalg.det(q) < 0:
        q = q.copy()
        q[:, -1] *= -1.0
    return FlagPoint(theta=theta, frame=q)


@dataclass(frozen=True)
class Section:
    """A flag per base point, all of one type.  Solvers attach the final
    invariance residual and its history."""

    base: object
    theta: ThetaSet
    flags: tuple
    residual: float | None = field(default=None, compare=False)
    history: tuple = field(default=(), compare=False)


def act(g: np.ndarray, xi: FlagPoint) -> FlagPoint:
    """Induced action on flags: the K-part of the Iwasawa factorization
    of g times the frame."""
    return FlagPoint(theta=xi.theta, frame=iwasawa(np.asarray(g, float) @ xi.frame).k)


def flag_distance(xi1: FlagPoint, xi2: FlagPoint) -> float:
    """Maximum chordal distance between corresponding nested subspaces.

    For each carried dimension m the distance is sin of the largest
    principal angle between the leading m columns, computed from the
    orthogonal-complement projection (full precision near zero, unlike
    sqrt(1 - cos^2)); orthogonal lines are at distance 1.
    """
    if xi1.theta != xi2.theta:
        raise TypeMismatch("flag points have different types")
    worst = 0.0
    for m in xi1.theta.subspace_dims():
        a = xi1.frame[:, :m]
        b = xi2.frame[:, :m]
        residue = b - a @ (a.T @ b)
        worst = max(worst, min(1.0, np.linalg.svd(residue, compute_uv=False)[0]))
    return worst


def cocycle_a(c: Cocycle, n: int, x: int, xi: FlagPoint) -> np.ndarray:
    """The vector-valued additive cocycle over the full flag bundle.

    Accumulates the log diagonal of stepwise Iwasawa refactorizations
    (never one long product), so the additivity identity holds to
    roundoff and no overflow occurs for large n.
    """
    if xi.theta.indices:
        raise ValidationError("the vector cocycle lives on the full flag type")
    total = np.zeros(c.dim)
    k = xi.frame
    for _ in range(n):
        fac = iwasawa(c.gen[x] @ k)
        total += fac.a
        k = fac.k
        x = c.base.tau[x]
    return total


def weight_in_span(omega: WeightVector, theta: ThetaSet, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Coefficients of omega on the weights outside theta, or raise
    WeightNotAdmissible when the residual of the solve is too large."""
    basis = weights_outside(theta)
    target = omega.traceless_coeffs
    if not basis:
        if np.abs(target).max() <= tol.weight_span:
            return np.zeros(0)
        raise WeightNotAdmissible("no weights are admissible for the full theta set")
    mat = np.stack([w.traceless_coeffs for w in basis], axis=1)
    coeffs, *_ = np.linalg.lstsq(mat, target, rcond=None)
    residual = np.abs(mat @ coeffs - target).max()
    if residual > tol.weight_span:
        raise WeightNotAdmissible(
            f"weight is outside the admissible span (residual {residual:.3e})"
        )
    return coeffs


def cocycle_omega(
    c: Cocycle, omega: WeightVector, n: int, x: int, xi: FlagPoint,
    tol: Tolerances = DEFAULT,
) -> float:
    """Scalar cocycle omega(a(n, x, .)) on the partial flag type of xi.

    Defined only for omega in the span of the weights outside xi.theta;
    the value is then independent of the full-flag lift of xi.
    """
    weight_in_span(omega, xi.theta, tol)
    lift = FlagPoint(theta=ThetaSet.empty(xi.theta.dim), frame=xi.frame)
    return omega(cocycle_a(c, n, x, lift))


def estimated_contraction_gap(c: Cocycle, theta: ThetaSet) -> float:
    """Smallest spectral gap the flag type theta needs open, minimized
    over tau-cycles (the contraction rate of the graph transform)."""
    worst = np.inf
    for cycle, _ in cycle_decomposition(c.base):
        period = np.eye(c.dim)
        y = cycle[0]
        for _ in range(len(cycle)):
            period = c.gen[y] @ period
            y = c.base.tau[y]
        h = eig_log_moduli(period) / len(cycle)
        for i in range(1, c.dim):
            if i not in theta.indices:
                worst = min(worst, h[i - 1] - h[i])
    return 0.0 if math.isinf(worst) else float(worst)


def _default_max_iter(gap: float, tol: float) -> int:
    budget = 10 * math.ceil(math.log(1.0 / tol) / max(gap, 0.046))
    return min(max(budget, 500), 5000)


def _graph_residual(c: Cocycle, flags) -> float:
    return max(
        flag_distance(flags[c.base.tau[x]], act(c.gen[x], flags[x]))
        for x in range(c.base.n_points)
    )


def attractor_section(
    c: Cocycle,
    theta: ThetaSet,
    tol: float | None = None,
    max_iter: int | None = None,
    seed: int = 0,
) -> Section:
    """Fixed point of the forward graph transform on sections of type theta.

    Starts from a seeded random section and iterates until the
    invariance residual sup_x dist(sigma(tau x), g_x . sigma(x)) drops
    below tol.  Raises NoConvergence when the budget runs out, which
    signals a missing or too-weak spectral gap for this flag type.
    """
    if theta.dim != c.dim:
        raise TypeMismatch("flag type dimension does not match the cocycle")
    tol = DEFAULT.section if tol is None else tol
    if max_iter is None:
        max_iter = _default_max_iter(estimated_contraction_gap(c, theta), tol)
    last_history = ()
    for attempt in range(3):
        rng = np.random.default_rng(seed + attempt)
        flags = [random_flag(theta, rng) for _ in range(c.base.n_points)]
        history = []
        for _ in range(max_iter):
            residual = _graph_residual(c, flags)
            history.append(residual)
            if residual <= tol:
                return Section(
                    base=c.base, theta=theta, flags=tuple(flags),
                    residual=residual, history=tuple(history),
                )
            new_flags = list(flags)
            for x in range(c.base.n_points):
                new_flags[c.base.tau[x]] = act(c.gen[x], flags[x])
            flags = new_flags
        last_history = tuple(history)
    raise NoConvergence(max_iter, last_history[-1], last_history)


def repeller_section(
    c: Cocycle,
    theta: ThetaSet,
    tol: float | None = None,
    max_iter: int | None = None,
    seed: int = 0,
) -> Section:
    """Attractor section of the time-reversed cocycle, living on the dual
    flag type (index reversal)."""
    backward = attractor_section(c.inverse(), theta.dual(), tol=tol, max_iter=max_iter, seed=seed)
    return Section(
        base=c.base, theta=backward.theta, flags=backward.flags,
        residual=backward.residual, history=backward.history,
    )


def transversality_check(s: Section, s_dual: Section, tol: Tolerances = DEFAULT) -> list:
    """Per-point verdicts: do all complementary-dimension subspace pairs
    of the two flags intersect trivially?

    Tested through the smallest singular value of the stacked frame
    columns.
    """
    if s_dual.theta != s.theta.dual():
        raise TypeMismatch("second section does not live on the dual flag type")
    d = s.theta.dim
    out = []
    for x in range(len(s.flags)):
        ok = True
        for m in s.theta.subspace_dims():
            stacked = np.hstack([s.flags[x].frame[:, :m], s_dual.flags[x].frame[:, : d - m]])
            if np.linalg.svd(stacked, compute_uv=False)[-1] <= tol.transversal:
                ok = False
                break
        out.append(ok)
    return out

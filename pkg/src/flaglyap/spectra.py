"""Polar exponents, spectrum functionals, and flag-type estimation.

On a finite base every orbit is periodic, so the exact values of all
limits are eigenvalue computations on period maps; the finite-n
estimators exist to demonstrate convergence and for stress tests.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .basedyn import Cocycle, cycle_decomposition
from .errors import DegenerateSpectrum
from .flagdyn import FlagPoint, Section, attractor_section, cocycle_a, cocycle_omega
from .liealg import ThetaSet, WeightVector, theta_of
from .matkit import eig_log_moduli, iwasawa
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "SpectrumReport",
    "flag_type_estimate",
    "section_flag_type",
    "lyapunov_of_flag",
    "polar_exponent_exact",
    "polar_exponent_finite",
    "spectrum_functional",
    "spectrum_report",
    "spectrum_via_section",
    "weyl_relation_check",
]


def polar_exponent_finite(c: Cocycle, x: int, n: int) -> np.ndarray:
    """(1/n) log singular values of rho(n, x), sorted non-increasing.

    The product is accumulated with per-step norm rescaling, so the
    overall scale never overflows.  The top entry is reliable for any n;
    entries below the top lose accuracy once n times the spectral spread
    exceeds the ~36 units of double-precision dynamic range, which is
    why the exact periodic route is the reference method.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    m = np.eye(c.dim)
    log_scale = 0.0
    y = x
    for _ in range(n):
        m = c.gen[y] @ m
        s = np.linalg.norm(m)
        m /= s
        log_scale += math.log(s)
        y = c.base.tau[y]
    sing = np.linalg.svd(m, compute_uv=False)
    return (np.log(sing) + log_scale) / n


def _period_map(c: Cocycle, x: int, length: int) -> np.ndarray:
    out = np.eye(c.dim)
    y = x
    for _ in range(length):
        out = c.gen[y] @ out
        y = c.base.tau[y]
    return out


def _cycle_of(c: Cocycle, x: int) -> tuple:
    cycle = [x]
    y = c.base.tau[x]
    while y != x:
        cycle.append(y)
        y = c.base.tau[y]
    return tuple(cycle)


def polar_exponent_exact(c: Cocycle, x: int) -> np.ndarray:
    """Exact limit along the periodic orbit of x: (1/L) times the sorted
    log eigenvalue moduli of the period map."""
    length = len(_cycle_of(c, x))
    return eig_log_moduli(_period_map(c, x, length)) / length


def mean_polar_exponent(c: Cocycle) -> np.ndarray:
    """nu-weighted mean of the exact per-point polar exponents."""
    mean = np.zeros(c.dim)
    for cycle, w in cycle_decomposition(c.base):
        mean += w * eig_log_moduli(_period_map(c, cycle[0], len(cycle)))
    return mean


def spectrum_functional(c: Cocycle, omega: WeightVector) -> float:
    """Lambda_omega = sum_x nu(x) omega(H+(x)) via the exact periodic values."""
    return omega(mean_polar_exponent(c))


def spectrum_via_section(
    c: Cocycle,
    omega: WeightVector,
    theta: ThetaSet,
    section: Section | None = None,
    tol: Tolerances = DEFAULT,
) -> float:
    """The same functional computed as a Birkhoff sum of one-step
    omega-cocycle values along the attractor section of type theta.

    Must agree with spectrum_functional whenever the section solver
    converges; this equality is a core acceptance check.
    """
    if section is None:
        section = attractor_section(c, theta)
    nu = c.base.nu
    return sum(
        nu[x] * cocycle_omega(c, omega, 1, x, section.flags[x], tol)
        for x in range(c.base.n_points)
    )


def lyapunov_of_flag(c: Cocycle, x: int, xi: FlagPoint, n: int) -> np.ndarray:
    """Finite-n direction-dependent exponent (1/n) a(n, x, xi)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return cocycle_a(c, n, x, xi) / n


def _eigenflag_frames(period: np.ndarray, order) -> np.ndarray:
    """Orthonormal frame whose nested spans are the eigendirections of
    the period map taken in the given modulus order."""
    ev, vec = np.linalg.eig(period)
    moduli = np.abs(ev)
    ranking = np.argsort(moduli)[::-1]
    gaps = np.diff(np.sort(np.log(moduli))[::-1])
    if np.any(np.abs(gaps) < 1e-8):
        raise DegenerateSpectrum("period map has coinciding eigenvalue moduli")
    basis = np.real(vec[:, ranking])  # distinct moduli force real eigenvectors
    fac = iwasawa(_unit_det(basis[:, list(order)]))
    return fac.k


def _unit_det(m: np.ndarray) -> np.ndarray:
    det = np.linalg.det(m)
    if det < 0:
        m = m.copy()
        m[:, 0] *= -1.0
        det = -det
    return m / det ** (1.0 / m.shape[0])


def weyl_relation_check(
    c: Cocycle, x: int, n: int, tol: float = 1e-6, rng: np.random.Generator | None = None,
) -> bool:
    """Do the flag exponents of permuted eigenflags realize exactly the
    permutation orbit of the polar exponent?

    Enumerates all d! eigenflags for d <= 4 and samples 10 random
    permutations otherwise.  Raises DegenerateSpectrum when the period
    map has coinciding eigenvalue moduli.
    """
    d = c.dim
    cycle = _cycle_of(c, x)
    period = _period_map(c, x, len(cycle))
    h_plus = polar_exponent_exact(c, x)
    if d <= 4:
        orders = list(itertools.permutations(range(d)))
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        orders = [tuple(rng.permutation(d)) for _ in range(10)]
    full = ThetaSet.empty(d)
    for order in orders:
        frame = _eigenflag_frames(period, order)
        lam = lyapunov_of_flag(c, x, FlagPoint(theta=full, frame=frame), n)
        expected = h_plus[list(order)]
        if np.abs(lam - expected).max() > tol:
            return False
    return True


def _default_eps(h: np.ndarray) -> float:
    gaps = h[:-1] - h[1:]
    return max(1e-6 * gaps.max(initial=0.0), 1e-9)


def flag_type_estimate(c: Cocycle, eps: float | None = None) -> ThetaSet:
    """Flag type read off from the gaps of the mean polar exponent.

    The default tolerance is 1e-6 of the largest gap, floored at 1e-9 so
    isometry-like cocycles (all gaps pure roundoff) classify as the full
    theta set.
    """
    mean = mean_polar_exponent(c)
    if eps is None:
        eps = _default_eps(mean)
    return theta_of(np.sort(mean)[::-1], eps)


def section_flag_type(c: Cocycle, eps: float | None = None) -> ThetaSet:
    """Smallest flag type on which the attractor can be a section: the
    union, over tau-cycles, of the gaps closed on that cycle.

    A gap open in the mean can still be closed on one cycle (a complex
    eigenvalue pair of its period map), in which case no section exists
    below this type; solvers and differentials default to it.
    """
    closed: set = set()
    per_cycle = []
    for cycle, _ in cycle_decomposition(c.base):
        per_cycle.append(polar_exponent_exact(c, cycle[0]))
    if eps is None:
        eps = max(_default_eps(h) for h in per_cycle)
    for h in per_cycle:
        closed |= theta_of(h, eps).indices
    return ThetaSet(c.dim, frozenset(closed))


@dataclass(frozen=True)
class SpectrumReport:
    per_point: tuple          # H+(x) per base point
    mean: np.ndarray          # nu-weighted mean spectrum
    theta: ThetaSet           # estimated flag type
    method: str               # "exact-periodic" or "finite-n"
    gaps: tuple               # alpha_i(mean), i = 1..d-1

    def as_dict(self) -> dict:
        return {
            "per_point": [list(map(float, h)) for h in self.per_point],
            "mean": [float(v) for v in self.mean],
            "theta": sorted(self.theta.indices),
            "dim": self.theta.dim,
            "method": self.method,
            "gaps": {str(i + 1): float(g) for i, g in enumerate(self.gaps)},
        }

    def csv_rows(self) -> list:
        d = self.theta.dim
        header = ["x"] + [f"h{i + 1}" for i in range(d)] + [
            f"gap{i}" for i in range(1, d)
        ]
        rows = [header]
        for x, h in enumerate(self.per_point):
            gaps = [h[i - 1] - h[i] for i in range(1, d)]
            rows.append([x] + [float(v) for v in h] + gaps)
        return rows


def spectrum_report(c: Cocycle, method: str = "exact-periodic", n: int | None = None) -> SpectrumReport:
    """Per-point polar exponents plus mean spectrum, gaps, and flag type."""
    if method == "exact-periodic":
        per_point = tuple(polar_exponent_exact(c, x) for x in range(c.base.n_points))
    elif method == "finite-n":
        if n is None:
            raise ValueError("finite-n reports need n")
        per_point = tuple(polar_exponent_finite(c, x, n) for x in range(c.base.n_points))
    else:
        raise ValueError(f"unknown method {method!r}")
    nu = c.base.nu
    mean = sum(nu[x] * per_point[x] for x in range(c.base.n_points))
    gaps = tuple(float(mean[i - 1] - mean[i]) for i in range(1, c.dim))
    return SpectrumReport(
        per_point=per_point, mean=mean, theta=flag_type_estimate(c),
        method=method, gaps=gaps,
    )

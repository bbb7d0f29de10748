"""Gauge perturbations of a cocycle and derivatives of its spectrum.

A gauge direction is a table x -> Y(x) of traceless matrices; the
perturbed cocycle has generators exp(tY(x)) rho(1, x).  The closed-form
derivative of Lambda_omega at t = 0 combines two pieces, both expressed
in the frames k_x of the attractor section:

  * the frame-aligned gauge term  omega(diag(u_x^T Y(x) u_x))  with
    u_x h_x n_x the Iwasawa factors of rho(1, x) k_x, and
  * the section response  omega(diag((h_x n_x) B_x (h_x n_x)^{-1}))
    where the block-strictly-lower fields B_x solve the linearized
    invariance equation of the section,
        B_{tau x} = P_low[ k_{tau x}^T Y(x) k_{tau x}
                           + M_x B_x M_x^{-1} ],   M_x = k_{tau x}^T rho(1, x) k_x.

The equation is solved exactly per tau-cycle through its monodromy,
which is a contraction whenever the flag type's gaps are open.  The
result is linear in Y, independent of the stabilizer freedom in k_x,
and matches Richardson central differences; the finite-difference
harness below is the validation oracle.
"""

from dataclasses import dataclass

import numpy as np

from .basedyn import BaseSystem, Cocycle, perturb
from .errors import ValidationError
from .flagdyn import Section, attractor_section, repeller_section, weight_in_span
from .liealg import ThetaSet, WeightVector
from .matkit import check_algebra, iwasawa, mat_exp
from .spectra import mean_polar_exponent, section_flag_type, spectrum_functional
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "GaugeDirection",
    "analytic_differential",
    "finite_difference",
    "gauge_exp",
    "perturbed_spectrum",
    "random_gauge_direction",
    "ruelle_differential",
    "smoothness_scan",
    "zero_direction",
]


@dataclass(frozen=True)
class GaugeDirection:
    base: BaseSystem
    table: tuple  # one traceless d x d matrix per base point

    def __post_init__(self):
        if len(self.table) != self.base.n_points:
            raise ValidationError("need one direction matrix per base point")
        mats = tuple(check_algebra(y) for y in self.table)
        d = mats[0].shape[0]
        if any(y.shape != (d, d) for y in mats):
            raise ValidationError("all direction matrices must share one dimension")
        object.__setattr__(self, "table", mats)

    @property
    def dim(self) -> int:
        return self.table[0].shape[0]

    def scaled(self, factor: float) -> "GaugeDirection":
        return GaugeDirection(self.base, tuple(factor * y for y in self.table))

    def __add__(self, other: "GaugeDirection") -> "GaugeDirection":
        if other.base != self.base:
            raise ValidationError("directions live over different bases")
        return GaugeDirection(self.base, tuple(a + b for a, b in zip(self.table, other.table)))


def zero_direction(base: BaseSystem, dim: int) -> GaugeDirection:
    return GaugeDirection(base, tuple(np.zeros((dim, dim)) for _ in range(base.n_points)))


def random_gauge_direction(
    base: BaseSystem, dim: int, seed: int, scale: float = 1.0,
    symplectic_n: int | None = None,
) -> GaugeDirection:
    """Seeded random direction; with symplectic_n set, each Y(x) is drawn
    from the symplectic algebra (blocks [[A, B], [C, -A^T]] with B, C
    symmetric) so perturbed cocycles stay in the group."""
    rng = np.random.default_rng(seed)
    table = []
    for _ in range(base.n_points):
        if symplectic_n is None:
            y = rng.standard_normal((dim, dim))
            y -= np.trace(y) / dim * np.eye(dim)
        else:
            n = symplectic_n
            if dim != 2 * n:
                raise ValidationError(f"symplectic_n={n} needs dimension {2 * n}")
            a = rng.standard_normal((n, n))
            b = rng.standard_normal((n, n))
            cm = rng.standard_normal((n, n))
            y = np.block([[a, b + b.T], [cm + cm.T, -a.T]])
        table.append(scale * y)
    return GaugeDirection(base, tuple(table))


def gauge_exp(y: GaugeDirection, t: float) -> tuple:
    """Pointwise exponential table x -> exp(t Y(x))."""
    return tuple(mat_exp(t * yx) for yx in y.table)


def perturbed_spectrum(c: Cocycle, omega: WeightVector, y: GaugeDirection, t: float) -> float:
    """Lambda_omega of the perturbed cocycle, via the exact periodic oracle."""
    return spectrum_functional(perturb(c, gauge_exp(y, t)), omega)


def _lower_pairs(theta: ThetaSet) -> list:
    """Index pairs of the block-strictly-lower part for the flag type."""
    sizes = theta.block_sizes()
    block_of = []
    for bi, sz in enumerate(sizes):
        block_of.extend([bi] * sz)
    return [
        (i, j)
        for i in range(theta.dim)
        for j in range(theta.dim)
        if block_of[i] > block_of[j]
    ]


def _project_lower(w: np.ndarray, pairs) -> np.ndarray:
    out = np.zeros_like(w)
    for i, j in pairs:
        out[i, j] = w[i, j]
    return out


def _conjugation_matrix(m: np.ndarray, pairs) -> np.ndarray:
    """The linear map B -> P_low[m B m^{-1}] on the lower-pair coordinates."""
    minv = np.linalg.inv(m)
    dim = len(pairs)
    op = np.empty((dim, dim))
    for col, (i, j) in enumerate(pairs):
        image = np.outer(m[:, i], minv[j, :])
        op[:, col] = [image[a, b] for a, b in pairs]
    return op


def analytic_differential(
    c: Cocycle,
    omega: WeightVector,
    y: GaugeDirection,
    theta: ThetaSet | None = None,
    section: Section | None = None,
    tol: Tolerances = DEFAULT,
) -> float:
    """Closed-form derivative of t -> Lambda_omega(perturbed by exp(tY))
    at t = 0.

    Solves the attractor section at the estimated flag type (or uses the
    ones supplied), then assembles the gauge term and the section
    response as described in the module docstring.
    """
    if theta is None:
        theta = section_flag_type(c)
    weight_in_span(omega, theta, tol)
    if section is None:
        section = attractor_section(c, theta)
    n_pts = c.base.n_points
    tau = c.base.tau
    frames = [section.flags[x].frame for x in range(n_pts)]

    pairs = _lower_pairs(theta)
    u_fac = []
    upper = []        # h_x n_x as one upper-triangular matrix
    step_ops = []     # T_x on lower-pair coordinates
    gauge_vec = []    # coordinates of P_low[k_{tau x}^T Y(x) k_{tau x}]
    for x in range(n_pts):
        fac = iwasawa(c.gen[x] @ frames[x])
        u_fac.append(fac.k)
        upper.append(np.exp(fac.a)[:, None] * fac.n)
        ky = frames[tau[x]]
        step_ops.append(_conjugation_matrix(ky.T @ c.gen[x] @ frames[x], pairs))
        w = ky.T @ y.table[x] @ ky
        gauge_vec.append(np.array([w[i, j] for i, j in pairs]))

    b_coords = _solve_section_response(c.base, step_ops, gauge_vec, len(pairs))

    total = 0.0
    nu = c.base.nu
    for x in range(n_pts):
        b_mat = np.zeros((c.dim, c.dim))
        for coord, (i, j) in zip(b_coords[x], pairs):
            b_mat[i, j] = coord
        response = upper[x] @ b_mat @ np.linalg.inv(upper[x])
        gauge = u_fac[x].T @ y.table[x] @ u_fac[x]
        total += nu[x] * omega(np.diagonal(gauge + response))
    return float(total)


def _solve_section_response(base: BaseSystem, step_ops, gauge_vec, n_coords):
    """Solve B_{tau x} = gauge_vec[x] + step_ops[x] B_x exactly, one
    tau-cycle at a time through its monodromy."""
    n_pts = base.n_points
    b = [None] * n_pts
    seen = [False] * n_pts
    eye = np.eye(n_coords)
    for start in range(n_pts):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        yy = base.tau[start]
        while yy != start:
            cycle.append(yy)
            seen[yy] = True
            yy = base.tau[yy]
        monodromy = eye
        offset = np.zeros(n_coords)
        for x in cycle:
            offset = gauge_vec[x] + step_ops[x] @ offset
            monodromy = step_ops[x] @ monodromy
        if n_coords:
            b[start] = np.linalg.solve(eye - monodromy, offset)
        else:
            b[start] = offset
        current = b[start]
        for x in cycle[:-1]:
            current = gauge_vec[x] + step_ops[x] @ current
            b[base.tau[x]] = current
    return b


def ruelle_differential(
    c: Cocycle,
    y: GaugeDirection,
    sections: tuple | None = None,
) -> float:
    """Derivative of the top exponent via the invariant line and the
    repelling hyperplane.

    With v(x) the unit vector of the projective attractor section and
    w(x) the unit normal of the repeller hyperplane, the derivative is
        sum_x nu(x) <w(tau x), Y(x) v(tau x)> / <w(tau x), v(tau x)>,
    the oblique projection onto the line along the hyperplane.  Agrees
    with analytic_differential at omega = lambda_1 whenever both exist.
    """
    theta = ThetaSet.projective(c.dim)
    if sections is None:
        line_sec = attractor_section(c, theta)
        hyper_sec = repeller_section(c, theta)
    else:
        line_sec, hyper_sec = sections
    v = [line_sec.flags[x].frame[:, 0] for x in range(c.base.n_points)]
    w = [hyper_sec.flags[x].frame[:, -1] for x in range(c.base.n_points)]
    total = 0.0
    for x in range(c.base.n_points):
        tx = c.base.tau[x]
        total += c.base.nu[x] * float(w[tx] @ y.table[x] @ v[tx]) / float(w[tx] @ v[tx])
    return total


def finite_difference(
    c: Cocycle, omega: WeightVector, y: GaugeDirection, h: float,
) -> tuple:
    """Richardson-extrapolated central difference of the spectrum map.

    Returns (slope, order_estimate); the order estimate comes from the
    ratio of successive corrections at steps h, h/2, h/4 and is nan in
    the degenerate (exactly flat) case.
    """
    if h <= 0:
        raise ValidationError("step h must be positive")

    def central(step: float) -> float:
        plus = perturbed_spectrum(c, omega, y, step)
        minus = perturbed_spectrum(c, omega, y, -step)
        return (plus - minus) / (2.0 * step)

    s1, s2, s4 = central(h), central(h / 2), central(h / 4)
    slope = s2 + (s2 - s1) / 3.0
    c1, c2 = s2 - s1, s4 - s2
    if abs(c1) < 1e-300 or abs(c2) < 1e-300:
        return slope, float("nan")
    return slope, float(np.log2(abs(c1 / c2)))


def smoothness_scan(c: Cocycle, omega: WeightVector, y: GaugeDirection, t_grid) -> list:
    """Sample t -> Lambda_omega(t) on a grid.

    Each row is (t, value, gap_1, ..., gap_{d-1}) with the gaps taken on
    the mean spectrum of the perturbed cocycle, so closures show up
    alongside the curve.
    """
    rows = []
    for t in t_grid:
        pc = perturb(c, gauge_exp(y, float(t)))
        mean = mean_polar_exponent(pc)
        gaps = [float(mean[i - 1] - mean[i]) for i in range(1, c.dim)]
        rows.append((float(t), omega(mean), *gaps))
    return rows

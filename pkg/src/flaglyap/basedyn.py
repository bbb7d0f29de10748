"""Finite measured base systems and matrix cocycles over them.

A base system is a permutation tau of {0..N-1} together with a strictly
positive tau-invariant probability vector nu.  Every orbit is periodic,
which makes all ergodic limits exact finite computations.  Cocycles
store one unit-determinant generator per point; the n-step value is
rho(n, x) = rho(1, tau^{n-1} x) ... rho(1, x).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DeterminantError, MalformedPermutation, ValidationError
from .matkit import check_group
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "BaseSystem",
    "Cocycle",
    "cocycle_step",
    "cycle_decomposition",
    "perturb",
]


@dataclass(frozen=True)
class BaseSystem:
    n_points: int
    tau: tuple
    nu: tuple

    def __post_init__(self):
        tau = tuple(int(t) for t in self.tau)
        if sorted(tau) != list(range(self.n_points)):
            raise MalformedPermutation(
                f"tau is not a permutation of 0..{self.n_points - 1}"
            )
        nu = np.asarray(self.nu, dtype=float)
        if nu.shape != (self.n_points,):
            raise ValidationError(f"measure has shape {nu.shape}, expected ({self.n_points},)")
        if np.any(nu <= 0.0):
            raise ValidationError("measure must be strictly positive on every point")
        nu = nu / nu.sum()
        # invariance forces nu to be constant along each tau-cycle
        for cycle in _cycles(tau):
            w = nu[list(cycle)]
            if w.max() - w.min() > 1e-12 * max(1.0, w.max()):
                raise ValidationError(
                    f"measure is not tau-invariant on cycle {cycle}"
                )
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "nu", tuple(float(v) for v in nu))

    @classmethod
    def from_cycles(cls, cycles, weights=None) -> "BaseSystem":
        """Build from a list of cycles (each a list of point indices).

        weights gives one value per cycle (total mass of that cycle);
        uniform when omitted.
        """
        points = [p for c in cycles for p in c]
        n = len(points)
        if sorted(points) != list(range(n)):
            raise ValidationError("cycles must partition 0..N-1")
        tau = [0] * n
        for c in cycles:
            for i, p in enumerate(c):
                tau[p] = c[(i + 1) % len(c)]
        nu = np.empty(n)
        if weights is None:
            nu[:] = 1.0 / n
        else:
            if len(weights) != len(cycles):
                raise ValidationError("need one weight per cycle")
            total = float(sum(weights))
            for c, w in zip(cycles, weights):
                if w <= 0:
                    raise ValidationError("cycle weights must be positive")
                nu[list(c)] = w / (total * len(c))
        return cls(n_points=n, tau=tuple(tau), nu=tuple(nu))

    def tau_inverse(self) -> tuple:
        inv = [0] * self.n_points
        for x, y in enumerate(self.tau):
            inv[y] = x
        return tuple(inv)


def _cycles(tau) -> list:
    n = len(tau)
    seen = [False] * n
    out = []
    for start in range(n):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        y = tau[start]
        while y != start:
            cycle.append(y)
            seen[y] = True
            y = tau[y]
        out.append(tuple(cycle))
    return out


@dataclass(frozen=True)
class Cocycle:
    base: BaseSystem
    gen: tuple  # one d x d generator per base point

    def __post_init__(self):
        if len(self.gen) != self.base.n_points:
            raise ValidationError("need one generator per base point")
        gens = tuple(check_group(g) for g in self.gen)
        d = gens[0].shape[0]
        if any(g.shape != (d, d) for g in gens):
            raise ValidationError("all generators must share one dimension")
        object.__setattr__(self, "gen", gens)

    @property
    def dim(self) -> int:
        return self.gen[0].shape[0]

    def inverse(self) -> "Cocycle":
        """The time-reversed cocycle: generator rho(1, tau^{-1}x)^(-1) over tau^(-1)."""
        inv_tau = self.base.tau_inverse()
        base = BaseSystem(self.base.n_points, inv_tau, self.base.nu)
        gens = tuple(np.linalg.inv(self.gen[inv_tau[x]]) for x in range(self.base.n_points))
        return Cocycle(base=base, gen=gens)


def cocycle_step(c: Cocycle, n: int, x: int) -> np.ndarray:
    """rho(n, x) as an explicit product; rho(0, x) = I."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    out = np.eye(c.dim)
    for _ in range(n):
        out = c.gen[x] @ out
        x = c.base.tau[x]
    return out


def perturb(c: Cocycle, f, tol: Tolerances = DEFAULT) -> Cocycle:
    """New cocycle with generators f(x) . rho(1, x); the input is unchanged."""
    if len(f) != c.base.n_points:
        raise ValidationError("need one perturbation factor per base point")
    for fx in f:
        d = np.linalg.det(np.asarray(fx, dtype=float))
        if abs(d - 1.0) > tol.det:
            raise DeterminantError(f"perturbation factor has determinant {d!r}")
    gens = tuple(np.asarray(f[x], dtype=float) @ c.gen[x] for x in range(c.base.n_points))
    return Cocycle(base=c.base, gen=gens)


def cycle_decomposition(b: BaseSystem) -> list:
    """Disjoint tau-cycles with their per-point measure, covering X."""
    return [(cycle, b.nu[cycle[0]]) for cycle in _cycles(b.tau)]

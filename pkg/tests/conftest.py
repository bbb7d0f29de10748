import numpy as np
import pytest

from flaglyap import BaseSystem, Cocycle


def random_unimodular(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    """Random matrix with determinant exactly one (two-step polish)."""
    g = np.eye(d) + scale * rng.standard_normal((d, d)) / np.sqrt(d)
    det = np.linalg.det(g)
    if abs(det) < 1e-3:
        return random_unimodular(rng, d, scale)
    if det < 0:
        g[:, 0] *= -1.0
    for _ in range(2):
        g = g / np.linalg.det(g) ** (1.0 / d)
    return g


def random_cocycle(rng: np.random.Generator, d: int, cycles, scale: float = 1.0) -> Cocycle:
    base = BaseSystem.from_cycles(cycles)
    gens = tuple(random_unimodular(rng, d, scale) for _ in range(base.n_points))
    return Cocycle(base=base, gen=gens)


def positive_cocycle(rng: np.random.Generator, d: int, cycles) -> Cocycle:
    """Cocycle with strictly positive entries (interior of the cone family)."""
    base = BaseSystem.from_cycles(cycles)
    gens = []
    while len(gens) < base.n_points:
        g = rng.uniform(0.2, 2.0, (d, d))
        if np.linalg.det(g) < 1e-3:
            continue
        for _ in range(2):
            g = g / np.linalg.det(g) ** (1.0 / d)
        gens.append(g)
    return Cocycle(base=base, gen=tuple(gens))


def power_iteration_log_root(m: np.ndarray, iters: int = 3000) -> float:
    """Independent oracle for log of the Perron root of a positive matrix."""
    v = np.ones(m.shape[0])
    growth = 0.0
    for _ in range(iters):
        w = m @ v
        growth = np.linalg.norm(w)
        v = w / growth
    return float(np.log(growth))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

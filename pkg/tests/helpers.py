import numpy as np

from clarkkit.herglotz import ClarkFrame
from clarkkit.schur import Blaschke, identity_times_z


def rand_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_blaschke(rng: np.random.Generator, max_degree: int = 8, radius: float = 0.9) -> Blaschke:
    """Random finite Blaschke product with a zero at the origin."""
    deg = int(rng.integers(1, max_degree + 1))
    zeros = radius * np.sqrt(rng.random(deg)) * np.exp(2j * np.pi * rng.random(deg))
    zeros[0] = 0.0
    return Blaschke(tuple(zeros))


def rand_phase(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def zi2_frame(rng: np.random.Generator) -> ClarkFrame:
    return ClarkFrame(identity_times_z(2), rand_unitary(rng, 2))


def interior_points(rng: np.random.Generator, count: int, rmax: float = 0.9) -> np.ndarray:
    return rmax * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))

"""Independent checks: circle quadrature, closed-form scalar atoms, H^2 norms.

Nothing here calls the atom finder or the Herglotz/resolvent helpers it is
used to audit; frames are evaluated directly from ``b`` and ``alpha``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import zeta as riemann_zeta

__all__ = [
    "H2Estimate",
    "QuadratureGrid",
    "ReferenceAtoms",
    "cauchy_identity_residual",
    "cauchy_transform",
    "h2_norm_estimate",
    "herglotz_residual",
    "scalar_reference_atoms",
]

log = logging.getLogger(__name__)

UNIT_TOL = 1e-8
MAX_DEGREE = 32


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform trapezoid nodes on the circle with weights ``1/N``."""

    size: int = 4096

    def __post_init__(self) -> None:
        if self.size < 2 or self.size & (self.size - 1):
            raise ValueError("quadrature size must be a power of two")

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.size) / self.size

    @property
    def nodes(self) -> np.ndarray:
        return np.exp(1j * self.thetas)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)


def _direct_herglotz(b, alpha: np.ndarray, z: complex) -> np.ndarray:
    a = np.asarray(b.eval(z)) @ alpha.conj().T
    eye = np.eye(a.shape[0])
    return (eye + a) @ np.linalg.inv(eye - a)


def _side_correction(w1: np.ndarray, w2: np.ndarray, w4: np.ndarray) -> np.ndarray:
    """Missing trapezoid mass, times ``N``, on one side of a dropped node.

    Each real component is fitted as ``A k^(-beta) + B`` from the samples at
    ``k = 1, 2, 4`` steps away.  The generalized Euler-Maclaurin expansion
    then gives ``-zeta(beta) A - zeta(0) B``.  Components that do not fit the
    model fall back to the linear-interpolation value ``w1 / 2``.
    """
    out = np.empty(w1.size)
    for i, (a1, a2, a4) in enumerate(zip(w1, w2, w4)):
        out[i] = 0.5 * a1
        d12, d24 = a1 - a2, a2 - a4
        if d12 == 0.0 or d24 == 0.0 or d12 * d24 < 0:
            continue
        beta = np.log(d12 / d24) / np.log(2.0)
        if not -1.0 < beta < 1.0 or abs(beta) < 1e-6:
            continue
        amp = d12 / (1.0 - 2.0 ** (-beta))
        out[i] = -float(riemann_zeta(beta)) * amp + 0.5 * (a1 - amp)
    return out


def _ac_samples(measure, grid: QuadratureGrid) -> tuple[np.ndarray, list[tuple[complex, np.ndarray]]]:
    """Density at the nodes plus end corrections for isolated undefined nodes.

    An undefined node (atom candidate or unconverged boundary value) is
    dropped from the trapezoid sum and its neighbourhood is corrected by
    ``_side_correction`` on each side, which handles integrable power
    singularities as well as bounded cusps.  Undefined nodes with another
    undefined node within four steps are left at zero.
    """
    n = measure.n
    if measure.ac_many is None:
        return np.zeros((grid.size, n, n), dtype=complex), []
    # measures are immutable once built; reuse node samples across evaluation points
    cache = measure.__dict__.setdefault("_quadrature_cache", {})
    if grid.size not in cache:
        cache[grid.size] = _corrected_samples(measure, grid)
    return cache[grid.size]


def _corrected_samples(measure, grid: QuadratureGrid) -> tuple[np.ndarray, list[tuple[complex, np.ndarray]]]:
    n = measure.n
    dens, ok = measure.ac_many(grid.thetas)
    dens = np.where(ok[:, None, None], dens, 0.0)
    size = grid.size
    fixes = []
    for k in np.nonzero(~ok)[0]:
        near = [(k + d) % size for d in range(-4, 5) if d]
        if not ok[near].all():
            log.info("undefined density run near node %d left out of the quadrature", k)
            continue
        total = np.zeros(2 * n * n)
        for sign in (-1, 1):
            w = [dens[(k + sign * d) % size].reshape(-1) for d in (1, 2, 4)]
            total += _side_correction(*[np.concatenate([v.real, v.imag]) for v in w])
        c = (total[: n * n] + 1j * total[n * n :]).reshape(n, n) / size
        fixes.append((complex(grid.nodes[k]), c))
    return dens, fixes


def herglotz_residual(f, measure, z: complex, grid: QuadratureGrid | None = None) -> float:
    """``||H(z) - i Im H(0) - sum atoms - quadrature of the density||``."""
    z = complex(z)
    if abs(z) > 0.9 + 1e-12:
        raise ValueError("herglotz_residual needs |z| <= 0.9")
    grid = grid or QuadratureGrid()
    h = _direct_herglotz(f.b, f.alpha, z)
    h0 = _direct_herglotz(f.b, f.alpha, 0.0)
    # i Im H(0) with Im M = (M - M*) / 2i
    rhs = 0.5 * (h0 - h0.conj().T)
    for a in measure.atoms:
        rhs = rhs + (a.lam + z) / (a.lam - z) * a.mass
    dens, fixes = _ac_samples(measure, grid)
    zeta = grid.nodes
    kern = (zeta + z) / (zeta - z) * grid.weights
    rhs = rhs + np.tensordot(kern, dens, axes=(0, 0))
    for lam, c in fixes:
        rhs = rhs + (lam + z) / (lam - z) * c
    return float(np.linalg.norm(h - rhs, 2))


def cauchy_transform(measure, z: complex, grid: QuadratureGrid | None = None) -> np.ndarray:
    """``int (1 - conj(zeta) z)^{-1} dmu(zeta)`` as atom sum plus trapezoid quadrature."""
    z = complex(z)
    if not abs(z) < 1.0:
        raise ValueError("cauchy_transform needs |z| < 1")
    grid = grid or QuadratureGrid()
    out = np.zeros((measure.n, measure.n), dtype=complex)
    for a in measure.atoms:
        out = out + a.mass / (1.0 - np.conj(a.lam) * z)
    dens, fixes = _ac_samples(measure, grid)
    kern = grid.weights / (1.0 - np.conj(grid.nodes) * z)
    for lam, c in fixes:
        out = out + c / (1.0 - np.conj(lam) * z)
    return out + np.tensordot(kern, dens, axes=(0, 0))


def cauchy_identity_residual(f, measure, z: complex, grid: QuadratureGrid | None = None) -> float:
    """``||(I - b alpha*)^{-1} - (I - H(0)*)/2 - C mu(z)||``."""
    a = np.asarray(f.b.eval(complex(z))) @ f.alpha.conj().T
    eye = np.eye(a.shape[0])
    res = np.linalg.inv(eye - a)
    h0 = _direct_herglotz(f.b, f.alpha, 0.0)
    return float(np.linalg.norm(res - 0.5 * (eye - h0.conj().T) - cauchy_transform(measure, z, grid), 2))


@dataclass
class ReferenceAtoms:
    """Closed-form atoms of a scalar Blaschke frame."""

    locations: np.ndarray
    masses: np.ndarray
    total: float
    discarded: int

    @property
    def checksum(self) -> float:
        return float(abs(self.masses.sum() - self.total))


def scalar_reference_atoms(zeros: Sequence[complex], alpha: complex, phase: complex = 1.0) -> ReferenceAtoms:
    """Atoms of the Clark measure of ``phase * prod (z - w)/(1 - conj(w) z)`` at ``alpha``.

    Atoms are the unimodular roots of ``phase prod (z - w) - alpha prod (1 - conj(w) z)``
    (companion-matrix eigenvalues); masses are ``alpha conj(lam) / b'(lam)``.
    """
    w = np.asarray(list(zeros), dtype=complex)
    if w.size == 0 or w.size > MAX_DEGREE:
        raise ValueError(f"degree must be between 1 and {MAX_DEGREE}")
    if np.any(np.abs(w) >= 1):
        raise ValueError("zeros must lie in the open disc")
    alpha, phase = complex(alpha), complex(phase)
    num = phase * np.poly(w)
    den = np.poly(1.0 / np.conj(w[w != 0])) if np.any(w != 0) else np.ones(1)
    # prod (1 - conj(w) z) = prod(-conj(w)) * prod (z - 1/conj(w)) over nonzero w
    den = den * np.prod(-np.conj(w[w != 0]))
    den = np.concatenate([np.zeros(len(num) - len(den)), den])
    roots = np.roots(num - alpha * den)
    on_circle = np.abs(np.abs(roots) - 1.0) <= UNIT_TOL
    if not on_circle.all():
        log.info("discarding %d roots off the unit circle", int((~on_circle).sum()))
    lam = roots[on_circle] / np.abs(roots[on_circle])
    if np.any(np.abs(np.abs(roots[on_circle]) - 1.0) > 1e-10):
        log.warning("root modulus deviates from 1 by more than 1e-10")
    # b'(lam)/b(lam) = sum (1 - |w|^2) / ((lam - w)(1 - conj(w) lam)) and b(lam) = alpha
    logder = np.sum((1 - np.abs(w) ** 2) / ((lam[:, None] - w) * (1 - np.conj(w) * lam[:, None])), axis=1)
    masses = (alpha * np.conj(lam) / (alpha * logder)).real
    order = np.argsort(np.mod(np.angle(lam), 2.0 * np.pi))
    b0 = phase * np.prod(-w)
    total = float(((1 - abs(b0) ** 2) / abs(1 - b0 * np.conj(alpha)) ** 2))
    return ReferenceAtoms(lam[order], masses[order], total, int((~on_circle).sum()))


@dataclass
class H2Estimate:
    radii: np.ndarray
    norms: np.ndarray
    bounded: bool

    @property
    def value(self) -> float:
        return float(self.norms.max())


def h2_norm_estimate(g: Callable[[np.ndarray], np.ndarray], k: int = 8, n: int = 4096) -> H2Estimate:
    """Circle ``L^2`` norms of ``g`` on ``r = 1 - 2^-j``, ``j = 1..k``.

    ``g`` maps an array of points of shape ``(n,)`` to values of shape
    ``(n, ...)``.  The estimate is "bounded" when the last three norms agree
    within 10%.
    """
    if k < 3:
        raise ValueError("need at least three radii")
    grid = QuadratureGrid(n)
    radii = 1.0 - 2.0 ** -np.arange(1, k + 1)
    norms = np.empty(k)
    for j, r in enumerate(radii):
        v = np.asarray(g(r * grid.nodes)).reshape(n, -1)
        norms[j] = np.sqrt(np.sum(np.abs(v) ** 2) / n)
    tail = norms[-3:]
    bounded = bool(np.all(np.isfinite(tail)) and tail.max() <= 1.1 * tail.min())
    return H2Estimate(radii, norms, bounded)

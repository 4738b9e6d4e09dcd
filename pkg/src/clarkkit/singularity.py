"""Vector mutual singularity of Clark measures and the alpha(t) sweep.

For a shared atom ``lam`` of ``mu = mu^I`` and ``mu^alpha`` the ranges must
satisfy ``P_{Ran mu{lam}} (I - alpha*) P_{Ran mu^alpha{lam}} = 0``.  The
overlap reported is the operator norm of that product.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .atoms import MatrixMeasure, clark_measure, confirmed_point_mass
from .herglotz import ClarkFrame
from .linalg import Subspace, is_unitary, opnorm, proj, range_basis
from .schur import Blaschke, DirectSum, SchurFunction

__all__ = [
    "SharedAtom",
    "SingularityReport",
    "SweepEntry",
    "SweepReport",
    "alpha_sweep",
    "engineered_shared_atom",
    "shared_atoms",
    "sweep_csv",
    "vector_mutual_singularity",
]

RANGE_RTOL = 1e-6


def _angle_gap(a: complex, b: complex) -> float:
    return abs(math.remainder(float(np.angle(a)) - float(np.angle(b)), 2.0 * math.pi))


def shared_atoms(m1: MatrixMeasure, m2: MatrixMeasure, tol_angle: float = 1e-8) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)`` of atoms of ``m1`` and ``m2`` closer than ``tol_angle``."""
    if m1.n != m2.n:
        raise ValueError("measures have different dimensions")
    pairs = []
    for i, a in enumerate(m1.atoms):
        for j, b in enumerate(m2.atoms):
            if _angle_gap(a.lam, b.lam) <= tol_angle:
                pairs.append((i, j))
    return pairs


@dataclass
class SharedAtom:
    lam: complex
    range_mu: Subspace
    range_mu_alpha: Subspace
    overlap: float
    status: str

    def to_json(self) -> dict:
        return {
            "theta": float(np.angle(self.lam)),
            "range_mu": self.range_mu.to_json(),
            "range_mu_alpha": self.range_mu_alpha.to_json(),
            "overlap": self.overlap,
            "status": self.status,
        }


@dataclass
class SingularityReport:
    shared: list[SharedAtom]
    tol: float
    inconclusive: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(s.overlap < self.tol for s in self.shared) and not self.inconclusive

    @property
    def max_overlap(self) -> float:
        return max((s.overlap for s in self.shared), default=0.0)

    def to_json(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "tol": self.tol,
            "max_overlap": self.max_overlap,
            "shared_atoms": [s.to_json() for s in self.shared],
            "inconclusive": self.inconclusive,
        }


def vector_mutual_singularity(
    b: SchurFunction,
    alpha: np.ndarray,
    tol: float = 1e-5,
    grid_size: int = 4096,
    tol_angle: float = 1e-8,
) -> SingularityReport:
    """Check the range orthogonality at every atom shared by ``mu^I`` and ``mu^alpha``."""
    alpha = np.asarray(alpha, dtype=complex).reshape(b.n, b.n)
    if not is_unitary(alpha, 1e-12):
        raise ValueError("alpha must be unitary")
    eye = np.eye(b.n)
    if opnorm(alpha - eye) < 1e-14:
        raise ValueError("alpha must differ from the identity")
    f1, f2 = ClarkFrame(b, eye), ClarkFrame(b, alpha)
    m1, m2 = clark_measure(f1, grid_size), clark_measure(f2, grid_size)
    notes = [f"mu: {len(m1.flagged)} flagged atom candidates"] if m1.flagged else []
    if m2.flagged:
        notes.append(f"mu^alpha: {len(m2.flagged)} flagged atom candidates")
    out = []
    for i, j in shared_atoms(m1, m2, tol_angle):
        a1, a2 = m1.atoms[i], m2.atoms[j]
        r1 = range_basis(a1.mass, RANGE_RTOL)
        r2 = range_basis(a2.mass, RANGE_RTOL)
        ov = opnorm(proj(r1) @ (eye - alpha.conj().T) @ proj(r2))
        status = "converged" if a1.status == a2.status == "converged" else "flagged"
        out.append(SharedAtom(a1.lam, r1, r2, ov, status))
        if status != "converged":
            notes.append(f"atom at theta={np.angle(a1.lam):.12g} has an unconverged mass")
    return SingularityReport(out, tol, notes)


def engineered_shared_atom(rng: np.random.Generator, n: int = 2, degree: int = 3) -> tuple[SchurFunction, np.ndarray, complex]:
    """A direct sum of scalar Blaschke products and a unitary ``alpha`` sharing an atom at a random ``lam0``.

    The first summand is rotated so that ``b(lam0) e_1 = e_1``; ``alpha`` is
    ``b(lam0) R`` with ``R`` fixing a random unit vector and rotating its
    complement by a random phase, so ``b(lam0) alpha*`` has eigenvalue 1.
    """
    lam0 = np.exp(2j * np.pi * rng.random())
    parts = []
    for k in range(n):
        deg = int(rng.integers(1, degree + 1))
        zeros = 0.8 * np.sqrt(rng.random(deg)) * np.exp(2j * np.pi * rng.random(deg))
        zeros[0] = 0.0
        raw = Blaschke(tuple(zeros))
        if k == 0:
            v = complex(raw._values(np.asarray(lam0))[0, 0])
            phase = np.conj(v) / abs(v)
        else:
            phase = np.exp(2j * np.pi * rng.random())
        parts.append(Blaschke(tuple(zeros), phase))
    b = DirectSum(tuple(parts))
    b_lam0 = b._values(np.asarray(lam0))
    e = rng.normal(size=n) + 1j * rng.normal(size=n)
    e /= np.linalg.norm(e)
    pe = np.outer(e, e.conj())
    r = pe + np.exp(2j * np.pi * rng.uniform(0.05, 0.95)) * (np.eye(n) - pe)
    alpha = b_lam0 @ r
    # re-unitarize against roundoff in the boundary value
    u, _, vh = np.linalg.svd(alpha)
    return b, u @ vh, complex(lam0)


@dataclass
class SweepEntry:
    t: float
    trace_mass: float
    status: str


@dataclass
class SweepReport:
    entries: list[SweepEntry]
    tol: float

    @property
    def hits(self) -> list[float]:
        return [e.t for e in self.entries if e.status == "converged" and e.trace_mass > self.tol]

    @property
    def flagged(self) -> list[float]:
        return [e.t for e in self.entries if e.status != "converged"]

    def hit_runs(self) -> list[tuple[int, int]]:
        """Maximal runs ``(start, stop)`` of consecutive sample indices that are hits."""
        runs = []
        start = None
        for k, e in enumerate(self.entries):
            hit = e.status == "converged" and e.trace_mass > self.tol
            if hit and start is None:
                start = k
            if not hit and start is not None:
                runs.append((start, k))
                start = None
        if start is not None:
            runs.append((start, len(self.entries)))
        return runs


def alpha_sweep(
    b: SchurFunction,
    alpha0: np.ndarray,
    a: np.ndarray,
    t_samples,
    probe: complex,
    tol: float = 1e-6,
) -> SweepReport:
    """Trace of ``mu^{alpha(t)}{probe}`` for ``alpha(t) = exp(i t A) alpha0``.

    ``A`` must be Hermitian and sign definite.
    """
    a = np.asarray(a, dtype=complex)
    if opnorm(a - a.conj().T) > 1e-12:
        raise ValueError("A must be Hermitian")
    ev = np.linalg.eigvalsh(a)
    if not (np.all(ev > 0) or np.all(ev < 0)):
        raise ValueError("A must be sign definite")
    alpha0 = np.asarray(alpha0, dtype=complex)
    entries = []
    for t in np.asarray(t_samples, dtype=float):
        alpha = expm(1j * t * a) @ alpha0
        pm = confirmed_point_mass(ClarkFrame(b, alpha), probe)
        entries.append(SweepEntry(float(t), pm.trace, pm.limit.status))
    return SweepReport(entries, tol)


def sweep_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "trace_mass_at_probe", "flag"])
    for e in report.entries:
        hit = e.status == "converged" and e.trace_mass > report.tol
        flag = e.status if e.status != "converged" else ("hit" if hit else "ok")
        w.writerow([repr(e.t), repr(e.trace_mass), flag])
    return buf.getvalue()

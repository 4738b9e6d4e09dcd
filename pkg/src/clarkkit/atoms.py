"""Atoms of Clark measures, directional carriers and the assembled measure.

The point mass at ``lam`` is the nontangential limit of
``(1 - z conj(lam)) (I - b(z) alpha*)^{-1}``.  Atoms are located by scanning
``sigma_min(I - b(r lam) alpha*)`` near the circle, refining each local
minimum, and confirming with the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .herglotz import ClarkFrame, ac_density, ac_density_grid, herglotz
from .limits import DEFAULT_TOL, LimitResult, make_path, nt_limit
from .linalg import Subspace, hermitian_part, matrix_to_json, opnorm

__all__ = [
    "Atom",
    "AtomScan",
    "CarrierDiagnostics",
    "CarrierResult",
    "MatrixMeasure",
    "PointMass",
    "carrier_diagnostics",
    "clark_measure",
    "confirmed_point_mass",
    "directional_carrier",
    "find_atoms",
    "point_mass",
    "scan_atoms",
]

MASS_TOL = 1e-10
# confirmation retries looser tolerances for slowly converging limits
CONFIRM_TOLS = (1e-10, 1e-8, 1e-6)
SCAN_RADIUS = 1.0 - 1e-4
REFINE_RADIUS = 1.0 - 1e-6
POLISH_RADIUS = 1.0 - 1e-13
SCAN_THRESHOLD = 0.1
ASYMMETRY_WARN = 1e-4
CARRIER_TOL = 1e-6


@dataclass
class PointMass:
    """Symmetrized Nevanlinna limit with its diagnostics."""

    lam: complex
    value: np.ndarray
    limit: LimitResult
    asymmetry: float
    tol: float = MASS_TOL

    @property
    def converged(self) -> bool:
        return self.limit.converged

    @property
    def trace(self) -> float:
        return float(np.trace(self.value).real)

    @property
    def confident(self) -> bool:
        return self.converged and self.asymmetry <= ASYMMETRY_WARN * max(self.trace, 1e-300)

    def to_json(self) -> dict:
        return {
            "theta": float(np.angle(self.lam)),
            "mass": matrix_to_json(self.value),
            "status": self.limit.status,
            "est_error": self.limit.to_json()["est_error"],
            "asymmetry": float(self.asymmetry),
            "tol": self.tol,
        }


def point_mass(f: ClarkFrame, lam: complex, tol: float = MASS_TOL, psi: float = 0.0) -> PointMass:
    """``mu^alpha{lam}`` as the limit of ``(1 - z conj(lam)) (I - b(z) alpha*)^{-1}``.

    A non-converged limit is returned with ``converged`` False; callers must
    not treat its value as zero.
    """
    lam = complex(lam)
    lam /= abs(lam)
    eye = f.eye

    def g(z):
        return (1.0 - z * lam.conjugate()) * np.linalg.inv(eye - f.a(z))

    res = nt_limit(g, make_path(lam, psi=psi), tol)
    v = np.atleast_2d(np.asarray(res.value, dtype=complex))
    asym = opnorm(v - v.conj().T) / 2.0
    return PointMass(lam, hermitian_part(v), res, asym, tol)


def confirmed_point_mass(f: ClarkFrame, lam: complex) -> PointMass:
    """Point mass at the tightest tolerance in ``CONFIRM_TOLS`` that converges."""
    pm = point_mass(f, lam, CONFIRM_TOLS[0])
    for tol in CONFIRM_TOLS[1:]:
        if pm.converged:
            break
        pm = point_mass(f, lam, tol)
    return pm


def _sigma_min(f: ClarkFrame, z: np.ndarray) -> np.ndarray:
    m = f.eye - f.a_many(z)
    return np.linalg.svd(m, compute_uv=False)[..., -1]


def _nearest_unit_eigen_phase(f: ClarkFrame, theta: float) -> float:
    """Phase of the eigenvalue of ``b alpha*`` closest to 1, just inside the circle."""
    ev = np.linalg.eigvals(f.a(POLISH_RADIUS * np.exp(1j * theta)))
    return float(np.angle(ev[np.argmin(np.abs(ev - 1.0))]))


def _refine(f: ClarkFrame, lo: float, mid: float, hi: float) -> float:
    def obj(t):
        return float(_sigma_min(f, np.asarray(REFINE_RADIUS * np.exp(1j * t))))

    try:
        res = optimize.minimize_scalar(obj, bracket=(lo, mid, hi), method="golden", tol=1e-12)
        theta = float(res.x)
    except ValueError:
        theta = mid
    # polish on the eigenvalue phase, which crosses zero linearly at an atom
    step = 1e-5
    try:
        a, c = theta - step, theta + step
        pa, pc = _nearest_unit_eigen_phase(f, a), _nearest_unit_eigen_phase(f, c)
        if pa * pc < 0 and abs(pa) < 0.5 and abs(pc) < 0.5:
            theta = optimize.brentq(lambda t: _nearest_unit_eigen_phase(f, t), a, c, xtol=1e-15)
    except (ValueError, np.linalg.LinAlgError):
        pass
    return theta


@dataclass
class AtomScan:
    """Outcome of :func:`scan_atoms`."""

    atoms: list[PointMass]
    subthreshold: list[PointMass]
    flagged: list[PointMass]
    candidates: int

    @property
    def locations(self) -> list[complex]:
        return [a.lam for a in self.atoms]


def scan_atoms(f: ClarkFrame, grid_size: int = 4096, tol: float = 1e-6) -> AtomScan:
    """Scan, refine and confirm atoms.

    Local minima of ``sigma_min(I - b(r lam) alpha*)`` on the grid are kept if
    they are below 0.1 or sharp enough that the V-shaped profile could reach
    zero within one grid step.  Atoms finer than the grid can still be missed.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    thetas = 2.0 * np.pi * np.arange(grid_size) / grid_size
    s = _sigma_min(f, SCAN_RADIUS * np.exp(1j * thetas))
    left, right = np.roll(s, 1), np.roll(s, -1)
    is_min = (s <= left) & (s <= right) & (s < np.maximum(left, right))
    jump = np.maximum(left - s, right - s)
    keep = is_min & ((s < SCAN_THRESHOLD) | (s <= jump))
    h = thetas[1]
    found: list[PointMass] = []
    sub: list[PointMass] = []
    flagged: list[PointMass] = []
    seen: list[float] = []
    for i in np.nonzero(keep)[0]:
        theta = _refine(f, thetas[i] - h, thetas[i], thetas[i] + h)
        theta = math.remainder(theta, 2.0 * np.pi)
        if any(abs(math.remainder(theta - t, 2.0 * np.pi)) < 1e-9 for t in seen):
            continue
        seen.append(theta)
        pm = confirmed_point_mass(f, np.exp(1j * theta))
        if not pm.converged:
            flagged.append(pm)
        elif pm.trace > tol:
            found.append(pm)
        elif pm.trace > 0.0:
            sub.append(pm)
    order = lambda p: float(np.angle(p.lam)) % (2.0 * np.pi)  # noqa: E731
    return AtomScan(sorted(found, key=order), sorted(sub, key=order), flagged, int(keep.sum()))


def find_atoms(f: ClarkFrame, grid_size: int = 4096, tol: float = 1e-6) -> list[complex]:
    """Atom locations with mass trace above ``tol``, sorted by angle in ``[0, 2 pi)``."""
    return scan_atoms(f, grid_size, tol).locations


@dataclass
class CarrierResult:
    subspace: Subspace
    method: str
    certified: bool
    diagnostic: str = ""


def directional_carrier(
    f: ClarkFrame, lam: complex, tol: float = CARRIER_TOL, mass: PointMass | None = None
) -> CarrierResult:
    """Maximal subspace on which ``lim b(z)* e = alpha* e``.

    The boundary value of ``b*`` is computed once; the carrier is the
    numerical null space of ``lim b* - alpha*``.  Each basis vector is then
    re-tested individually.  If the full limit does not converge, single
    directions from the eigenbasis of the point mass are tested instead and
    the result is marked uncertified.
    """
    lam = complex(lam)
    n = f.n
    path = make_path(lam)
    alpha_h = f.alpha.conj().T
    full = nt_limit(lambda z: f.b.eval(z).conj().T, path, DEFAULT_TOL)
    if full.converged:
        m = np.asarray(full.value) - alpha_h
        _, s, vh = np.linalg.svd(m)
        null = vh.conj().T[:, s <= tol]
        basis = Subspace(null) if null.shape[1] else Subspace.zero(n)
        bad = [j for j in range(basis.dim) if not _direction_ok(f, path, basis.basis[:, j], tol)]
        if bad:
            return CarrierResult(basis, "boundary-value", False, f"{len(bad)} basis vectors failed the direct test")
        return CarrierResult(basis, "boundary-value", True)
    if mass is None:
        mass = point_mass(f, lam)
    _, vecs = np.linalg.eigh(mass.value)
    passing = [vecs[:, j] for j in range(n) if _direction_ok(f, path, vecs[:, j], tol)]
    sub = Subspace.span(np.stack(passing, axis=1)) if passing else Subspace.zero(n)
    return CarrierResult(sub, "eigen-directions", False, f"boundary value of b is {full.status}")


def _direction_ok(f: ClarkFrame, path, e: np.ndarray, tol: float) -> bool:
    res = nt_limit(lambda z: f.b.eval(z).conj().T @ e, path, DEFAULT_TOL)
    if not res.converged:
        return False
    return bool(np.linalg.norm(np.asarray(res.value) - f.alpha.conj().T @ e) <= tol * max(1.0, np.linalg.norm(e)))


@dataclass
class CarrierDiagnostics:
    s_diverges: bool
    s_status: str
    p_limit: complex
    p_status: str

    def to_json(self) -> dict:
        return {
            "S_diverges": self.s_diverges,
            "S_status": self.s_status,
            "P_limit": [float(self.p_limit.real), float(self.p_limit.imag)],
            "P_status": self.p_status,
        }


def carrier_diagnostics(f: ClarkFrame, lam: complex, tol: float = MASS_TOL) -> CarrierDiagnostics:
    """Trace tests for the singular carrier at ``lam``.

    ``S_diverges`` is the divergence verdict for ``tr Re (I - b alpha*)^{-1}``;
    ``P_limit`` the limit of ``tr (z - lam)(I - b alpha*)^{-1}``, which equals
    ``-lam tr mu^alpha{lam}``.
    """
    lam = complex(lam)
    path = make_path(lam)
    eye = f.eye

    def tr_re(z):
        return np.trace(hermitian_part(np.linalg.inv(eye - f.a(z)))).real

    def tr_p(z):
        return np.trace((z - lam) * np.linalg.inv(eye - f.a(z)))

    s = nt_limit(tr_re, path, tol)
    p = nt_limit(tr_p, path, tol)
    pv = complex(p.value) if p.converged else complex("nan")
    if p.converged and abs(pv) < 1e-12:
        pv = 0j
    return CarrierDiagnostics(s.diverging, s.status, pv, p.status)


@dataclass
class Atom:
    lam: complex
    mass: np.ndarray
    status: str
    # convergence tolerance of the Nevanlinna limit behind ``mass``
    tol: float = MASS_TOL

    @property
    def theta(self) -> float:
        return float(np.angle(self.lam))


@dataclass
class MatrixMeasure:
    """Finite matrix measure: atoms, an AC density sampler and the total mass."""

    n: int
    atoms: list[Atom]
    total: np.ndarray
    ac: Callable[[complex], np.ndarray] | None = None
    ac_many: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    sc_flag: str = "assumed absent"
    flagged: list[PointMass] = field(default_factory=list)
    subthreshold: list[PointMass] = field(default_factory=list)

    def atom_sum(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        for a in self.atoms:
            out = out + a.mass
        return out

    def check_invariants(self) -> list[str]:
        problems = []
        for a in self.atoms:
            ev = np.linalg.eigvalsh(hermitian_part(a.mass))
            # the limit is only known to its relative tolerance
            scale = max(1.0, float(np.abs(ev).max()))
            if ev.min() < -max(1e-10 * np.trace(a.mass).real, 10.0 * a.tol * scale):
                problems.append(f"atom at theta={a.theta:.12g} is not PSD")
        gap = hermitian_part(self.total - self.atom_sum())
        if np.linalg.eigvalsh(gap).min() < -1e-8:
            problems.append("atom masses exceed the total mass")
        return problems

    def to_json(self, ac_grid: int = 0) -> dict:
        out = {
            "n": self.n,
            "atoms": [
                {"theta": a.theta, "mass": matrix_to_json(a.mass), "status": a.status} for a in self.atoms
            ],
            "total": matrix_to_json(self.total),
            "sc_flag": self.sc_flag,
            "flagged": [p.to_json() for p in self.flagged],
            "subthreshold": [p.to_json() for p in self.subthreshold],
        }
        if ac_grid and self.ac_many is not None:
            thetas = 2.0 * np.pi * np.arange(ac_grid) / ac_grid
            dens, ok = self.ac_many(thetas)
            out["ac_grid"] = {
                "thetas": thetas.tolist(),
                "densities": [matrix_to_json(d) if k else None for d, k in zip(dens, ok)],
            }
        return out


def clark_measure(f: ClarkFrame, grid_size: int = 4096, tol: float = 1e-6) -> MatrixMeasure:
    """Assemble ``mu^alpha``: located atoms, AC density sampler and total mass ``Re H(0)``."""
    scan = scan_atoms(f, grid_size, tol)
    atoms = [Atom(p.lam, p.value, p.limit.status, p.tol) for p in scan.atoms]
    total = hermitian_part(herglotz(f, 0.0))
    return MatrixMeasure(
        n=f.n,
        atoms=atoms,
        total=total,
        ac=lambda lam: ac_density(f, lam),
        ac_many=lambda thetas: ac_density_grid(f, thetas),
        flagged=scan.flagged,
        subthreshold=scan.subthreshold,
    )

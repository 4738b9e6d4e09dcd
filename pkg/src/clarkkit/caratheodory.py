"""Caratheodory conditions, boundary kernels and angular derivatives on subspaces.

Everything is frame-relative: the function under study is ``A(z) = b(z) alpha*``.

* The Caratheodory quotient in codirection ``x`` is
  ``(|x|^2 - |A(z)* x|^2) / (1 - |z|^2)``.
* The boundary kernel is ``k(z) = (x - A(z) x~) / (1 - z conj(lam))`` with
  ``x~ = lim A(z)* x``.
* The angular derivative on ``E`` is the limit of
  ``P_E (A(z) - I) / (z - lam) P_E``, equivalently of ``P_E A'(z) P_E``.

Its Moore--Penrose inverse is ``lam mu^alpha{lam}``, and the Gram matrix of
the boundary kernels on ``E`` equals ``lam`` times the angular derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atoms import confirmed_point_mass, directional_carrier
from .herglotz import ClarkFrame
from .limits import LimitResult, StolzPath, make_path, nt_limit
from .linalg import Subspace, opnorm, pinv, principal_angles, proj, range_basis
from .oracle import h2_norm_estimate

__all__ = [
    "BoundaryKernel",
    "CadResult",
    "CaraReport",
    "CodirectionResult",
    "GramResult",
    "boundary_gram",
    "boundary_kernel",
    "cad",
    "cara_condition",
    "codirection_space",
    "one_sided_compressions",
    "verify_cad_pointmass",
]

CARA_STEPS = 30
CARA_GROWTH = 1.05
CARA_WINDOW = 5
LIMIT_TOL = 1e-8
UNIMODULAR_TOL = 1e-6
CAD_TOL = 1e-6
CAD_AGREE = 1e-4
MASS_RTOL = 1e-6
ANGLE_TOL = 1e-4


def _vec(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=complex).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"vector must have length {n}")
    return v


@dataclass
class CaraReport:
    """Verdict of the Caratheodory condition in one codirection."""

    satisfied: bool
    sup_quotient: float
    quotient_bounded: bool
    b_star_limit: np.ndarray | None
    b_star_status: str
    h2_bounded: bool
    consistent: bool
    diagnostic: str = ""
    quotients: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def flagged(self) -> bool:
        return not self.consistent or bool(self.diagnostic)

    def to_json(self) -> dict:
        out = {
            "satisfied": self.satisfied,
            "sup_quotient": self.sup_quotient if math.isfinite(self.sup_quotient) else None,
            "quotient_bounded": self.quotient_bounded,
            "b_star_status": self.b_star_status,
            "h2_bounded": self.h2_bounded,
            "consistent": self.consistent,
        }
        if self.b_star_limit is not None:
            out["b_star_limit"] = {"re": self.b_star_limit.real.tolist(), "im": self.b_star_limit.imag.tolist()}
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def _quotients(f: ClarkFrame, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    ah = np.conj(np.swapaxes(f.a_many(z), -1, -2))
    y = ah @ x
    num = np.vdot(x, x).real - np.sum(np.abs(y) ** 2, axis=-1)
    return num / (1.0 - np.abs(z) ** 2)


def cara_condition(f: ClarkFrame, lam: complex, x, steps: int = CARA_STEPS) -> CaraReport:
    """Test the Caratheodory condition for ``b alpha*`` at ``lam`` in codirection ``x``.

    Satisfied when the quotient stops growing (factor below 1.05 over the
    last five radial steps) and ``lim A(z)* x`` converges.  The verdict is
    cross-checked against boundedness of the circle ``L^2`` norms of
    ``(x - A(z) x~) / (1 - z conj(lam))``; disagreement is flagged.
    """
    lam = complex(lam)
    x = _vec(x, f.n)
    if np.linalg.norm(x) == 0:
        raise ValueError("codirection must be nonzero")
    path = make_path(lam, max_steps=steps)
    zs = path.points()
    q = _quotients(f, x, zs)
    tail = q[-(CARA_WINDOW + 1) :]
    if tail[0] > 0:
        growth = tail[-1] / tail[0]
    else:
        growth = math.inf if tail[-1] > 0 else 1.0
    bounded = bool(np.all(np.isfinite(q)) and growth < CARA_GROWTH)
    lim = nt_limit(lambda z: f.a(z).conj().T @ x, make_path(lam), LIMIT_TOL)
    x_tilde = np.asarray(lim.value, dtype=complex).reshape(-1)
    satisfied = bounded and lim.converged

    def kernel(z):
        return (x[None, :] - f.a_many(z) @ x_tilde) / (1.0 - z * lam.conjugate())[:, None]

    h2 = h2_norm_estimate(kernel).bounded
    diagnostic = ""
    if satisfied and abs(np.linalg.norm(x_tilde) - np.linalg.norm(x)) > UNIMODULAR_TOL * np.linalg.norm(x):
        diagnostic = "boundary action is not isometric on x"
    consistent = h2 == bounded
    if not consistent:
        diagnostic = (diagnostic + "; " if diagnostic else "") + (
            "quotient and H2 criteria disagree; tighten the limit tolerance or lengthen the path"
        )
    return CaraReport(
        satisfied=satisfied,
        sup_quotient=float(np.max(q)),
        quotient_bounded=bounded,
        b_star_limit=x_tilde if lim.converged else None,
        b_star_status=lim.status,
        h2_bounded=h2,
        consistent=consistent,
        diagnostic=diagnostic,
        quotients=q,
    )


@dataclass
class BoundaryKernel:
    """``z -> (x - A(z) x~) / (1 - z conj(lam))`` with its squared norm in the model space."""

    frame: ClarkFrame
    lam: complex
    x: np.ndarray
    x_tilde: np.ndarray
    norm_sq: LimitResult
    h2_norm: float

    def __call__(self, z: complex) -> np.ndarray:
        z = complex(z)
        return (self.x - self.frame.a(z) @ self.x_tilde) / (1.0 - z * self.lam.conjugate())


def boundary_kernel(f: ClarkFrame, lam: complex, x) -> BoundaryKernel:
    """Boundary reproducing kernel at ``lam`` in codirection ``x``.

    Raises
    ------
    ValueError
        If the Caratheodory condition fails for ``(lam, x)``.
    """
    lam = complex(lam)
    x = _vec(x, f.n)
    rep = cara_condition(f, lam, x)
    if not rep.satisfied:
        raise ValueError("Caratheodory condition fails; no boundary kernel at this codirection")
    xt = rep.b_star_limit
    norm_sq = nt_limit(lambda z: float(_quotients(f, x, np.asarray([z]))[0]), make_path(lam), 1e-6)

    def g(z):
        return (x[None, :] - f.a_many(z) @ xt) / (1.0 - z * lam.conjugate())[:, None]

    return BoundaryKernel(f, lam, x, xt, norm_sq, h2_norm_estimate(g).value)


@dataclass
class CodirectionResult:
    subspace: Subspace
    definitional: Subspace
    max_angle: float
    consistent: bool
    mass_status: str
    diagnostic: str = ""


def _bounded_directions(f: ClarkFrame, lam: complex, steps: int = CARA_STEPS) -> Subspace:
    """Eigen-directions of ``(I - A A*) / (1 - |z|^2)`` that stay bounded along the radius."""
    zs = make_path(lam, max_steps=steps).points()
    n = f.n

    def form(z):
        a = f.a(z)
        m = (np.eye(n) - a @ a.conj().T) / (1.0 - abs(z) ** 2)
        return 0.5 * (m + m.conj().T)

    m1, m2 = form(zs[-2]), form(zs[-1])
    w2, v2 = np.linalg.eigh(m2)
    # compare Rayleigh quotients one step apart; unbounded directions grow by ~1/q
    r1 = np.real(np.einsum("ij,ik,kj->j", v2.conj(), m1, v2))
    keep = w2 <= 1.5 * np.maximum(r1, 1e-300)
    keep &= w2 < 1e6
    return Subspace(v2[:, keep]) if keep.any() else Subspace.zero(n)


def _intersect(e: Subspace, s: Subspace, tol: float = 1e-6) -> Subspace:
    if e.dim == 0 or s.dim == 0:
        return Subspace.zero(e.n)
    # x = E c lies in S iff (I - P_S) E c = 0
    m = (np.eye(e.n) - proj(s)) @ e.basis
    _, sv, vh = np.linalg.svd(m)
    sv = np.concatenate([sv, np.zeros(e.dim - sv.size)])
    null = vh.conj().T[:, sv <= tol]
    if null.shape[1] == 0:
        return Subspace.zero(e.n)
    return Subspace.span(e.basis @ null)


def codirection_space(f: ClarkFrame, lam: complex) -> CodirectionResult:
    """Subspace of Caratheodory codirections at ``lam``.

    Primary route: the range of the point mass.  Cross-check: directions
    along which the Caratheodory quotient stays bounded, intersected with the
    directional carrier, each basis vector passing :func:`cara_condition`.
    """
    lam = complex(lam)
    pm = confirmed_point_mass(f, lam)
    primary = range_basis(pm.value, MASS_RTOL) if pm.trace > 1e-12 else Subspace.zero(f.n)
    carrier = directional_carrier(f, lam, mass=pm).subspace
    definitional = _intersect(_bounded_directions(f, lam), carrier)
    notes = []
    if not pm.converged:
        notes.append(f"point mass limit {pm.limit.status}")
    for j in range(definitional.dim):
        if not cara_condition(f, lam, definitional.basis[:, j]).satisfied:
            notes.append(f"basis vector {j} fails the Caratheodory test")
    if primary.dim != definitional.dim:
        angle = math.inf
    elif primary.dim == 0:
        angle = 0.0
    else:
        angle = float(np.max(principal_angles(primary, definitional)))
    consistent = angle < ANGLE_TOL and not notes
    if angle >= ANGLE_TOL:
        notes.append(f"routes disagree (max principal angle {angle:.3g})")
    return CodirectionResult(primary, definitional, angle, consistent, pm.limit.status, "; ".join(notes))


@dataclass
class CadResult:
    """Angular derivative on ``E`` in both limit forms."""

    subspace: Subspace
    on_e: np.ndarray
    quotient: LimitResult
    derivative: LimitResult
    agreement: float
    fixes_e: bool
    status: str
    diagnostic: str = ""

    @property
    def embedded(self) -> np.ndarray:
        b = self.subspace.basis
        return b @ self.on_e @ b.conj().T

    @property
    def confident(self) -> bool:
        return self.status == "converged"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "value_on_E": {"re": self.on_e.real.tolist(), "im": self.on_e.imag.tolist()},
            "quotient_form": self.quotient.to_json(),
            "derivative_form": self.derivative.to_json(),
            "agreement": self.agreement if math.isfinite(self.agreement) else None,
            "fixes_E": self.fixes_e,
            "diagnostic": self.diagnostic,
        }


def cad(
    f: ClarkFrame,
    lam: complex,
    e: Subspace,
    tol: float = CAD_TOL,
    path: StolzPath | None = None,
) -> CadResult:
    """Angular derivative of ``b alpha*`` at ``lam`` on ``E``, as a ``dim E`` square matrix in E's basis.

    Both the difference-quotient and derivative forms are computed; they must
    agree within 1e-4 and ``lim A(z) e = e`` must hold on ``E`` for a
    ``"converged"`` status.
    """
    lam = complex(lam)
    if e.dim == 0:
        raise ValueError("subspace must be nontrivial")
    if e.n != f.n:
        raise ValueError("subspace lives in the wrong dimension")
    path = path or make_path(lam)
    u = e.basis
    uh = u.conj().T
    eye = np.eye(e.dim)
    q = nt_limit(lambda z: (uh @ f.a(z) @ u - eye) / (z - lam), path, tol)
    d = nt_limit(lambda z: uh @ f.b.deriv(z) @ f.alpha.conj().T @ u, path, tol)
    fix = nt_limit(lambda z: f.a(z) @ u, path, LIMIT_TOL)
    fixes = bool(fix.converged and opnorm(np.asarray(fix.value) - u) < 1e-6)
    notes = []
    if q.converged and d.converged:
        agree = opnorm(np.asarray(q.value) - np.asarray(d.value))
        scale = max(1.0, opnorm(np.asarray(q.value)))
        status = "converged" if agree <= CAD_AGREE * scale else "disagree"
        if status == "disagree":
            notes.append(f"quotient and derivative forms differ by {agree:.3g}")
    else:
        agree = math.inf
        status = "diverging" if (q.diverging or d.diverging) else "inconclusive"
        notes.append(f"quotient form {q.status}, derivative form {d.status}")
    if not fixes:
        notes.append("A(z) does not fix E at the boundary")
        if status == "converged":
            status = "flagged"
    value = np.atleast_2d(np.asarray(q.value if q.converged else d.value, dtype=complex))
    return CadResult(e, value, q, d, agree, fixes, status, "; ".join(notes))


def verify_cad_pointmass(f: ClarkFrame, lam: complex) -> float:
    """``||pinv(CAD on Ran mu) - lam mu{lam}|| / ||mu{lam}||``.

    Raises
    ------
    ValueError
        If there is no atom at ``lam``.
    """
    lam = complex(lam)
    pm = confirmed_point_mass(f, lam)
    if not pm.converged:
        raise ValueError(f"point mass limit at {lam:.6g} is {pm.limit.status}")
    if opnorm(pm.value) <= 1e-12:
        raise ValueError("no atom at this point; nothing to verify")
    e = range_basis(pm.value, MASS_RTOL)
    res = cad(f, lam, e)
    if res.status not in ("converged", "disagree"):
        return math.inf
    return opnorm(pinv(res.embedded) - lam * pm.value) / opnorm(pm.value)


@dataclass
class GramResult:
    value: complex
    limit: LimitResult
    cad_entry: complex | None
    mismatch: float

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "status": self.limit.status,
            "lambda_times_cad": None if self.cad_entry is None else [self.cad_entry.real, self.cad_entry.imag],
            "mismatch": self.mismatch if math.isfinite(self.mismatch) else None,
        }


def boundary_gram(f: ClarkFrame, lam: complex, x, y, e: Subspace | None = None) -> GramResult:
    """``<k_{lam,x}, k_{lam,y}>`` as the diagonal limit of ``<(I - A A*) x, y> / (1 - |z|^2)``.

    Compared with ``lam <CAD x, y>`` on ``E`` (the range of the point mass
    unless given).  The diagonal limit of interior kernels equals
    ``lam * CAD``, not ``CAD`` itself, whenever ``lam != 1``.
    """
    lam = complex(lam)
    x = _vec(x, f.n)
    y = _vec(y, f.n)
    n = f.n

    def g(z):
        a = f.a(z)
        return np.vdot(y, (np.eye(n) - a @ a.conj().T) @ x) / (1.0 - abs(z) ** 2)

    lim = nt_limit(g, make_path(lam), 1e-8)
    if e is None:
        pm = confirmed_point_mass(f, lam)
        e = range_basis(pm.value, MASS_RTOL) if pm.trace > 1e-12 else Subspace.zero(n)
    cad_entry = None
    mismatch = math.inf
    if e.dim and e.contains(x, 1e-6) and e.contains(y, 1e-6):
        c = cad(f, lam, e)
        if c.status in ("converged", "disagree"):
            cad_entry = complex(lam * np.vdot(y, c.embedded @ x))
            if lim.converged:
                mismatch = abs(complex(lim.value) - cad_entry)
    return GramResult(complex(lim.value), lim, cad_entry, mismatch)


@dataclass
class CompressionReport:
    left: LimitResult
    right: LimitResult
    both: LimitResult

    @property
    def one_sided_diverge(self) -> bool:
        return self.left.diverging and self.right.diverging


def one_sided_compressions(f: ClarkFrame, lam: complex, e: Subspace, tol: float = 1e-3) -> CompressionReport:
    """Off-subspace blocks of ``(A - I)/(z - lam) P_E`` and ``P_E (A - I)/(z - lam)``, plus the two-sided compression."""
    lam = complex(lam)
    p = proj(e)
    q = np.eye(f.n) - p
    path = make_path(lam)

    def quot(z):
        return (f.a(z) - np.eye(f.n)) / (z - lam)

    left = nt_limit(lambda z: q @ quot(z) @ p, path, tol)
    right = nt_limit(lambda z: p @ quot(z) @ q, path, tol)
    both = nt_limit(lambda z: p @ quot(z) @ p, path, tol)
    return CompressionReport(left, right, both)

"""Clark frames: the Herglotz function, resolvent, defect and AC density.

For a Schur function ``b`` and a unitary ``alpha`` the Herglotz function
``H(z) = (I + b alpha*)(I - b alpha*)^{-1}`` has positive real part and
represents a matrix measure ``mu^alpha`` on the circle.  Its absolutely
continuous density at a boundary point is

    W(lam) = (I - alpha b*)^{-1} (I - alpha b* b alpha*) (I - b alpha*)^{-1}

evaluated at the nontangential boundary value ``b(lam)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Any

import numpy as np

from .limits import DEFAULT_TOL, LimitResult, make_path, nt_limit, radial_limits
from .linalg import as_matrix, hermitian_part, is_unitary, matrix_from_json, psd_sqrt, rank
from .schur import SchurFunction, construct

__all__ = [
    "ATOM_SIGMA",
    "AtomCandidate",
    "ClarkFrame",
    "InconclusiveLimit",
    "ac_density",
    "ac_density_grid",
    "ac_density_resolvent",
    "boundary_value",
    "defect",
    "density_csv",
    "herglotz",
    "parse_alpha",
    "resolvent",
]

# I - b(lam) alpha* closer than this to singular marks an atom candidate
ATOM_SIGMA = 1e-7
COND_LIMIT = 1e14
# boundary values are first sought at this tolerance, then at the caller's
BOUNDARY_TOL = 1e-12


class InconclusiveLimit(RuntimeError):
    """A boundary limit needed by a computation did not converge."""

    def __init__(self, message: str, result: LimitResult | None = None):
        super().__init__(message)
        self.result = result


class AtomCandidate(RuntimeError):
    """The resolvent blows up at this boundary point; the density is undefined here."""


@dataclass(frozen=True, eq=False)
class ClarkFrame:
    """A Schur function together with a unitary ``alpha``."""

    b: SchurFunction
    alpha: np.ndarray

    def __post_init__(self) -> None:
        a = as_matrix(self.alpha, self.b.n)
        if not is_unitary(a, 1e-12):
            raise ValueError("alpha must be unitary (||alpha* alpha - I|| < 1e-12)")
        object.__setattr__(self, "alpha", a)

    @property
    def n(self) -> int:
        return self.b.n

    @property
    def eye(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex)

    def a(self, z: complex) -> np.ndarray:
        """The frame-relative function ``b(z) alpha*``."""
        return self.b.eval(z) @ self.alpha.conj().T

    def a_many(self, z: np.ndarray) -> np.ndarray:
        return self.b.eval_many(z) @ self.alpha.conj().T

    @classmethod
    def from_spec(cls, spec: dict | SchurFunction, alpha: Any = None) -> "ClarkFrame":
        b = construct(spec)
        return cls(b, np.eye(b.n) if alpha is None else parse_alpha(alpha, b.n))


def parse_alpha(value: Any, n: int) -> np.ndarray:
    """Accept a scalar (times identity), nested list, ``{"re","im"}`` matrix or ``{"diag_phases": [...]}``."""
    if isinstance(value, dict):
        if "diag_phases" in value:
            return np.diag(np.exp(1j * np.asarray(value["diag_phases"], dtype=float)))
        return matrix_from_json(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and n == 1 and not isinstance(value[0], list):
        return np.array([[complex(value[0], value[1])]])
    return as_matrix(value, n)


def _solve_checked(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if np.linalg.cond(m) > COND_LIMIT:
        raise ArithmeticError("I - b(z) alpha* is numerically singular inside the disc")
    return np.linalg.solve(m, rhs)


def resolvent(f: ClarkFrame, z: complex) -> np.ndarray:
    """``(I - b(z) alpha*)^{-1}``."""
    return _solve_checked(f.eye - f.a(z), f.eye)


def herglotz(f: ClarkFrame, z: complex) -> np.ndarray:
    """``H(z) = (I + b alpha*)(I - b alpha*)^{-1} = 2 (I - b alpha*)^{-1} - I``."""
    a = f.a(z)
    # (I + A)(I - A)^{-1}: solve from the right
    return _solve_checked((f.eye - a).T, (f.eye + a).T).T


def boundary_value(b: SchurFunction, lam: complex, tol: float = DEFAULT_TOL) -> LimitResult:
    """Nontangential (radial) boundary value of ``b`` at ``lam``.

    A tight tolerance is tried first since densities divide by
    ``|I - b alpha*|^2`` and amplify boundary-value errors near atoms.
    """
    path = make_path(lam)
    res = nt_limit(b.eval, path, min(tol, BOUNDARY_TOL))
    if res.converged or tol <= BOUNDARY_TOL:
        return res
    return nt_limit(b.eval, path, tol)


def _boundary_or_raise(b: SchurFunction, lam: complex, tol: float) -> np.ndarray:
    res = boundary_value(b, lam, tol)
    if not res.converged:
        raise InconclusiveLimit(f"boundary value of b at {lam:.6g} is {res.status}", res)
    return np.asarray(res.value)


def defect(f: ClarkFrame, z: complex, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``(I - alpha b* b alpha*)^{1/2}`` inside the disc or at a boundary point.

    Raises
    ------
    InconclusiveLimit
        When ``|z| = 1`` and the boundary value of ``b`` does not converge.
    """
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise ValueError("defect needs |z| <= 1")
    if abs(z) < 1.0 - 1e-15:
        bz = f.b.eval(z)
    else:
        bz = _boundary_or_raise(f.b, z / abs(z), tol)
    a = bz @ f.alpha.conj().T
    return psd_sqrt(f.eye - a.conj().T @ a)


def _density_from_boundary(a: np.ndarray, eye: np.ndarray) -> np.ndarray:
    """Batch density from boundary values ``a = b alpha*`` of shape ``(..., n, n)``."""
    ah = np.conj(np.swapaxes(a, -1, -2))
    d2 = eye - ah @ a
    # d2 is Hermitian PSD up to roundoff
    d2 = hermitian_part(d2)
    inv = np.linalg.solve(eye - a, np.broadcast_to(eye, a.shape))
    return hermitian_part(np.conj(np.swapaxes(inv, -1, -2)) @ d2 @ inv)


def _check_not_atom(a: np.ndarray, lam: complex) -> None:
    s = np.linalg.svd(np.eye(a.shape[0]) - a, compute_uv=False)
    if s[-1] < ATOM_SIGMA:
        raise AtomCandidate(f"atom candidate at {lam:.12g}: density undefined here (sigma_min={s[-1]:.3g})")


def ac_density(f: ClarkFrame, lam: complex, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Lebesgue density of ``mu^alpha`` (with respect to normalized arc length) at ``lam``.

    Raises
    ------
    AtomCandidate
        If ``I - b(lam) alpha*`` is numerically singular.
    InconclusiveLimit
        If the boundary value does not converge.
    """
    lam = complex(lam)
    bl = _boundary_or_raise(f.b, lam, tol)
    a = bl @ f.alpha.conj().T
    _check_not_atom(a, lam)
    return _density_from_boundary(a, f.eye)


def ac_density_resolvent(f: ClarkFrame, lam: complex, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Same density computed as ``Re[(I + A)(I - A)^{-1}]`` with ``A = b(lam) alpha*``."""
    lam = complex(lam)
    a = _boundary_or_raise(f.b, lam, tol) @ f.alpha.conj().T
    _check_not_atom(a, lam)
    h = np.linalg.solve((f.eye - a).T, (f.eye + a).T).T
    return hermitian_part(h)


def density_rank(w: np.ndarray, rtol: float = 1e-8) -> int:
    return rank(w, rtol) if np.linalg.norm(w) > 0 else 0


def ac_density_grid(
    f: ClarkFrame, thetas: np.ndarray, tol: float = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Densities at ``exp(i theta)`` for many angles.

    Returns ``(densities, ok)``; ``ok`` is False where the boundary value
    failed to converge or the point is an atom candidate (those entries are NaN).
    """
    thetas = np.asarray(thetas, dtype=float)
    lams = np.exp(1j * thetas)
    bvals, conv = radial_limits(f.b.eval_many, lams, min(tol, BOUNDARY_TOL))
    if not conv.all() and tol > BOUNDARY_TOL:
        retry = ~conv
        bvals[retry], conv[retry] = radial_limits(f.b.eval_many, lams[retry], tol)
    a = bvals @ f.alpha.conj().T
    smin = np.linalg.svd(f.eye - a, compute_uv=False)[:, -1]
    ok = conv & (smin >= ATOM_SIGMA)
    out = np.full(a.shape, np.nan, dtype=complex)
    if ok.any():
        out[ok] = _density_from_boundary(a[ok], f.eye)
    return out, ok


def density_csv(thetas: np.ndarray, densities: np.ndarray, ok: np.ndarray | None = None) -> str:
    """CSV with ``theta`` then interleaved real/imaginary parts of every entry, plus a flag column."""
    n = densities.shape[-1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["theta"]
    for i in range(n):
        for j in range(n):
            header += [f"w{i + 1}{j + 1}_re", f"w{i + 1}{j + 1}_im"]
    w.writerow(header + ["flag"])
    for k, th in enumerate(thetas):
        row = [repr(float(th))]
        for v in densities[k].reshape(-1):
            row += [repr(float(v.real)), repr(float(v.imag))]
        good = True if ok is None else bool(ok[k])
        w.writerow(row + ["ok" if good else "undefined"])
    return buf.getvalue()

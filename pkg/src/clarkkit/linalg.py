"""Small dense complex-matrix kernel.

Matrices are plain ``numpy`` complex arrays of shape ``(n, n)`` with
``n <= MAX_DIM``.  Subspaces carry an orthonormal basis.  Rank decisions are
always relative to the largest singular value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = [
    "MAX_DIM",
    "Subspace",
    "as_matrix",
    "hermitian_part",
    "is_hermitian",
    "is_psd",
    "is_unitary",
    "matrix_from_json",
    "matrix_to_json",
    "opnorm",
    "pinv",
    "principal_angles",
    "proj",
    "psd_sqrt",
    "range_basis",
    "rank",
]

MAX_DIM = 16


def as_matrix(m: Any, n: int | None = None) -> np.ndarray:
    """Coerce scalars, nested lists and arrays to a square complex matrix."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1) if n is None else a * np.eye(n, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds the supported maximum {MAX_DIM}")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"expected dimension {n}, got {a.shape[0]}")
    return a


def opnorm(m: np.ndarray) -> float:
    """Operator (spectral) norm; 0 for empty arrays."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    if m.ndim < 2:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """``(M + M*) / 2``, applied before any PSD decision."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().swapaxes(-1, -2))


def is_hermitian(m: np.ndarray) -> bool:
    m = np.asarray(m, dtype=complex)
    return opnorm(m - m.conj().T) <= 1e-12 * (1.0 + opnorm(m))


def is_psd(m: np.ndarray) -> bool:
    h = hermitian_part(m)
    ev = np.linalg.eigvalsh(h)
    return bool(ev.min() >= -1e-10 * max(opnorm(h), 1.0)) if ev.size else True


def is_unitary(m: np.ndarray, atol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=complex)
    return opnorm(m.conj().T @ m - np.eye(m.shape[0])) < atol


def pinv(m: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Moore--Penrose inverse with a relative singular-value cutoff.

    Singular values below ``rtol * sigma_max`` are treated as zero, so the
    zero matrix maps to the zero matrix.
    """
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    m = np.asarray(m, dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(m.shape[::-1], dtype=complex)
    keep = s >= rtol * s[0]
    inv_s = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (vh.conj().T * inv_s) @ u.conj().T


def rank(m: np.ndarray, rtol: float = 1e-8) -> int:
    s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s >= rtol * s[0]))


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^n given by an ``n x dim`` orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        if b.shape[1] and opnorm(b.conj().T @ b - np.eye(b.shape[1])) > 1e-12 * 100:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def span(cls, vectors: np.ndarray, rtol: float = 1e-8) -> "Subspace":
        """Orthonormal basis for the span of the columns of ``vectors``."""
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        return _column_space(v, rtol)

    def contains(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=complex)
        nx = np.linalg.norm(x)
        if nx == 0:
            return True
        resid = x - self.basis @ (self.basis.conj().T @ x)
        return bool(np.linalg.norm(resid) <= tol * nx)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "re": self.basis.real.tolist(),
            "im": self.basis.imag.tolist(),
        }


def _column_space(m: np.ndarray, rtol: float) -> Subspace:
    n = m.shape[0]
    if m.size == 0:
        return Subspace.zero(n)
    u, s, _ = np.linalg.svd(m)
    if s.size == 0 or s[0] == 0.0:
        return Subspace.zero(n)
    k = int(np.count_nonzero(s >= rtol * s[0]))
    return Subspace(u[:, :k])


def range_basis(m: np.ndarray, rtol: float = 1e-8) -> Subspace:
    """Span of the left singular vectors with ``sigma >= rtol * sigma_max``."""
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    return _column_space(np.asarray(m, dtype=complex), rtol)


def proj(e: Subspace) -> np.ndarray:
    """Orthogonal projection onto ``e``."""
    p = e.basis @ e.basis.conj().T
    return hermitian_part(p) if e.dim else np.zeros((e.n, e.n), dtype=complex)


def principal_angles(e: Subspace, f: Subspace) -> np.ndarray:
    """Principal angles between two subspaces; ``inf`` entries pad a dimension mismatch."""
    if e.n != f.n:
        raise ValueError("subspaces live in different ambient spaces")
    if e.dim == 0 or f.dim == 0:
        return np.full(abs(e.dim - f.dim), np.inf) if e.dim != f.dim else np.zeros(0)
    if f.dim > e.dim:
        e, f = f, e
    cos = np.linalg.svd(e.basis.conj().T @ f.basis, compute_uv=False)
    # sines from the residual keep full accuracy for small angles
    sin = np.linalg.svd(f.basis - e.basis @ (e.basis.conj().T @ f.basis), compute_uv=False)[::-1]
    angles = np.where(cos**2 >= 0.5, np.arcsin(np.clip(sin, 0.0, 1.0)), np.arccos(np.clip(cos, -1.0, 1.0)))
    pad = e.dim - f.dim
    return np.concatenate([angles, np.full(pad, np.inf)]) if pad else angles


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix, clamping roundoff-negative eigenvalues at 0."""
    w, v = np.linalg.eigh(hermitian_part(m))
    w = np.clip(w, 0.0, None)
    return hermitian_part((v * np.sqrt(w)) @ v.conj().T)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {"n": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    m = re + 1j * im
    if "n" in obj and m.shape != (obj["n"], obj["n"]):
        raise ValueError(f"matrix shape {m.shape} does not match n={obj['n']}")
    return as_matrix(m)

"""Stolz-region approach paths and nontangential limit estimation.

A path approaches ``lam`` as ``z_k = lam (1 - q**k exp(i psi))``.  Limits are
estimated from the sequence of values along the path with a Richardson table
whose rate is fitted from the last three iterates at each level.  A geometric
rate in ``k`` is an algebraic rate in ``1 - |z|``, so unknown fractional
powers such as ``(1 - |z|)**(1 - gamma)`` are handled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "LimitResult",
    "StolzPath",
    "extrapolation_table",
    "in_stolz_region",
    "limit_from_sequence",
    "make_path",
    "nt_limit",
    "radial_limits",
]

DEFAULT_TOL = 1e-8
# rate estimates at or above this are not treated as contracting
RHO_MAX = 0.95
LEVELS = 3
DIVERGENCE_WINDOW = 5
DIVERGENCE_GROWTH = 1.2


def in_stolz_region(z: complex, lam: complex, t: float) -> bool:
    return abs(z - lam) < t * (1.0 - abs(z))


@dataclass(frozen=True)
class StolzPath:
    """Points ``lam (1 - q**k exp(i psi))`` for ``k = 1 .. max_steps`` inside ``Gamma_t(lam)``."""

    lam: complex
    t: float = 2.0
    q: float = 0.5
    psi: float = 0.0
    max_steps: int = 40
    min_gap: float = 1e-12

    def points(self) -> np.ndarray:
        k = np.arange(1, self.max_steps + 1)
        z = self.lam * (1.0 - self.q**k * np.exp(1j * self.psi))
        keep = (1.0 - np.abs(z)) >= self.min_gap
        # stop at the first point that collapses onto the circle
        if not keep.all():
            z = z[: int(np.argmin(keep))]
        return z

    def gaps(self) -> np.ndarray:
        return 1.0 - np.abs(self.points())


def make_path(
    lam: complex,
    t: float = 2.0,
    q: float = 0.5,
    psi: float = 0.0,
    max_steps: int = 40,
    min_gap: float = 1e-12,
) -> StolzPath:
    """Build an approach path, shrinking ``psi`` until every point is in ``Gamma_t(lam)``.

    Raises
    ------
    ValueError
        If ``t <= 1``, ``q`` is outside ``(0, 1)`` or ``lam`` is not unimodular.
    """
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-10:
        raise ValueError(f"|lambda| = {abs(lam):.12g}, expected 1")
    lam /= abs(lam)
    if not t > 1.0:
        raise ValueError("Stolz aperture t must exceed 1")
    if not 0.0 < q < 1.0:
        raise ValueError("path ratio q must lie in (0, 1)")
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    limit = 0.99 * math.atan(t - 1.0)
    psi = math.copysign(min(abs(psi), limit), psi)
    while True:
        path = StolzPath(lam, t, q, psi, max_steps, min_gap)
        z = path.points()
        if np.all(np.abs(z - lam) < t * (1.0 - np.abs(z))) or psi == 0.0:
            return path
        psi *= 0.9
        if abs(psi) < 1e-6:
            psi = 0.0


@dataclass
class LimitResult:
    """Estimated limit with convergence diagnostics.

    ``status`` is one of ``"converged"``, ``"diverging"``, ``"inconclusive"``.
    """

    value: np.ndarray | complex
    status: str
    est_error: float
    steps_used: int
    divergence_rate: float | None = None
    level: int = 0
    diagnostic: str = ""
    magnitudes: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def diverging(self) -> bool:
        return self.status == "diverging"

    def to_json(self) -> dict:
        v = np.asarray(self.value)
        out = {
            "status": self.status,
            "est_error": _finite_or_none(self.est_error),
            "steps_used": self.steps_used,
            "level": self.level,
        }
        if v.ndim == 0:
            out["value"] = [float(v.real), float(v.imag)]
        else:
            out["value"] = {"re": v.real.tolist(), "im": v.imag.tolist()}
        if self.divergence_rate is not None:
            out["divergence_rate"] = _finite_or_none(self.divergence_rate)
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def _finite_or_none(x: float | None):
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _aitken(seq: np.ndarray) -> np.ndarray:
    """One Richardson level with the rate fitted from three consecutive iterates.

    ``seq`` has shape ``(K, B, m)``; the rate is a complex scalar per row of
    ``B`` obtained by least squares on the difference vectors.
    """
    out = np.full_like(seq, np.nan)
    if seq.shape[0] < 3:
        return out
    d = seq[1:] - seq[:-1]
    d0, d1 = d[:-1], d[1:]
    den = np.sum(np.abs(d0) ** 2, axis=-1)
    num = np.sum(np.conj(d0) * d1, axis=-1)
    d1n = np.sum(np.abs(d1) ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(d1n > 0, np.inf, 0.0))
        ok = np.isfinite(rho) & (np.abs(rho) < RHO_MAX)
        gain = np.where(ok, rho / (1.0 - np.where(ok, rho, 0.0)), 0.0)
        est = seq[2:] + d1 * gain[..., None]
    out[2:] = np.where(ok[..., None], est, np.nan)
    return out


def extrapolation_table(seq: np.ndarray, levels: int = LEVELS) -> list[np.ndarray]:
    """Raw sequence followed by successive Richardson levels, each of shape ``(K, B, m)``."""
    table = [seq]
    for _ in range(levels - 1):
        table.append(_aitken(table[-1]))
    return table


def _row_norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=-1))


def _first_converged(table: list[np.ndarray], tol: float):
    """Per batch row: (index, level, diff) of the first twice-confirmed agreement, or -1."""
    K, B, _ = table[0].shape
    idx = np.full(B, -1)
    lev = np.zeros(B, dtype=int)
    err = np.full(B, np.inf)
    best = np.full(B, np.inf)
    if K < 3:
        return idx, lev, err, best
    hit = np.zeros((K, len(table), B), dtype=bool)
    diffs = np.full((K, len(table), B), np.inf)
    for L, seq in enumerate(table):
        with np.errstate(invalid="ignore"):
            dk = _row_norm(seq[1:] - seq[:-1])
            scale = np.maximum(1.0, _row_norm(seq[1:]))
            small = dk <= tol * scale
        diffs[1:, L] = np.where(np.isnan(dk), np.inf, dk)
        hit[2:, L] = small[1:] & small[:-1]
    best = np.nanmin(diffs.reshape(K * len(table), B), axis=0)
    for b in range(B):
        ks, ls = np.nonzero(hit[:, :, b])
        if ks.size:
            j = np.lexsort((ls, ks))[0]
            idx[b], lev[b] = ks[j], ls[j]
            err[b] = max(diffs[ks[j], ls[j], b], diffs[ks[j] - 1, ls[j], b])
    return idx, lev, err, best


def _divergence(mags: np.ndarray, tol: float) -> float | None:
    """Growth rate per step if the magnitudes diverge, else None."""
    finite = mags[np.isfinite(mags)]
    if mags.size and not np.all(np.isfinite(mags)):
        return math.inf
    w = DIVERGENCE_WINDOW
    if finite.size < w + 1:
        return None
    tail = finite[-(w + 1) :]
    if tail[0] <= 0 or not np.all(np.diff(tail) > 0):
        return None
    growth = tail[-1] / tail[0]
    if growth > DIVERGENCE_GROWTH or tail[-1] > 1.0 / tol:
        return float(growth ** (1.0 / w))
    return None


def limit_from_sequence(values, tol: float = DEFAULT_TOL) -> LimitResult:
    """Estimate the limit of an already-computed sequence of (matrix) values."""
    vals = [np.asarray(v, dtype=complex) for v in values]
    if not vals:
        return LimitResult(np.nan, "inconclusive", math.inf, 0, diagnostic="empty sequence")
    shape = vals[0].shape
    seq = np.stack([v.reshape(-1) for v in vals])[:, None, :]
    return _summarize(seq, shape, tol)


def _summarize(seq: np.ndarray, shape: tuple, tol: float, diagnostic: str = "") -> LimitResult:
    K = seq.shape[0]
    mags = _row_norm(seq[:, 0])
    with np.errstate(invalid="ignore"):
        table = extrapolation_table(seq)
        idx, lev, err, best = _first_converged(table, tol)

    def shaped(v):
        v = v.reshape(shape)
        return complex(v) if v.ndim == 0 else v

    if idx[0] >= 0:
        k, L = int(idx[0]), int(lev[0])
        return LimitResult(shaped(table[L][k, 0]), "converged", float(err[0]), k + 1, None, L, diagnostic, mags)
    rate = _divergence(mags, tol)
    if rate is not None:
        return LimitResult(
            shaped(seq[-1, 0]), "diverging", math.inf, K, rate, 0, diagnostic or "monotone growth", mags
        )
    # best available estimate: the deepest finite entry of the highest level
    value = seq[-1, 0]
    for L in range(len(table) - 1, -1, -1):
        row = table[L][-1, 0]
        if np.all(np.isfinite(row)):
            value = row
            break
    return LimitResult(
        shaped(value), "inconclusive", float(best[0]), K, None, 0, diagnostic or "tolerance not reached", mags
    )


def nt_limit(
    g: Callable[[complex], np.ndarray | complex],
    path: StolzPath,
    tol: float = DEFAULT_TOL,
) -> LimitResult:
    """Nontangential limit of ``g`` along ``path``.

    Evaluation stops as soon as two successive differences at some
    extrapolation level fall below ``tol`` (relative to ``max(1, |value|)``),
    or once magnitudes grow monotonically past ``1/tol``.  Evaluation errors
    end the path and yield an inconclusive result with a diagnostic.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    values: list[np.ndarray] = []
    shape: tuple = ()
    diagnostic = ""
    for z in path.points():
        try:
            v = np.asarray(g(complex(z)), dtype=complex)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            diagnostic = f"evaluation failed at z={complex(z):.6g}: {exc}"
            break
        if not values:
            shape = v.shape
        values.append(v.reshape(-1))
        if not np.all(np.isfinite(v)):
            break
        if len(values) >= 3:
            seq = np.stack(values)[:, None, :]
            with np.errstate(invalid="ignore"):
                idx, *_ = _first_converged(extrapolation_table(seq), tol)
            if idx[0] >= 0:
                break
            mags = _row_norm(seq[:, 0])
            if mags[-1] > 1.0 / tol and _divergence(mags, tol) is not None:
                break
    if not values:
        return LimitResult(np.nan, "inconclusive", math.inf, 0, diagnostic=diagnostic or "no path points")
    res = _summarize(np.stack(values)[:, None, :], shape, tol, diagnostic)
    if diagnostic and res.converged is False:
        res.status = "inconclusive"
    return res


def radial_limits(
    g_many: Callable[[np.ndarray], np.ndarray],
    lams: np.ndarray,
    tol: float = DEFAULT_TOL,
    q: float = 0.5,
    max_steps: int = 40,
    min_gap: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Radial limits at many boundary points at once.

    ``g_many`` maps an array of interior points of shape ``(K, N)`` to values
    of shape ``(K, N, ...)``.  Returns ``(values, converged)`` with values of
    shape ``(N, ...)``.
    """
    lams = np.asarray(lams, dtype=complex)
    s = q ** np.arange(1, max_steps + 1)
    s = s[s >= min_gap]
    z = lams[None, :] * (1.0 - s[:, None])
    vals = np.asarray(g_many(z), dtype=complex)
    K, N = z.shape
    tail = vals.shape[2:]
    seq = vals.reshape(K, N, -1)
    with np.errstate(invalid="ignore"):
        table = extrapolation_table(seq)
        idx, lev, _, _ = _first_converged(table, tol)
    out = np.empty((N, seq.shape[-1]), dtype=complex)
    for j in range(N):
        if idx[j] >= 0:
            out[j] = table[lev[j]][idx[j], j]
        else:
            out[j] = seq[-1, j]
    return out.reshape((N,) + tail), idx >= 0

"""Constructive purely contractive matrix functions on the unit disc.

Every builder evaluates vectorized over an array of points and returns an
array of shape ``z.shape + (n, n)``.  Derivatives come from a Cauchy integral
on a small circle, which is uniform across builders (including the
branch-cut counterexample) and free of subtractive cancellation.

Construction trees round-trip through plain dicts (see :func:`construct` and
:meth:`SchurFunction.to_spec`), e.g.::

    {"type": "potapov", "factors": [{"w": [0.3, 0.1], "proj": {...}}]}
    {"type": "counterexample", "gamma": 0.5, "beta": 0.8, "eps": 0.05}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .linalg import as_matrix, is_unitary, matrix_from_json, matrix_to_json, opnorm

__all__ = [
    "AtomicInner",
    "Blaschke",
    "Constant",
    "Counterexample",
    "DirectSum",
    "Potapov",
    "PotapovFactor",
    "Product",
    "Scale",
    "ScalarLift",
    "SchurFunction",
    "check_contractive",
    "construct",
    "identity_times_z",
]

DERIV_NODES = 64
SAMPLE_ANGLES = 32
SAMPLE_RADII = 16
SAMPLE_RMAX = 0.999


def _cnum(v: Any) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex number must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _cjson(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


class SchurFunction:
    """Purely contractive analytic ``n x n`` function on the disc."""

    n: int

    def _values(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def eval(self, z: complex) -> np.ndarray:
        z = complex(z)
        if not abs(z) < 1.0:
            raise ValueError(f"evaluation point {z} is not inside the unit disc")
        return self._values(np.asarray(z))

    __call__ = eval

    def eval_many(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= 1.0):
            raise ValueError("evaluation points must lie inside the unit disc")
        return self._values(z)

    def deriv(self, z: complex) -> np.ndarray:
        """Entrywise derivative by a 64-node trapezoid Cauchy integral."""
        z = complex(z)
        if not abs(z) < 1.0:
            raise ValueError(f"evaluation point {z} is not inside the unit disc")
        rho = min(0.1, (1.0 - abs(z)) / 2.0)
        phase = np.exp(2j * np.pi * np.arange(DERIV_NODES) / DERIV_NODES)
        vals = self._values(z + rho * phase)
        return np.tensordot(phase.conj(), vals, axes=(0, 0)) / (DERIV_NODES * rho)

    @property
    def is_inner(self) -> bool:
        """True for builders that are inner (unitary a.e. on the circle)."""
        return False


@dataclass(frozen=True, eq=False)
class Constant(SchurFunction):
    value: np.ndarray

    def __post_init__(self) -> None:
        v = as_matrix(self.value)
        if not opnorm(v) < 1.0:
            raise ValueError(f"constant has norm {opnorm(v):.6g}; must be strictly contractive")
        object.__setattr__(self, "value", v)

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.value.shape[0]

    def _values(self, z):
        return np.broadcast_to(self.value, np.shape(z) + self.value.shape).copy()

    def to_spec(self):
        return {"type": "constant", "value": matrix_to_json(self.value)}


@dataclass(frozen=True, eq=False)
class Blaschke(SchurFunction):
    """Scalar finite Blaschke product ``phase * prod (z - w) / (1 - conj(w) z)``."""

    zeros: tuple[complex, ...]
    phase: complex = 1.0

    def __post_init__(self) -> None:
        zs = tuple(complex(w) for w in self.zeros)
        if not zs:
            raise ValueError("a Blaschke product needs at least one zero")
        if any(abs(w) >= 1 for w in zs):
            raise ValueError("Blaschke zeros must lie in the open disc")
        c = complex(self.phase)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ValueError("Blaschke phase must be unimodular")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "phase", c / abs(c))

    n = 1

    @property
    def is_inner(self) -> bool:
        return True

    def _values(self, z):
        out = np.full(np.shape(z), self.phase, dtype=complex)
        for w in self.zeros:
            out = out * (z - w) / (1 - np.conj(w) * z)
        return out[..., None, None]

    def to_spec(self):
        spec = {"type": "blaschke", "zeros": [_cjson(w) for w in self.zeros]}
        if self.phase != 1.0:
            spec["phase"] = _cjson(self.phase)
        return spec


@dataclass(frozen=True, eq=False)
class AtomicInner(SchurFunction):
    """Singular inner ``exp(mass * (z + point) / (z - point))`` for a unimodular point."""

    point: complex
    mass: float

    def __post_init__(self) -> None:
        p = complex(self.point)
        if abs(abs(p) - 1.0) > 1e-12:
            raise ValueError("atomic inner point must be unimodular")
        if not self.mass > 0:
            raise ValueError("atomic inner mass must be positive")
        object.__setattr__(self, "point", p / abs(p))

    n = 1

    @property
    def is_inner(self) -> bool:
        return True

    def _values(self, z):
        p = self.point
        return np.exp(self.mass * (z + p) / (z - p))[..., None, None]

    def to_spec(self):
        return {"type": "atomic_inner", "point": _cjson(self.point), "mass": float(self.mass)}


@dataclass(frozen=True, eq=False)
class PotapovFactor:
    """``left @ ((I - P) + beta_w(z) P) @ right`` with ``beta_0(z) = z`` and
    ``beta_w(z) = (conj(w)/|w|) (w - z) / (1 - conj(w) z)`` otherwise."""

    w: complex
    proj: np.ndarray
    left: np.ndarray | None = None
    right: np.ndarray | None = None

    def __post_init__(self) -> None:
        w = complex(self.w)
        if abs(w) >= 1:
            raise ValueError("Potapov zero must lie in the open disc")
        p = np.asarray(self.proj, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("Potapov projection must be square")
        if opnorm(p @ p - p) > 1e-10 or opnorm(p - p.conj().T) > 1e-10:
            raise ValueError("Potapov factor needs an orthogonal projection")
        for u in (self.left, self.right):
            if u is not None and not is_unitary(np.asarray(u, dtype=complex), 1e-10):
                raise ValueError("flanking matrices must be unitary")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "proj", p)
        if self.left is not None:
            object.__setattr__(self, "left", np.asarray(self.left, dtype=complex))
        if self.right is not None:
            object.__setattr__(self, "right", np.asarray(self.right, dtype=complex))

    def scalar(self, z):
        w = self.w
        if w == 0:
            return np.asarray(z, dtype=complex)
        return (np.conj(w) / abs(w)) * (w - z) / (1 - np.conj(w) * z)

    def values(self, z):
        p = self.proj
        n = p.shape[0]
        beta = self.scalar(z)[..., None, None]
        f = (np.eye(n) - p) + beta * p
        if self.left is not None:
            f = self.left @ f
        if self.right is not None:
            f = f @ self.right
        return f

    def to_spec(self):
        spec = {"w": _cjson(self.w), "proj": matrix_to_json(self.proj)}
        if self.left is not None:
            spec["left"] = matrix_to_json(self.left)
        if self.right is not None:
            spec["right"] = matrix_to_json(self.right)
        return spec


@dataclass(frozen=True, eq=False)
class Potapov(SchurFunction):
    """Ordered Blaschke--Potapov product ``F_1(z) F_2(z) ... F_m(z)``."""

    factors: tuple[PotapovFactor, ...]

    def __post_init__(self) -> None:
        fs = tuple(self.factors)
        if not fs:
            raise ValueError("Potapov product needs at least one factor")
        n = fs[0].proj.shape[0]
        if any(f.proj.shape[0] != n for f in fs):
            raise ValueError("Potapov factors have mismatched dimensions")
        object.__setattr__(self, "factors", fs)

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.factors[0].proj.shape[0]

    @property
    def is_inner(self) -> bool:
        return True

    def _values(self, z):
        out = self.factors[0].values(z)
        for f in self.factors[1:]:
            out = out @ f.values(z)
        return out

    def to_spec(self):
        return {"type": "potapov", "factors": [f.to_spec() for f in self.factors]}


def identity_times_z(n: int) -> Potapov:
    """``b(z) = z I_n``."""
    return Potapov((PotapovFactor(0.0, np.eye(n)),))


@dataclass(frozen=True, eq=False)
class ScalarLift(SchurFunction):
    """Scalar ``theta`` in diagonal slot ``slot``; ``rest`` fills the complementary block."""

    theta: SchurFunction
    rest: SchurFunction | None = None
    slot: int = 0

    def __post_init__(self) -> None:
        if self.theta.n != 1:
            raise ValueError("lifted function must be scalar")
        m = 0 if self.rest is None else self.rest.n
        if not 0 <= self.slot <= m:
            raise ValueError(f"slot {self.slot} out of range for dimension {m + 1}")

    @property
    def n(self) -> int:  # type: ignore[override]
        return 1 + (0 if self.rest is None else self.rest.n)

    @property
    def is_inner(self) -> bool:
        return self.theta.is_inner and (self.rest is None or self.rest.is_inner)

    def _values(self, z):
        n = self.n
        out = np.zeros(np.shape(z) + (n, n), dtype=complex)
        out[..., 0, 0] = self.theta._values(z)[..., 0, 0]
        if self.rest is not None:
            out[..., 1:, 1:] = self.rest._values(z)
        # move the scalar from position 0 to its slot
        order = list(range(1, self.slot + 1)) + [0] + list(range(self.slot + 1, n))
        return out[..., order, :][..., :, order]

    def to_spec(self):
        spec = {"type": "scalar_lift", "theta": self.theta.to_spec(), "slot": self.slot}
        if self.rest is not None:
            spec["rest"] = self.rest.to_spec()
        return spec


@dataclass(frozen=True, eq=False)
class Scale(SchurFunction):
    c: float
    inner: SchurFunction

    def __post_init__(self) -> None:
        if not 0 < self.c < 1:
            raise ValueError("scale factor must lie in (0, 1)")

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.inner.n

    def _values(self, z):
        return self.c * self.inner._values(z)

    def to_spec(self):
        return {"type": "scale", "c": float(self.c), "inner": self.inner.to_spec()}


@dataclass(frozen=True, eq=False)
class DirectSum(SchurFunction):
    parts: tuple[SchurFunction, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("direct sum needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def n(self) -> int:  # type: ignore[override]
        return sum(p.n for p in self.parts)

    @property
    def is_inner(self) -> bool:
        return all(p.is_inner for p in self.parts)

    def _values(self, z):
        out = np.zeros(np.shape(z) + (self.n, self.n), dtype=complex)
        k = 0
        for p in self.parts:
            out[..., k : k + p.n, k : k + p.n] = p._values(z)
            k += p.n
        return out

    def to_spec(self):
        return {"type": "direct_sum", "parts": [p.to_spec() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Product(SchurFunction):
    parts: tuple[SchurFunction, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("product needs at least one part")
        if len({p.n for p in self.parts}) != 1:
            raise ValueError("product factors have mismatched dimensions")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.parts[0].n

    @property
    def is_inner(self) -> bool:
        return all(p.is_inner for p in self.parts)

    def _values(self, z):
        out = self.parts[0]._values(z)
        for p in self.parts[1:]:
            out = out @ p._values(z)
        return out

    def to_spec(self):
        return {"type": "product", "parts": [p.to_spec() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Counterexample(SchurFunction):
    """The 2x2 function whose Clark measure at 1 needs projections on both sides.

    On the right half-plane ``H(z) = 1/z + z**(-gamma) + 1``,
    ``theta = (H - 1) / (H + 1)`` and
    ``b~(z) = diag(theta, 0) + eps z**beta / (1 + z) [[0, 1], [1, 1]]``;
    the disc function is ``b = b~ o omega`` with ``omega(xi) = (1 - xi) / (1 + xi)``.
    Powers use the principal branch.
    """

    gamma: float
    beta: float
    eps: float

    n = 2

    def __post_init__(self) -> None:
        g, b, e = self.gamma, self.beta, self.eps
        if not 0 < g < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 < b < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 2 * b > 2 - g:
            raise ValueError(f"need 2*beta > 2 - gamma, got 2*beta={2 * b:g} <= {2 - g:g}")
        if not e > 0:
            raise ValueError("eps must be positive")
        worst = self.axis_sup_norm()
        if not worst < 1.0:
            raise ValueError(f"eps={e:g} too large: boundary sampling found norm {worst:.12g} >= 1")

    @staticmethod
    def omega(xi):
        return (1 - xi) / (1 + xi)

    def _theta_stable(self, z):
        # (H - 1)/(H + 1) multiplied through by z; finite as z -> 0
        s = z ** (1 - self.gamma)
        return (1 + s) / (1 + s + 2 * z)

    def half_plane(self, z) -> np.ndarray:
        """``b~(z)`` straight from the defining Herglotz formula (reference path)."""
        z = np.asarray(z, dtype=complex)
        h = 1 / z + z ** (-self.gamma) + 1
        return self._assemble(z, (h - 1) / (h + 1))

    def _assemble(self, z, theta):
        c = self.eps * z**self.beta / (1 + z)
        out = np.zeros(np.shape(z) + (2, 2), dtype=complex)
        out[..., 0, 0] = theta
        out[..., 0, 1] = c
        out[..., 1, 0] = c
        out[..., 1, 1] = c
        return out

    def _values(self, xi):
        z = self.omega(np.asarray(xi, dtype=complex))
        return self._assemble(z, self._theta_stable(z))

    def axis_sup_norm(self, count: int = 4001) -> float:
        """Largest operator norm of ``b~(ix)`` over a log-spaced sample of the imaginary axis."""
        x = np.logspace(-6, 6, count)
        z = 1j * np.concatenate([x, -x])
        vals = self._assemble(z, self._theta_stable(z))
        return float(np.linalg.norm(vals, 2, axis=(-2, -1)).max())

    def to_spec(self):
        return {"type": "counterexample", "gamma": self.gamma, "beta": self.beta, "eps": self.eps}


def check_contractive(
    b: SchurFunction,
    angles: int = SAMPLE_ANGLES,
    radii: int = SAMPLE_RADII,
    rmax: float = SAMPLE_RMAX,
) -> float:
    """Largest operator norm of ``b`` on a polar sample grid of the disc."""
    r = np.linspace(0.0, rmax, radii)
    t = 2 * np.pi * np.arange(angles) / angles
    z = r[:, None] * np.exp(1j * t)[None, :]
    vals = b.eval_many(z)
    return float(np.linalg.norm(vals, 2, axis=(-2, -1)).max())


_BUILDERS = {}


def _builder(name):
    def deco(fn):
        _BUILDERS[name] = fn
        return fn

    return deco


@_builder("constant")
def _build_constant(spec):
    v = spec["value"]
    return Constant(matrix_from_json(v) if isinstance(v, dict) else as_matrix(v))


@_builder("zero")
def _build_zero(spec):
    return Constant(np.zeros((int(spec["n"]), int(spec["n"]))))


@_builder("blaschke")
def _build_blaschke(spec):
    return Blaschke(tuple(_cnum(w) for w in spec["zeros"]), _cnum(spec.get("phase", 1.0)))


@_builder("atomic_inner")
def _build_atomic(spec):
    point = _cnum(spec["point"]) if "point" in spec else np.exp(1j * float(spec["theta"]))
    return AtomicInner(point, float(spec["mass"]))


@_builder("potapov")
def _build_potapov(spec):
    factors = []
    for f in spec["factors"]:
        p = f["proj"]
        factors.append(
            PotapovFactor(
                _cnum(f.get("w", 0.0)),
                matrix_from_json(p) if isinstance(p, dict) else as_matrix(p),
                matrix_from_json(f["left"]) if "left" in f else None,
                matrix_from_json(f["right"]) if "right" in f else None,
            )
        )
    return Potapov(tuple(factors))


@_builder("identity_z")
def _build_identity_z(spec):
    return identity_times_z(int(spec["n"]))


@_builder("scalar_lift")
def _build_lift(spec):
    rest = construct(spec["rest"], validate=False) if "rest" in spec else None
    return ScalarLift(construct(spec["theta"], validate=False), rest, int(spec.get("slot", 0)))


@_builder("scale")
def _build_scale(spec):
    return Scale(float(spec["c"]), construct(spec["inner"], validate=False))


@_builder("direct_sum")
def _build_direct_sum(spec):
    return DirectSum(tuple(construct(p, validate=False) for p in spec["parts"]))


@_builder("product")
def _build_product(spec):
    return Product(tuple(construct(p, validate=False) for p in spec["parts"]))


@_builder("counterexample")
def _build_counterexample(spec):
    return Counterexample(float(spec["gamma"]), float(spec["beta"]), float(spec["eps"]))


def construct(spec: dict | SchurFunction, validate: bool = True) -> SchurFunction:
    """Build a :class:`SchurFunction` from a construction tree.

    With ``validate`` the result must be strictly contractive at the origin
    (equivalent to pure contractivity) and on the polar sample grid.

    Raises
    ------
    ValueError
        On malformed trees, out-of-range parameters or failed contractivity.
    """
    if isinstance(spec, SchurFunction):
        b = spec
    else:
        if not isinstance(spec, dict) or "type" not in spec:
            raise ValueError(f"construction tree node needs a 'type': {spec!r}")
        kind = spec["type"]
        if kind not in _BUILDERS:
            raise ValueError(f"unknown construction type {kind!r}")
        try:
            b = _BUILDERS[kind](spec)
        except KeyError as exc:
            raise ValueError(f"{kind}: missing field {exc}") from exc
    if validate:
        b0 = opnorm(b.eval(0.0))
        if not b0 < 1.0:
            raise ValueError(f"||b(0)|| = {b0:.12g}; function is not purely contractive")
        worst = check_contractive(b)
        if not worst < 1.0:
            raise ValueError(f"sampled norm {worst:.12g} >= 1; function is not purely contractive")
    return b

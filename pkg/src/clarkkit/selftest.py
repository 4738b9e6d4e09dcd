"""Catalogue of closed-form example checks, run by ``clarkkit selftest``.

Each check returns ``(passed, detail)``.  Checks are grouped by module and
labelled ``trivial`` (value asserted directly) or ``derived`` (value from an
independent hand computation or oracle).
"""

from __future__ import annotations

import math
import traceback
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import atoms, caratheodory as cara, herglotz as hg, linalg as la, limits, oracle, schur, singularity as sing
from .herglotz import ClarkFrame

__all__ = ["CHECKS", "CheckResult", "run_selftest"]


@dataclass
class CheckResult:
    name: str
    module: str
    kind: str
    passed: bool
    detail: str

    def to_json(self) -> dict:
        return {"name": self.name, "module": self.module, "kind": self.kind, "passed": self.passed, "detail": self.detail}


CHECKS: list[tuple[str, str, str, Callable[[], tuple[bool, str]]]] = []


def check(module: str, kind: str, name: str):
    def deco(fn):
        CHECKS.append((module, kind, name, fn))
        return fn

    return deco


def _close(got, want, tol: float) -> tuple[bool, str]:
    err = float(np.max(np.abs(np.asarray(got, dtype=complex) - np.asarray(want, dtype=complex))))
    return err <= tol, f"error {err:.3g} (tol {tol:g})"


def _z(n: int = 1):
    return schur.identity_times_z(n)


def _zero(n: int = 1):
    return schur.Constant(np.zeros((n, n)))


def _half_z():
    return schur.Scale(0.5, _z())


def _z2():
    return schur.Blaschke((0.0, 0.0))


def _e(n: int, k: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def _span(*cols) -> la.Subspace:
    return la.Subspace.span(np.stack(cols, axis=1))


# ---- linalg ---------------------------------------------------------------


@check("linalg", "trivial", "pinv diag(2,0)")
def _():
    return _close(la.pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), 1e-15)


@check("linalg", "trivial", "pinv identity")
def _():
    return _close(la.pinv(np.eye(3)), np.eye(3), 1e-15)


@check("linalg", "derived", "pinv Penrose equations on random 3x3")
def _():
    rng = np.random.default_rng(11)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    p = la.pinv(m)
    res = max(
        la.opnorm(m @ p @ m - m),
        la.opnorm(p @ m @ p - p),
        la.opnorm((m @ p).conj().T - m @ p),
        la.opnorm((p @ m).conj().T - p @ m),
    )
    return res < 1e-10 * max(1.0, la.opnorm(m)), f"max Penrose residual {res:.3g}"


@check("linalg", "trivial", "range_basis diag(1,0)")
def _():
    e = la.range_basis(np.diag([1.0, 0.0]))
    return e.dim == 1 and e.contains(_e(2, 0)), f"dim {e.dim}"


@check("linalg", "trivial", "range_basis of v v*")
def _():
    v = np.array([1.0, 2.0j, -1.0]) / math.sqrt(6.0)
    e = la.range_basis(np.outer(v, v.conj()))
    return e.dim == 1 and e.contains(v, 1e-12), f"dim {e.dim}"


@check("linalg", "derived", "range_basis random rank-2 PSD")
def _():
    rng = np.random.default_rng(12)
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    m = g @ g.conj().T
    e = la.range_basis(m)
    res = la.opnorm((np.eye(4) - la.proj(e)) @ m)
    return e.dim == 2 and res < 1e-10, f"dim {e.dim}, residual {res:.3g}"


@check("linalg", "trivial", "proj of full space")
def _():
    return _close(la.proj(la.Subspace.full(3)), np.eye(3), 1e-15)


@check("linalg", "trivial", "proj span e1")
def _():
    return _close(la.proj(_span(_e(2, 0))), np.diag([1.0, 0.0]), 1e-15)


@check("linalg", "derived", "proj span (e1+e2)/sqrt2")
def _():
    return _close(la.proj(_span(np.array([1.0, 1.0]) / math.sqrt(2.0))), np.full((2, 2), 0.5), 1e-12)


# ---- schur ------------------------------------------------------------------


@check("schur", "trivial", "zero function evaluates to 0")
def _():
    return _close(_zero(2).eval(0.3 - 0.4j), np.zeros((2, 2)), 0.0)


@check("schur", "trivial", "z I at 0.5")
def _():
    return _close(_z(2).eval(0.5), 0.5 * np.eye(2), 1e-15)


@check("schur", "derived", "counterexample at 0")
def _():
    b = schur.construct({"type": "counterexample", "gamma": 0.5, "beta": 0.8, "eps": 0.05})
    return _close(b.eval(0.0), [[0.5, 0.025], [0.025, 0.025]], 1e-12)


@check("schur", "trivial", "derivative of z I")
def _():
    return _close(_z(2).deriv(0.2 + 0.3j), np.eye(2), 1e-12)


@check("schur", "trivial", "derivative of z^2 at 0.3")
def _():
    return _close(_z2().deriv(0.3), [[0.6]], 1e-12)


@check("schur", "derived", "derivative of Blaschke factor w=0.5 at 0")
def _():
    return _close(schur.Blaschke((0.5,)).deriv(0.0), [[0.75]], 1e-12)


@check("schur", "trivial", "construct constant 0")
def _():
    b = schur.construct({"type": "constant", "value": [[0.0]]})
    return _close(b.eval(0.7j), [[0.0]], 0.0)


@check("schur", "trivial", "scale 0.5 of z at 0.6")
def _():
    b = schur.construct({"type": "scale", "c": 0.5, "inner": {"type": "identity_z", "n": 1}})
    return _close(b.eval(0.6), [[0.3]], 1e-15)


@check("schur", "derived", "counterexample parameter check")
def _():
    schur.construct({"type": "counterexample", "gamma": 0.5, "beta": 0.8, "eps": 0.05})
    try:
        schur.construct({"type": "counterexample", "gamma": 0.5, "beta": 0.6, "eps": 0.05})
    except ValueError:
        return True, "(0.5,0.8,0.05) accepted; (0.5,0.6,0.05) rejected"
    return False, "(0.5,0.6,0.05) was accepted"


# ---- herglotz ---------------------------------------------------------------


@check("herglotz", "trivial", "H = I for b = 0")
def _():
    return _close(hg.herglotz(ClarkFrame(_zero(2), np.eye(2)), 0.3 + 0.2j), np.eye(2), 1e-15)


@check("herglotz", "trivial", "H(0.5) = 3 for b = z")
def _():
    return _close(hg.herglotz(ClarkFrame(_z(), 1), 0.5), [[3.0]], 1e-14)


@check("herglotz", "derived", "H for z I, alpha = diag(1,-1) at 0.5i")
def _():
    z = 0.5j
    want = np.diag([(1 + z) / (1 - z), (1 - z) / (1 + z)])
    return _close(hg.herglotz(ClarkFrame(_z(2), np.diag([1.0, -1.0])), z), want, 1e-14)


@check("herglotz", "trivial", "resolvent = I for b = 0")
def _():
    return _close(hg.resolvent(ClarkFrame(_zero(2), np.eye(2)), 0.5), np.eye(2), 0.0)


@check("herglotz", "trivial", "resolvent 10 for b = z at 0.9")
def _():
    return _close(hg.resolvent(ClarkFrame(_z(), 1), 0.9), [[10.0]], 1e-12)


@check("herglotz", "derived", "resolvent multiply-back on a random frame")
def _():
    rng = np.random.default_rng(13)
    b = schur.Potapov(tuple(schur.PotapovFactor(0.5 * rng.random() * np.exp(2j * np.pi * rng.random()), _rand_proj(rng, 2)) for _ in range(3)))
    f = ClarkFrame(b, _rand_unitary(rng, 2))
    z = 0.6 * np.exp(2j * np.pi * rng.random())
    res = la.opnorm((np.eye(2) - f.a(z)) @ hg.resolvent(f, z) - np.eye(2))
    return res < 1e-12, f"residual {res:.3g}"


@check("herglotz", "trivial", "defect I for b = 0")
def _():
    return _close(hg.defect(ClarkFrame(_zero(2), np.eye(2)), 0.4), np.eye(2), 1e-15)


@check("herglotz", "trivial", "defect 0.8 for b = z at 0.6")
def _():
    return _close(hg.defect(ClarkFrame(_z(), 1), 0.6), [[0.8]], 1e-14)


@check("herglotz", "derived", "boundary defect sqrt(0.75) for b = z/2 at 1")
def _():
    return _close(hg.defect(ClarkFrame(_half_z(), 1), 1.0), [[math.sqrt(0.75)]], 1e-10)


@check("herglotz", "trivial", "density I for b = 0")
def _():
    return _close(hg.ac_density(ClarkFrame(_zero(2), np.eye(2)), np.exp(0.4j)), np.eye(2), 1e-15)


@check("herglotz", "derived", "density 3 for b = z/2 at 1")
def _():
    return _close(hg.ac_density(ClarkFrame(_half_z(), 1), 1.0), [[3.0]], 1e-10)


@check("herglotz", "derived", "density 0 for an inner Potapov product")
def _():
    rng = np.random.default_rng(14)
    b = schur.Potapov(tuple(schur.PotapovFactor(0.6 * rng.random() * np.exp(2j * np.pi * rng.random()), _rand_proj(rng, 2)) for _ in range(3)))
    f = ClarkFrame(b, _rand_unitary(rng, 2))
    thetas = 2 * np.pi * rng.random(32)
    dens, ok = hg.ac_density_grid(f, thetas)
    worst = float(np.max(np.abs(dens[ok])))
    return bool(ok.all()) and worst < 1e-8, f"max entry {worst:.3g}"


# ---- limits -----------------------------------------------------------------


@check("limits", "trivial", "radial path at 1")
def _():
    z = limits.make_path(1.0, 2.0, 0.5, 0.0).points()
    return _close(z, 1 - 0.5 ** np.arange(1, z.size + 1), 1e-16)


@check("limits", "trivial", "rotated radial path at i")
def _():
    z = limits.make_path(1j, 2.0, 0.5, 0.0).points()
    return _close(z, 1j * (1 - 0.5 ** np.arange(1, z.size + 1)), 1e-16)


@check("limits", "derived", "aperture-4 path with psi=0.3 stays in the Stolz region")
def _():
    p = limits.make_path(1.0, 4.0, 0.5, 0.3)
    z = p.points()
    ok = bool(np.all(np.abs(z - 1) < 4 * (1 - np.abs(z))))
    return ok, f"psi used {p.psi:.3g}"


@check("limits", "trivial", "limit of (1-z)/(1-z)")
def _():
    r = limits.nt_limit(lambda z: (1 - z) / (1 - z), limits.make_path(1.0))
    return r.converged and abs(r.value - 1) < 1e-15, r.status


@check("limits", "trivial", "1/(1-z) diverges at rate 2")
def _():
    r = limits.nt_limit(lambda z: 1 / (1 - z), limits.make_path(1.0))
    ok = r.diverging and abs(r.divergence_rate - 2.0) < 0.05
    return ok, f"{r.status}, rate {r.divergence_rate}"


@check("limits", "derived", "sqrt(1-z) tends to 0")
def _():
    r = limits.nt_limit(lambda z: (1 - z) ** 0.5, limits.make_path(1.0))
    return r.converged and abs(r.value) < 1e-8, f"{r.status}, value {abs(r.value):.3g}"


# ---- atoms ------------------------------------------------------------------


@check("atoms", "trivial", "point mass 1 for b = z at 1")
def _():
    pm = atoms.point_mass(ClarkFrame(_z(), 1), 1.0)
    return pm.converged and abs(pm.value[0, 0] - 1) < 1e-12, pm.limit.status


@check("atoms", "trivial", "point mass 1/2 for b = z^2 at 1")
def _():
    pm = atoms.point_mass(ClarkFrame(_z2(), 1), 1.0)
    return pm.converged and abs(pm.value[0, 0] - 0.5) < 1e-10, pm.limit.status


@check("atoms", "derived", "atoms of z I at the eigenvalues of alpha")
def _():
    f = ClarkFrame(_z(2), np.diag(np.exp(1j * np.array([np.pi / 3, np.pi / 7]))))
    got = sorted(float(np.angle(l)) for l in atoms.find_atoms(f))
    return _close(got, sorted([np.pi / 3, np.pi / 7]), 1e-10)


@check("atoms", "trivial", "atoms of z^2 at +1 and -1")
def _():
    got = sorted(float(np.angle(l)) % (2 * np.pi) for l in atoms.find_atoms(ClarkFrame(_z2(), 1)))
    return _close(got, [0.0, np.pi], 1e-10)


@check("atoms", "trivial", "no atoms for b = 0")
def _():
    got = atoms.find_atoms(ClarkFrame(_zero(2), np.diag([1.0, 1j])))
    return not got, f"{len(got)} atoms"


@check("atoms", "derived", "carrier of z I with alpha = diag(1, e^{i theta}) at 1")
def _():
    s = atoms.directional_carrier(ClarkFrame(_z(2), np.diag([1.0, np.exp(0.8j)])), 1.0).subspace
    return s.dim == 1 and s.contains(_e(2, 0), 1e-8), f"dim {s.dim}"


@check("atoms", "trivial", "carrier is zero for b = 0")
def _():
    s = atoms.directional_carrier(ClarkFrame(_zero(2), np.eye(2)), np.exp(0.3j)).subspace
    return s.dim == 0, f"dim {s.dim}"


@check("atoms", "trivial", "carrier is C^1 for b = z at 1")
def _():
    s = atoms.directional_carrier(ClarkFrame(_z(), 1), 1.0).subspace
    return s.dim == 1, f"dim {s.dim}"


@check("atoms", "derived", "carrier diagnostics for b = z at 1")
def _():
    d = atoms.carrier_diagnostics(ClarkFrame(_z(), 1), 1.0)
    return d.s_diverges and abs(d.p_limit + 1) < 1e-10, f"S {d.s_status}, P {d.p_limit}"


@check("atoms", "trivial", "carrier diagnostics for b = 0")
def _():
    d = atoms.carrier_diagnostics(ClarkFrame(_zero(2), np.eye(2)), np.exp(1j))
    return (not d.s_diverges) and d.p_limit == 0, f"S {d.s_status}, P {d.p_limit}"


@check("atoms", "trivial", "carrier diagnostics for b = z at -1")
def _():
    d = atoms.carrier_diagnostics(ClarkFrame(_z(), 1), -1.0)
    return (not d.s_diverges) and d.p_limit == 0, f"S {d.s_status}, P {d.p_limit}"


@check("atoms", "trivial", "measure of b = 0")
def _():
    m = atoms.clark_measure(ClarkFrame(_zero(2), np.eye(2)))
    dens, ok = m.ac_many(np.linspace(0, 6, 7))
    err = max(la.opnorm(m.total - np.eye(2)), float(np.max(np.abs(dens - np.eye(2)))))
    return not m.atoms and ok.all() and err < 1e-12, f"{len(m.atoms)} atoms, error {err:.3g}"


@check("atoms", "trivial", "measure of b = z")
def _():
    m = atoms.clark_measure(ClarkFrame(_z(), 1))
    dens, ok = m.ac_many(np.linspace(0.5, 6, 7))
    good = len(m.atoms) == 1 and abs(m.atoms[0].theta) < 1e-12 and abs(m.atoms[0].mass[0, 0] - 1) < 1e-10
    good = good and float(np.max(np.abs(dens))) < 1e-12 and abs(m.total[0, 0] - 1) < 1e-14
    return good, f"{len(m.atoms)} atoms"


@check("atoms", "derived", "measure of b = z/2 integrates to 1")
def _():
    m = atoms.clark_measure(ClarkFrame(_half_z(), 1))
    dens, ok = m.ac_many(oracle.QuadratureGrid(4096).thetas)
    mass = float(np.mean(dens[:, 0, 0].real))
    good = not m.atoms and ok.all() and abs(m.total[0, 0] - 1) < 1e-14 and abs(mass - 1) < 1e-6
    return good, f"quadrature mass {mass:.12g}"


# ---- caratheodory -----------------------------------------------------------


@check("caratheodory", "trivial", "condition holds for b = z at 1")
def _():
    r = cara.cara_condition(ClarkFrame(_z(), 1), 1.0, [1.0])
    good = r.satisfied and abs(r.sup_quotient - 1) < 1e-12 and abs(r.b_star_limit[0] - 1) < 1e-10
    return good, f"sup {r.sup_quotient}"


@check("caratheodory", "derived", "condition fails for exp((z+1)/(z-1))")
def _():
    r = cara.cara_condition(ClarkFrame(schur.AtomicInner(1.0, 1.0), 1), 1.0, [1.0])
    return (not r.satisfied) and r.consistent, f"sup {r.sup_quotient:.3g}"


@check("caratheodory", "trivial", "condition fails for b = 0")
def _():
    r = cara.cara_condition(ClarkFrame(_zero(1), 1), 1.0, [1.0])
    return (not r.satisfied) and r.consistent, f"sup {r.sup_quotient:.3g}"


@check("caratheodory", "trivial", "kernel of b = z is constant 1")
def _():
    k = cara.boundary_kernel(ClarkFrame(_z(), 1), 1.0, [1.0])
    ok, d = _close([k(0.3), k(-0.5j)], [[1.0], [1.0]], 1e-12)
    return ok and abs(k.norm_sq.value - 1) < 1e-8, d


@check("caratheodory", "derived", "kernel of z^2 is 1+z with squared norm 2")
def _():
    k = cara.boundary_kernel(ClarkFrame(_z2(), 1), 1.0, [1.0])
    ok, d = _close([k(0.3), k(-0.5j)], [[1.3], [1 - 0.5j]], 1e-10)
    return ok and abs(k.norm_sq.value - 2) < 1e-6, d + f", norm^2 {complex(k.norm_sq.value).real:.9g}"


@check("caratheodory", "derived", "kernel of z I at e1 is constant e1")
def _():
    k = cara.boundary_kernel(ClarkFrame(_z(2), np.eye(2)), 1.0, _e(2, 0))
    return _close([k(0.3), k(0.2 - 0.6j)], [_e(2, 0), _e(2, 0)], 1e-10)


@check("caratheodory", "trivial", "codirections of b = z at 1")
def _():
    r = cara.codirection_space(ClarkFrame(_z(), 1), 1.0)
    return r.subspace.dim == 1 and r.consistent, r.diagnostic or "consistent"


@check("caratheodory", "derived", "codirections of z I, alpha = diag(1,-1) at -1")
def _():
    r = cara.codirection_space(ClarkFrame(_z(2), np.diag([1.0, -1.0])), -1.0)
    good = r.subspace.dim == 1 and r.subspace.contains(_e(2, 1), 1e-8) and r.consistent
    return good, r.diagnostic or "consistent"


@check("caratheodory", "trivial", "angular derivative 1 for b = z at 1")
def _():
    c = cara.cad(ClarkFrame(_z(), 1), 1.0, la.Subspace.full(1))
    return c.confident and abs(c.on_e[0, 0] - 1) < 1e-10, c.status


@check("caratheodory", "derived", "angular derivative conj(alpha_1) for z I")
def _():
    th = np.array([0.7, 2.1])
    c = cara.cad(ClarkFrame(_z(2), np.diag(np.exp(1j * th))), np.exp(1j * th[0]), _span(_e(2, 0)))
    return c.confident and abs(c.on_e[0, 0] - np.exp(-1j * th[0])) < 1e-8, c.status


@check("caratheodory", "trivial", "duality residual 0 for b = z")
def _():
    r = cara.verify_cad_pointmass(ClarkFrame(_z(), 1), 1.0)
    return r < 1e-10, f"residual {r:.3g}"


@check("caratheodory", "derived", "duality residual 0 for z^2 at -1")
def _():
    r = cara.verify_cad_pointmass(ClarkFrame(_z2(), 1), -1.0)
    return r < 1e-8, f"residual {r:.3g}"


@check("caratheodory", "trivial", "Gram 1 for b = z")
def _():
    g = cara.boundary_gram(ClarkFrame(_z(), 1), 1.0, [1.0], [1.0])
    return g.limit.converged and abs(g.value - 1) < 1e-12, g.limit.status


@check("caratheodory", "derived", "Gram 2 for z^2")
def _():
    g = cara.boundary_gram(ClarkFrame(_z2(), 1), 1.0, [1.0], [1.0])
    return g.limit.converged and abs(g.value - 2) < 1e-6, f"value {g.value}"


@check("caratheodory", "derived", "Gram 1 for z I at e^{i theta_1}")
def _():
    th = np.array([0.7, 2.1])
    f = ClarkFrame(_z(2), np.diag(np.exp(1j * th)))
    g = cara.boundary_gram(f, np.exp(1j * th[0]), _e(2, 0), _e(2, 0))
    return g.limit.converged and abs(g.value - 1) < 1e-10, f"value {g.value}"


# ---- mutual singularity -----------------------------------------------------


@check("singularity", "derived", "z I with alpha = diag(1, e^{i theta}): overlap 0")
def _():
    r = sing.vector_mutual_singularity(_z(2), np.diag([1.0, np.exp(0.9j)]))
    good = r.verdict and len(r.shared) == 1 and r.max_overlap < 1e-12
    return good, f"{len(r.shared)} shared, overlap {r.max_overlap:.3g}"


@check("singularity", "derived", "z^2 with alpha = -1: no shared atoms")
def _():
    r = sing.vector_mutual_singularity(_z2(), np.array([[-1.0]]))
    return r.verdict and not r.shared, f"{len(r.shared)} shared"


@check("singularity", "derived", "random Potapov product passes")
def _():
    rng = np.random.default_rng(15)
    b = schur.Potapov(tuple(schur.PotapovFactor(0.7 * rng.random() * np.exp(2j * np.pi * rng.random()), _rand_proj(rng, 2)) for _ in range(3)))
    r = sing.vector_mutual_singularity(b, _rand_unitary(rng, 2))
    return r.verdict and r.max_overlap < 1e-5, f"{len(r.shared)} shared, overlap {r.max_overlap:.3g}"


def _measure_at(thetas) -> atoms.MatrixMeasure:
    return atoms.MatrixMeasure(1, [atoms.Atom(np.exp(1j * t), np.eye(1), "converged") for t in thetas], np.eye(1))


@check("singularity", "trivial", "identical atom lists pair up")
def _():
    p = sing.shared_atoms(_measure_at([0.1, 2.0]), _measure_at([0.1, 2.0]))
    return p == [(0, 0), (1, 1)], str(p)


@check("singularity", "trivial", "disjoint atom lists do not pair")
def _():
    p = sing.shared_atoms(_measure_at([0.1]), _measure_at([2.0]))
    return p == [], str(p)


@check("singularity", "trivial", "atoms 1e-9 apart pair at tolerance 1e-8")
def _():
    p = sing.shared_atoms(_measure_at([0.0]), _measure_at([1e-9]), 1e-8)
    return p == [(0, 0)], str(p)


@check("singularity", "derived", "sweep at probe 1 only hits near t = pi")
def _():
    t = np.linspace(0.1, 3.0, 300)
    rep = sing.alpha_sweep(_z(2), np.eye(2), np.diag([1.0, 2.0]), t, 1.0)
    step = t[1] - t[0]
    good = all(abs(h - np.pi) <= 3 * step for h in rep.hits) and not rep.flagged
    return good, f"{len(rep.hits)} hits in the window"


@check("singularity", "derived", "sweep at probe i hits pi/4, pi/2, 5pi/4")
def _():
    t = np.linspace(0.0, 2 * np.pi, 81)
    rep = sing.alpha_sweep(_z(2), np.eye(2), np.diag([1.0, 2.0]), t, 1j)
    want = [np.pi / 4, np.pi / 2, 5 * np.pi / 4]
    return len(rep.hits) == 3 and _close(rep.hits, want, 1e-12)[0], f"hits {rep.hits}"


@check("singularity", "trivial", "sweep for b = 0 never hits")
def _():
    t = np.linspace(0.1, 3.0, 30)
    rep = sing.alpha_sweep(_zero(2), np.eye(2), np.diag([1.0, 2.0]), t, 1.0)
    return not rep.hits and not rep.flagged, f"{len(rep.hits)} hits"


# ---- oracle -----------------------------------------------------------------


@check("oracle", "trivial", "Herglotz residual 0 for b = 0")
def _():
    f = ClarkFrame(_zero(2), np.eye(2))
    r = oracle.herglotz_residual(f, atoms.clark_measure(f), 0.0)
    return r < 1e-12, f"residual {r:.3g}"


@check("oracle", "trivial", "Herglotz residual 0 for b = z at 0.5")
def _():
    f = ClarkFrame(_z(), 1)
    r = oracle.herglotz_residual(f, atoms.clark_measure(f), 0.5)
    return r < 1e-10, f"residual {r:.3g}"


@check("oracle", "derived", "Herglotz residual for b = z/2 at 0.3")
def _():
    f = ClarkFrame(_half_z(), 1)
    r = oracle.herglotz_residual(f, atoms.clark_measure(f), 0.3)
    return r < 1e-6, f"residual {r:.3g}"


@check("oracle", "trivial", "Cauchy transform of unit mass at 1")
def _():
    return _close(oracle.cauchy_transform(_measure_at([0.0]), 0.5), [[2.0]], 1e-15)


@check("oracle", "trivial", "Cauchy transform of Lebesgue measure is I")
def _():
    f = ClarkFrame(_zero(2), np.eye(2))
    return _close(oracle.cauchy_transform(atoms.clark_measure(f), 0.3 - 0.5j), np.eye(2), 1e-12)


@check("oracle", "derived", "Cauchy identity for b = z/2 at 0.4")
def _():
    f = ClarkFrame(_half_z(), 1)
    r = oracle.cauchy_identity_residual(f, atoms.clark_measure(f), 0.4)
    return r < 1e-6, f"residual {r:.3g}"


@check("oracle", "derived", "reference atoms of z^2")
def _():
    ref = oracle.scalar_reference_atoms([0, 0], 1)
    ok1 = _close(np.sort(np.mod(np.angle(ref.locations), 2 * np.pi)), [0, np.pi], 1e-12)[0]
    return ok1 and _close(ref.masses, [0.5, 0.5], 1e-12)[0], str(ref.masses)


@check("oracle", "trivial", "reference atom of z at alpha = e^{i phi}")
def _():
    ref = oracle.scalar_reference_atoms([0], np.exp(0.9j))
    good = len(ref.locations) == 1 and abs(ref.locations[0] - np.exp(0.9j)) < 1e-12 and abs(ref.masses[0] - 1) < 1e-12
    return good, str(ref.masses)


@check("oracle", "derived", "reference atom of the w=0.5 factor has mass 1/3")
def _():
    ref = oracle.scalar_reference_atoms([0.5], 1)
    good = len(ref.locations) == 1 and abs(ref.locations[0] - 1) < 1e-12 and abs(ref.masses[0] - 1 / 3) < 1e-12
    return good, str(ref.masses)


@check("oracle", "trivial", "H2 norm of 1")
def _():
    est = oracle.h2_norm_estimate(lambda z: np.ones_like(z))
    return est.bounded and _close(est.norms, np.ones_like(est.norms), 1e-12)[0], str(est.value)


@check("oracle", "derived", "H2 norm of 1+z tends to sqrt 2")
def _():
    est = oracle.h2_norm_estimate(lambda z: 1 + z)
    return est.bounded and abs(est.norms[-1] - math.sqrt(2)) < 1e-2, f"{est.norms[-1]:.6g}"


@check("oracle", "derived", "H2 norm of 1/(1-z) is unbounded")
def _():
    est = oracle.h2_norm_estimate(lambda z: 1 / (1 - z))
    return not est.bounded, f"last norms {est.norms[-3:]}"


# ---- cli --------------------------------------------------------------------


@check("cli", "trivial", "atoms report for z^2")
def _():
    from .cli import atoms_report

    rep = atoms_report(ClarkFrame(_z2(), 1), 4096)
    thetas = sorted(a["theta"] % (2 * np.pi) for a in rep["measure"]["atoms"])
    masses = [a["mass"]["re"][0][0] for a in rep["measure"]["atoms"]]
    good = _close(thetas, [0.0, np.pi], 1e-10)[0] and _close(masses, [0.5, 0.5], 1e-10)[0]
    return good, f"thetas {thetas}, masses {masses}"


def _rand_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _rand_proj(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def run_selftest(only: str | None = None) -> list[CheckResult]:
    if only and only not in {c[0] for c in CHECKS}:
        raise ValueError(f"unknown module {only!r}; choose from {sorted({c[0] for c in CHECKS})}")
    out = []
    for module, kind, name, fn in CHECKS:
        if only and module != only:
            continue
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=2)}"
        out.append(CheckResult(name, module, kind, bool(passed), detail))
    return out

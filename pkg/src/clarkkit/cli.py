"""Command line interface.

Exit status: 0 when every requested check passes, 1 when a numerical
verdict is inconclusive or a check fails, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import atoms, caratheodory as cara, herglotz as hg, limits, oracle, schur, singularity as sing
from .herglotz import ClarkFrame
from .linalg import Subspace, as_matrix, matrix_from_json, matrix_to_json, opnorm

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_json(value: str, what: str) -> Any:
    """Parse ``value`` as a path to a JSON file, or as inline JSON."""
    p = Path(value)
    if p.exists():
        try:
            return json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{what} {value}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: not a readable file and not valid JSON ({exc.msg})") from exc


def _power_of_two(text: str) -> int:
    n = int(text)
    if n < 2 or n & (n - 1):
        raise argparse.ArgumentTypeError("grid size must be a power of two")
    return n


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def load_frame(args) -> ClarkFrame:
    if not args.spec:
        raise InputError("--spec is required for this command")
    spec = _load_json(args.spec, "--spec")
    try:
        b = schur.construct(spec)
    except (ValueError, TypeError) as exc:
        raise InputError(f"--spec {args.spec}: {exc}") from exc
    alpha: Any = np.eye(b.n)
    if args.alpha is not None:
        raw = _load_json(args.alpha, "--alpha")
        try:
            alpha = hg.parse_alpha(raw, b.n)
        except (ValueError, TypeError) as exc:
            raise InputError(f"--alpha: {exc}") from exc
    try:
        return ClarkFrame(b, alpha)
    except ValueError as exc:
        raise InputError(f"--alpha: {exc}") from exc


def _cjson(c: complex) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def _finite(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def atoms_report(f: ClarkFrame, grid: int, ac_grid: int = 0) -> dict:
    m = atoms.clark_measure(f, grid)
    problems = m.check_invariants()
    if f.b.is_inner:
        gap = opnorm(m.atom_sum() - m.total)
        if gap >= 1e-6:
            problems.append(f"inner function but atom masses miss the total by {gap:.3g}")
    return {
        "measure": m.to_json(ac_grid),
        "invariant_problems": problems,
        "status": "inconclusive" if (m.flagged or problems) else "converged",
    }


def cmd_eval(args) -> tuple[dict, int]:
    f = load_frame(args)
    pts = [complex(p.replace(" ", "")) for p in (args.z or ["0", "0.5", "0.5j", "-0.9"])]
    out = []
    for z in pts:
        if not abs(z) < 1:
            raise InputError(f"--z {z}: evaluation points must lie inside the unit disc")
        out.append({"z": _cjson(z), "b": matrix_to_json(f.b.eval(z)), "H": matrix_to_json(hg.herglotz(f, z))})
    return {"command": "eval", "points": out, "status": "converged"}, EXIT_OK


def cmd_density(args) -> tuple[dict | str, int]:
    f = load_frame(args)
    thetas = 2.0 * np.pi * np.arange(args.grid) / args.grid
    dens, ok = hg.ac_density_grid(f, thetas, args.tol or hg.DEFAULT_TOL)
    code = EXIT_OK
    if args.format == "csv":
        return hg.density_csv(thetas, dens, ok), code
    return {
        "command": "density",
        "thetas": thetas.tolist(),
        "densities": [matrix_to_json(d) if k else None for d, k in zip(dens, ok)],
        "undefined": int((~ok).sum()),
        # undefined nodes are atom candidates or unconverged boundary values, reported as null
        "status": "converged" if ok.all() else "partial",
    }, code


def cmd_atoms(args) -> tuple[dict, int]:
    f = load_frame(args)
    rep = atoms_report(f, args.grid, ac_grid=64 if args.ac else 0)
    rep["command"] = "atoms"
    return rep, EXIT_OK if rep["status"] == "converged" else EXIT_NUMERIC


def _lambda(args) -> complex:
    if args.lam is None:
        raise InputError("--lambda THETA is required for this command")
    return complex(np.exp(1j * args.lam))


def cad_report(f: ClarkFrame, lam: complex) -> tuple[dict, bool]:
    pm = atoms.confirmed_point_mass(f, lam)
    rep: dict = {"theta": float(np.angle(lam)), "point_mass": pm.to_json()}
    ok = pm.converged
    if not pm.converged or pm.trace <= 1e-12:
        rep["note"] = "no atom at this point" if pm.converged else "point mass limit did not converge"
        return rep, ok
    codir = cara.codirection_space(f, lam)
    e = codir.subspace
    rep["codirection_space"] = {
        "subspace": e.to_json(),
        "definitional_dim": codir.definitional.dim,
        "max_angle": _finite(codir.max_angle),
        "consistent": codir.consistent,
        "diagnostic": codir.diagnostic,
    }
    c = cara.cad(f, lam, e)
    rep["cad"] = c.to_json()
    resid = cara.verify_cad_pointmass(f, lam)
    dual_tol = 1e-4 if pm.tol <= 1e-8 else 5e-3
    rep["duality"] = {"residual": _finite(resid), "tol": dual_tol, "passed": resid < dual_tol}
    gram = []
    for j in range(e.dim):
        g = cara.boundary_gram(f, lam, e.basis[:, j], e.basis[:, j], e)
        gram.append(g.to_json())
    rep["gram_diagonal"] = gram
    ok = ok and c.confident and resid < dual_tol and codir.consistent
    if 0 < e.dim < f.n:
        comp = cara.one_sided_compressions(f, lam, e)
        rep["one_sided_compressions"] = {
            "off_block_left": comp.left.status,
            "off_block_left_rate": comp.left.divergence_rate,
            "off_block_right": comp.right.status,
            "off_block_right_rate": comp.right.divergence_rate,
            "two_sided": comp.both.status,
            "one_sided_diverge": comp.one_sided_diverge,
        }
    return rep, ok


def cmd_cad(args) -> tuple[dict, int]:
    f = load_frame(args)
    rep, ok = cad_report(f, _lambda(args))
    rep["command"] = "cad"
    rep["status"] = "converged" if ok else "inconclusive"
    return rep, EXIT_OK if ok else EXIT_NUMERIC


def cmd_verify(args) -> tuple[dict, int]:
    f = load_frame(args)
    checks: list[dict] = []

    def add(name: str, passed: bool, **info):
        checks.append({"check": name, "passed": bool(passed), **info})

    m = atoms.clark_measure(f, args.grid)
    mixed_tol = 1e-6 if f.b.is_inner else 1e-4
    pts = [r * np.exp(2j * np.pi * k / 10) for k, r in enumerate(np.linspace(0.0, 0.9, 10))]
    res = [oracle.herglotz_residual(f, m, z) for z in pts]
    add("herglotz_representation", max(res) < mixed_tol, max_residual=max(res), tol=mixed_tol)
    add("measure_invariants", not m.check_invariants() and not m.flagged, problems=m.check_invariants(),
        flagged=len(m.flagged))
    if f.b.is_inner:
        gap = opnorm(m.atom_sum() - m.total)
        add("mass_conservation", gap < 1e-6, gap=gap)
    for a in m.atoms:
        entry = {"theta": a.theta, "mass": matrix_to_json(a.mass)}
        if f.n == 1:
            d = limits.nt_limit(f.b.deriv, limits.make_path(a.lam), 1e-8)
            if d.converged:
                want = complex(f.alpha[0, 0] * np.conj(a.lam) / complex(np.asarray(d.value).reshape(-1)[0]))
                err = abs(a.mass[0, 0] - want)
                add("nevanlinna_vs_derivative", err < 1e-6, error=err, **entry)
            else:
                add("nevanlinna_vs_derivative", False, note=f"derivative limit {d.status}", **entry)
        rep, ok = cad_report(f, a.lam)
        add("cad_pointmass_duality", ok, **rep)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    fails = 0
    for _ in range(args.ensemble):
        b, alpha, _lam0 = sing.engineered_shared_atom(rng)
        r = sing.vector_mutual_singularity(b, alpha, grid_size=args.grid)
        worst = max(worst, r.max_overlap)
        fails += (not r.verdict) or not r.shared
    add("vector_mutual_singularity_ensemble", fails == 0, frames=args.ensemble, failures=fails, max_overlap=worst)
    if opnorm(f.alpha - np.eye(f.n)) > 1e-12:
        r = sing.vector_mutual_singularity(f.b, f.alpha, grid_size=args.grid)
        add("vector_mutual_singularity_frame", r.verdict, **r.to_json())
    passed = all(c["passed"] for c in checks)
    out = {"command": "verify", "checks": checks, "status": "pass" if passed else "fail"}
    return out, EXIT_OK if passed else EXIT_NUMERIC


def cmd_sweep(args) -> tuple[dict | str, int]:
    if not args.spec:
        raise InputError("--spec is required for this command")
    f = load_frame(args)
    a = np.diag([1.0, 2.0][: f.n] + [float(k + 3) for k in range(max(0, f.n - 2))])
    if args.generator is not None:
        raw = _load_json(args.generator, "--generator")
        try:
            if isinstance(raw, dict):
                a = matrix_from_json(raw)
            elif isinstance(raw, list) and raw and not isinstance(raw[0], list):
                a = np.diag(np.asarray(raw, dtype=float))
            else:
                a = as_matrix(raw, f.n)
        except (ValueError, TypeError) as exc:
            raise InputError(f"--generator: {exc}") from exc
    t = np.linspace(args.t_min, args.t_max, args.samples)
    try:
        rep = sing.alpha_sweep(f.b, f.alpha, a, t, _lambda(args) if args.lam is not None else 1.0, args.tol or 1e-6)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    code = EXIT_OK if not rep.flagged else EXIT_NUMERIC
    if args.format == "csv":
        return sing.sweep_csv(rep), code
    return {
        "command": "sweep",
        "hits": rep.hits,
        "hit_runs": rep.hit_runs(),
        "flagged": rep.flagged,
        "entries": [{"t": e.t, "trace_mass": e.trace_mass, "status": e.status} for e in rep.entries],
        "status": "converged" if not rep.flagged else "inconclusive",
    }, code


def cmd_selftest(args) -> tuple[dict, int]:
    from .selftest import run_selftest

    try:
        results = run_selftest(args.module)
    except ValueError as exc:
        raise InputError(f"--module: {exc}") from exc
    failed = [r for r in results if not r.passed]
    out = {
        "command": "selftest",
        "total": len(results),
        "failed": len(failed),
        "checks": [r.to_json() for r in results],
        "status": "pass" if not failed else "fail",
    }
    return out, EXIT_OK if not failed else EXIT_NUMERIC


COMMANDS = {
    "eval": cmd_eval,
    "density": cmd_density,
    "atoms": cmd_atoms,
    "cad": cmd_cad,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clarkkit", description="Clark measures of matrix Schur functions")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="construction tree: JSON file path or inline JSON")
    common.add_argument("--alpha", help="unitary alpha: JSON file path or inline JSON (default identity)")
    common.add_argument("--lambda", dest="lam", type=float, help="boundary point as an angle theta")
    common.add_argument("--grid", type=_power_of_two, default=4096, help="grid size (power of two)")
    common.add_argument("--tol", type=_positive, default=None, help="tolerance override")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    p = sub.add_parser("eval", parents=[common], help="evaluate b and H at interior points")
    p.add_argument("--z", action="append", help="complex point such as 0.3+0.2j (repeatable)")
    p = sub.add_parser("density", parents=[common], help="AC density on a uniform grid")
    p = sub.add_parser("atoms", parents=[common], help="atoms and total mass of the Clark measure")
    p.add_argument("--ac", action="store_true", help="include a 64-point density grid")
    sub.add_parser("cad", parents=[common], help="angular derivative report at --lambda")
    p = sub.add_parser("verify", parents=[common], help="oracle audit of a frame")
    p.add_argument("--ensemble", type=int, default=10, help="number of engineered shared-atom frames")
    p = sub.add_parser("sweep", parents=[common], help="probe mass along alpha(t) = exp(itA) alpha")
    p.add_argument("--generator", help="Hermitian sign-definite A (JSON matrix or diagonal list)")
    p.add_argument("--t-min", type=float, default=0.1)
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=300)
    p = sub.add_parser("selftest", parents=[common], help="run every closed-form example check")
    p.add_argument("--module", help="restrict to one module")
    return parser


def _emit(payload: dict | str, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Subspace):
        return o.to_json()
    raise TypeError(f"not serializable: {type(o).__name__}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        payload, code = COMMANDS[args.command](args)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (hg.InconclusiveLimit, hg.AtomCandidate) as exc:
        sys.stderr.write(f"inconclusive: {exc}\n")
        return EXIT_NUMERIC
    _emit(payload, args.out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

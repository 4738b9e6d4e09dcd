import numpy as np
import pytest

from clarkkit.atoms import Atom, MatrixMeasure
from clarkkit.herglotz import ClarkFrame
from clarkkit.linalg import opnorm
from clarkkit.schur import identity_times_z
from clarkkit.singularity import (
    alpha_sweep,
    engineered_shared_atom,
    shared_atoms,
    sweep_csv,
    vector_mutual_singularity,
)

from helpers import rand_unitary


def _measure(thetas):
    return MatrixMeasure(1, [Atom(np.exp(1j * t), np.eye(1), "converged") for t in thetas], np.eye(1))


def test_shared_atom_matching():
    m1, m2 = _measure([0.0, 1.0, 2.0]), _measure([1.0 + 1e-10, 3.0])
    assert shared_atoms(m1, m2) == [(1, 0)]
    assert shared_atoms(m1, _measure([0.5])) == []


def test_identity_alpha_rejected():
    with pytest.raises(ValueError):
        vector_mutual_singularity(identity_times_z(2), np.eye(2))


def test_z_identity_with_rotated_alpha():
    rng = np.random.default_rng(2)
    alpha = rand_unitary(rng, 2)
    rep = vector_mutual_singularity(identity_times_z(2), alpha)
    assert rep.verdict


def test_engineered_construction_shares_an_atom():
    rng = np.random.default_rng(3)
    b, alpha, lam0 = engineered_shared_atom(rng)
    assert opnorm(alpha.conj().T @ alpha - np.eye(2)) < 1e-12
    # b(lam0) alpha* has eigenvalue 1, and so does b(lam0) itself
    r = (1 - 1e-12) * lam0
    for m in (b(r) @ alpha.conj().T, b(r)):
        assert np.min(np.abs(np.linalg.eigvals(m) - 1)) < 1e-9


def test_engineered_ensemble():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        b, alpha, lam0 = engineered_shared_atom(rng)
        rep = vector_mutual_singularity(b, alpha)
        assert rep.verdict, rep.to_json()
        assert any(abs(np.angle(s.lam / lam0)) < 1e-8 for s in rep.shared)
        worst = max(worst, rep.max_overlap)
    assert worst < 1e-5


@pytest.mark.parametrize("delta", [0.1, 0.5, 0.9])
def test_near_orthogonal_distance_bound(delta):
    rng = np.random.default_rng(int(delta * 10))
    n = 4
    for _ in range(10_000):
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        x *= rng.uniform(0.1, 10.0) / np.linalg.norm(x)
        w = rng.normal(size=n) + 1j * rng.normal(size=n)
        w -= x * np.vdot(x, w) / np.vdot(x, x)
        w /= np.linalg.norm(w)
        c = rng.uniform(0.0, delta)
        y = (c * np.exp(2j * np.pi * rng.random()) * x / np.linalg.norm(x) + np.sqrt(1 - c * c) * w) * rng.uniform(0.1, 10.0)
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        assert abs(np.vdot(x, y)) <= delta * nx * ny * (1 + 1e-12)
        assert np.linalg.norm(x - y) ** 2 >= (1 - delta) * (nx**2 + ny**2) * (1 - 1e-12)


def test_sweep_argument_checks():
    b = identity_times_z(2)
    with pytest.raises(ValueError):
        alpha_sweep(b, np.eye(2), np.diag([1.0, -1.0]), [0.5], 1.0)
    with pytest.raises(ValueError):
        alpha_sweep(b, np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]), [0.5], 1.0)


def test_sweep_isolation_at_predicted_points():
    b = identity_times_z(2)
    t = np.linspace(0.0, 2 * np.pi, 81)
    step = t[1] - t[0]
    rep = alpha_sweep(b, np.eye(2), np.diag([1.0, 2.0]), t, 1j)
    # e^{it} = i or e^{2it} = i
    predicted = np.array([np.pi / 2, np.pi / 4, 5 * np.pi / 4])
    assert not rep.flagged
    for start, stop in rep.hit_runs():
        assert stop - start < 3
        assert np.min(np.abs(predicted - t[start])) <= 3 * step
    for p in predicted:
        assert any(abs(h - p) < 1e-9 for h in rep.hits)
    lines = sweep_csv(rep).splitlines()
    assert lines[0] == "t,trace_mass_at_probe,flag" and len(lines) == 82


def test_sweep_without_hits_in_window():
    t = np.linspace(0.1, 3.0, 300)
    rep = alpha_sweep(identity_times_z(2), np.eye(2), np.diag([1.0, 2.0]), t, 1.0)
    step = t[1] - t[0]
    assert all(abs(h - np.pi) <= 3 * step for h in rep.hits)
    assert not rep.flagged

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clarkkit.limits import in_stolz_region, limit_from_sequence, make_path, nt_limit, radial_limits

seeds = st.integers(0, 2**32 - 1)


def test_radial_path_points():
    p = make_path(1.0, t=2.0, q=0.5, psi=0.0)
    z = p.points()
    k = np.arange(1, z.size + 1)
    assert np.allclose(z, 1 - 0.5**k, atol=1e-15)
    assert np.all(z.imag == 0)


def test_rotated_path_and_gaps():
    p = make_path(1j, t=2.0, q=0.5)
    z = p.points()
    assert np.allclose(z, 1j * (1 - 0.5 ** np.arange(1, z.size + 1)), atol=1e-15)
    g = p.gaps()
    assert np.allclose(g[1:] / g[:-1], 0.5)
    assert g[-1] >= p.min_gap


def test_path_argument_checks():
    with pytest.raises(ValueError):
        make_path(1.0, t=1.0)
    with pytest.raises(ValueError):
        make_path(1.0, q=1.0)
    with pytest.raises(ValueError):
        make_path(0.5)


@given(st.floats(0, 2 * np.pi), st.floats(1.05, 6.0), st.floats(-1.5, 1.5))
def test_path_stays_in_stolz_region(theta, t, psi):
    lam = np.exp(1j * theta)
    p = make_path(lam, t=t, psi=psi)
    assert all(in_stolz_region(z, lam, t) for z in p.points())


def test_example_limits():
    p = make_path(1.0)
    r = nt_limit(lambda z: (1 - z) / (1 - z), p, 1e-10)
    assert r.converged and abs(r.value - 1) < 1e-12
    r = nt_limit(lambda z: 1 / (1 - z), p)
    assert r.status == "diverging"
    assert abs(r.divergence_rate - 2.0) < 1e-6
    r = nt_limit(lambda z: (1 - z) ** 0.5, p, 1e-8)
    assert r.converged and abs(r.value) < 1e-8


def test_matrix_limit_shape():
    r = nt_limit(lambda z: np.array([[z, 0], [0, z * z]]), make_path(-1.0), 1e-10)
    assert r.converged
    assert np.allclose(r.value, np.diag([-1.0, 1.0]), atol=1e-10)


def test_evaluation_failure_is_inconclusive():
    def g(z):
        raise ArithmeticError("boom")

    r = nt_limit(g, make_path(1.0))
    assert r.status == "inconclusive"
    assert r.diagnostic


def test_oscillating_sequence_is_not_converged():
    r = limit_from_sequence([(-1.0) ** k for k in range(30)], 1e-8)
    assert not r.converged


def test_radial_limits_batch():
    lams = np.exp(1j * np.linspace(0, 2 * np.pi, 16, endpoint=False))
    vals, ok = radial_limits(lambda z: (z**2)[..., None, None], lams, 1e-10)
    assert ok.all()
    assert np.allclose(vals[:, 0, 0], lams**2, atol=1e-10)


@given(seeds)
def test_path_independence(seed):
    rng = np.random.default_rng(seed)
    lam = np.exp(2j * np.pi * rng.random())
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    p = rng.uniform(0.3, 2.0)
    tol = 1e-8

    def g(z):
        return np.array([c[0] + (1 - z * np.conj(lam)) ** p, c[1] * z])

    vals = []
    for psi in (0.0, 0.3, -0.3):
        r = nt_limit(g, make_path(lam, psi=psi), tol)
        assert r.converged
        vals.append(np.asarray(r.value))
    scale = max(1.0, np.linalg.norm(vals[0]))
    assert np.linalg.norm(vals[1] - vals[0]) < 5 * tol * scale
    assert np.linalg.norm(vals[2] - vals[0]) < 5 * tol * scale


def test_error_estimate_coverage():
    rng = np.random.default_rng(11)
    trials, covered = 200, 0
    for _ in range(trials):
        lam = np.exp(2j * np.pi * rng.random())
        c = rng.normal() + 1j * rng.normal()
        a = rng.normal() + 1j * rng.normal()
        p = rng.uniform(0.3, 2.0)
        r = nt_limit(lambda z: c + a * (1 - z * np.conj(lam)) ** p, make_path(lam, psi=rng.uniform(-0.3, 0.3)), 1e-8)
        covered += bool(r.converged and abs(complex(r.value) - c) <= r.est_error)
    assert covered >= 0.95 * trials

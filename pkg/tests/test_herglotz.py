import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clarkkit.atoms import clark_measure
from clarkkit.herglotz import (
    AtomCandidate,
    ClarkFrame,
    ac_density,
    ac_density_grid,
    ac_density_resolvent,
    defect,
    density_csv,
    density_rank,
    herglotz,
    parse_alpha,
    resolvent,
)
from clarkkit.linalg import rank
from clarkkit.oracle import cauchy_identity_residual
from clarkkit.schur import Blaschke, Constant, Counterexample, DirectSum, Scale, construct, identity_times_z

from helpers import interior_points, rand_blaschke, rand_phase, rand_unitary, zi2_frame

seeds = st.integers(0, 2**32 - 1)


def _frames(rng):
    return [
        ClarkFrame(rand_blaschke(rng), np.array([[rand_phase(rng)]])),
        zi2_frame(rng),
        ClarkFrame(DirectSum((Scale(0.7, rand_blaschke(rng, 3)), rand_blaschke(rng, 3))), rand_unitary(rng, 2)),
        ClarkFrame(Counterexample(0.5, 0.8, 0.05), rand_unitary(rng, 2)),
        ClarkFrame(Constant(np.zeros((2, 2))), rand_unitary(rng, 2)),
    ]


def test_alpha_must_be_unitary():
    with pytest.raises(ValueError):
        ClarkFrame(identity_times_z(2), np.diag([1.0, 0.5]))


def test_parse_alpha_forms():
    assert np.allclose(parse_alpha(1, 2), np.eye(2))
    assert np.allclose(parse_alpha({"diag_phases": [0.0, np.pi]}, 2), np.diag([1.0, -1.0]))
    assert np.allclose(parse_alpha([0.0, 1.0], 1), [[1j]])


def test_herglotz_of_z():
    f = ClarkFrame(Blaschke((0.0,)), np.eye(1))
    assert abs(herglotz(f, 0.5)[0, 0] - 3.0) < 1e-14
    assert abs(resolvent(f, 0.5)[0, 0] - 2.0) < 1e-14


def test_resolvent_multiply_back():
    rng = np.random.default_rng(0)
    f = zi2_frame(rng)
    for z in interior_points(rng, 10):
        assert np.linalg.norm((f.eye - f.a(z)) @ resolvent(f, z) - f.eye, 2) < 1e-12


def test_density_of_zero_function_is_identity():
    f = ClarkFrame(Constant(np.zeros((3, 3))), np.eye(3))
    dens, ok = ac_density_grid(f, np.linspace(0, 2 * np.pi, 64, endpoint=False))
    assert ok.all()
    assert np.max(np.abs(dens - np.eye(3))) < 1e-10


def test_density_of_half_z():
    f = ClarkFrame(construct({"type": "scale", "c": 0.5, "inner": {"type": "blaschke", "zeros": [0]}}), np.eye(1))
    for th in (0.0, 1.0, np.pi):
        lam = np.exp(1j * th)
        want = 0.75 / abs(1 - 0.5 * lam) ** 2
        assert abs(ac_density(f, lam)[0, 0] - want) < 1e-10


def test_atom_raises_atom_candidate():
    f = ClarkFrame(identity_times_z(2), np.eye(2))
    with pytest.raises(AtomCandidate):
        ac_density(f, 1.0)


def test_defect_inside_and_on_circle():
    f = ClarkFrame(identity_times_z(2), np.eye(2))
    assert np.allclose(defect(f, 0.0), np.eye(2))
    assert np.linalg.norm(defect(f, 1j)) < 1e-6
    with pytest.raises(ValueError):
        defect(f, 1.5)


def test_density_csv_header():
    f = ClarkFrame(Constant(np.zeros((2, 2))), np.eye(2))
    th = np.array([0.0, 1.0])
    dens, ok = ac_density_grid(f, th)
    text = density_csv(th, dens, ok)
    head = text.splitlines()[0].split(",")
    assert head[0] == "theta" and head[-1] == "flag"
    assert len(head) == 2 + 8


@given(seeds)
def test_herglotz_positivity(seed):
    rng = np.random.default_rng(seed)
    for f in _frames(rng):
        for z in interior_points(rng, 40, 0.99):
            h = herglotz(f, z)
            assert np.linalg.eigvalsh(0.5 * (h + h.conj().T)).min() >= -1e-10


@given(seeds)
def test_density_factorizations_agree(seed):
    rng = np.random.default_rng(seed)
    b = DirectSum((Scale(0.6, rand_blaschke(rng, 3)), Scale(0.8, rand_blaschke(rng, 3))))
    f = ClarkFrame(b, rand_unitary(rng, 2))
    for th in rng.uniform(0, 2 * np.pi, 5):
        lam = np.exp(1j * th)
        assert np.linalg.norm(ac_density(f, lam) - ac_density_resolvent(f, lam), 2) < 1e-10


def test_density_rank_law():
    rng = np.random.default_rng(4)
    b = DirectSum((Blaschke((0.0,)), Scale(0.5, Blaschke((0.0,)))))
    f = ClarkFrame(b, rand_unitary(rng, 2))
    for th in rng.uniform(0, 2 * np.pi, 64):
        lam = np.exp(1j * th)
        d = defect(f, lam)
        assert density_rank(ac_density(f, lam)) == rank(d @ d, 1e-8) == 1


def test_cauchy_identity_on_inner_frames():
    rng = np.random.default_rng(6)
    for f in (ClarkFrame(rand_blaschke(rng, 6), np.array([[rand_phase(rng)]])), zi2_frame(rng)):
        m = clark_measure(f)
        for z in interior_points(rng, 10, 0.9):
            assert cauchy_identity_residual(f, m, z) < 1e-6

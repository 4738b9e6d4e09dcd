import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clarkkit.atoms import clark_measure, confirmed_point_mass
from clarkkit.caratheodory import (
    boundary_gram,
    boundary_kernel,
    cad,
    cara_condition,
    codirection_space,
    one_sided_compressions,
    verify_cad_pointmass,
)
from clarkkit.herglotz import ClarkFrame
from clarkkit.linalg import Subspace, range_basis
from clarkkit.schur import Blaschke, Counterexample, DirectSum, SchurFunction, Scale, identity_times_z

from helpers import rand_blaschke, rand_unitary, zi2_frame

seeds = st.integers(0, 2**32 - 1)


class Compressed(SchurFunction):
    """``u* b alpha* u`` for an orthonormal basis ``u`` of a subspace."""

    def __init__(self, f: ClarkFrame, e: Subspace):
        self.f = f
        self.u = e.basis
        self.n = e.dim

    def _values(self, z):
        return self.u.conj().T @ (self.f.b._values(z) @ self.f.alpha.conj().T) @ self.u


def _mixed_frame(rng):
    """Inner first block, strictly contractive second block: codirections are span{e_1}."""
    b = DirectSum((rand_blaschke(rng, 4), Scale(float(rng.uniform(0.3, 0.9)), rand_blaschke(rng, 3))))
    return ClarkFrame(b, np.eye(2))


@pytest.fixture(scope="module")
def counterexample():
    return ClarkFrame(Counterexample(0.5, 0.8, 0.05), np.eye(2))


def test_cara_condition_on_inner_and_strict_blocks():
    f = ClarkFrame(DirectSum((Blaschke((0.0,)), Scale(0.5, Blaschke((0.0,))))), np.eye(2))
    good = cara_condition(f, 1j, [1.0, 0.0])
    bad = cara_condition(f, 1j, [0.0, 1.0])
    assert good.satisfied and good.consistent
    assert not bad.satisfied and bad.consistent
    with pytest.raises(ValueError):
        cara_condition(f, 1j, [0.0, 0.0])


def test_boundary_kernel_norm_for_z():
    f = ClarkFrame(Blaschke((0.0,)), np.eye(1))
    k = boundary_kernel(f, 1.0, [1.0])
    assert k.norm_sq.converged and abs(k.norm_sq.value - 1.0) < 1e-6
    assert abs(k.h2_norm - 1.0) < 1e-2
    g = ClarkFrame(Scale(0.5, Blaschke((0.0,))), np.eye(1))
    with pytest.raises(ValueError):
        boundary_kernel(g, 1.0, [1.0])


def test_cad_closed_forms():
    f = ClarkFrame(Blaschke((0.0, 0.0)), np.eye(1))
    r = cad(f, -1.0, Subspace.full(1))
    assert r.status == "converged"
    assert abs(r.on_e[0, 0] + 2.0) < 1e-6
    assert verify_cad_pointmass(f, -1.0) < 1e-6
    with pytest.raises(ValueError):
        cad(f, 1.0, Subspace.zero(1))


def test_duality_rejects_zero_mass():
    f = ClarkFrame(Blaschke((0.0,)), np.eye(1))
    with pytest.raises(ValueError):
        verify_cad_pointmass(f, 1j)


@settings(max_examples=10)
@given(seeds)
def test_duality_on_z_identity(seed):
    rng = np.random.default_rng(seed)
    f = zi2_frame(rng)
    for a in clark_measure(f).atoms:
        assert verify_cad_pointmass(f, a.lam) < 1e-4


@settings(max_examples=10)
@given(seeds)
def test_subspace_closure(seed):
    rng = np.random.default_rng(seed)
    f = _mixed_frame(rng)
    lam = np.exp(2j * np.pi * rng.random())
    x = np.array([rng.normal() + 1j * rng.normal(), 0.0])
    y = np.array([rng.normal() + 1j * rng.normal(), 0.0])
    rx, ry = cara_condition(f, lam, x), cara_condition(f, lam, y)
    assert rx.satisfied and ry.satisfied
    assert cara_condition(f, lam, x + y).satisfied
    # a generic vector picks up the strict block and fails
    assert not cara_condition(f, lam, x + np.array([0.0, 1.0])).satisfied


@settings(max_examples=8)
@given(seeds)
def test_cad_implies_caratheodory_on_compression(seed):
    rng = np.random.default_rng(seed)
    f = ClarkFrame(DirectSum((rand_blaschke(rng, 3), rand_blaschke(rng, 3))), rand_unitary(rng, 2))
    for a in clark_measure(f).atoms[:3]:
        e = range_basis(a.mass, 1e-6)
        r = cad(f, a.lam, e)
        if r.status != "converged":
            continue
        # two limit forms agree on every convergent case
        assert r.agreement < 1e-4 * max(1.0, np.linalg.norm(r.on_e, 2))
        g = ClarkFrame(Compressed(f, e), np.eye(e.dim))
        for j in range(e.dim):
            assert cara_condition(g, a.lam, np.eye(e.dim)[j]).satisfied


@settings(max_examples=8)
@given(seeds)
def test_codirection_routes_agree(seed):
    rng = np.random.default_rng(seed)
    frames = [zi2_frame(rng), ClarkFrame(DirectSum((rand_blaschke(rng, 3), rand_blaschke(rng, 3))), rand_unitary(rng, 2))]
    for f in frames:
        for a in clark_measure(f).atoms[:2]:
            c = codirection_space(f, a.lam)
            assert c.consistent, c.diagnostic
            assert c.max_angle < 1e-4


@pytest.mark.parametrize(
    "frame,lam",
    [
        (ClarkFrame(Blaschke((0.0,)), np.eye(1)), 1.0),
        (ClarkFrame(Blaschke((0.0, 0.0)), np.eye(1)), -1.0),
        (ClarkFrame(identity_times_z(2), rand_unitary(np.random.default_rng(7), 2)), None),
    ],
)
def test_gram_matches_lambda_times_cad(frame, lam):
    lams = [lam] if lam is not None else [a.lam for a in clark_measure(frame).atoms]
    for lam in lams:
        e = range_basis(confirmed_point_mass(frame, lam).value, 1e-6)
        for j in range(e.dim):
            x = e.basis[:, j]
            g = boundary_gram(frame, lam, x, x, e)
            assert g.limit.converged
            assert g.mismatch < 1e-4


def test_counterexample_compressions(counterexample):
    e = Subspace(np.array([[1.0], [0.0]], dtype=complex))
    r = one_sided_compressions(counterexample, 1.0, e)
    assert r.one_sided_diverge
    assert r.both.converged
    assert abs(r.both.value[0, 0] - 1.0) < 5e-3
    assert verify_cad_pointmass(counterexample, 1.0) < 5e-3


def test_counterexample_codirections(counterexample):
    c = codirection_space(counterexample, 1.0)
    assert c.subspace.dim == 1
    assert c.subspace.contains(np.array([1.0, 0.0]), 1e-4)

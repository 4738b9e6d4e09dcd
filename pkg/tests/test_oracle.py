from dataclasses import dataclass
from typing import Callable

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from clarkkit.atoms import clark_measure
from clarkkit.herglotz import ClarkFrame, herglotz
from clarkkit.oracle import (
    QuadratureGrid,
    cauchy_identity_residual,
    cauchy_transform,
    h2_norm_estimate,
    herglotz_residual,
    scalar_reference_atoms,
)
from clarkkit.schur import Blaschke, Constant, Counterexample, Scale

from helpers import interior_points, rand_blaschke, rand_phase, zi2_frame

seeds = st.integers(0, 2**32 - 1)


@dataclass
class DensityOnly:
    """A purely absolutely continuous scalar measure given by a density sampler."""

    density: Callable[[np.ndarray], np.ndarray]
    n: int = 1
    atoms: tuple = ()

    def ac_many(self, thetas):
        w = self.density(thetas)
        ok = np.isfinite(w)
        return np.where(ok, w, np.nan)[:, None, None].astype(complex), ok


def test_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        QuadratureGrid(1000)
    g = QuadratureGrid(8)
    assert np.isclose(g.weights.sum(), 1.0)


def test_residual_examples():
    f0 = ClarkFrame(Constant(np.zeros((1, 1))), np.eye(1))
    assert herglotz_residual(f0, clark_measure(f0), 0.0) < 1e-12
    fz = ClarkFrame(Blaschke((0.0,)), np.eye(1))
    assert herglotz_residual(fz, clark_measure(fz), 0.5) < 1e-12
    fh = ClarkFrame(Scale(0.5, Blaschke((0.0,))), np.eye(1))
    assert herglotz_residual(fh, clark_measure(fh), 0.3) < 1e-6
    with pytest.raises(ValueError):
        herglotz_residual(fz, clark_measure(fz), 0.95)


def test_residual_with_non_hermitian_h0():
    # b(0) = -0.5 and alpha = i give H(0) with a nonzero imaginary part
    f = ClarkFrame(Blaschke((0.5,)), np.array([[1j]]))
    h0 = herglotz(f, 0.0)[0, 0]
    assert abs(h0.imag) > 0.1
    m = clark_measure(f)
    assert herglotz_residual(f, m, 0.4 - 0.2j) < 1e-9


def test_power_singularity_correction():
    # density |sin(theta/2)|^(-1/2): total mass sqrt(pi) Gamma(1/4) / (pi Gamma(3/4))
    def dens(th):
        with np.errstate(divide="ignore"):
            return np.where(np.sin(th / 2) == 0, np.inf, np.abs(np.sin(th / 2)) ** -0.5)

    exact = np.sqrt(np.pi) * gamma(0.25) / gamma(0.75) / np.pi
    m = DensityOnly(dens)
    got = cauchy_transform(m, 0.0, QuadratureGrid(4096))[0, 0].real
    plain = np.nansum(np.where(np.isfinite(dens(QuadratureGrid(4096).thetas)), dens(QuadratureGrid(4096).thetas), 0)) / 4096
    assert abs(got - exact) < 1e-4
    assert abs(plain - exact) > 100 * abs(got - exact)


def test_counterexample_mixed_frame_residual():
    f = ClarkFrame(Counterexample(0.5, 0.8, 0.05), np.eye(2))
    m = clark_measure(f)
    rng = np.random.default_rng(1)
    assert max(herglotz_residual(f, m, z) for z in interior_points(rng, 10)) < 1e-4


@settings(max_examples=20)
@given(seeds)
def test_reference_atoms_agree_with_atom_finder(seed):
    rng = np.random.default_rng(seed)
    b = rand_blaschke(rng)
    alpha = rand_phase(rng)
    f = ClarkFrame(b, np.array([[alpha]]))
    ref = scalar_reference_atoms(b.zeros, alpha)
    m = clark_measure(f)
    assert len(m.atoms) == len(ref.locations) == len(b.zeros)
    for a, lam, mass in zip(m.atoms, ref.locations, ref.masses):
        assert abs(np.angle(a.lam / lam)) < 1e-8
        assert abs(a.mass[0, 0].real - mass) < 1e-8
    h0 = herglotz(f, 0.0)
    assert abs(ref.masses.sum() - h0[0, 0].real) < 1e-10
    assert abs(ref.total - h0[0, 0].real) < 1e-10


def test_reference_atoms_with_phase():
    ref = scalar_reference_atoms([0.0], 1.0, phase=1j)
    assert np.allclose(ref.locations, [-1j])
    assert np.allclose(ref.masses, [1.0])


@settings(max_examples=5)
@given(seeds)
def test_cauchy_identity_at_random_points(seed):
    rng = np.random.default_rng(seed)
    for f in (ClarkFrame(rand_blaschke(rng), np.array([[rand_phase(rng)]])), zi2_frame(rng)):
        m = clark_measure(f)
        for z in interior_points(rng, 50, 0.9):
            assert cauchy_identity_residual(f, m, z) < 1e-5


def test_h2_estimates():
    bounded = h2_norm_estimate(lambda z: np.ones_like(z))
    assert bounded.bounded and abs(bounded.value - 1.0) < 1e-12
    unbounded = h2_norm_estimate(lambda z: 1.0 / (1.0 - z))
    assert not unbounded.bounded
    with pytest.raises(ValueError):
        h2_norm_estimate(lambda z: z, k=2)

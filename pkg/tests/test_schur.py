import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clarkkit.schur import (
    AtomicInner,
    Blaschke,
    Constant,
    Counterexample,
    DirectSum,
    Potapov,
    PotapovFactor,
    Product,
    Scale,
    ScalarLift,
    check_contractive,
    construct,
    identity_times_z,
)

from helpers import interior_points, rand_blaschke, rand_unitary

seeds = st.integers(0, 2**32 - 1)


def _rand_proj(rng, n):
    k = int(rng.integers(1, n + 1))
    q = rand_unitary(rng, n)[:, :k]
    return q @ q.conj().T


def _rand_scalar(rng):
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return rand_blaschke(rng, 4)
    if kind == 1:
        return AtomicInner(complex(np.exp(2j * np.pi * rng.random())), float(rng.uniform(0.1, 2.0)))
    return Scale(float(rng.uniform(0.1, 0.99)), rand_blaschke(rng, 3))


def _rand_composite(rng):
    n = 2
    w = 0.8 * rng.random() * np.exp(2j * np.pi * rng.random())
    pot = Potapov((PotapovFactor(0.0, _rand_proj(rng, n)), PotapovFactor(w, _rand_proj(rng, n), rand_unitary(rng, n))))
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return Product((pot, Scale(0.9, identity_times_z(n))))
    if kind == 1:
        return DirectSum((_rand_scalar(rng), _rand_scalar(rng)))
    if kind == 2:
        return ScalarLift(_rand_scalar(rng), _rand_scalar(rng), int(rng.integers(0, 2)))
    return Product((DirectSum((_rand_scalar(rng), _rand_scalar(rng))), pot))


def test_blaschke_values_and_inner_flag():
    b = Blaschke((0.0, 0.5))
    z = 0.3 + 0.1j
    assert abs(b(z)[0, 0] - z * (z - 0.5) / (1 - 0.5 * z)) < 1e-15
    assert b.is_inner
    assert not Scale(0.5, b).is_inner


def test_eval_rejects_boundary_points():
    b = identity_times_z(2)
    with pytest.raises(ValueError):
        b.eval(1.0)
    with pytest.raises(ValueError):
        b.deriv(1.0 + 0j)


def test_construct_rejects_bad_trees():
    with pytest.raises(ValueError):
        construct({"zeros": [0]})
    with pytest.raises(ValueError):
        construct({"type": "nope"})
    with pytest.raises(ValueError):
        construct({"type": "constant", "value": [[1.0]]})
    with pytest.raises(ValueError):
        construct({"type": "blaschke"})


def test_counterexample_parameter_checks():
    with pytest.raises(ValueError):
        Counterexample(0.5, 0.7, 0.05)  # 2 beta <= 2 - gamma
    with pytest.raises(ValueError):
        Counterexample(1.5, 0.8, 0.05)
    with pytest.raises(ValueError):
        Counterexample(0.5, 0.8, 5.0)  # not contractive on the axis


def test_spec_roundtrip():
    rng = np.random.default_rng(5)
    for _ in range(10):
        b = _rand_composite(rng)
        c = construct(json.loads(json.dumps(b.to_spec())))
        z = interior_points(rng, 5)
        assert np.allclose(b.eval_many(z), c.eval_many(z), atol=1e-14)


def test_constant_zero():
    b = construct({"type": "zero", "n": 3})
    assert np.array_equal(b(0.5), np.zeros((3, 3)))
    assert isinstance(b, Constant)


@given(seeds)
def test_derivative_matches_central_difference(seed):
    rng = np.random.default_rng(seed)
    b = _rand_composite(rng)
    h = 1e-5
    for z in interior_points(rng, 3, 0.8):
        fd = (b(z + h) - b(z - h)) / (2 * h)
        assert np.max(np.abs(b.deriv(z) - fd)) < 1e-6


@given(seeds)
def test_composites_are_contractive(seed):
    rng = np.random.default_rng(seed)
    b = _rand_composite(rng)
    assert check_contractive(b) < 1.0
    construct(b)


@given(st.floats(-0.999, 0.999), st.floats(-3.0, 3.0))
def test_counterexample_transplant(x, y):
    cx = Counterexample(0.5, 0.8, 0.05)
    xi = complex(x * np.cos(y), x * np.sin(y))
    want = cx.half_plane(cx.omega(xi))
    assert np.max(np.abs(cx(xi) - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))


def test_counterexample_in_disc_is_strict_contraction():
    cx = Counterexample(0.5, 0.8, 0.05)
    assert cx.axis_sup_norm() < 1.0
    assert check_contractive(cx) < 1.0

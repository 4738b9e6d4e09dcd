import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clarkkit.linalg import (
    MAX_DIM,
    Subspace,
    as_matrix,
    matrix_from_json,
    matrix_to_json,
    pinv,
    principal_angles,
    proj,
    psd_sqrt,
    range_basis,
    rank,
)

seeds = st.integers(0, 2**32 - 1)


def _rand(rng, m, n, r=None):
    a = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    if r is None:
        return a
    u, s, vh = np.linalg.svd(a)
    s[r:] = 0
    return (u[:, : len(s)] * s) @ vh[: len(s)]


def test_penrose_equations():
    rng = np.random.default_rng(1)
    m = _rand(rng, 3, 3)
    p = pinv(m)
    assert np.linalg.norm(m @ p @ m - m) < 1e-10
    assert np.linalg.norm(p @ m @ p - p) < 1e-10
    assert np.linalg.norm((m @ p).conj().T - m @ p) < 1e-10
    assert np.linalg.norm((p @ m).conj().T - p @ m) < 1e-10


def test_pinv_of_zero_and_diag():
    assert np.allclose(pinv(np.zeros((2, 2))), 0)
    assert np.allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_range_basis_of_low_rank_psd():
    rng = np.random.default_rng(2)
    x = _rand(rng, 4, 2)
    m = x @ x.conj().T
    e = range_basis(m)
    assert e.dim == 2
    assert np.linalg.norm((np.eye(4) - proj(e)) @ m, 2) < 1e-10


def test_rank_and_psd_sqrt():
    assert rank(np.diag([1.0, 1e-12, 0.0])) == 1
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    r = psd_sqrt(m)
    assert np.allclose(r @ r, m, atol=1e-12)


def test_subspace_rejects_non_orthonormal_basis():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_dimension_cap():
    with pytest.raises(ValueError):
        as_matrix(np.eye(MAX_DIM + 1))


def test_json_roundtrip():
    rng = np.random.default_rng(3)
    m = _rand(rng, 3, 3)
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)


@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_pinv_twice_is_identity_map(seed, m, n):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, min(m, n) + 1))
    a = _rand(rng, m, n, r)
    assert np.linalg.norm(pinv(pinv(a)) - a) < 1e-9 * max(1.0, np.linalg.norm(a))


@given(seeds, st.integers(1, 6))
def test_projection_idempotent_selfadjoint(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, n + 1))
    e = Subspace.span(_rand(rng, n, k)) if k else Subspace.zero(n)
    p = proj(e)
    assert np.linalg.norm(p @ p - p, 2) < 1e-12
    assert np.linalg.norm(p.conj().T - p, 2) < 1e-12


@given(seeds, st.integers(1, 6))
def test_range_of_projection_spans_subspace(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n + 1))
    e = Subspace.span(_rand(rng, n, k))
    f = range_basis(proj(e))
    assert f.dim == e.dim
    assert np.max(principal_angles(e, f)) < 1e-8

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import inv_sqrt_polar, singular_values
from trpca.errors import DimensionError, NumericError
from trpca.stiefel import orthonormality_error, polar, random_frame, stiefel_min_linear


def test_polar_identity():
    np.testing.assert_allclose(polar(np.eye(2)), np.eye(2), atol=1e-12)


def test_polar_positive_diagonal():
    G = np.diag([2.0, 3.0])
    Q = polar(G)
    np.testing.assert_allclose(Q, np.eye(2), atol=1e-12)
    assert np.sum(G * Q) == pytest.approx(5.0, rel=1e-12)


def test_polar_swap_3x2():
    G = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]])
    Q = polar(G)
    np.testing.assert_allclose(Q, G, atol=1e-12)
    assert np.sum(G * Q) == pytest.approx(2.0, rel=1e-12)


def test_polar_rank_deficient():
    rng = np.random.default_rng(3)
    G = rng.standard_normal((5, 3))
    G[:, 1] = 0.0
    Q = polar(G)
    assert orthonormality_error(Q) <= 1e-10
    assert np.sum(G * Q) == pytest.approx(singular_values(G).sum(), rel=1e-8)


def test_polar_errors():
    with pytest.raises(DimensionError):
        polar(np.ones((2, 3)))
    with pytest.raises(NumericError):
        polar(np.array([[1.0], [np.nan]]))
    with pytest.raises(DimensionError):
        polar(np.ones(3))


def test_polar_matches_inverse_sqrt_formula(rng):
    for _ in range(20):
        G = rng.standard_normal((8, 3))
        assert np.linalg.norm(polar(G) - inv_sqrt_polar(G)) <= 1e-8


def test_min_linear_diag():
    U, v = stiefel_min_linear(np.diag([2.0, 3.0]))
    assert v == pytest.approx(-5.0)
    np.testing.assert_allclose(U, -np.eye(2), atol=1e-12)


def test_min_linear_zero():
    U, v = stiefel_min_linear(np.zeros((4, 2)))
    assert v == 0.0
    assert orthonormality_error(U) <= 1e-10


def test_min_linear_lower_bound_random_frames(rng):
    G = rng.standard_normal((6, 3))
    U, v = stiefel_min_linear(G)
    assert np.sum(G * U) == pytest.approx(v, rel=1e-12)
    for j in range(1000):
        W = random_frame(6, 3, j)
        assert v <= np.sum(G * W) + 1e-12


def test_random_frame_square_orthogonal():
    for seed in range(5):
        Q = random_frame(5, 5, seed)
        assert abs(abs(np.linalg.det(Q)) - 1.0) <= 1e-10


def test_random_frame_deterministic():
    np.testing.assert_array_equal(random_frame(7, 3, 42), random_frame(7, 3, 42))
    assert not np.array_equal(random_frame(7, 3, 42), random_frame(7, 3, 43))


def test_random_frame_tall():
    assert orthonormality_error(random_frame(100, 5, 1)) <= 1e-10


def test_random_frame_errors():
    with pytest.raises(DimensionError):
        random_frame(3, 4, 0)
    with pytest.raises(DimensionError):
        random_frame(3, 0, 0)


shapes = st.tuples(st.integers(1, 12), st.integers(1, 12)).map(lambda s: (max(s), min(s)))
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(shapes.flatmap(lambda s: arrays(np.float64, s, elements=finite)))
def test_polar_always_orthonormal(G):
    assert orthonormality_error(polar(G)) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(shapes.flatmap(lambda s: arrays(np.float64, s, elements=finite)), st.floats(1e-3, 1e3))
def test_polar_scale_invariant(G, c):
    s = np.linalg.svd(G, compute_uv=False)
    # scale invariance is only well defined when the polar factor is unique
    if s[-1] <= 1e-6 * max(s[0], 1.0):
        return
    np.testing.assert_allclose(polar(c * G), polar(G), atol=1e-8)


@settings(max_examples=100, deadline=None)
@given(shapes.flatmap(lambda s: arrays(np.float64, s, elements=finite)))
def test_polar_attains_nuclear_norm(G):
    value = np.sum(G * polar(G))
    nuclear = singular_values(G).sum()
    assert value == pytest.approx(nuclear, rel=1e-8, abs=1e-8 * max(1.0, np.abs(G).max()))

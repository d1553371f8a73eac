import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ulamnet.google import DenseCapError, GoogleOperator, apply, materialize_dense
from ulamnet.maps import MapSpec
from ulamnet.ulam import build_monte_carlo


def test_alpha_zero_is_uniform(net64):
    v = np.random.default_rng(1).random(64)
    v /= v.sum()
    assert np.allclose(apply(GoogleOperator(net64, 0.0), v), 1 / 64, atol=1e-16)


def test_alpha_one_is_s(net64):
    v = np.random.default_rng(2).random(64)
    assert np.array_equal(apply(GoogleOperator(net64, 1.0), v), net64.matrix @ v)


def test_damped_uniform_against_dense_reference(net64):
    s = net64.matrix.toarray()
    g_ref = 0.85 * s + 0.15 * np.ones((64, 64)) / 64
    v = np.full(64, 1 / 64)
    out = apply(GoogleOperator(net64, 0.85), v)
    assert np.allclose(out, g_ref @ v, atol=1e-15)
    assert abs(out.sum() - 1) <= 1e-13


def test_columns_match_matvec(net64):
    op = GoogleOperator(net64, 0.85)
    g = materialize_dense(op)
    eye = np.eye(64)
    for j in range(64):
        assert np.abs(apply(op, eye[:, j]) - g[:, j]).max() <= 1e-14


def test_alpha_one_dense_copy():
    net = build_monte_carlo(MapSpec("f1", 2.0, 0.2), 50, 1_000_000, 42)
    assert np.array_equal(materialize_dense(GoogleOperator(net, 1.0)), net.matrix.toarray())


def test_alpha_zero_dense_constant(net64):
    assert np.allclose(materialize_dense(GoogleOperator(net64, 0.0)), 1 / 64, rtol=0, atol=1e-17)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.85, 0.99, 1.0])
def test_materialized_column_stochastic(net64, alpha):
    g = materialize_dense(GoogleOperator(net64, alpha))
    assert np.abs(g.sum(axis=0) - 1).max() <= 1e-12


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), alpha=st.floats(0, 1),
       u=arrays(np.float64, 64, elements=st.floats(-1, 1)),
       v=arrays(np.float64, 64, elements=st.floats(-1, 1)))
def test_linearity(net64, a, b, alpha, u, v):
    op = GoogleOperator(net64, alpha)
    lhs = apply(op, a * u + b * v)
    rhs = a * apply(op, u) + b * apply(op, v)
    scale = max(1.0, np.abs(lhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.85, 1.0])
def test_spectral_radius_at_most_one(alpha):
    net = build_monte_carlo(MapSpec("f2", 2.0, a=0.9), 300, 2000, 3)
    lam = np.linalg.eigvals(materialize_dense(GoogleOperator(net, alpha)))
    assert np.abs(lam).max() <= 1 + 1e-9


def test_errors(net64):
    with pytest.raises(ValueError):
        GoogleOperator(net64, 1.5)
    with pytest.raises(ValueError):
        apply(GoogleOperator(net64, 0.5), np.ones(63))
    with pytest.raises(DenseCapError):
        materialize_dense(GoogleOperator(net64, 0.5), cap=32)


def test_complex_and_block_vectors(net64):
    op = GoogleOperator(net64, 0.7)
    z = np.random.default_rng(0).random(64) + 1j * np.random.default_rng(1).random(64)
    assert np.allclose(apply(op, z), apply(op, z.real) + 1j * apply(op, z.imag))
    block = np.random.default_rng(2).random((64, 3))
    assert np.allclose(apply(op, block)[:, 1], apply(op, block[:, 1]))

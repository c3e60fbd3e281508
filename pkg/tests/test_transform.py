import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_orthogonal, random_stack
from merawave.errors import (
    IndivisibleLength,
    LengthMismatch,
    NonFinite,
    NotOrthogonal,
    OddLength,
    ShapeMismatch,
)
from merawave.transform import (
    HAAR,
    CoefficientPyramid,
    analysis_matrix,
    analyze,
    filter_stack,
    haar_stack,
    layer_analyze,
    layer_synthesize,
    orthogonal_pair,
    synthesize,
)

R2 = np.sqrt(2.0)
I2 = np.eye(2)


def operator_oracle(n, stack):
    """Analysis operator assembled from Kronecker blocks and row permutations.

    Rows come out in flattened order [approx, d^L, ..., d^1].
    """
    total = np.eye(n)
    detail_rows = []
    m = n
    for u in stack:
        block = np.kron(np.eye(m // 2), u)  # pair-wise U on (x[2k], x[2k+1])
        level = block @ total
        approx_rows, det_rows = level[0::2], level[1::2]
        detail_rows.append(det_rows)
        total = approx_rows
        m //= 2
    return np.vstack([total] + detail_rows[::-1])


# -- layer ----------------------------------------------------------------------

def test_layer_analyze_example_one():
    a, d = layer_analyze([1, 2, 3, 4], HAAR)
    np.testing.assert_allclose(a, np.array([3, 7]) / R2, atol=1e-12)
    np.testing.assert_allclose(d, np.array([-1, -1]) / R2, atol=1e-12)
    assert np.isclose(a @ a + d @ d, 30.0, atol=1e-12)


def test_layer_analyze_identity_splits_pairs():
    a, d = layer_analyze([5, 9], I2)
    assert a.tolist() == [5.0] and d.tolist() == [9.0]


@pytest.mark.parametrize("c", [0.0, 1.0, -3.5, 1e6])
def test_constant_signal_has_no_haar_detail(c):
    a, d = layer_analyze([c] * 4, HAAR)
    np.testing.assert_allclose(d, 0.0, atol=1e-12 * max(1, abs(c)))
    np.testing.assert_allclose(a, c * R2, rtol=1e-12, atol=1e-12)


def test_layer_pairwise_energy(rng):
    x = rng.normal(size=64)
    u = random_orthogonal(rng)
    a, d = layer_analyze(x, u)
    np.testing.assert_allclose(a**2 + d**2, x[0::2] ** 2 + x[1::2] ** 2, atol=1e-12)


def test_layer_analyze_rejects_bad_input():
    with pytest.raises(OddLength):
        layer_analyze([1, 2, 3], HAAR)
    with pytest.raises(NonFinite):
        layer_analyze([1, np.nan], HAAR)
    with pytest.raises(NonFinite):
        layer_analyze([np.inf, 1], HAAR)


def test_layer_synthesize_examples():
    x = layer_synthesize(np.array([3, 7]) / R2, np.array([-1, -1]) / R2, HAAR)
    np.testing.assert_allclose(x, [1, 2, 3, 4], atol=1e-12)
    assert layer_synthesize([5], [9], I2).tolist() == [5.0, 9.0]
    with pytest.raises(LengthMismatch):
        layer_synthesize([1, 2], [3], HAAR)


def test_layer_roundtrip_1000_trials():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        x = rng.normal(size=64) * rng.uniform(0.1, 100)
        u = random_orthogonal(rng)
        worst = max(worst, np.max(np.abs(layer_synthesize(*layer_analyze(x, u), u) - x)))
    assert worst <= 1e-12


# -- cascade ----------------------------------------------------------------------

def test_two_level_haar_example():
    p = analyze([1, 2, 3, 4], haar_stack(2))
    np.testing.assert_allclose(p.approx, [5.0], atol=1e-12)
    np.testing.assert_allclose(p.details[0], [-1 / R2, -1 / R2], atol=1e-12)
    np.testing.assert_allclose(p.details[1], [-2.0], atol=1e-12)
    # 25 + 4 + 1
    assert np.isclose(p.energy(), 30.0, atol=1e-12)
    oracle = operator_oracle(4, haar_stack(2)) @ np.array([1.0, 2, 3, 4])
    np.testing.assert_allclose(p.flatten(), oracle, atol=1e-12)


def test_single_level_is_layer(rng):
    u = random_orthogonal(rng)
    p = analyze([1, 2, 3, 4], u[None])
    a, d = layer_analyze([1, 2, 3, 4], u)
    np.testing.assert_array_equal(p.approx, a)
    np.testing.assert_array_equal(p.details[0], d)


def test_synthesize_examples():
    p = CoefficientPyramid(np.array([5.0]), [np.array([-1, -1]) / R2, np.array([-2.0])])
    np.testing.assert_allclose(synthesize(p, haar_stack(2)), [1, 2, 3, 4], atol=1e-12)
    z = CoefficientPyramid(np.zeros(2), [np.zeros(8), np.zeros(4), np.zeros(2)])
    assert np.all(synthesize(z, haar_stack(3)) == 0)


def test_shape_errors():
    with pytest.raises(IndivisibleLength):
        analyze(np.ones(12), haar_stack(3))
    p = analyze(np.ones(16), haar_stack(2))
    with pytest.raises(ShapeMismatch):
        synthesize(p, haar_stack(3))


@pytest.mark.parametrize("n,levels", [(2, 1), (4, 2), (8, 1), (8, 3), (16, 2), (16, 4)])
def test_operator_matches_oracle_and_is_orthogonal(n, levels):
    rng = np.random.default_rng(n * 10 + levels)
    s = random_stack(rng, levels)
    a = analysis_matrix(n, s)
    np.testing.assert_allclose(a, operator_oracle(n, s), atol=1e-14)
    np.testing.assert_allclose(a.T @ a, np.eye(n), atol=1e-10)


def test_flatten_order_and_inverse(rng):
    p = analyze(rng.normal(size=32), random_stack(rng, 3))
    c = p.flatten()
    np.testing.assert_array_equal(c[:4], p.approx)
    np.testing.assert_array_equal(c[4:8], p.details[2])
    np.testing.assert_array_equal(c[8:16], p.details[1])
    np.testing.assert_array_equal(c[16:], p.details[0])
    q = CoefficientPyramid.from_flat(c, 3)
    np.testing.assert_array_equal(q.flatten(), c)


def test_orthogonal_pair_validation():
    reflection = orthogonal_pair(HAAR)
    assert np.isclose(np.linalg.det(reflection), -1.0)
    with pytest.raises(NotOrthogonal):
        orthogonal_pair([[1.0, 0.0], [0.0, 1.0 + 1e-9]])
    with pytest.raises(NonFinite):
        orthogonal_pair([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ShapeMismatch):
        orthogonal_pair(np.eye(3))
    with pytest.raises(ShapeMismatch):
        filter_stack(np.zeros((0, 2, 2)))


# -- properties -------------------------------------------------------------------

windows = st.integers(min_value=1, max_value=5).flatmap(
    lambda L: st.tuples(st.just(L), st.integers(1, 8).map(lambda k: k << L), st.integers(0, 2**32 - 1))
)


@settings(max_examples=200, deadline=None)
@given(windows, st.floats(1e-3, 1e6))
def test_perfect_reconstruction_and_parseval(case, scale):
    levels, n, seed = case
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=n) * scale
    s = random_stack(rng, levels)
    p = analyze(x, s)
    assert p.size == n
    assert np.max(np.abs(synthesize(p, s) - x)) <= 1e-9
    ex = x @ x
    if ex > 0:
        assert abs(ex - p.energy()) / ex <= 1e-9


@settings(max_examples=100, deadline=None)
@given(windows, st.floats(-10, 10), st.floats(-10, 10))
def test_linearity(case, alpha, beta):
    levels, n, seed = case
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n))
    s = random_stack(rng, levels)
    lhs = analyze(alpha * x + beta * y, s).flatten()
    rhs = alpha * analyze(x, s).flatten() + beta * analyze(y, s).flatten()
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_roundtrip_1000_random_windows():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        levels = int(rng.integers(1, 6))
        x = rng.normal(size=32 << levels) * 1e3
        s = random_stack(rng, levels)
        worst = max(worst, np.max(np.abs(synthesize(analyze(x, s), s) - x)))
    assert worst <= 1e-9

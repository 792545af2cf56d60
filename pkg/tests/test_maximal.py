import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedmorrey import oracles
from mixedmorrey._backend import HAVE_NUMBA, use_backend
from mixedmorrey.grid import Constant, Cube, GridFunction, GridSpec, IndicatorBox, sample
from mixedmorrey.maximal import (AxisOrder, MaximalConfig, away_from_cube_bound, directional_maximal,
                                 hl_maximal, iterated_maximal, strong_maximal)


def _rand(seed, shape=(10, 9), h=1 / 8):
    rng = np.random.default_rng(seed)
    return GridFunction(GridSpec((0,) * len(shape), (h,) * len(shape), shape), rng.uniform(size=shape))


def _brute_line(a, i):
    return max(a[l:r + 1].mean() for l in range(i + 1) for r in range(i, len(a)))


OPS = {
    "M1": lambda f: directional_maximal(f, 1),
    "M2": lambda f: directional_maximal(f, 2),
    "M2M1": lambda f: iterated_maximal(f),
    "M1M2": lambda f: iterated_maximal(f, MaximalConfig(order=(2, 1))),
    "M": hl_maximal,
    "MR": strong_maximal,
}


def test_axis_order_and_config_validation():
    assert AxisOrder((1, 2)).label() == "M2M1"
    assert AxisOrder.reversed_default(3).axes == (3, 2, 1)
    for bad in [(1, 1), (0, 1), (1, 3)]:
        with pytest.raises(ValueError):
            AxisOrder(bad)
    with pytest.raises(ValueError):
        MaximalConfig(t=0)
    with pytest.raises(ValueError):
        MaximalConfig(algorithm="fast")
    f = _rand(0)
    with pytest.raises(ValueError):
        directional_maximal(f, 3)
    with pytest.raises(ValueError):
        iterated_maximal(f, MaximalConfig(order=(1, 2, 3)))


@pytest.mark.parametrize("name", list(OPS))
def test_constant_and_zero(name):
    g = GridSpec.box((0, 0), (1, 1), 1 / 8)
    c = sample(Constant(2.5), g)
    assert np.allclose(OPS[name](c).values, 2.5, rtol=1e-14)
    assert np.all(OPS[name](0 * c).values == 0)


def test_directional_matches_brute_force():
    f = _rand(1)
    out = directional_maximal(f, 1).values
    a = np.abs(f.values)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            assert out[i, j] == pytest.approx(_brute_line(a[:, j], i), rel=1e-13)
    out2 = directional_maximal(f, 2).values
    assert out2[3, 4] == pytest.approx(_brute_line(a[3, :], 4), rel=1e-13)


def test_directional_examples():
    h = 1 / 64
    g1 = GridSpec.box((-1,), (3,), h)
    chi = sample(IndicatorBox((0,), (1,)), g1)
    m = directional_maximal(chi, 1)
    assert abs(m.at((2.0,)) - 0.5) <= 2 * h
    tri = oracles.triangle_example()
    g = GridSpec.box((-1, -1), (3, 3), h)
    M1 = directional_maximal(sample(tri.sampler, g), 1)
    assert abs(M1.at((0.25, 0.5)) - 2 / 3) <= 2 * h


def test_iterated_hl_strong_examples():
    g = GridSpec.box((-1, -1), (3, 3), 1 / 32)
    chi = sample(IndicatorBox((0, 0), (1, 1)), g)
    assert iterated_maximal(chi).at((2, 0.5)) == pytest.approx(0.5, abs=2 / 32)
    assert hl_maximal(chi).at((2, 2)) == pytest.approx(0.25, abs=2 / 32)
    s = strong_maximal(chi, max_work=10**9)
    assert s.at((2, 0.5)) == pytest.approx(0.5, abs=2 / 32)
    pt = (2.0, 0.5)
    assert s.at(pt) == pytest.approx(oracles.box_strong_maximal(pt, (0, 0), (1, 1)), abs=2 / 32)


def test_strong_exact_gate_and_modes():
    f = _rand(2, (40, 40))
    with pytest.raises(ValueError, match="sandwich"):
        strong_maximal(f, max_work=1000)
    with pytest.raises(ValueError):
        strong_maximal(f, mode="other")
    lo, up = strong_maximal(f, mode="sandwich")
    ex = strong_maximal(f).values
    assert np.all(lo.values <= ex * (1 + 1e-12))
    assert np.all(ex <= up.values * (1 + 1e-12))


@given(seed=st.integers(0, 10**6))
def test_sandwich_and_iterates_dominate_strong(seed):
    f = _rand(seed, (7, 6))
    ex = strong_maximal(f).values
    for order in [(1, 2), (2, 1)]:
        assert np.all(ex <= iterated_maximal(f, MaximalConfig(order=order)).values * (1 + 1e-12))
    assert np.all(hl_maximal(f).values <= ex * (1 + 1e-12))


@pytest.mark.parametrize("name", list(OPS))
@given(seed=st.integers(0, 10**6))
def test_monotone_bounded_sublinear(name, seed):
    op = OPS[name]
    f, g = _rand(seed, (7, 7)), _rand(seed + 1, (7, 7))
    Mf = op(f).values
    assert Mf.max() <= np.abs(f.values).max() * (1 + 1e-12)
    assert np.all(Mf >= np.abs(f.values) * (1 - 1e-12))
    bigger = f.with_values(f.values + np.abs(g.values))
    assert np.all(op(bigger).values >= Mf * (1 - 1e-12))
    assert np.all(op(f + g).values <= (Mf + op(g).values) * (1 + 1e-12))


@given(seed=st.integers(0, 10**6), t=st.floats(0.2, 4.0))
def test_power_consistency_exact(seed, t):
    f = _rand(seed, (6, 7))
    for order in [(1, 2), (2, 1)]:
        a = iterated_maximal(f, MaximalConfig(t=t, order=order)).values
        b = iterated_maximal(f.abs() ** t, MaximalConfig(order=order)).values ** (1 / t)
        assert np.array_equal(a, b)


def test_pruned_bitwise_equal():
    for seed in range(5):
        f = _rand(seed, (23, 17))
        for k in (1, 2):
            assert np.array_equal(directional_maximal(f, k).values,
                                  directional_maximal(f, k, algorithm="pruned").values)
        assert np.array_equal(iterated_maximal(f).values,
                              iterated_maximal(f, MaximalConfig(algorithm="pruned")).values)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
@pytest.mark.parametrize("name", list(OPS))
def test_backends_bitwise_equal(name):
    f = _rand(7, (19, 21))
    with use_backend("numpy"):
        a = OPS[name](f).values
    with use_backend("numba"):
        b = OPS[name](f).values
    assert np.array_equal(a, b)


def test_hl_needs_equal_spacing():
    f = GridFunction(GridSpec((0, 0), (0.1, 0.2), (4, 4)), np.ones((4, 4)))
    with pytest.raises(ValueError):
        hl_maximal(f)


def test_order_noncomparability_both_signs():
    g = GridSpec.box((-1, -1), (3, 3), 1 / 32)
    f = sample(oracles.triangle_example().sampler, g)
    d = iterated_maximal(f).values - iterated_maximal(f, MaximalConfig(order=(2, 1))).values
    X, Y = np.meshgrid(g.axis_centers(0), g.axis_centers(1), indexing="ij")
    right = (X > 1) & (Y > 0) & (Y < 1)
    below = (X > 0) & (X < 1) & (Y < 0)
    assert (d[right] > 1e-9).any() and (d[below] < -1e-9).any()
    assert (d > 1e-9).any() and (d < -1e-9).any()


def test_m1m2_upper_region_formula():
    h = 1 / 64
    g = GridSpec.box((-1, -1), (3, 3), h)
    tri = oracles.triangle_example()
    M = iterated_maximal(sample(tri.sampler, g), MaximalConfig(order=(2, 1)))
    for x, y in [(0.25, 1.5), (0.5, 2.0), (0.75, 1.25)]:
        assert abs(M.at((x, y)) - tri.m1m2_upper_region(x, y)) <= 2 * h


def test_away_from_cube():
    g = GridSpec.box((-4, -4), (6, 6), 1 / 4)
    Q = Cube((0.5, 0.5), 0.5)
    near = sample(IndicatorBox((0, 0), (1, 1)), g)
    assert away_from_cube_bound(near, Q)[0] == 0
    lhs, rhs = away_from_cube_bound(sample(Constant(1.0), g), Q)
    assert lhs <= 1 + 1e-12 and rhs == pytest.approx(1.0)
    far = sample(IndicatorBox((4, 4), (5, 5)), g)
    lhs, rhs = away_from_cube_bound(far, Q)
    assert 0 < lhs and lhs / rhs <= 2 ** 2
    with pytest.raises(ValueError):
        away_from_cube_bound(far, Cube((50, 50), 0.5))
    with pytest.raises(ValueError):
        away_from_cube_bound(far, Q, enlargement=0.5)

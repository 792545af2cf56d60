import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedmorrey.grid import GridFunction, GridSpec, IndicatorBox, sample
from mixedmorrey.maximal import directional_maximal
from mixedmorrey.mixed_norms import CubeFamily
from mixedmorrey.weights import (TensorWeight, Weight1D, a1_constant, ap_constant, constant_weight,
                                 indicator_maximal_weight, positive_weight_values, power_weight,
                                 tensor_weight)

FAMILIES = [CubeFamily.exact(), CubeFamily.dyadic()]


def _line(lo=-4.0, hi=4.0, h=1 / 16):
    return GridSpec.box((lo,), (hi,), h)


@pytest.mark.parametrize("fam", FAMILIES)
def test_constant_weight_constants_are_one(fam):
    g = _line()
    for c in (1.0, 3.5):
        w = constant_weight(c)
        assert a1_constant(w, fam, g) == pytest.approx(1.0, rel=1e-12)
        for p in (1.5, 2.0, 4.0):
            assert ap_constant(w, p, fam, g) == pytest.approx(1.0, rel=1e-12)


def test_errors():
    g = _line()
    with pytest.raises(ValueError):
        ap_constant(constant_weight(), 1.0, grid=g)
    with pytest.raises(ValueError):
        constant_weight(0.0)
    with pytest.raises(ValueError):
        indicator_maximal_weight((0, 1), -0.5)
    with pytest.raises(ValueError):
        Weight1D("grid", grid_function=GridFunction(g, -np.ones(g.shape)))
    with pytest.raises(ValueError):
        positive_weight_values(np.zeros(4))
    with pytest.raises(ValueError):
        ap_constant(constant_weight(), 2.0)
    with pytest.raises(ValueError):
        tensor_weight([constant_weight()], (2, 2))


def test_floor_is_applied_and_logged(caplog):
    vals = positive_weight_values(np.array([1.0, 0.0, 2.0]))
    assert vals[1] > 0
    assert "floored" in caplog.text


def test_indicator_weight_examples():
    assert indicator_maximal_weight((0, 1), 0).kind == "constant"
    w = indicator_maximal_weight((0, 1), 0.5)
    assert w(2.0) == pytest.approx(math.sqrt(0.5))
    assert w(0.5) == pytest.approx(1.0)
    assert w(-1.0) == pytest.approx(math.sqrt(0.5))
    assert w.a1 is True
    assert indicator_maximal_weight((0, 1), 1.0).a1 is False
    assert Weight1D.from_json(w.to_json()) == w


def test_indicator_weight_matches_discrete_maximal():
    h = 1 / 64
    g = _line(-3, 4, h)
    M = directional_maximal(sample(IndicatorBox((0,), (1,)), g), 1).values
    w = indicator_maximal_weight((0, 1), 1.0).sample(g).values
    assert np.max(np.abs(M - w)) <= 2 * h


@given(seed=st.integers(0, 10**6), c=st.floats(0.01, 100), p=st.floats(1.2, 6))
def test_ap_properties(seed, c, p):
    rng = np.random.default_rng(seed)
    g = _line(0, 2, 1 / 8)
    w = GridFunction(g, rng.uniform(0.1, 3.0, size=g.shape))
    fam = CubeFamily.exact()
    ap = ap_constant(w, p, fam)
    assert ap >= 1 - 1e-12
    assert ap_constant(c * w, p, fam) == pytest.approx(ap, rel=1e-10)
    assert ap <= a1_constant(w, fam) * (1 + 1e-12)


def test_a1_dominates_ap_2d():
    rng = np.random.default_rng(5)
    g = GridSpec.box((0, 0), (1, 1), 1 / 8)
    w = GridFunction(g, rng.uniform(0.1, 3.0, size=g.shape))
    for fam in FAMILIES:
        a1 = a1_constant(w, fam)
        for p in (1.5, 3.0):
            assert 1 <= ap_constant(w, p, fam) <= a1 * (1 + 1e-12)


def test_window_path_matches_explicit_cubes():
    from mixedmorrey.grid import Cube
    rng = np.random.default_rng(6)
    g = GridSpec.box((0,), (1,), 1 / 8)
    w = GridFunction(g, rng.uniform(0.2, 2.0, size=8))
    cubes = [Cube((g.lower[0] + (s + k / 2) / 8,), k / 16) for k in range(1, 9) for s in range(9 - k)]
    assert ap_constant(w, 2.0, CubeFamily.exact()) == pytest.approx(
        ap_constant(w, 2.0, CubeFamily.explicit(cubes)), rel=1e-12)
    assert a1_constant(w, CubeFamily.exact()) == pytest.approx(
        a1_constant(w, CubeFamily.explicit(cubes)), rel=1e-12)


def _centered(L, h=1 / 8):
    return GridSpec.box((-L,), (L + 1,), h)


def test_half_power_is_stable_and_full_power_grows():
    w_half = indicator_maximal_weight((0, 1), 0.5)
    w_one = indicator_maximal_weight((0, 1), 1.0)
    fam = CubeFamily.exact()
    ap = [ap_constant(w_half, 2.0, fam, _centered(L)) for L in (16, 32, 64)]
    assert abs(ap[2] / ap[1] - 1) <= 0.05
    a1h = [a1_constant(w_half, fam, _centered(L)) for L in (16, 32, 64)]
    assert abs(a1h[2] / a1h[1] - 1) <= 0.05
    a1 = [a1_constant(w_one, fam, _centered(L)) for L in (16, 32, 64)]
    steps = np.diff(a1)
    assert np.all(steps > 0.1)
    # growth is logarithmic: equal increments per doubling
    assert steps[1] / steps[0] == pytest.approx(1.0, abs=0.25)


def test_power_weight_grows_under_refinement():
    w = power_weight(1.0, truncation=1.0)
    vals = [ap_constant(w, 2.0, CubeFamily.exact(), GridSpec.box((0,), (1,), h))
            for h in (1 / 16, 1 / 64, 1 / 256)]
    assert vals[0] < vals[1] < vals[2] and vals[2] > 1.5 * vals[0]


def test_tensor_weight():
    g = GridSpec.box((0, 0), (3, 3), 1 / 4)
    ones = tensor_weight([constant_weight(), constant_weight()], (2, 2)).sample(g)
    assert np.all(ones.values == 1)
    w = indicator_maximal_weight((0, 1), 0.5)
    tw = tensor_weight([w, w], (2, 2))
    assert tw(np.array([2.0, 2.0])) == pytest.approx(math.sqrt(0.5))
    mixed = tensor_weight([constant_weight(4.0), constant_weight()], (2, 3)).sample(g)
    assert np.allclose(mixed.values, 2.0)
    assert isinstance(tw, TensorWeight)
    with pytest.raises(ValueError):
        tw(np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        tw.sample(GridSpec.box((0,), (1,), 1 / 4))


def test_weight_power_and_grid_kind():
    w = indicator_maximal_weight((0, 1), 0.5)
    assert w.power(2)(3.0) == pytest.approx(w(3.0) ** 2)
    g = _line(0, 1, 1 / 4)
    gw = Weight1D("grid", grid_function=GridFunction(g, np.arange(1.0, 5.0)))
    assert gw(np.array([0.1, 0.9])).tolist() == [1.0, 4.0]
    assert power_weight(2.0)(np.array([-3.0])) == pytest.approx(9.0)

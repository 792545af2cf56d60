import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedmorrey.grid import (Constant, Cube, GridFunction, GridSpec, IndicatorBox, PowerFunction,
                              Rectangle, StepFunction, Tensor, Zero, descriptor_from_dict, dilate,
                              integrate, load_grid, restrict, restrict_complement, sample, save_grid)
from mixedmorrey.mixed_norms import mixed_lebesgue_norm


def test_sample_indicator_full_grid():
    g = GridSpec.box((0, 0), (1, 1), 0.25)
    assert np.all(sample(IndicatorBox((0, 0), (1, 1)), g).values == 1.0)


def test_sample_zero_and_constant():
    g = GridSpec.box((0, 0), (1, 1), 0.25)
    assert np.all(sample(Zero(), g).values == 0.0)
    assert np.all(sample(Constant(3.0), g).values == 3.0)


def test_power_singularity_avoided_by_centers():
    g = GridSpec.box((-1, -1), (1, 1), 1 / 8)
    f = sample(PowerFunction((0, 0), -1.0), g)
    assert np.all(np.isfinite(f.values)) and f.values.max() == pytest.approx(1 / math.hypot(1 / 16, 1 / 16))


@pytest.mark.parametrize("bad", [dict(spacing=(0.0,)), dict(counts=(0,)), dict(spacing=(-1.0,))])
def test_invalid_grid_rejected(bad):
    kw = dict(origin=(0.0,), spacing=(0.1,), counts=(4,))
    kw.update(bad)
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_values_must_be_finite():
    g = GridSpec.box((0,), (1,), 0.5)
    with pytest.raises(ValueError):
        GridFunction(g, [1.0, math.inf])


def test_integrate_examples():
    g = GridSpec.box((-1, -1), (2, 2), 1 / 8)
    assert integrate(sample(IndicatorBox((0, 0), (1, 1)), g)) == pytest.approx(1.0, abs=1e-15)
    assert integrate(sample(Zero(), g)) == 0.0
    for N in (1, 3, 7, 16):
        g1 = GridSpec.box((0,), (1,), 1 / N)
        assert integrate(sample(lambda x: x[..., 0], g1)) == pytest.approx(0.5, rel=1e-14)


def test_restrict_examples():
    g = GridSpec.box((0, 0), (2, 2), 1 / 8)
    chi = sample(IndicatorBox((0, 0), (1, 1)), g)
    assert np.array_equal(restrict(chi, Rectangle((0, 0), (1, 1))).values, chi.values)
    assert np.all(restrict(chi, Cube((1.75, 1.75), 0.2)).values == 0)
    one = sample(Constant(1.0), g)
    r = restrict(one, Cube((0.5, 0.5), 0.5))
    assert np.array_equal(r.values, chi.values)
    assert np.array_equal(restrict_complement(one, Cube((0.5, 0.5), 0.5)).values, 1 - chi.values)


def test_dilate_examples():
    g = GridSpec.box((0,), (4,), 1 / 4)
    f = sample(IndicatorBox((0,), (2,)), g)
    assert np.array_equal(dilate(f, 1.0).values, f.values)
    d = dilate(f, 2.0)
    half = sample(IndicatorBox((0,), (1,)), GridSpec.box((0,), (2,), 1 / 8))
    assert d.grid == half.grid and np.array_equal(d.values, half.values)
    g2 = GridSpec.box((0, 0), (4, 4), 1 / 4)
    f2 = sample(IndicatorBox((0, 0), (2, 2)), g2)
    assert mixed_lebesgue_norm(dilate(f2, 2), (2, 2)) == pytest.approx(0.5 * mixed_lebesgue_norm(f2, (2, 2)),
                                                                        rel=1e-14)
    assert d.meta["commensurable"] and not dilate(f, 1.5).meta["commensurable"]


@given(s=st.floats(0.25, 4), t=st.floats(0.25, 4))
def test_dilate_composes(s, t):
    g = GridSpec.box((-1,), (1,), 1 / 4)
    f = sample(IndicatorBox((0,), (0.5,)), g)
    a, b = dilate(dilate(f, s), t), dilate(f, s * t)
    assert np.allclose(a.grid.origin, b.grid.origin, rtol=1e-13)
    assert np.allclose(a.grid.spacing, b.grid.spacing, rtol=1e-13)
    assert np.array_equal(a.values, b.values)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 1000))
def test_integrate_linear_and_restrict_bound(a, b, seed):
    rng = np.random.default_rng(seed)
    g = GridSpec.box((0, 0), (1, 1), 1 / 8)
    f = GridFunction(g, rng.normal(size=g.counts))
    h = GridFunction(g, rng.normal(size=g.counts))
    assert integrate(a * f + b * h) == pytest.approx(a * integrate(f) + b * integrate(h), abs=1e-12)
    Q = Cube(tuple(rng.uniform(0, 1, 2)), float(rng.uniform(0.05, 0.6)))
    assert integrate(restrict(f, Q)) <= integrate(f.abs()) + 1e-12


def test_tensor_and_steps():
    g = GridSpec.box((0, 0), (1, 1), 1 / 4)
    s = StepFunction((0.0,), (1.0,), [1.0, 2.0])
    f = sample(Tensor((s, s)), g)
    assert f.values[0, 0] == 1 and f.values[3, 3] == 4 and f.values[0, 3] == 2


def test_descriptor_roundtrip():
    for d in (IndicatorBox((0, 0), (1, 2), 3.0), PowerFunction((0.5,), -0.25, 1.0),
              StepFunction((0, 0), (1, 1), [[1, 2], [3, 4]])):
        e = descriptor_from_dict(d.to_dict())
        x = np.random.default_rng(0).uniform(-0.5, 1.5, size=(50, len(d.to_dict().get("lo", [0]))))
        assert np.array_equal(e(x), d(x))


def test_stockert_descriptor_kind():
    d = descriptor_from_dict({"kind": "stockert", "q1": 2, "q2": 0.75})
    assert d(np.array([[3.0, 0.5]])) == 1.0 and d(np.array([[50.0, 0.5]])) == 0.0


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_save_load_roundtrip(tmp_path, fmt):
    g = GridSpec((-1.0, 0.5), (0.25, 0.5), (5, 3))
    f = GridFunction(g, np.random.default_rng(1).normal(size=(5, 3)))
    path = save_grid(tmp_path / "f.json", f, fmt)
    back = load_grid(path)
    assert back.grid == g and np.array_equal(back.values, f.values)


def test_at_and_cell_index():
    g = GridSpec.box((0,), (1,), 0.25)
    f = GridFunction(g, [1, 2, 3, 4])
    assert f.at((0.3,)) == 2 and f.at((5.0,)) == 0.0 and f.cell_index((-0.1,)) is None

"""Muckenhoupt constants over cube families and a few closed-form weights."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import minimum_filter1d

from .grid import GridFunction, GridSpec
from .mixed_norms import CubeFamily, ExponentVector, _cube_mask, interval_maximal_closed_form

__all__ = [
    "Weight1D",
    "TensorWeight",
    "indicator_maximal_weight",
    "power_weight",
    "constant_weight",
    "positive_weight_values",
    "ap_constant",
    "a1_constant",
    "tensor_weight",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Weight1D:
    """Weight on the line: ``constant``, ``indicator_maximal`` ``(M chi_I)^beta``,
    ``power`` ``min(|x|, R)^beta``, or ``grid`` (a sampled 1D GridFunction)."""

    kind: str
    value: float = 1.0
    interval: tuple[float, float] = (0.0, 1.0)
    beta: float = 0.0
    truncation: float = math.inf
    grid_function: GridFunction | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "indicator_maximal", "power", "grid"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "constant" and not self.value > 0:
            raise ValueError("constant weight must be positive")
        if self.kind == "indicator_maximal":
            if self.beta < 0:
                raise ValueError(f"weight exponent must be >= 0, got {self.beta}")
            lo, hi = self.interval
            if not lo < hi:
                raise ValueError("interval must be nonempty")
        if self.kind == "grid":
            gf = self.grid_function
            if gf is None or gf.dim != 1:
                raise ValueError("grid weight needs a 1D GridFunction")
            if np.any(gf.values <= 0):
                raise ValueError("grid weight must be strictly positive")

    @property
    def a1(self) -> bool | None:
        """Known A_1 membership (only decided for the closed-form families)."""
        if self.kind == "constant":
            return True
        if self.kind == "indicator_maximal":
            return self.beta < 1
        return None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape, float(self.value))
        if self.kind == "indicator_maximal":
            lo, hi = self.interval
            return interval_maximal_closed_form(lo, hi, x) ** self.beta
        if self.kind == "power":
            with np.errstate(divide="ignore"):
                return np.minimum(np.abs(x), self.truncation) ** self.beta
        gf = self.grid_function
        out = np.array([gf.at((xi,)) for xi in x.ravel()]).reshape(x.shape)
        return out

    def sample(self, grid: GridSpec) -> GridFunction:
        if grid.dim != 1:
            raise ValueError("1D weight sampled on a multi-dimensional grid")
        return GridFunction(grid, self(grid.axis_centers(0)), {"weight": self.kind})

    def power(self, t: float) -> "Weight1D":
        if self.kind == "constant":
            return Weight1D("constant", value=self.value**t)
        if self.kind == "indicator_maximal":
            return Weight1D("indicator_maximal", interval=self.interval, beta=self.beta * t)
        if self.kind == "power":
            return Weight1D("power", beta=self.beta * t, truncation=self.truncation)
        return Weight1D("grid", grid_function=self.grid_function**t)

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "indicator_maximal":
            return {"kind": "indicator_maximal", "interval": list(self.interval), "beta": self.beta}
        if self.kind == "power":
            return {"kind": "power", "beta": self.beta,
                    "truncation": "inf" if math.isinf(self.truncation) else self.truncation}
        return {"kind": "grid"}

    @classmethod
    def from_json(cls, d: dict) -> "Weight1D":
        kind = d.get("kind")
        if kind == "constant":
            return constant_weight(float(d.get("value", 1.0)))
        if kind == "indicator_maximal":
            return indicator_maximal_weight(tuple(d.get("interval", (0.0, 1.0))), float(d["beta"]))
        if kind == "power":
            return power_weight(float(d["beta"]), float(d.get("truncation", math.inf)))
        raise ValueError(f"weight kind {kind!r} cannot be built from JSON")


def constant_weight(c: float = 1.0) -> Weight1D:
    return Weight1D("constant", value=c)


def indicator_maximal_weight(interval: Sequence[float], beta: float) -> Weight1D:
    """``(M chi_I)^beta`` via the closed form of the maximal function of an interval."""
    if beta < 0:
        raise ValueError(f"weight exponent must be >= 0, got {beta}")
    if beta == 0:
        return constant_weight(1.0)
    return Weight1D("indicator_maximal", interval=(float(interval[0]), float(interval[1])),
                    beta=float(beta))


def power_weight(beta: float, truncation: float = math.inf) -> Weight1D:
    return Weight1D("power", beta=beta, truncation=truncation)


def positive_weight_values(w) -> np.ndarray:
    """Weight values floored at ``eps * max``; floored cells are logged."""
    vals = np.asarray(w.values if isinstance(w, GridFunction) else w, dtype=float)
    if np.any(vals < 0) or not np.any(vals > 0):
        raise ValueError("weight must be nonnegative and not identically zero")
    floor = np.finfo(float).eps * vals.max()
    low = vals < floor
    if low.any():
        log.warning("weight floored at %.3g on %d cell(s)", floor, int(low.sum()))
        vals = np.where(low, floor, vals)
    return vals


def _window(a: np.ndarray, k: int, starts: list[np.ndarray], reducer: str) -> np.ndarray:
    # prefix sums and a running-min filter keep each side O(cells)
    for ax in range(a.ndim):
        if reducer == "sum":
            c = np.cumsum(a, axis=ax)
            c = np.concatenate([np.zeros_like(np.take(c, [0], axis=ax)), c], axis=ax)
            a = np.take(c, starts[ax] + k, axis=ax) - np.take(c, starts[ax], axis=ax)
        else:
            # the default filter window for output i starts at i - k // 2
            m = minimum_filter1d(a, k, axis=ax, mode="nearest")
            a = np.take(m, starts[ax] + k // 2, axis=ax)
    return a


def _family_reduce(vals: np.ndarray, grid: GridSpec, family: CubeFamily, combine) -> float:
    """``max over family cubes inside the box of combine(sum over cube, cube min, cells)``."""
    best = -math.inf
    if family.strategy == "explicit":
        for Q in family.cubes:
            m = _cube_mask(grid, Q)
            if not m.any():
                raise ValueError(f"cube {Q} contains no cell center")
            best = max(best, float(combine(vals, m)))
        return best
    for k in family.sides(grid):
        if k > min(grid.counts):
            continue
        starts = family.starts(grid, k)
        best = max(best, float(np.max(combine((vals, k, starts), None))))
    return best


def _as_values(w, grid: GridSpec | None):
    if isinstance(w, GridFunction):
        return positive_weight_values(w), w.grid
    if isinstance(w, (Weight1D, TensorWeight)):
        if grid is None:
            raise ValueError("closed-form weights need a grid to evaluate on")
        return positive_weight_values(w.sample(grid)), grid
    raise TypeError("weight must be a GridFunction, Weight1D or TensorWeight")


def ap_constant(w, p: float, family: CubeFamily | None = None, grid: GridSpec | None = None) -> float:
    """``max_Q (avg_Q w) (avg_Q w^(-1/(p-1)))^(p-1)`` over in-box family cubes."""
    if not p > 1:
        raise ValueError(f"A_p constant needs p > 1 (use a1_constant for p = 1), got {p}")
    family = family or CubeFamily.dyadic()
    vals, grid = _as_values(w, grid)
    dual = vals ** (-1.0 / (p - 1))

    def combine(data, mask):
        if mask is not None:
            return np.mean(vals[mask]) * np.mean(dual[mask]) ** (p - 1)
        _, k, starts = data
        cells = k**grid.dim
        return (_window(vals, k, starts, "sum") / cells) * \
            (_window(dual, k, starts, "sum") / cells) ** (p - 1)

    return _family_reduce(vals, grid, family, combine)


def a1_constant(w, family: CubeFamily | None = None, grid: GridSpec | None = None) -> float:
    """``max_Q (avg_Q w) / min_Q w`` over in-box family cubes."""
    family = family or CubeFamily.dyadic()
    vals, grid = _as_values(w, grid)

    def combine(data, mask):
        if mask is not None:
            return np.mean(vals[mask]) / np.min(vals[mask])
        _, k, starts = data
        return (_window(vals, k, starts, "sum") / k**grid.dim) / _window(vals, k, starts, "min")

    return _family_reduce(vals, grid, family, combine)


@dataclass(frozen=True)
class TensorWeight:
    """``x -> prod_j w_j(x_j)^(1/p_j)``."""

    factors: tuple
    exponents: ExponentVector

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != len(self.factors):
            raise ValueError("point dimension does not match the number of weight factors")
        out = np.ones(x.shape[:-1])
        for j, (w, p) in enumerate(zip(self.factors, self.exponents)):
            out = out * w(x[..., j]) ** (0.0 if math.isinf(p) else 1.0 / p)
        return out

    def axis_factors(self, grid: GridSpec) -> list[np.ndarray]:
        return [w(grid.axis_centers(j)) ** (0.0 if math.isinf(p) else 1.0 / p)
                for j, (w, p) in enumerate(zip(self.factors, self.exponents))]

    def sample(self, grid: GridSpec) -> GridFunction:
        if grid.dim != len(self.factors):
            raise ValueError("grid dimension does not match the number of weight factors")
        out = np.ones(grid.counts)
        for j, a in enumerate(self.axis_factors(grid)):
            out = out * a.reshape([-1 if i == j else 1 for i in range(grid.dim)])
        return GridFunction(grid, out, {"weight": "tensor"})


def tensor_weight(w_list: Sequence[Weight1D], exponents) -> TensorWeight:
    exponents = ExponentVector.of(exponents, len(w_list))
    if len(w_list) != len(exponents):
        raise ValueError("need one exponent per weight factor")
    return TensorWeight(tuple(w_list), exponents)

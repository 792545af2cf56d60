"""Uncentered maximal operators on grids.

All suprema run over grid-aligned intervals, cubes or rectangles.  Anything
that extends past the grid box sees zeros there, so those candidates never
beat an in-box one except when a cube is longer than an axis; that case is
handled in :func:`mixedmorrey.kernels.cube_maximal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .grid import Cube, GridFunction
from .mixed_norms import _cube_mask

__all__ = [
    "AxisOrder",
    "MaximalConfig",
    "StrongBounds",
    "directional_maximal",
    "iterated_maximal",
    "hl_maximal",
    "strong_maximal",
    "away_from_cube_bound",
]

ALGORITHMS = ("exact-quadratic", "pruned")


@dataclass(frozen=True)
class AxisOrder:
    """Axes (1-based) in the order the one-dimensional operators are applied.

    ``AxisOrder((1, 2))`` applies ``M_1`` first, i.e. the composition ``M_2 M_1``.
    """

    axes: tuple[int, ...]

    def __post_init__(self):
        axes = tuple(int(a) for a in self.axes)
        if sorted(axes) != list(range(1, len(axes) + 1)):
            raise ValueError(f"axis order must be a permutation of 1..n, got {axes}")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def default(cls, n: int) -> "AxisOrder":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def reversed_default(cls, n: int) -> "AxisOrder":
        return cls(tuple(range(n, 0, -1)))

    def __len__(self):
        return len(self.axes)

    def label(self) -> str:
        return "".join(f"M{a}" for a in reversed(self.axes))


@dataclass(frozen=True)
class MaximalConfig:
    t: float = 1.0
    order: AxisOrder | None = None
    algorithm: str = "exact-quadratic"

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError(f"power exponent t must be positive and finite, got {self.t}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.order is not None and not isinstance(self.order, AxisOrder):
            object.__setattr__(self, "order", AxisOrder(tuple(self.order)))


def _directional(a: np.ndarray, axis0: int, pruned: bool) -> np.ndarray:
    moved = np.moveaxis(a, axis0, -1)
    shape = moved.shape
    out = kernels.line_maximal(moved.reshape(-1, shape[-1]), pruned=pruned)
    return np.moveaxis(out.reshape(shape), -1, axis0)


def directional_maximal(f: GridFunction, k: int, algorithm: str = "exact-quadratic") -> GridFunction:
    """``M_k``: uncentered maximal function of ``|f|`` along axis ``k`` (1-based)."""
    if not 1 <= k <= f.dim:
        raise ValueError(f"axis {k} out of range 1..{f.dim}")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    out = _directional(np.abs(f.values), k - 1, algorithm == "pruned")
    return f.with_values(out, op=f"M{k}")


def iterated_maximal(f: GridFunction, cfg: MaximalConfig | None = None) -> GridFunction:
    """``(M_{i_n} ... M_{i_1} |f|^t)^{1/t}`` for ``cfg.order = (i_1, ..., i_n)``."""
    cfg = cfg or MaximalConfig()
    order = cfg.order or AxisOrder.default(f.dim)
    if len(order) != f.dim:
        raise ValueError(f"axis order {order.axes} does not match dimension {f.dim}")
    pruned = cfg.algorithm == "pruned"
    a = np.abs(f.values) ** cfg.t
    for k in order.axes:
        a = _directional(a, k - 1, pruned)
    return f.with_values(a ** (1.0 / cfg.t), op=order.label(), t=cfg.t)


def hl_maximal(f: GridFunction) -> GridFunction:
    """Hardy-Littlewood maximal function over grid-aligned cubes.

    Needs equal spacing on every axis.
    """
    f.grid.uniform_spacing()
    return f.with_values(kernels.cube_maximal(np.abs(f.values)), op="M")


class StrongBounds(NamedTuple):
    lower: GridFunction
    upper: GridFunction


DEFAULT_STRONG_WORK = 3 * 10**8


def strong_maximal(f: GridFunction, mode: str = "exact", max_work: int = DEFAULT_STRONG_WORK):
    """Maximal function over grid-aligned rectangles.

    ``mode="exact"`` searches all rectangles (work ``prod_j N_j^2``) and
    returns a GridFunction.  ``mode="sandwich"`` returns :class:`StrongBounds`
    with the lower bound ``max(M_1 f, ..., M_n f, M f)`` and the upper bound
    the pointwise minimum of the iterated operators in both extreme orders.
    """
    if mode == "exact":
        work = int(np.prod([N * N for N in f.shape]))
        if work > max_work:
            raise ValueError(
                f"exact strong maximal needs ~{work:.2e} operations (limit {max_work:.2e}); "
                "use mode='sandwich' for grids this large")
        return f.with_values(kernels.rectangle_maximal(np.abs(f.values)), op="MR")
    if mode != "sandwich":
        raise ValueError(f"unknown strong maximal mode {mode!r}")
    n = f.dim
    up = iterated_maximal(f, MaximalConfig(order=AxisOrder.default(n))).values
    up = np.minimum(up, iterated_maximal(f, MaximalConfig(order=AxisOrder.reversed_default(n))).values)
    lo = np.abs(f.values)
    for k in range(1, n + 1):
        lo = np.maximum(lo, directional_maximal(f, k).values)
    if all(math.isclose(h, f.grid.spacing[0], rel_tol=1e-12) for h in f.grid.spacing):
        lo = np.maximum(lo, hl_maximal(f).values)
    return StrongBounds(f.with_values(lo, op="MR-lower"), f.with_values(up, op="MR-upper"))


def _cell_range(f: GridFunction, Q: Cube) -> list[tuple[int, int]]:
    out = []
    for j in range(f.dim):
        inside = np.nonzero(np.abs(f.grid.axis_centers(j) - Q.center[j]) <= Q.radius)[0]
        if inside.size == 0:
            raise ValueError(f"cube {Q} contains no cell center of the grid")
        out.append((int(inside[0]), int(inside[-1])))
    return out


def _best_containing_mean(absf: np.ndarray, rng: Sequence[tuple[int, int]], spacing) -> float:
    # max over aligned cubes R (k cells per side) containing the index box rng
    # of sum_{R cap box} |f| / k^n; cubes may overhang the box
    n = absf.ndim
    c = absf
    for ax in range(n):
        c = np.cumsum(c, axis=ax)
    c = np.pad(c, [(1, 0)] * n)
    shape = absf.shape
    kmin = max(hi - lo + 1 for lo, hi in rng)
    best = 0.0
    for k in range(kmin, max(shape) + 1):
        axes_lo, axes_hi = [], []
        for (lo, hi), N in zip(rng, shape):
            s = np.arange(hi - k + 1, lo + 1)
            axes_lo.append(np.clip(s, 0, N))
            axes_hi.append(np.clip(s + k, 0, N))
        total = np.zeros([len(a) for a in axes_lo])
        for corner in np.ndindex(*(2,) * n):
            sign = (-1) ** (n - sum(corner))
            idx = np.ix_(*[axes_hi[j] if corner[j] else axes_lo[j] for j in range(n)])
            total = total + sign * c[idx]
        best = max(best, float(total.max()) / k**n)
    return best


def away_from_cube_bound(f: GridFunction, Q: Cube, enlargement: float = 5.0) -> tuple[float, float]:
    """``(max_{x in Q} M[f chi_{outside enlargement*Q}](x), max_{R containing Q} mean_R |f|)``."""
    if not enlargement >= 1:
        raise ValueError("enlargement factor must be >= 1")
    rng = _cell_range(f, Q)
    far = np.where(_cube_mask(f.grid, Q.scaled(enlargement)), 0.0, np.abs(f.values))
    f.grid.uniform_spacing()
    Mfar = kernels.cube_maximal(far)
    inQ = tuple(slice(lo, hi + 1) for lo, hi in rng)
    lhs = float(Mfar[inQ].max())
    rhs = _best_containing_mean(np.abs(f.values), rng, f.grid.spacing)
    return lhs, rhs

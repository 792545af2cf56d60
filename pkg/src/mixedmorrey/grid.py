"""Functions on uniform axis-aligned grids with implicit zero extension."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "GridFunction",
    "Cube",
    "Rectangle",
    "FunctionDescriptor",
    "Zero",
    "Constant",
    "IndicatorBox",
    "IndicatorSet",
    "Tensor",
    "PowerFunction",
    "SeparatedPower",
    "StepFunction",
    "Triangle",
    "Piecewise",
    "descriptor_from_dict",
    "sample",
    "integrate",
    "restrict",
    "restrict_complement",
    "dilate",
    "save_grid",
    "load_grid",
]


def _tuple(x, n=None, cast=float) -> tuple:
    if np.isscalar(x):
        if n is None:
            raise ValueError("scalar given where a vector is needed")
        return (cast(x),) * n
    return tuple(cast(v) for v in x)


@dataclass(frozen=True)
class GridSpec:
    """Cells ``[a_j + i h_j, a_j + (i+1) h_j)``, ``0 <= i < N_j``."""

    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", _tuple(self.origin))
        object.__setattr__(self, "spacing", _tuple(self.spacing, len(self.origin)))
        object.__setattr__(self, "counts", _tuple(self.counts, len(self.origin), int))
        if not (len(self.origin) == len(self.spacing) == len(self.counts)) or not self.origin:
            raise ValueError("origin, spacing and counts must have the same positive length")
        if any(not h > 0 or not math.isfinite(h) for h in self.spacing):
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        if any(N < 1 for N in self.counts):
            raise ValueError(f"grid counts must be >= 1, got {self.counts}")
        if any(not math.isfinite(a) for a in self.origin):
            raise ValueError("grid origin must be finite")

    @classmethod
    def box(cls, lo, hi, h) -> "GridSpec":
        """Grid covering ``[lo, hi]`` with spacing ``h``; ``hi - lo`` must be a multiple of ``h``."""
        lo = _tuple(lo)
        hi = _tuple(hi, len(lo))
        h = _tuple(h, len(lo))
        counts = []
        for a, b, hj in zip(lo, hi, h):
            N = (b - a) / hj
            if abs(N - round(N)) > 1e-9 * max(1.0, abs(N)):
                raise ValueError(f"extent {b - a} is not a multiple of spacing {hj}")
            counts.append(int(round(N)))
        return cls(lo, h, tuple(counts))

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def lower(self) -> tuple[float, ...]:
        return self.origin

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(a + N * h for a, N, h in zip(self.origin, self.counts, self.spacing))

    def axis_centers(self, j: int) -> np.ndarray:
        return self.origin[j] + (np.arange(self.counts[j]) + 0.5) * self.spacing[j]

    def centers(self) -> np.ndarray:
        """Cell centers, shape ``counts + (dim,)``."""
        axes = [self.axis_centers(j) for j in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def uniform_spacing(self) -> float:
        h = self.spacing[0]
        if any(not math.isclose(hj, h, rel_tol=1e-12) for hj in self.spacing):
            raise ValueError(f"operation needs equal spacing on every axis, got {self.spacing}")
        return h

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "origins": list(self.origin),
            "spacings": list(self.spacing),
            "counts": list(self.counts),
        }


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube with half side length ``radius``."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _tuple(self.center))
        if not self.radius > 0:
            raise ValueError(f"cube radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def side(self) -> float:
        return 2.0 * self.radius

    @property
    def volume(self) -> float:
        return self.side**self.dim

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(c - self.radius for c in self.center)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(c + self.radius for c in self.center)

    def scaled(self, factor: float) -> "Cube":
        return Cube(self.center, self.radius * factor)

    def as_rectangle(self) -> "Rectangle":
        return Rectangle(self.lo, self.hi)

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center)
        return np.all(np.abs(x - c) <= self.radius, axis=-1)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Rectangle:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", _tuple(self.lo))
        object.__setattr__(self, "hi", _tuple(self.hi, len(self.lo)))
        if any(not a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"empty rectangle {self.lo} .. {self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= np.asarray(self.lo)) & (x <= np.asarray(self.hi)), axis=-1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values at cell centers of ``grid``; zero outside the grid box.

    ``values`` has shape ``grid.counts``; axis ``j`` of the array is the
    coordinate ``x_{j+1}``.
    """

    grid: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != self.grid.counts:
            if v.size == int(np.prod(self.grid.counts)):
                v = v.reshape(self.grid.counts)
            else:
                raise ValueError(f"values shape {v.shape} != grid counts {self.grid.counts}")
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite; truncate singular samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.grid.counts

    def with_values(self, values, **meta) -> "GridFunction":
        return GridFunction(self.grid, values, dict(meta))

    def abs(self) -> "GridFunction":
        return self.with_values(np.abs(self.values))

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __pow__(self, t):
        return self.with_values(self.values**t)

    def at(self, point) -> float:
        """Value of the cell containing ``point`` (0 outside the box)."""
        idx = self.cell_index(point)
        return 0.0 if idx is None else float(self.values[idx])

    def cell_index(self, point):
        point = _tuple(point)
        idx = []
        for x, a, h, N in zip(point, self.grid.origin, self.grid.spacing, self.grid.counts):
            i = int(math.floor((x - a) / h))
            if not 0 <= i < N:
                return None
            idx.append(i)
        return tuple(idx)

    def interpolate(self, point) -> float:
        """Multilinear interpolation between cell centers (clamped at the box edge)."""
        point = _tuple(point)
        lo_idx, weights = [], []
        for x, a, h, N in zip(point, self.grid.origin, self.grid.spacing, self.grid.counts):
            s = (x - a) / h - 0.5
            s = min(max(s, 0.0), N - 1.0)
            i = min(int(math.floor(s)), max(N - 2, 0))
            lo_idx.append(i)
            weights.append(s - i)
        total = 0.0
        for corner in np.ndindex(*(2,) * self.dim):
            w = 1.0
            idx = []
            for j, c in enumerate(corner):
                i = min(lo_idx[j] + c, self.grid.counts[j] - 1)
                idx.append(i)
                w *= weights[j] if c else 1.0 - weights[j]
            if w:
                total += w * self.values[tuple(idx)]
        return float(total)


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise ValueError("grid functions live on different grids")


# {{{ analytic function descriptors


class FunctionDescriptor:
    """Callable on point arrays of shape ``(..., n)``; serializable to a dict."""

    kind = "abstract"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(FunctionDescriptor):
    kind = "zero"

    def __call__(self, x):
        return np.zeros(np.shape(x)[:-1])

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Constant(FunctionDescriptor):
    value: float = 1.0
    kind = "constant"

    def __call__(self, x):
        return np.full(np.shape(x)[:-1], float(self.value))

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class IndicatorBox(FunctionDescriptor):
    """``height`` times the indicator of the closed box ``[lo, hi]``."""

    lo: tuple
    hi: tuple
    height: float = 1.0
    kind = "indicator_box"

    def __post_init__(self):
        object.__setattr__(self, "lo", _tuple(self.lo))
        object.__setattr__(self, "hi", _tuple(self.hi, len(self.lo)))

    @classmethod
    def of(cls, region, height=1.0) -> "IndicatorBox":
        if isinstance(region, Cube):
            return cls(region.lo, region.hi, height)
        return cls(region.lo, region.hi, height)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.all((x >= np.asarray(self.lo)) & (x <= np.asarray(self.hi)), axis=-1)
        return self.height * inside.astype(float)

    def to_dict(self):
        return {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi), "height": self.height}


@dataclass(frozen=True)
class IndicatorSet(FunctionDescriptor):
    """Indicator of ``{x : predicate(x)}``; not serializable."""

    predicate: Callable[[np.ndarray], np.ndarray]
    kind = "indicator_set"

    def __call__(self, x):
        return np.asarray(self.predicate(np.asarray(x, dtype=float)), dtype=bool).astype(float)

    def to_dict(self):
        raise TypeError("IndicatorSet wraps a Python callable and cannot be serialized")


@dataclass(frozen=True)
class Tensor(FunctionDescriptor):
    """``prod_j factor_j(x_j)`` for one-dimensional factors."""

    factors: tuple
    kind = "tensor"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != len(self.factors):
            raise ValueError("tensor descriptor dimension mismatch")
        out = np.ones(x.shape[:-1])
        for j, fac in enumerate(self.factors):
            out = out * fac(x[..., j : j + 1])
        return out

    def to_dict(self):
        return {"kind": self.kind, "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True)
class PowerFunction(FunctionDescriptor):
    """``|x - center|^exponent`` on ``|x - center| < radius`` (``radius=inf``: untruncated)."""

    center: tuple
    exponent: float
    radius: float = math.inf
    kind = "power"

    def __post_init__(self):
        object.__setattr__(self, "center", _tuple(self.center))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x - np.asarray(self.center), axis=-1)
        with np.errstate(divide="ignore"):
            out = np.where(r < self.radius, r**self.exponent, 0.0)
        return out

    def to_dict(self):
        return {"kind": self.kind, "center": list(self.center), "exponent": self.exponent,
                "radius": self.radius}


@dataclass(frozen=True)
class SeparatedPower(FunctionDescriptor):
    """``prod_j |x_j|^{exponents_j}`` on the cube ``|x_j| < radius``."""

    exponents: tuple
    radius: float = math.inf
    kind = "separated_power"

    def __post_init__(self):
        object.__setattr__(self, "exponents", _tuple(self.exponents))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.all(np.abs(x) < self.radius, axis=-1)
        with np.errstate(divide="ignore"):
            vals = np.prod(np.abs(x) ** np.asarray(self.exponents), axis=-1)
        return np.where(inside, vals, 0.0)

    def to_dict(self):
        return {"kind": self.kind, "exponents": list(self.exponents), "radius": self.radius}


@dataclass(frozen=True)
class StepFunction(FunctionDescriptor):
    """Piecewise constant on the uniform partition of ``[lo, hi)`` given by ``values.shape``."""

    lo: tuple
    hi: tuple
    values: Any
    kind = "steps"

    def __post_init__(self):
        object.__setattr__(self, "lo", _tuple(self.lo))
        object.__setattr__(self, "hi", _tuple(self.hi, len(self.lo)))
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != len(self.lo):
            raise ValueError("step values must have one axis per dimension")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        m = np.asarray(self.values.shape)
        inside = np.all((x >= lo) & (x < hi), axis=-1)
        idx = np.floor((x - lo) / (hi - lo) * m).astype(int)
        idx = np.clip(idx, 0, m - 1)
        out = self.values[tuple(idx[..., j] for j in range(len(m)))]
        return np.where(inside, out, 0.0)

    def __hash__(self):
        return hash((self.lo, self.hi, self.values.tobytes()))

    def to_dict(self):
        return {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi),
                "values": self.values.tolist()}


@dataclass(frozen=True)
class Triangle(FunctionDescriptor):
    """Indicator of ``{0 <= x_2 <= x_1 <= 1}``."""

    kind = "triangle"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b = x[..., 0], x[..., 1]
        return ((a >= 0) & (a <= 1) & (b >= 0) & (b <= a)).astype(float)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Piecewise(FunctionDescriptor):
    """Sum of ``(region, descriptor)`` pieces, each active on its closed box."""

    pieces: tuple
    kind = "piecewise"

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple((Rectangle(*r) if not isinstance(r, Rectangle)
                                                  else r, d) for r, d in self.pieces))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for region, desc in self.pieces:
            mask = region.contains(x)
            out = out + np.where(mask, desc(x), 0.0)
        return out

    def to_dict(self):
        return {"kind": self.kind,
                "pieces": [{"lo": list(r.lo), "hi": list(r.hi), "fn": d.to_dict()}
                           for r, d in self.pieces]}


def descriptor_from_dict(d: dict) -> FunctionDescriptor:
    kind = d.get("kind")
    if kind == "zero":
        return Zero()
    if kind == "constant":
        return Constant(float(d.get("value", 1.0)))
    if kind == "indicator_box":
        return IndicatorBox(d["lo"], d["hi"], float(d.get("height", 1.0)))
    if kind == "tensor":
        return Tensor(tuple(descriptor_from_dict(f) for f in d["factors"]))
    if kind == "power":
        return PowerFunction(d["center"], float(d["exponent"]), float(d.get("radius", math.inf)))
    if kind == "separated_power":
        return SeparatedPower(d["exponents"], float(d.get("radius", math.inf)))
    if kind == "steps":
        return StepFunction(d["lo"], d["hi"], d["values"])
    if kind == "triangle":
        return Triangle()
    if kind == "piecewise":
        return Piecewise(tuple(((p["lo"], p["hi"]), descriptor_from_dict(p["fn"]))
                               for p in d["pieces"]))
    if kind == "stockert":
        from .oracles import stockert_counterexample

        return stockert_counterexample(float(d["q1"]), float(d["q2"])).sampler
    raise ValueError(f"unknown function descriptor kind {kind!r}")


# }}}


def sample(fn, grid: GridSpec) -> GridFunction:
    """Evaluate ``fn`` (descriptor, dict, or callable on ``(..., n)`` arrays) at cell centers."""
    if isinstance(fn, dict):
        fn = descriptor_from_dict(fn)
    values = np.asarray(fn(grid.centers()), dtype=float)
    if values.shape != grid.counts:
        values = np.broadcast_to(values, grid.counts)
    if not np.all(np.isfinite(values)):
        raise ValueError("sampled function is not finite at some cell center")
    return GridFunction(grid, values, {"descriptor": getattr(fn, "kind", "callable")})


def integrate(f: GridFunction) -> float:
    """Midpoint rule: sum of values times cell volume."""
    return float(np.sum(f.values) * f.grid.cell_volume)


def _region_mask(grid: GridSpec, region) -> np.ndarray:
    if isinstance(region, Cube):
        c = np.asarray(region.center, dtype=float)
        r = region.radius
        axes = [np.abs(grid.axis_centers(j) - c[j]) <= r for j in range(grid.dim)]
    elif isinstance(region, Rectangle):
        axes = [(grid.axis_centers(j) >= region.lo[j]) & (grid.axis_centers(j) <= region.hi[j])
                for j in range(grid.dim)]
    else:
        raise TypeError("region must be a Cube or Rectangle")
    if region.dim != grid.dim:
        raise ValueError("region dimension does not match grid")
    mask = axes[0]
    for a in axes[1:]:
        mask = np.multiply.outer(mask, a)
    return mask.astype(bool)


def restrict(f: GridFunction, region) -> GridFunction:
    """Keep cells whose center lies in the closed region; zero elsewhere."""
    return f.with_values(np.where(_region_mask(f.grid, region), f.values, 0.0))


def restrict_complement(f: GridFunction, region) -> GridFunction:
    return f.with_values(np.where(_region_mask(f.grid, region), 0.0, f.values))


def dilate(f: GridFunction, t: float, tol: float = 1e-12) -> GridFunction:
    """Grid representation of ``x -> f(t x)``.

    The values are reused on the grid with origin ``a/t`` and spacing ``h/t``,
    which is exact for every ``t > 0``.  The result is additionally flagged
    ``commensurable`` when that grid is ``t * h`` commensurable with ``h``.
    """
    if not t > 0:
        raise ValueError(f"dilation factor must be positive, got {t}")
    grid = GridSpec(tuple(a / t for a in f.grid.origin),
                    tuple(h / t for h in f.grid.spacing), f.grid.counts)
    ratio = t if t >= 1 else 1.0 / t
    commensurable = abs(ratio - round(ratio)) <= tol * ratio
    return GridFunction(grid, f.values, {"dilation": t, "commensurable": commensurable})


# {{{ file I/O: JSON header plus flat binary or CSV body


def save_grid(path, f: GridFunction, fmt: str = "binary") -> Path:
    """Write ``<path>`` (JSON header) and a sibling data file; returns the header path."""
    path = Path(path)
    if path.suffix != ".json":
        path = path.with_suffix(".json")
    if fmt == "binary":
        data_path = path.with_suffix(".bin")
        np.ascontiguousarray(f.values, dtype="<f8").tofile(data_path)
    elif fmt == "csv":
        data_path = path.with_suffix(".csv")
        flat = f.values.ravel(order="C")
        with open(data_path, "w") as fh:
            fh.write("index,value\n")
            for i, v in enumerate(flat):
                fh.write(f"{i},{float(v)!r}\n")
    else:
        raise ValueError(f"unknown grid format {fmt!r}")
    header = f.grid.to_dict()
    header.update({"format": fmt, "data": data_path.name, "order": "C", "dtype": "float64"})
    path.write_text(json.dumps(header, indent=2, sort_keys=True))
    return path


def load_grid(path) -> GridFunction:
    path = Path(path)
    header = json.loads(path.read_text())
    grid = GridSpec(header["origins"], header["spacings"], header["counts"])
    if header.get("dim", grid.dim) != grid.dim:
        raise ValueError("grid header dim disagrees with its axis lists")
    data_path = path.parent / header["data"]
    size = int(np.prod(grid.counts))
    if header["format"] == "binary":
        values = np.fromfile(data_path, dtype="<f8")
    elif header["format"] == "csv":
        values = np.zeros(size)
        raw = np.loadtxt(data_path, delimiter=",", skiprows=1, ndmin=2)
        values[raw[:, 0].astype(int)] = raw[:, 1]
    else:
        raise ValueError(f"unknown grid format {header['format']!r}")
    if values.size != size:
        raise ValueError(f"{data_path} holds {values.size} values, expected {size}")
    return GridFunction(grid, values.reshape(grid.counts))


# }}}

"""Mixed Lebesgue, mixed sequence, Morrey and weighted norms on grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grid import Cube, GridFunction, GridSpec

__all__ = [
    "AdmissibilityError",
    "ExponentVector",
    "MorreyParams",
    "CubeFamily",
    "parse_exponent",
    "inv",
    "conjugate",
    "mixed_lebesgue_norm",
    "mixed_sequence_norm",
    "classical_morrey_norm",
    "mixed_morrey_norm",
    "weighted_lp_norm",
    "equivalent_morrey_norm",
    "vector_norm",
    "vector_morrey_norm",
    "dual_sequence",
    "pairing",
    "interval_maximal_closed_form",
    "norm_record",
]


class AdmissibilityError(ValueError):
    """Exponents or parameters outside the range where a quantity is defined."""


INF = math.inf


def parse_exponent(p) -> float:
    """Accepts numbers, ``"inf"``/``"∞"`` and fraction strings such as ``"4/3"``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞", "+inf"):
            return INF
        p = float(Fraction(s))
    p = float(p)
    if not p > 0 or math.isnan(p):
        raise AdmissibilityError(f"exponent must lie in (0, inf], got {p}")
    return p


def inv(p: float) -> float:
    """``1/p`` with ``1/inf = 0``."""
    return 0.0 if math.isinf(p) else 1.0 / p


def _exp_json(p: float):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class ExponentVector:
    entries: tuple[float, ...]

    def __post_init__(self):
        ent = self.entries
        if np.isscalar(ent) or isinstance(ent, str):
            ent = (ent,)
        ent = tuple(parse_exponent(p) for p in ent)
        if not ent:
            raise AdmissibilityError("exponent vector must be nonempty")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def of(cls, value, n: int | None = None) -> "ExponentVector":
        if isinstance(value, ExponentVector):
            ev = value
        elif np.isscalar(value) or isinstance(value, str):
            ev = cls((value,) * (n or 1))
        else:
            ev = cls(tuple(value))
        if n is not None and len(ev) != n:
            raise AdmissibilityError(f"exponent vector has length {len(ev)}, expected {n}")
        return ev

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __truediv__(self, r: float) -> "ExponentVector":
        return ExponentVector(tuple(p / r for p in self.entries))

    def __mul__(self, r: float) -> "ExponentVector":
        return ExponentVector(tuple(p * r for p in self.entries))

    __rmul__ = __mul__

    @property
    def inverse_sum(self) -> float:
        return sum(inv(p) for p in self.entries)

    @property
    def min(self) -> float:
        return min(self.entries)

    @property
    def max(self) -> float:
        return max(self.entries)

    def all_finite(self) -> bool:
        return not any(math.isinf(p) for p in self.entries)

    def all_at_least(self, bound: float, strict: bool = False) -> bool:
        return all(p > bound if strict else p >= bound for p in self.entries)

    def le(self, other: "ExponentVector") -> bool:
        return all(a <= b for a, b in zip(self.entries, other.entries))

    def conjugate(self) -> "ExponentVector":
        return conjugate(self)

    def to_json(self) -> list:
        return [_exp_json(p) for p in self.entries]

    def __repr__(self):
        return f"ExponentVector({tuple(self.to_json())})"


def conjugate(pvec) -> ExponentVector:
    pvec = ExponentVector.of(pvec)
    out = []
    for p in pvec:
        if p < 1:
            raise AdmissibilityError(f"conjugate exponent needs p >= 1, got {p}")
        if p == 1:
            out.append(INF)
        elif math.isinf(p):
            out.append(1.0)
        else:
            out.append(p / (p - 1))
    return ExponentVector(tuple(out))


_ADMISSIBLE_SLACK = 1e-12


@dataclass(frozen=True)
class MorreyParams:
    p: float
    qvec: ExponentVector

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "qvec", ExponentVector.of(self.qvec))
        n = len(self.qvec)
        lhs, rhs = self.qvec.inverse_sum, n * inv(self.p)
        if lhs < rhs - _ADMISSIBLE_SLACK * max(1.0, rhs):
            raise AdmissibilityError(
                f"mixed Morrey parameters need sum 1/q_j >= n/p; got {lhs:.6g} < {rhs:.6g}")

    @property
    def dim(self) -> int:
        return len(self.qvec)

    @property
    def volume_exponent(self) -> float:
        """Exponent of ``|Q|`` in the Morrey functional, ``1/p - (1/n) sum 1/q_j``."""
        return inv(self.p) - self.qvec.inverse_sum / self.dim

    def to_json(self) -> dict:
        return {"p": _exp_json(self.p), "q": self.qvec.to_json()}


# {{{ cube families


@dataclass(frozen=True)
class CubeFamily:
    """Candidate cubes for Morrey and A_p suprema.

    ``strategy`` is one of

    * ``"exact"``: every cell-aligned cube meeting the grid box, side
      ``k h`` for ``k = 1 .. max N_j``.  Since the functional only loses
      mass when a cube leaves the box, it is enough to keep cubes inside the
      box on axes where they fit and covering the axis where they do not; the
      supremum over all aligned cubes is then attained in the family.
    * ``"dyadic"``: sides ``K, ceil(K/2), ceil(K/4), ..., 1`` cells
      (``K = max N_j``) at positions with stride ``max(1, k // 2)`` plus the
      last in-box position.
    * ``"explicit"``: the cubes in ``cubes``.
    """

    strategy: str = "dyadic"
    cubes: tuple = ()

    def __post_init__(self):
        if self.strategy not in ("exact", "dyadic", "explicit"):
            raise ValueError(f"unknown cube family strategy {self.strategy!r}")
        object.__setattr__(self, "cubes", tuple(self.cubes))
        if self.strategy == "explicit" and not self.cubes:
            raise ValueError("explicit cube family must be nonempty")

    @classmethod
    def exact(cls):
        return cls("exact")

    @classmethod
    def dyadic(cls):
        return cls("dyadic")

    @classmethod
    def explicit(cls, cubes: Iterable[Cube]):
        return cls("explicit", tuple(cubes))

    def sides(self, grid: GridSpec) -> list[int]:
        K = max(grid.counts)
        if self.strategy == "exact":
            return list(range(1, K + 1))
        if self.strategy == "dyadic":
            out, k = set(), K
            m = 0
            while True:
                k = -(-K // (2**m))
                out.add(k)
                if k == 1:
                    break
                m += 1
            return sorted(out)
        raise ValueError("explicit families have no side enumeration")

    def starts(self, grid: GridSpec, k: int) -> list[np.ndarray]:
        """Start cell per axis for cubes of ``k`` cells."""
        out = []
        for N in grid.counts:
            kk = min(k, N)
            last = N - kk
            if self.strategy == "exact":
                s = np.arange(last + 1)
            else:
                s = np.arange(0, last + 1, max(1, k // 2))
                if s[-1] != last:
                    s = np.append(s, last)
            out.append(s)
        return out

    def cube_at(self, grid: GridSpec, k: int, start: Sequence[int]) -> Cube:
        h = grid.uniform_spacing()
        center = []
        for j, (s, N) in enumerate(zip(start, grid.counts)):
            lo = s if k <= N else N - k
            center.append(grid.origin[j] + (lo + 0.5 * k) * h)
        return Cube(tuple(center), 0.5 * k * h)

    def enumerate(self, grid: GridSpec) -> Iterator[Cube]:
        if self.strategy == "explicit":
            yield from self.cubes
            return
        for k in self.sides(grid):
            starts = self.starts(grid, k)
            for idx in np.ndindex(*(len(s) for s in starts)):
                yield self.cube_at(grid, k, [starts[j][i] for j, i in enumerate(idx)])

    def size(self, grid: GridSpec) -> int:
        if self.strategy == "explicit":
            return len(self.cubes)
        return sum(int(np.prod([len(s) for s in self.starts(grid, k)])) for k in self.sides(grid))

    def to_json(self) -> dict:
        d = {"strategy": self.strategy}
        if self.strategy == "explicit":
            d["cubes"] = [c.to_dict() for c in self.cubes]
        return d

    @classmethod
    def from_json(cls, d) -> "CubeFamily":
        if isinstance(d, str):
            return cls(d)
        if d.get("strategy") == "explicit":
            return cls.explicit(Cube(tuple(c["center"]), float(c["radius"])) for c in d["cubes"])
        return cls(d.get("strategy", "dyadic"))


def _check_meets_box(grid: GridSpec, Q: Cube):
    for c, a, b in zip(Q.center, grid.lower, grid.upper):
        if c + Q.radius < a or c - Q.radius > b:
            raise ValueError(f"cube {Q} does not meet the grid box")


def _cube_mask(grid: GridSpec, Q: Cube) -> np.ndarray:
    axes = [np.abs(grid.axis_centers(j) - Q.center[j]) <= Q.radius for j in range(grid.dim)]
    mask = axes[0]
    for a in axes[1:]:
        mask = np.multiply.outer(mask, a)
    return mask


# }}}


# {{{ mixed Lebesgue norm


def _reduce_axis0(a: np.ndarray, p: float, h: float) -> np.ndarray:
    # a >= 0; returns the L^p (or l^p when h=1) norm over axis 0
    if math.isinf(p):
        return a.max(axis=0)
    return (np.sum(a**p, axis=0) * h) ** (1.0 / p)


def _mixed_reduce(a: np.ndarray, pvec: ExponentVector, spacing: Sequence[float]) -> float:
    a = np.abs(np.asarray(a, dtype=np.float64))
    if a.ndim != len(pvec):
        raise AdmissibilityError(f"exponent vector length {len(pvec)} != dimension {a.ndim}")
    for p, h in zip(pvec, spacing):
        a = _reduce_axis0(a, p, h)
    return float(a)


def mixed_lebesgue_norm(f: GridFunction, pvec) -> float:
    """Reduce axis 1 first, axis ``n`` last; ``inf`` entries take the max."""
    pvec = ExponentVector.of(pvec, f.dim)
    return _mixed_reduce(f.values, pvec, f.grid.spacing)


def mixed_sequence_norm(a, pvec) -> float:
    a = np.asarray(a, dtype=np.float64)
    pvec = ExponentVector.of(pvec, a.ndim)
    return _mixed_reduce(a, pvec, (1.0,) * a.ndim)


def weighted_lp_norm(f: GridFunction, p, w: GridFunction) -> float:
    p = parse_exponent(p)
    if math.isinf(p):
        raise AdmissibilityError("weighted L^p norm needs finite p")
    if w.grid != f.grid:
        raise ValueError("weight and function live on different grids")
    if np.any(w.values < 0):
        raise ValueError("weight has negative cells")
    return float((np.sum(np.abs(f.values) ** p * w.values) * f.grid.cell_volume) ** (1.0 / p))


# }}}


# {{{ Morrey norms


def _windows(a: np.ndarray, axis: int, k: int, starts: np.ndarray, p: float, h: float):
    """Per-window L^p norm (already raised to ``p``) or max along ``axis``."""
    view = sliding_window_view(a, k, axis=axis)
    view = np.take(view, starts, axis=axis)
    if math.isinf(p):
        return view.max(axis=-1)
    return view.sum(axis=-1) * h


def _side_values(absf: np.ndarray, family: CubeFamily, grid: GridSpec, k: int,
                 qvec: ExponentVector, h: float) -> tuple[np.ndarray, list]:
    starts = family.starts(grid, k)
    a = absf
    for ax, q in enumerate(qvec):
        kk = min(k, grid.counts[ax])
        if math.isinf(q):
            a = _windows(a, ax, kk, starts[ax], q, h)
        else:
            a = _windows(a**q, ax, kk, starts[ax], q, h) ** (1.0 / q)
    return a, starts


def _morrey_sup(f: GridFunction, qvec: ExponentVector, vol_exp: float,
                family: CubeFamily) -> tuple[float, Cube]:
    grid = f.grid
    absf = np.abs(f.values)
    best, best_cube = -1.0, None
    if family.strategy == "explicit":
        for Q in family.cubes:
            if Q.dim != f.dim:
                raise ValueError("cube dimension does not match grid")
            _check_meets_box(grid, Q)
            vals = np.where(_cube_mask(grid, Q), absf, 0.0)
            v = Q.volume**vol_exp * _mixed_reduce(vals, qvec, grid.spacing)
            if v > best:
                best, best_cube = v, Q
        return float(best), best_cube
    h = grid.uniform_spacing()
    for k in family.sides(grid):
        vals, starts = _side_values(absf, family, grid, k, qvec, h)
        factor = ((k * h) ** grid.dim) ** vol_exp
        flat = int(np.argmax(vals))
        v = float(vals.flat[flat]) * factor
        if v > best:
            idx = np.unravel_index(flat, vals.shape)
            best = v
            best_cube = family.cube_at(grid, k, [starts[j][i] for j, i in enumerate(idx)])
    return best, best_cube


def mixed_morrey_norm(f: GridFunction, params: MorreyParams,
                      family: CubeFamily | None = None) -> tuple[float, Cube]:
    """Supremum over ``family`` of ``|Q|^(1/p - sum(1/q_j)/n) * ||f chi_Q||_q``.

    Returns the value and the maximizing cube; ties go to the smaller cube,
    then to the lexicographically smaller center.
    """
    if not isinstance(params, MorreyParams):
        raise TypeError("params must be MorreyParams")
    if params.dim != f.dim:
        raise AdmissibilityError("Morrey exponent vector length does not match grid dimension")
    family = family or CubeFamily.dyadic()
    return _morrey_sup(f, params.qvec, params.volume_exponent, family)


def classical_morrey_norm(f: GridFunction, p, q, family: CubeFamily | None = None) -> float:
    """``max_Q |Q|^(1/p - 1/q) (int_Q |f|^q)^(1/q)`` summed over all axes at once."""
    p, q = parse_exponent(p), parse_exponent(q)
    if q > p:
        raise AdmissibilityError(f"classical Morrey norm needs q <= p, got q={q}, p={p}")
    family = family or CubeFamily.dyadic()
    grid = f.grid
    absf = np.abs(f.values)
    vol_exp = inv(p) - inv(q)
    best = 0.0
    if family.strategy == "explicit":
        for Q in family.cubes:
            _check_meets_box(grid, Q)
            sel = absf[_cube_mask(grid, Q)]
            inner = sel.max(initial=0.0) if math.isinf(q) else \
                (np.sum(sel**q) * grid.cell_volume) ** (1.0 / q)
            best = max(best, Q.volume**vol_exp * float(inner))
        return best
    h = grid.uniform_spacing()
    a0 = absf if math.isinf(q) else absf**q
    for k in family.sides(grid):
        starts = family.starts(grid, k)
        a = a0
        for ax in range(grid.dim):
            kk = min(k, grid.counts[ax])
            view = np.take(sliding_window_view(a, kk, axis=ax), starts[ax], axis=ax)
            a = view.max(axis=-1) if math.isinf(q) else view.sum(axis=-1)
        inner = a if math.isinf(q) else (a * grid.cell_volume) ** (1.0 / q)
        best = max(best, float(inner.max()) * ((k * h) ** grid.dim) ** vol_exp)
    return best


def interval_maximal_closed_form(lo: float, hi: float, x) -> np.ndarray:
    """Uncentered maximal function of the indicator of ``[lo, hi]`` on the line."""
    x = np.asarray(x, dtype=float)
    ell = hi - lo
    out = np.ones_like(x)
    right = x > hi
    left = x < lo
    out = np.where(right, ell / np.where(right, x - lo, 1.0), out)
    out = np.where(left, ell / np.where(left, hi - x, 1.0), out)
    return out


def equivalent_morrey_norm(f: GridFunction, params: MorreyParams, eta: float,
                           family: CubeFamily | None = None) -> float:
    """``max_Q |Q|^(1/p - sum(1/q_j)/n) || f prod_j (M chi_{I_j})^eta ||_q`` over the whole box.

    ``I_j`` is the projection of ``Q`` on axis ``j``.
    """
    n = f.dim
    gap = params.qvec.inverse_sum - n * inv(params.p)
    if not (0 < gap < eta < 1):
        raise AdmissibilityError(
            f"equivalent norm needs 0 < sum 1/q_j - n/p < eta < 1; got gap={gap:.6g}, eta={eta}")
    family = family or CubeFamily.dyadic()
    grid = f.grid
    absf = np.abs(f.values)
    vol_exp = params.volume_exponent
    best = 0.0
    if family.strategy == "explicit":
        for Q in family.cubes:
            _check_meets_box(grid, Q)
            w = np.ones(grid.counts)
            for j in range(n):
                wj = interval_maximal_closed_form(Q.lo[j], Q.hi[j], grid.axis_centers(j)) ** eta
                w = w * wj.reshape([-1 if i == j else 1 for i in range(n)])
            best = max(best, Q.volume**vol_exp * _mixed_reduce(absf * w, params.qvec, grid.spacing))
        return best
    h = grid.uniform_spacing()
    for k in family.sides(grid):
        starts = family.starts(grid, k)
        a = absf
        # a has shape (P_1..P_{j}, N_{j+1}..N_n) after j reductions
        for ax, q in enumerate(params.qvec):
            N = grid.counts[ax]
            lo = np.where(k <= N, starts[ax], N - k) * h + grid.origin[ax]
            W = interval_maximal_closed_form(lo[:, None], lo[:, None] + k * h,
                                             grid.axis_centers(ax)[None, :]) ** eta
            a = np.moveaxis(a, ax, 0)  # (N, ...)
            rest = a.shape[1:]
            flat = a.reshape(N, -1)
            if math.isinf(q):
                red = (W[:, :, None] * flat[None, :, :]).max(axis=1)
            else:
                red = ((W**q) @ (flat**q) * h) ** (1.0 / q)
            a = np.moveaxis(red.reshape((len(lo),) + rest), 0, ax)
        best = max(best, float(a.max()) * ((k * h) ** n) ** vol_exp)
    return best


# }}}


# {{{ vector-valued norms and the dual sequence


def _envelope(values: Sequence[np.ndarray], q: float) -> np.ndarray:
    stack = np.abs(np.stack([np.asarray(v, dtype=float) for v in values]))
    if math.isinf(q):
        return stack.max(axis=0)
    return np.sum(stack**q, axis=0) ** (1.0 / q)


def vector_norm(f_list: Sequence[GridFunction], pvec, q) -> float:
    """``|| (sum_j |f_j|^q)^(1/q) ||_p`` (``q = inf``: pointwise max)."""
    if not f_list:
        raise ValueError("empty sequence")
    q = parse_exponent(q)
    F = f_list[0].with_values(_envelope([f.values for f in f_list], q))
    return mixed_lebesgue_norm(F, pvec)


def vector_morrey_norm(f_list: Sequence[GridFunction], params: MorreyParams, q,
                       family: CubeFamily | None = None) -> float:
    q = parse_exponent(q)
    F = f_list[0].with_values(_envelope([f.values for f in f_list], q))
    return mixed_morrey_norm(F, params, family)[0]


def pairing(f_list: Sequence[GridFunction], g_list: Sequence[GridFunction]) -> float:
    if len(f_list) != len(g_list):
        raise ValueError("sequences have different lengths")
    return float(sum(np.sum(f.values * g.values) * f.grid.cell_volume
                     for f, g in zip(f_list, g_list)))


def _dual_weight(F: np.ndarray, pvec: Sequence[float], spacing: Sequence[float]) -> np.ndarray:
    """Nonnegative ``G`` with ``int F G = ||F||_p`` and ``||G||_{p'} = 1`` (F >= 0, F != 0)."""
    if F.ndim == 0:
        return np.ones(())
    p, h = pvec[0], spacing[0]
    N = _reduce_axis0(F, p, h)
    if math.isinf(p):
        first = np.argmax(F, axis=0)
        A = (np.arange(F.shape[0]).reshape((-1,) + (1,) * (F.ndim - 1)) == first[None]) / h
        A = A.astype(float)
    else:
        safe = np.where(N > 0, N, 1.0)
        A = np.where(N > 0, (F / safe) ** (p - 1), 0.0)
    return A * _dual_weight(N, pvec[1:], spacing[1:])[None]


def dual_sequence(f_list: Sequence[GridFunction], pvec, q) -> list[GridFunction]:
    """Sequence ``g_j`` norming ``{f_j}`` in ``L^p(l^q)``.

    ``sum_j int f_j g_j`` equals the ``L^p(l^q)`` norm of ``{f_j}`` and the
    ``L^{p'}(l^{q'})`` norm of ``{g_j}`` is one.  Nonnegative inputs give
    nonnegative outputs.
    """
    if not f_list:
        raise ValueError("empty sequence")
    grid = f_list[0].grid
    pvec = ExponentVector.of(pvec, grid.dim)
    q = parse_exponent(q)
    if not (pvec.all_at_least(1.0, strict=True) and q > 1):
        raise AdmissibilityError("dual sequence needs 1 < p_j <= inf and 1 < q <= inf")
    vals = np.stack([f.values for f in f_list])
    if not np.any(vals):
        raise ValueError("all functions vanish; nothing to dualize")
    absv = np.abs(vals)
    F = _envelope(list(vals), q)
    G = _dual_weight(F, pvec.entries, grid.spacing)
    if math.isinf(q):
        first = np.argmax(absv, axis=0)
        sel = np.arange(len(f_list)).reshape((-1,) + (1,) * grid.dim) == first[None]
        g = np.where(sel & (F[None] > 0), np.sign(vals) * G[None], 0.0)
    else:
        safe = np.where(F > 0, F, 1.0)
        g = np.where(F[None] > 0, np.sign(vals) * absv ** (q - 1) * safe[None] ** (1 - q) * G[None],
                     0.0)
    return [GridFunction(grid, gj) for gj in g]


# }}}


def norm_record(kind: str, exponents, params, value: float, argmax_cube: Cube | None = None) -> dict:
    if isinstance(exponents, ExponentVector):
        exponents = exponents.to_json()
    elif isinstance(exponents, MorreyParams):
        exponents = exponents.to_json()
    return {
        "norm_kind": kind,
        "exponents": exponents,
        "params": params,
        "value": value,
        "argmax_cube": None if argmax_cube is None else argmax_cube.to_dict(),
    }

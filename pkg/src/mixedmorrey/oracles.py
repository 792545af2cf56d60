"""Closed-form ground truth, coded independently of the grid operators.

Everything here is scalar or lightly vectorized Python that does not call
into :mod:`mixedmorrey.kernels`, :mod:`mixedmorrey.maximal` or the norm
routines, so that agreement between the two is meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import Cube, FunctionDescriptor, IndicatorBox, PowerFunction, SeparatedPower, Triangle

__all__ = [
    "OracleCase",
    "interval_indicator_maximal",
    "indicator_cube_norms",
    "box_strong_maximal",
    "box_hl_maximal",
    "power_function_cases",
    "StockertSet",
    "StockertBundle",
    "stockert_counterexample",
    "TriangleBundle",
    "triangle_example",
    "triangle_strong_maximal",
    "triangle_hl_maximal",
    "point_line_maximal",
    "dual_sequence_product_formula",
    "oracle_catalog",
]


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass
class OracleCase:
    name: str
    sampler: FunctionDescriptor | None
    expected: Callable | None
    params: dict = field(default_factory=dict)
    region: str = "everywhere"
    note: str = ""
    report_only: bool = False
    member: bool | None = None
    homogeneity: float | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "region": self.region,
            "note": self.note,
            "report_only": self.report_only,
            "member": self.member,
            "homogeneity": self.homogeneity,
            "sampler": None if self.sampler is None else _sampler_json(self.sampler),
        }


def _sampler_json(s):
    try:
        return s.to_dict()
    except (TypeError, NotImplementedError, AttributeError):
        return {"kind": getattr(s, "kind", "callable")}


# {{{ indicators


def interval_indicator_maximal(interval: Sequence[float], x: float) -> float:
    """Uncentered maximal function of the indicator of ``[a, b]`` at ``x``."""
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("empty interval")
    if a <= x <= b:
        return 1.0
    if x > b:
        return (b - a) / (x - a)
    return (b - a) / (b - x)


def indicator_cube_norms(Q: Cube, pvec: Sequence[float], p: float) -> tuple[float, float]:
    """``(||chi_Q||_pvec, ||chi_Q||_Morrey(p, pvec))`` as closed forms.

    Only positivity of the exponents is checked; the second value is the
    Morrey norm when ``sum 1/p_j >= n/p`` and just the formula otherwise.
    """
    n = Q.dim
    if len(pvec) != n:
        raise ValueError("exponent vector length does not match cube dimension")
    if not (p > 0 and all(pj > 0 for pj in pvec)):
        raise ValueError("exponents must be positive")
    vol = Q.volume
    return vol ** (sum(_inv(pj) for pj in pvec) / n), vol ** _inv(p)


def box_strong_maximal(point: Sequence[float], lo: Sequence[float], hi: Sequence[float]) -> float:
    """Rectangles factor, so the strong maximal function of a box indicator is a product."""
    out = 1.0
    for x, a, b in zip(point, lo, hi):
        out *= interval_indicator_maximal((a, b), x)
    return out


def box_hl_maximal(point: Sequence[float], lo: Sequence[float], hi: Sequence[float],
                   samples: int = 20001) -> float:
    """Sup over cubes ``Q`` containing ``point`` of ``|Q cap box| / |Q|``.

    For side ``s`` the best overlap on axis ``j`` is
    ``min(s, l_j, s - d_j)^+`` with ``d_j`` the distance to ``[a_j, b_j]``.
    The ratio is scanned densely in ``s`` and the best brackets are refined
    with a bounded scalar search.
    """
    d = np.array([max(a - x, 0.0, x - b) for x, a, b in zip(point, lo, hi)])
    ell = np.array([b - a for a, b in zip(lo, hi)])

    def ratio(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))[:, None]
        r = np.maximum(0.0, np.minimum(np.minimum(s, ell), s - d)) / s
        return np.prod(r, axis=1)

    brk = np.concatenate([d, ell, d + ell])
    smax = 4 * float(brk.max()) + 1.0
    grid = np.union1d(np.linspace(1e-9, smax, samples), brk[brk > 0])
    vals = ratio(grid)
    best = float(vals.max())
    for i in np.argsort(vals)[-3:]:
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        if b > a:
            res = minimize_scalar(lambda s: -ratio(s)[0], bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-12})
            best = max(best, -float(res.fun))
    return best


# }}}


# {{{ power functions


def power_function_cases(p: float, qvec: Sequence[float], n: int,
                         radius: float = 1.0) -> list[OracleCase]:
    """Radial and separated power functions with their Morrey membership flags.

    * ``|x|^(-n/p)``: member when ``max q_j < p`` (sufficient condition).
    * ``prod |x_j|^(-1/p_j)`` with ``p_j = p``: balanced, member when every ``q_j < p``.
    * a separated power with ``sum 1/p_j != n/p``: never a member.
    """
    qvec = tuple(float(q) for q in qvec)
    if len(qvec) != n:
        raise ValueError("q vector length must equal n")
    cases = [
        OracleCase(
            "radial_power", PowerFunction((0.0,) * n, -n / p, radius), None,
            params={"p": p, "q": list(qvec), "n": n, "radius": radius},
            note="member iff the sufficient condition max q_j < p holds (flag is that condition)",
            member=max(qvec) < p, homogeneity=-n / p),
    ]
    balanced = (p,) * n
    cases.append(OracleCase(
        "separated_power_balanced", SeparatedPower(tuple(-1.0 / pj for pj in balanced), radius),
        None, params={"p": p, "q": list(qvec), "separated_exponents": list(balanced)},
        note="sum 1/p_j = n/p and q_j < p_j", member=all(q < pj for q, pj in zip(qvec, balanced)),
        homogeneity=-sum(1.0 / pj for pj in balanced)))
    skew = (p / 2,) + (p,) * (n - 1)
    cases.append(OracleCase(
        "separated_power_unbalanced", SeparatedPower(tuple(-1.0 / pj for pj in skew), radius),
        None, params={"p": p, "q": list(qvec), "separated_exponents": list(skew)},
        note="sum 1/p_j != n/p, so the scaling laws are incompatible", member=False,
        homogeneity=-sum(1.0 / pj for pj in skew)))
    return cases


# }}}


# {{{ the divergence example for ||M_2 f||_(q1) versus M_2 ||f||_(q1)


@dataclass(frozen=True)
class StockertSet(FunctionDescriptor):
    """Indicator of ``{(x, y): 0 <= x <= y^(-q1/q2), 0 < y < 1}``."""

    q1: float
    q2: float
    kind = "stockert"

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        inside_y = (y > 0) & (y < 1)
        with np.errstate(divide="ignore"):
            thresh = np.where(inside_y, np.where(y > 0, y, 1.0) ** (-self.q1 / self.q2), 0.0)
        return ((x >= 0) & inside_y & (x <= thresh)).astype(float)

    def to_dict(self):
        return {"kind": self.kind, "q1": self.q1, "q2": self.q2}


@dataclass(frozen=True)
class StockertBundle:
    q1: float
    q2: float

    @property
    def sampler(self) -> StockertSet:
        return StockertSet(self.q1, self.q2)

    def phi(self, t: float) -> float:
        return t ** (-self.q1 / self.q2) if 0 < t < 1 else 0.0

    def row_norm_profile(self, y):
        """The row norm as displayed, ``y^(-1/(q1 q2))`` on ``(0, 1)``."""
        y = np.asarray(y, dtype=float)
        inside = (y > 0) & (y < 1)
        return np.where(inside, np.where(inside, y, 1.0) ** (-1.0 / (self.q1 * self.q2)), 0.0)

    def rhs(self, y: float) -> float:
        """``M_2`` of the row norm profile: ``q1 q2 / (q1 q2 - 1) * y^(-1/(q1 q2))``."""
        a = self.q1 * self.q2
        return a / (a - 1) * y ** (-1.0 / a)

    def m2f(self, x: float, y: float) -> float:
        """``M_2 f(x, y) = min(y, x^(-q2/q1)) / y`` for ``x >= 0``, ``0 < y <= 1``."""
        if x < 0:
            return 0.0
        c = math.inf if x == 0 else x ** (-self.q2 / self.q1)
        return min(y, c) / y

    def truncated_norm(self, L: float, y: float) -> float:
        """``|| M_2 f(., y) chi_[0, L] ||_q1`` in closed form."""
        q1, q2 = self.q1, self.q2
        t = y ** (-q1 / q2)
        if L <= t:
            return L ** (1.0 / q1)
        tail = y ** (-q1) * (L ** (1 - q2) - t ** (1 - q2)) / (1 - q2)
        return (t + tail) ** (1.0 / q1)

    def growth_lower_bound(self, L: float, y: float) -> float:
        """``(c_y L^(1-q2))^(1/q1)`` from the divergent tail, with ``c_y = y^(-q1)/(1-q2)``."""
        t = y ** (-self.q1 / self.q2)
        if L <= t:
            return 0.0
        cy = y ** (-self.q1) / (1 - self.q2)
        return max(0.0, cy * (L ** (1 - self.q2) - t ** (1 - self.q2))) ** (1.0 / self.q1)

    def doubling_target(self) -> float:
        return 2.0 ** ((1 - self.q2) / self.q1)


def stockert_counterexample(q1: float, q2: float) -> StockertBundle:
    if not (0 < q2 < 1 < q1 and q1 * q2 > 1):
        raise ValueError(f"need 0 < q2 < 1 < q1 and q1 q2 > 1, got q1={q1}, q2={q2}")
    return StockertBundle(float(q1), float(q2))


def point_line_maximal(values: np.ndarray, i: int, block: int = 2048) -> float:
    """Exhaustive ``max_{l <= i <= r} mean(values[l:r+1])`` for one index, by prefix sums."""
    v = np.asarray(values, dtype=float)
    S = np.concatenate([[0.0], np.cumsum(v)])
    L = len(v)
    r = np.arange(i, L)
    best = -math.inf
    for l0 in range(0, i + 1, block):
        ls = np.arange(l0, min(i + 1, l0 + block))
        means = (S[r[None, :] + 1] - S[ls[:, None]]) / (r[None, :] - ls[:, None] + 1)
        best = max(best, float(means.max()))
    return best


# }}}


# {{{ the triangle example


@dataclass(frozen=True)
class TriangleBundle:
    """``chi`` of ``{0 <= y <= x <= 1}`` with its one-dimensional maximal functions."""

    @property
    def sampler(self) -> Triangle:
        return Triangle()

    @staticmethod
    def m1(x: float, y: float) -> float:
        if y < 0 or y > 1:
            return 0.0
        if y <= x <= 1:
            return 1.0
        if x < y:
            return (1 - y) / (1 - x)
        return (1 - y) / (x - y)

    @staticmethod
    def m2(x: float, y: float) -> float:
        if x < 0 or x > 1:
            return 0.0
        if 0 <= y <= x:
            return 1.0
        if y < 0:
            return x / (x - y)
        return x / y

    @staticmethod
    def m1m2_upper_region(x: float, y: float) -> float:
        """``M_1 M_2 f = (x + 1) / (2 y)`` for ``0 <= x <= 1``, ``y >= 1``."""
        return (x + 1) / (2 * y)

    @staticmethod
    def report_only_formulas() -> dict[str, Callable[[float, float], float]]:
        """Regional formulas kept for side-by-side reporting; they are not asserted."""
        return {
            "M2M1_upper_region": lambda x, y: (-x * x - y * y + 2 * y) / (2 * y * (1 - x)),
            "M2M1_right_region": lambda x, y: (y + (x - 1) * math.log((x - 1) / x)) / y,
            "M1M2_right_region": lambda x, y: (x - math.sqrt(x * x - 1)) / y,
        }


def triangle_example() -> TriangleBundle:
    return TriangleBundle()


def _triangle_rect_mass(x0, x1, yhi):
    """``int_0^yhi |[x0, x1] cap [0, 1] cap [y, inf)| dy`` for ``0 <= yhi <= 1`` (vectorized)."""
    a = np.maximum(x0, 0.0)
    B = np.minimum(x1, 1.0)
    width = np.maximum(B - a, 0.0)
    first = np.minimum(yhi, a) * width
    z = np.clip(np.maximum(yhi, a), a, np.maximum(B, a))
    second = ((B - a) ** 2 - (B - z) ** 2) / 2
    second = np.where(B > a, second, 0.0)
    return first + second


def triangle_strong_maximal(x: float, y: float, step: float = 1 / 512, extent: float = 3.0) -> float:
    """Strong maximal function of the triangle indicator at ``(x, y)`` with ``0 < y <= 1``.

    For a fixed x-interval the y-profile is nonincreasing on ``[0, 1]``, so
    the best y-interval containing ``y`` is ``[0, y]``; the x-interval is
    found by a lattice search with spacing ``step``.
    """
    if not 0 < y <= 1:
        raise ValueError("the triangle strong-maximal oracle covers 0 < y <= 1")
    x0 = np.arange(x, -extent, -step)[::-1]
    x1 = np.arange(x, x + extent + 1, step)
    X0, X1 = np.meshgrid(x0, x1, indexing="ij")
    mass = _triangle_rect_mass(X0, X1, y)
    length = X1 - X0
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(length > 0, mass / (length * y), 0.0)
    best = float(vals.max())
    # degenerate x-interval: the value of the y-profile limit
    inside = 1.0 if 0 <= x <= 1 and x >= y else 0.0
    if 0 <= x <= 1 and x < y:
        inside = x / y
    return max(best, inside)


def _triangle_square_mass(x0, y0, s):
    lo = np.clip(y0, 0.0, 1.0)
    hi = np.clip(y0 + s, 0.0, 1.0)
    return _triangle_rect_mass(x0, x0 + s, hi) - _triangle_rect_mass(x0, x0 + s, lo)


def triangle_hl_maximal(x: float, y: float, step: float = 1 / 64, rounds: int = 2) -> float:
    """Sup over squares containing ``(x, y)`` of the triangle's area fraction.

    Squares ``[x - u, x - u + s] x [y - v, y - v + s]`` with ``0 <= u, v <= s``
    are scanned on a lattice of spacing ``step`` and the best one is refined
    ``rounds`` times on an 8x finer lattice around it.
    """
    far = max(0.0, -x, x - 1, -y, y - 1)
    S = int(math.ceil((2 * far + 1.5) / step))
    best, arg = 0.0, None
    for m in range(1, S + 1):
        s = m * step
        k = np.arange(m + 1) * step
        U, V = np.meshgrid(k, k, indexing="ij")
        vals = _triangle_square_mass(x - U, y - V, s) / (s * s)
        i = int(np.argmax(vals))
        if vals.flat[i] > best:
            best, arg = float(vals.flat[i]), (s, float(U.flat[i]), float(V.flat[i]))
    d = step
    for _ in range(rounds):
        if arg is None:
            break
        off = np.linspace(-d, d, 17)
        s0, u0, v0 = arg
        Sg, Ug, Vg = np.meshgrid(s0 + off, u0 + off, v0 + off, indexing="ij")
        ok = (Sg > 0) & (Ug >= 0) & (Vg >= 0) & (Ug <= Sg) & (Vg <= Sg)
        Sg, Ug, Vg = Sg[ok], Ug[ok], Vg[ok]
        vals = _triangle_square_mass(x - Ug, y - Vg, Sg) / (Sg * Sg)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), (float(Sg[i]), float(Ug[i]), float(Vg[i]))
        d /= 8
    inside = 1.0 if 0 < y < x < 1 else 0.0
    return max(best, inside)


# }}}


def dual_sequence_product_formula(values: np.ndarray, spacing: Sequence[float],
                                  pvec: Sequence[float], q: float) -> np.ndarray:
    """Norming sequence for finite ``p``, written as a product over axes.

    ``values`` has shape ``(J,) + grid shape``.  With ``F = (sum |f_j|^q)^(1/q)``
    and ``N_k`` the mixed norm of ``F`` over the first ``k`` axes (``N_0 = F``),
    ``g_j = sgn(f_j) |f_j|^(q-1) F^(1-q) prod_k (N_{k-1} / N_k)^(p_k - 1)``.
    """
    v = np.asarray(values, dtype=float)
    if any(math.isinf(p) for p in pvec) or math.isinf(q):
        raise ValueError("product formula oracle needs finite exponents")
    F = np.sum(np.abs(v) ** q, axis=0) ** (1.0 / q)
    norms = [F]
    cur = F
    for p, h in zip(pvec, spacing):
        cur = (np.sum(cur**p, axis=0) * h) ** (1.0 / p)
        norms.append(cur)
    n = F.ndim
    G = np.ones(F.shape)
    for k in range(1, n + 1):
        prev = norms[k - 1]
        nxt = norms[k].reshape((1,) * k + norms[k].shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            G = G * np.where(nxt > 0, (prev / np.where(nxt > 0, nxt, 1.0)) ** (pvec[k - 1] - 1), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.where(F > 0, np.abs(v) ** (q - 1) * np.where(F > 0, F, 1.0) ** (1 - q), 0.0)
    return np.sign(v) * base * G


def oracle_catalog() -> list[dict]:
    """JSON-ready listing of the shipped ground-truth cases."""
    st = stockert_counterexample(2.0, 0.75)
    tri = triangle_example()
    cube = Cube((1.0, 1.0), 1.0)
    out = [
        OracleCase("indicator_cube", IndicatorBox(cube.lo, cube.hi), None,
                   params={"cube": cube.to_dict(), "p": [2.0, 3.0], "morrey_p": 2.0,
                           "values": list(indicator_cube_norms(cube, (2.0, 3.0), 2.0))}).to_json(),
        OracleCase("interval_indicator_maximal", None, None,
                   params={"interval": [0, 1],
                           "values": {"2": interval_indicator_maximal((0, 1), 2.0),
                                      "-3": interval_indicator_maximal((0, 1), -3.0)}}).to_json(),
        OracleCase("stockert", st.sampler, st.rhs,
                   params={"q1": st.q1, "q2": st.q2, "rhs_at_quarter": st.rhs(0.25),
                           "phi_at_quarter": st.phi(0.25), "m2f_3_half": st.m2f(3, 0.5),
                           "doubling_target": st.doubling_target()},
                   note="rhs is the maximal function of the displayed row-norm profile").to_json(),
        OracleCase("triangle", tri.sampler, None,
                   params={"M1(0.25,0.5)": tri.m1(0.25, 0.5), "M2(0.5,0.75)": tri.m2(0.5, 0.75),
                           "M1M2(0.5,2)": tri.m1m2_upper_region(0.5, 2.0)},
                   note="composition formulas other than M1M2 on the upper region are report-only"
                   ).to_json(),
    ]
    for case in power_function_cases(4.0, (2.0, 3.0), 2):
        out.append(case.to_json())
    return out

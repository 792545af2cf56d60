"""Empirical verification: operator-ratio stability, identities and the divergence experiment.

Every theorem check samples a seeded corpus at two spacings ``h`` and
``h/2`` and records ``sup_f num(f)/den(f)`` at each.  A check passes when the
relative change of that sup between the two levels is within its tolerance
(10% for maximal operators, 15% for integral operators), which is the
numerical footprint of a bounded operator.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import (Cube, FunctionDescriptor, GridFunction, GridSpec, IndicatorBox, PowerFunction,
                   StepFunction, Tensor, Triangle, dilate, sample)
from .integral import (KernelDescriptor, adams_exponents, fractional_integral, hilbert_kernel,
                       kernel_condition_check, riesz_kernel, singular_integral)
from .maximal import AxisOrder, MaximalConfig, directional_maximal, hl_maximal, iterated_maximal
from .mixed_norms import (AdmissibilityError, CubeFamily, ExponentVector, MorreyParams,
                          classical_morrey_norm, equivalent_morrey_norm, inv, mixed_lebesgue_norm,
                          mixed_morrey_norm, vector_morrey_norm, vector_norm)
from .oracles import stockert_counterexample
from .reports import VerificationReport
from .weights import Weight1D, ap_constant, indicator_maximal_weight

__all__ = [
    "GeneratorSpec",
    "MAXIMAL_TOL",
    "INTEGRAL_TOL",
    "REDUCTION_TOL",
    "check_iterated_maximal_mixed_lebesgue",
    "check_iterated_maximal_mixed_morrey",
    "check_hl_maximal_mixed_morrey",
    "check_fs_vector",
    "check_morrey_fs_vector",
    "check_dual_stein",
    "check_fractional",
    "check_singular",
    "check_counterexample",
    "check_identities",
    "CHECKS",
    "run_checks",
]

MAXIMAL_TOL = 0.10
INTEGRAL_TOL = 0.15
REDUCTION_TOL = 1e-12

FAMILIES = ("dyadic-step", "tensor-step", "power-bump", "oracle-case")
_DEFAULT_BOX = {1: ((-2.0,), (3.0,)), 2: ((-1.0, -1.0), (2.0, 2.0))}
_DEFAULT_SPACINGS = {1: (1 / 64, 1 / 128), 2: (1 / 16, 1 / 32)}


# {{{ corpora


@dataclass(frozen=True)
class GeneratorSpec:
    """Seeded corpus of analytic functions supported in the unit cube.

    The same ``(family, dim, count, seed)`` always yields the same
    descriptors; sampling them at each spacing gives the refinement levels.
    """

    family: str = "dyadic-step"
    dim: int = 2
    count: int = 10
    seed: int = 0
    box: tuple | None = None
    spacings: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}; choose from {FAMILIES}")
        if self.dim not in (1, 2):
            raise ValueError("generators are provided for dimensions 1 and 2")
        if self.count < 1:
            raise ValueError("corpus count must be positive")
        if self.box is None:
            object.__setattr__(self, "box", _DEFAULT_BOX[self.dim])
        if self.spacings is None:
            object.__setattr__(self, "spacings", _DEFAULT_SPACINGS[self.dim])
        object.__setattr__(self, "spacings", tuple(float(h) for h in self.spacings))

    def grids(self) -> list[GridSpec]:
        lo, hi = self.box
        return [GridSpec.box(lo, hi, h) for h in self.spacings]

    def _rng(self, i: int, salt: int = 0) -> np.random.Generator:
        fam = FAMILIES.index(self.family)
        return np.random.default_rng(np.random.SeedSequence([self.seed, fam, self.dim, salt, i]))

    def descriptors(self, salt: int = 0) -> list[FunctionDescriptor]:
        return [self._make(self._rng(i, salt), i) for i in range(self.count)]

    def tuples(self, J: int) -> list[list[FunctionDescriptor]]:
        return [[self._make(self._rng(i, 1000 + j), i + j) for j in range(J)] for i in range(self.count)]

    def _make(self, rng: np.random.Generator, i: int) -> FunctionDescriptor:
        n = self.dim
        zero, one = (0.0,) * n, (1.0,) * n
        if self.family == "dyadic-step":
            m = int(rng.integers(1, 4))
            return StepFunction(zero, one, rng.uniform(0.0, 1.0, size=(2**m,) * n))
        if self.family == "tensor-step":
            facs = []
            for _ in range(n):
                m = int(rng.integers(1, 4))
                facs.append(StepFunction((0.0,), (1.0,), rng.uniform(0.0, 1.0, size=2**m)))
            return facs[0] if n == 1 else Tensor(tuple(facs))
        if self.family == "power-bump":
            c = tuple(rng.uniform(0.3, 0.7, size=n))
            return PowerFunction(c, -float(rng.uniform(0.05, 0.35)) * n / 2, float(rng.uniform(0.2, 0.3)))
        # fixed oracle shapes, cycled
        cases = [
            IndicatorBox(zero, one),
            IndicatorBox((0.25,) * n, (0.5,) * n),
            IndicatorBox((0.5,) + (0.0,) * (n - 1), (1.0,) + (0.25,) * (n - 1)),
        ]
        if n == 2:
            cases.append(Triangle())
        return cases[i % len(cases)]


def _gens(gen) -> list[GeneratorSpec]:
    gens = [gen] if isinstance(gen, GeneratorSpec) else list(gen)
    if not gens:
        raise ValueError("no generator given")
    if len({(g.dim, g.box, g.spacings) for g in gens}) != 1:
        raise ValueError("combined generators must share dimension, box and spacings")
    return gens


def _corpus(gens: list[GeneratorSpec]) -> list[tuple[str, FunctionDescriptor]]:
    out = []
    for g in gens:
        out.extend((f"{g.family}#{i}", d) for i, d in enumerate(g.descriptors()))
    return out


def _tuple_corpus(gens, J):
    out = []
    for g in gens:
        out.extend((f"{g.family}#{i}", t) for i, t in enumerate(g.tuples(J)))
    return out


def _pmap(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Ordered map; results come back in input order whatever the worker count."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# }}}


# {{{ bookkeeping


def _drift(levels: list[dict]) -> float:
    a, b = levels[0]["sup_ratio"], levels[-1]["sup_ratio"]
    if not (math.isfinite(a) and math.isfinite(b)) or a <= 0:
        return math.inf
    return abs(b - a) / a


def _fmt_exp(p):
    if isinstance(p, ExponentVector):
        return p.to_json()
    return "inf" if isinstance(p, float) and math.isinf(p) else p


def _ratio_report(name: str, gens, evaluate: Callable, tol: float, params: dict,
                  workers: int = 1, notes: Sequence[str] = (), tuples: int | None = None,
                  ) -> VerificationReport:
    """``evaluate(sampled_instance) -> dict(num=..., den=..., **extra)`` at every level."""
    gens = _gens(gens)
    corpus = _corpus(gens) if tuples is None else _tuple_corpus(gens, tuples)
    rows, levels = [], []
    for grid in gens[0].grids():
        h = grid.spacing[0]

        def one(item):
            label, desc = item
            inst = sample(desc, grid) if tuples is None else [sample(d, grid) for d in desc]
            return label, evaluate(inst)

        sup, arg = -math.inf, None
        for label, res in _pmap(one, corpus, workers):
            num, den = res["num"], res["den"]
            ratio = num / den if den > 0 else None
            row = {"h": h, "instance": label, "num": num, "den": den, "ratio": ratio}
            row.update({k: v for k, v in res.items() if k not in ("num", "den")})
            rows.append(row)
            if ratio is not None and ratio > sup:
                sup, arg = ratio, label
        levels.append({"h": h, "sup_ratio": sup, "argmax_instance": arg})
    drift = _drift(levels)
    passed = all(math.isfinite(lv["sup_ratio"]) for lv in levels) and drift <= tol
    return VerificationReport(
        name, params=params, rows=rows, levels=levels, sup_ratio=levels[-1]["sup_ratio"],
        trend=drift, tolerance=tol, passed=passed,
        criterion="sup ratio finite at every level and |sup(h/2) - sup(h)| / sup(h) <= tolerance",
        notes=list(notes))


def _agreement_report(name: str, pairs: list[tuple[str, float, float]], tol: float = REDUCTION_TOL,
                      note: str = "") -> VerificationReport:
    """Degenerate reductions: each pair must agree to relative ``tol``."""
    rows, worst = [], 0.0
    for label, a, b in pairs:
        scale = max(abs(a), abs(b))
        err = 0.0 if scale == 0 else abs(a - b) / scale
        worst = max(worst, err)
        rows.append({"case": label, "value": a, "reference": b, "rel_diff": err})
    return VerificationReport(
        name, rows=rows, sup_ratio=worst, tolerance=tol, passed=worst <= tol,
        criterion="max relative difference <= tolerance", notes=[note] if note else [])


def _scale(tol: float, tolerance_scale: float) -> float:
    return tol * tolerance_scale


# }}}


# {{{ maximal operator checks


def _check_t(t: float, bound: float, what: str):
    if not (0 < t < bound):
        raise AdmissibilityError(f"need 0 < t < {what} = {bound:.6g}, got t={t}")


def check_iterated_maximal_mixed_lebesgue(gen, pvec, t: float = 1.0, *, workers: int = 1,
                                          tolerance_scale: float = 1.0) -> VerificationReport:
    """``||M_t f||_p / ||f||_p`` over the corpus."""
    gens = _gens(gen)
    pvec = ExponentVector.of(pvec, gens[0].dim)
    if not pvec.all_finite():
        raise AdmissibilityError("mixed Lebesgue exponents must be finite here")
    _check_t(t, pvec.min, "min p_j")
    cfg = MaximalConfig(t=t)

    def ev(f):
        return {"num": mixed_lebesgue_norm(iterated_maximal(f, cfg), pvec),
                "den": mixed_lebesgue_norm(f, pvec)}

    rep = _ratio_report("iterated_maximal_mixed_lebesgue", gens, ev, _scale(MAXIMAL_TOL, tolerance_scale),
                        {"p": pvec.to_json(), "t": t}, workers)
    # t-power consistency: M_t f = (M_1 |f|^t)^(1/t) cellwise
    pairs = []
    for label, desc in _corpus(gens):
        f = sample(desc, gens[0].grids()[0])
        a = iterated_maximal(f, cfg).values
        b = iterated_maximal(f.abs() ** t, MaximalConfig()).values ** (1.0 / t)
        pairs.append((label, float(np.max(np.abs(a - b))) + 1.0, 1.0))
    rep.subreports.append(_agreement_report(
        "t_power_consistency", pairs, note="max |M_t f - (M|f|^t)^(1/t)| shifted by 1"))
    return rep


def _morrey_constraints(p: float, qvec: ExponentVector, n: int) -> MorreyParams:
    params = MorreyParams(p, qvec)
    if not (n - 1) / n * p < qvec.max:
        raise AdmissibilityError(
            f"need (n-1)p/n < max q_j; got (n-1)p/n = {(n - 1) / n * p:.6g}, max q = {qvec.max}")
    return params


def _all_equal(qvec: ExponentVector) -> bool:
    return len(set(qvec.entries)) == 1


def check_iterated_maximal_mixed_morrey(gen, p, qvec, t: float = 1.0, *, family: CubeFamily | None = None,
                                        workers: int = 1, tolerance_scale: float = 1.0
                                        ) -> VerificationReport:
    """``||M_t f||_{M^p_q} / ||f||_{M^p_q}``; with all ``q_j`` equal the classical path is compared."""
    gens = _gens(gen)
    n = gens[0].dim
    qvec = ExponentVector.of(qvec, n)
    params = _morrey_constraints(p, qvec, n)
    _check_t(t, min(qvec.min, params.p), "min(q, p)")
    fam = family or CubeFamily.dyadic()
    cfg = MaximalConfig(t=t)

    def ev(f):
        Mf = iterated_maximal(f, cfg)
        out = {"num": mixed_morrey_norm(Mf, params, fam)[0], "den": mixed_morrey_norm(f, params, fam)[0]}
        if _all_equal(qvec):
            out["num_classical"] = classical_morrey_norm(Mf, params.p, qvec[0], fam)
            out["den_classical"] = classical_morrey_norm(f, params.p, qvec[0], fam)
        return out

    rep = _ratio_report("iterated_maximal_mixed_morrey", gens, ev, _scale(MAXIMAL_TOL, tolerance_scale),
                        {"p": params.p, "q": qvec.to_json(), "t": t, "family": fam.to_json()}, workers)
    if _all_equal(qvec):
        pairs = []
        for r in rep.rows:
            pairs.append((f"{r['instance']}@{r['h']}:num", r["num"], r["num_classical"]))
            pairs.append((f"{r['instance']}@{r['h']}:den", r["den"], r["den_classical"]))
        rep.subreports.append(_agreement_report("classical_corollary_path", pairs))
    return rep


def check_hl_maximal_mixed_morrey(gen, p, qvec, *, family: CubeFamily | None = None, workers: int = 1,
                                  tolerance_scale: float = 1.0) -> VerificationReport:
    gens = _gens(gen)
    n = gens[0].dim
    qvec = ExponentVector.of(qvec, n)
    if not (qvec.all_at_least(1.0, strict=True) and qvec.all_finite()):
        raise AdmissibilityError(f"HL maximal check needs 1 < q_j < inf, got {qvec}")
    params = MorreyParams(p, qvec)
    if not params.p > 1:
        raise AdmissibilityError("HL maximal check needs p > 1")
    fam = family or CubeFamily.dyadic()

    def ev(f):
        return {"num": mixed_morrey_norm(hl_maximal(f), params, fam)[0],
                "den": mixed_morrey_norm(f, params, fam)[0]}

    return _ratio_report("hl_maximal_mixed_morrey", gens, ev, _scale(MAXIMAL_TOL, tolerance_scale),
                         {"p": params.p, "q": qvec.to_json(), "family": fam.to_json()}, workers)


def check_fs_vector(gen, pvec, u, t: float = 1.0, *, J: int = 4, workers: int = 1,
                    tolerance_scale: float = 1.0) -> VerificationReport:
    """Vector-valued ratio ``||(sum (M_t f_j)^u)^(1/u)||_p / ||(sum |f_j|^u)^(1/u)||_p``."""
    gens = _gens(gen)
    n = gens[0].dim
    pvec = ExponentVector.of(pvec, n)
    u = float(u)
    if not pvec.all_finite():
        raise AdmissibilityError("mixed Lebesgue exponents must be finite here")
    _check_t(t, min(pvec.min, u), "min(p, u)")
    cfg = MaximalConfig(t=t)

    def ev(fs):
        return {"num": vector_norm([iterated_maximal(f, cfg) for f in fs], pvec, u),
                "den": vector_norm(fs, pvec, u)}

    rep = _ratio_report("fs_vector", gens, ev, _scale(MAXIMAL_TOL, tolerance_scale),
                        {"p": pvec.to_json(), "u": _fmt_exp(u), "t": t, "J": J}, workers, tuples=J)
    grid = gens[0].grids()[0]
    pairs = []
    for label, desc in _corpus(gens):
        f = sample(desc, grid)
        Mf = iterated_maximal(f, cfg)
        scalar = mixed_lebesgue_norm(Mf, pvec) / max(mixed_lebesgue_norm(f, pvec), 1e-300)
        single = vector_norm([Mf], pvec, u) / max(vector_norm([f], pvec, u), 1e-300)
        pairs.append((f"{label}:J=1", single, scalar))
        rep_inf = vector_norm([Mf] * 3, pvec, math.inf) / max(vector_norm([f] * 3, pvec, math.inf), 1e-300)
        pairs.append((f"{label}:u=inf,identical", rep_inf, scalar))
    rep.subreports.append(_agreement_report("fs_vector_reductions", pairs))
    return rep


def check_morrey_fs_vector(gen, p, qvec, u, t: float | None = None, *, J: int = 4,
                           family: CubeFamily | None = None, workers: int = 1,
                           tolerance_scale: float = 1.0) -> VerificationReport:
    """Vector-valued ratios in mixed Morrey norms, for ``M`` and for ``M_t``.

    ``t`` defaults to half of ``min(q, p, u)``.  The gate enforced is
    ``t < min(q, p, u)``; the report records whether ``t < min(q, p)`` and
    ``t < min(q, u)`` hold separately.
    """
    gens = _gens(gen)
    n = gens[0].dim
    qvec = ExponentVector.of(qvec, n)
    params = _morrey_constraints(p, qvec, n)
    u = float(u)
    gate = min(qvec.min, params.p, u)
    t = gate / 2 if t is None else float(t)
    _check_t(t, gate, "min(q, p, u)")
    fam = family or CubeFamily.dyadic()
    cfg = MaximalConfig(t=t)
    gates = {"enforced": "t < min(q, p, u)", "t_lt_min_q_p": t < min(qvec.min, params.p),
             "t_lt_min_q_u": t < min(qvec.min, u)}
    tol = _scale(MAXIMAL_TOL, tolerance_scale)

    def den(fs):
        return vector_morrey_norm(fs, params, u, fam)

    def ev_t(fs):
        return {"num": vector_morrey_norm([iterated_maximal(f, cfg) for f in fs], params, u, fam),
                "den": den(fs)}

    subs = [_ratio_report("morrey_fs_vector[M_t]", gens, ev_t, tol,
                          {"t": t, "gates": gates}, workers, tuples=J)]
    hl_ok = qvec.all_at_least(1.0, strict=True) and qvec.all_finite() and u > 1 and params.p > 1
    if hl_ok:
        def ev_m(fs):
            return {"num": vector_morrey_norm([hl_maximal(f) for f in fs], params, u, fam), "den": den(fs)}

        subs.append(_ratio_report("morrey_fs_vector[M]", gens, ev_m, tol, {}, workers, tuples=J))
    grid = gens[0].grids()[0]
    pairs = []
    for label, desc in _corpus(gens)[:4]:
        f = sample(desc, grid)
        Mf = iterated_maximal(f, cfg)
        scalar = mixed_morrey_norm(Mf, params, fam)[0] / mixed_morrey_norm(f, params, fam)[0]
        single = vector_morrey_norm([Mf], params, u, fam) / vector_morrey_norm([f], params, u, fam)
        pairs.append((f"{label}:J=1", single, scalar))
        if _all_equal(qvec):
            cl = classical_morrey_norm(Mf, params.p, qvec[0], fam) / classical_morrey_norm(f, params.p, qvec[0], fam)
            pairs.append((f"{label}:classical", single, cl))
    subs.append(_agreement_report("morrey_fs_vector_reductions", pairs))
    sup = max(s.sup_ratio for s in subs[:-1])
    drift = max(s.trend for s in subs[:-1])
    return VerificationReport(
        "morrey_fs_vector", params={"p": params.p, "q": qvec.to_json(), "u": _fmt_exp(u), "t": t, "J": J,
                                    "gates": gates, "family": fam.to_json()},
        sup_ratio=sup, trend=drift, tolerance=tol, passed=all(s.passed for s in subs),
        criterion="every subreport passes", subreports=subs,
        notes=[f"t-gate enforced: t < min(q, p, u) = {gate:.6g}"])


# }}}


# {{{ weights: dual inequality


def _weight_ap_membership(w: Weight1D, p: float) -> bool | None:
    if w.kind == "constant":
        return True
    if w.kind == "indicator_maximal":
        return w.beta < 1
    if w.kind == "power":
        return -1 < w.beta < p - 1
    return None


def _axis_grid(grid: GridSpec, j: int) -> GridSpec:
    return GridSpec((grid.origin[j],), (grid.spacing[j],), (grid.counts[j],))


def _tensor_values(grid: GridSpec, factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(grid.counts)
    for j, a in enumerate(factors):
        out = out * np.asarray(a).reshape([-1 if i == j else 1 for i in range(grid.dim)])
    return out


def check_dual_stein(gen, pvec, t: float = 1.0, weights: Sequence[Weight1D] | None = None, *,
                     permutation_seed: int = 0, workers: int = 1, tolerance_scale: float = 1.0,
                     ap_limit: float = 1e6) -> VerificationReport:
    """``||M_t f . (x) w_j^(1/p_j)||_p / ||f . (x) (M_j w_j)^(1/p_j)||_p`` plus the scalar forms.

    ``weights`` defaults to ``(M chi_[0,1])^(1/2)`` on every axis.
    """
    gens = _gens(gen)
    n = gens[0].dim
    pvec = ExponentVector.of(pvec, n)
    if not (pvec.all_finite() and pvec.all_at_least(1.0)):
        raise AdmissibilityError(f"dual inequality needs 1 <= p_j < inf, got {pvec}")
    _check_t(t, pvec.min, "min p_j")
    weights = list(weights) if weights is not None else [indicator_maximal_weight((0.0, 1.0), 0.5)] * n
    if len(weights) != n:
        raise ValueError("need one weight per axis")
    tol = _scale(MAXIMAL_TOL, tolerance_scale)
    grids = gens[0].grids()
    ap_rows = []
    for j, (w, pj) in enumerate(zip(weights, pvec)):
        wt = w.power(t)
        known = _weight_ap_membership(wt, pj)
        for g in grids:
            val = ap_constant(wt, pj, CubeFamily.exact(), _axis_grid(g, j)) if pj > 1 else math.nan
            ap_rows.append({"axis": j + 1, "h": g.spacing[0], "ap_constant": val, "known_member": known})
            if known is False or (known is None and not val <= ap_limit):
                raise AdmissibilityError(
                    f"weight on axis {j + 1}: w^t is not in A_{pj} ([w^t]_A_p = {val:.6g})")
    cfg = MaximalConfig(t=t)
    cache = {}

    def weight_tables(grid):
        key = grid
        if key not in cache:
            wv = [w(grid.axis_centers(j)) for j, w in enumerate(weights)]
            Mw = [directional_maximal(w.sample(_axis_grid(grid, j)), 1).values for j, w in enumerate(weights)]
            lhs_w = _tensor_values(grid, [a ** inv(pj) for a, pj in zip(wv, pvec)])
            rhs_w = _tensor_values(grid, [a ** inv(pj) for a, pj in zip(Mw, pvec)])
            W = GridFunction(grid, _tensor_values(grid, wv))
            cache[key] = (lhs_w, rhs_w, W)
        return cache[key]

    def ev(f):
        lw, rw, _ = weight_tables(f.grid)
        Mt = iterated_maximal(f, cfg)
        return {"num": mixed_lebesgue_norm(Mt.with_values(Mt.values * lw), pvec),
                "den": mixed_lebesgue_norm(f.with_values(np.abs(f.values) * rw), pvec)}

    params = {"p": pvec.to_json(), "t": t, "weights": [w.to_json() for w in weights]}
    main = _ratio_report("dual_stein[tensor]", gens, ev, tol, params, workers)
    main.rows.extend({"ap_check": True, **r} for r in ap_rows)

    # scalar corollary: int (M_t f)^ps W <= C int |f|^ps M_1...M_n W
    ps = pvec.max
    rev = AxisOrder.reversed_default(n)

    def ev_cor(f):
        _, _, W = weight_tables(f.grid)
        MW = iterated_maximal(W, MaximalConfig(order=rev)).values
        Mt = iterated_maximal(f, cfg).values
        vol = f.grid.cell_volume
        return {"num": float(np.sum(Mt**ps * W.values) * vol) ** (1 / ps),
                "den": float(np.sum(np.abs(f.values) ** ps * MW) * vol) ** (1 / ps)}

    cor = _ratio_report("dual_stein[scalar_corollary]", gens, ev_cor, tol, {"p": ps, "t": t}, workers)

    perm = tuple(int(a) + 1 for a in np.random.default_rng(permutation_seed).permutation(n))
    fwd, back = AxisOrder(perm), AxisOrder(tuple(reversed(perm)))

    def ev_perm(f):
        _, _, W = weight_tables(f.grid)
        Mf = iterated_maximal(f, MaximalConfig(order=fwd)).values
        MW = iterated_maximal(W, MaximalConfig(order=back)).values
        vol = f.grid.cell_volume
        return {"num": float(np.sum(Mf**ps * W.values) * vol) ** (1 / ps),
                "den": float(np.sum(np.abs(f.values) ** ps * MW) * vol) ** (1 / ps)}

    prop = _ratio_report("dual_stein[permuted_order]", gens, ev_perm, tol,
                         {"p": ps, "order_f": perm, "order_w": back.axes}, workers)

    # w == 1 reduction
    g0 = grids[0]
    ones = [Weight1D("constant", value=1.0)] * n
    pairs = []
    for label, desc in _corpus(gens)[:4]:
        f = sample(desc, g0)
        Mt = iterated_maximal(f, cfg)
        Mw = [directional_maximal(w.sample(_axis_grid(g0, j)), 1).values for j, w in enumerate(ones)]
        rw = _tensor_values(g0, [a ** inv(pj) for a, pj in zip(Mw, pvec)])
        weighted = mixed_lebesgue_norm(Mt, pvec) / mixed_lebesgue_norm(f.with_values(np.abs(f.values) * rw), pvec)
        plain = mixed_lebesgue_norm(Mt, pvec) / mixed_lebesgue_norm(f, pvec)
        pairs.append((label, weighted, plain))
    red = _agreement_report("dual_stein[w=1]", pairs)
    subs = [main, cor, prop, red]
    return VerificationReport(
        "dual_stein", params=params | {"ap_constants": ap_rows}, sup_ratio=main.sup_ratio,
        trend=max(s.trend for s in subs[:3]), tolerance=tol, passed=all(s.passed for s in subs),
        criterion="every subreport passes", subreports=subs)


# }}}


# {{{ integral operators


def check_fractional(gen, p, qvec, alpha: float, *, radii: Sequence[float] = (0.125, 0.25, 0.5),
                     family: CubeFamily | None = None, workers: int = 1,
                     tolerance_scale: float = 1.0) -> VerificationReport:
    """``||I_alpha f||_{M^r_s} / ||f||_{M^p_q}`` with Adams exponents, plus the hedge constants.

    The hedge sub-check records, for nonnegative ``f``,
    ``sup I_{alpha,<=R} f / (R^alpha M f)`` and
    ``sup I_{alpha,>R} f / (R^(-n/r) ||f||_{M^p_q})`` over cells and radii.
    """
    gens = _gens(gen)
    n = gens[0].dim
    qvec = ExponentVector.of(qvec, n)
    ad = adams_exponents(p, alpha, qvec, n)
    src = MorreyParams(p, qvec)
    dst = MorreyParams(ad.r, ad.s)
    fam = family or CubeFamily.dyadic()
    tol = _scale(INTEGRAL_TOL, tolerance_scale)

    def ev(f):
        If = fractional_integral(f, alpha)
        src_norm = mixed_morrey_norm(f, src, fam)[0]
        out = {"num": mixed_morrey_norm(If, dst, fam)[0], "den": src_norm}
        Mf = hl_maximal(f).values
        near_c, far_c = 0.0, 0.0
        for R in radii:
            near = fractional_integral(f, alpha, radius=R, part="near").values
            far = If.values - near
            pos = Mf > 0
            if pos.any():
                near_c = max(near_c, float(np.max(near[pos] / (R**alpha * Mf[pos]))))
            if src_norm > 0:
                far_c = max(far_c, float(np.max(far)) / (R ** (-n / ad.r) * src_norm))
        out["hedge_near"] = near_c
        out["hedge_far"] = far_c
        return out

    params = {"p": src.p, "q": qvec.to_json(), "alpha": alpha, "r": ad.r, "s": ad.s.to_json(),
              "radii": list(radii), "family": fam.to_json()}
    main = _ratio_report("fractional[morrey]", gens, ev, tol, params, workers,
                         notes=["far part is I_alpha f - I_{alpha,<=R} f"])
    subs = [main]
    for key in ("hedge_near", "hedge_far"):
        lv = []
        for h in gens[0].spacings:
            vals = [r[key] for r in main.rows if r["h"] == h]
            lv.append({"h": h, "sup_ratio": max(vals)})
        d = _drift(lv)
        subs.append(VerificationReport(
            f"fractional[{key}]", levels=lv, sup_ratio=lv[-1]["sup_ratio"], trend=d, tolerance=tol,
            passed=all(math.isfinite(x["sup_ratio"]) for x in lv) and d <= tol,
            criterion="recorded hedge constant stable under refinement"))
    return VerificationReport(
        "fractional", params=params, sup_ratio=main.sup_ratio, trend=max(s.trend for s in subs),
        tolerance=tol, passed=all(s.passed for s in subs), criterion="every subreport passes",
        subreports=subs)


def check_singular(gen, p, qvec, kernel: KernelDescriptor, *, family: CubeFamily | None = None,
                   workers: int = 1, tolerance_scale: float = 1.0) -> VerificationReport:
    """Truncated ``T_delta`` ratios on ``L^q`` and ``M^p_q``; ``delta`` is the cell diagonal at each level.

    ``T`` is the truncation everywhere on the grid, including the support of ``f``.
    """
    gens = _gens(gen)
    n = gens[0].dim
    if kernel.dim != n:
        raise ValueError(f"kernel dimension {kernel.dim} != corpus dimension {n}")
    qvec = ExponentVector.of(qvec, n)
    if not (qvec.all_at_least(1.0, strict=True) and qvec.all_finite()):
        raise AdmissibilityError(f"singular integral check needs 1 < q_j < inf, got {qvec}")
    params = MorreyParams(p, qvec)
    kc = kernel_condition_check(kernel)
    if not kc.passed:
        raise AdmissibilityError(f"kernel fails the size/smoothness check: {kc.summary_line()}")
    fam = family or CubeFamily.dyadic()
    tol = _scale(INTEGRAL_TOL, tolerance_scale)
    base = kernel.with_delta(None)

    def ev_l(f):
        Tf = singular_integral(f, base)
        return {"num": mixed_lebesgue_norm(Tf, qvec), "den": mixed_lebesgue_norm(f, qvec),
                "num_morrey": mixed_morrey_norm(Tf, params, fam)[0],
                "den_morrey": mixed_morrey_norm(f, params, fam)[0],
                "delta": math.sqrt(sum(h * h for h in f.grid.spacing))}

    info = {"p": params.p, "q": qvec.to_json(), "kernel": kernel.to_json(), "family": fam.to_json(),
            "truncation": "delta = cell diagonal at each level"}
    leb = _ratio_report("singular[lebesgue]", gens, ev_l, tol, info, workers,
                        notes=["T is the delta-truncated operator on the whole grid"])
    lv, rows = [], []
    for h in gens[0].spacings:
        rs = [r for r in leb.rows if r["h"] == h and r["den_morrey"] > 0]
        sup = max(r["num_morrey"] / r["den_morrey"] for r in rs)
        lv.append({"h": h, "sup_ratio": sup})
    d = _drift(lv)
    mor = VerificationReport("singular[morrey]", levels=lv, sup_ratio=lv[-1]["sup_ratio"], trend=d,
                             tolerance=tol, passed=all(math.isfinite(x["sup_ratio"]) for x in lv) and d <= tol,
                             criterion="sup ratio finite and refinement drift <= tolerance")
    subs = [kc, leb, mor]
    return VerificationReport(
        f"singular[{kernel.name or 'user'}]", params=info, sup_ratio=max(leb.sup_ratio, mor.sup_ratio),
        trend=max(leb.trend, mor.trend), tolerance=tol, passed=all(s.passed for s in subs),
        criterion="kernel check and both ratio reports pass", subreports=subs)


# }}}


# {{{ the divergence experiment


def check_counterexample(q1: float = 2.0, q2: float = 0.75, L_list: Sequence[float] = (2, 4, 8, 16, 32),
                         y: float = 0.25, *, cells_per_phi: int = 64, hy: float = 1 / 256,
                         rhs_tol: float = 0.03, ratio_tol: float = 0.15,
                         tolerance_scale: float = 1.0) -> VerificationReport:
    """Compare ``||M_2 f(., y) chi_[0, L]||_q1`` with ``M_2 ||f||_(q1)(y)`` for ``f = chi_E``.

    Truncations ``L`` are in units of ``phi(y)``, the length of the row of
    ``E`` through ``y``; ``M_2 f(., y) = 1`` on ``[0, phi(y)]``, so only
    ``L > phi(y)`` reaches the divergent tail.  The right-hand side is the
    closed form, cross-checked by the discrete line maximal of the cell
    averages of the row-norm profile.
    """
    st = stockert_counterexample(q1, q2)
    L_list = [float(L) for L in L_list]
    if len(L_list) < 2 or any(b <= a for a, b in zip(L_list, L_list[1:])):
        raise ValueError("L_list must be increasing with at least two entries")
    if not 0 < y < 1:
        raise ValueError("y must lie in (0, 1)")
    phi = st.phi(y)
    rhs = st.rhs(y)
    # discrete right-hand side: exact cell averages of the profile, line maximal on the grid
    N = int(round(2.0 / hy))
    edges = np.arange(N + 1) * hy
    beta = 1.0 / (q1 * q2)
    anti = np.minimum(edges, 1.0) ** (1 - beta) / (1 - beta)
    prof = GridFunction(GridSpec((0.0,), (hy,), (N,)), np.diff(anti) / hy)
    iy = int(math.floor(y / hy))
    rhs_disc = float(directional_maximal(prof, 1).values[iy])
    rhs_err = abs(rhs_disc - rhs) / rhs

    # discrete left-hand side on x in [0, L_max phi], y-centers include y exactly
    hx = phi / cells_per_phi
    Nx = int(round(L_list[-1] * cells_per_phi))
    k = int(round(y / hy))
    Ny = int(round(2.0 / hy))
    grid = GridSpec((0.0, -hy / 2), (hx, hy), (Nx, Ny))
    f = sample(st.sampler, grid)
    row = directional_maximal(f, 2).values[:, k]
    rows, lhs = [], []
    for L in L_list:
        m = int(round(L * cells_per_phi))
        val = float(np.sum(row[:m] ** q1) * hx) ** (1.0 / q1)
        lhs.append(val)
        rows.append({"L_over_phi": L, "L": L * phi, "lhs": val,
                     "lhs_closed_form": st.truncated_norm(L * phi, y), "rhs": rhs})
    ratios = [b / a for a, b in zip(lhs, lhs[1:])]
    target = st.doubling_target()
    rt = ratio_tol * tolerance_scale
    for r, rr in zip(rows[1:], ratios):
        r["doubling_ratio"] = rr
    increasing = all(b > a for a, b in zip(lhs, lhs[1:]))
    ratios_ok = all(abs(r - target) / target <= rt for r in ratios)
    exceeds = lhs[-1] > rhs
    rhs_ok = rhs_err <= rhs_tol * tolerance_scale
    return VerificationReport(
        "counterexample",
        params={"q1": q1, "q2": q2, "y": y, "phi_y": phi, "L_units": "multiples of phi(y)",
                "hx": hx, "hy": hy, "doubling_target": target},
        rows=rows,
        levels=[{"rhs_closed_form": rhs, "rhs_discrete": rhs_disc, "rhs_rel_err": rhs_err}],
        sup_ratio=lhs[-1] / rhs, trend=max(abs(r - target) / target for r in ratios), tolerance=rt,
        passed=bool(increasing and ratios_ok and exceeds and rhs_ok),
        criterion=("LHS increasing, every doubling ratio within tolerance of 2^((1-q2)/q1), "
                   "LHS(L_max) > RHS, discrete RHS within rhs_tol of the closed form"),
        notes=[f"increasing={increasing}", f"ratios_ok={ratios_ok}", f"lhs_exceeds_rhs={exceeds}",
               f"rhs_ok={rhs_ok}"])


# }}}


# {{{ identities


def _viol(lhs: float, rhs: float, slack: float = 1e-12) -> bool:
    return lhs > rhs * (1 + slack) + 1e-300


def check_identities(gen, *, exponent_sets: dict | None = None, family: CubeFamily | None = None,
                     workers: int = 1) -> VerificationReport:
    """Dilation, embedding, Holder, monotone chains and the equivalent Morrey norm."""
    gens = _gens(gen)
    n = gens[0].dim
    fam = family or CubeFamily.dyadic()
    grid = gens[0].grids()[0]
    corpus = [(label, sample(d, grid)) for label, d in _corpus(gens)]
    ex = {
        "lebesgue": [(2.0, 3.0), (1.5, math.inf), (4.0, 1.0)],
        "morrey": [(6.0, (2.0, 3.0)), (4.0, (3.0, 4.0)), (3.0, (1.5, 2.0))],
        "embedding": [((2.0, 3.0), (3.0, 4.0), 4.0), ((1.0, 2.0), (2.0, 2.0), 3.0),
                      ((1.5, 1.5), (2.0, 3.0), 5.0)],
        "holder": [((2.0, 3.0), (2.0, 1.5)), ((4.0, 4.0), (4.0 / 3, 4.0 / 3)), ((3.0, 2.0), (6.0, 2.0))],
    }
    ex.update(exponent_sets or {})
    ex = {k: [tuple(v) for v in vs] for k, vs in ex.items()}

    def clip_n(v):
        return tuple(v)[:n]

    subs = []
    # dilation, t = 2 exact on the scaled grid
    t = 2.0
    rows, worst = [], 0.0
    for label, f in corpus:
        g = dilate(f, t)
        for pv in ex["lebesgue"]:
            pv = ExponentVector.of(clip_n(pv), n)
            a = mixed_lebesgue_norm(g, pv)
            b = t ** (-pv.inverse_sum) * mixed_lebesgue_norm(f, pv)
            err = abs(a - b) / max(abs(b), 1e-300)
            worst = max(worst, err)
            rows.append({"instance": label, "kind": "lebesgue", "exponents": pv.to_json(), "rel_err": err})
        for p, qv in ex["morrey"]:
            prm = MorreyParams(p, ExponentVector.of(clip_n(qv), n))
            a = mixed_morrey_norm(g, prm, fam)[0]
            b = t ** (-n / p) * mixed_morrey_norm(f, prm, fam)[0]
            err = abs(a - b) / max(abs(b), 1e-300)
            worst = max(worst, err)
            rows.append({"instance": label, "kind": "morrey", "p": p, "rel_err": err})
    subs.append(VerificationReport("identities[dilation]", params={"t": t}, rows=rows, sup_ratio=worst,
                                   tolerance=1e-10, passed=worst <= 1e-10,
                                   criterion="max relative error <= 1e-10"))

    # embedding M^p_r into M^p_q for q <= r
    rows, nviol = [], 0
    for label, f in corpus:
        for qv, rv, p in ex["embedding"]:
            q, r = ExponentVector.of(clip_n(qv), n), ExponentVector.of(clip_n(rv), n)
            small = mixed_morrey_norm(f, MorreyParams(p, q), fam)[0]
            big = mixed_morrey_norm(f, MorreyParams(p, r), fam)[0]
            bad = _viol(small, big)
            nviol += bad
            rows.append({"instance": label, "q": q.to_json(), "r": r.to_json(), "p": p,
                         "lhs": small, "rhs": big, "slack": big - small, "violated": bad})
    subs.append(VerificationReport("identities[embedding]", rows=rows, sup_ratio=float(nviol), tolerance=0,
                                   passed=nviol == 0, criterion="zero violations (relative slack 1e-12)"))

    # Holder: ||fg||_r <= ||f||_p ||g||_q with 1/r = 1/p + 1/q
    rows, nviol = [], 0
    pairs = list(zip(corpus, corpus[1:] + corpus[:1]))
    for (lf, f), (lg, g) in pairs:
        for pv, qv in ex["holder"]:
            P, Q = ExponentVector.of(clip_n(pv), n), ExponentVector.of(clip_n(qv), n)
            R = ExponentVector(tuple(1.0 / (inv(a) + inv(b)) for a, b in zip(P, Q)))
            lhs = mixed_lebesgue_norm(f * g, R)
            rhs = mixed_lebesgue_norm(f, P) * mixed_lebesgue_norm(g, Q)
            bad = _viol(lhs, rhs)
            nviol += bad
            rows.append({"instance": f"{lf}*{lg}", "p": P.to_json(), "q": Q.to_json(),
                         "lhs": lhs, "rhs": rhs, "slack": rhs - lhs, "violated": bad})
    subs.append(VerificationReport("identities[holder]", rows=rows, sup_ratio=float(nviol), tolerance=0,
                                   passed=nviol == 0, criterion="zero violations (relative slack 1e-12)"))

    # monotone chains: f_k = min(|f|, k/K * max|f|) increase to |f|
    rows, nviol = [], 0
    pv = ExponentVector.of(clip_n(ex["lebesgue"][0]), n)
    for label, f in corpus[:10]:
        top = float(np.max(np.abs(f.values)))
        if top == 0:
            continue
        vals = [mixed_lebesgue_norm(f.with_values(np.minimum(np.abs(f.values), top * k / 8)), pv)
                for k in range(1, 9)]
        full = mixed_lebesgue_norm(f, pv)
        bad = any(b < a * (1 - 1e-12) for a, b in zip(vals, vals[1:])) or abs(vals[-1] - full) > 1e-12 * full
        nviol += bad
        rows.append({"instance": label, "chain": vals, "limit": full, "violated": bad})
    subs.append(VerificationReport("identities[monotone_chain]", rows=rows, sup_ratio=float(nviol),
                                   tolerance=0, passed=nviol == 0,
                                   criterion="chain nondecreasing and ending at the norm of |f|"))

    # equivalent norm: never below the Morrey norm, ratio recorded
    p, qv = 4.0, clip_n((2.0, 3.0)) if n == 2 else (3.0,)
    prm = MorreyParams(p, ExponentVector.of(qv, n))
    gap = prm.qvec.inverse_sum - n * inv(p)
    eta = (gap + 1) / 2
    rows, nviol, worst = [], 0, 0.0
    for label, f in corpus[:12]:
        base = mixed_morrey_norm(f, prm, fam)[0]
        eq = equivalent_morrey_norm(f, prm, eta, fam)
        bad = _viol(base, eq)
        nviol += bad
        ratio = eq / base if base > 0 else None
        worst = max(worst, ratio or 0.0)
        rows.append({"instance": label, "morrey": base, "equivalent": eq, "ratio": ratio, "violated": bad})
    subs.append(VerificationReport("identities[equivalent_norm]", params={"eta": eta, "p": p, "q": list(qv)},
                                   rows=rows, sup_ratio=worst, tolerance=0, passed=nviol == 0,
                                   criterion="equivalent norm >= Morrey norm; ratio recorded"))
    return VerificationReport(
        "identities", params={"family": fam.to_json(), "h": grid.spacing[0]},
        sup_ratio=max(s.sup_ratio for s in subs), passed=all(s.passed for s in subs),
        criterion="every subreport passes", subreports=subs)


# }}}


# {{{ suite


def _mixed_gens(dim: int, count: int, seed: int) -> list[GeneratorSpec]:
    fams = ("dyadic-step", "tensor-step", "power-bump", "oracle-case")
    per = max(1, count // len(fams))
    return [GeneratorSpec(f, dim, per, seed) for f in fams]


def _suite(seed: int, count: int):
    g2 = _mixed_gens(2, count, seed)
    g1 = _mixed_gens(1, count, seed)
    steps2 = [GeneratorSpec("dyadic-step", 2, max(2, count // 2), seed),
              GeneratorSpec("oracle-case", 2, 4, seed)]
    return {
        "iterated_maximal_mixed_lebesgue": lambda **kw: check_iterated_maximal_mixed_lebesgue(
            g2, (2.0, 3.0), 1.0, **kw),
        "iterated_maximal_mixed_morrey": lambda **kw: check_iterated_maximal_mixed_morrey(
            g2, 4.0, (2.0, 3.0), 1.0, **kw),
        "iterated_maximal_mixed_morrey_classical": lambda **kw: check_iterated_maximal_mixed_morrey(
            g2, 4.0, (3.0, 3.0), 0.5, **kw),
        "hl_maximal_mixed_morrey": lambda **kw: check_hl_maximal_mixed_morrey(g2, 4.0, (2.0, 3.0), **kw),
        "fs_vector": lambda **kw: check_fs_vector(steps2, (2.0, 3.0), 2.0, 1.0, **kw),
        "morrey_fs_vector": lambda **kw: check_morrey_fs_vector(steps2, 4.0, (2.0, 3.0), 2.0, **kw),
        "dual_stein": lambda **kw: check_dual_stein(g2, (2.0, 3.0), 1.0, **kw),
        "fractional": lambda **kw: check_fractional(steps2, 4 / 3, (4 / 3, 4 / 3), 1.0, **kw),
        "singular_hilbert": lambda **kw: check_singular(g1, 4.0, (2.0,), hilbert_kernel(), **kw),
        "singular_riesz": lambda **kw: check_singular(steps2, 4.0, (2.0, 3.0), riesz_kernel(1, 2), **kw),
        "counterexample": lambda **kw: check_counterexample(
            tolerance_scale=kw.get("tolerance_scale", 1.0)),
        "identities": lambda **kw: check_identities(g2, workers=kw.get("workers", 1)),
    }


CHECKS = tuple(_suite(0, 8))


def run_checks(names: Sequence[str] | None = None, *, seed: int = 0, count: int = 16, workers: int = 1,
               tolerance_scale: float = 1.0) -> list[VerificationReport]:
    """Run named default checks in the given order (all of them when ``names`` is None)."""
    suite = _suite(seed, count)
    names = list(CHECKS if names is None else names)
    if not names:
        raise ValueError("empty check list")
    unknown = [n for n in names if n not in suite]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; available: {list(suite)}")
    return [suite[n](workers=workers, tolerance_scale=tolerance_scale) for n in names]


# }}}

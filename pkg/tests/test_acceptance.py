"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``pytest -s``)
and then asserts the same verdict, including the runtime budget.  Running the
file as a script prints the eight lines without pytest.
"""

import math
import time

import numpy as np
import pytest

from mixedmorrey import oracles
from mixedmorrey.grid import Cube, GridFunction, GridSpec, IndicatorBox, dilate, sample
from mixedmorrey.harness import (GeneratorSpec, check_counterexample, check_identities, run_checks)
from mixedmorrey.maximal import directional_maximal, hl_maximal, strong_maximal
from mixedmorrey.mixed_norms import (CubeFamily, MorreyParams, conjugate, dual_sequence,
                                     mixed_lebesgue_norm, mixed_morrey_norm, pairing, vector_norm)
from mixedmorrey.weights import a1_constant, ap_constant, constant_weight, indicator_maximal_weight

INF = math.inf


def _verdict(number, ok, elapsed, budget, detail):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    print(f"{status} criterion {number}: {detail} [{elapsed:.2f}s / budget {budget:g}s]")
    return ok and within


def _conj(u):
    return INF if u == 1 else (1.0 if math.isinf(u) else u / (u - 1))


# {{{ 1. indicator norms

COMBOS = [
    # (lo, side, h, pvec, p)
    ((0.0, 0.0), 1.0, 1 / 8, (2.0, 3.0), 2.4),
    ((0.0, 0.0), 2.0, 1 / 8, (2.0, 3.0), 3.0),
    ((0.5, 0.25), 0.5, 1 / 8, (2.0, 3.0), 4.0),
    ((0.0, 0.0), 1.0, 1 / 16, (1.0, INF), 2.0),
    ((0.25, 0.5), 0.75, 1 / 16, (INF, 1.5), 6.0),
    ((0.0, 0.0), 1.5, 1 / 8, (4.0, 4.0), 4.0),
    ((1.0, 0.0), 0.25, 1 / 16, (1.5, 2.5), 3.0),
    ((0.0, 0.5), 2.0, 1 / 4, (INF, 2.0), 8.0),
    ((0.0,), 1.0, 1 / 32, (3.0,), 3.0),
    ((0.25,), 2.5, 1 / 16, (2.0,), 5.0),
    ((0.0, 0.0), 3.0, 1 / 4, (1.0, 1.0), 1.0),
    ((0.5, 0.5), 1.0, 1 / 8, (2.0, 2.0), 7.0),
]


def test_criterion_1_indicator_norms():
    t0 = time.perf_counter()
    worst = 0.0
    for lo, side, h, pvec, p in COMBOS:
        n = len(lo)
        Q = Cube(tuple(a + side / 2 for a in lo), side / 2)
        grid = GridSpec.box(tuple(a - 1 for a in lo), tuple(a + side + 1 for a in lo), h)
        chi = sample(IndicatorBox(Q.lo, Q.hi), grid)
        leb, mor = oracles.indicator_cube_norms(Q, pvec, p)
        a = mixed_lebesgue_norm(chi, pvec)
        b = mixed_morrey_norm(chi, MorreyParams(p, pvec), CubeFamily.exact())[0]
        worst = max(worst, abs(a - leb) / leb, abs(b - mor) / mor)
        assert n in (1, 2)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and len(COMBOS) >= 10
    assert _verdict(1, ok, elapsed, 1.0, f"{len(COMBOS)} combinations, max rel err {worst:.2e}")

# }}}


# {{{ 2. dilation

def _dilation_corpus():
    rng = np.random.default_rng(2)
    g = GridSpec.box((-1, -1), (2, 2), 1 / 8)
    out = [sample(IndicatorBox((0, 0), (2, 2)), GridSpec.box((-1, -1), (3, 3), 1 / 8))]
    for _ in range(9):
        out.append(GridFunction(g, rng.uniform(size=g.shape) * (rng.uniform(size=g.shape) < 0.7)))
    return out


def test_criterion_2_dilation():
    t0 = time.perf_counter()
    t = 2.0
    worst, count = 0.0, 0
    configs = [((2.0, 3.0), 6.0), ((1.5, INF), 4.0), ((4.0, 1.0), 3.0)]
    for f in _dilation_corpus():
        g = dilate(f, t)
        for pvec, p in configs:
            a = mixed_lebesgue_norm(g, pvec)
            b = t ** (-sum(0 if math.isinf(q) else 1 / q for q in pvec)) * mixed_lebesgue_norm(f, pvec)
            worst = max(worst, abs(a - b) / b)
            for fam in (CubeFamily.exact(), CubeFamily.dyadic()):
                prm = MorreyParams(p, pvec)
                a = mixed_morrey_norm(g, prm, fam)[0]
                b = t ** (-2 / p) * mixed_morrey_norm(f, prm, fam)[0]
                worst = max(worst, abs(a - b) / b)
        count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and count >= 10
    assert _verdict(2, ok, elapsed, 1.0, f"{count} functions, max rel err {worst:.2e}")

# }}}


# {{{ 3. embedding and Holder

CORPUS_50 = [GeneratorSpec("dyadic-step", 2, 13, 3), GeneratorSpec("tensor-step", 2, 13, 3),
             GeneratorSpec("power-bump", 2, 12, 3), GeneratorSpec("oracle-case", 2, 12, 3)]


def test_criterion_3_embedding_holder():
    t0 = time.perf_counter()
    rep = check_identities(CORPUS_50)
    elapsed = time.perf_counter() - t0
    subs = {s.check: s for s in rep.subreports}
    emb, hol = subs["identities[embedding]"], subs["identities[holder]"]
    n_emb = len({r["instance"] for r in emb.rows})
    configs_emb = len({(tuple(r["q"]), tuple(r["r"]), r["p"]) for r in emb.rows})
    configs_hol = len({(tuple(r["p"]), tuple(r["q"])) for r in hol.rows})
    viol = sum(r["violated"] for r in emb.rows) + sum(r["violated"] for r in hol.rows)
    min_slack = min(min(r["slack"] / max(r["rhs"], 1e-300) for r in emb.rows),
                    min(r["slack"] / max(r["rhs"], 1e-300) for r in hol.rows))
    ok = viol == 0 and n_emb >= 50 and configs_emb >= 3 and configs_hol >= 3
    assert _verdict(3, ok, elapsed, 10.0,
                    f"{n_emb} functions, {configs_emb}+{configs_hol} configs, {viol} violations, "
                    f"min relative slack {min_slack:.2e}")

# }}}


# {{{ 4. dual sequences

def test_criterion_4_dual_sequence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    cases = [((2.0, 3.0), 2.0, 1, 16), ((1.5, 4.0), 3.0, 2, 12), ((3.0, INF), 1.5, 3, 16),
             ((INF, 2.0), INF, 4, 8), ((1.25, 2.0), 2.0, 2, 10), ((4.0, 1.25), 1.2, 3, 16)]
    worst = 0.0
    for pvec, u, J, N in cases:
        g = GridSpec.box((0, 0), (1, 1), 1 / N)
        fs = [GridFunction(g, rng.normal(size=g.shape)) for _ in range(J)]
        ds = dual_sequence(fs, pvec, u)
        norm = vector_norm(fs, pvec, u)
        worst = max(worst, abs(pairing(fs, ds) - norm) / norm,
                    abs(vector_norm(ds, conjugate(pvec), _conj(u)) - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and len(cases) >= 5
    assert _verdict(4, ok, elapsed, 5.0, f"{len(cases)} instances, max deviation {worst:.2e}")

# }}}


# {{{ 5. oracle convergence

H5 = 1 / 64


def _probe_cells(grid, n, region, seed):
    rng = np.random.default_rng(seed)
    lo, hi = region
    pts = rng.uniform(lo, hi, size=(n, grid.dim))
    out = []
    for p in pts:
        idx = tuple(int(math.floor((x - a) / h)) for x, a, h in zip(p, grid.origin, grid.spacing))
        out.append((idx, tuple(float(grid.axis_centers(j)[i]) for j, i in enumerate(idx))))
    return out


def _errors(M, oracle, probes):
    return [abs(M.values[idx] - oracle(*c)) for idx, c in probes]


def test_criterion_5_oracle_convergence():
    t0 = time.perf_counter()
    big = GridSpec.box((-1, -1), (3, 3), H5)
    small = GridSpec.box((-0.5, -0.5), (1.5, 1.5), H5)
    box_lo, box_hi = (0.0, 0.0), (1.0, 1.0)
    chi_big = sample(IndicatorBox(box_lo, box_hi), big)
    chi_small = sample(IndicatorBox(box_lo, box_hi), small)
    tri = oracles.triangle_example()
    tri_big, tri_small = sample(tri.sampler, big), sample(tri.sampler, small)
    everywhere = ((-0.9, -0.9), (2.9, 2.9))
    strip = ((-0.45, 0.02), (1.45, 1.0))
    runs = {
        "M1 box": (directional_maximal(chi_big, 1),
                   lambda x, y: oracles.interval_indicator_maximal((0, 1), x) * (0 <= y <= 1),
                   _probe_cells(big, 25, everywhere, 1)),
        "M2 box": (directional_maximal(chi_big, 2),
                   lambda x, y: oracles.interval_indicator_maximal((0, 1), y) * (0 <= x <= 1),
                   _probe_cells(big, 25, everywhere, 2)),
        "M1 triangle": (directional_maximal(tri_big, 1), tri.m1, _probe_cells(big, 25, everywhere, 3)),
        "M2 triangle": (directional_maximal(tri_big, 2), tri.m2, _probe_cells(big, 25, everywhere, 4)),
        "M box": (hl_maximal(chi_big), lambda x, y: oracles.box_hl_maximal((x, y), box_lo, box_hi),
                  _probe_cells(big, 25, everywhere, 5)),
        "M triangle": (hl_maximal(tri_big), oracles.triangle_hl_maximal, _probe_cells(big, 20, everywhere, 6)),
        "MR box": (strong_maximal(chi_small),
                   lambda x, y: oracles.box_strong_maximal((x, y), box_lo, box_hi),
                   _probe_cells(small, 25, ((-0.45, -0.45), (1.45, 1.45)), 7)),
        "MR triangle": (strong_maximal(tri_small), oracles.triangle_strong_maximal,
                        _probe_cells(small, 20, strip, 8)),
    }
    worst, detail = 0.0, []
    for name, (M, oracle, probes) in runs.items():
        e = max(_errors(M, oracle, probes))
        worst = max(worst, e)
        detail.append(f"{name} {e / H5:.2f}h/{len(probes)}")
    elapsed = time.perf_counter() - t0
    ok = worst <= 4 * H5 and all(len(p) >= 20 for _, _, p in runs.values())
    assert _verdict(5, ok, elapsed, 30.0, "max error " + ", ".join(detail))

# }}}


# {{{ 6. counterexample

def test_criterion_6_counterexample():
    t0 = time.perf_counter()
    rep = check_counterexample(2.0, 0.75, (2, 4, 8, 16, 32), 0.25)
    elapsed = time.perf_counter() - t0
    lv = rep.levels[0]
    lhs = [r["lhs"] for r in rep.rows]
    ratios = [r["doubling_ratio"] for r in rep.rows[1:]]
    target = 2 ** 0.125
    ok = (abs(lv["rhs_closed_form"] - 3 * 4 ** (2 / 3)) <= 1e-12
          and lv["rhs_rel_err"] <= 0.03
          and all(b > a for a, b in zip(lhs, lhs[1:]))
          and all(abs(r - target) / target <= 0.15 for r in ratios)
          and lhs[-1] > lv["rhs_closed_form"]
          and rep.all_passed())
    assert _verdict(6, ok, elapsed, 60.0,
                    f"RHS {lv['rhs_closed_form']:.4f} vs discrete {lv['rhs_discrete']:.4f} "
                    f"({100 * lv['rhs_rel_err']:.2f}%), doubling ratios "
                    f"{', '.join(f'{r:.4f}' for r in ratios)} (target {target:.4f}), "
                    f"LHS(32) {lhs[-1]:.2f}")

# }}}


# {{{ 7. boundedness stability

BOUNDEDNESS = ["iterated_maximal_mixed_lebesgue", "iterated_maximal_mixed_morrey",
               "iterated_maximal_mixed_morrey_classical", "hl_maximal_mixed_morrey", "fs_vector",
               "morrey_fs_vector", "dual_stein", "fractional", "singular_hilbert", "singular_riesz"]


def _walk(rep):
    yield rep
    for s in rep.subreports:
        yield from _walk(s)


def test_criterion_7_boundedness_stability():
    t0 = time.perf_counter()
    reports = run_checks(BOUNDEDNESS)
    elapsed = time.perf_counter() - t0
    failed, drifts, reductions = [], [], []
    for rep in reports:
        for r in _walk(rep):
            if r.levels and "sup_ratio" in r.levels[0]:
                drifts.append((r.check, r.trend, r.tolerance))
                if not (r.trend <= r.tolerance):
                    failed.append(r.check)
            if r.tolerance == 1e-12:
                reductions.append((r.check, r.sup_ratio))
                if r.sup_ratio > 1e-12:
                    failed.append(r.check)
        if not rep.all_passed():
            failed.append(rep.check)
    worst = max(drifts, key=lambda d: d[1] / d[2])
    ok = not failed and len(reductions) >= 4
    assert _verdict(7, ok, elapsed, 600.0,
                    f"{len(drifts)} ratio reports, worst drift {worst[1]:.3f} of {worst[2]:.2f} ({worst[0]}); "
                    f"{len(reductions)} reductions, max diff {max(r[1] for r in reductions):.1e}"
                    + (f"; failing: {sorted(set(failed))}" if failed else ""))

# }}}


# {{{ 8. weights

def _centered(L):
    return GridSpec.box((-L,), (L + 1,), 1 / 8)


def test_criterion_8_weights():
    t0 = time.perf_counter()
    fam = CubeFamily.exact()
    ones = [ap_constant(constant_weight(), p, f, _centered(16)) for p in (1.5, 2.0, 4.0)
            for f in (CubeFamily.exact(), CubeFamily.dyadic())]
    extents = (64, 128, 256)
    half = [a1_constant(indicator_maximal_weight((0, 1), 0.5), fam, _centered(L)) for L in extents]
    full = [a1_constant(indicator_maximal_weight((0, 1), 1.0), fam, _centered(L)) for L in extents]
    elapsed = time.perf_counter() - t0
    stable = all(abs(b / a - 1) <= 0.05 for a, b in zip(half, half[1:]))
    grows = all(b > a for a, b in zip(full, full[1:]))
    ok = all(v == 1.0 for v in ones) and stable and grows
    assert _verdict(8, ok, elapsed, 10.0,
                    f"[1]_Ap = {set(ones)}, beta=1/2 A1 {', '.join(f'{v:.4f}' for v in half)}, "
                    f"beta=1 A1 {', '.join(f'{v:.4f}' for v in full)}")

# }}}


if __name__ == "__main__":
    import sys

    status = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        try:
            fn()
        except AssertionError:
            status = 1
    sys.exit(status)

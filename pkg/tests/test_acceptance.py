"""Acceptance checks, one per criterion, at the required tolerances.

Each ``criterion_N`` returns ``(ok, detail)``. Under pytest every check is a
test and the terminal summary prints one PASS/FAIL line per criterion; run the
file directly to print the same lines without pytest.
"""

import functools
import math
import sys
import time

import numpy as np
import pytest

from kpsplit.costmodel import (
    CostModelInput, exp2_cost, exp2_items, strang_cost, strang_items, summary_by_tolerance,
    cost_accuracy_curve,
)
from kpsplit.dg import DGGrid, mass
from kpsplit.exact import burgers_sine_characteristics, burgers_sine_exact
from kpsplit.sldg import CharSolverConfig, sldg_step
from kpsplit.spectral import GridField2D, KPParams, PropagatorTables, apply_propagator
from kpsplit.studies import (
    CostStudy, KPSetup, final_amplitude_errors, run_burgers_convergence, run_cost_study,
    run_iteration_study, run_kp_time_convergence, run_soliton_study,
)

L = 10 * math.pi


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    t, wall = timed(lambda: run_burgers_convergence("sine", (2, 4, 8), (32, 64, 128), 0.1, 1e-3,
                                                    CharSolverConfig("secant", 10)))
    bad = []
    eocs = {}
    for o, n, e, eoc in zip(t.column("order"), t.column("cells"), t.column("error"), t.column("eoc")):
        if not math.isnan(eoc):
            eocs.setdefault(o, []).append(eoc)
            if not eoc >= o - 0.5:
                bad.append(f"o={o} {n // 2}->{n} eoc={eoc:.2f}")
        if o == 8 and n == 128:
            e8 = e
    ok = not bad and e8 <= 1e-9 and wall <= 30
    summary = " ".join(f"o{o}:[{', '.join(f'{v:.2f}' for v in vals)}]" for o, vals in eocs.items())
    return ok, f"EOC {summary}; o8@128 err={e8:.2e}; {wall:.1f}s" + (f"; below o-0.5: {bad}" if bad else "")


def criterion_2():
    rng = np.random.default_rng(20240601)
    t = rng.uniform(0.05, 0.9, 50)
    x = rng.uniform(0.0, 2 * math.pi, 50)

    def run():
        return max(abs(burgers_sine_exact(ti, xi, 200) - burgers_sine_characteristics(ti, xi))
                   for ti, xi in zip(t, x))

    worst, wall = timed(run)
    return worst <= 1e-10 and wall <= 5, f"max |series - characteristics| = {worst:.2e} (t_max={t.max():.3f}); {wall:.2f}s"


ITER_TAU = 0.1


def criterion_3():
    t, wall = timed(lambda: run_iteration_study("sine", ("fixed", "secant", "newton"), (1, 2, 3, 5), (ITER_TAU,),
                                                0.8, 4, 512, 50))
    dist = {}
    exact = {}
    for m, i, d, e in zip(t.column("method"), t.column("iterations"), t.column("error_vs_converged"),
                          t.column("error_vs_exact")):
        dist[m, i] = d
        exact[m, i] = e
    conv = run_iteration_study("sine", ("secant",), (50,), (ITER_TAU,), 0.8, 4, 512, 50)
    e_conv = conv.column("error_vs_exact")[0]
    s3, f5 = dist["secant", 3], dist["fixed_point", 5]
    ratio = max(s3, f5) / min(s3, f5)
    a = ratio <= 2.0
    b = all(exact[m, 5] <= 10 * e_conv for m in ("newton", "secant"))
    c = dist["fixed_point", 1] > dist["secant", 2]
    ok = a and b and c and wall <= 20
    return ok, (f"tau={ITER_TAU}: (a) secant3={s3:.2e} fixed5={f5:.2e} ratio={ratio:.1f} {'ok' if a else 'FAIL'}; "
                f"(b) newton5={exact['newton', 5]:.2e} secant5={exact['secant', 5]:.2e} vs converged "
                f"{e_conv:.2e} {'ok' if b else 'FAIL'}; (c) fixed1={dist['fixed_point', 1]:.2e} > "
                f"secant2={dist['secant', 2]:.2e} {'ok' if c else 'FAIL'}; {wall:.1f}s")


def criterion_4():
    t0 = time.perf_counter()
    errs = {}
    p = KPParams(0.1, 1)
    worst = 0.0
    for lam in (-1, 1):
        p = KPParams(0.1, lam)
        for m in (1, 4, 16, 31):
            k = m * math.pi / L
            u = GridField2D.sample(lambda x, y: np.sin(k * x) + 0 * y, 64, 16, L, L)
            out = apply_propagator(u, 0.37, p)
            worst = max(worst, float(np.max(np.abs(out.values - np.sin(k * u.x + 0.01 * k**3 * 0.37)[None]))))
    errs["mode"] = worst
    rng = np.random.default_rng(4)
    u = GridField2D(rng.normal(size=(64, 128)) + 0.7, L, L)
    errs["mean"] = max(abs(apply_propagator(u, tau, KPParams(0.1, lam)).mean() - u.mean())
                       for lam in (-1, 1) for tau in (1e-3, 0.1, 10.0))
    errs["bound"] = max(float(np.max(np.abs(PropagatorTables.build(tau, 128, 64, L, L, KPParams(e, lam)).phi0)))
                        for lam in (-1, 1) for tau in (1e-4, 0.1, 5.0) for e in (0.1, 1.0))
    errs["group"] = max(float(np.max(np.abs(apply_propagator(u, 0.3, KPParams(0.1, lam)).values
                                            - apply_propagator(apply_propagator(u, 0.1, KPParams(0.1, lam)), 0.2,
                                                               KPParams(0.1, lam)).values)))
                        for lam in (-1, 1))
    wall = time.perf_counter() - t0
    ok = errs["mode"] <= 1e-12 and errs["mean"] <= 1e-13 and errs["bound"] <= 1.0 + 4 * np.finfo(float).eps and errs["group"] <= 1e-11
    return ok and wall <= 5, (f"single mode {errs['mode']:.1e}, mean {errs['mean']:.1e}, max|mult| "
                              f"{errs['bound']:.17g}, group {errs['group']:.1e}; {wall:.2f}s")


KP_TAUS = (4e-3, 2e-3, 1e-3)
KP_TAU_REF = 1.25e-4


@functools.lru_cache(maxsize=None)
def kp_time_convergence(scheme):
    setup = KPSetup(KPParams(0.1, 1))
    return timed(lambda: run_kp_time_convergence(setup, scheme, 128, 128, KP_TAUS, 0.1, 4, KP_TAU_REF))


def _eocs(table):
    return [e for e in table.column("eoc") if not math.isnan(e)]


def criterion_5():
    t, wall = kp_time_convergence("strang")
    eocs = _eocs(t)
    ok = len(eocs) == 2 and all(abs(e - 2.0) <= 0.2 for e in eocs) and wall <= 180
    errs = ", ".join(f"{e:.2e}" for e in t.column("error"))
    return ok, f"errors [{errs}] EOC [{', '.join(f'{e:.2f}' for e in eocs)}]; {wall:.0f}s"


@functools.lru_cache(maxsize=None)
def kp_fine_solutions():
    from kpsplit.studies import kp_run
    setup = KPSetup(KPParams(0.1, 1))
    return {s: kp_run(setup, s, 128, 128, KP_TAUS[-1], 0.1)[0] for s in ("strang", "exp2")}


def criterion_6():
    t, wall = kp_time_convergence("exp2")
    eocs = _eocs(t)
    a = len(eocs) == 2 and all(abs(e - 2.0) <= 0.3 for e in eocs)
    # time error of each scheme at the finest tested step: distance to its own reference
    est = {"exp2": t.column("error")[-1], "strang": kp_time_convergence("strang")[0].column("error")[-1]}
    t0 = time.perf_counter()
    sol = kp_fine_solutions()
    wall += time.perf_counter() - t0
    diff = float(np.max(np.abs(sol["strang"].values - sol["exp2"].values)))
    b = diff <= 10 * max(est.values())
    return a and b and wall <= 180, (f"exp2 EOC [{', '.join(f'{e:.2f}' for e in eocs)}] {'ok' if a else 'FAIL'}; "
                                     f"|strang - exp2| at tau={KP_TAUS[-1]:g} = {diff:.2e} vs 10 x max time error "
                                     f"{10 * max(est.values()):.2e} {'ok' if b else 'FAIL'}; {wall:.0f}s")


MASS_CELLS = {2: (16, 32, 64), 4: (8, 16, 32)}


def mass_drift(o, n, tau=0.1):
    g = DGGrid.uniform(0.0, 2 * math.pi, n, o)
    f = g.sample(lambda x: np.sin(x) + 0.5 * np.cos(2 * x) + 0.3)
    return abs(mass(sldg_step(f, tau, CharSolverConfig("secant", 10))) - mass(f))


def criterion_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    u = GridField2D(rng.normal(size=(64, 64)) + 1.3, L, L)
    m0 = u.mean() * (2 * L) ** 2
    prop = max(abs(apply_propagator(u, tau, KPParams(0.1, lam)).mean() * (2 * L) ** 2 - m0) / abs(m0)
               for lam in (-1, 1) for tau in (0.01, 1.0))
    parts = []
    ok = prop <= 1e-13
    for o, cells in MASS_CELLS.items():
        d = [mass_drift(o, n) for n in cells]
        eocs = [math.log2(a / b) for a, b in zip(d, d[1:])]
        ok &= all(e >= o - 0.5 for e in eocs)
        parts.append(f"o{o} cells {cells}: drift [{', '.join(f'{v:.1e}' for v in d)}] "
                     f"EOC [{', '.join(f'{e:.1f}' for e in eocs)}]")
    wall = time.perf_counter() - t0
    return ok and wall <= 20, f"propagator rel. mass change {prop:.1e}; " + "; ".join(parts) + f"; {wall:.1f}s"


def criterion_8():
    t, wall = timed(lambda: run_soliton_study((2, 3, 4, 5), 1e-2, 50.0, 512))
    errs = final_amplitude_errors(t)
    seq = [errs[o] for o in (2, 3, 4, 5)]
    ok = all(a > b for a, b in zip(seq, seq[1:])) and wall <= 600
    return ok, "amplitude error at t=50: " + ", ".join(f"o{o}={e:.3e}" for o, e in zip((2, 3, 4, 5), seq)) + f"; {wall:.0f}s"


def criterion_9():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    ok = True
    for n_x, N_x, n_y in rng.integers([1, 0, 1], [2**20, 2**20, 2**20], size=(1000, 3)):
        c = CostModelInput(int(n_x), int(N_x), int(n_y))
        s, e = strang_cost(c), exp2_cost(c)
        ok &= s == (7 * c.n_x + 3 * c.N_x) * c.n_y and e == 32 * c.n_x * c.n_y
        ok &= sum(strang_items(c).values()) == s and sum(exp2_items(c).values()) == e
    wall = time.perf_counter() - t0
    return bool(ok) and wall <= 1, f"1000 random size triples exact; {wall:.2f}s"


COST_TOLERANCES = (1e-1, 1e-2)


def criterion_10():
    study = CostStudy()
    (records, _, _), wall = timed(lambda: run_cost_study(KPSetup(KPParams(0.1, 1)), study))
    table = summary_by_tolerance(cost_accuracy_curve(records, study.tolerances, ("strang", "exp2")))
    parts = []
    ok = wall <= 900
    for tol in COST_TOLERANCES:
        row = table.get(tol, {})
        s, e = row.get("strang"), row.get("exp2")
        good = s is not None and e is not None and s < e
        ok &= good
        parts.append(f"tol {tol:g}: strang {s} exp2 {e}" + (f" ({e / s:.1f}x)" if good else " FAIL"))
    return ok, "; ".join(parts) + f"; {wall:.0f}s"


def criterion_11():
    t0 = time.perf_counter()
    cfg = CharSolverConfig("secant", 5)
    times = []
    for n in (2**10, 2**11, 2**12, 2**13):
        g = DGGrid.uniform(0.0, 2 * math.pi, n, 4)
        f = g.sample(lambda x: np.sin(x) + 0.5)
        tau = 0.5 * g.h / 1.5  # fixed CFL 0.5
        reps = max(1, 2**14 // n)
        best = math.inf
        for _ in range(5):
            s = time.perf_counter()
            for _ in range(reps):
                sldg_step(f, tau, cfg)
            best = min(best, (time.perf_counter() - s) / reps)
        times.append(best)
    ratios = [b / a for a, b in zip(times, times[1:])]
    wall = time.perf_counter() - t0
    ok = all(r <= 2.5 for r in ratios) and wall <= 30
    return ok, (f"step time [{', '.join(f'{t * 1e3:.2f}ms' for t in times)}] ratios "
                f"[{', '.join(f'{r:.2f}' for r in ratios)}]; {wall:.1f}s")


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 12)}


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, acceptance):
    ok, detail = CRITERIA[k]()
    acceptance(k, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    wanted = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    failed = 0
    for k in wanted:
        ok, detail = CRITERIA[k]()
        failed += not ok
        print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    sys.exit(1 if failed else 0)

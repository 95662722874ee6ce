"""Study drivers behind the command-line tool.

Each driver returns a :class:`~kpsplit.io.Table`; nothing here prints or
writes files except where a path is passed explicitly. Runs that fail
numerically become rows with a ``status`` other than ``ok``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .costmodel import RunRecord, cost_accuracy_curve, run_cost
from .dg import DGGrid
from .errors import InvalidArgument, NumericalFailure
from .exact import burgers_characteristics, burgers_sine_exact
from .initial import GridSpec, InitialCondition, make_initial
from .integrators import RunStats, Scheme, SchemeConfig, evolve
from .io import Table, write_snapshot
from .sldg import CharSolver, CharSolverConfig, step_coeffs
from .spectral import GridField2D, KPParams

BURGERS_COLUMNS = ["ic", "order", "cells", "dof", "tau", "t_final", "error", "eoc",
                   "max_iterations", "mass_drift", "wall_time", "status"]


def burgers_domain(ic: InitialCondition) -> tuple[float, float]:
    if ic.name == "sine":
        return 0.0, 2.0 * math.pi
    return -ic.L, ic.L


def burgers_exact(ic: InitialCondition, t: float, x: np.ndarray) -> np.ndarray:
    """Reference values for the 1D studies (series for sine, characteristics otherwise)."""
    if ic.name == "sine":
        return burgers_sine_exact(t, x)
    if ic.name in ("sech", "lorentzian", "soliton"):
        bound = float(np.max(np.abs(ic(np.linspace(-ic.L, ic.L, 4001)))))
        return burgers_characteristics(lambda s: ic(s), t, x, bound)
    raise InvalidArgument(f"no 1D reference for {ic.name!r}")


def _n_steps(t_final: float, tau: float) -> tuple[int, float]:
    """Steps of size ``tau`` with a shortened last step to land on ``t_final``."""
    n = max(1, math.ceil(t_final / tau - 1e-9))
    return n, t_final - (n - 1) * tau


def burgers_run(coeffs: np.ndarray, grid: DGGrid, tau: float, t_final: float,
                cfg: CharSolverConfig) -> tuple[np.ndarray, int]:
    """Advance nodal coefficients to ``t_final``; returns ``(coeffs, max_iterations)``."""
    n, last = _n_steps(t_final, tau)
    c = coeffs[None]
    used = 0
    for k in range(n):
        c, it = step_coeffs(c, grid, tau if k < n - 1 else last, cfg)
        used = max(used, it)
    return c[0], used


def _eoc(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    if e_coarse > 0 and e_fine > 0 and math.isfinite(e_coarse) and math.isfinite(e_fine):
        return math.log(e_coarse / e_fine) / math.log(ratio)
    return math.nan


def run_burgers_convergence(ic: InitialCondition | str = "sine", orders: Sequence[int] = (2, 4, 8),
                            cells: Sequence[int] = (32, 64, 128), t_final: float = 0.1,
                            tau: float = 1e-3,
                            cfg: CharSolverConfig = CharSolverConfig(CharSolver.SECANT, 10)) -> Table:
    """Spatial convergence of the sLdG scheme for Burgers' equation.

    The EOC column compares each row with the previous cell count of the same order.
    """
    ic = InitialCondition(ic) if isinstance(ic, str) else ic
    a, b = burgers_domain(ic)
    table = Table(BURGERS_COLUMNS, {"study": "burgers-convergence", "ic": ic.name})
    for o in orders:
        prev = None
        for n in cells:
            grid = DGGrid.uniform(a, b, n, o)
            c0 = np.asarray(ic(grid.nodes), dtype=float)
            t0 = time.perf_counter()
            row = dict(ic=ic.name, order=o, cells=n, dof=n * o, tau=tau, t_final=t_final)
            try:
                c, used = burgers_run(c0, grid, tau, t_final, cfg)
                err = float(np.max(np.abs(c - burgers_exact(ic, t_final, grid.nodes))))
                drift = _mass(c, grid) - _mass(c0, grid)
                row.update(error=err, max_iterations=used, mass_drift=drift, status="ok",
                           eoc=_eoc(prev, err, 2.0) if prev is not None else math.nan)
                prev = err
            except NumericalFailure as exc:
                row.update(error=math.nan, eoc=math.nan, max_iterations=0, mass_drift=math.nan,
                           status=f"failed: {exc}")
                prev = None
            row["wall_time"] = time.perf_counter() - t0
            table.add(**row)
    return table


def _mass(c: np.ndarray, grid: DGGrid) -> float:
    return float(grid.h * np.sum(c * grid.rule.weights))


def run_iteration_study(ic: InitialCondition | str = "sine",
                        methods: Sequence[str] = ("fixed", "secant", "newton"),
                        iterations: Sequence[int] = (1, 2, 3, 4, 5, 6, 8, 10),
                        taus: Sequence[float] = (0.05,), t_final: float = 0.8,
                        order: int = 4, cells: int = 512, reference_iterations: int = 50) -> Table:
    """Error against a well-converged secant run, per method, iteration count and step."""
    ic = InitialCondition(ic) if isinstance(ic, str) else ic
    a, b = burgers_domain(ic)
    grid = DGGrid.uniform(a, b, cells, order)
    c0 = np.asarray(ic(grid.nodes), dtype=float)
    exact = burgers_exact(ic, t_final, grid.nodes)
    table = Table(["method", "iterations", "tau", "t_final", "error_vs_converged", "error_vs_exact",
                   "status"], {"study": "iteration-study", "ic": ic.name, "order": order, "cells": cells})
    for tau in taus:
        ref, _ = burgers_run(c0, grid, tau, t_final,
                             CharSolverConfig(CharSolver.SECANT, reference_iterations))
        for m in methods:
            for i in iterations:
                row = dict(method=CharSolver.parse(m).name.lower(), iterations=i, tau=tau, t_final=t_final)
                try:
                    c, _ = burgers_run(c0, grid, tau, t_final, CharSolverConfig(m, i))
                    row.update(error_vs_converged=float(np.max(np.abs(c - ref))),
                               error_vs_exact=float(np.max(np.abs(c - exact))), status="ok")
                except NumericalFailure as exc:
                    row.update(error_vs_converged=math.nan, error_vs_exact=math.nan, status=f"failed: {exc}")
                table.add(**row)
    return table


@dataclass(frozen=True)
class KPSetup:
    """Problem and discretization shared by the KP drivers."""

    params: KPParams = KPParams(0.1, 1)
    ic: InitialCondition = InitialCondition("schwartzian")
    Lx: float = 10 * math.pi
    Ly: float = 10 * math.pi
    char_solver: CharSolverConfig = CharSolverConfig(CharSolver.SECANT, 5)
    transfer: str = "projection"

    def initial(self, n_x: int, n_y: int) -> GridField2D:
        return make_initial(self.ic, GridSpec(n_x, n_y, self.Lx, self.Ly))


def kp_run(setup: KPSetup, scheme: str, n_x: int, n_y: int, tau: float, t_final: float,
           order: int = 4, cells: int | None = None,
           observers: Sequence[Callable] = (), stride: int = 1) -> tuple[GridField2D, RunStats]:
    """One KP run. ``cells`` defaults to ``n_x // order`` (one dG unknown per grid point)."""
    u0 = setup.initial(n_x, n_y)
    grid = None
    if Scheme(scheme) is Scheme.STRANG:
        grid = DGGrid.uniform(-setup.Lx, setup.Lx, cells or max(1, n_x // order), order)
    cfg = SchemeConfig.for_final_time(scheme, tau, t_final, params=setup.params,
                                      char_solver=setup.char_solver, dg_grid=grid,
                                      transfer=setup.transfer)
    stats = RunStats()
    out = evolve(u0, cfg, observers=observers, stride=stride, order=order, stats=stats)
    return out, stats


def restrict(fine: GridField2D, n_x: int, n_y: int) -> np.ndarray:
    """Values of ``fine`` on a coarser grid whose points are a subset of it."""
    fy, fx = fine.values.shape
    if fx % n_x or fy % n_y:
        raise InvalidArgument(f"cannot restrict {fx}x{fy} to {n_x}x{n_y}")
    return fine.values[:: fy // n_y, :: fx // n_x]


def _record(scheme, tau, t_final, n_x, n_y, N_x, order, err, stats, wall, drift, **kw) -> RunRecord:
    return RunRecord(scheme, tau, t_final, n_x, n_y, N_x, err, order=order, wall_time=wall,
                     iterations=stats.max_char_iterations if stats else 0, mass_drift=drift, **kw)


KP_COLUMNS = ["scheme", "order", "n_x", "n_y", "N_x", "tau", "t_final", "error", "eoc",
              "time_error", "space_error", "cost", "iterations", "mass_drift", "wall_time", "status"]


def _row(rec: RunRecord, eoc: float = math.nan) -> dict:
    ok = rec.status == "ok"
    return dict(scheme=rec.scheme, order=rec.order, n_x=rec.n_x, n_y=rec.n_y, N_x=rec.N_x,
                tau=rec.tau, t_final=rec.t_final, error=rec.error, eoc=eoc,
                time_error=rec.time_error, space_error=rec.space_error,
                cost=run_cost(rec) if ok else 0, iterations=rec.iterations,
                mass_drift=rec.mass_drift, wall_time=rec.wall_time, status=rec.status)


def _safe_run(setup, scheme, n_x, n_y, tau, t_final, order, cells=None, **kw):
    t0 = time.perf_counter()
    try:
        u, stats = kp_run(setup, scheme, n_x, n_y, tau, t_final, order, cells, **kw)
        return u, stats, time.perf_counter() - t0, "ok"
    except NumericalFailure as exc:
        return None, None, time.perf_counter() - t0, f"failed: {exc}"


def run_kp_time_convergence(setup: KPSetup, scheme: str, n_x: int, n_y: int, taus: Sequence[float],
                            t_final: float, order: int = 4, tau_ref: float | None = None,
                            snapshot_dir: str | Path | None = None) -> Table:
    """Self-convergence in ``tau`` at fixed resolution. EOC is against the previous row."""
    taus = sorted(taus, reverse=True)
    tau_ref = tau_ref if tau_ref is not None else taus[-1] / 8
    ref, _, _, status = _safe_run(setup, scheme, n_x, n_y, tau_ref, t_final, order)
    if ref is None:
        raise NumericalFailure(f"reference run failed ({status})")
    N_x = _dg_dof(scheme, n_x, order)
    table = Table(KP_COLUMNS, {"study": "kp-time-convergence", "tau_ref": tau_ref,
                               "model": _model_name(setup.params), "ic": setup.ic.name})
    if snapshot_dir is not None:
        write_snapshot(ref, Path(snapshot_dir) / f"{scheme}_ref_tau{tau_ref:g}.bin")
    prev = None
    for tau in taus:
        u, stats, wall, status = _safe_run(setup, scheme, n_x, n_y, tau, t_final, order)
        err = float(np.max(np.abs(u.values - ref.values))) if u is not None else math.nan
        drift = u.mean() - setup.initial(n_x, n_y).mean() if u is not None else math.nan
        rec = _record(scheme, tau, t_final, n_x, n_y, N_x, order, err, stats, wall, drift,
                      time_error=err, status=status)
        table.add(**_row(rec, _eoc(prev, err, 2.0) if prev is not None else math.nan))
        prev = err if u is not None else None
    return table


def run_kp_space_convergence(setup: KPSetup, scheme: str, resolutions: Sequence[tuple[int, int]],
                             tau: float, t_final: float, orders: Sequence[int] = (4,),
                             reference: GridField2D | None = None) -> Table:
    """Error against a fine reference for each ``(n_x, n_y)`` and order.

    Without ``reference`` the finest resolution of the first order serves as one.
    """
    resolutions = sorted(resolutions)
    if reference is None:
        n_x, n_y = resolutions[-1]
        reference, _, _, status = _safe_run(setup, scheme, n_x, n_y, tau, t_final, orders[0])
        if reference is None:
            raise NumericalFailure(f"reference run failed ({status})")
    table = Table(KP_COLUMNS, {"study": "kp-space-convergence", "model": _model_name(setup.params),
                               "ic": setup.ic.name, "reference": f"{reference.n_x}x{reference.n_y}"})
    for o in orders if scheme == "strang" else orders[:1]:
        prev = None
        for n_x, n_y in resolutions:
            u, stats, wall, status = _safe_run(setup, scheme, n_x, n_y, tau, t_final, o)
            err = float(np.max(np.abs(u.values - restrict(reference, n_x, n_y)))) if u is not None else math.nan
            drift = u.mean() - setup.initial(n_x, n_y).mean() if u is not None else math.nan
            rec = _record(scheme, tau, t_final, n_x, n_y, _dg_dof(scheme, n_x, o), o, err, stats,
                          wall, drift, space_error=err, status=status)
            table.add(**_row(rec, _eoc(prev, err, 2.0) if prev is not None else math.nan))
            prev = err if u is not None else None
    return table


def _dg_dof(scheme: str, n_x: int, order: int) -> int:
    return (n_x // order) * order if scheme == "strang" else 0


def _model_name(p: KPParams) -> str:
    return "kp1" if p.lam < 0 else "kp2"


@dataclass(frozen=True)
class CostStudy:
    """Runs for a cost/accuracy comparison; ``resolutions`` are square grid sizes."""

    t_final: float = 0.1
    taus: tuple[float, ...] = (2e-2, 1e-2, 5e-3, 2.5e-3)
    strang_resolutions: tuple[int, ...] = (128, 256, 512)
    exp2_resolutions: tuple[int, ...] = (128, 256, 512)
    order: int = 4
    reference_n: int = 1024
    reference_tau: float = 5e-4
    tolerances: tuple[float, ...] = (1e-1, 1e-2, 1e-3)


def run_cost_study(setup: KPSetup, study: CostStudy = CostStudy(),
                   reference: GridField2D | None = None) -> tuple[list[RunRecord], Table, Table]:
    """Errors of both schemes against one fine exp2 reference, and the resulting curve.

    For each resolution the smallest step gives the space error estimate; the
    time error of a run is its distance from that run. Returns the records,
    a run table and a curve table.
    """
    T = study.t_final
    if reference is None:
        reference, _, _, status = _safe_run(setup, "exp2", study.reference_n, study.reference_n,
                                            study.reference_tau, T, study.order)
        if reference is None:
            raise NumericalFailure(f"reference run failed ({status})")
    taus = sorted(study.taus, reverse=True)
    records: list[RunRecord] = []
    for scheme, sizes in (("strang", study.strang_resolutions), ("exp2", study.exp2_resolutions)):
        for n in sizes:
            ref_n = restrict(reference, n, n)
            runs = []
            for tau in taus:
                u, stats, wall, status = _safe_run(setup, scheme, n, n, tau, T, study.order)
                runs.append((tau, u, stats, wall, status))
            finest = next((u for _, u, *_ in reversed(runs) if u is not None), None)
            space = float(np.max(np.abs(finest.values - ref_n))) if finest is not None else math.nan
            for tau, u, stats, wall, status in runs:
                if u is None:
                    rec = _record(scheme, tau, T, n, n, _dg_dof(scheme, n, study.order), study.order,
                                  math.nan, stats, wall, math.nan, status=status)
                else:
                    rec = _record(scheme, tau, T, n, n, _dg_dof(scheme, n, study.order), study.order,
                                  float(np.max(np.abs(u.values - ref_n))), stats, wall,
                                  u.mean() - setup.initial(n, n).mean(),
                                  time_error=float(np.max(np.abs(u.values - finest.values))),
                                  space_error=space)
                records.append(rec)
    runs_table = Table(KP_COLUMNS, {"study": "cost-compare", "model": _model_name(setup.params),
                                    "reference": f"exp2 {study.reference_n}^2 tau={study.reference_tau:g}"})
    for r in records:
        runs_table.add(**_row(r))
    curve = cost_accuracy_curve(records, study.tolerances, schemes=("strang", "exp2"))
    curve_table = Table(["scheme", "tolerance", "error", "tau", "n_x", "N_x", "n_y", "cost",
                         "balanced", "warning"], {"study": "cost-compare-curve"})
    for p in curve:
        curve_table.add(scheme=p.scheme, tolerance=p.tolerance, error=p.error, tau=p.tau,
                        n_x=p.resolution[0], N_x=p.resolution[1], n_y=p.resolution[2],
                        cost=p.cost, balanced=p.balanced, warning=p.warning)
    return records, runs_table, curve_table


def peak_amplitude(values: np.ndarray, L: float, refine: int = 8) -> float:
    """Maximum of the trigonometric interpolant of periodic samples on ``[-L, L)``.

    A zero-padded transform locates the peak; a few Newton steps on the
    derivative of the interpolant then pin it down.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    X = np.fft.rfft(v) / n
    m = refine * n
    fine = np.fft.irfft(X * m, n=m)
    j = int(np.argmax(fine))
    k = np.arange(X.size) * (math.pi / L)
    w = np.full(X.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    xi = j * (2.0 * L / m)
    for _ in range(8):
        e = np.exp(1j * k * xi)
        d1 = np.sum(w * (1j * k * X * e).real)
        d2 = np.sum(w * (-(k * k) * X * e).real)
        if d2 >= 0 or not math.isfinite(d1 / d2):
            break
        step = d1 / d2
        xi -= step
        if abs(step) < 1e-14 * L:
            break
    return float(max(np.sum(w * (X * np.exp(1j * k * xi)).real), fine[j]))


def run_soliton_study(orders: Sequence[int] = (2, 3, 4, 5), tau: float = 1e-2, t_final: float = 50.0,
                      n_x: int = 512, n_y: int = 2, epsilon: float = 1.0, stride: int = 100,
                      Lx: float = 10 * math.pi, Ly: float = 10 * math.pi,
                      char_solver: CharSolverConfig = CharSolverConfig(CharSolver.SECANT, 5)) -> Table:
    """Amplitude of the KP I line soliton over time, per dG order.

    The dG grid has ``n_x // order`` cells, so the x unknowns stay close to
    ``n_x``. The soliton does not depend on y, so a small ``n_y`` is exact.
    """
    ic = InitialCondition("soliton", epsilon=epsilon)
    setup = KPSetup(KPParams(epsilon, -1), ic, Lx, Ly, char_solver)
    table = Table(["order", "cells", "dof", "step", "time", "amplitude", "amplitude_error", "status"],
                  {"study": "soliton", "tau": tau, "t_final": t_final, "n_x": n_x, "epsilon": epsilon})
    c = ic.c
    for o in orders:
        cells = n_x // o
        rows = []

        def watch(step, t, u, o=o, cells=cells, rows=rows):
            amp = peak_amplitude(u.values[0], Lx)
            rows.append(dict(order=o, cells=cells, dof=cells * o, step=step, time=t,
                             amplitude=amp, amplitude_error=abs(amp - c), status="ok"))

        try:
            kp_run(setup, "strang", n_x, n_y, tau, t_final, o, cells, observers=[watch], stride=stride)
        except NumericalFailure as exc:
            rows.append(dict(order=o, cells=cells, dof=cells * o, step=-1, time=math.nan,
                             amplitude=math.nan, amplitude_error=math.nan, status=f"failed: {exc}"))
        table.extend(rows)
    return table


def final_amplitude_errors(table: Table) -> dict[int, float]:
    """Amplitude error at the last recorded time of each order."""
    out: dict[int, float] = {}
    for o, t, e, s in zip(table.column("order"), table.column("time"),
                          table.column("amplitude_error"), table.column("status")):
        out[o] = e if s == "ok" else math.nan
    return out

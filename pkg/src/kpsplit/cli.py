"""``kpsplit`` command-line tool.

Exit status: 0 on success, 1 for bad arguments, 2 when a run fails numerically.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .costmodel import RunRecord, cost_accuracy_curve
from .errors import InvalidArgument, NumericalFailure
from .initial import InitialCondition
from .io import Table, git_revision, read_csv, snapshot_csv, write_snapshot
from .sldg import CharSolverConfig
from .spectral import KPParams
from . import studies

SUBCOMMANDS = ("burgers-convergence", "iteration-study", "kp-run", "kp-convergence", "soliton",
               "cost-compare")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--model", choices=("kp1", "kp2"), default="kp2")
    g.add_argument("--epsilon", type=float, default=None, help="dispersion parameter (default 0.1, soliton 1)")
    g.add_argument("--delta", type=float, default=2.0**-52, help="regularization of the inverse x-derivative")
    g.add_argument("--order", type=int, default=4, help="dG order o (polynomial degree o-1)")
    g.add_argument("--cells-x", type=int, default=None, help="dG cells in x (default nx // order)")
    g.add_argument("--nx", type=int, default=None)
    g.add_argument("--ny", type=int, default=None)
    g.add_argument("--Lx", type=float, default=10 * math.pi, help="half-width of the x domain")
    g.add_argument("--Ly", type=float, default=10 * math.pi, help="half-width of the y domain")
    g.add_argument("--tau", type=float, default=None)
    g.add_argument("--tmax", type=float, default=None)
    g.add_argument("--scheme", choices=("strang", "exp2"), default="strang")
    g.add_argument("--char-solver", choices=("fixed", "secant", "newton"), default="secant")
    g.add_argument("--iters", type=int, default=None, help="characteristic iterations (default 5 for KP, 10 for Burgers)")
    g.add_argument("--tol", type=float, default=0.0, help="early-exit tolerance of the foot-point solver")
    g.add_argument("--snapshot-stride", type=int, default=0, help="write a field snapshot every N steps")
    g.add_argument("--out", type=Path, default=None, help="output directory (default: CSV on stdout)")
    g.add_argument("--transfer", choices=("projection", "local", "cell"), default="projection")
    g.add_argument("--timings", action="store_true", help="keep the wall_time column (output is then not reproducible)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kpsplit", description="KP equation solvers and studies.")
    parser.add_argument("--seed-check", action="store_true", help="run the built-in oracle self-checks and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = _common()

    b = sub.add_parser("burgers-convergence", parents=[common], help="sLdG spatial convergence for Burgers")
    b.add_argument("--ic", choices=("sine", "sech", "lorentzian"), default="sine")
    b.add_argument("--orders", type=_ints, default=[2, 4, 8])
    b.add_argument("--cells", type=_ints, default=[32, 64, 128])

    it = sub.add_parser("iteration-study", parents=[common], help="foot-point solver iteration study")
    it.add_argument("--ic", choices=("sine", "sech", "lorentzian"), default="sine")
    it.add_argument("--methods", default="fixed,secant,newton")
    it.add_argument("--iters-list", type=_ints, default=[1, 2, 3, 4, 5, 6, 8, 10])
    it.add_argument("--taus", type=_floats, default=None)

    r = sub.add_parser("kp-run", parents=[common], help="a single KP run with snapshots")
    r.add_argument("--ic", choices=("schwartzian", "soliton", "zero"), default="schwartzian")
    r.add_argument("--csv-snapshot", action="store_true", help="also write x,y,u CSV snapshots")

    c = sub.add_parser("kp-convergence", parents=[common], help="KP self-convergence in time or space")
    c.add_argument("--ic", choices=("schwartzian", "soliton", "zero"), default="schwartzian")
    c.add_argument("--kind", choices=("time", "space"), default="time")
    c.add_argument("--taus", type=_floats, default=None)
    c.add_argument("--tau-ref", type=float, default=None)
    c.add_argument("--resolutions", type=_ints, default=None, help="square grid sizes for --kind space")
    c.add_argument("--orders", type=_ints, default=None)

    s = sub.add_parser("soliton", parents=[common], help="KP I line-soliton amplitude study")
    s.add_argument("--orders", type=_ints, default=None)
    s.add_argument("--stride", type=int, default=100, help="record the amplitude every N steps")

    k = sub.add_parser("cost-compare", parents=[common], help="cost/accuracy comparison of Strang and exp2")
    k.add_argument("--runs", type=Path, nargs="*", default=[], help="run tables from an earlier cost-compare")
    k.add_argument("--study", action="store_true", help="run the comparison study")
    k.add_argument("--tolerances", type=_floats, default=[1e-1, 1e-2, 1e-3])
    k.add_argument("--resolutions", type=_ints, default=[128, 256, 512])
    k.add_argument("--taus", type=_floats, default=[2e-2, 1e-2, 5e-3, 2.5e-3])
    k.add_argument("--reference-n", type=int, default=1024)
    k.add_argument("--reference-tau", type=float, default=5e-4)
    return parser


def _char(args, default_iters: int) -> CharSolverConfig:
    return CharSolverConfig(args.char_solver, args.iters or default_iters, args.tol)


def _setup(args, ic: str) -> studies.KPSetup:
    eps = args.epsilon if args.epsilon is not None else (1.0 if ic == "soliton" else 0.1)
    lam = -1 if args.model == "kp1" else 1
    return studies.KPSetup(KPParams(eps, lam, args.delta), InitialCondition(ic, epsilon=eps),
                           args.Lx, args.Ly, _char(args, 5), args.transfer)


def _meta(args, argv) -> dict:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    return {"git_revision": git_revision(Path(__file__).parent),
            "command": " ".join(["kpsplit", *argv]),
            "flags": " ".join(f"{k}={_flag(v)}" for k, v in sorted(flags.items()))}


def _flag(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_flag(x) for x in v)
    return str(v)


def _emit(table: Table, args, argv, name: str) -> None:
    if not args.timings:
        table = table.without("wall_time")
    table.meta.update(_meta(args, argv))
    if args.out is None:
        sys.stdout.write(table.to_csv())
    else:
        table.write(Path(args.out) / name)


def _cmd_burgers(args, argv):
    tau = args.tau or 1e-3
    t = args.tmax if args.tmax is not None else 0.1
    table = studies.run_burgers_convergence(args.ic, args.orders, args.cells, t, tau, _char(args, 10))
    _emit(table, args, argv, "burgers_convergence.csv")
    return 0


def _cmd_iterations(args, argv):
    t = args.tmax if args.tmax is not None else 0.8
    taus = args.taus or [args.tau or 0.05]
    table = studies.run_iteration_study(args.ic, [m for m in args.methods.split(",") if m],
                                        args.iters_list, taus, t, args.order, args.cells_x or 512)
    _emit(table, args, argv, "iteration_study.csv")
    return 0


def _cmd_kp_run(args, argv):
    setup = _setup(args, args.ic)
    nx = args.nx or (args.cells_x * args.order if args.cells_x else 512)
    ny = args.ny or 512
    tau = args.tau or 1e-3
    t = args.tmax if args.tmax is not None else 0.4
    out = args.out
    snaps: list[tuple[int, float, float]] = []

    def snap(step, time, u):
        snaps.append((step, time, float(np.max(np.abs(u.values)))))
        if out is not None:
            write_snapshot(u, Path(out) / f"u_{step:07d}.bin")
            if args.csv_snapshot:
                snapshot_csv(u).write(Path(out) / f"u_{step:07d}.csv")

    stride = args.snapshot_stride or max(1, int(round(t / tau)))
    u, stats = studies.kp_run(setup, args.scheme, nx, ny, tau, t, args.order, args.cells_x,
                              observers=[snap], stride=stride)
    table = Table(["step", "time", "max_abs_u"], {"study": "kp-run", "scheme": args.scheme,
                                                   "max_char_iterations": stats.max_char_iterations})
    for row in snaps:
        table.add(step=row[0], time=row[1], max_abs_u=row[2])
    _emit(table, args, argv, "kp_run.csv")
    return 0


def _cmd_kp_convergence(args, argv):
    setup = _setup(args, args.ic)
    t = args.tmax if args.tmax is not None else 0.1
    if args.kind == "time":
        n = args.nx or 128
        taus = args.taus or [4e-3, 2e-3, 1e-3]
        table = studies.run_kp_time_convergence(setup, args.scheme, n, args.ny or n, taus, t,
                                                args.order, args.tau_ref or 1.25e-4, args.out)
    else:
        res = args.resolutions or [64, 128, 256]
        table = studies.run_kp_space_convergence(setup, args.scheme, [(n, n) for n in res],
                                                 args.tau or 1e-3, t, args.orders or [args.order])
    _emit(table, args, argv, f"kp_{args.kind}_convergence.csv")
    return 0


def _cmd_soliton(args, argv):
    table = studies.run_soliton_study(args.orders or [2, 3, 4, 5], args.tau or 1e-2,
                                      args.tmax if args.tmax is not None else 50.0,
                                      args.nx or 512, args.ny or 2,
                                      args.epsilon if args.epsilon is not None else 1.0,
                                      args.stride, args.Lx, args.Ly, _char(args, 5))
    _emit(table, args, argv, "soliton.csv")
    return 0


def _records_from_csv(path: Path) -> list[RunRecord]:
    _, rows = read_csv(path)
    out = []

    def num(v):
        return float(v) if v not in ("", None) else None

    for r in rows:
        try:
            out.append(RunRecord(r["scheme"], float(r["tau"]), float(r["t_final"]), int(r["n_x"]),
                                 int(r["n_y"]), int(r["N_x"]), float(r["error"]), int(r["order"]),
                                 num(r.get("time_error")), num(r.get("space_error")),
                                 status=r.get("status", "ok")))
        except (KeyError, ValueError) as exc:
            raise InvalidArgument(f"{path}: not a run table ({exc})") from None
    return out


def _cmd_cost(args, argv, parser):
    if not args.runs and not args.study:
        parser.print_usage(sys.stderr)
        print("kpsplit cost-compare: give --runs FILE... or --study", file=sys.stderr)
        return 1
    tables = []
    records: list[RunRecord] = []
    for p in args.runs:
        if not p.exists():
            raise InvalidArgument(f"no such run table: {p}")
        records.extend(_records_from_csv(p))
    if args.study:
        study = studies.CostStudy(t_final=args.tmax if args.tmax is not None else 0.1,
                                  taus=tuple(args.taus), strang_resolutions=tuple(args.resolutions),
                                  exp2_resolutions=tuple(args.resolutions), order=args.order,
                                  reference_n=args.reference_n, reference_tau=args.reference_tau,
                                  tolerances=tuple(args.tolerances))
        recs, runs, _ = studies.run_cost_study(_setup(args, "schwartzian"), study)
        records.extend(recs)
        tables.append(("cost_runs.csv", runs))
    curve = cost_accuracy_curve(records, args.tolerances, schemes=("strang", "exp2"))
    t = Table(["scheme", "tolerance", "error", "tau", "n_x", "N_x", "n_y", "cost", "balanced", "warning"],
              {"study": "cost-compare-curve"})
    for p in curve:
        t.add(scheme=p.scheme, tolerance=p.tolerance, error=p.error, tau=p.tau, n_x=p.resolution[0],
              N_x=p.resolution[1], n_y=p.resolution[2], cost=p.cost, balanced=p.balanced, warning=p.warning)
    tables.append(("cost_curve.csv", t))
    for name, table in tables:
        _emit(table, args, argv, name)
    return 0


def seed_check() -> list[tuple[str, bool, str]]:
    """Fast self-checks of the oracles and core invariants; ``(name, ok, detail)`` triples."""
    from .dg import gauss_legendre_rule
    from .exact import bessel_j, burgers_sine_characteristics, burgers_sine_exact
    from .spectral import GridField2D, apply_propagator

    out = []
    r = gauss_legendre_rule(5)
    e = abs(float(np.sum(r.weights * r.nodes**8)) - 1.0 / 9.0)
    out.append(("quadrature exactness", e < 1e-15, f"{e:.3g}"))
    e = abs(bessel_j(0, 1.0) - 0.7651976865579666)
    out.append(("bessel J0(1)", e < 1e-15, f"{e:.3g}"))
    x = np.linspace(0.0, 2 * math.pi, 41)
    e = float(np.max(np.abs(burgers_sine_exact(0.5, x) - burgers_sine_characteristics(0.5, x))))
    out.append(("series vs characteristics", e < 1e-12, f"{e:.3g}"))
    u = GridField2D.sample(lambda X, Y: np.sin(3 * X / 10) * np.cos(Y / 10), 64, 32, 10 * math.pi, 10 * math.pi)
    v = apply_propagator(apply_propagator(u, 0.3, KPParams(0.1, 1)), -0.3, KPParams(0.1, 1))
    e = float(np.max(np.abs(u.values - v.values)))
    out.append(("propagator inverse", e < 1e-12, f"{e:.3g}"))
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.seed_check:
        results = seed_check()
        for name, ok, detail in results:
            print(f"{'ok  ' if ok else 'FAIL'} {name} ({detail})")
        return 0 if all(ok for _, ok, _ in results) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    handlers = {"burgers-convergence": _cmd_burgers, "iteration-study": _cmd_iterations,
                "kp-run": _cmd_kp_run, "kp-convergence": _cmd_kp_convergence, "soliton": _cmd_soliton}
    try:
        if args.command == "cost-compare":
            return _cmd_cost(args, argv, parser)
        return handlers[args.command](args, argv)
    except InvalidArgument as exc:
        print(f"kpsplit: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"kpsplit: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

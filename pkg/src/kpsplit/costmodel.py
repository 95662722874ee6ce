"""Memory-access cost model for one time step, and cost/accuracy curves.

Every operation is assumed to be memory bound, so the cost of a step is the
number of array elements read or written. Counts are exact Python integers;
anything that would not fit a signed 64-bit counter raises ``OverflowError``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import InvalidArgument

INT64_MAX = 2**63 - 1

STRANG_ITEMS = ("fft", "exp_tau_A", "interpolation", "dg")
EXP2_ITEMS = (
    "fft_u",
    "u_x",
    "B",
    "fft_B",
    "U_hat",
    "U",
    "U_x",
    "F",
    "fft_F",
    "u_hat_new",
    "u_new",
)
# multiples of n_x * n_y, one per line of the step
EXP2_WEIGHTS = (0, 4, 3, 2, 5, 2, 4, 4, 2, 4, 2)


@dataclass(frozen=True)
class CostModelInput:
    """Equidistant x points ``n_x``, dG x unknowns ``N_x`` and y points ``n_y``.

    ``N_x = 0`` describes a run without a dG stage.
    """

    n_x: int
    N_x: int
    n_y: int

    def __post_init__(self):
        for name in ("n_x", "N_x", "n_y"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise InvalidArgument(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.n_x < 1 or self.n_y < 1 or self.N_x < 0:
            raise InvalidArgument(f"sizes must be positive, got {self}")


def _checked(v: int) -> int:
    if v > INT64_MAX:
        raise OverflowError(f"memory-access count {v} exceeds the 64-bit range")
    return v


def strang_items(c: CostModelInput) -> dict[str, int]:
    nn = c.n_x * c.n_y
    dg = c.N_x * c.n_y
    return {
        "fft": _checked(4 * nn),
        "exp_tau_A": _checked(3 * nn),
        "interpolation": _checked(2 * dg),
        "dg": _checked(dg),
    }


def strang_cost(c: CostModelInput) -> int:
    """``(7 n_x + 3 N_x) n_y`` accesses per Strang step."""
    return _checked(sum(strang_items(c).values()))


def exp2_items(c: CostModelInput) -> dict[str, int]:
    nn = c.n_x * c.n_y
    return {k: _checked(w * nn) for k, w in zip(EXP2_ITEMS, EXP2_WEIGHTS)}


def exp2_cost(c: CostModelInput) -> int:
    """``32 n_x n_y`` accesses per exp2 step."""
    return _checked(sum(exp2_items(c).values()))


def step_cost(scheme: str, c: CostModelInput) -> int:
    if scheme == "strang":
        return strang_cost(c)
    if scheme == "exp2":
        return exp2_cost(c)
    raise InvalidArgument(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class RunRecord:
    """One finished run of a KP study.

    ``error`` is measured against the reference solution. ``time_error`` and
    ``space_error`` are the split estimates used to judge balance; either may
    be ``None`` when it was not measured.
    """

    scheme: str
    tau: float
    t_final: float
    n_x: int
    n_y: int
    N_x: int
    error: float
    order: int = 0
    time_error: float | None = None
    space_error: float | None = None
    wall_time: float = 0.0
    iterations: int = 0
    mass_drift: float = 0.0
    status: str = "ok"

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.tau))

    @property
    def balanced(self) -> bool:
        t, s = self.time_error, self.space_error
        if t is None or s is None:
            return False
        if t == 0.0 and s == 0.0:
            return True
        lo, hi = sorted((t, s))
        return hi <= 2.0 * lo


@dataclass(frozen=True)
class CostAccuracyPoint:
    scheme: str
    tolerance: float
    error: float
    tau: float
    resolution: tuple[int, int, int]
    cost: int
    balanced: bool
    warning: str = ""

    def __post_init__(self):
        if not self.warning and (self.cost <= 0 or not self.error >= 0):
            raise InvalidArgument("a point needs positive cost and non-negative error")


def run_cost(rec: RunRecord) -> int:
    n_x = rec.n_x
    N_x = rec.N_x if rec.scheme == "strang" else 0
    return _checked(step_cost(rec.scheme, CostModelInput(n_x, N_x, rec.n_y)) * rec.n_steps)


def cost_accuracy_curve(records: Iterable[RunRecord], tolerances: Sequence[float],
                        schemes: Sequence[str] | None = None) -> list[CostAccuracyPoint]:
    """Cheapest run per scheme and tolerance.

    Among runs with ``error <= tolerance`` the balanced ones (time and space
    error within a factor 2) are preferred; when none is balanced the cheapest
    admissible run is used and flagged ``balanced=False``. Ties in cost go to
    the larger step. A tolerance nobody meets yields a point with ``cost=0``
    and a ``warning`` text. Points come back sorted by scheme then cost.
    """
    records = [r for r in records if r.status == "ok" and math.isfinite(r.error)]
    if schemes is None:
        schemes = sorted({r.scheme for r in records})
    out: list[CostAccuracyPoint] = []
    for scheme in schemes:
        mine = [r for r in records if r.scheme == scheme]
        pts = []
        for tol in sorted(tolerances, reverse=True):
            ok = [r for r in mine if r.error <= tol]
            pool = [r for r in ok if r.balanced] or ok
            if not pool:
                pts.append(CostAccuracyPoint(scheme, tol, math.nan, math.nan, (0, 0, 0), 0, False,
                                             warning=f"no {scheme} run reaches error {tol:g}"))
                continue
            best = min(pool, key=lambda r: (run_cost(r), -r.tau))
            pts.append(CostAccuracyPoint(scheme, tol, best.error, best.tau,
                                         (best.n_x, best.N_x, best.n_y), run_cost(best), best.balanced))
        out.extend(sorted(pts, key=lambda p: (p.cost, -p.tolerance)))
    return out


def summary_by_tolerance(points: Iterable[CostAccuracyPoint]) -> Mapping[float, dict[str, int]]:
    """``{tolerance: {scheme: cost}}`` for the points without warnings."""
    table: dict[float, dict[str, int]] = {}
    for p in points:
        if not p.warning:
            table.setdefault(p.tolerance, {})[p.scheme] = p.cost
    return table

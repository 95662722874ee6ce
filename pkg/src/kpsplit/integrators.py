"""Time integrators for the KP equation: Strang splitting and exp2.

The state is always the equidistant :class:`GridField2D`. A Strang step runs
half a linear step, moves the field to the dG grid, takes one sLdG step with
advection speed ``6u`` and moves it back, then runs the second half step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .dg import DGGrid
from .errors import Divergence, InvalidArgument, StepRejected
from .sldg import CharSolver, CharSolverConfig, step_coeffs
from .spectral import (
    GridField2D,
    KPParams,
    ProjectionTransfer,
    PropagatorTables,
    dg_to_equidistant,
    equidistant_to_dg,
    rfft_wavenumbers,
)

KP_NONLINEAR = 6.0


class Scheme(str, enum.Enum):
    STRANG = "strang"
    EXP2 = "exp2"


def default_dg_grid(n_x: int, Lx: float, order: int, oversampling: float = 1.0) -> DGGrid:
    """dG grid on ``[-Lx, Lx)`` with ``n_cells * order = oversampling * n_x``."""
    n_cells = int(round(oversampling * n_x / order))
    if n_cells < 1:
        raise InvalidArgument("dG grid would have no cells")
    return DGGrid.uniform(-Lx, Lx, n_cells, order)


@dataclass(frozen=True)
class SchemeConfig:
    """Everything a time integration needs besides the initial value.

    ``transfer`` picks how the nonlinear substep moves between grids:
    ``"projection"`` (default) uses the L2 projections of
    :class:`ProjectionTransfer` and transfers only the sLdG increment, so a
    zero step is the identity; ``"local"`` interpolates with the local
    barycentric stencil and evaluates the dG polynomials pointwise; ``"cell"``
    is the exact pointwise round trip available when ``n_x == n_cells * order``.
    The pointwise transfers are not norm-stable under stiff dispersion and
    are kept for comparison. ``nonlinear_coeff`` is the
    factor in front of ``u u_x``; setting it to zero switches the nonlinearity off.
    """

    scheme: Scheme
    tau: float
    n_steps: int
    params: KPParams = field(default_factory=KPParams)
    char_solver: CharSolverConfig = field(default_factory=lambda: CharSolverConfig(CharSolver.SECANT, 5))
    fuse_half_steps: bool = True
    dg_grid: DGGrid | None = None
    n_x: int | None = None
    transfer: str = "projection"
    nonlinear_coeff: float = KP_NONLINEAR

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (math.isfinite(self.tau) and self.tau != 0):
            raise InvalidArgument(f"tau must be finite and nonzero, got {self.tau}")
        if self.scheme is Scheme.EXP2 and self.tau < 0:
            raise InvalidArgument("exp2 only steps forward in time")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidArgument(f"n_steps must be a positive integer, got {self.n_steps}")
        if self.transfer not in ("projection", "cell", "local"):
            raise InvalidArgument(f"unknown transfer {self.transfer!r}")

    @classmethod
    def for_final_time(cls, scheme, tau: float, t_final: float, **kw) -> "SchemeConfig":
        n = int(round(t_final / tau))
        if n < 1 or abs(n * tau - t_final) > 1e-12 * max(1.0, abs(t_final)):
            raise InvalidArgument(f"t_final={t_final} is not a multiple of tau={tau}")
        return cls(scheme, tau, n, **kw)

    @property
    def t_final(self) -> float:
        return self.tau * self.n_steps


class _Strang:
    def __init__(self, cfg: SchemeConfig, u: GridField2D, order: int = 4):
        self.cfg = cfg
        p = cfg.params
        grid = cfg.dg_grid or default_dg_grid(u.n_x, u.Lx, order)
        if abs(grid.a + u.Lx) > 1e-12 * u.Lx or abs(grid.b - u.Lx) > 1e-12 * u.Lx:
            raise InvalidArgument("dG grid must span [-Lx, Lx)")
        self.grid = grid
        self.stencil = cfg.transfer
        self.proj = ProjectionTransfer(u.n_x, grid) if cfg.transfer == "projection" else None
        ny, nx = u.values.shape
        self.half = PropagatorTables.build(0.5 * cfg.tau, nx, ny, u.Lx, u.Ly, p)
        self.full = PropagatorTables.build(cfg.tau, nx, ny, u.Lx, u.Ly, p)
        self.max_iters = 0

    def linear(self, u: GridField2D, tables: PropagatorTables) -> GridField2D:
        uh = np.fft.rfft2(u.values)
        return u.with_values(np.fft.irfft2(uh * tables.phi0, s=u.values.shape))

    def nonlinear(self, u: GridField2D) -> GridField2D:
        speed = self.cfg.nonlinear_coeff
        if self.proj is not None:
            c = self.proj.to_dg(u.values)
            out, it = step_coeffs(c, self.grid, self.cfg.tau, self.cfg.char_solver, speed)
            self.max_iters = max(self.max_iters, it)
            out -= c
            return u.with_values(u.values + self.proj.to_equidistant(out))
        dg = equidistant_to_dg(u, self.grid, self.stencil)
        out, it = step_coeffs(dg.coeffs, self.grid, self.cfg.tau, self.cfg.char_solver, speed)
        self.max_iters = max(self.max_iters, it)
        dg.coeffs = out
        return dg_to_equidistant(dg, u.n_x, u.Lx, u.Ly)

    def step(self, u: GridField2D) -> GridField2D:
        return self.linear(self.nonlinear(self.linear(u, self.half)), self.half)


class _Exp2:
    def __init__(self, cfg: SchemeConfig, u: GridField2D):
        self.cfg = cfg
        ny, nx = u.values.shape
        self.tables = PropagatorTables.build(cfg.tau, nx, ny, u.Lx, u.Ly, cfg.params, with_phi=True)
        kx, _ = rfft_wavenumbers(nx, ny, u.Lx, u.Ly)
        self.ikx = 1j * kx
        self.shape = (ny, nx)
        self.max_iters = 0

    def run(self, u: GridField2D, n_steps: int, start: int = 0,
            emit: Callable[[int, np.ndarray], None] | None = None) -> np.ndarray:
        un = u.values
        uh = np.fft.rfft2(un)
        # blow-up is reported as Divergence below, not as floating-point warnings
        with np.errstate(over="ignore", invalid="ignore"):
            return self._loop(un, uh, n_steps, start, emit)

    def _loop(self, un, uh, n_steps, start, emit):
        shape = self.shape
        c = self.cfg.nonlinear_coeff
        T = self.tables
        fft, ifft = np.fft.rfft2, np.fft.irfft2
        for n in range(n_steps):
            ux = ifft(self.ikx * uh, s=shape)
            B = ux * un
            Uh = T.phi0 * uh - c * T.phi1 * fft(B)
            U = ifft(Uh, s=shape)
            Ux = ifft(self.ikx * Uh, s=shape)
            F = U * Ux - B
            uh = Uh - c * T.phi2 * fft(F)
            un = ifft(uh, s=shape)
            if not np.all(np.isfinite(un)):
                raise Divergence(start + n + 1, "exp2")
            if emit is not None:
                emit(start + n + 1, un)
        return un


def strang_step(u: GridField2D, cfg: SchemeConfig, order: int = 4) -> GridField2D:
    """One Strang step ``e^{tau A/2} B_tau e^{tau A/2}``."""
    if cfg.scheme is not Scheme.STRANG:
        raise InvalidArgument("strang_step needs a Strang configuration")
    try:
        return _Strang(cfg, u, order).step(u)
    except StepRejected as exc:
        raise exc.at_time(0.0) from None


def exp2_step(u: GridField2D, cfg: SchemeConfig) -> GridField2D:
    """One step of the second-order exponential integrator."""
    if cfg.scheme is not Scheme.EXP2:
        raise InvalidArgument("exp2_step needs an exp2 configuration")
    return u.with_values(_Exp2(cfg, u).run(u, 1))


Observer = Callable[[int, float, GridField2D], None]


@dataclass
class RunStats:
    max_char_iterations: int = 0
    steps: int = 0


def evolve(u0: GridField2D, cfg: SchemeConfig, observers: Iterable[Observer] = (),
           stride: int = 1, order: int = 4, stats: RunStats | None = None) -> GridField2D:
    """Run ``cfg.n_steps`` steps from ``u0``.

    Observers get ``(step, time, state)`` every ``stride`` steps and at the end
    (step 0 is reported too). ``order`` sizes the default dG grid when
    ``cfg.dg_grid`` is not given.
    """
    observers = list(observers)
    if stride < 1:
        raise InvalidArgument("stride must be >= 1")
    if not np.all(np.isfinite(u0.values)):
        raise InvalidArgument("initial value must be finite")
    N = cfg.n_steps
    tau = cfg.tau

    def emit(n: int, state: GridField2D):
        for ob in observers:
            ob(n, n * tau, state)

    def wanted(n: int) -> bool:
        return bool(observers) and (n % stride == 0 or n == N)

    if observers:
        emit(0, u0)
    if cfg.scheme is Scheme.EXP2:
        stepper = _Exp2(cfg, u0)
        hook = None
        if observers:
            def hook(n, vals):
                if wanted(n):
                    emit(n, u0.with_values(vals))
        out = u0.with_values(stepper.run(u0, N, emit=hook))
        if stats is not None:
            stats.steps = N
        return out

    st = _Strang(cfg, u0, order)
    u = u0
    n = 0
    try:
        if not cfg.fuse_half_steps:
            for n in range(N):
                u = st.step(u)
                if wanted(n + 1):
                    emit(n + 1, u)
        else:
            u = st.linear(u, st.half)
            for n in range(N):
                u = st.nonlinear(u)
                k = n + 1
                if k == N or wanted(k):
                    u = st.linear(u, st.half)
                    if wanted(k):
                        emit(k, u)
                    if k < N:
                        u = st.linear(u, st.half)
                else:
                    u = st.linear(u, st.full)
    except StepRejected as exc:
        raise exc.at_time(n * tau) from None
    if not np.all(np.isfinite(u.values)):
        raise Divergence(N, "strang")
    if stats is not None:
        stats.max_char_iterations = st.max_iters
        stats.steps = N
    return u


def with_tau(cfg: SchemeConfig, tau: float, t_final: float) -> SchemeConfig:
    """Copy of ``cfg`` with a new step size reaching ``t_final``."""
    n = int(round(t_final / tau))
    if n < 1 or abs(n * tau - t_final) > 1e-12 * max(1.0, abs(t_final)):
        raise InvalidArgument(f"t_final={t_final} is not a multiple of tau={tau}")
    return replace(cfg, tau=tau, n_steps=n)

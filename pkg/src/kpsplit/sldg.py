"""Semi-Lagrangian discontinuous Galerkin step for Burgers' equation.

Solves ``u_t + c * u * u_x = 0`` over one time step ``tau`` by following
characteristics backward from quadrature points and projecting the transported
solution onto the dG space. ``c`` (``speed``) is 1 for plain Burgers and 6
inside the KP splitting. The work is done by :mod:`kpsplit._kernels`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dg import DGField1D, DGField2D, interface_averages
from .errors import InvalidArgument, StepRejected


class CharSolver(enum.IntEnum):
    FIXED_POINT = _kernels.FIXED
    SECANT = _kernels.SECANT
    NEWTON = _kernels.NEWTON

    @classmethod
    def parse(cls, name: "str | CharSolver") -> "CharSolver":
        if isinstance(name, CharSolver):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"fixed": cls.FIXED_POINT, "fp": cls.FIXED_POINT, "fixed_point": cls.FIXED_POINT,
                   "fixedpoint": cls.FIXED_POINT, "secant": cls.SECANT, "newton": cls.NEWTON}
        try:
            return aliases[key]
        except KeyError:
            raise InvalidArgument(f"unknown characteristic solver {name!r}") from None


@dataclass(frozen=True)
class CharSolverConfig:
    """Foot-point solver and its iteration budget.

    ``tol`` stops a point early once ``|alpha_new - alpha_old| <= tol``;
    ``tol = 0`` always runs ``max_iter`` iterations.
    """

    method: CharSolver = CharSolver.SECANT
    max_iter: int = 10
    tol: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "method", CharSolver.parse(self.method))
        if int(self.max_iter) != self.max_iter or not 1 <= self.max_iter <= 100:
            raise InvalidArgument(f"max_iter must be in [1, 100], got {self.max_iter}")
        if not (self.tol >= 0 and math.isfinite(self.tol)):
            raise InvalidArgument(f"tol must be finite and >= 0, got {self.tol}")


@dataclass(frozen=True)
class CellImage:
    """Forward image ``[a_i, b_i]`` of cell ``i`` after one step."""

    cell: int
    a: float
    b: float


def _kernel_args(grid):
    rule = grid.rule
    return rule.nodes, rule.weights, rule.bary_weights, rule.left, rule.right, rule.diff_matrix


def predict_interfaces(f: DGField1D, tau: float, speed: float = 1.0) -> list[CellImage]:
    """Forward images of all cells using averaged interface values.

    Raises :class:`StepRejected` if any image has non-positive length.
    """
    if not math.isfinite(tau):
        raise InvalidArgument("tau must be finite")
    g = f.grid
    shift = tau * speed
    ut = interface_averages(f.coeffs, g.rule)
    # a + (i+1)*h rather than left + h, so b_i == a_{i+1} bit for bit
    a_i = g.a + np.arange(g.n_cells) * g.h + shift * ut
    b_i = g.a + np.arange(1, g.n_cells + 1) * g.h + shift * np.roll(ut, -1)
    bad = np.flatnonzero(b_i - a_i <= 0.0)
    if bad.size:
        raise StepRejected(int(bad[0]))
    return [CellImage(i, float(a_i[i]), float(b_i[i])) for i in range(g.n_cells)]


def trace_back(x, f: DGField1D, tau: float, cfg: CharSolverConfig, speed: float = 1.0):
    """Foot point of the characteristic through ``x``: ``alpha = x - tau*speed*u(alpha)``.

    Returns ``(alpha, iterations_used)``; both are arrays when ``x`` is.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise InvalidArgument("x must be finite")
    g = f.grid
    nodes, _, bary, _, _, dmat = _kernel_args(g)
    kern = _kernels.get_backend()
    alpha, iters = kern.trace_points(
        f.coeffs[None], np.zeros(xa.size, dtype=np.int64), xa.ravel(), g.a, g.h,
        float(tau) * speed, nodes, bary, dmat, int(cfg.method), int(cfg.max_iter), float(cfg.tol),
    )
    if xa.ndim == 0:
        return float(alpha[0]), int(iters[0])
    return alpha.reshape(xa.shape), iters.reshape(xa.shape)


def step_coeffs(coeffs: np.ndarray, grid, tau: float, cfg: CharSolverConfig,
                speed: float = 1.0, backend: str | None = None) -> tuple[np.ndarray, int]:
    """Kernel entry point on a raw ``(n_rows, n_cells, order)`` array.

    Returns the new coefficients and the largest per-point iteration count.
    """
    if not math.isfinite(tau):
        raise InvalidArgument("tau must be finite")
    nodes, weights, bary, left, right, dmat = _kernel_args(grid)
    kern = _kernels.get_backend(backend)
    return kern.sldg_rows(
        coeffs, grid.a, grid.h, float(tau) * speed, nodes, weights, bary, left, right, dmat,
        int(cfg.method), int(cfg.max_iter), float(cfg.tol),
    )


def sldg_step(f: DGField1D, tau: float, cfg: CharSolverConfig, speed: float = 1.0) -> DGField1D:
    """Advance ``f`` by one sLdG step of size ``tau``."""
    out, _ = step_coeffs(f.coeffs[None], f.grid, tau, cfg, speed)
    return DGField1D(f.grid, out[0])


def sldg_step_rows(f: DGField2D, tau: float, cfg: CharSolverConfig, speed: float = 1.0) -> DGField2D:
    """Apply :func:`sldg_step` to every y-row of ``f`` independently."""
    out, _ = step_coeffs(f.coeffs, f.grid_x, tau, cfg, speed)
    return DGField2D(f.grid_x, out, f.y_a, f.y_b)

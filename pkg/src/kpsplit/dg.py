"""Gauss-Legendre nodal discontinuous Galerkin representation on a periodic 1D grid.

Nodes and weights live on the reference cell [0, 1] with weights summing to
one, so the diagonal mass factor of a cell of width ``h`` is ``h * w_l``.
Cells are numbered from zero: cell ``i`` is ``[a + i*h, a + (i+1)*h]``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import InvalidArgument

MAX_ORDER = 16


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule with ``order`` points on [0, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @cached_property
    def bary_weights(self) -> np.ndarray:
        """Barycentric weights of the Lagrange basis through ``nodes``."""
        xi = self.nodes
        diff = xi[:, None] - xi[None, :]
        np.fill_diagonal(diff, 1.0)
        w = 1.0 / np.prod(diff, axis=1)
        return w / np.max(np.abs(w))

    def basis(self, s) -> np.ndarray:
        """Values of all Lagrange basis polynomials at local coordinates ``s``.

        Returns an array of shape ``s.shape + (order,)``.
        """
        s = np.asarray(s, dtype=float)
        flat = s.reshape(-1)
        diff = flat[:, None] - self.nodes[None, :]
        hit = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            tmp = self.bary_weights[None, :] / diff
            out = tmp / tmp.sum(axis=1, keepdims=True)
        rows = hit.any(axis=1)
        if rows.any():
            out[rows] = hit[rows].astype(float)
        return out.reshape(s.shape + (self.order,))

    @cached_property
    def left(self) -> np.ndarray:
        """Basis values at the left cell edge (s = 0)."""
        return self.basis(np.array(0.0))

    @cached_property
    def right(self) -> np.ndarray:
        """Basis values at the right cell edge (s = 1)."""
        return self.basis(np.array(1.0))

    @cached_property
    def diff_matrix(self) -> np.ndarray:
        """``D[i, j] = l_j'(xi_i)`` on the reference cell."""
        xi = self.nodes
        w = self.bary_weights
        o = self.order
        D = np.zeros((o, o))
        for i in range(o):
            for j in range(o):
                if i != j:
                    D[i, j] = (w[j] / w[i]) / (xi[i] - xi[j])
            D[i, i] = -D[i].sum()
        return D


def _legendre_roots(o: int) -> tuple[np.ndarray, np.ndarray]:
    # Newton on P_o from Chebyshev-like initial guesses; returns the
    # nonnegative half of the [-1, 1] roots with their weights.
    half = (o + 1) // 2
    roots = np.empty(half)
    weights = np.empty(half)
    for m in range(half):
        z = math.cos(math.pi * (m + 0.75) / (o + 0.5))
        for _ in range(100):
            p0, p1 = 1.0, z
            for n in range(2, o + 1):
                p0, p1 = p1, ((2 * n - 1) * z * p1 - (n - 1) * p0) / n
            dp = o * (z * p1 - p0) / (z * z - 1.0)
            dz = p1 / dp
            z -= dz
            if abs(dz) < 1e-16:
                break
        p0, p1 = 1.0, z
        for n in range(2, o + 1):
            p0, p1 = p1, ((2 * n - 1) * z * p1 - (n - 1) * p0) / n
        dp = o * (z * p1 - p0) / (z * z - 1.0)
        roots[m] = z
        weights[m] = 2.0 / ((1.0 - z * z) * dp * dp)
    if o % 2 == 1:
        roots[-1] = 0.0
    return roots, weights


@functools.lru_cache(maxsize=None)
def gauss_legendre_rule(o: int) -> QuadratureRule:
    """Return the ``o``-point Gauss-Legendre rule mapped to [0, 1].

    Weights sum to one and nodes are mirror-symmetric about 1/2 up to rounding.
    """
    if isinstance(o, bool) or not isinstance(o, (int, np.integer)):
        raise InvalidArgument(f"quadrature order must be an integer, got {o!r}")
    o = int(o)
    if not 1 <= o <= MAX_ORDER:
        raise InvalidArgument(f"quadrature order must be in [1, {MAX_ORDER}], got {o}")
    if o == 1:
        nodes, weights = np.array([0.5]), np.array([1.0])
    else:
        z, w = _legendre_roots(o)
        # z is descending and nonnegative; mirror it to build the full rule
        half = o // 2
        pos = 0.5 * z[:half][::-1]
        nodes = np.empty(o)
        weights = np.empty(o)
        nodes[o - half :] = 0.5 + pos
        nodes[:half] = 0.5 - pos[::-1]
        weights[o - half :] = 0.5 * w[:half][::-1]
        weights[:half] = 0.5 * w[:half]
        if o % 2 == 1:
            nodes[half] = 0.5
            weights[half] = 0.5 * w[-1]
        weights /= weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(o, nodes, weights)


@dataclass(frozen=True, eq=False)
class DGGrid:
    """Uniform periodic partition of ``[a, b]`` into ``n_cells`` cells."""

    a: float
    b: float
    n_cells: int
    rule: QuadratureRule

    periodic = True

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.b > self.a:
            raise InvalidArgument(f"need finite a < b, got [{self.a}, {self.b}]")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise InvalidArgument(f"n_cells must be a positive integer, got {self.n_cells}")

    @classmethod
    def uniform(cls, a: float, b: float, n_cells: int, order: int) -> "DGGrid":
        return cls(float(a), float(b), int(n_cells), gauss_legendre_rule(order))

    @property
    def order(self) -> int:
        return self.rule.order

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dof(self) -> int:
        return self.n_cells * self.order

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node positions ``x_ij``, shape ``(n_cells, order)``."""
        i = np.arange(self.n_cells)[:, None]
        x = self.a + (i + self.rule.nodes[None, :]) * self.h
        x.setflags(write=False)
        return x

    @property
    def interfaces(self) -> np.ndarray:
        return self.a + np.arange(self.n_cells + 1) * self.h

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "DGField1D":
        return DGField1D(self, np.asarray(func(self.nodes), dtype=float))

    def constant(self, c: float) -> "DGField1D":
        return DGField1D(self, np.full((self.n_cells, self.order), float(c)))


def _writable(a) -> bool:
    return isinstance(a, np.ndarray) and a.flags.writeable


@dataclass(eq=False)
class DGField1D:
    """Nodal values ``u_ij`` of a piecewise polynomial on ``grid``."""

    grid: DGGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.array(self.coeffs, dtype=float, copy=None if _writable(self.coeffs) else True)
        shape = (self.grid.n_cells, self.grid.order)
        if self.coeffs.shape != shape:
            raise InvalidArgument(f"coeffs shape {self.coeffs.shape} does not match grid {shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise InvalidArgument("dG coefficients must be finite")

    def __call__(self, x):
        return eval_dg(self, x)

    def copy(self) -> "DGField1D":
        return DGField1D(self.grid, self.coeffs.copy())


@dataclass(eq=False)
class DGField2D:
    """A stack of ``n_y`` dG rows sharing ``grid_x``; row ``r`` sits at ``y_r``.

    ``coeffs`` has shape ``(n_y, n_cells, order)``; ``y_r = y_a + r * (y_b - y_a) / n_y``.
    """

    grid_x: DGGrid
    coeffs: np.ndarray
    y_a: float = 0.0
    y_b: float = 1.0

    def __post_init__(self):
        self.coeffs = np.array(self.coeffs, dtype=float, copy=None if _writable(self.coeffs) else True)
        g = self.grid_x
        if self.coeffs.ndim != 3 or self.coeffs.shape[1:] != (g.n_cells, g.order):
            raise InvalidArgument(
                f"coeffs shape {self.coeffs.shape} does not match (n_y, {g.n_cells}, {g.order})"
            )
        if self.coeffs.shape[0] < 1:
            raise InvalidArgument("n_y must be >= 1")
        if not np.all(np.isfinite(self.coeffs)):
            raise InvalidArgument("dG coefficients must be finite")

    @property
    def n_y(self) -> int:
        return self.coeffs.shape[0]

    @property
    def y(self) -> np.ndarray:
        return self.y_a + np.arange(self.n_y) * (self.y_b - self.y_a) / self.n_y

    @property
    def rows(self) -> list[DGField1D]:
        return [DGField1D(self.grid_x, self.coeffs[r]) for r in range(self.n_y)]

    @classmethod
    def from_rows(cls, rows: list[DGField1D], y_a: float = 0.0, y_b: float = 1.0) -> "DGField2D":
        if not rows:
            raise InvalidArgument("need at least one row")
        grid = rows[0].grid
        if any(r.grid is not grid for r in rows):
            raise InvalidArgument("all rows must share one grid")
        return cls(grid, np.stack([r.coeffs for r in rows]), y_a, y_b)


def _cell_and_local(grid: DGGrid, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = (x - grid.a) / grid.h
    cell = np.floor(t)
    s = t - cell
    cell = cell.astype(np.int64) % grid.n_cells
    # rounding can push s to exactly 1.0 for x just below an interface
    over = s >= 1.0
    if np.any(over):
        s = np.where(over, 0.0, s)
        cell = np.where(over, (cell + 1) % grid.n_cells, cell)
    return cell, s


def eval_cells(grid: DGGrid, coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate the piecewise polynomial with nodal values ``coeffs`` at ``x``.

    ``x`` is wrapped periodically; at an interface the right-sided value is used.
    """
    x = np.asarray(x, dtype=float)
    cell, s = _cell_and_local(grid, x)
    phi = grid.rule.basis(s)
    return np.einsum("...j,...j->...", coeffs[cell], phi)


def eval_dg(f: DGField1D, x):
    """Value of ``f`` at ``x`` (scalar or array); right-sided at cell interfaces."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise InvalidArgument("evaluation point must be finite")
    out = eval_cells(f.grid, f.coeffs, xa)
    return float(out) if out.ndim == 0 else out


def interface_averages(coeffs: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Averaged interface values for all interfaces ``0..n_cells-1``.

    Works on a trailing ``(n_cells, order)`` block, so stacked rows are fine.
    """
    right_limit = coeffs @ rule.left
    left_limit = np.roll(coeffs @ rule.right, 1, axis=-1)
    return 0.5 * (right_limit + left_limit)


def interface_average(f: DGField1D, i: int) -> float:
    """Mean of the one-sided limits at interface ``i`` (``x = a + i*h``)."""
    n = f.grid.n_cells
    rule = f.grid.rule
    plus = f.coeffs[i % n] @ rule.left
    minus = f.coeffs[(i - 1) % n] @ rule.right
    return float(0.5 * (plus + minus))


def mass(f: DGField1D) -> float:
    """Integral of ``f`` over the domain, exact for the piecewise polynomial."""
    return float(f.grid.h * np.sum(f.coeffs @ f.grid.rule.weights))


Reference = Union[DGField1D, DGField2D, Callable]


def inf_norm_diff(f: DGField1D | DGField2D, g: Reference) -> float:
    """Maximum nodal difference between ``f`` and a field or callable ``g``.

    A callable reference receives ``x`` (1D) or ``(x, y)`` broadcast arrays (2D).
    """
    if callable(g) and not isinstance(g, (DGField1D, DGField2D)):
        if isinstance(f, DGField2D):
            x = f.grid_x.nodes[None, :, :]
            y = f.y[:, None, None]
            ref = np.broadcast_to(np.asarray(g(x, y), dtype=float), f.coeffs.shape)
        else:
            ref = np.asarray(g(f.grid.nodes), dtype=float)
        return float(np.max(np.abs(f.coeffs - ref)))
    if type(f) is not type(g) or f.coeffs.shape != g.coeffs.shape:
        raise InvalidArgument("fields have incompatible shapes")
    return float(np.max(np.abs(f.coeffs - g.coeffs)))

"""Periodic 2D grids, the KP linear propagator and grid transfers.

A :class:`GridField2D` stores ``values[iy, ix]`` (x varies fastest) on
``[-Lx, Lx) x [-Ly, Ly)``. Transforms are real-to-complex along x
(``numpy.fft.rfft2``): unnormalized forward, ``1/(n_x n_y)`` on the inverse.
Spectral arrays therefore have shape ``(n_y, n_x // 2 + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dg import DGField2D, DGGrid
from .errors import InvalidArgument

DELTA_DEFAULT = 2.0**-52
PHI_TAYLOR_RADIUS = 0.1
PHI_TAYLOR_TERMS = 16


@dataclass(frozen=True)
class KPParams:
    """Dispersion ``epsilon``, model sign ``lam`` (-1: KP I, +1: KP II), regularization ``delta``."""

    epsilon: float = 0.1
    lam: int = 1
    delta: float = DELTA_DEFAULT

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgument(f"epsilon must be > 0, got {self.epsilon}")
        if self.lam not in (-1, 1):
            raise InvalidArgument(f"lambda must be -1 or +1, got {self.lam}")
        if not self.delta > 0:
            raise InvalidArgument(f"delta must be > 0, got {self.delta}")

    @classmethod
    def model(cls, name: str, epsilon: float = 0.1, delta: float = DELTA_DEFAULT) -> "KPParams":
        key = name.lower().replace(" ", "").replace("-", "")
        if key in ("kp1", "kpi"):
            return cls(epsilon, -1, delta)
        if key in ("kp2", "kpii"):
            return cls(epsilon, 1, delta)
        raise InvalidArgument(f"unknown model {name!r}")


@dataclass(eq=False)
class GridField2D:
    """Samples on the equidistant grid ``x_i = -Lx + i*dx``, ``y_j = -Ly + j*dy``."""

    values: np.ndarray
    Lx: float
    Ly: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise InvalidArgument("values must be a 2D array (n_y, n_x)")
        if not (self.Lx > 0 and self.Ly > 0):
            raise InvalidArgument("domain half-widths must be positive")

    @classmethod
    def sample(cls, func, n_x: int, n_y: int, Lx: float, Ly: float) -> "GridField2D":
        x, y = grid_coords(n_x, Lx), grid_coords(n_y, Ly)
        vals = np.broadcast_to(np.asarray(func(x[None, :], y[:, None]), dtype=float), (n_y, n_x))
        return cls(np.array(vals), Lx, Ly)

    @property
    def n_x(self) -> int:
        return self.values.shape[1]

    @property
    def n_y(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return 2.0 * self.Lx / self.n_x

    @property
    def dy(self) -> float:
        return 2.0 * self.Ly / self.n_y

    @property
    def x(self) -> np.ndarray:
        return grid_coords(self.n_x, self.Lx)

    @property
    def y(self) -> np.ndarray:
        return grid_coords(self.n_y, self.Ly)

    def with_values(self, values: np.ndarray) -> "GridField2D":
        return GridField2D(values, self.Lx, self.Ly)

    def mean(self) -> float:
        return float(self.values.mean())


def grid_coords(n: int, L: float) -> np.ndarray:
    return -L + np.arange(n) * (2.0 * L / n)


@dataclass(eq=False)
class SpectralField2D:
    """``rfft2`` coefficients of a real :class:`GridField2D`."""

    coeffs: np.ndarray
    n_x: int
    Lx: float
    Ly: float

    @property
    def n_y(self) -> int:
        return self.coeffs.shape[0]


def forward(u: GridField2D) -> SpectralField2D:
    return SpectralField2D(np.fft.rfft2(u.values), u.n_x, u.Lx, u.Ly)


def inverse(s: SpectralField2D) -> GridField2D:
    return GridField2D(np.fft.irfft2(s.coeffs, s=(s.n_y, s.n_x)), s.Lx, s.Ly)


def wavenumbers(n: int, L: float) -> np.ndarray:
    """Angular wavenumbers ``pi*m/L`` of a length-``2L`` periodic grid, DFT ordering."""
    if int(n) != n or n < 2 or n % 2:
        raise InvalidArgument(f"n must be an even integer >= 2, got {n}")
    n = int(n)
    m = np.concatenate([np.arange(n // 2), np.arange(-n // 2, 0)])
    return m * (math.pi / L)


def rfft_wavenumbers(n_x: int, n_y: int, Lx: float, Ly: float) -> tuple[np.ndarray, np.ndarray]:
    """``(kx, ky)`` broadcastable to the ``rfft2`` layout ``(n_y, n_x//2 + 1)``."""
    wavenumbers(n_x, Lx)  # validates n_x
    kx = np.arange(n_x // 2 + 1) * (math.pi / Lx)
    ky = wavenumbers(n_y, Ly)
    return kx[None, :], ky[:, None]


def kp_symbol(kx, ky, p: KPParams):
    """Fourier symbol of ``-eps^2 d_x^3 - lam d_x^{-1} d_y^2`` with regularized inverse derivative.

    Real and imaginary parts are formed separately, so ``kx = 0`` is safe.
    """
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    den = kx * kx + p.delta * p.delta
    ky2 = ky * ky
    re = -p.delta * ky2 / den
    im = p.epsilon**2 * kx**3 - p.lam * ky2 * kx / den
    out = re + 1j * im
    return complex(out) if out.ndim == 0 else out


def phi_function(z, order: int):
    """``phi_1(z) = (e^z - 1)/z`` or ``phi_2(z) = (e^z - 1 - z)/z^2``, Taylor near zero."""
    if order not in (1, 2):
        raise InvalidArgument(f"phi order must be 1 or 2, got {order}")
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < PHI_TAYLOR_RADIUS
    out = np.empty(z.shape, dtype=complex)
    zs = z[small]
    # phi_p(z) = sum_m z^m / (m + p)!
    term = np.full(zs.shape, 1.0 / math.factorial(order), dtype=complex)
    acc = term.copy()
    for m in range(1, PHI_TAYLOR_TERMS):
        term = term * zs / (m + order)
        acc += term
    out[small] = acc
    zl = z[~small]
    em1 = np.expm1(zl)
    out[~small] = em1 / zl if order == 1 else (em1 - zl) / (zl * zl)
    return complex(out) if out.ndim == 0 else out


def _propagator_exponent(sigma: np.ndarray, tau: float) -> np.ndarray:
    # Backward steps (tau < 0) keep the damping of the regularized constraint
    # modes, so forward and backward half-steps invert each other elsewhere.
    return abs(tau) * sigma.real + 1j * tau * sigma.imag


@dataclass(eq=False)
class PropagatorTables:
    """Precomputed ``Phi0 = e^{tau sigma}``, ``Phi1 = tau phi_1(tau sigma)``, ``Phi2 = tau phi_2(tau sigma)``."""

    tau: float
    phi0: np.ndarray
    phi1: np.ndarray | None = None
    phi2: np.ndarray | None = None
    shape: tuple = field(default=())

    @classmethod
    def build(cls, tau: float, n_x: int, n_y: int, Lx: float, Ly: float, p: KPParams,
              with_phi: bool = False) -> "PropagatorTables":
        kx, ky = rfft_wavenumbers(n_x, n_y, Lx, Ly)
        sigma = np.broadcast_to(kp_symbol(kx, ky, p), (n_y, n_x // 2 + 1)).copy()
        # +k and -k alias at the x Nyquist frequency; the odd (dispersive)
        # part must vanish there or the real transform breaks the group law
        sigma[:, -1] = sigma[:, -1].real
        z = _propagator_exponent(sigma, tau)
        phi0 = np.exp(z)
        phi1 = phi2 = None
        if with_phi:
            phi1 = tau * phi_function(z, 1)
            phi2 = tau * phi_function(z, 2)
        return cls(tau, phi0, phi1, phi2, (n_y, n_x))


def apply_propagator(u: GridField2D, tau: float, p: KPParams,
                     tables: PropagatorTables | None = None) -> GridField2D:
    """Exact flow ``e^{tau A} u`` of the linear KP part, applied mode by mode."""
    if not np.all(np.isfinite(u.values)):
        raise InvalidArgument("input field must be finite")
    if tables is None:
        tables = PropagatorTables.build(tau, u.n_x, u.n_y, u.Lx, u.Ly, p)
    elif tables.shape != u.values.shape or tables.tau != tau:
        raise InvalidArgument("propagator tables do not match the field or step")
    uh = np.fft.rfft2(u.values)
    return u.with_values(np.fft.irfft2(uh * tables.phi0, s=u.values.shape))


def dg_to_equidistant(f: DGField2D, n_x: int, Lx: float | None = None,
                      Ly: float | None = None) -> GridField2D:
    """Evaluate each dG row at ``n_x`` equidistant points of its domain."""
    g = f.grid_x
    if n_x < 2:
        raise InvalidArgument("n_x must be >= 2")
    x = g.a + np.arange(n_x) * (g.length / n_x)
    cells = np.floor((x - g.a) / g.h).astype(np.int64)
    aligned = _aligned_block(g, n_x)
    if aligned is not None:
        # every cell holds the same equidistant offsets: one small matrix
        vals = np.einsum("rcj,qj->rcq", f.coeffs, aligned).reshape(f.n_y, n_x)
    else:
        cells = np.clip(cells, 0, g.n_cells - 1)
        s = (x - g.a) / g.h - cells
        phi = g.rule.basis(s)
        vals = np.einsum("rqj,qj->rq", f.coeffs[:, cells, :], phi)
    Lx = 0.5 * g.length if Lx is None else Lx
    Ly = 0.5 * (f.y_b - f.y_a) if Ly is None else Ly
    return GridField2D(vals, Lx, Ly)


def _aligned_block(g: DGGrid, n_x: int) -> np.ndarray | None:
    """Basis at the equidistant offsets when each cell holds ``n_x / n_cells`` points."""
    if n_x % g.n_cells:
        return None
    per = n_x // g.n_cells
    return g.rule.basis(np.arange(per) / per)


def cell_transfer_available(g: DGGrid, n_x: int) -> bool:
    """True when the equidistant grid puts exactly ``order`` points in each cell."""
    return n_x == g.n_cells * g.order


def equidistant_to_dg(u: GridField2D, grid: DGGrid, stencil: str = "local") -> DGField2D:
    """Interpolate equidistant samples to the Gauss-Legendre nodes of ``grid``.

    ``stencil="local"`` uses the ``order + 2`` nearest samples (periodic) at
    every node. ``stencil="cell"`` needs ``n_x == n_cells * order`` and uses the
    ``order`` samples inside each cell, which makes it the exact inverse of
    :func:`dg_to_equidistant` on that grid.
    """
    if abs(grid.a + u.Lx) > 1e-12 * u.Lx or abs(grid.b - u.Lx) > 1e-12 * u.Lx:
        raise InvalidArgument("dG grid must span [-Lx, Lx)")
    o = grid.order
    if stencil == "cell":
        if not cell_transfer_available(grid, u.n_x):
            raise InvalidArgument("cell stencil needs n_x == n_cells * order")
        offsets = np.arange(o) / o
        M = _lagrange_matrix(offsets, grid.rule.nodes)
        vals = u.values.reshape(u.n_y, grid.n_cells, o) @ M.T
        return DGField2D(grid, vals, -u.Ly, u.Ly)
    if stencil != "local":
        raise InvalidArgument(f"unknown stencil {stencil!r}")
    width = o + 2
    if u.n_x < width:
        raise InvalidArgument(f"need n_x >= order + 2 = {width}, got {u.n_x}")
    pos = (grid.nodes.ravel() - grid.a) / u.dx
    first = np.floor(pos - 0.5 * (width - 1)).astype(np.int64)
    offs = pos - first
    idx = (first[:, None] + np.arange(width)[None, :]) % u.n_x
    # stencil-local barycentric weights on integer nodes 0..width-1
    j = np.arange(width)
    bw = np.array([(-1.0) ** k * math.comb(width - 1, k) for k in j])
    diff = offs[:, None] - j[None, :]
    hit = np.isclose(diff, 0.0, atol=1e-14, rtol=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tmp = bw[None, :] / diff
        W = tmp / tmp.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    if rows.any():
        W[rows] = hit[rows].astype(float)
    vals = np.einsum("rnw,nw->rn", u.values[:, idx], W)
    return DGField2D(grid, vals.reshape(u.n_y, grid.n_cells, o), -u.Ly, u.Ly)


def _lagrange_matrix(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """``M[i, j] = l_j(dst_i)`` for the Lagrange basis through ``src``."""
    n = len(src)
    M = np.ones((len(dst), n))
    for j in range(n):
        for k in range(n):
            if k != j:
                M[:, j] *= (dst - src[k]) / (src[j] - src[k])
    return M


class ProjectionTransfer:
    """L2-orthogonal transfers between ``n_x`` equidistant samples and a dG grid.

    ``to_dg`` projects the trigonometric interpolant of the samples onto the
    piecewise polynomials; ``to_equidistant`` is its adjoint, which samples the
    Fourier modes of a dG function that the equidistant grid resolves (the
    Nyquist cosine at half weight). Both maps are built from FFTs
    along the cells and never increase the L2 norm, so alternating them with
    the unitary linear propagator cannot amplify grid-scale noise.
    """

    def __init__(self, n_x: int, grid: DGGrid):
        if int(n_x) != n_x or n_x < 2 or n_x % 2:
            raise InvalidArgument(f"n_x must be an even integer >= 2, got {n_x}")
        self.n_x = n_x = int(n_x)
        self.grid = grid
        N = grid.n_cells
        rule = grid.rule
        kk = np.arange(n_x // 2 + 1)
        theta = 2.0 * math.pi * kk / N  # k * h
        n_q = max(32, int(theta[-1]) + 2 * grid.order + 24)
        s, w = np.polynomial.legendre.leggauss(n_q)
        s = 0.5 * (s + 1.0)
        w = 0.5 * w
        # G[k, j] = (1/w_j) int_0^1 exp(i theta_k s) l_j(s) ds
        G = (np.exp(1j * np.outer(theta, s)) * w) @ rule.basis(s) / rule.weights
        gamma = np.full(kk.size, 2.0)
        gamma[0] = 1.0
        gamma[-1] = 1.0
        self._fold = kk % N
        self._to_dg = gamma[:, None] * G / n_x
        # exact adjoint of _to_dg in the grid and dG inner products
        back = np.conj(G) * rule.weights * (n_x / N)
        self._to_eq = back

    def _check(self, n_x: int, n_cells: int):
        if n_x != self.n_x or n_cells != self.grid.n_cells:
            raise InvalidArgument("field does not match the transfer sizes")

    def to_dg(self, values: np.ndarray) -> np.ndarray:
        """``(rows, n_x)`` samples to ``(rows, n_cells, order)`` nodal coefficients."""
        values = np.asarray(values, dtype=float)
        self._check(values.shape[-1], self.grid.n_cells)
        X = np.fft.rfft(values, axis=-1)
        A = X[..., :, None] * self._to_dg
        N = self.grid.n_cells
        B = np.zeros(values.shape[:-1] + (N, self.grid.order), dtype=complex)
        for start in range(0, A.shape[-2], N):
            stop = min(start + N, A.shape[-2])
            B[..., : stop - start, :] += A[..., start:stop, :]
        return (np.fft.ifft(B, axis=-2) * N).real

    def to_equidistant(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse direction of :meth:`to_dg`; returns ``(rows, n_x)`` samples."""
        coeffs = np.asarray(coeffs, dtype=float)
        self._check(self.n_x, coeffs.shape[-2])
        F = np.fft.fft(coeffs, axis=-2)
        X = np.einsum("...kj,kj->...k", F[..., self._fold, :], self._to_eq)
        X[..., -1] = X[..., -1].real
        return np.fft.irfft(X, n=self.n_x, axis=-1)

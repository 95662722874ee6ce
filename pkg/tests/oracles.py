"""Independent reference computations used by the tests.

Nothing here imports the package under test.
"""

import math

import mpmath
import numpy as np


def gl_rule_01(o):
    """Gauss-Legendre nodes and weights on [0, 1] from NumPy."""
    x, w = np.polynomial.legendre.leggauss(o)
    return 0.5 * (x + 1.0), 0.5 * w


def bessel_integral(k, z, m=None):
    """``J_k(z) = (1/2pi) int_0^{2pi} cos(k t - z sin t) dt`` by the periodic trapezoid rule."""
    m = m or int(2 * (abs(z) + k) + 80)
    t = 2 * math.pi * np.arange(m) / m
    return float(np.mean(np.cos(k * t - z * np.sin(t))))


def burgers_bisection(u0, t, x, bound):
    """Pre-shock Burgers solution via bisection on ``x = xi + t u0(xi)``."""
    x = np.asarray(x, dtype=float)
    lo = x - t * bound - 1e-9
    hi = x + t * bound + 1e-9
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        f = mid + t * u0(mid) - x
        lo = np.where(f < 0, mid, lo)
        hi = np.where(f < 0, hi, mid)
    return u0(0.5 * (lo + hi))


def l2_project(func, a, b, n_cells, o, q=40):
    """Nodal coefficients of the cellwise L2 projection, by brute-force quadrature."""
    h = (b - a) / n_cells
    nodes, weights = gl_rule_01(o)
    sq, wq = gl_rule_01(q)
    # Lagrange basis at the fine points
    L = np.ones((q, o))
    for j in range(o):
        for m in range(o):
            if m != j:
                L[:, j] *= (sq - nodes[m]) / (nodes[j] - nodes[m])
    xs = a + h * (np.arange(n_cells)[:, None] + sq[None, :])
    return (func(xs) * wq) @ L / weights


def phi_exact(z, order):
    """``phi_1`` or ``phi_2`` in extended precision, digits scaled to beat cancellation."""
    def one(v):
        v = complex(v)
        if v == 0:
            return 1.0 / math.factorial(order)
        digits = 30 + int(max(0.0, -math.log10(abs(v)))) * order
        with mpmath.workdps(digits):
            w = mpmath.mpc(v)
            e = mpmath.expm1(w)
            return complex(e / w if order == 1 else (e - w) / (w * w))

    z = np.asarray(z, dtype=complex)
    return np.vectorize(one, otypes=[complex])(z) if z.ndim else one(z)


def kp_mode_multiplier(kx, ky, eps, lam, delta, tau):
    """Exact factor picked up by the mode ``exp(i(kx x + ky y))`` under the linear flow."""
    den = kx * kx + delta * delta
    re = -delta * ky * ky / den
    im = eps * eps * kx**3 - lam * ky * ky * kx / den
    return np.exp(abs(tau) * re + 1j * tau * im)


def trig_max(values, L, m=64):
    """Peak of the trigonometric interpolant by dense zero padding."""
    v = np.asarray(values, dtype=float)
    n = v.size
    X = np.fft.rfft(v)
    return float(np.fft.irfft(X * m, n=m * n).max())

"""Reference solutions for Burgers' equation with sine initial data."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgument

_RESCALE = 1e250


def _bessel_series(k: int, z: float) -> float:
    half = 0.5 * z
    if half == 0.0:  # z/2 underflowed
        return 1.0 if k == 0 else 0.0
    lead = math.exp(k * math.log(abs(half)) - math.lgamma(k + 1))
    if half < 0 and k % 2:
        lead = -lead
    q = -half * half
    term = 1.0
    total = 1.0
    m = 0
    while True:
        m += 1
        term *= q / (m * (m + k))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return lead * total


def _bessel_miller(k: int, z: float) -> float:
    # Backward recurrence from far above max(k, z), normalized by
    # J_0 + 2 * sum J_{2m} = 1. Only valid for z > 0.
    big = max(k, z)
    start = int(big + 30 + 12.0 * big ** (1.0 / 3.0) + math.sqrt(60.0 * big))
    start += start % 2
    two_over_z = 2.0 / z
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    result = 0.0
    for n in range(start, 0, -1):
        j_prev = n * two_over_z * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            result /= _RESCALE
        if n - 1 == k:
            result = j_cur
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return result / norm


def bessel_j(k: int, z: float) -> float:
    """Bessel function of the first kind ``J_k(z)`` for integer ``0 <= k <= 300``, ``|z| <= 300``."""
    if int(k) != k or not 0 <= k <= 300:
        raise InvalidArgument(f"order must be an integer in [0, 300], got {k}")
    if not math.isfinite(z) or abs(z) > 300:
        raise InvalidArgument(f"argument must satisfy |z| <= 300, got {z}")
    k = int(k)
    z = float(z)
    if z == 0.0:
        return 1.0 if k == 0 else 0.0
    sign = -1.0 if (z < 0 and k % 2) else 1.0
    az = abs(z)
    if 0.25 * az * az <= k + 1 or az < 1.0:
        return sign * _bessel_series(k, az)
    return sign * _bessel_miller(k, az)


def sine_series_coefficients(t: float, n_terms: int) -> np.ndarray:
    """Fourier sine coefficients ``-2 J_k(-k t) / (k t)``, ``k = 1..n_terms``."""
    return np.array([-2.0 * bessel_j(k, -k * t) / (k * t) for k in range(1, n_terms + 1)])


def burgers_sine_exact(t: float, x, n_terms: int = 200):
    """Truncated Bessel series for the solution of ``u_t + u u_x = 0``, ``u(0, x) = sin x``.

    Only meaningful before the shock forms at ``t = 1``.
    """
    if not 0.0 < t < 1.0:
        raise InvalidArgument(f"t must lie in (0, 1), got {t}")
    if int(n_terms) != n_terms or n_terms < 1:
        raise InvalidArgument(f"n_terms must be a positive integer, got {n_terms}")
    coef = sine_series_coefficients(t, int(n_terms))
    xa = np.asarray(x, dtype=float)
    k = np.arange(1, int(n_terms) + 1)
    out = np.sin(xa[..., None] * k) @ coef
    return float(out) if xa.ndim == 0 else out


def burgers_sine_characteristics(t: float, x, iterations: int = 200):
    """Solve ``x = xi + t sin(xi)`` by bisection and return ``sin(xi)``.

    Independent of the series; valid for ``0 <= t < 1``.
    """
    if not 0.0 <= t < 1.0:
        raise InvalidArgument(f"t must lie in [0, 1), got {t}")
    xa = np.asarray(x, dtype=float)
    lo = xa - t - 1e-12
    hi = xa + t + 1e-12
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = mid + t * np.sin(mid) < xa
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(xa))):
            break
    out = np.sin(0.5 * (lo + hi))
    return float(out) if xa.ndim == 0 else out


def burgers_characteristics(u0, t: float, x, speed_bound: float, iterations: int = 200):
    """Pre-shock solution of ``u_t + u u_x = 0`` for any initial value ``u0``.

    Solves ``x = xi + t u0(xi)`` by bisection on ``[x - t*speed_bound, x + t*speed_bound]``;
    ``speed_bound`` must bound ``|u0|``. Valid while ``xi -> xi + t u0(xi)`` is increasing.
    """
    if not t >= 0.0:
        raise InvalidArgument(f"t must be >= 0, got {t}")
    xa = np.asarray(x, dtype=float)
    pad = t * abs(speed_bound) + 1e-12
    lo = xa - pad
    hi = xa + pad
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = mid + t * u0(mid) < xa
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(xa))):
            break
    out = u0(0.5 * (lo + hi))
    return float(out) if xa.ndim == 0 else np.asarray(out)

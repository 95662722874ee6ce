"""Vectorized NumPy implementation of the sLdG kernels.

Every function works on a stack of rows ``u[R, N, o]`` at once and has the
same signature as its counterpart in the compiled ``_sldg_c`` module.
"""

from __future__ import annotations

import numpy as np

from ..errors import SingularJacobian, StepRejected

FIXED, SECANT, NEWTON = 0, 1, 2
DEGENERATE_OVERLAP = 1e-14
NEWTON_SINGULAR = 1e-12
SECANT_STALL = 1e-300


def _basis(s: np.ndarray, nodes: np.ndarray, bary: np.ndarray) -> np.ndarray:
    diff = s[..., None] - nodes
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tmp = bary / diff
        phi = tmp / tmp.sum(axis=-1, keepdims=True)
    if hit.any():
        rows = hit.any(axis=-1)
        phi[rows] = hit[rows]
    return phi


def _eval_global(u, rows, x, a, h, nodes, bary):
    n_cells = u.shape[1]
    t = (x - a) / h
    cell = np.floor(t)
    s = t - cell
    cell = cell.astype(np.int64) % n_cells
    return np.einsum("pj,pj->p", u[rows, cell], _basis(s, nodes, bary))


def trace_points(u, rows, x, a, h, shift, nodes, bary, dmat, method, max_iter, tol):
    """Solve ``alpha = x - shift * u(alpha)`` for every point.

    ``rows[p]`` selects the row of ``u`` used for point ``p``. Returns the foot
    points and the per-point iteration counts.
    """
    x = np.asarray(x, dtype=float)
    rows = np.asarray(rows, dtype=np.int64)
    alpha = x.copy()
    iters = np.zeros(x.shape, dtype=np.int64)
    active = np.ones(x.shape, dtype=bool)
    if max_iter < 1:
        return alpha, iters

    def ev(idx, pts):
        return _eval_global(u, rows[idx], pts, a, h, nodes, bary)

    if method == FIXED:
        for _ in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            new = x[idx] - shift * ev(idx, alpha[idx])
            step = np.abs(new - alpha[idx])
            alpha[idx] = new
            iters[idx] += 1
            if tol > 0:
                active[idx[step <= tol]] = False
    elif method == SECANT:
        g_prev = -shift * ev(np.arange(x.size), x)
        prev = alpha.copy()
        alpha = x + g_prev
        iters[:] = 1
        if tol > 0:
            active &= np.abs(g_prev) > tol
        for _ in range(1, max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            cur = alpha[idx]
            g = x[idx] - shift * ev(idx, cur) - cur
            denom = g - g_prev[idx]
            stalled = np.abs(denom) < SECANT_STALL
            safe = np.where(stalled, 1.0, denom)
            new = np.where(stalled, cur, cur - (cur - prev[idx]) * g / safe)
            prev[idx] = cur
            g_prev[idx] = g
            alpha[idx] = new
            iters[idx] += np.where(stalled, 0, 1)
            done = stalled
            if tol > 0:
                done = done | (np.abs(new - cur) <= tol)
            active[idx[done]] = False
    elif method == NEWTON:
        du = np.einsum("rcj,kj->rck", u, dmat) / h
        for _ in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            cur = alpha[idx]
            val = ev(idx, cur)
            der = _eval_global(du, rows[idx], cur, a, h, nodes, bary)
            den = 1.0 + shift * der
            bad = np.abs(den) < NEWTON_SINGULAR
            if bad.any():
                p = idx[np.argmax(bad)]
                raise SingularJacobian(float(x[p]), int(rows[p]))
            new = cur + (x[idx] - shift * val - cur) / den
            alpha[idx] = new
            iters[idx] += 1
            if tol > 0:
                active[idx[np.abs(new - cur) <= tol]] = False
    else:
        raise ValueError(f"unknown characteristic solver {method}")
    return alpha, iters


def sldg_rows(u, a, h, shift, nodes, weights, bary, left, right, dmat, method, max_iter, tol):
    """One sLdG step of ``u_t + (shift/tau) u u_x = 0`` on every row of ``u``.

    ``shift`` is the time step times the advection-speed factor. Returns the
    new coefficients and the largest iteration count used by any foot point.
    """
    u = np.ascontiguousarray(u, dtype=float)
    R, N, o = u.shape
    ut = 0.5 * (u @ left + np.roll(u @ right, 1, axis=1))
    xl = a + np.arange(N) * h
    A = xl + shift * ut
    B = a + np.arange(1, N + 1) * h + shift * np.roll(ut, -1, axis=1)
    bad = (B - A) <= 0.0
    if bad.any():
        r, i = np.unravel_index(np.argmax(bad), bad.shape)
        raise StepRejected(int(i), int(r))

    mlo = np.floor((A - a) / h).astype(np.int64)
    mhi = np.ceil((B - a) / h).astype(np.int64) - 1
    n_targets = int(np.max(mhi - mlo)) + 1
    row_of = np.broadcast_to(np.arange(R)[:, None], (R, N))
    cell_of = np.broadcast_to(np.arange(N)[None, :], (R, N))
    scale = 1.0 / (h * weights)
    out = np.zeros(R * N * o)
    max_used = 0
    for k in range(n_targets):
        m = mlo + k
        lo = a + m * h
        c = np.maximum(A, lo)
        d = np.minimum(B, lo + h)
        ok = (m <= mhi) & ((d - c) >= DEGENERATE_OVERLAP * h)
        if not ok.any():
            continue
        r = row_of[ok]
        i = cell_of[ok]
        c = c[ok]
        width = d[ok] - c
        mk = m[ok]
        xq = c[:, None] + width[:, None] * nodes[None, :]
        P = xq.shape[0]
        alpha, it = trace_points(
            u, np.repeat(r, o), xq.ravel(), a, h, shift, nodes, bary, dmat, method, max_iter, tol
        )
        max_used = max(max_used, int(it.max(initial=0)))
        # source polynomial of cell i, extended beyond its cell, at the foot points
        sloc = (alpha.reshape(P, o) - (a + i[:, None] * h)) / h
        sloc -= N * np.round((sloc - 0.5) / N)
        vals = np.einsum("prj,prj->pr", u[r, i][:, None, :].repeat(o, axis=1), _basis(sloc, nodes, bary))
        phi = _basis((xq - lo[ok][:, None]) / h, nodes, bary)
        contrib = np.einsum("pr,prl->pl", (width[:, None] * weights[None, :]) * vals, phi) * scale
        target = ((r * N + mk % N)[:, None] * o + np.arange(o)[None, :]).ravel()
        out += np.bincount(target, weights=contrib.ravel(), minlength=R * N * o)
    return out.reshape(R, N, o), max_used

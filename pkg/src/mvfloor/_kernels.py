"""Compiled inner loops for the objective oracles.

These mirror the vectorized numpy code in :mod:`mvfloor.objective`, which
stays the readable reference; the test-suite checks that both agree.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def hpwl_grad(x, y, padx, pady, ptr, pin, offx, offy, gx, gy):
    """Wirelength over CSR nets; adds the subgradient into ``gx``/``gy``.

    Pins of a net are ordered pads first, then modules by id, and only a
    strictly better value replaces the incumbent extreme, so ties go to
    the first pin.
    """
    n = x.size
    total = 0.0
    for e in range(ptr.size - 1):
        lo, hi = ptr[e], ptr[e + 1]
        for axis in range(2):
            best_hi, best_lo = -np.inf, np.inf
            arg_hi, arg_lo = -1, -1
            for k in range(lo, hi):
                p = pin[k]
                if axis == 0:
                    v = (x[p] + offx[k]) if p < n else padx[p - n]
                else:
                    v = (y[p] + offy[k]) if p < n else pady[p - n]
                if v > best_hi:
                    best_hi, arg_hi = v, p
                if v < best_lo:
                    best_lo, arg_lo = v, p
            total += best_hi - best_lo
            g = gx if axis == 0 else gy
            if arg_hi < n:
                g[arg_hi] += 1.0
            if arg_lo < n:
                g[arg_lo] -= 1.0
    return total


@njit(cache=True, nogil=True)
def _axis_overlap(d, wi, wj):
    """(overlap length, slope wrt the first center) for signed distance ``d``."""
    a = abs(d)
    half_diff = abs(wi - wj) / 2
    half_sum = (wi + wj) / 2
    if a <= half_diff:
        length = max(wi, wj)
    elif a <= half_sum:
        length = half_sum - a
    else:
        return 0.0, 0.0
    slope = 0.0
    if a >= half_diff:
        slope = -1.0 if d > 0 else (1.0 if d < 0 else 0.0)
    return length, slope


@njit(cache=True, nogil=True)
def overlap_grad(x, y, w, h, gx, gy, scale):
    """Total pairwise overlap; adds ``scale`` times its subgradient into ``gx``/``gy``.

    With ``scale == 0`` only the value is computed.
    """
    n = x.size
    total = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            if abs(dx) > (w[i] + w[j]) / 2:
                continue
            dy = y[i] - y[j]
            if abs(dy) > (h[i] + h[j]) / 2:
                continue
            ox, sx = _axis_overlap(dx, w[i], w[j])
            oy, sy = _axis_overlap(dy, h[i], h[j])
            total += ox * oy
            if scale != 0.0:
                gx[i] += scale * sx * oy
                gx[j] -= scale * sx * oy
                gy[i] += scale * sy * ox
                gy[j] -= scale * sy * ox
    return total


@njit(cache=True, nogil=True)
def _overlap_grad_raw(x, y, w, h, gx, gy):
    return overlap_grad(x, y, w, h, gx, gy, 1.0)


@njit(cache=True, nogil=True)
def f_eval(x, y, w, h, padx, pady, ptr, pin, offx, offy, width, height, alpha, lam, mu, out_g):
    """Penalized global objective; writes the subgradient into ``out_g`` (length 2n)."""
    n = x.size
    gx = np.zeros(n)
    gy = np.zeros(n)
    wl = hpwl_grad(x, y, padx, pady, ptr, pin, offx, offy, gx, gy)
    dgx = np.zeros(n)
    dgy = np.zeros(n)
    d = _overlap_grad_raw(x, y, w, h, dgx, dgy)
    bsum = 0.0
    for i in range(n):
        gx[i] *= alpha
        gy[i] *= alpha
    if d > 0:
        s = lam / (2.0 * math.sqrt(d))
        for i in range(n):
            gx[i] += s * dgx[i]
            gy[i] += s * dgy[i]
    if width >= 0:
        for i in range(n):
            b0 = w[i] / 2 - x[i]
            b1 = w[i] / 2 + x[i] - width
            b2 = h[i] / 2 - y[i]
            b3 = h[i] / 2 + y[i] - height
            if b0 > 0:
                bsum += b0
                gx[i] -= mu
            if b1 > 0:
                bsum += b1
                gx[i] += mu
            if b2 > 0:
                bsum += b2
                gy[i] -= mu
            if b3 > 0:
                bsum += b3
                gy[i] += mu
    for i in range(n):
        out_g[i] = gx[i]
        out_g[n + i] = gy[i]
    return alpha * wl + lam * math.sqrt(d) + mu * bsum


@njit(cache=True, nogil=True)
def f_tilde_eval(x, y, w, h, width, height, lam0, mu0, out_g):
    """Smooth legalization objective; writes the subgradient into ``out_g``."""
    n = x.size
    gx = np.zeros(n)
    gy = np.zeros(n)
    d = overlap_grad(x, y, w, h, gx, gy, lam0)
    bsq = 0.0
    if width >= 0:
        for i in range(n):
            b0 = max(0.0, w[i] / 2 - x[i])
            b1 = max(0.0, w[i] / 2 + x[i] - width)
            b2 = max(0.0, h[i] / 2 - y[i])
            b3 = max(0.0, h[i] / 2 + y[i] - height)
            bsq += b0 * b0 + b1 * b1 + b2 * b2 + b3 * b3
            gx[i] += mu0 * 2.0 * (b1 - b0)
            gy[i] += mu0 * 2.0 * (b3 - b2)
    for i in range(n):
        out_g[i] = gx[i]
        out_g[n + i] = gy[i]
    return lam0 * d + mu0 * bsq

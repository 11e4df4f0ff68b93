"""Compiled inner loops for the simulator.

Couplings are passed as flat arrays: ``src[k]`` feels ``coef[k] * f(theta[dst[k]] - theta[src[k]])``
with ``kind[k]`` 0 for attractive and 1 for repulsive. Indices are 0-based.
Kernels report barrier hits through status codes instead of raising.
"""
import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

OK = 0
BARRIER = 1
COLLAPSE = 2

_STACK = 64


@njit(cache=True, nogil=True)
def centred(d):
    """Representative of ``d`` in (-pi, pi]; exact whenever |d| <= pi."""
    if -math.pi < d <= math.pi:
        return d
    w = d - TWO_PI * math.floor(d / TWO_PI + 0.5)
    if w <= -math.pi:
        w += TWO_PI
    elif w > math.pi:
        w -= TWO_PI
    return w


@njit(cache=True, nogil=True)
def rhs_into(theta, omega, src, dst, coef, kind, guard, out):
    for i in range(theta.shape[0]):
        out[i] = omega[i]
    for k in range(src.shape[0]):
        i = src[k]
        w = centred(theta[dst[k]] - theta[i])
        h = 0.5 * w
        if kind[k] == 0:
            if abs(w) >= math.pi - guard:
                return BARRIER
            out[i] += coef[k] * math.tan(h)
        else:
            # -cot(w/2) has period 2pi in w, so the centred value serves (0, 2pi) too
            if abs(w) <= guard:
                return BARRIER
            out[i] -= coef[k] * math.cos(h) / math.sin(h)
    return OK


@njit(cache=True, nogil=True)
def rk4_into(theta, h, omega, src, dst, coef, kind, guard, out, k1, k2, k3, k4, tmp):
    n = theta.shape[0]
    if rhs_into(theta, omega, src, dst, coef, kind, guard, k1) != OK:
        return BARRIER
    for i in range(n):
        tmp[i] = theta[i] + 0.5 * h * k1[i]
    if rhs_into(tmp, omega, src, dst, coef, kind, guard, k2) != OK:
        return BARRIER
    for i in range(n):
        tmp[i] = theta[i] + 0.5 * h * k2[i]
    if rhs_into(tmp, omega, src, dst, coef, kind, guard, k3) != OK:
        return BARRIER
    for i in range(n):
        tmp[i] = theta[i] + h * k3[i]
    if rhs_into(tmp, omega, src, dst, coef, kind, guard, k4) != OK:
        return BARRIER
    for i in range(n):
        out[i] = theta[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return OK


@njit(cache=True, nogil=True)
def advance(theta, h, min_step, omega, src, dst, coef, kind, guard):
    """One nominal step of length ``h``, split by halving around barrier hits.

    Returns (status, new_theta, halvings, smallest_substep).
    """
    n = theta.shape[0]
    cur = theta.copy()
    nxt = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    stack = np.empty(_STACK)
    stack[0] = h
    top = 1
    halvings = 0
    smallest = h
    while top > 0:
        top -= 1
        sub = stack[top]
        if rk4_into(cur, sub, omega, src, dst, coef, kind, guard, nxt, k1, k2, k3, k4, tmp) == OK:
            for i in range(n):
                cur[i] = nxt[i]
            continue
        half = 0.5 * sub
        if half < min_step or top + 2 > _STACK:
            return COLLAPSE, cur, halvings, smallest
        halvings += 1
        if half < smallest:
            smallest = half
        stack[top] = half
        stack[top + 1] = half
        top += 2
    return OK, cur, halvings, smallest


@njit(cache=True, nogil=True)
def barrier_winding(theta, pa, pb, pkind, out):
    """Which sheet between consecutive barriers each coupled pair sits on."""
    for k in range(pa.shape[0]):
        d = theta[pb[k]] - theta[pa[k]]
        if pkind[k] == 0:
            out[k] = math.floor((d + math.pi) / TWO_PI)
        else:
            out[k] = math.floor(d / TWO_PI)


@njit(cache=True, nogil=True)
def integrate(theta0, first_step, nsteps, h, min_step, omega, src, dst, coef, kind, guard,
              pa, pb, pkind, ev_step, ev_pair, ev_from, ev_to):
    """Run ``nsteps`` nominal steps, logging every change of barrier sheet.

    Returns (status, theta, steps_done, n_events, halvings).
    """
    theta = theta0.copy()
    npairs = pa.shape[0]
    before = np.empty(npairs, dtype=np.int64)
    after = np.empty(npairs, dtype=np.int64)
    barrier_winding(theta, pa, pb, pkind, before)
    n_events = 0
    cap = ev_step.shape[0]
    total_halvings = 0
    for s in range(nsteps):
        status, new, halvings, smallest = advance(theta, h, min_step, omega, src, dst, coef, kind, guard)
        total_halvings += halvings
        if status != OK:
            return status, theta, s, n_events, total_halvings
        theta = new
        barrier_winding(theta, pa, pb, pkind, after)
        for k in range(npairs):
            if after[k] != before[k]:
                if n_events < cap:
                    ev_step[n_events] = first_step + s + 1
                    ev_pair[n_events] = k
                    ev_from[n_events] = before[k]
                    ev_to[n_events] = after[k]
                n_events += 1
                before[k] = after[k]
    return OK, theta, nsteps, n_events, total_halvings

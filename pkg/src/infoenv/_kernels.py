"""Hot inner loops, each in a numba flavour and a pure-numpy flavour.

The public names at the bottom dispatch on :data:`infoenv._accel.USE_NUMBA`.
Both flavours are importable directly (``*_nb`` / ``*_np``) so the test
suite and the benchmark can compare them.
"""

from __future__ import annotations

import bisect
import math

import numpy as np

from ._accel import USE_NUMBA, njit


# --------------------------------------------------------------------------
# FCFS queue: departures and virtual delays
# --------------------------------------------------------------------------

@njit
def departures_nb(arrivals, service):
    n = arrivals.shape[0]
    cum_a = np.empty(n)
    cum_d = np.empty(n)
    a = 0.0
    d = 0.0
    for t in range(n):
        a += arrivals[t]
        d = min(a, d + service[t])
        cum_a[t] = a
        cum_d[t] = d
    return cum_a, cum_d


def departures_np(arrivals, service):
    cum_a = np.cumsum(arrivals)
    # Lindley recursion in closed form: B(t) = X(t) - min(0, min_{u<=t} X(u))
    x = np.cumsum(arrivals - service)
    backlog = x - np.minimum(np.minimum.accumulate(x), 0.0)
    return cum_a, cum_a - backlog


@njit
def delays_nb(cum_a, cum_d, rtol):
    n = cum_a.shape[0]
    out = np.empty(n, dtype=np.int64)
    u = 0
    for t in range(n):
        target = cum_a[t] - rtol * max(1.0, cum_a[t])
        if u < t:
            u = t
        while u < n and cum_d[u] < target:
            u += 1
        out[t] = u - t if u < n else -1
    return out


def delays_np(cum_a, cum_d, rtol):
    n = cum_a.shape[0]
    target = cum_a - rtol * np.maximum(1.0, cum_a)
    idx = np.searchsorted(cum_d, target, side="left")
    t = np.arange(n)
    idx = np.maximum(idx, t)
    out = idx - t
    out[idx >= n] = -1
    return out.astype(np.int64)


# --------------------------------------------------------------------------
# Markov chain sampling
# --------------------------------------------------------------------------

@njit
def markov_sample_nb(cum_rows, x0, uniforms):
    n = uniforms.shape[0]
    m = cum_rows.shape[1]
    out = np.empty(n, dtype=np.int64)
    state = x0
    out[0] = state
    for k in range(1, n):
        row = cum_rows[state]
        u = uniforms[k]
        j = 0
        while j < m - 1 and row[j] <= u:
            j += 1
        state = j
        out[k] = state
    return out


def markov_sample_np(cum_rows, x0, uniforms):
    n = uniforms.shape[0]
    m = cum_rows.shape[1]
    rows = [list(r) for r in cum_rows]
    us = uniforms.tolist()
    out = [0] * n
    state = int(x0)
    out[0] = state
    for k in range(1, n):
        state = min(bisect.bisect_right(rows[state], us[k]), m - 1)
        out[k] = state
    return np.asarray(out, dtype=np.int64)


# --------------------------------------------------------------------------
# Recurrence times (slots since the previous occurrence, 0 if none)
# --------------------------------------------------------------------------

@njit
def recurrence_nb(symbols, n_symbols):
    last = np.full(n_symbols, -1, dtype=np.int64)
    out = np.zeros(symbols.shape[0], dtype=np.int64)
    for t in range(symbols.shape[0]):
        x = symbols[t]
        if last[x] >= 0:
            out[t] = t - last[x]
        last[x] = t
    return out


def recurrence_np(symbols, n_symbols):
    order = np.argsort(symbols, kind="stable")
    xs = symbols[order]
    out = np.zeros(symbols.shape[0], dtype=np.int64)
    same = xs[1:] == xs[:-1]
    cur = order[1:][same]
    out[cur] = cur - order[:-1][same]
    return out


# --------------------------------------------------------------------------
# Log-scaled Markov MGF path: acc_k = ln(P (L'Q)^(k-1) L' 1) for k = 1..n.
# With fresh=False the path resumes from a normalized state vector v0.
# --------------------------------------------------------------------------

@njit
def markov_log_path_nb(v0, q, lsc, n, acc0, fresh):
    m = v0.shape[0]
    v = v0.copy()
    w = np.empty(m)
    out = np.empty(n)
    acc = acc0
    for k in range(n):
        if k > 0 or not fresh:
            for j in range(m):
                w[j] = 0.0
            for i in range(m):
                vi = v[i]
                if vi != 0.0:
                    for j in range(m):
                        w[j] += vi * q[i, j]
            for j in range(m):
                v[j] = w[j] * lsc[j]
        s = 0.0
        for j in range(m):
            s += v[j]
        acc += math.log(s)
        for j in range(m):
            v[j] /= s
        out[k] = acc
    return out, v, acc


def markov_log_path_np(v0, q, lsc, n, acc0, fresh):
    v = np.array(v0, dtype=float)
    out = np.empty(n)
    acc = acc0
    for k in range(n):
        if k > 0 or not fresh:
            v = (v @ q) * lsc
        s = v.sum()
        acc += math.log(s)
        v = v / s
        out[k] = acc
    return out, v, acc


# --------------------------------------------------------------------------
# Perron root by shifted power iteration with Collatz-Wielandt bracketing
# --------------------------------------------------------------------------

@njit
def perron_root_nb(mat, rtol, maxiter):
    m = mat.shape[0]
    v = np.full(m, 1.0 / m)
    w = np.empty(m)
    shift = 0.0
    lo = 0.0
    hi = 0.0
    for it in range(maxiter):
        for j in range(m):
            w[j] = 0.0
        for i in range(m):
            vi = v[i]
            for j in range(m):
                w[j] += vi * mat[i, j]
        lo = np.inf
        hi = 0.0
        for j in range(m):
            r = w[j] / v[j]
            if r < lo:
                lo = r
            if r > hi:
                hi = r
        if hi - lo <= rtol * lo:
            return 0.5 * (lo + hi), it + 1, True
        shift = 0.5 * lo
        s = 0.0
        for j in range(m):
            w[j] += shift * v[j]
            s += w[j]
        for j in range(m):
            v[j] = w[j] / s
    return 0.5 * (lo + hi), maxiter, False


def perron_root_np(mat, rtol, maxiter):
    m = mat.shape[0]
    v = np.full(m, 1.0 / m)
    lo = hi = 0.0
    for it in range(maxiter):
        w = v @ mat
        r = w / v
        lo, hi = r.min(), r.max()
        if hi - lo <= rtol * lo:
            return 0.5 * (lo + hi), it + 1, True
        w = w + 0.5 * lo * v
        v = w / w.sum()
    return 0.5 * (lo + hi), maxiter, False


if USE_NUMBA:
    departures = departures_nb
    delays = delays_nb
    markov_sample = markov_sample_nb
    recurrence = recurrence_nb
    markov_log_path = markov_log_path_nb
    perron_root = perron_root_nb
else:
    departures = departures_np
    delays = delays_np
    markov_sample = markov_sample_np
    recurrence = recurrence_np
    markov_log_path = markov_log_path_np
    perron_root = perron_root_np

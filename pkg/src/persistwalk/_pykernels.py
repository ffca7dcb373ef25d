"""Pure numpy implementations of the simulation kernels.

Replicates advance in lockstep: at step ``k`` every live replicate draws
its ``k``-th uniform, updates its state, and finished replicates are
dropped from the working set.  Semantics match ``_ckernels`` exactly; for
lattice laws the outputs are bit-identical, for continuous laws they agree
up to last-ulp differences between numpy's and libm's ``log``.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .rng import uniforms

H_LATTICE, H_EXP, H_GEOM, H_NORMAL = 0, 1, 2, 3
TINY = 2.0 ** -54


def _draw_half(kind, param, vals, cum, v):
    v = np.where(v <= 0.0, TINY, v)
    if kind == H_LATTICE:
        idx = np.searchsorted(cum, v, side="right")
        return vals[np.minimum(idx, len(vals) - 1)]
    if kind == H_EXP:
        return -np.log(v) / param
    if kind == H_GEOM:
        return 1.0 + np.floor(np.log(v) / param)
    return param * ndtri(0.5 + 0.5 * v)


def _unpack(kernel):
    p = kernel.params
    return (p[0], p[1], p[2], (int(p[3]), p[4], kernel.pos_vals, kernel.pos_cum),
            (int(p[5]), p[6], kernel.neg_vals, kernel.neg_cum))


def draw_steps(kernel, u: np.ndarray) -> np.ndarray:
    c_neg, c_zero, a_plus, pos, neg = _unpack(kernel)
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    m = u < c_neg
    if m.any():
        out[m] = -_draw_half(*neg, u[m] / c_neg)
    m = u >= c_zero
    if m.any():
        out[m] = _draw_half(*pos, (u[m] - c_zero) / a_plus)
    return out


def draw_overshoots(kernel, u: np.ndarray) -> np.ndarray:
    _, _, _, pos, _ = _unpack(kernel)
    return _draw_half(*pos, np.asarray(u, dtype=np.float64))


def _first(kernel, u, tilted):
    return draw_overshoots(kernel, u) if tilted else draw_steps(kernel, u)


def walk_fail_times(kernel, keys, N, mode, tilted):
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    n = len(keys)
    out = np.full(n, N + 1, dtype=np.int64)
    idx = np.arange(n)
    S = np.zeros(n)
    A = np.zeros(n)
    phase = np.zeros(n, dtype=np.int8)
    horizon = N + 1 if mode == 2 else N
    for k in range(1, horizon + 1):
        if idx.size == 0:
            break
        u = uniforms(keys[idx], k)
        Snew = _first(kernel, u, tilted) if k == 1 else S + draw_steps(kernel, u)
        Aprev = A
        A = A + Snew
        if mode == 0:
            fail = A < 0.0
            at = k
        elif mode == 1:
            fail = Snew < 0.0
            at = k
        elif mode == 2:
            end = (phase == 1) & (Snew > 0.0)
            fail = end & (Aprev < 0.0)
            at = k - 1
            phase = np.where(end, 0, np.where((phase == 0) & (Snew < 0.0), 1, phase)).astype(np.int8)
        else:
            fail = (Snew == 0.0) & (S != 0.0) & (A < 0.0)
            at = k
        out[idx[fail]] = at
        keep = ~fail
        idx, S, A, phase = idx[keep], Snew[keep], A[keep], phase[keep]
    return out


def cycle_kernel(kernel, keys, cap_plus, cap_minus, stop_dur, stop_area, start=None):
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    n = len(keys)
    TP = np.ones(n, dtype=np.int64)
    TM = np.zeros(n, dtype=np.int64)
    XM = np.zeros(n)
    FL = np.zeros(n, dtype=np.int8)
    ES = np.full(n, np.nan)
    if start is not None and len(start):
        S_all = np.array(start, dtype=np.float64)
    else:
        S_all = draw_overshoots(kernel, uniforms(keys, 1))
    XP = S_all.copy()
    K = np.ones(n, dtype=np.int64)

    # positive runs
    idx = np.arange(n)
    S = S_all.copy()
    while idx.size:
        stop = (stop_dur >= 0) & (TP[idx] > stop_dur) & (XP[idx] > stop_area)
        FL[idx[stop]] |= 4
        cens = ~stop & (TP[idx] >= cap_plus)
        FL[idx[cens]] |= 1
        go = ~(stop | cens)
        idx, S = idx[go], S[go]
        if not idx.size:
            break
        K[idx] += 1
        S = S + draw_steps(kernel, uniforms(keys[idx], K[idx]))
        neg = S < 0.0
        S_all[idx[neg]] = S[neg]
        pos = ~neg
        TP[idx[pos]] += 1
        XP[idx[pos]] += S[pos]
        idx, S = idx[pos], S[pos]

    # negative runs
    todo = FL == 0
    if cap_minus <= 0:
        FL[todo] = 8
        return TP, XP, TM, XM, FL, ES
    idx = np.flatnonzero(todo)
    TM[idx] = 1
    XM[idx] = S_all[idx]
    S = S_all[idx]
    while idx.size:
        cens = TM[idx] >= cap_minus
        FL[idx[cens]] |= 2
        idx, S = idx[~cens], S[~cens]
        if not idx.size:
            break
        K[idx] += 1
        S = S + draw_steps(kernel, uniforms(keys[idx], K[idx]))
        cont = S <= 0.0
        ES[idx[~cont]] = S[~cont]
        TM[idx[cont]] += 1
        XM[idx[cont]] += S[cont]
        idx, S = idx[cont], S[cont]
    return TP, XP, TM, XM, FL, ES


def zero_cycle_kernel(kernel, keys, cap, stop_dur):
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    n = len(keys)
    TH = np.zeros(n, dtype=np.int64)
    XI = np.zeros(n)
    FL = np.zeros(n, dtype=np.int8)
    idx = np.arange(n)
    S = np.zeros(n)
    k = 0
    while idx.size:
        if stop_dur >= 0 and k > stop_dur:
            FL[idx] = 4
            break
        if k >= cap:
            FL[idx] = 1
            break
        k += 1
        Snew = S + draw_steps(kernel, uniforms(keys[idx], k))
        TH[idx] = k
        XI[idx] += Snew
        done = (Snew == 0.0) & (S != 0.0)
        idx, S = idx[~done], Snew[~done]
    return TH, XI, FL


def chain_kernel(kernel, keys, K, N, cap, mode):
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    n = len(keys)
    AS = np.full(n, 2, dtype=np.int8)
    BS = np.full(n, 2, dtype=np.int8)
    BPS = np.full(n, 2, dtype=np.int8)
    CY = np.zeros(n, dtype=np.int64)
    ST = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    S = np.zeros(n)
    A = np.zeros(n)
    phase = np.zeros(n, dtype=np.int8)
    sum_tp = np.zeros(n, dtype=np.int64)
    k = 0
    while idx.size and k < cap:
        k += 1
        u = uniforms(keys[idx], k)
        Snew = draw_overshoots(kernel, u) if k == 1 else S + draw_steps(kernel, u)
        end = (phase == 1) & (Snew > 0.0)
        CY[idx[end]] += 1
        AS[idx[end & (A < 0.0)]] = 0
        last = end & (CY[idx] == K)
        li = idx[last]
        AS[li] = np.where(AS[li] == 2, 1, AS[li])
        BS[li] = np.where(BS[li] == 2, 0, BS[li])
        BPS[li] = np.where(BPS[li] == 2, 0 if k - 1 <= N else 1, BPS[li])
        phase = np.where(end, 0, np.where((phase == 0) & (Snew < 0.0), 1, phase)).astype(np.int8)
        open_ = CY[idx] < K
        cnt = open_ & (phase == 0)
        sum_tp[cnt] += 1
        bi = idx[cnt & (sum_tp > N)]
        BS[bi] = np.where(BS[bi] == 2, 1, BS[bi])
        if k >= N + 1:
            bpi = idx[open_]
            BPS[bpi] = np.where(BPS[bpi] == 2, 1, BPS[bpi])
        S = Snew
        A = A + Snew
        ST[idx] = k
        stop = ~open_
        if mode == 0:
            stop |= AS[idx] == 0
        else:
            stop |= BS[idx] == 1
        keep = ~stop
        idx, S, A, phase, sum_tp = idx[keep], S[keep], A[keep], phase[keep], sum_tp[keep]
    ST[idx] = k
    return AS, BS, BPS, CY, ST

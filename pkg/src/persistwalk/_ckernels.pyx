# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernels.

Every kernel walks replicates one at a time with the GIL released.  The
step uniforms come from the counter-based generator in ``persistwalk.rng``
and the step law from ``IncrementLaw.kernel``; ``persistwalk._pykernels``
implements the same semantics with numpy.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, floor
from libc.stdint cimport uint64_t, int64_t, int8_t
from scipy.special.cython_special cimport ndtri

cnp.import_array()

cdef uint64_t GAMMA_STEP = 0xD1B54A32D192ED03ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double TINY = 1.0 / 18014398509481984.0

cdef enum:
    H_LATTICE = 0
    H_EXP = 1
    H_GEOM = 2
    H_NORMAL = 3

cdef struct Half:
    int kind
    double param
    const double* vals
    const double* cum
    Py_ssize_t n

cdef struct Law:
    double c_neg
    double c_zero
    double a_plus
    Half pos
    Half neg


cdef inline double unif(uint64_t key, uint64_t k) noexcept nogil:
    cdef uint64_t z = key + k * GAMMA_STEP
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    z = z ^ (z >> 31)
    return (<double>(z >> 11) + 0.5) * INV_2_53


cdef inline double draw_half(const Half* h, double v) noexcept nogil:
    cdef Py_ssize_t j
    if v <= 0.0:
        v = TINY
    if h.kind == H_LATTICE:
        j = 0
        while j < h.n - 1 and not (v < h.cum[j]):
            j += 1
        return h.vals[j]
    elif h.kind == H_EXP:
        return -log(v) / h.param
    elif h.kind == H_GEOM:
        return 1.0 + floor(log(v) / h.param)
    else:
        return h.param * ndtri(0.5 + 0.5 * v)


cdef inline double draw_step(const Law* law, double u) noexcept nogil:
    if u < law.c_neg:
        return -draw_half(&law.neg, u / law.c_neg)
    if u < law.c_zero:
        return 0.0
    return draw_half(&law.pos, (u - law.c_zero) / law.a_plus)


cdef inline double first_step(const Law* law, double u, bint tilted) noexcept nogil:
    if tilted:
        return draw_half(&law.pos, u)
    return draw_step(law, u)


cdef Law make_law(const double[::1] params, const double[::1] pv, const double[::1] pc,
                  const double[::1] nv, const double[::1] nc):
    cdef Law law
    law.c_neg = params[0]
    law.c_zero = params[1]
    law.a_plus = params[2]
    law.pos.kind = <int>params[3]
    law.pos.param = params[4]
    law.pos.vals = &pv[0]
    law.pos.cum = &pc[0]
    law.pos.n = pv.shape[0]
    law.neg.kind = <int>params[5]
    law.neg.param = params[6]
    law.neg.vals = &nv[0]
    law.neg.cum = &nc[0]
    law.neg.n = nv.shape[0]
    return law


def draw_steps(params, pv, pc, nv, nc, const double[::1] u):
    """Map uniforms to steps (used by tests to compare with numpy)."""
    cdef Law law = make_law(params, pv, pc, nv, nc)
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = draw_step(&law, u[i])
    return out


def walk_fail_times(params, pv, pc, nv, nc, const uint64_t[::1] keys,
                    int64_t N, int mode, bint tilted):
    """First failure index per replicate, or N + 1 for survivors.

    mode 0: A_k < 0; mode 1: S_k < 0; mode 2: overshoot-cycle end j <= N
    with A_j < 0; mode 3: zero-cycle end j <= N with A_j < 0.
    """
    cdef Law law = make_law(params, pv, pc, nv, nc)
    cdef Py_ssize_t r, n = keys.shape[0]
    cdef int64_t k, fail, horizon
    cdef double S, A, Snew, Aprev
    cdef int phase
    cdef uint64_t key
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    horizon = N + 1 if mode == 2 else N
    with nogil:
        for r in range(n):
            key = keys[r]
            S = 0.0
            A = 0.0
            phase = 0
            fail = N + 1
            for k in range(1, horizon + 1):
                if k == 1:
                    Snew = first_step(&law, unif(key, 1), tilted)
                else:
                    Snew = S + draw_step(&law, unif(key, k))
                Aprev = A
                A = A + Snew
                if mode == 0:
                    if A < 0.0:
                        fail = k
                        break
                elif mode == 1:
                    if Snew < 0.0:
                        fail = k
                        break
                elif mode == 2:
                    if phase == 1 and Snew > 0.0:
                        if Aprev < 0.0:
                            fail = k - 1
                            break
                        phase = 0
                    elif phase == 0 and Snew < 0.0:
                        phase = 1
                else:
                    if Snew == 0.0 and S != 0.0 and A < 0.0:
                        fail = k
                        break
                S = Snew
            o[r] = fail
    return out


def cycle_kernel(params, pv, pc, nv, nc, const uint64_t[::1] keys,
                 int64_t cap_plus, int64_t cap_minus,
                 int64_t stop_dur, double stop_area, const double[::1] start):
    """One overshoot cycle of the tilted walk per replicate.

    Returns (theta_plus, xi_plus, theta_minus, xi_minus, flags) with flag
    bits 1 = positive run censored at cap_plus, 2 = negative run censored at
    cap_minus, 4 = stopped once theta_plus > stop_dur and xi_plus > stop_area
    (disabled when stop_dur < 0), 8 = negative run not simulated
    (cap_minus == 0).  ``start`` (empty, or one value per replicate) gives
    the first value of the cycle instead of a fresh overshoot draw.  The
    sixth output is the value that ends the cycle (the next overshoot),
    NaN when the cycle did not end.
    """
    cdef Law law = make_law(params, pv, pc, nv, nc)
    cdef Py_ssize_t r, n = keys.shape[0]
    cdef int64_t k, tp, tm
    cdef double S, xp, xm
    cdef int8_t fl
    cdef uint64_t key
    TP = np.zeros(n, dtype=np.int64)
    TM = np.zeros(n, dtype=np.int64)
    XP = np.zeros(n, dtype=np.float64)
    XM = np.zeros(n, dtype=np.float64)
    FL = np.zeros(n, dtype=np.int8)
    ES = np.full(n, np.nan, dtype=np.float64)
    cdef int64_t[::1] otp = TP, otm = TM
    cdef double[::1] oxp = XP, oxm = XM, oes = ES
    cdef int8_t[::1] ofl = FL
    cdef bint given = start.shape[0] > 0
    if given and start.shape[0] != n:
        raise ValueError("start must be empty or match keys")
    with nogil:
        for r in range(n):
            key = keys[r]
            fl = 0
            k = 1
            if given:
                S = start[r]
            else:
                S = draw_half(&law.pos, unif(key, 1))
            tp = 1
            xp = S
            tm = 0
            xm = 0.0
            while True:
                if stop_dur >= 0 and tp > stop_dur and xp > stop_area:
                    fl = fl | 4
                    break
                if tp >= cap_plus:
                    fl = fl | 1
                    break
                k += 1
                S = S + draw_step(&law, unif(key, k))
                if S < 0.0:
                    break
                tp += 1
                xp += S
            if fl == 0:
                if cap_minus <= 0:
                    fl = 8
                else:
                    tm = 1
                    xm = S
                    while True:
                        if tm >= cap_minus:
                            fl = fl | 2
                            break
                        k += 1
                        S = S + draw_step(&law, unif(key, k))
                        if S > 0.0:
                            oes[r] = S
                            break
                        tm += 1
                        xm += S
            otp[r] = tp
            oxp[r] = xp
            otm[r] = tm
            oxm[r] = xm
            ofl[r] = fl
    return TP, XP, TM, XM, FL, ES


def zero_cycle_kernel(params, pv, pc, nv, nc, const uint64_t[::1] keys,
                      int64_t cap, int64_t stop_dur):
    """One zero-cycle per replicate: leading zeros, excursion, return to 0.

    Returns (theta0, xi0, flags); flag 1 = censored at cap, flag 4 = stopped
    once theta0 > stop_dur (disabled when stop_dur < 0).
    """
    cdef Law law = make_law(params, pv, pc, nv, nc)
    cdef Py_ssize_t r, n = keys.shape[0]
    cdef int64_t k
    cdef double S, Snew, xi
    cdef int8_t fl
    cdef uint64_t key
    TH = np.zeros(n, dtype=np.int64)
    XI = np.zeros(n, dtype=np.float64)
    FL = np.zeros(n, dtype=np.int8)
    cdef int64_t[::1] oth = TH
    cdef double[::1] oxi = XI
    cdef int8_t[::1] ofl = FL
    with nogil:
        for r in range(n):
            key = keys[r]
            S = 0.0
            xi = 0.0
            fl = 0
            k = 0
            while True:
                if stop_dur >= 0 and k > stop_dur:
                    fl = 4
                    break
                if k >= cap:
                    fl = 1
                    break
                k += 1
                Snew = S + draw_step(&law, unif(key, k))
                xi += Snew
                if Snew == 0.0 and S != 0.0:
                    break
                S = Snew
            oth[r] = k
            oxi[r] = xi
            ofl[r] = fl
    return TH, XI, FL


def chain_kernel(params, pv, pc, nv, nc, const uint64_t[::1] keys,
                 int64_t K, int64_t N, int64_t cap, int mode):
    """Cycle-level events of the tilted walk over its first K cycles.

    A = {A at each of the first K cycle ends >= 0}, B = {sum of the first K
    positive-run durations > N}, Bp = {tau_K > N}.  States: 0 false,
    1 true, 2 undetermined (step cap reached).  mode 0 stops as soon as A
    is false; mode 1 stops as soon as B is true.
    Returns (a_state, b_state, bp_state, cycles, steps).
    """
    cdef Law law = make_law(params, pv, pc, nv, nc)
    cdef Py_ssize_t r, n = keys.shape[0]
    cdef int64_t k, cycles, sum_tp
    cdef double S, A, Snew
    cdef int phase
    cdef int8_t a, b, bp
    cdef uint64_t key
    AS = np.empty(n, dtype=np.int8)
    BS = np.empty(n, dtype=np.int8)
    BPS = np.empty(n, dtype=np.int8)
    CY = np.empty(n, dtype=np.int64)
    ST = np.empty(n, dtype=np.int64)
    cdef int8_t[::1] oa = AS, ob = BS, obp = BPS
    cdef int64_t[::1] ocy = CY, ost = ST
    with nogil:
        for r in range(n):
            key = keys[r]
            S = 0.0
            A = 0.0
            phase = 0
            cycles = 0
            sum_tp = 0
            a = 2
            b = 2
            bp = 2
            k = 0
            while k < cap:
                k += 1
                if k == 1:
                    Snew = draw_half(&law.pos, unif(key, 1))
                else:
                    Snew = S + draw_step(&law, unif(key, k))
                if phase == 1 and Snew > 0.0:
                    cycles += 1
                    if A < 0.0:
                        a = 0
                    if cycles == K:
                        if a == 2:
                            a = 1
                        if b == 2:
                            b = 0
                        if bp == 2:
                            bp = 0 if k - 1 <= N else 1
                    phase = 0
                elif phase == 0 and Snew < 0.0:
                    phase = 1
                if cycles < K:
                    if phase == 0:
                        sum_tp += 1
                        if sum_tp > N and b == 2:
                            b = 1
                    if k >= N + 1 and bp == 2:
                        bp = 1
                S = Snew
                A = A + Snew
                if cycles >= K:
                    break
                if mode == 0 and a == 0:
                    break
                if mode == 1 and b == 1:
                    break
            oa[r] = a
            ob[r] = b
            obp[r] = bp
            ocy[r] = cycles
            ost[r] = k
    return AS, BS, BPS, CY, ST

"""Exact rational computations for integer-valued walks.

Probabilities are carried as integer numerators over a power of a common
denominator and converted to :class:`~fractions.Fraction` at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from .errors import NotLattice, OvershootNotDiscrete, StateBudgetExceeded, TooLarge
from .laws import IncrementLaw, classify, make_law

DEFAULT_STATE_BUDGET = 10 ** 8
BRUTE_FORCE_LIMIT = 10 ** 8


def _lattice(law) -> IncrementLaw:
    law = make_law(law)
    if not law.is_lattice:
        raise NotLattice(f"{law.label} is not a finite lattice law")
    return law


def integer_weights(probs: Dict[int, Fraction]) -> Tuple[Dict[int, int], int]:
    """Write ``{v: p}`` as ``{v: w}`` over a common denominator D."""
    D = math.lcm(*(p.denominator for p in probs.values()))
    return {v: int(p * D) for v, p in probs.items()}, D


# --------------------------------------------------------------------------
# persistence probabilities
# --------------------------------------------------------------------------

def _initial(law: IncrementLaw, tilted: bool):
    if tilted:
        if law.pos is None:
            from .errors import NoPositivePart
            raise NoPositivePart(f"{law.label} has a_plus = 0")
        return integer_weights(dict(zip(law.pos.values, law.pos.probs)))
    return integer_weights(law.support)


def exact_pN_sequence(law, N: int, tilted: bool = False,
                      state_budget: int = DEFAULT_STATE_BUDGET) -> List[Fraction]:
    """[p_1, ..., p_N] exactly (tilted: first step from Law(S_1 | S_1 > 0)).

    Forward DP over (S_k, A_k) with A_k >= 0.  A state is moved into a
    'certain survival' pool when even the steepest descent (every remaining
    step equal to the smallest support value m) keeps A >= 0 through N;
    since A + jS + m j(j+1)/2 is concave in j it suffices to check j = N-k.
    """
    law = _lattice(law)
    if N < 1:
        raise ValueError("N must be >= 1")
    w, D = integer_weights(law.support)
    m = min(w)
    w0, D0 = _initial(law, tilted)
    steps = sorted(w.items())

    def certain(S, A, r):
        return A + r * S + m * r * (r + 1) // 2 >= 0

    states: Dict[Tuple[int, int], int] = {}
    pool = 0
    for v, wt in w0.items():
        if v >= 0:
            if certain(v, v, N - 1):
                pool += wt
            else:
                states[(v, v)] = states.get((v, v), 0) + wt
    den = D0
    out = [Fraction(pool + sum(states.values()), den)]
    for k in range(2, N + 1):
        r = N - k
        new: Dict[Tuple[int, int], int] = {}
        pool *= D
        for (S, A), wt in states.items():
            for v, wv in steps:
                S2 = S + v
                A2 = A + S2
                if A2 < 0:
                    continue
                if certain(S2, A2, r):
                    pool += wt * wv
                else:
                    key = (S2, A2)
                    new[key] = new.get(key, 0) + wt * wv
        if len(new) > state_budget:
            raise StateBudgetExceeded(f"{len(new)} states at step {k}", n=k)
        states = new
        den *= D
        out.append(Fraction(pool + sum(states.values()), den))
    return out


def exact_pN(law, N: int, tilted: bool = False, state_budget: int = DEFAULT_STATE_BUDGET) -> Fraction:
    """p_N = P{A_1, ..., A_N >= 0} exactly."""
    return exact_pN_sequence(law, N, tilted=tilted, state_budget=state_budget)[-1]


def brute_force_pN(law, N: int) -> Fraction:
    """p_N by enumerating every path of length N (test oracle).

    Paths are extended level by level and dropped as soon as A < 0; the
    survivors are weighted by the product of their step probabilities.
    """
    law = _lattice(law)
    sup = law.support
    values = list(sup)
    b = len(values)
    if b ** N > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{b}^{N} paths exceed {BRUTE_FORCE_LIMIT}")
    vals = np.array(values, dtype=np.int64)
    radix = N + 1
    S = np.zeros(1, dtype=np.int64)
    A = np.zeros(1, dtype=np.int64)
    code = np.zeros(1, dtype=np.int64)  # count vector of the path, mixed radix
    for _ in range(N):
        S = (S[:, None] + vals[None, :]).ravel()
        A = np.repeat(A, b) + S
        code = (code[:, None] + radix ** np.arange(b, dtype=np.int64)[None, :]).ravel()
        alive = A >= 0
        S, A, code = S[alive], A[alive], code[alive]
    codes, counts = np.unique(code, return_counts=True)
    total = Fraction(0)
    probs = [sup[v] for v in values]
    for c, n in zip(codes.tolist(), counts.tolist()):
        p = Fraction(n)
        for j in range(b):
            p *= probs[j] ** ((c // radix ** j) % radix)
        total += p
    return total


# --------------------------------------------------------------------------
# cycle laws
# --------------------------------------------------------------------------

@dataclass
class BivariateCycleLaw:
    kind: str
    L: int
    entries: Dict[Tuple[int, int], Fraction]
    defect: Fraction
    position_cap: Optional[int] = None
    law_label: str = ""

    @property
    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def theta_marginal(self) -> List[Fraction]:
        """[P(theta = l) for l = 0..L]."""
        out = [Fraction(0)] * (self.L + 1)
        for (t, _), p in self.entries.items():
            out[t] += p
        return out

    def is_xi_symmetric(self) -> bool:
        return all(self.entries.get((t, -x), Fraction(0)) == p for (t, x), p in self.entries.items())

    def asymmetric_entries(self) -> list:
        return [(t, x, p, self.entries.get((t, -x), Fraction(0)))
                for (t, x), p in sorted(self.entries.items())
                if self.entries.get((t, -x), Fraction(0)) != p]

    def rows(self):
        """Integer form: (denominator Q, {theta: (xi_min, [numerators])})."""
        Q = math.lcm(*(p.denominator for p in self.entries.values())) if self.entries else 1
        by_t: Dict[int, Dict[int, int]] = {}
        for (t, x), p in self.entries.items():
            by_t.setdefault(t, {})[x] = int(p * Q)
        rows = {}
        for t, d in by_t.items():
            lo, hi = min(d), max(d)
            row = [0] * (hi - lo + 1)
            for x, n in d.items():
                row[x - lo] = n
            rows[t] = (lo, row)
        return Q, rows

    def items(self):
        return sorted(self.entries.items())


def _step_range(law: IncrementLaw, S: int, cap: Optional[int], support):
    if cap is None:
        return support
    out = []
    for v in range(-cap - S, cap - S + 1):
        p = law.pmf(v)
        if p:
            out.append((v, p))
    return out


def exact_cycle_law(law, L: int, kind: str = "zero", position_cap: Optional[int] = None,
                    strict: bool = True) -> BivariateCycleLaw:
    """Exact joint law of (theta, xi) for one cycle, truncated at theta <= L.

    ``kind='zero'``: cycle between returns to 0 of an integer walk.
    ``kind='overshoot'``: cycle of the tilted walk (starts at a fresh
    overshoot).  Laws with unbounded support need ``position_cap``: paths
    with |S| > cap are discarded into the defect, which keeps the capped
    law invariant under reflection of the walk.
    """
    law = make_law(law)
    if not law.integer_valued:
        raise NotLattice(f"{law.label} is not integer-valued")
    if not law.is_lattice and position_cap is None:
        raise NotLattice(f"{law.label} has unbounded support; pass position_cap")
    if kind not in ("zero", "overshoot"):
        raise ValueError("kind must be 'zero' or 'overshoot'")
    support = [(v, p) for v, p in law.support.items()] if law.is_lattice and position_cap is None else None
    cap = position_cap
    entries: Dict[Tuple[int, int], Fraction] = {}

    def add(t, x, p):
        if p:
            entries[(t, x)] = entries.get((t, x), Fraction(0)) + p

    if kind == "zero":
        lead = Fraction(1)
        states: Dict[Tuple[int, int], Fraction] = {}
        for t in range(1, L + 1):
            new: Dict[Tuple[int, int], Fraction] = {}
            for v, p in _step_range(law, 0, cap, support):
                if v == 0:
                    continue
                key = (v, v)
                new[key] = new.get(key, Fraction(0)) + lead * p
            lead *= law.a_zero
            for (S, area), q in states.items():
                for v, p in _step_range(law, S, cap, support):
                    S2 = S + v
                    if S2 == 0:
                        add(t, area, q * p)
                    else:
                        key = (S2, area + S2)
                        new[key] = new.get(key, Fraction(0)) + q * p
            states = new
    else:
        c = classify(law)
        if strict and not (c.upper_geometric or c.right_continuous):
            raise OvershootNotDiscrete(
                f"{law.label}: overshoot law is not memoryless; cycles are not identically distributed")
        if law.pos is None or law.neg is None:
            from .errors import DegenerateLaw
            raise DegenerateLaw(f"{law.label} needs both signs")
        # state: (phase, S, area); phase 0 = nonnegative run, 1 = nonpositive run
        states = {}
        top = law.pos.max_value if cap is None else cap
        for v in range(1, top + 1):
            p = law.pos.pmf(v)
            if p:
                states[(0, v, v)] = states.get((0, v, v), Fraction(0)) + p
        for t in range(1, L + 1):
            new = {}
            for (ph, S, area), q in states.items():
                if ph == 1:
                    add(t, area, q * law.prob_greater(-S))
                if t == L:
                    continue
                for v, p in _step_range(law, S, cap, support):
                    S2 = S + v
                    if ph == 1 and S2 > 0:
                        continue
                    ph2 = 1 if (ph == 1 or S2 < 0) else 0
                    key = (ph2, S2, area + S2)
                    new[key] = new.get(key, Fraction(0)) + q * p
            states = new
    total = sum(entries.values(), Fraction(0))
    return BivariateCycleLaw(kind, L, entries, 1 - total, position_cap, law.label)


# --------------------------------------------------------------------------
# ladder quantities
# --------------------------------------------------------------------------

@dataclass
class LadderConstants:
    L: int
    p_pos: List[Fraction]           # P{U_n > 0}, n = 1..L
    p_zero: List[Fraction]
    p_neg: List[Fraction]
    c_plus: List[mpmath.mpf]        # partial sums through n = 1..L
    c_zero: List[mpmath.mpf]
    c_minus: List[mpmath.mpf]
    tail_plus: List[Fraction]       # P{tau_+ > n} = P{min_{i<=n} U_i >= 0}
    tail_minus: List[Fraction]      # P{tau_- > n} = P{max_{i<=n} U_i <= 0}
    tail_theta0: List[Fraction]     # P{theta^0 > n}
    prec_bits: int = 113

    def scaled_tail(self, which: str, n: int) -> float:
        tail = {"plus": self.tail_plus, "minus": self.tail_minus, "theta0": self.tail_theta0}[which]
        return math.sqrt(n) * float(tail[n - 1])


def _convolve_step(arr: np.ndarray, w: Dict[int, int], lo: int, vmin: int, vmax: int):
    """One step of the unrestricted walk on an object array indexed from ``lo``."""
    n = len(arr)
    out = np.zeros(n + vmax - vmin, dtype=object)
    for v, wv in w.items():
        out[v - vmin: v - vmin + n] += arr * wv
    return out, lo + vmin


def ladder_constants(law, L: int, prec_bits: int = 113,
                     state_budget: int = DEFAULT_STATE_BUDGET) -> LadderConstants:
    """Exact P{U_n > 0}, P{U_n = 0}, P{U_n < 0} and ladder tails for n <= L.

    The c-series terms are exact rationals, accumulated in mpmath at
    ``prec_bits`` bits.
    """
    law = _lattice(law)
    w, D = integer_weights(law.support)
    vmin, vmax = min(w), max(w)
    if L * (vmax - vmin + 1) > state_budget:
        raise StateBudgetExceeded(f"support range {L * (vmax - vmin)} exceeds budget", n=L)
    old = mpmath.mp.prec
    mpmath.mp.prec = max(prec_bits, 64)
    try:
        arr = np.array([1], dtype=object)
        lo = 0
        # killed walks: stay >= 0 (index = value), stay <= 0 (index = -value)
        up = np.array([1], dtype=object)
        down = np.array([1], dtype=object)
        # zero-cycle: leading-zero mass and the excursion distribution (index from lo_z)
        lead = 1
        exc = np.zeros(0, dtype=object)
        lo_z = 0
        p_pos, p_zero, p_neg, t_plus, t_minus, t_theta = [], [], [], [], [], []
        cp, c0, cm = [], [], []
        sp = s0 = sm = mpmath.mpf(0)
        den = 1
        half = mpmath.mpf(1) / 2
        for n in range(1, L + 1):
            den *= D
            arr, lo = _convolve_step(arr, w, lo, vmin, vmax)
            z = -lo
            zero = arr[z] if 0 <= z < len(arr) else 0
            neg = sum(arr[:max(z, 0)]) if z > 0 else 0
            pos = den - zero - neg
            p_pos.append(Fraction(pos, den))
            p_zero.append(Fraction(zero, den))
            p_neg.append(Fraction(neg, den))
            inv_n = mpmath.mpf(1) / n
            sp += inv_n * (mpmath.mpf(pos) / den - half)
            s0 += inv_n * (mpmath.mpf(zero) / den)
            sm += inv_n * (mpmath.mpf(neg) / den - half)
            cp.append(+sp)
            c0.append(+s0)
            cm.append(+sm)

            up, ulo = _convolve_step(up, w, 0, vmin, vmax)
            up = up[-ulo:] if ulo < 0 else up
            t_plus.append(Fraction(int(sum(up)), den))
            nw = {-v: wv for v, wv in w.items()}
            down, dlo = _convolve_step(down, nw, 0, -vmax, -vmin)
            down = down[-dlo:] if dlo < 0 else down
            t_minus.append(Fraction(int(sum(down)), den))

            # zero-cycle tail: mass that has not completed a cycle by time n
            if len(exc):
                exc, lo_z = _convolve_step(exc, w, lo_z, vmin, vmax)
                zz = -lo_z
                if 0 <= zz < len(exc):
                    exc[zz] = 0
            start = np.zeros(vmax - vmin + 1, dtype=object)
            for v, wv in w.items():
                if v != 0:
                    start[v - vmin] = lead * wv
            exc, lo_z = _add_offset(exc, lo_z, start, vmin)
            lead *= w.get(0, 0)
            t_theta.append(Fraction(int(lead + sum(exc)), den))
        return LadderConstants(L, p_pos, p_zero, p_neg, cp, c0, cm, t_plus, t_minus, t_theta, prec_bits)
    finally:
        mpmath.mp.prec = old


def _add_offset(a: np.ndarray, alo: int, b: np.ndarray, blo: int):
    """Sum of two object arrays with index offsets."""
    if len(a) == 0:
        return b.copy(), blo
    lo = min(alo, blo)
    hi = max(alo + len(a), blo + len(b))
    out = np.zeros(hi - lo, dtype=object)
    out[alo - lo: alo - lo + len(a)] += a
    out[blo - lo: blo - lo + len(b)] += b
    return out, lo

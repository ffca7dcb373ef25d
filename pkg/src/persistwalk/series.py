"""Truncated power series with exact rational coefficients.

Also builds the generating functions of cycle durations (zeta), of the
duration up to the first negative partial sum of cycle areas (chi) and the
lattice correction H from an exact cycle law, and fits power-law tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import BadConstantTerm, InsufficientData, TruncationTooShort


class RationalSeries:
    """c_0 + c_1 t + ... + c_L t^L with Fraction coefficients."""

    __slots__ = ("coeffs", "label")

    def __init__(self, coeffs: Sequence, L: Optional[int] = None, label: str = "derived"):
        cs = [Fraction(c) for c in coeffs]
        if L is not None:
            cs = (cs + [Fraction(0)] * (L + 1))[: L + 1]
        if not cs:
            cs = [Fraction(0)]
        self.coeffs = tuple(cs)
        self.label = label

    @property
    def L(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def one(cls, L: int) -> "RationalSeries":
        return cls([1], L)

    @classmethod
    def t(cls, L: int) -> "RationalSeries":
        return cls([0, 1], L)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, RationalSeries):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        terms = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if self.L > 5 else ""
        return f"RationalSeries([{terms}{more}], L={self.L}, label={self.label!r})"

    def _coerce(self, other) -> "RationalSeries":
        if isinstance(other, RationalSeries):
            if other.L != self.L:
                raise ValueError(f"order mismatch {self.L} vs {other.L}")
            return other
        return RationalSeries([other], self.L)

    def __add__(self, other):
        o = self._coerce(other)
        return RationalSeries([a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            f = Fraction(other)
            return RationalSeries([a * f for a in self.coeffs])
        o = self._coerce(other)
        L = self.L
        a, b = self.coeffs, o.coeffs
        out = [sum((a[i] * b[n - i] for i in range(n + 1)), Fraction(0)) for n in range(L + 1)]
        return RationalSeries(out)

    __rmul__ = __mul__

    def inverse(self) -> "RationalSeries":
        a = self.coeffs
        if a[0] == 0:
            raise BadConstantTerm("inverse needs a nonzero constant term")
        b = [1 / a[0]]
        for n in range(1, self.L + 1):
            b.append(-sum((a[k] * b[n - k] for k in range(1, n + 1)), Fraction(0)) / a[0])
        return RationalSeries(b)

    def log(self) -> "RationalSeries":
        """log f for f(0) = 1, from g' f = f'."""
        f = self.coeffs
        if f[0] != 1:
            raise BadConstantTerm(f"log needs constant term 1, got {f[0]}")
        g = [Fraction(0)] * (self.L + 1)
        for n in range(1, self.L + 1):
            s = n * f[n] - sum((k * g[k] * f[n - k] for k in range(1, n)), Fraction(0))
            g[n] = s / n
        return RationalSeries(g)

    def exp(self) -> "RationalSeries":
        """exp g for g(0) = 0, from e' = g' e."""
        g = self.coeffs
        if g[0] != 0:
            raise BadConstantTerm(f"exp needs constant term 0, got {g[0]}")
        e = [Fraction(1)] + [Fraction(0)] * self.L
        for n in range(1, self.L + 1):
            e[n] = sum((k * g[k] * e[n - k] for k in range(1, n + 1)), Fraction(0)) / n
        return RationalSeries(e)

    def sqrt(self) -> "RationalSeries":
        """Square root for f(0) = 1 via s_n = (f_n - sum_{0<k<n} s_k s_{n-k}) / 2."""
        f = self.coeffs
        if f[0] != 1:
            raise BadConstantTerm(f"sqrt needs constant term 1, got {f[0]}")
        s = [Fraction(1)] + [Fraction(0)] * self.L
        for n in range(1, self.L + 1):
            s[n] = (f[n] - sum((s[k] * s[n - k] for k in range(1, n)), Fraction(0))) / 2
        return RationalSeries(s)

    def max_abs_diff(self, other) -> Fraction:
        o = self._coerce(other)
        return max(abs(a - b) for a, b in zip(self.coeffs, o.coeffs))

    def to_floats(self) -> List[float]:
        return [float(c) for c in self.coeffs]

    def with_label(self, label: str) -> "RationalSeries":
        return RationalSeries(self.coeffs, label=label)


# --------------------------------------------------------------------------
# cycle generating functions
# --------------------------------------------------------------------------

@dataclass
class KFoldMasses:
    """For k cycles and total duration l <= L: P{sum xi < 0 | = 0 | any, sum theta = l}."""

    L: int
    neg: Dict[int, List[Fraction]]
    zero: Dict[int, List[Fraction]]
    total: Dict[int, List[Fraction]]


def _check_L(cycle_law, L):
    if L is None:
        return cycle_law.L
    if cycle_law.L < L:
        raise TruncationTooShort(f"cycle law truncated at {cycle_law.L} < {L}")
    return L


def kfold_masses(cycle_law, L: Optional[int] = None) -> KFoldMasses:
    """k-fold convolutions of the cycle law, truncated at total duration L."""
    L = _check_L(cycle_law, L)
    Q, rows = cycle_law.rows()
    base = {t: (lo, np.array(r, dtype=object)) for t, (lo, r) in rows.items() if t <= L}
    cur = dict(base)
    neg, zero, total = {}, {}, {}
    k = 1
    den = Q
    while cur:
        ns, zs, ts = [Fraction(0)] * (L + 1), [Fraction(0)] * (L + 1), [Fraction(0)] * (L + 1)
        for t, (lo, row) in cur.items():
            z = -lo
            nsum = int(sum(row[:z])) if z > 0 else 0
            zval = int(row[z]) if 0 <= z < len(row) else 0
            ns[t] = Fraction(nsum, den)
            zs[t] = Fraction(zval, den)
            ts[t] = Fraction(int(sum(row)), den)
        neg[k], zero[k], total[k] = ns, zs, ts
        nxt: Dict[int, tuple] = {}
        for t1, (lo1, r1) in cur.items():
            for t2, (lo2, r2) in base.items():
                t = t1 + t2
                if t > L:
                    continue
                lo, r = lo1 + lo2, np.convolve(r1, r2)
                if t in nxt:
                    plo, pr = nxt[t]
                    nlo = min(plo, lo)
                    nhi = max(plo + len(pr), lo + len(r))
                    acc = np.zeros(nhi - nlo, dtype=object)
                    acc[plo - nlo: plo - nlo + len(pr)] += pr
                    acc[lo - nlo: lo - nlo + len(r)] += r
                    nxt[t] = (nlo, acc)
                else:
                    nxt[t] = (lo, r)
        cur = nxt
        den *= Q
        k += 1
    return KFoldMasses(L, neg, zero, total)


def zeta_from_cycle_law(cycle_law, L: Optional[int] = None) -> RationalSeries:
    """zeta(t) = sum_l P{theta_1 = l} t^l."""
    L = _check_L(cycle_law, L)
    marg = cycle_law.theta_marginal()[: L + 1]
    return RationalSeries(marg, L, label="zeta")


def _log_series(masses: Dict[int, List[Fraction]], L: int, scale=Fraction(1)) -> RationalSeries:
    out = [Fraction(0)] * (L + 1)
    for k, row in masses.items():
        for l in range(1, L + 1):
            if row[l]:
                out[l] += row[l] / k
    return RationalSeries([c * scale for c in out], L)


def chi_from_cycle_law(cycle_law, L: Optional[int] = None, masses: Optional[KFoldMasses] = None
                       ) -> RationalSeries:
    """chi(t) from ln 1/(1 - chi) = sum_{k,l} t^l/k P{sum xi < 0, sum theta = l}."""
    L = _check_L(cycle_law, L)
    masses = masses or kfold_masses(cycle_law, L)
    lser = _log_series(masses.neg, L)
    return (1 - (-lser).exp()).with_label("chi")


def h_series(cycle_law, L: Optional[int] = None, masses: Optional[KFoldMasses] = None) -> RationalSeries:
    """H(t) = 1/2 sum_{k,l} t^l/k P{sum xi = 0, sum theta = l}."""
    L = _check_L(cycle_law, L)
    masses = masses or kfold_masses(cycle_law, L)
    return _log_series(masses.zero, L, Fraction(1, 2)).with_label("H")


@dataclass
class FactorizationReport:
    identity: str
    L: int
    lhs: RationalSeries
    rhs: RationalSeries
    max_abs_coeff_diff: Fraction
    zeta: RationalSeries
    chi: RationalSeries
    H: Optional[RationalSeries] = None
    half_mass_ok: bool = True

    @property
    def exact(self) -> bool:
        return self.max_abs_coeff_diff == 0

    def as_dict(self) -> dict:
        d = {
            "identity": self.identity,
            "L": self.L,
            "max_abs_coeff_diff": str(self.max_abs_coeff_diff),
            "max_abs_coeff_diff_float": float(self.max_abs_coeff_diff),
            "exact": self.exact,
            "half_mass_ok": self.half_mass_ok,
            "one_minus_chi": [str(c) for c in self.lhs],
            "rhs": [str(c) for c in self.rhs],
            "zeta": [str(c) for c in self.zeta],
        }
        if self.H is not None:
            d["H"] = [str(c) for c in self.H]
        return d


def half_mass_consistent(masses: KFoldMasses) -> bool:
    """P{sum xi < 0} = (P{any} - P{sum xi = 0}) / 2 for every k and l."""
    return all(
        n == (t - z) / 2
        for k in masses.neg
        for n, z, t in zip(masses.neg[k], masses.zero[k], masses.total[k])
    )


def factorization_check(cycle_law, L: Optional[int] = None, identity: str = "xi-zeta"
                        ) -> FactorizationReport:
    """Compare 1 - chi with sqrt(1 - zeta) ('xi-zeta') or sqrt(1 - zeta) e^H ('lattice-H')."""
    L = _check_L(cycle_law, L)
    masses = kfold_masses(cycle_law, L)
    zeta = zeta_from_cycle_law(cycle_law, L)
    chi = chi_from_cycle_law(cycle_law, L, masses)
    lhs = 1 - chi
    root = (1 - zeta).sqrt()
    H = None
    if identity == "xi-zeta":
        rhs = root
    elif identity == "lattice-H":
        H = h_series(cycle_law, L, masses)
        rhs = root * H.exp()
    else:
        raise ValueError(f"unknown identity {identity!r}")
    return FactorizationReport(identity, L, lhs, rhs, lhs.max_abs_diff(rhs), zeta, chi, H,
                               half_mass_consistent(masses))


# --------------------------------------------------------------------------
# Tauberian analysis
# --------------------------------------------------------------------------

@dataclass
class TauberianFit:
    """Fit of tail(N) ~ amplitude * N^(-(1-p)).

    ``c`` is the amplitude; ``c_tauberian = amplitude * Gamma(p)`` is the
    constant in tail ~ c / (Gamma(p) N^(1-p)) <=> 1 - chi(t) ~ c (1-t)^(1-p).
    """

    p: float
    c: float
    c_tauberian: float
    slope: float
    slope_stderr: float
    n_points: int
    decades: float
    residual_rms: float
    flags: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def tauberian_fit(ns, values, stderr=None) -> TauberianFit:
    """Weighted log-log regression of a tail curve.

    Needs at least 8 positive points spanning at least two decades in N.
    """
    ns = np.asarray(ns, dtype=np.float64)
    vals = np.asarray([float(v) for v in values], dtype=np.float64)
    if ns.size < 8:
        raise InsufficientData(f"{ns.size} points, need at least 8")
    if np.any(ns <= 0) or np.any(vals <= 0):
        raise InsufficientData("tail values and N must be positive")
    decades = math.log10(ns.max() / ns.min())
    if decades < 2 - 1e-12:
        raise InsufficientData(f"span of {decades:.2f} decades, need 2")
    x, y = np.log(ns), np.log(vals)
    if stderr is None:
        w = np.ones_like(x)
    else:
        se = np.asarray(stderr, dtype=np.float64)
        rel = np.where(se > 0, se / vals, np.nan)
        floor = np.nanmin(rel) if np.any(np.isfinite(rel)) else 1.0
        rel = np.where(np.isfinite(rel) & (rel > 0), rel, floor if floor > 0 else 1.0)
        w = 1.0 / rel ** 2
    X = np.column_stack([np.ones_like(x), x])
    WX = X * w[:, None]
    cov = np.linalg.inv(X.T @ WX)
    beta = cov @ (WX.T @ y)
    resid = y - X @ beta
    dof = max(len(x) - 2, 1)
    s2 = float(np.sum(w * resid ** 2) / dof)
    scale = s2 if stderr is None else max(s2, 1.0)
    slope = float(beta[1])
    slope_se = float(math.sqrt(cov[1, 1] * scale))
    p = 1.0 + slope
    amp = float(math.exp(beta[0]))
    flags = []
    if abs(slope) < 1e-2:
        flags.append("flat")
    if not 0 < p < 1:
        flags.append("p_outside_unit_interval")
    c_t = amp * math.gamma(p) if p > 0 else float("nan")
    return TauberianFit(p, amp, c_t, slope, slope_se, int(len(x)), decades,
                        float(math.sqrt(np.mean(resid ** 2))), flags)


def tail_from_series(chi: RationalSeries) -> List[Fraction]:
    """P{tau > N} = 1 - sum_{l <= N} chi_l for N = 0..L."""
    out, acc = [], Fraction(0)
    for c in chi:
        acc += c
        out.append(1 - acc)
    return out

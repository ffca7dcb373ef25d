"""Centered increment laws: construction, validation, classification, constants.

Every law is stored as a two-sided composite::

    P{X > 0} = a_plus,  P{X = 0} = a_zero,  P{X < 0} = a_minus

with ``Law(X | X > 0)`` and ``Law(-X | X < 0)`` given by a *half law*:
a finite lattice, an exponential, a geometric on {1, 2, ...} or a
half-normal.  Masses are exact :class:`~fractions.Fraction` objects; so
are the moments whenever the half laws have rational parameters.

Law spec grammar (shared by the CLI and the config files)::

    simple
    slackened:p0=<rat>
    geom2:q+=<rat>,q-=<rat>,a0=<rat>[,m=<int>]
    exp2:l+=<real>,l-=<real>[,a0=<rat>]
    lattice:{v1:p1,v2:p2,...}
    uexp:{v1:p1,...}            (nonpositive atoms; exponential upper part)
    normal[:s=<real>]
    laplace                     (alias of exp2:l+=1,l-=1)

Rationals are written ``n/d`` (decimals are accepted and read exactly).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, NamedTuple, Optional, Union

import numpy as np

from .errors import (
    InvalidMass,
    LawSpecError,
    NonCentered,
    NoPositivePart,
    NotApplicable,
    ZeroVariance,
)

Number = Union[Fraction, float]

HALF_LATTICE, HALF_EXP, HALF_GEOM, HALF_NORMAL = 0, 1, 2, 3


# --------------------------------------------------------------------------
# half laws: distributions on (0, inf)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeHalf:
    """Finite law on positive integers; ``probs`` are conditional and sum to 1."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.values) == 0 or len(self.values) != len(self.probs):
            raise InvalidMass("empty or ragged lattice half")
        if any(v <= 0 for v in self.values):
            raise InvalidMass("lattice half must live on positive integers")
        if any(p <= 0 for p in self.probs) or sum(self.probs) != 1:
            raise InvalidMass("lattice half probabilities must be positive and sum to 1")

    integer = True
    finite = True

    @property
    def mean(self) -> Fraction:
        return sum((v * p for v, p in zip(self.values, self.probs)), Fraction(0))

    @property
    def second_moment(self) -> Fraction:
        return sum((v * v * p for v, p in zip(self.values, self.probs)), Fraction(0))

    def pmf(self, k: int) -> Fraction:
        for v, p in zip(self.values, self.probs):
            if v == k:
                return p
        return Fraction(0)

    def tail(self, k: int) -> Fraction:
        """P{K > k}."""
        return sum((p for v, p in zip(self.values, self.probs) if v > k), Fraction(0))

    @property
    def max_value(self) -> int:
        return self.values[-1]

    def describe(self) -> str:
        if self.values == (1,):
            return "point mass at 1"
        body = ",".join(f"{v}:{p}" for v, p in zip(self.values, self.probs))
        return "lattice{" + body + "}"


@dataclass(frozen=True)
class ExpHalf:
    rate: Number

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidMass("exponential rate must be positive")

    integer = False
    finite = False

    @property
    def mean(self):
        return 1 / self.rate

    @property
    def second_moment(self):
        return 2 / (self.rate * self.rate)

    def describe(self) -> str:
        return f"exponential(rate={self.rate})"


@dataclass(frozen=True)
class GeomHalf:
    """P{K = k} = (1 - q) q^(k-1) for k >= 1; q = 0 is the point mass at 1."""

    q: Fraction

    def __post_init__(self):
        if not 0 <= self.q < 1:
            raise InvalidMass("geometric ratio must lie in [0, 1)")

    integer = True
    finite = False

    @property
    def mean(self) -> Fraction:
        return 1 / (1 - self.q)

    @property
    def second_moment(self) -> Fraction:
        return (1 + self.q) / (1 - self.q) ** 2

    def pmf(self, k: int) -> Fraction:
        if k < 1:
            return Fraction(0)
        return (1 - self.q) * self.q ** (k - 1)

    def tail(self, k: int) -> Fraction:
        if k < 0:
            return Fraction(1)
        return self.q ** k

    @property
    def max_value(self):
        return 1 if self.q == 0 else None

    def describe(self) -> str:
        return f"geometric(q={self.q})"


@dataclass(frozen=True)
class HalfNormal:
    scale: float

    integer = False
    finite = False

    @property
    def mean(self) -> float:
        return self.scale * math.sqrt(2 / math.pi)

    @property
    def second_moment(self) -> float:
        return self.scale ** 2

    def describe(self) -> str:
        return f"half-normal(scale={self.scale})"


Half = Union[LatticeHalf, ExpHalf, GeomHalf, HalfNormal]


def _truncated_geometric(q: Fraction, m: int) -> LatticeHalf:
    weights = [q ** (k - 1) for k in range(1, m + 1)]
    total = sum(weights, Fraction(0))
    return LatticeHalf(tuple(range(1, m + 1)), tuple(w / total for w in weights))


# --------------------------------------------------------------------------
# kernel encoding
# --------------------------------------------------------------------------

class KernelLaw(NamedTuple):
    """Flat numeric encoding consumed by the simulation kernels.

    ``params`` holds ``[c_neg, c_zero, a_plus, pos_kind, pos_param,
    neg_kind, neg_param]`` where ``c_neg = P{X<0}`` and
    ``c_zero = P{X<=0}``; a uniform ``u`` maps to the negative part when
    ``u < c_neg``, to 0 when ``u < c_zero`` and to the positive part otherwise.
    """

    params: np.ndarray
    pos_vals: np.ndarray
    pos_cum: np.ndarray
    neg_vals: np.ndarray
    neg_cum: np.ndarray


def _encode_half(half: Optional[Half]):
    if half is None:
        return HALF_LATTICE, 0.0, np.ones(1), np.ones(1)
    if isinstance(half, GeomHalf) and half.q == 0:
        half = LatticeHalf((1,), (Fraction(1),))
    if isinstance(half, LatticeHalf):
        vals = np.array([float(v) for v in half.values])
        cum = np.array([float(c) for c in np.cumsum(np.array(half.probs, dtype=object))])
        cum[-1] = 1.0
        return HALF_LATTICE, 0.0, vals, cum
    if isinstance(half, ExpHalf):
        return HALF_EXP, float(half.rate), np.ones(1), np.ones(1)
    if isinstance(half, GeomHalf):
        return HALF_GEOM, math.log(float(half.q)), np.ones(1), np.ones(1)
    return HALF_NORMAL, float(half.scale), np.ones(1), np.ones(1)


# --------------------------------------------------------------------------
# the law itself
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IncrementLaw:
    a_plus: Fraction
    a_zero: Fraction
    a_minus: Fraction
    pos: Optional[Half]
    neg: Optional[Half]
    label: str = "custom"
    _kernel: KernelLaw = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        masses = (self.a_plus, self.a_zero, self.a_minus)
        if any(m < 0 for m in masses):
            raise InvalidMass(f"negative mass in {masses}")
        if sum(masses) != 1:
            raise InvalidMass(f"masses sum to {sum(masses)}, not 1")
        if (self.a_plus > 0) != (self.pos is not None):
            raise InvalidMass("positive part present iff a_plus > 0")
        if (self.a_minus > 0) != (self.neg is not None):
            raise InvalidMass("negative part present iff a_minus > 0")
        up = self.a_plus * self.pos.mean if self.pos is not None else 0
        down = self.a_minus * self.neg.mean if self.neg is not None else 0
        exact = isinstance(up, (int, Fraction)) and isinstance(down, (int, Fraction))
        if (up != down) if exact else not math.isclose(up, down, rel_tol=1e-12):
            raise NonCentered(f"mean {up - down} != 0 for {self.label}")
        if self.a_zero == 1:
            raise ZeroVariance("all mass at 0")
        object.__setattr__(self, "_kernel", self._encode())

    # -- moments ---------------------------------------------------------

    @property
    def mean(self):
        return Fraction(0)

    @property
    def sigma2(self) -> Number:
        up = self.a_plus * self.pos.second_moment if self.pos is not None else 0
        down = self.a_minus * self.neg.second_moment if self.neg is not None else 0
        return up + down

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def abs_mean(self) -> Number:
        up = self.a_plus * self.pos.mean if self.pos is not None else 0
        down = self.a_minus * self.neg.mean if self.neg is not None else 0
        return up + down

    # -- structure -------------------------------------------------------

    @property
    def integer_valued(self) -> bool:
        return all(h is None or h.integer for h in (self.pos, self.neg))

    @property
    def is_lattice(self) -> bool:
        """Integer-valued with finite support (exact DP applies)."""
        return all(h is None or isinstance(h, LatticeHalf) for h in (self.pos, self.neg))

    @property
    def kind(self) -> str:
        kinds = {type(h) for h in (self.pos, self.neg) if h is not None}
        if self.is_lattice:
            return "lattice"
        if kinds == {ExpHalf}:
            return "two_sided_exponential"
        if isinstance(self.pos, ExpHalf) and not isinstance(self.neg, (ExpHalf, HalfNormal)):
            return "upper_exponential_lattice_down"
        if kinds <= {GeomHalf, LatticeHalf}:
            return "geometric"
        return "continuous"

    @property
    def support(self) -> dict:
        """Exact support map {value: probability}; finite lattice laws only."""
        if not self.is_lattice:
            raise ValueError(f"{self.label} has no finite support")
        out = {}
        if self.neg is not None:
            for v, p in zip(self.neg.values, self.neg.probs):
                out[-v] = self.a_minus * p
        if self.a_zero > 0:
            out[0] = self.a_zero
        if self.pos is not None:
            for v, p in zip(self.pos.values, self.pos.probs):
                out[v] = self.a_plus * p
        return dict(sorted(out.items()))

    def pmf(self, k: int) -> Fraction:
        """Exact P{X = k} for integer-valued laws (finite or geometric tails)."""
        if k == 0:
            return self.a_zero
        if k > 0:
            return self.a_plus * self.pos.pmf(k) if self.pos is not None else Fraction(0)
        return self.a_minus * self.neg.pmf(-k) if self.neg is not None else Fraction(0)

    def prob_greater(self, k: int) -> Fraction:
        """Exact P{X > k} for integer-valued laws."""
        if k < 0:
            return 1 - self.prob_less(k + 1)
        return self.a_plus * self.pos.tail(k) if self.pos is not None else Fraction(0)

    def prob_less(self, k: int) -> Fraction:
        """Exact P{X < k} for integer-valued laws."""
        if k > 0:
            return 1 - self.prob_greater(k - 1)
        return self.a_minus * self.neg.tail(-k) if self.neg is not None else Fraction(0)

    @property
    def span(self) -> Optional[int]:
        """Largest h with support inside a + hZ; None for non-lattice laws."""
        if not self.integer_valued:
            return None
        pts = set()
        for sign, half in ((1, self.pos), (-1, self.neg)):
            if half is None:
                continue
            if isinstance(half, LatticeHalf):
                pts.update(sign * v for v in half.values)
            elif half.q == 0:
                pts.add(sign)
            else:
                pts.update((sign, 2 * sign))
        if self.a_zero > 0:
            pts.add(0)
        pts = sorted(pts)
        return reduce(math.gcd, (b - pts[0] for b in pts[1:]), 0) or None

    def negate(self) -> "IncrementLaw":
        return IncrementLaw(self.a_minus, self.a_zero, self.a_plus, self.neg, self.pos,
                            label=f"-({self.label})")

    # -- sampling --------------------------------------------------------

    def _encode(self) -> KernelLaw:
        pk, pp, pv, pc = _encode_half(self.pos)
        nk, nparam, nv, nc = _encode_half(self.neg)
        c_neg = float(self.a_minus)
        c_zero = float(self.a_minus + self.a_zero)
        params = np.array([c_neg, c_zero, float(self.a_plus), pk, pp, nk, nparam], dtype=np.float64)
        return KernelLaw(params, pv, pc, nv, nc)

    @property
    def kernel(self) -> KernelLaw:
        return self._kernel

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        from ._pykernels import draw_steps
        return draw_steps(self._kernel, rng.random(size))

    def sample_overshoot(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.pos is None:
            raise NoPositivePart(f"{self.label} has a_plus = 0")
        from ._pykernels import draw_overshoots
        return draw_overshoots(self._kernel, rng.random(size))

    def __str__(self):
        return self.label


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------

def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def lattice(support: Mapping[int, object], label: Optional[str] = None) -> IncrementLaw:
    sup = {int(v): _frac(p) for v, p in support.items()}
    if any(p < 0 for p in sup.values()):
        raise InvalidMass("negative probability in lattice support")
    total = sum(sup.values(), Fraction(0))
    if total != 1:
        raise InvalidMass(f"lattice masses sum to {total}, not 1")
    sup = {v: p for v, p in sup.items() if p > 0}
    a_plus = sum((p for v, p in sup.items() if v > 0), Fraction(0))
    a_minus = sum((p for v, p in sup.items() if v < 0), Fraction(0))
    a_zero = sup.get(0, Fraction(0))

    def half(sign, mass):
        if mass == 0:
            return None
        items = sorted((sign * v, p / mass) for v, p in sup.items() if sign * v > 0)
        return LatticeHalf(tuple(v for v, _ in items), tuple(p for _, p in items))

    if label is None:
        label = "lattice:{" + ",".join(f"{v}:{p}" for v, p in sorted(sup.items())) + "}"
    return IncrementLaw(a_plus, a_zero, a_minus, half(1, a_plus), half(-1, a_minus), label)


def simple() -> IncrementLaw:
    return lattice({1: Fraction(1, 2), -1: Fraction(1, 2)}, label="simple")


def slackened(p0) -> IncrementLaw:
    p0 = _frac(p0)
    if not 0 <= p0 < 1:
        raise InvalidMass(f"p0={p0} outside [0, 1)")
    return lattice({1: (1 - p0) / 2, 0: p0, -1: (1 - p0) / 2}, label=f"slackened:p0={p0}")


def geom2(q_plus, q_minus, a0=0, m: Optional[int] = None) -> IncrementLaw:
    """Two-sided geometric walk; masses a_plus, a_minus fixed by centering.

    With ``m`` the geometric halves are truncated to {1..m} (and renormalised),
    giving a finite lattice law usable by the exact routines.
    """
    qp, qm, a0 = _frac(q_plus), _frac(q_minus), _frac(a0)
    if m is None:
        pos, neg = GeomHalf(qp), GeomHalf(qm)
    else:
        if m < 1:
            raise InvalidMass("truncation m must be >= 1")
        pos, neg = _truncated_geometric(qp, m), _truncated_geometric(qm, m)
    if not 0 <= a0 < 1:
        raise InvalidMass(f"a0={a0} outside [0, 1)")
    mp, mm = pos.mean, neg.mean
    a_plus = (1 - a0) * mm / (mp + mm)
    label = f"geom2:q+={qp},q-={qm},a0={a0}" + ("" if m is None else f",m={m}")
    return IncrementLaw(a_plus, a0, 1 - a0 - a_plus, pos, neg, label)


def exp2(l_plus, l_minus, a0=0) -> IncrementLaw:
    """Two-sided exponential walk; a_plus/l_plus = a_minus/l_minus."""
    lp, lm, a0 = _frac(l_plus), _frac(l_minus), _frac(a0)
    if not 0 <= a0 < 1:
        raise InvalidMass(f"a0={a0} outside [0, 1)")
    a_plus = (1 - a0) * lp / (lp + lm)
    label = f"exp2:l+={lp},l-={lm}" + (f",a0={a0}" if a0 else "")
    return IncrementLaw(a_plus, a0, 1 - a0 - a_plus, ExpHalf(lp), ExpHalf(lm), label)


def laplace() -> IncrementLaw:
    law = exp2(1, 1)
    return law


def uexp(down: Mapping[int, object]) -> IncrementLaw:
    """Upper exponential law with a finite nonpositive lattice part.

    The rate of the exponential part is fixed by centering.
    """
    sup = {int(v): _frac(p) for v, p in down.items()}
    if any(v > 0 for v in sup):
        raise InvalidMass("uexp atoms must be nonpositive")
    if any(p < 0 for p in sup.values()):
        raise InvalidMass("negative probability")
    a_plus = 1 - sum(sup.values(), Fraction(0))
    if a_plus <= 0:
        raise InvalidMass("uexp atoms leave no positive mass")
    a_zero = sup.pop(0, Fraction(0))
    sup = {v: p for v, p in sup.items() if p > 0}
    a_minus = sum(sup.values(), Fraction(0))
    if a_minus == 0:
        raise NonCentered("uexp needs negative atoms")
    neg_items = sorted((-v, p / a_minus) for v, p in sup.items())
    neg = LatticeHalf(tuple(v for v, _ in neg_items), tuple(p for _, p in neg_items))
    rate = a_plus / (a_minus * neg.mean)
    body = ",".join(f"{v}:{p}" for v, p in sorted({**sup, **({0: a_zero} if a_zero else {})}.items()))
    return IncrementLaw(a_plus, a_zero, a_minus, ExpHalf(rate), neg, "uexp:{" + body + "}")


def normal(scale=1.0) -> IncrementLaw:
    h = HalfNormal(float(scale))
    return IncrementLaw(Fraction(1, 2), Fraction(0), Fraction(1, 2), h, h, f"normal:s={float(scale):g}")


# --------------------------------------------------------------------------
# spec parsing
# --------------------------------------------------------------------------

_KV = re.compile(r"^\s*([a-zA-Z0-9+\-]+)\s*=\s*([^=]+?)\s*$")


def _parse_rational(tok: str) -> Fraction:
    try:
        return Fraction(tok.strip())
    except (ValueError, ZeroDivisionError):
        raise LawSpecError("bad rational", tok) from None


def _parse_kv(body: str, allowed: dict) -> dict:
    out = {}
    if not body.strip():
        return out
    for part in body.split(","):
        m = _KV.match(part)
        if not m:
            raise LawSpecError("expected key=value", part)
        key, val = m.group(1), m.group(2)
        if key not in allowed:
            raise LawSpecError("unknown parameter", key)
        out[allowed[key]] = val
    return out


def _parse_support(body: str) -> dict:
    body = body.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise LawSpecError("support must be written {v:p,...}", body)
    sup = {}
    for part in body[1:-1].split(","):
        if not part.strip():
            continue
        if ":" not in part:
            raise LawSpecError("expected value:probability", part)
        v, p = part.split(":", 1)
        try:
            key = int(v.strip())
        except ValueError:
            raise LawSpecError("support values must be integers", v.strip()) from None
        if key in sup:
            raise LawSpecError("duplicate support value", v.strip())
        sup[key] = _parse_rational(p)
    if not sup:
        raise LawSpecError("empty support", body)
    return sup


def parse_law(spec: str) -> IncrementLaw:
    """Parse a law spec string (see module docstring)."""
    spec = spec.strip()
    name, _, body = spec.partition(":")
    name = name.strip().lower()
    if name == "simple" and not body:
        return simple()
    if name == "laplace" and not body:
        return laplace()
    if name == "slackened":
        kv = _parse_kv(body, {"p0": "p0"})
        if "p0" not in kv:
            raise LawSpecError("slackened needs p0", spec)
        return slackened(_parse_rational(kv["p0"]))
    if name == "geom2":
        kv = _parse_kv(body, {"q+": "qp", "q-": "qm", "a0": "a0", "m": "m"})
        for key, tok in (("qp", "q+"), ("qm", "q-")):
            if key not in kv:
                raise LawSpecError("geom2 needs", tok)
        m = kv.get("m")
        if m is not None:
            try:
                m = int(m)
            except ValueError:
                raise LawSpecError("m must be an integer", m) from None
        return geom2(_parse_rational(kv["qp"]), _parse_rational(kv["qm"]),
                     _parse_rational(kv.get("a0", "0")), m)
    if name == "exp2":
        kv = _parse_kv(body, {"l+": "lp", "l-": "lm", "a0": "a0"})
        for key, tok in (("lp", "l+"), ("lm", "l-")):
            if key not in kv:
                raise LawSpecError("exp2 needs", tok)
        return exp2(_parse_rational(kv["lp"]), _parse_rational(kv["lm"]),
                    _parse_rational(kv.get("a0", "0")))
    if name == "lattice":
        return lattice(_parse_support(body))
    if name == "uexp":
        return uexp(_parse_support(body))
    if name == "normal":
        kv = _parse_kv(body, {"s": "s"})
        try:
            return normal(float(kv.get("s", "1")))
        except ValueError:
            raise LawSpecError("bad scale", kv.get("s")) from None
    raise LawSpecError("unknown law", name or spec)


def make_law(spec) -> IncrementLaw:
    if isinstance(spec, IncrementLaw):
        return spec
    return parse_law(spec)


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkClassification:
    integer_valued: bool
    upper_exponential: bool
    lower_exponential: bool
    upper_geometric: bool
    lower_geometric: bool
    right_continuous: bool
    left_continuous: bool
    symmetric: bool
    two_sided_exponential: bool
    slackened_simple: bool
    theorem1_applies: bool
    theorem2_part1_applies: bool
    theorem2_part2_applies: bool

    @property
    def upper_memoryless(self) -> bool:
        """Overshoot over any level is independent of the past."""
        return self.upper_exponential or self.upper_geometric or self.right_continuous

    @property
    def lower_memoryless(self) -> bool:
        return self.lower_exponential or self.lower_geometric or self.left_continuous

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _is_geometric(half) -> bool:
    return isinstance(half, GeomHalf) and half.q > 0


def _is_unit(half) -> bool:
    return (isinstance(half, LatticeHalf) and half.values == (1,)) or (
        isinstance(half, GeomHalf) and half.q == 0)


def _symmetric(law: IncrementLaw) -> bool:
    return law.a_plus == law.a_minus and law.pos == law.neg


def classify(law: IncrementLaw) -> WalkClassification:
    iv = law.integer_valued
    up_exp = isinstance(law.pos, ExpHalf)
    lo_exp = isinstance(law.neg, ExpHalf)
    up_geo = iv and _is_geometric(law.pos)
    lo_geo = iv and _is_geometric(law.neg)
    # support inside {..., -1, 0, 1} with a genuine upward step
    right = iv and _is_unit(law.pos)
    left = iv and _is_unit(law.neg)
    sym = _symmetric(law)
    two_exp = up_exp and lo_exp
    slack = sym and right and left
    part1 = (up_geo or right) and (lo_geo or left)
    return WalkClassification(
        integer_valued=iv,
        upper_exponential=up_exp,
        lower_exponential=lo_exp,
        upper_geometric=up_geo,
        lower_geometric=lo_geo,
        right_continuous=right,
        left_continuous=left,
        symmetric=sym,
        two_sided_exponential=two_exp,
        slackened_simple=slack,
        theorem1_applies=iv or up_exp,
        theorem2_part1_applies=part1,
        theorem2_part2_applies=two_exp or (part1 and sym),
    )


def overshoot_law(law: IncrementLaw) -> Half:
    """Law(S_1 | S_1 > 0) as a half law."""
    if law.pos is None:
        raise NoPositivePart(f"{law.label} has a_plus = 0")
    return law.pos


# --------------------------------------------------------------------------
# constants of the joint-tail limit
# --------------------------------------------------------------------------

def prop1_constants(law: IncrementLaw) -> dict:
    """Both closed forms of the joint-tail constant, keyed by the hypothesis used.

    ``"two_sided"`` needs memoryless overshoots on both sides,
    ``"upper_exponential"`` needs an exponential upper part.
    """
    c = classify(law)
    out = {}
    sigma = law.sigma
    abs_mean = float(law.abs_mean)
    if c.upper_memoryless and c.lower_memoryless:
        a_p, a_m, a_0 = float(law.a_plus), float(law.a_minus), float(law.a_zero)
        out["two_sided"] = (1 - a_0) * abs_mean / (math.sqrt(2 * math.pi) * a_p * a_m * sigma)
    if c.upper_exponential:
        out["upper_exponential"] = math.sqrt(2 / math.pi) * sigma / abs_mean
    return out


def prop1_constant(law: IncrementLaw) -> float:
    consts = prop1_constants(law)
    if not consts:
        raise NotApplicable(f"no closed-form joint-tail constant for {law.label}")
    if len(consts) == 2:
        a, b = consts["two_sided"], consts["upper_exponential"]
        if abs(a - b) > 1e-12 * max(abs(a), 1.0):
            raise AssertionError(f"joint-tail constants disagree: {a} vs {b}")
    return consts.get("two_sided", consts.get("upper_exponential"))

"""Monte Carlo estimators and statistical checks.

Every estimator draws its replicates from counter-based substreams keyed by
``(seed, stream)`` and reduces per-chunk results in chunk order, so the
numbers are identical for any worker count.  Tail events are simulated at
the level of single cycles; whole trajectories are only simulated for the
persistence probabilities and the inequality chains.

Censoring: cycle durations have infinite mean, so every cycle simulation
runs under a step cap.  A replicate whose event is not yet decided at the
cap is counted as *undetermined*; estimates report the midpoint together
with the lower and upper bounds, and the inequality checks use the bound
that makes the check hardest to fail.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import kernels
from .errors import HypothesisNotMet, InsufficientData, InvalidRegion, NoPositivePart, NotLattice
from .excursion import DEFAULT_MESH, f_eval, sample_xi_ex_many
from .laws import IncrementLaw, classify, make_law, prop1_constants, prop1_constant
from .parallel import map_chunks
from .rng import rep_keys, stream_key

MODES = {
    "integrated": kernels.MODE_INTEGRATED,
    "plain": kernels.MODE_PLAIN,
    "cycle": kernels.MODE_CYCLE_OVERSHOOT,
    "zero-cycle": kernels.MODE_CYCLE_ZERO,
}
TAIL_KINDS = ("xi+", "xi-", "xi", "theta-only", "zero-cycle")
MIN_FIT_POINTS = 6
MIN_SPAN_FACTOR = 64
E_XI_EX_CBRT_SAMPLES = 100_000


def _require_seed(seed):
    if seed is None:
        raise ValueError("an explicit seed is required")
    return int(seed)


def _bernoulli(k: int, n: int) -> Tuple[float, float]:
    p = k / n
    return p, math.sqrt(max(p * (1 - p), 0.0) / n)


# --------------------------------------------------------------------------
# result types
# --------------------------------------------------------------------------

@dataclass
class MCEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int
    description: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")

    def record(self, op: str, law, params: Optional[dict] = None, elapsed_ms: Optional[float] = None) -> dict:
        return {
            "op": op,
            "law": getattr(law, "label", str(law)),
            "params": dict(params or {}),
            "value": self.value,
            "stderr": self.stderr,
            "n": self.n_samples,
            "seed": self.seed,
            "elapsed_ms": elapsed_ms,
        }


@dataclass
class TailPoint:
    n: int
    value: float
    stderr: float
    hits: int
    undetermined: int
    lower: float
    upper: float


@dataclass
class TailCurve:
    which: str
    s: float
    t: float
    points: List[TailPoint]
    scaling: str = "n^(1/2) P"
    theory: Optional[float] = None
    theory_stderr: float = 0.0
    constant: Optional[float] = None
    reps: int = 0
    seed: Optional[int] = None
    law: str = ""
    theory_rescaled: Optional[float] = None
    theory_rescaled_stderr: float = 0.0

    def __post_init__(self):
        ns = [p.n for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n grid must be strictly increasing")

    def relative_error(self, i: int = -1, rescaled: bool = False) -> Optional[float]:
        ref = self.theory_rescaled if rescaled else self.theory
        if ref is None or ref == 0:
            return None
        return self.points[i].value / ref - 1.0

    def flatness(self, n_min: int = 256) -> float:
        """Slope of log(scaled estimate) against log n over n >= n_min."""
        pts = [p for p in self.points if p.n >= n_min and p.value > 0]
        if len(pts) < 2:
            raise InsufficientData("need two positive points for a flatness slope")
        x = np.log([p.n for p in pts])
        y = np.log([p.value for p in pts])
        w = np.array([(p.value / p.stderr) ** 2 if p.stderr > 0 else 1.0 for p in pts])
        return _wls(x, y, w)[0]

    def rows(self):
        for p in self.points:
            yield (p.n, p.value, p.stderr, p.lower, p.upper, p.undetermined, self.theory,
                   self.theory_rescaled)


@dataclass
class ExponentFit:
    slope: float
    stderr: float
    ci_low: float
    ci_high: float
    intercept: float
    n_points: int
    chi2: float
    level: float = 0.95

    def within(self, lo: float, hi: float) -> bool:
        return lo <= self.slope <= hi

    def as_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# persistence probabilities
# --------------------------------------------------------------------------

def _fail_times(law: IncrementLaw, N: int, reps: int, seed: int, stream: str, mode: int,
                tilted: bool, workers, backend=None) -> np.ndarray:
    skey = stream_key(seed, stream)
    kl = law.kernel

    def run(a, b):
        return kernels.walk_fail_times(kl, rep_keys(skey, a, b), N, mode, tilted, backend=backend)

    parts = map_chunks(run, reps, workers=workers)
    return np.concatenate(parts)


def _survivors(law, N, reps, seed, stream, mode, tilted, workers, backend=None) -> int:
    skey = stream_key(seed, stream)
    kl = law.kernel

    def run(a, b):
        t = kernels.walk_fail_times(kl, rep_keys(skey, a, b), N, mode, tilted, backend=backend)
        return int(np.count_nonzero(t > N))

    return int(sum(map_chunks(run, reps, workers=workers)))


def _check_walk_args(law, N, reps, tilted):
    if N < 1:
        raise ValueError("N must be >= 1")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if tilted and law.pos is None:
        raise NoPositivePart(f"{law.label} has a_plus = 0")


def mc_p(law, N: int, reps: int, tilted: bool = False, seed=None, workers=None,
         mode: str = "integrated", stream: Optional[str] = None, backend=None) -> MCEstimate:
    """Fraction of ``reps`` walks with A_k >= 0 for k <= N (S_k >= 0 when mode='plain')."""
    law = make_law(law)
    seed = _require_seed(seed)
    _check_walk_args(law, N, reps, tilted)
    if mode not in ("integrated", "plain"):
        raise ValueError(f"unknown mode {mode!r}")
    stream = stream or f"walk/{mode}/{'tilted' if tilted else 'plain'}/N={N}"
    k = _survivors(law, N, reps, seed, stream, MODES[mode], tilted, workers, backend)
    p, se = _bernoulli(k, reps)
    name = "p~" if tilted else "p"
    what = "S" if mode == "plain" else "A"
    return MCEstimate(p, se, reps, seed, f"{name}_{N}: P(min {what}_k >= 0, k <= {N})",
                      {"N": N, "survivors": k, "tilted": tilted, "mode": mode})


def mc_p_curve(law, N: int, reps: int, tilted: bool = False, seed=None, workers=None,
               mode: str = "integrated", stream: Optional[str] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Estimates of p_1..p_N from one set of ``reps`` walks (values are correlated in N)."""
    law = make_law(law)
    seed = _require_seed(seed)
    _check_walk_args(law, N, reps, tilted)
    stream = stream or f"walk-curve/{mode}/{'tilted' if tilted else 'plain'}/N={N}"
    t = _fail_times(law, N, reps, seed, stream, MODES[mode], tilted, workers)
    counts = np.bincount(np.minimum(t, N + 1), minlength=N + 2)
    surv = reps - np.cumsum(counts)[1:N + 1]
    p = surv / reps
    return p, np.sqrt(p * (1 - p) / reps)


def tilt_identity(law, N: int, reps: int, seed=None, workers=None) -> dict:
    """Compare p_N with a0^N + a_plus * sum_{n<N} a0^n p~_{N-n}.

    The tilted curve comes from a single run, so its stderr is bounded by
    summing the per-term standard errors.
    """
    law = make_law(law)
    p = mc_p(law, N, reps, False, seed, workers)
    pt, se = mc_p_curve(law, N, reps, True, seed, workers)
    a0, ap = float(law.a_zero), float(law.a_plus)
    w = ap * a0 ** np.arange(N)
    rhs = a0 ** N + float(np.dot(w, pt[::-1]))
    rhs_se = float(np.dot(w, se[::-1]))
    sigma = math.hypot(p.stderr, rhs_se)
    return {"p": p.value, "p_stderr": p.stderr, "rhs": rhs, "rhs_stderr": rhs_se,
            "z": (p.value - rhs) / sigma if sigma > 0 else 0.0,
            "passed": abs(p.value - rhs) <= 3 * sigma}


# --------------------------------------------------------------------------
# exponent fits
# --------------------------------------------------------------------------

def _wls(x, y, w):
    W = float(np.sum(w))
    xm = float(np.dot(w, x)) / W
    ym = float(np.dot(w, y)) / W
    sxx = float(np.dot(w, (x - xm) ** 2))
    slope = float(np.dot(w, (x - xm) * (y - ym))) / sxx
    return slope, ym - slope * xm, math.sqrt(1.0 / sxx)


def exponent_fit(points: Sequence[Tuple[float, float, float]], level: float = 0.95) -> ExponentFit:
    """Weighted least squares of log p against log N.

    ``points`` are (N, estimate, stderr); the weight of a point is the
    inverse variance of log p, (p / stderr)^2.  Points with a zero estimate
    are dropped.  The interval is the normal interval at ``level``.
    """
    pts = [(float(n), float(p), float(e)) for n, p, e in points if p > 0]
    if len(pts) < MIN_FIT_POINTS:
        raise InsufficientData(f"need at least {MIN_FIT_POINTS} points with positive estimates, got {len(pts)}")
    ns = [n for n, _, _ in pts]
    if max(ns) / min(ns) < MIN_SPAN_FACTOR:
        raise InsufficientData(f"N must span a factor of at least {MIN_SPAN_FACTOR}")
    x = np.log(ns)
    y = np.log([p for _, p, _ in pts])
    w = np.array([(p / e) ** 2 if e > 0 else 1e12 for _, p, e in pts])
    slope, icpt, se = _wls(x, y, w)
    chi2 = float(np.dot(w, (y - icpt - slope * x) ** 2))
    z = float(stats.norm.ppf(0.5 + level / 2))
    return ExponentFit(slope, se, slope - z * se, slope + z * se, icpt, len(pts), chi2, level)


def exponent_scan(law, grid: Sequence[int], reps: int, seed=None, mode: str = "integrated",
                  tilted: bool = False, workers=None):
    """Independent estimates of p_N on ``grid`` and the fitted exponent."""
    law = make_law(law)
    seed = _require_seed(seed)
    ests = [mc_p(law, int(N), reps, tilted, seed, workers, mode, stream=f"fit/{mode}/N={int(N)}")
            for N in grid]
    pts = [(int(N), e.value, e.stderr) for N, e in zip(grid, ests)]
    return pts, exponent_fit(pts)


def parse_grid(spec: str) -> List[int]:
    """``a:b`` gives the powers of two from a to b; otherwise a comma list."""
    if ":" in spec:
        a, b = (int(v) for v in spec.split(":"))
        if a < 1 or b < a:
            raise ValueError(f"bad grid {spec!r}")
        out, n = [], 1
        while n <= b:
            if n >= a:
                out.append(n)
            n *= 2
        return out
    return sorted({int(v) for v in spec.split(",") if v.strip()})


# --------------------------------------------------------------------------
# joint tails of cycles
# --------------------------------------------------------------------------

def _skip_free(law: IncrementLaw) -> bool:
    c = classify(law)
    return c.right_continuous and c.left_continuous


def _tail_theory(law, which, s, t, f_samples, seed):
    """(theory, stderr, constant, rescaled, rescaled stderr) for the joint-tail limit.

    ``theory`` evaluates F at sigma s t^(-3/2).  An excursion of length m has
    area close to sigma m^(3/2) xi_ex, which puts F at s / (sigma t^(3/2))
    instead; that value is returned as ``rescaled``.  The two agree when
    sigma = 1 or s = 0.
    """
    sigma = law.sigma
    if which == "zero-cycle":
        const = sigma / math.sqrt(2 * math.pi)
    else:
        const = prop1_constant(law)
    if s == 0:
        v = const * t ** -0.5
        return v, 0.0, const, v, 0.0
    if f_samples is None:
        f_samples = sample_xi_ex_many(DEFAULT_MESH, E_XI_EX_CBRT_SAMPLES, seed, stream="tails/F")
    out = []
    for x in (sigma * s, s / sigma):
        if t == 0:
            # limit t -> 0 of t^(-1/2) F(x t^(-3/2)) = E xi_ex^(1/3) x^(-1/3)
            v = np.cbrt(np.asarray(f_samples))
            scale = x ** (-1.0 / 3.0)
            out.append((const * scale * float(v.mean()), const * scale * float(v.std(ddof=1) / math.sqrt(v.size))))
        else:
            F, se = f_eval(x * t ** -1.5, f_samples)
            out.append((const * t ** -0.5 * F, const * t ** -0.5 * se))
    return out[0][0], out[0][1], const, out[1][0], out[1][1]


def _tail_states(law, which, side, n, s, t, keys, cap, backend=None):
    """Per-replicate state: 1 event, 0 no event, 2 undetermined."""
    kl = law.kernel
    tn = int(math.floor(t * n))
    thr = s * n ** 1.5
    if which == "theta-only":
        tp, _, _, _, fl, _ = kernels.cycle_kernel(kl, keys, tn + 1, 0, backend=backend)
        return np.where(fl & kernels.FLAG_PLUS_CENSORED, 1, 0).astype(np.int8)
    if which == "xi+":
        _, xp, _, _, fl, _ = kernels.cycle_kernel(kl, keys, cap, 0, tn, thr, backend=backend)
        st = np.zeros(len(keys), dtype=np.int8)
        st[(fl & kernels.FLAG_STOPPED) != 0] = 1
        st[(fl & kernels.FLAG_PLUS_CENSORED) != 0] = 2
        return st
    if which in ("xi-", "xi"):
        tp, xp, tm, xm, fl, _ = kernels.cycle_kernel(kl, keys, cap, cap, backend=backend)
        plus_c = (fl & kernels.FLAG_PLUS_CENSORED) != 0
        minus_c = (fl & kernels.FLAG_MINUS_CENSORED) != 0
        st = np.full(len(keys), 2, dtype=np.int8)
        done = ~(plus_c | minus_c)
        if which == "xi-":
            ev = (tm > tn) & (xm < -thr)
            st[done] = ev[done]
            st[minus_c & (xm < -thr)] = 1
            return st
        xi = xp + xm
        if side == "upper":
            ev = (tp + tm > tn) & (xi > thr)
            st[done] = ev[done]
            st[minus_c & (xi <= thr)] = 0
        else:
            ev = (tp + tm > tn) & (xi < -thr)
            st[done] = ev[done]
            st[minus_c & (xi < -thr)] = 1
        return st
    # zero-cycles
    one_signed = _skip_free(law)
    sgn = 1.0 if side == "upper" else -1.0
    if one_signed and s == 0:
        th, xi, fl = kernels.zero_cycle_kernel(kl, keys, cap, tn, backend=backend)
    else:
        th, xi, fl = kernels.zero_cycle_kernel(kl, keys, cap, -1, backend=backend)
    y = sgn * xi
    st = np.full(len(keys), 2, dtype=np.int8)
    done = fl == 0
    st[done] = ((th > tn) & (y > thr))[done]
    cut = ~done
    if one_signed:
        # during a zero-cycle of a skip-free walk S keeps one sign, so the
        # partial area moves monotonically away from 0
        st[cut & (y > thr)] = 1
        st[cut & (y < 0)] = 0
    return st


def joint_tail(law, s: float, t: float, ns: Sequence[int], reps: int, which: str = "xi+",
               seed=None, workers=None, side: str = "upper", cap: Optional[int] = None,
               f_samples=None, backend=None) -> TailCurve:
    """n^(1/2) P{event} for each n in ``ns`` from ``reps`` independent first cycles.

    which:
      ``theta-only``  theta+ > t n
      ``xi+``         xi+ > s n^(3/2), theta+ > t n
      ``xi-``         xi- < -s n^(3/2), theta- > t n
      ``xi``          xi > s n^(3/2), theta > t n  (``side='lower'``: xi < -s n^(3/2))
      ``zero-cycle``  xi0 > s n^(3/2), theta0 > t n (or the lower side)
    """
    law = make_law(law)
    seed = _require_seed(seed)
    if which not in TAIL_KINDS:
        raise ValueError(f"unknown tail kind {which!r}")
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    if s < 0 or t < 0:
        raise InvalidRegion("s and t must be nonnegative")
    if s + t <= 0:
        raise InvalidRegion("s + t must be positive")
    if which == "theta-only" and (t <= 0 or s != 0):
        raise InvalidRegion("theta-only needs s = 0 and t > 0")
    if which == "zero-cycle":
        if not law.integer_valued:
            raise HypothesisNotMet(f"{law.label} is not integer-valued")
        if s > 0 and law.span != 1:
            raise HypothesisNotMet(f"{law.label} has lattice span {law.span}, need 1")
    else:
        if not prop1_constants(law):
            raise HypothesisNotMet(
                f"{law.label} is neither upper exponential nor memoryless on both sides")
    ns = sorted({int(n) for n in ns})
    if not ns or ns[0] < 1:
        raise ValueError("n grid must be positive")
    theory, theory_se, const, resc, resc_se = _tail_theory(law, which, s, t, f_samples, seed)
    pts = []
    for n in ns:
        # full cycles keep running after the event is decided, so they get more room
        room = 1024 if which in ("xi", "xi-") else 64
        c = cap or max(room * (int(t * n) + 1), room * n, 1 << 12)
        skey = stream_key(seed, f"tails/{which}/{side}/s={s!r}/t={t!r}/n={n}")

        def run(a, b, n=n, c=c, skey=skey):
            st = _tail_states(law, which, side, n, s, t, rep_keys(skey, a, b), c, backend)
            return np.bincount(st, minlength=3)[:3]

        tot = np.sum(map_chunks(run, reps, workers=workers), axis=0)
        hits, und = int(tot[1]), int(tot[2])
        lo, hi = hits / reps, (hits + und) / reps
        mid, se = _bernoulli(hits + und / 2.0, reps)
        r = math.sqrt(n)
        pts.append(TailPoint(n, r * mid, r * se, hits, und, r * lo, r * hi))
    return TailCurve(which, s, t, pts, theory=theory, theory_stderr=theory_se, constant=const,
                     reps=reps, seed=seed, law=law.label, theory_rescaled=resc,
                     theory_rescaled_stderr=resc_se)


# --------------------------------------------------------------------------
# cycle samples shared by the symmetry and association checks
# --------------------------------------------------------------------------

def _first_cycles(law, reps, seed, stream, cap, workers, backend=None):
    skey = stream_key(seed, stream)
    kl = law.kernel

    def run(a, b):
        return kernels.cycle_kernel(kl, rep_keys(skey, a, b), cap, cap, backend=backend)[:5]

    parts = map_chunks(run, reps, workers=workers)
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(5))


@dataclass
class SymmetryReport:
    passed: bool
    hypothesis_met: bool
    n_cycles: int
    n_censored: int
    n_positive: int
    n_negative: int
    sign_pvalue: float
    ks_statistics: List[float]
    ks_pvalues: List[float]
    strata: List[Tuple[int, int]]
    level: float
    min_pvalue: float

    def as_dict(self) -> dict:
        return asdict(self)


def _theta_strata(theta: np.ndarray, k: int) -> List[Tuple[int, int]]:
    edges = np.unique(np.quantile(theta, np.linspace(0, 1, k + 1), method="lower").astype(np.int64))
    edges[-1] = int(theta.max()) + 1
    out = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    return out or [(int(theta.min()), int(theta.max()) + 1)]


def xi_symmetry_test(law, reps: int, seed=None, workers=None, level: float = 1e-3,
                     strata: int = 8, cap: int = 1 << 20, require_hypothesis: bool = True,
                     backend=None) -> SymmetryReport:
    """Test that (xi_1, theta_1) and (-xi_1, theta_1) have the same law.

    Two tests at a Bonferroni-split ``level``: a two-sided sign test on xi_1,
    and within each theta stratum a two-sample Kolmogorov-Smirnov test
    between xi on even replicates and -xi on odd replicates (two independent
    halves, so the classical null distribution applies).  Cycles censored at
    ``cap`` are dropped; the censoring event depends on theta only.
    """
    law = make_law(law)
    seed = _require_seed(seed)
    met = classify(law).upper_exponential
    if require_hypothesis and not met:
        raise HypothesisNotMet(f"{law.label} is not upper exponential")
    tp, xp, tm, xm, fl = _first_cycles(law, reps, seed, "symmetry", cap, workers, backend)
    ok = (fl & (kernels.FLAG_PLUS_CENSORED | kernels.FLAG_MINUS_CENSORED)) == 0
    idx = np.flatnonzero(ok)
    xi = (xp + xm)[idx]
    th = (tp + tm)[idx]
    npos, nneg = int(np.count_nonzero(xi > 0)), int(np.count_nonzero(xi < 0))
    sign_p = float(stats.binomtest(npos, npos + nneg, 0.5).pvalue) if npos + nneg else 1.0
    bins = _theta_strata(th, strata)
    even = (idx % 2) == 0
    ks_s, ks_p = [], []
    for a, b in bins:
        m = (th >= a) & (th < b)
        x1, x2 = xi[m & even], -xi[m & ~even]
        if len(x1) < 2 or len(x2) < 2:
            ks_s.append(0.0)
            ks_p.append(1.0)
            continue
        r = stats.ks_2samp(x1, x2)
        ks_s.append(float(r.statistic))
        ks_p.append(float(r.pvalue))
    n_tests = 1 + len(bins)
    pmin = min([sign_p] + ks_p)
    passed = pmin >= level / n_tests
    return SymmetryReport(passed, met, reps, int(reps - idx.size), npos, nneg, sign_p,
                          ks_s, ks_p, bins, level, pmin)


# --------------------------------------------------------------------------
# association
# --------------------------------------------------------------------------

@dataclass
class AssociationCell:
    a: float
    b: int
    cov: float
    stderr: float
    undetermined: int
    flagged: bool


@dataclass
class AssociationReport:
    cells: List[AssociationCell]
    n_cycles: int
    n_flagged: int
    min_z: float

    @property
    def passed(self) -> bool:
        return self.n_flagged == 0

    def rows(self):
        for c in self.cells:
            yield (c.a, c.b, c.cov, c.stderr, c.undetermined, int(c.flagged))


def _cov(X: np.ndarray, Y: np.ndarray) -> Tuple[float, float]:
    Xc = X - X.mean()
    Yc = Y - Y.mean()
    z = Xc * Yc
    n = len(z)
    return float(z.mean()), float(z.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")


def association_scan(law, reps: int, seed=None, grid: int = 10, thresholds=None, workers=None,
                     cap: int = 1 << 16, backend=None) -> AssociationReport:
    """Empirical cov(1{xi_1 > a}, 1{theta_1+ > b}) over a grid of thresholds.

    By default ``a`` and ``b`` run over the empirical quantiles
    ``(i + 1/2) / grid``.  When a censored cycle leaves 1{xi_1 > a} open,
    the open indicators are set to maximise the covariance; a cell is
    flagged only if even that maximum lies below -5 stderr.
    """
    law = make_law(law)
    seed = _require_seed(seed)
    if reps < 10_000:
        raise ValueError("association_scan needs reps >= 10^4")
    tp, xp, tm, xm, fl = _first_cycles(law, reps, seed, "association", cap, workers, backend)
    plus_c = (fl & kernels.FLAG_PLUS_CENSORED) != 0
    minus_c = (fl & kernels.FLAG_MINUS_CENSORED) != 0
    xi = xp + xm
    complete = ~(plus_c | minus_c)
    if thresholds is None:
        qs = (np.arange(grid) + 0.5) / grid
        a_vals = [float(v) for v in np.quantile(xi[complete], qs)]
        b_vals = sorted({int(v) for v in np.quantile(tp, qs, method="lower")})
    else:
        a_vals, b_vals = thresholds
    cells = []
    nflag, min_z = 0, math.inf
    for b in b_vals:
        if b >= cap:
            raise ValueError("theta threshold must lie below the cap")
        Y = (tp > b).astype(np.float64)
        ybar = Y.mean()
        for a in a_vals:
            X = (xi > a).astype(np.float64)
            # plus-censored: xi unknown; minus-censored: only xi <= partial is known
            und = plus_c | (minus_c & (xi > a))
            X[und] = Y[und] > ybar
            cov, se = _cov(X, Y)
            flagged = bool(se > 0 and cov < -5 * se) or bool(se == 0 and cov < 0)
            if se > 0:
                min_z = min(min_z, cov / se)
            nflag += flagged
            cells.append(AssociationCell(a, b, cov, se, int(und.sum()), flagged))
    return AssociationReport(cells, reps, nflag, min_z if math.isfinite(min_z) else 0.0)


# --------------------------------------------------------------------------
# inequality chains
# --------------------------------------------------------------------------

@dataclass
class ChainItem:
    name: str
    lhs: float
    rhs: float
    lhs_stderr: float
    rhs_stderr: float
    passed: bool
    detail: str = ""


@dataclass
class ChainReport:
    N: int
    K: int
    reps: int
    estimates: dict
    items: List[ChainItem]

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)


def _le(name, lhs, lse, rhs, rse, detail="") -> ChainItem:
    return ChainItem(name, float(lhs), float(rhs), float(lse), float(rse),
                     bool(lhs <= rhs + 3 * math.hypot(lse, rse)), detail)


def chain_checks(law, N: int, reps: int, seed=None, workers=None, zero_cycle: Optional[bool] = None,
                 cap: Optional[int] = None, backend=None) -> ChainReport:
    """Estimate every quantity in the upper and lower inequality chains.

    Upper: p~_N <= P{tau_nu > N}, where nu is the first cycle whose running
    area sum turns negative; both indicators are computed on the same
    replicate keys, so the inequality also holds path by path.
    Lower, with K = floor(sqrt N):
    p~_N >= P{min_{k<=K} xi-sums >= 0, theta+_1 + ... + theta+_K > N}
         >= P{min_{k<=K} xi-sums >= 0} * P{theta+_1 + ... + theta+_K > N}.
    For integer-valued walks (or ``zero_cycle=True``) the zero-cycle bound
    p_N <= P{tau0_nu0 > N} is checked too.
    """
    law = make_law(law)
    seed = _require_seed(seed)
    c = classify(law)
    if not c.theorem1_applies:
        raise HypothesisNotMet(f"{law.label} is outside the class covered by the chain")
    if law.a_plus == 0 or law.a_minus == 0:
        raise HypothesisNotMet(f"{law.label} needs mass on both sides of 0")
    K = max(1, int(math.isqrt(N)))
    cap = cap or 64 * N
    kl = law.kernel
    est, items = {}, []

    # upper chain, pathwise on shared keys
    skey = stream_key(seed, f"chain/tilted/N={N}")

    def upper(a, b):
        keys = rep_keys(skey, a, b)
        t0 = kernels.walk_fail_times(kl, keys, N, kernels.MODE_INTEGRATED, True, backend=backend)
        t2 = kernels.walk_fail_times(kl, keys, N, kernels.MODE_CYCLE_OVERSHOOT, True, backend=backend)
        s0, s2 = t0 > N, t2 > N
        return np.array([s0.sum(), s2.sum(), (s0 & ~s2).sum()], dtype=np.int64)

    u = np.sum(map_chunks(upper, reps, workers=workers), axis=0)
    pt, pt_se = _bernoulli(int(u[0]), reps)
    pnu, pnu_se = _bernoulli(int(u[1]), reps)
    est.update(p_tilde=pt, p_tilde_stderr=pt_se, p_tau_nu=pnu, p_tau_nu_stderr=pnu_se,
               pathwise_upper_violations=int(u[2]))
    items.append(_le("p~_N <= P{tau_nu > N}", pt, pt_se, pnu, pnu_se))
    items.append(ChainItem("pathwise p~_N <= P{tau_nu > N}", float(u[2]), 0.0, 0.0, 0.0, bool(u[2] == 0),
                           "replicates surviving in A but not at cycle ends"))

    # lower chain
    def lower(a, b):
        keys = rep_keys(skey, a, b)
        AS, BS, _, _, _ = kernels.chain_kernel(kl, keys, K, N, cap, 0, backend=backend)
        t0 = kernels.walk_fail_times(kl, keys, N, kernels.MODE_INTEGRATED, True, backend=backend)
        joint_lo = (AS == 1) & (BS == 1)
        joint_hi = (AS != 0) & (BS != 0)
        return np.array([(AS == 1).sum(), (AS != 0).sum(), joint_lo.sum(), joint_hi.sum(),
                         (joint_lo & (t0 <= N)).sum()], dtype=np.int64)

    lo = np.sum(map_chunks(lower, reps, workers=workers), axis=0)
    bkey = stream_key(seed, f"chain/theta-sum/N={N}")

    def theta_sum(a, b):
        _, BS, _, _, _ = kernels.chain_kernel(kl, rep_keys(bkey, a, b), K, N, cap, 1, backend=backend)
        return np.array([(BS == 1).sum(), (BS != 0).sum()], dtype=np.int64)

    bs = np.sum(map_chunks(theta_sum, reps, workers=workers), axis=0)
    pa_lo, pa_se = _bernoulli(int(lo[0]), reps)
    pa_hi = float(lo[1] / reps)
    pj_lo, pj_se = _bernoulli(int(lo[2]), reps)
    pj_hi = float(lo[3] / reps)
    pb_lo, pb_se = _bernoulli(int(bs[0]), reps)
    pb_hi = float(bs[1] / reps)
    prod_lo = pa_lo * pb_lo
    prod_se = math.hypot(pa_se * pb_lo, pb_se * pa_lo)
    est.update(K=K, p_min_xi=pa_lo, p_min_xi_upper=pa_hi, p_min_xi_stderr=pa_se,
               p_theta_sum=pb_lo, p_theta_sum_upper=pb_hi, p_theta_sum_stderr=pb_se,
               p_joint=pj_lo, p_joint_upper=pj_hi, p_joint_stderr=pj_se,
               product=prod_lo, product_stderr=prod_se, pathwise_lower_violations=int(lo[4]))
    items.append(_le("P{joint} <= p~_N", pj_lo, pj_se, pt, pt_se))
    items.append(ChainItem("pathwise P{joint} <= p~_N", float(lo[4]), 0.0, 0.0, 0.0, bool(lo[4] == 0),
                           "replicates in the joint event that fail in A before N"))
    items.append(_le("product <= P{joint}", prod_lo, prod_se, pj_hi, pj_se))
    items.append(_le("product <= p~_N", prod_lo, prod_se, pt, pt_se))

    if zero_cycle is None:
        zero_cycle = law.integer_valued
    if zero_cycle:
        if not law.integer_valued:
            raise NotLattice(f"{law.label} is not integer-valued")
        zkey = stream_key(seed, f"chain/zero/N={N}")

        def zero(a, b):
            keys = rep_keys(zkey, a, b)
            t0 = kernels.walk_fail_times(kl, keys, N, kernels.MODE_INTEGRATED, False, backend=backend)
            t3 = kernels.walk_fail_times(kl, keys, N, kernels.MODE_CYCLE_ZERO, False, backend=backend)
            s0, s3 = t0 > N, t3 > N
            return np.array([s0.sum(), s3.sum(), (s0 & ~s3).sum()], dtype=np.int64)

        z = np.sum(map_chunks(zero, reps, workers=workers), axis=0)
        p0, p0_se = _bernoulli(int(z[0]), reps)
        q0, q0_se = _bernoulli(int(z[1]), reps)
        est.update(p=p0, p_stderr=p0_se, p_tau0_nu0=q0, p_tau0_nu0_stderr=q0_se,
                   pathwise_zero_violations=int(z[2]))
        items.append(_le("p_N <= P{tau0_nu0 > N}", p0, p0_se, q0, q0_se))
        items.append(ChainItem("pathwise p_N <= P{tau0_nu0 > N}", float(z[2]), 0.0, 0.0, 0.0, bool(z[2] == 0)))
    return ChainReport(N, K, reps, est, items)


# --------------------------------------------------------------------------
# partial sums of sum_n (1/n)(P{xi_1 + ... + xi_n > 0} - 1/2)
# --------------------------------------------------------------------------

@dataclass
class PartialSums:
    n: np.ndarray
    prob_positive: np.ndarray
    partial_sums: np.ndarray
    stderr: np.ndarray
    n_rows: int
    n_dropped: int


def sign_series_partial_sums(law, n_max: int, reps: int, seed=None, workers=None,
                        cap: int = 1 << 20, backend=None) -> PartialSums:
    """Partial sums of sum_{k<=n} (1/k)(P{xi_1 + ... + xi_k > 0} - 1/2).

    Each replicate is a row of ``n_max`` i.i.d. cycles, so the law needs a
    memoryless overshoot.  The stderr of a partial sum is that of the row
    statistic sum_k (1/k)(1{xi-sum_k > 0} - 1/2), hence exact for the
    correlated terms.  Rows containing a censored cycle are dropped.
    """
    law = make_law(law)
    seed = _require_seed(seed)
    if not classify(law).upper_memoryless:
        raise HypothesisNotMet(f"cycles of {law.label} are not i.i.d.")
    skey = stream_key(seed, "sign-series")
    kl = law.kernel
    w = 1.0 / np.arange(1, n_max + 1)

    def run(a, b):
        _, xp, _, xm, fl, _ = kernels.cycle_kernel(kl, rep_keys(skey, a * n_max, b * n_max), cap, cap,
                                                   backend=backend)
        xi = (xp + xm).reshape(b - a, n_max)
        bad = ((fl & (kernels.FLAG_PLUS_CENSORED | kernels.FLAG_MINUS_CENSORED)) != 0)
        keep = ~bad.reshape(b - a, n_max).any(axis=1)
        pos = (np.cumsum(xi[keep], axis=1) > 0).astype(np.int64)
        return pos.sum(axis=0), np.cumsum((pos - 0.5) * w, axis=1), int((~keep).sum())

    parts = map_chunks(run, reps, workers=workers, chunk=max(1, (1 << 15) // n_max))
    counts = np.sum([p[0] for p in parts], axis=0)
    rows = np.concatenate([p[1] for p in parts])
    dropped = sum(p[2] for p in parts)
    m = rows.shape[0]
    if m < 2:
        raise InsufficientData("fewer than two complete rows")
    return PartialSums(np.arange(1, n_max + 1), counts / m, rows.mean(axis=0),
                       rows.std(axis=0, ddof=1) / math.sqrt(m), m, dropped)


def timed(fn, *args, **kwargs):
    """(result, elapsed milliseconds)."""
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, (time.perf_counter() - t0) * 1e3

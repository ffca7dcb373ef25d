"""Trajectories of S, the tilted walk and the integrated walk A; cycle decomposition.

An overshoot cycle of the tilted walk is a maximal run of nonnegative values
(duration ``theta_plus``, area ``xi_plus``) followed by the maximal run of
nonpositive values that comes after it (``theta_minus``, ``xi_minus``).  The
cycle ends at the last nonpositive value before the walk jumps strictly
above 0.  A zero in a nonnegative run extends that run; so a path such as
``1, 0, 1`` stays inside one positive run.

A zero-cycle of an integer walk runs from one return to 0 to the next,
where a return at ``k`` requires ``S_k = 0`` and ``S_{k-1} != 0``; zero
steps at the start of a cycle are part of it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from . import kernels
from .errors import CycleBudgetExceeded, DegenerateLaw, IncompleteCycles, NoPositivePart, NotLattice
from .laws import IncrementLaw, classify, make_law
from .rng import rep_keys, stream_key

DEFAULT_STEP_CAP = 10 ** 9


# --------------------------------------------------------------------------
# data
# --------------------------------------------------------------------------

@dataclass
class Trajectory:
    increments: np.ndarray
    S: np.ndarray
    A: np.ndarray
    tilted: bool = False

    def __len__(self):
        return len(self.increments)


@dataclass(frozen=True)
class Cycle:
    theta_plus: int
    xi_plus: float
    theta_minus: int
    xi_minus: float

    @property
    def theta(self) -> int:
        return self.theta_plus + self.theta_minus

    @property
    def xi(self) -> float:
        return self.xi_plus + self.xi_minus


@dataclass(frozen=True)
class ZeroCycle:
    theta0: int
    xi0: float


def resolve_key(rng, stream: str) -> int:
    """A 64-bit stream key from an integer seed or a numpy Generator."""
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2 ** 64, dtype=np.uint64))
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return stream_key(int(rng), stream)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return np.random.default_rng(int(rng))


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

def simulate_trajectory(law, N: int, tilted: bool = False, rng=None) -> Trajectory:
    """N increments of ``law`` (the first one from the overshoot law when tilted)."""
    law = make_law(law)
    if N < 1:
        raise ValueError("N must be >= 1")
    if tilted and law.pos is None:
        raise NoPositivePart(f"{law.label} has a_plus = 0")
    gen = _as_generator(rng)
    x = law.sample(N, gen)
    if tilted:
        x[0] = law.sample_overshoot(1, gen)[0]
    S = np.cumsum(x)
    A = np.cumsum(S)
    return Trajectory(x, S, A, tilted)


def trajectory_from_increments(x, tilted: bool = False) -> Trajectory:
    x = np.asarray(x, dtype=np.float64)
    S = np.cumsum(x)
    return Trajectory(x, S, np.cumsum(S), tilted)


def cycle_boundaries(S: np.ndarray) -> np.ndarray:
    """0-based indices j at which a complete overshoot cycle ends.

    ``j`` ends a cycle when ``S[j+1] > 0`` and the last nonzero value up to
    ``j`` is negative.
    """
    S = np.asarray(S)
    if S.size < 2:
        return np.empty(0, dtype=np.int64)
    sg = np.sign(S)
    pos = np.where(sg != 0, np.arange(S.size), 0)
    np.maximum.accumulate(pos, out=pos)
    last_sign = np.where((pos == 0) & (sg[0] == 0), 0, sg[pos])
    return np.flatnonzero((last_sign[:-1] < 0) & (S[1:] > 0)).astype(np.int64)


def trajectory_cycles(traj: Trajectory) -> Tuple[List[Cycle], np.ndarray]:
    """Complete cycles of a tilted trajectory and their end indices (1-based tau_n)."""
    S = traj.S
    ends = cycle_boundaries(S)
    starts = np.concatenate(([0], ends[:-1] + 1)) if ends.size else np.empty(0, dtype=np.int64)
    csum = np.concatenate(([0.0], np.cumsum(S)))
    negs = np.flatnonzero(S < 0)
    out = []
    for a, b in zip(starts, ends):
        f = negs[np.searchsorted(negs, a)]
        out.append(Cycle(int(f - a), float(csum[f] - csum[a]),
                         int(b + 1 - f), float(csum[b + 1] - csum[f])))
    return out, ends + 1


def trajectory_zero_cycles(traj: Trajectory) -> Tuple[List[ZeroCycle], np.ndarray]:
    S = traj.S
    prev = np.concatenate(([0.0], S[:-1]))
    ends = np.flatnonzero((S == 0) & (prev != 0))
    csum = np.concatenate(([0.0], np.cumsum(S)))
    out, a = [], 0
    for b in ends:
        out.append(ZeroCycle(int(b + 1 - a), float(csum[b + 1] - csum[a])))
        a = b + 1
    return out, ends + 1


# --------------------------------------------------------------------------
# cycle streams
# --------------------------------------------------------------------------

def _check_budget(flags, step_cap):
    if np.any(flags & (kernels.FLAG_PLUS_CENSORED | kernels.FLAG_MINUS_CENSORED)):
        raise CycleBudgetExceeded(f"a cycle run exceeded the step cap {step_cap}")


def decompose_cycles(law, n_cycles: int, rng, step_cap: int = DEFAULT_STEP_CAP,
                     batch: int = 4096) -> Iterator[Cycle]:
    """Lazily generate the first ``n_cycles`` cycles of the tilted walk.

    When the overshoot is memoryless the cycles are i.i.d. and are drawn in
    vectorised batches; otherwise each cycle starts from the overshoot that
    ended the previous one.
    """
    law = make_law(law)
    if law.a_plus == 0 or law.a_minus == 0:
        raise DegenerateLaw(f"{law.label} needs both a_plus > 0 and a_minus > 0")
    skey = resolve_key(rng, "cycles")
    kl = law.kernel
    if classify(law).upper_memoryless:
        done = 0
        while done < n_cycles:
            m = min(batch, n_cycles - done)
            tp, xp, tm, xm, fl, _ = kernels.cycle_kernel(
                kl, rep_keys(skey, done, done + m), step_cap, step_cap)
            _check_budget(fl, step_cap)
            for i in range(m):
                yield Cycle(int(tp[i]), float(xp[i]), int(tm[i]), float(xm[i]))
            done += m
        return
    start = None
    for i in range(n_cycles):
        tp, xp, tm, xm, fl, es = kernels.cycle_kernel(
            kl, rep_keys(skey, i, i + 1), step_cap, step_cap, start=start)
        _check_budget(fl, step_cap)
        start = es
        yield Cycle(int(tp[0]), float(xp[0]), int(tm[0]), float(xm[0]))


def decompose_zero_cycles(law, n_cycles: int, rng, step_cap: int = DEFAULT_STEP_CAP,
                          batch: int = 4096) -> Iterator[ZeroCycle]:
    """Lazily generate i.i.d. zero-cycles of an integer-valued walk."""
    law = make_law(law)
    if not law.integer_valued:
        raise NotLattice(f"{law.label} is not integer-valued")
    skey = resolve_key(rng, "zero-cycles")
    done = 0
    while done < n_cycles:
        m = min(batch, n_cycles - done)
        th, xi, fl = kernels.zero_cycle_kernel(law.kernel, rep_keys(skey, done, done + m), step_cap)
        if np.any(fl & 1):
            raise CycleBudgetExceeded(f"a zero-cycle exceeded the step cap {step_cap}")
        for i in range(m):
            yield ZeroCycle(int(th[i]), float(xi[i]))
        done += m


def cycles_to_arrays(cycles) -> dict:
    cycles = list(cycles)
    return {
        "theta_plus": np.array([c.theta_plus for c in cycles], dtype=np.int64),
        "xi_plus": np.array([c.xi_plus for c in cycles]),
        "theta_minus": np.array([c.theta_minus for c in cycles], dtype=np.int64),
        "xi_minus": np.array([c.xi_minus for c in cycles]),
    }


# --------------------------------------------------------------------------
# pathwise identities
# --------------------------------------------------------------------------

@dataclass
class SandwichReport:
    passed: bool
    N: int
    eta: int
    n_cycles: int
    first_violation: Optional[int]
    survived: bool
    lower_event: bool
    upper_event: bool


def sandwich_check(traj: Trajectory, N: int) -> SandwichReport:
    """Check the cycle identities on one tilted trajectory.

    (i) for every complete cycle n: min_{k <= tau_n} A_k >= 0 iff the
    partial sums of xi_1..xi_n are all >= 0, and sum_{i<=n} xi_i = A_{tau_n};
    (ii) eta(N) = max{k : theta_1 + ... + theta_k <= N} equals the number
    of cycle ends <= N, and the events {cycle sums >= 0 up to eta+1},
    {A_k >= 0 for k <= N}, {cycle sums >= 0 up to eta} are nested.
    """
    if not traj.tilted:
        raise ValueError("sandwich_check needs a tilted trajectory")
    cycles, taus = trajectory_cycles(traj)
    thetas = np.array([c.theta for c in cycles], dtype=np.int64)
    xis = np.array([c.xi for c in cycles])
    eta_theta = int(np.searchsorted(np.cumsum(thetas), N, side="right"))
    eta = int(np.searchsorted(taus, N, side="right"))
    if len(cycles) < eta + 1:
        raise IncompleteCycles(f"trajectory holds {len(cycles)} complete cycles, need {eta + 1}")
    A = traj.A
    run_min_A = np.minimum.accumulate(A)
    csum_xi = np.cumsum(xis)
    cmin_xi = np.minimum.accumulate(csum_xi)
    first = None
    for n in range(len(cycles)):
        t = taus[n]
        same_area = abs(csum_xi[n] - A[t - 1]) <= 1e-9 * max(1.0, abs(A[t - 1]))
        same_event = (run_min_A[t - 1] >= 0) == (cmin_xi[n] >= 0)
        if not (same_area and same_event):
            first = n + 1
            break
    survived = bool(run_min_A[N - 1] >= 0)
    lower = bool(cmin_xi[eta] >= 0)
    upper = bool(cmin_xi[eta - 1] >= 0) if eta >= 1 else True
    nested = (not lower or survived) and (not survived or upper)
    ok = first is None and eta == eta_theta and nested
    if first is None and not ok:
        first = 0
    return SandwichReport(ok, N, eta, len(cycles), first, survived, lower, upper)


def sandwich_trajectory(law, N: int, rng, factor: int = 64, max_tries: int = 8) -> Trajectory:
    """A tilted trajectory long enough for ``sandwich_check(traj, N)``."""
    law = make_law(law)
    gen = _as_generator(rng)
    length = factor * N
    for _ in range(max_tries):
        traj = simulate_trajectory(law, length, tilted=True, rng=gen)
        _, taus = trajectory_cycles(traj)
        eta = int(np.searchsorted(taus, N, side="right"))
        if len(taus) >= eta + 1:
            return traj
        length *= 4
    raise IncompleteCycles(f"no complete cycle after {length} steps")

"""Command-line front end: ``persistwalk <command> [options]``.

Every command prints a one-line summary.  The main artifact (CSV or JSON
lines) goes to ``--out`` when given, otherwise to stdout, in which case the
summary goes to stderr.  Exit status: 0 success, 1 runtime error, 2 usage
error (bad flags, unknown law spec, missing seed).
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__, estimators, exactdp, excursion, io, series
from .errors import LawSpecError, PersistWalkError
from .laws import classify, make_law, prop1_constants

STOCHASTIC = {"pn-mc", "fit-exponent", "tails", "fcurve", "assoc", "symmetry", "chain-check"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _int_or_pow(text: str) -> int:
    text = text.strip()
    if "^" in text:
        b, e = text.split("^", 1)
        return int(b) ** int(e)
    return int(float(text)) if "e" in text.lower() else int(text)


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--law", default="simple", help="law spec, e.g. simple, laplace, geom2:q+=1/2,q-=1/2,a0=0")
    common.add_argument("--seed", type=int, default=None, help="required by stochastic commands")
    common.add_argument("--workers", type=int, default=None,
                        help="threads for reductions (default: $PERSISTWALK_WORKERS or all cores)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default: from the --out suffix, else the command's default)")
    common.add_argument("--plot-data", default=None, metavar="PATH",
                        help="also write a two-column gnuplot data file")
    common.add_argument("--config", default=None, help="file of key=value lines mirroring flags")

    p = argparse.ArgumentParser(prog="persistwalk", description="Persistence of integrated random walks.")
    p.add_argument("--version", action="version", version=f"persistwalk {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")

    c = sub.add_parser("pn-exact", parents=[common], help="exact p_N for N = 1..N (lattice laws)")
    c.add_argument("--N", type=_int_or_pow, required=True)
    c.add_argument("--tilted", action="store_true")
    c.add_argument("--brute", action="store_true", help="also enumerate all paths as a cross-check")

    c = sub.add_parser("pn-mc", parents=[common], help="Monte Carlo p_N")
    c.add_argument("--N", type=_int_or_pow, required=True)
    c.add_argument("--reps", type=_int_or_pow, default=10 ** 5)
    c.add_argument("--tilted", action="store_true")
    c.add_argument("--mode", choices=("integrated", "plain"), default="integrated")

    c = sub.add_parser("fit-exponent", parents=[common], help="log-log slope of p_N over a grid")
    c.add_argument("--grid", default="256:16384", help="a:b (powers of two) or a comma list")
    c.add_argument("--reps", type=_int_or_pow, default=10 ** 5)
    c.add_argument("--mode", choices=("integrated", "plain"), default="integrated")
    c.add_argument("--tilted", action="store_true")

    c = sub.add_parser("cycle-law", parents=[common], help="exact joint law of (theta, xi)")
    c.add_argument("--L", type=int, default=16)
    c.add_argument("--kind", choices=("zero", "overshoot"), default="zero")
    c.add_argument("--position-cap", type=int, default=None)

    c = sub.add_parser("series-check", parents=[common], help="exact generating-function identities")
    c.add_argument("--L", type=int, default=16)
    c.add_argument("--identity", choices=("xi-zeta", "lattice-H"), default="xi-zeta")
    c.add_argument("--kind", choices=("zero", "overshoot"), default=None,
                   help="cycle kind (default: zero for lattice-H, overshoot for xi-zeta)")
    c.add_argument("--position-cap", type=int, default=None)

    c = sub.add_parser("tauberian", parents=[common], help="log-log fit of an exact ladder tail")
    c.add_argument("--L", type=int, default=4096)
    c.add_argument("--which", choices=("theta0", "plus", "minus"), default="theta0")
    c.add_argument("--n-min", type=int, default=16)

    c = sub.add_parser("tails", parents=[common], help="joint tails of cycles, scaled by n^(1/2)")
    c.add_argument("--s", type=float, default=0.0)
    c.add_argument("--t", type=float, default=1.0)
    c.add_argument("--grid", default="256:1024")
    c.add_argument("--reps", type=_int_or_pow, default=10 ** 5)
    c.add_argument("--which", choices=estimators.TAIL_KINDS, default="theta-only")
    c.add_argument("--side", choices=("upper", "lower"), default="upper")
    c.add_argument("--mesh", type=int, default=excursion.DEFAULT_MESH)

    c = sub.add_parser("fcurve", parents=[common], help="F(x) from sampled excursion areas")
    c.add_argument("--x", type=_floats, default=[0, 0.1, 0.25, 0.5, 1, 2, 4, 8])
    c.add_argument("--mesh", type=int, default=excursion.DEFAULT_MESH)
    c.add_argument("--samples", type=_int_or_pow, default=excursion.DEFAULT_SAMPLES)
    c.add_argument("--method", choices=("exact", "grid"), default="exact")

    c = sub.add_parser("assoc", parents=[common], help="association scan of (xi_1, theta_1+)")
    c.add_argument("--reps", type=_int_or_pow, default=10 ** 5)
    c.add_argument("--grid", type=int, default=10)

    c = sub.add_parser("symmetry", parents=[common], help="symmetry test of xi_1 given theta_1")
    c.add_argument("--reps", type=_int_or_pow, default=10 ** 5)
    c.add_argument("--level", type=float, default=1e-3)
    c.add_argument("--force", action="store_true", help="run even if the law is not upper exponential")

    c = sub.add_parser("chain-check", parents=[common], help="upper and lower inequality chains")
    c.add_argument("--N", type=_int_or_pow, default=1024)
    c.add_argument("--reps", type=_int_or_pow, default=10 ** 5)

    c = sub.add_parser("ladder", parents=[common], help="exact ladder tails and c-series partial sums")
    c.add_argument("--L", type=int, default=4096)
    c.add_argument("--n", type=int, default=None, help="report point (default L)")
    return p


def read_config(path: str) -> List[str]:
    """``key=value`` lines as flags; ``key=true`` becomes a bare flag."""
    args = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value, got {line!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if val.lower() == "true":
            args.append(flag)
        elif val.lower() != "false":
            args += [flag, val]
    return args


def _expand_config(argv: List[str]) -> List[str]:
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, rest = pre.parse_known_args(argv)
    extra = read_config(ns.config)
    if "--command" in extra:
        i = extra.index("--command")
        cmd = extra[i + 1]
        del extra[i:i + 2]
        if not rest or rest[0].startswith("-"):
            rest = [cmd] + rest
    if not rest:
        return extra
    # config values first so that flags given on the command line win
    return [rest[0]] + extra + rest[1:]


# --------------------------------------------------------------------------
# commands; each returns (summary, header, rows, records, plot)
# --------------------------------------------------------------------------

def _plot(x, y, comment):
    return (list(x), list(y), comment)


def cmd_pn_exact(a, law):
    seq = exactdp.exact_pN_sequence(law, a.N, tilted=a.tilted)
    brute = [exactdp.brute_force_pN(law, n) for n in range(1, a.N + 1)] if a.brute else None
    rows, recs = [], []
    for n, p in enumerate(seq, 1):
        row = [n, str(p), float(p)]
        rec = {"op": "pn-exact", "law": law.label, "params": {"N": n, "tilted": a.tilted},
               "value": str(p), "value_float": float(p)}
        if brute is not None:
            row.append(brute[n - 1] == p)
            rec["brute_force_agrees"] = brute[n - 1] == p
        rows.append(row)
        recs.append(rec)
    header = ["N", "p_exact", "p_float"] + (["brute_force_agrees"] if brute else [])
    ok = "" if brute is None else f" brute={'agree' if all(r[-1] for r in rows) else 'DISAGREE'}"
    summary = f"pn-exact {law.label}: p_{a.N} = {seq[-1]} ({float(seq[-1]):.6g}){ok}"
    if brute is not None and not all(r[-1] for r in rows):
        raise PersistWalkError(summary)
    return summary, header, rows, recs, _plot(range(1, a.N + 1), [float(p) for p in seq], "N p_N")


def cmd_pn_mc(a, law):
    est, ms = estimators.timed(estimators.mc_p, law, a.N, a.reps, a.tilted, a.seed, a.workers, a.mode)
    rec = est.record("pn-mc", law, {"N": a.N, "reps": a.reps, "tilted": a.tilted, "mode": a.mode}, ms)
    summary = f"pn-mc {law.label}: {est.description} = {est.value:.6g} +- {est.stderr:.2g}"
    return summary, ["N", "value", "stderr", "n"], [[a.N, est.value, est.stderr, a.reps]], [rec], None


def cmd_fit_exponent(a, law):
    grid = estimators.parse_grid(a.grid)
    (pts, fit), ms = estimators.timed(estimators.exponent_scan, law, grid, a.reps, a.seed,
                                      a.mode, a.tilted, a.workers)
    rec = {"op": "fit-exponent", "law": law.label,
           "params": {"grid": grid, "reps": a.reps, "mode": a.mode, "tilted": a.tilted},
           "value": fit.slope, "stderr": fit.stderr, "ci": [fit.ci_low, fit.ci_high],
           "slope": fit.slope, "points": [list(p) for p in pts], "chi2": fit.chi2,
           "n": a.reps * len(grid), "seed": a.seed, "elapsed_ms": ms}
    summary = (f"fit-exponent {law.label} ({a.mode}): slope = {fit.slope:.4f} "
               f"[{fit.ci_low:.4f}, {fit.ci_high:.4f}]")
    rows = [[n, p, e] for n, p, e in pts]
    return summary, ["N", "p", "stderr"], rows, [rec], _plot([r[0] for r in rows], [r[1] for r in rows], "N p_N")


def cmd_cycle_law(a, law):
    cl = exactdp.exact_cycle_law(law, a.L, kind=a.kind, position_cap=a.position_cap, strict=False)
    rows = [[t, x, str(p)] for (t, x), p in cl.items()]
    sym = cl.is_xi_symmetric()
    rec = {"op": "cycle-law", "law": law.label, "params": {"L": a.L, "kind": a.kind, "position_cap": a.position_cap},
           "value": sym, "xi_symmetric": sym, "asymmetric_entries": len(cl.asymmetric_entries()),
           "mass": str(cl.total), "defect": str(cl.defect),
           "entries": [[t, x, str(p)] for (t, x), p in cl.items()]}
    summary = (f"cycle-law {law.label} ({a.kind}, L={a.L}): {len(rows)} entries, mass {float(cl.total):.6g}, "
               f"xi-symmetric={sym}")
    marg = cl.theta_marginal()
    return summary, ["theta", "xi", "prob"], rows, [rec], _plot(range(len(marg)), [float(m) for m in marg], "theta P(theta)")


def cmd_series_check(a, law):
    kind = a.kind or ("zero" if a.identity == "lattice-H" else "overshoot")
    cap = a.position_cap
    if cap is None and not law.is_lattice:
        cap = 2 * a.L
    cl = exactdp.exact_cycle_law(law, a.L, kind=kind, position_cap=cap, strict=False)
    rep = series.factorization_check(cl, a.L, a.identity)
    rec = {"op": "series-check", "law": law.label,
           "params": {"L": a.L, "identity": a.identity, "kind": kind, "position_cap": cap},
           "value": str(rep.max_abs_coeff_diff)}
    rec.update(rep.as_dict())
    summary = (f"series-check {law.label} {a.identity} L={a.L}: max_abs_coeff_diff = "
               f"{rep.max_abs_coeff_diff} ({'exact' if rep.exact else 'NOT exact'})")
    rows = [[i, str(l), str(r), str(l - r)] for i, (l, r) in enumerate(zip(rep.lhs, rep.rhs))]
    return summary, ["order", "lhs", "rhs", "diff"], rows, [rec], None


def _ladder_tail(lc, which):
    return {"theta0": lc.tail_theta0, "plus": lc.tail_plus, "minus": lc.tail_minus}[which]


def cmd_tauberian(a, law):
    lc = exactdp.ladder_constants(law, a.L)
    tail = _ladder_tail(lc, a.which)
    ns = [n for n in range(a.n_min, a.L + 1) if tail[n - 1] > 0]
    # log-spaced subset keeps the fit from being dominated by large n
    idx = sorted({int(round(v)) for v in np.geomspace(ns[0], ns[-1], 40)} & set(ns))
    fit = series.tauberian_fit(idx, [tail[n - 1] for n in idx])
    rec = {"op": "tauberian", "law": law.label, "params": {"L": a.L, "which": a.which, "n_min": a.n_min},
           "value": fit.c, "exponent": fit.slope}
    rec.update(fit.as_dict())
    summary = f"tauberian {law.label} {a.which}: tail ~ {fit.c:.5g} n^({fit.slope:.4f}), p = {fit.p:.4f}"
    rows = [[n, float(tail[n - 1]), math.sqrt(n) * float(tail[n - 1])] for n in idx]
    return summary, ["n", "tail", "sqrt_n_tail"], rows, [rec], _plot([r[0] for r in rows], [r[1] for r in rows], "n tail")


def cmd_tails(a, law):
    grid = estimators.parse_grid(a.grid)
    f_samples = None
    if a.s > 0:
        f_samples = excursion.sample_xi_ex_many(a.mesh, excursion.DEFAULT_SAMPLES, a.seed,
                                                workers=a.workers, stream="tails/F")
    curve, ms = estimators.timed(estimators.joint_tail, law, a.s, a.t, grid, a.reps, a.which, a.seed,
                                 a.workers, a.side, None, f_samples)
    last = curve.points[-1]
    rec = {"op": "tails", "law": law.label,
           "params": {"s": a.s, "t": a.t, "grid": grid, "reps": a.reps, "which": a.which, "side": a.side},
           "value": last.value, "stderr": last.stderr, "n": a.reps, "seed": a.seed, "elapsed_ms": ms,
           "theory": curve.theory, "theory_stderr": curve.theory_stderr,
           "theory_rescaled": curve.theory_rescaled, "theory_rescaled_stderr": curve.theory_rescaled_stderr,
           "curve": [[p.n, p.value, p.stderr, p.lower, p.upper] for p in curve.points]}
    rel = curve.relative_error()
    summary = (f"tails {law.label} {a.which} s={a.s} t={a.t}: n={last.n} scaled = {last.value:.5g} +- "
               f"{last.stderr:.2g}, theory {curve.theory:.5g}" + (f" ({100 * rel:+.2f}%)" if rel is not None else ""))
    if a.s > 0:
        rr = curve.relative_error(rescaled=True)
        summary += f", rescaled theory {curve.theory_rescaled:.5g} ({100 * rr:+.2f}%)"
    rows = [list(r) for r in curve.rows()]
    return (summary, ["n", "scaled", "stderr", "lower", "upper", "undetermined", "theory", "theory_rescaled"], rows, [rec],
            _plot([p.n for p in curve.points], [p.value for p in curve.points], "n n^(1/2)P"))


def cmd_fcurve(a, law):
    samples, ms = estimators.timed(excursion.sample_xi_ex_many, a.mesh, a.samples, a.seed, a.method, a.workers)
    fc = excursion.f_curve(a.x, samples, a.mesh)
    mean, se = excursion.moment(samples, 1)
    rec = {"op": "fcurve", "law": None, "params": {"mesh": a.mesh, "method": a.method, "x": list(fc.x)},
           "value": mean, "stderr": se, "n": a.samples, "seed": a.seed, "elapsed_ms": ms,
           "F": list(fc.F), "F_stderr": list(fc.stderr), "monotone": fc.is_monotone(),
           "closed_form_mean": excursion.E_XI_EX}
    summary = (f"fcurve mesh={a.mesh} n={a.samples}: E xi_ex = {mean:.5f} +- {se:.1g} "
               f"(closed form {excursion.E_XI_EX:.5f}), monotone={fc.is_monotone()}")
    rows = [list(r) for r in fc.rows()]
    return summary, ["x", "F", "stderr", "n", "mesh"], rows, [rec], _plot(fc.x, fc.F, "x F(x)")


def cmd_assoc(a, law):
    rep, ms = estimators.timed(estimators.association_scan, law, a.reps, a.seed, a.grid, None, a.workers)
    rec = {"op": "assoc", "law": law.label, "params": {"reps": a.reps, "grid": a.grid},
           "value": rep.n_flagged, "min_z": rep.min_z, "n": a.reps, "seed": a.seed, "elapsed_ms": ms,
           "passed": rep.passed}
    summary = f"assoc {law.label}: {rep.n_flagged} flagged of {len(rep.cells)} cells, min z = {rep.min_z:.2f}"
    return summary, ["a", "b", "cov", "stderr", "undetermined", "flagged"], [list(r) for r in rep.rows()], [rec], None


def cmd_symmetry(a, law):
    rep, ms = estimators.timed(estimators.xi_symmetry_test, law, a.reps, a.seed, a.workers, a.level,
                               require_hypothesis=not a.force)
    rec = {"op": "symmetry", "law": law.label, "params": {"reps": a.reps, "level": a.level},
           "value": rep.min_pvalue, "n": a.reps, "seed": a.seed, "elapsed_ms": ms}
    rec.update(rep.as_dict())
    verdict = "pass" if rep.passed else "reject"
    note = "" if rep.hypothesis_met else " (law not upper exponential: informative only)"
    summary = f"symmetry {law.label}: {verdict} at level {a.level}, sign p = {rep.sign_pvalue:.3g}, min p = {rep.min_pvalue:.3g}{note}"
    rows = [[lo, hi, s, p] for (lo, hi), s, p in zip(rep.strata, rep.ks_statistics, rep.ks_pvalues)]
    return summary, ["theta_lo", "theta_hi", "ks", "pvalue"], rows, [rec], None


def cmd_chain_check(a, law):
    rep, ms = estimators.timed(estimators.chain_checks, law, a.N, a.reps, a.seed, a.workers)
    recs = []
    for it in rep.items:
        recs.append({"op": "chain-check", "law": law.label, "params": {"N": a.N, "reps": a.reps, "K": rep.K},
                     "item": it.name, "value": it.lhs, "stderr": it.lhs_stderr, "bound": it.rhs,
                     "bound_stderr": it.rhs_stderr, "passed": it.passed, "n": a.reps, "seed": a.seed,
                     "elapsed_ms": ms})
    summary = f"chain-check {law.label} N={a.N}: {'all hold' if rep.passed else 'VIOLATION'} ({len(rep.items)} checks)"
    rows = [[it.name, it.lhs, it.lhs_stderr, it.rhs, it.rhs_stderr, it.passed] for it in rep.items]
    return summary, ["check", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "passed"], rows, recs, None


def cmd_ladder(a, law):
    lc = exactdp.ladder_constants(law, a.L)
    n = a.n or a.L
    if not 1 <= n <= a.L:
        raise UsageError(f"--n must lie in 1..{a.L}")
    rec = {"op": "ladder", "law": law.label, "params": {"L": a.L, "n": n},
           "value": lc.scaled_tail("theta0", n),
           "sqrt_n_tail_theta0": lc.scaled_tail("theta0", n),
           "sqrt_n_tail_plus": lc.scaled_tail("plus", n),
           "sqrt_n_tail_minus": lc.scaled_tail("minus", n),
           "c_plus": float(lc.c_plus[n - 1]), "c_zero": float(lc.c_zero[n - 1]),
           "c_minus": float(lc.c_minus[n - 1]), "sigma_sqrt_2_over_pi": law.sigma * math.sqrt(2 / math.pi)}
    summary = (f"ladder {law.label} n={n}: sqrt(n) P(theta0 > n) = {rec['sqrt_n_tail_theta0']:.6f}, "
               f"c0 partial sum = {rec['c_zero']:.6f}")
    rows = [[k, float(lc.tail_theta0[k - 1]), float(lc.tail_plus[k - 1]), float(lc.tail_minus[k - 1]),
             float(lc.c_plus[k - 1]), float(lc.c_zero[k - 1]), float(lc.c_minus[k - 1])] for k in range(1, a.L + 1)]
    return (summary, ["n", "tail_theta0", "tail_plus", "tail_minus", "c_plus", "c_zero", "c_minus"], rows, [rec],
            _plot(range(1, a.L + 1), [math.sqrt(r[0]) * r[1] for r in rows], "n sqrt(n)P(theta0>n)"))


COMMANDS = {
    "pn-exact": cmd_pn_exact, "pn-mc": cmd_pn_mc, "fit-exponent": cmd_fit_exponent,
    "cycle-law": cmd_cycle_law, "series-check": cmd_series_check, "tauberian": cmd_tauberian,
    "tails": cmd_tails, "fcurve": cmd_fcurve, "assoc": cmd_assoc, "symmetry": cmd_symmetry,
    "chain-check": cmd_chain_check, "ladder": cmd_ladder,
}
CSV_DEFAULT = {"pn-exact", "cycle-law", "tauberian", "ladder", "fcurve", "assoc"}


def _emit(a, header, rows, recs, plot):
    fmt = a.format
    if fmt is None and a.out:
        fmt = "csv" if a.out.endswith(".csv") else "json" if a.out.endswith((".json", ".jsonl")) else None
    fmt = fmt or ("csv" if a.command in CSV_DEFAULT else "json")
    target = a.out if a.out else sys.stdout
    if fmt == "csv":
        io.write_csv(header, rows, target, meta={"op": a.command, "law": a.law})
    else:
        io.write_json(recs, target)
    if a.plot_data and plot is not None:
        io.write_plot_data(a.plot_data, plot[0], plot[1], plot[2])


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        print(f"persistwalk: error: {exc}", file=sys.stderr)
        return 2
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.command is None:
        parser.print_usage(sys.stderr)
        return 2
    if a.command in STOCHASTIC and a.seed is None:
        print(f"persistwalk {a.command}: error: --seed is required for stochastic commands", file=sys.stderr)
        return 2
    if a.workers is not None and a.workers < 1:
        print("persistwalk: error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        law = make_law(a.law)
    except LawSpecError as exc:
        tok = f" (offending token: {exc.token!r})" if exc.token is not None else ""
        print(f"persistwalk: error: bad law spec {a.law!r}: {exc}{tok}", file=sys.stderr)
        return 2
    try:
        summary, header, rows, recs, plot = COMMANDS[a.command](a, law)
        _emit(a, header, rows, recs, plot)
    except UsageError as exc:
        print(f"persistwalk {a.command}: error: {exc}", file=sys.stderr)
        return 2
    except (PersistWalkError, ValueError, RuntimeError, OSError) as exc:
        print(f"persistwalk {a.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(summary, file=sys.stderr if a.out is None else sys.stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

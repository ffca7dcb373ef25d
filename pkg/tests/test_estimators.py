import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistwalk.errors import HypothesisNotMet, InsufficientData, InvalidRegion, NoPositivePart
from persistwalk.estimators import (
    MCEstimate,
    TailCurve,
    TailPoint,
    association_scan,
    chain_checks,
    sign_series_partial_sums,
    exponent_fit,
    exponent_scan,
    joint_tail,
    mc_p,
    mc_p_curve,
    parse_grid,
    tilt_identity,
    timed,
    xi_symmetry_test,
)
from persistwalk.exactdp import exact_pN


class TestPersistenceMC:
    @pytest.mark.parametrize("spec", ["simple", "lattice:{2:1/3,-1:2/3}", "slackened:p0=1/2"])
    @pytest.mark.parametrize("N", [4, 8, 16, 32])
    def test_matches_exact(self, spec, N):
        est = mc_p(spec, N, 20000, seed=11)
        exact = float(exact_pN(spec, N))
        assert abs(est.value - exact) < 4 * math.sqrt(exact * (1 - exact) / 20000)

    def test_tilted_matches_exact(self):
        est = mc_p("slackened:p0=1/4", 16, 20000, tilted=True, seed=3)
        exact = float(exact_pN("slackened:p0=1/4", 16, tilted=True))
        assert abs(est.value - exact) < 4 * est.stderr

    def test_plain_walk(self):
        # P(S_1, ..., S_N >= 0) = C(N, N/2) / 2^N for the simple walk
        est = mc_p("simple", 20, 20000, seed=4, mode="plain")
        exact = math.comb(20, 10) / 2 ** 20
        assert abs(est.value - exact) < 4 * est.stderr

    def test_curve_is_monotone_and_ends_at_estimate(self):
        p, se = mc_p_curve("laplace", 40, 5000, seed=5)
        assert np.all(np.diff(p) <= 0)
        assert p.shape == se.shape == (40,)

    def test_workers_do_not_change_results(self):
        a = mc_p("laplace", 64, 70000, seed=9, workers=1)
        b = mc_p("laplace", 64, 70000, seed=9, workers=2)
        assert a.value == b.value

    def test_seed_required(self):
        with pytest.raises(ValueError):
            mc_p("simple", 4, 10)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            mc_p("simple", 0, 10, seed=1)
        with pytest.raises(ValueError):
            mc_p("simple", 4, 0, seed=1)
        with pytest.raises(ValueError):
            mc_p("simple", 4, 10, seed=1, mode="other")

    def test_record(self):
        rec = mc_p("simple", 4, 100, seed=1).record("pn-mc", "simple", {"N": 4}, 1.5)
        assert set(rec) == {"op", "law", "params", "value", "stderr", "n", "seed", "elapsed_ms"}
        with pytest.raises(ValueError):
            MCEstimate(0.5, 0.1, 0, 1, "")

    def test_tilt_identity(self):
        assert tilt_identity("slackened:p0=1/2", 32, 20000, seed=2)["passed"]
        assert tilt_identity("laplace", 64, 20000, seed=2)["passed"]

    def test_timed(self):
        out, ms = timed(sum, [1, 2])
        assert out == 3 and ms >= 0


class TestExponentFit:
    def test_exact_power_law(self):
        pts = [(n, 2.0 * n ** -0.25, 1e-3 * n ** -0.25) for n in 2 ** np.arange(4, 12)]
        fit = exponent_fit(pts)
        assert fit.slope == pytest.approx(-0.25, abs=1e-12)
        assert fit.within(-0.26, -0.24)
        assert fit.ci_low < fit.slope < fit.ci_high

    def test_needs_points_and_span(self):
        with pytest.raises(InsufficientData):
            exponent_fit([(n, 0.5, 0.01) for n in (1, 2, 4, 8, 16)])
        with pytest.raises(InsufficientData):
            exponent_fit([(n, 0.5, 0.01) for n in range(10, 16)])
        with pytest.raises(InsufficientData):
            exponent_fit([(2 ** k, 0.0, 0.0) for k in range(10)])

    def test_scan_simple_walk(self):
        pts, fit = exponent_scan("simple", parse_grid("16:1024"), 20000, seed=1)
        assert len(pts) == 7
        assert fit.within(-0.32, -0.18)

    def test_parse_grid(self):
        assert parse_grid("256:16384") == [256, 512, 1024, 2048, 4096, 8192, 16384]
        assert parse_grid("3:20") == [4, 8, 16]
        assert parse_grid("10, 5,5") == [5, 10]
        with pytest.raises(ValueError):
            parse_grid("8:2")


class TestJointTail:
    def test_theta_only_laplace(self):
        c = joint_tail("laplace", 0, 1, [64], 20000, which="theta-only", seed=1)
        assert c.theory == pytest.approx(2 / math.sqrt(math.pi))
        assert abs(c.relative_error()) < 0.1

    def test_xi_plus_matches_rescaled_limit(self):
        c = joint_tail("laplace", 0.3, 0.5, [256], 20000, which="xi+", seed=2)
        p = c.points[-1]
        assert abs(p.value - c.theory_rescaled) < 4 * p.stderr + 0.05 * c.theory_rescaled

    def test_zero_cycle_simple(self):
        c = joint_tail("simple", 0, 1, [256], 20000, which="zero-cycle", seed=3)
        assert c.theory == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert abs(c.points[0].value - c.theory) < 4 * c.points[0].stderr + 0.03

    def test_bounds_bracket_midpoint(self):
        c = joint_tail("laplace", 0.2, 0.5, [64, 128], 5000, which="xi", seed=4)
        for p in c.points:
            assert p.lower <= p.value <= p.upper
        assert len(list(c.rows())) == 2

    def test_regions(self):
        with pytest.raises(InvalidRegion):
            joint_tail("laplace", 0, 0, [8], 10, seed=1)
        with pytest.raises(InvalidRegion):
            joint_tail("laplace", -1, 1, [8], 10, seed=1)
        with pytest.raises(InvalidRegion):
            joint_tail("laplace", 0.5, 1, [8], 10, which="theta-only", seed=1)
        with pytest.raises(ValueError):
            joint_tail("laplace", 0, 1, [8], 10, which="sideways", seed=1)

    def test_hypotheses(self):
        with pytest.raises(HypothesisNotMet):
            joint_tail("lattice:{2:1/3,-1:2/3}", 0, 1, [8], 10, seed=1)
        with pytest.raises(HypothesisNotMet):
            joint_tail("laplace", 0, 1, [8], 10, which="zero-cycle", seed=1)
        with pytest.raises(HypothesisNotMet):
            joint_tail("simple", 0.5, 1, [8], 10, which="zero-cycle", seed=1)

    def test_curve_grid_order(self):
        pt = TailPoint(8, 1.0, 0.1, 1, 0, 1.0, 1.0)
        with pytest.raises(ValueError):
            TailCurve("xi", 0.0, 1.0, [pt, pt])

    def test_flatness(self):
        c = joint_tail("laplace", 0, 1, [256, 512, 1024], 20000, which="theta-only", seed=5)
        assert abs(c.flatness(256)) < 0.15
        with pytest.raises(InsufficientData):
            c.flatness(2048)


class TestCycleStatistics:
    def test_symmetry_laplace(self):
        rep = xi_symmetry_test("laplace", 20000, seed=1)
        assert rep.passed and rep.hypothesis_met
        assert rep.n_positive + rep.n_negative + rep.n_censored <= 20000

    def test_symmetry_rejects_skewed_lattice(self):
        with pytest.raises(HypothesisNotMet):
            xi_symmetry_test("lattice:{2:1/3,-1:2/3}", 100, seed=1)
        rep = xi_symmetry_test("lattice:{2:1/3,-1:2/3}", 40000, seed=1, require_hypothesis=False)
        assert not rep.passed and not rep.hypothesis_met

    def test_association(self):
        rep = association_scan("laplace", 10000, seed=1, grid=4)
        assert rep.passed and len(rep.cells) == 16
        assert len(next(rep.rows())) == 6
        with pytest.raises(ValueError):
            association_scan("laplace", 100, seed=1)

    def test_chains(self):
        rep = chain_checks("simple", 64, 20000, seed=1)
        assert rep.passed and rep.K == 8
        assert rep.estimates["pathwise_upper_violations"] == 0
        assert any("tau0" in i.name for i in rep.items)

    def test_chains_need_hypothesis(self):
        with pytest.raises(HypothesisNotMet):
            chain_checks("normal", 16, 100, seed=1)

    def test_partial_sums(self):
        ps = sign_series_partial_sums("simple", 20, 500, seed=1)
        assert ps.partial_sums.shape == (20,)
        assert ps.n_rows + ps.n_dropped == 500
        with pytest.raises(HypothesisNotMet):
            sign_series_partial_sums("lattice:{2:1/3,-1:2/3}", 5, 10, seed=1)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.0, -0.05), st.floats(0.1, 10.0))
def test_fit_recovers_any_exponent(slope, amp):
    pts = [(n, amp * n ** slope, 1e-4 * amp * n ** slope) for n in 2 ** np.arange(3, 12)]
    assert exponent_fit(pts).slope == pytest.approx(slope, abs=1e-9)

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistwalk.errors import BadConstantTerm, InsufficientData, TruncationTooShort
from persistwalk.exactdp import exact_cycle_law
from persistwalk.series import (
    RationalSeries,
    chi_from_cycle_law,
    factorization_check,
    h_series,
    half_mass_consistent,
    kfold_masses,
    tail_from_series,
    tauberian_fit,
    zeta_from_cycle_law,
)


class TestRationalSeries:
    def test_catalan_square_root(self):
        L = 12
        s = (1 - RationalSeries([0, 4], L)).sqrt()
        for n in range(1, L + 1):
            catalan = math.comb(2 * (n - 1), n - 1) // n
            assert s[n] == -2 * catalan

    def test_log_of_geometric(self):
        L = 10
        g = (1 - RationalSeries.t(L)).inverse().log()
        assert list(g) == [0] + [Fraction(1, n) for n in range(1, L + 1)]

    def test_exp_of_t(self):
        e = RationalSeries.t(8).exp()
        assert list(e) == [Fraction(1, math.factorial(n)) for n in range(9)]

    def test_constant_term_errors(self):
        z = RationalSeries([0, 1], 4)
        with pytest.raises(BadConstantTerm):
            z.inverse()
        with pytest.raises(BadConstantTerm):
            z.log()
        with pytest.raises(BadConstantTerm):
            (z + 1).exp()
        with pytest.raises(BadConstantTerm):
            (z + 2).sqrt()

    def test_order_mismatch(self):
        with pytest.raises(ValueError):
            RationalSeries([1, 1], 3) + RationalSeries([1], 4)

    def test_truncation_and_padding(self):
        s = RationalSeries([1, 2, 3, 4], 2)
        assert s.L == 2 and list(s) == [1, 2, 3]
        assert RationalSeries([5], 3).coeffs == (5, 0, 0, 0)


small = st.fractions(min_value=-3, max_value=3, max_denominator=7)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=1, max_size=7))
def test_series_identities(tail):
    f = RationalSeries([1] + tail)
    assert f.sqrt() * f.sqrt() == f
    assert f.log().exp() == f
    assert f * f.inverse() == RationalSeries.one(f.L)


class TestCycleSeries:
    def test_simple_zeta_is_first_return_function(self):
        L = 16
        cl = exact_cycle_law("simple", L)
        t2 = RationalSeries([0, 0, 1], L)
        assert zeta_from_cycle_law(cl) == 1 - (1 - t2).sqrt()

    def test_lattice_h_exact_on_simple(self):
        rep = factorization_check(exact_cycle_law("simple", 14), identity="lattice-H")
        assert rep.exact and rep.half_mass_ok
        assert rep.H[2] == Fraction(0)

    def test_h_has_nonnegative_coefficients(self):
        cl = exact_cycle_law("simple", 10)
        masses = kfold_masses(cl)
        H = h_series(cl, masses=masses)
        assert H[0] == 0
        assert all(c >= 0 for c in H)

    def test_chi_is_a_distribution(self):
        chi = chi_from_cycle_law(exact_cycle_law("slackened:p0=1/2", 12))
        assert chi[0] == 0 and all(c >= 0 for c in chi)
        tail = tail_from_series(chi)
        assert tail[0] == 1
        assert all(a >= b for a, b in zip(tail, tail[1:]))

    def test_half_mass(self):
        cl = exact_cycle_law("lattice:{2:1/3,-1:2/3}", 12)
        assert half_mass_consistent(kfold_masses(cl))

    def test_truncation_too_short(self):
        cl = exact_cycle_law("simple", 6)
        with pytest.raises(TruncationTooShort):
            zeta_from_cycle_law(cl, 10)

    def test_unknown_identity(self):
        with pytest.raises(ValueError):
            factorization_check(exact_cycle_law("simple", 4), identity="other")

    def test_report_dict(self):
        d = factorization_check(exact_cycle_law("simple", 8), identity="lattice-H").as_dict()
        assert d["exact"] and "H" in d and len(d["zeta"]) == 9


class TestTauberian:
    def test_recovers_power_law(self):
        ns = np.unique(np.logspace(0, 3, 20).astype(int))
        fit = tauberian_fit(ns, 0.8 * ns ** -0.5)
        assert fit.p == pytest.approx(0.5, abs=1e-9)
        assert fit.c == pytest.approx(0.8, rel=1e-9)
        assert fit.c_tauberian == pytest.approx(0.8 * math.gamma(0.5), rel=1e-9)
        assert not fit.flags

    def test_flat_tail_flagged(self):
        ns = np.logspace(0, 3, 10)
        fit = tauberian_fit(ns, np.full(10, 0.3))
        assert "flat" in fit.flags and "p_outside_unit_interval" in fit.flags

    def test_needs_two_decades(self):
        with pytest.raises(InsufficientData):
            tauberian_fit(np.arange(10, 20), np.ones(10))
        with pytest.raises(InsufficientData):
            tauberian_fit([1, 10, 100], [1, 1, 1])

    def test_exact_ladder_tail(self):
        # the simple walk's return tail behaves like sqrt(2/pi) n^(-1/2)
        from persistwalk.exactdp import ladder_constants
        lc = ladder_constants("simple", 1200)
        ns = np.unique(np.logspace(1, np.log10(1200), 14).astype(int))
        fit = tauberian_fit(ns, [lc.tail_theta0[n - 1] for n in ns])
        assert fit.p == pytest.approx(0.5, abs=0.01)
        assert fit.c == pytest.approx(math.sqrt(2 / math.pi), rel=0.03)

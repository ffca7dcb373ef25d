import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistwalk.errors import (
    InvalidMass,
    LawSpecError,
    NonCentered,
    NotApplicable,
    ZeroVariance,
)
from persistwalk.laws import (
    classify,
    exp2,
    geom2,
    lattice,
    make_law,
    normal,
    overshoot_law,
    parse_law,
    prop1_constant,
    prop1_constants,
    simple,
    slackened,
    uexp,
)


class TestConstruction:
    def test_simple_moments(self):
        law = simple()
        assert law.sigma2 == 1
        assert law.abs_mean == 1
        assert law.support == {-1: Fraction(1, 2), 1: Fraction(1, 2)}

    def test_slackened(self):
        law = slackened(Fraction(1, 2))
        assert law.a_zero == Fraction(1, 2)
        assert law.sigma2 == Fraction(1, 2)

    def test_asymmetric_lattice(self):
        law = lattice({2: Fraction(1, 3), -1: Fraction(2, 3)})
        assert law.sigma2 == 2
        assert law.a_plus == Fraction(1, 3)

    def test_geom2_is_centered(self):
        law = geom2(Fraction(1, 2), Fraction(3, 4))
        up = law.a_plus * law.pos.mean
        down = law.a_minus * law.neg.mean
        assert up == down
        assert law.a_plus + law.a_minus == 1

    def test_geom2_truncated_is_lattice(self):
        law = geom2(Fraction(1, 2), Fraction(1, 2), 0, m=2)
        assert law.is_lattice
        assert set(law.support) == {-2, -1, 1, 2}

    def test_exp2_masses(self):
        law = exp2(1, 2)
        assert law.a_plus == Fraction(1, 3)
        assert math.isclose(float(law.a_plus / law.pos.rate), float(law.a_minus / law.neg.rate))

    def test_uexp(self):
        law = uexp({-1: Fraction(1, 2)})
        assert law.a_plus == Fraction(1, 2)
        assert law.pos.rate == 1

    def test_non_centered(self):
        with pytest.raises(NonCentered):
            lattice({1: Fraction(1, 2), -2: Fraction(1, 2)})

    def test_bad_mass(self):
        with pytest.raises(InvalidMass):
            lattice({1: Fraction(1, 2), -1: Fraction(1, 4)})
        with pytest.raises(InvalidMass):
            slackened(1)

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            lattice({0: 1})

    def test_span(self):
        assert simple().span == 2
        assert slackened(Fraction(1, 2)).span == 1
        assert lattice({2: Fraction(1, 3), -1: Fraction(2, 3)}).span == 3
        assert exp2(1, 1).span is None

    def test_negate(self):
        law = lattice({2: Fraction(1, 3), -1: Fraction(2, 3)}).negate()
        assert law.pmf(-2) == Fraction(1, 3)
        assert law.pmf(1) == Fraction(2, 3)

    def test_tail_probabilities(self):
        law = geom2(Fraction(1, 2), Fraction(1, 2))
        total = sum(law.pmf(k) for k in range(-60, 61))
        assert abs(float(total) - 1) < 1e-15
        assert law.prob_greater(0) == law.a_plus
        assert law.prob_less(0) == law.a_minus
        assert law.prob_greater(-1) == 1 - law.a_minus


class TestParsing:
    @pytest.mark.parametrize("spec", [
        "simple", "laplace", "slackened:p0=1/4", "geom2:q+=1/2,q-=1/3,a0=1/5",
        "geom2:q+=1/2,q-=1/2,a0=0,m=3", "exp2:l+=1,l-=2", "exp2:l+=1,l-=1,a0=1/2",
        "lattice:{2:1/3,-1:2/3}", "uexp:{-1:1/2}", "normal", "normal:s=2",
    ])
    def test_roundtrip(self, spec):
        law = parse_law(spec)
        again = parse_law(law.label)
        assert again.a_plus == law.a_plus and again.a_zero == law.a_zero
        assert again.kind == law.kind

    @pytest.mark.parametrize("spec, token", [
        ("bogus", "bogus"),
        ("slackened:q=1/2", "q"),
        ("slackened:p0=x", "x"),
        ("geom2:q+=1/2", "q-"),
        ("lattice:{1:1/2,a:1/2}", "a"),
        ("lattice:1:1/2", "1:1/2"),
    ])
    def test_errors_name_the_token(self, spec, token):
        with pytest.raises(LawSpecError) as exc:
            parse_law(spec)
        assert exc.value.token == token

    def test_make_law_passthrough(self):
        law = simple()
        assert make_law(law) is law


class TestClassification:
    def test_simple(self):
        c = classify(simple())
        assert c.right_continuous and c.left_continuous and c.slackened_simple
        assert c.theorem2_part1_applies and c.theorem2_part2_applies
        assert c.upper_memoryless

    def test_laplace(self):
        c = classify(make_law("laplace"))
        assert c.two_sided_exponential and c.upper_exponential
        assert not c.integer_valued
        assert c.theorem1_applies and c.theorem2_part2_applies

    def test_geom2(self):
        c = classify(make_law("geom2:q+=1/2,q-=3/4"))
        assert c.upper_geometric and c.lower_geometric
        assert c.theorem2_part1_applies and not c.theorem2_part2_applies

    def test_asymmetric_lattice_not_memoryless(self):
        c = classify(make_law("lattice:{2:1/3,-1:2/3}"))
        assert not c.upper_memoryless
        assert c.left_continuous
        assert c.theorem1_applies and not c.theorem2_part1_applies

    def test_normal(self):
        c = classify(normal())
        assert not c.theorem1_applies
        assert c.as_dict()["symmetric"]

    def test_overshoot_law(self):
        assert overshoot_law(simple()).values == (1,)
        assert overshoot_law(make_law("laplace")).rate == 1
        assert overshoot_law(make_law("geom2:q+=1/3,q-=1/2")).q == Fraction(1, 3)


class TestJointTailConstant:
    def test_simple(self):
        assert prop1_constant(simple()) == pytest.approx(2 / math.sqrt(2 * math.pi) * 2, rel=1e-12)
        assert prop1_constant(simple()) == pytest.approx(1.5957691216057308, rel=1e-12)

    def test_laplace_formulas_agree(self):
        consts = prop1_constants(make_law("laplace"))
        assert set(consts) == {"two_sided", "upper_exponential"}
        assert abs(consts["two_sided"] - consts["upper_exponential"]) <= 1e-12
        assert consts["two_sided"] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-12)

    @pytest.mark.parametrize("spec", ["exp2:l+=1,l-=3", "exp2:l+=2,l-=1,a0=1/3", "exp2:l+=5,l-=1/2"])
    def test_two_exponential_formulas_agree(self, spec):
        consts = prop1_constants(make_law(spec))
        assert abs(consts["two_sided"] - consts["upper_exponential"]) <= 1e-12 * consts["two_sided"]

    def test_not_applicable(self):
        with pytest.raises(NotApplicable):
            prop1_constant(normal())
        assert prop1_constants(make_law("lattice:{2:1/3,-1:2/3}")) == {}

    def test_slackened(self):
        assert prop1_constant(slackened(Fraction(1, 2))) == pytest.approx(
            (1 / 2) * (1 / 2) / (math.sqrt(2 * math.pi) * (1 / 16) * math.sqrt(1 / 2)), rel=1e-12)


rationals = st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20)


@settings(max_examples=60, deadline=None)
@given(rationals, rationals, st.fractions(min_value=0, max_value=Fraction(4, 5), max_denominator=10))
def test_geom2_always_centered_with_unit_mass(qp, qm, a0):
    law = geom2(qp, qm, a0)
    assert law.a_plus + law.a_zero + law.a_minus == 1
    assert law.a_plus * law.pos.mean == law.a_minus * law.neg.mean
    assert law.sigma2 > 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.fractions(min_value=0, max_value=Fraction(1, 2), max_denominator=8))
def test_two_point_lattice_laws(up, down, p0):
    # P(up) * up = P(-down) * down with the remaining mass at 0
    pu = (1 - p0) * Fraction(down, up + down)
    law = lattice({up: pu, -down: 1 - p0 - pu, 0: p0} if p0 else {up: pu, -down: 1 - pu})
    assert law.sigma2 == pu * up * up + (1 - p0 - pu) * down * down
    assert parse_law(law.label).support == law.support


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["simple", "laplace", "geom2:q+=1/2,q-=3/4", "lattice:{2:1/3,-1:2/3}", "normal"]),
       st.integers(0, 2 ** 32))
def test_sample_mean_and_variance(spec, seed):
    law = make_law(spec)
    x = law.sample(20000, np.random.default_rng(seed))
    assert abs(x.mean()) < 6 * law.sigma / math.sqrt(x.size)
    assert abs(x.var() / float(law.sigma2) - 1) < 0.15

"""Main valuation engine: values, residues, fractions, and the shadow oracle."""

import random

import pytest

from weylval import (
    DepthExceeded,
    INFINITY,
    NonzeroValue,
    OmegaDescriptor,
    Rat,
    ValueGroupElement,
    WeylElement,
    WeylFraction,
    commutator,
    equivalent,
    eval_element,
    eval_fraction,
    monomial_gap_value,
    omega_element,
    residue,
    residue_fraction,
    sample_element,
    shadow_eval,
    strongly_abelian_sample,
    unit_generators,
)


def rational(*args):
    return ValueGroupElement.rational(Rat(*args))


def elem(terms):
    return WeylElement({k: Rat(v) for k, v in terms.items()})


X = WeylElement.x()
Y = WeylElement.y()


class TestEval:
    def test_generator(self, worked):
        assert eval_element(worked, Y) == rational(1, 2)
        assert eval_element(worked, X) == rational(-1)

    def test_zero_is_infinity(self, worked):
        assert eval_element(worked, WeylElement.zero()) is INFINITY

    def test_square_unit_difference(self, worked):
        # x^2 y^4 - 1 groups as (x y^2)^2 - 1 at tentative value 0
        assert eval_element(worked, elem({(2, 4): 1, (0, 0): -1})) == rational(1, 4)

    def test_reordered_product(self, worked):
        # y*x normalizes to x*y + 1: min(-1/2, 0)
        assert eval_element(worked, Y.mul(X)) == rational(-1, 2)

    def test_tower_values(self, worked):
        assert eval_element(worked, omega_element(worked, 1)) == rational(1, 4)
        top = eval_element(worked, omega_element(worked, 2))
        assert top.k_xi == 1 and top.q == 0 and top.xi_scale == Rat(1, 8)

    def test_commutator_spot_value(self, worked):
        assert eval_element(
            worked, commutator(omega_element(worked, 1), X)
        ) == rational(-1, 2)

    def test_depth_exhaustion_on_bare_prefix(self, single24):
        # the second tower level is undetermined by a one-step descriptor
        w1 = omega_element(single24, 1)
        with pytest.raises(DepthExceeded):
            eval_element(single24, w1)


class TestResidue:
    def test_first_unit(self, worked):
        assert residue(worked, elem({(1, 2): 1})) == Rat(1)

    def test_scalar(self, worked):
        assert residue(worked, WeylElement.scalar(Rat(5))) == Rat(5)

    def test_unit_square(self, worked):
        assert residue(worked, elem({(2, 4): 1})) == Rat(1)

    def test_nonzero_value_rejected(self, worked):
        with pytest.raises(NonzeroValue):
            residue(worked, Y)

    def test_multiplicativity(self, worked, rng):
        units = [
            elem({(1, 2): 1}),
            elem({(1, 2): 1, (0, 0): 3}),
            elem({(2, 4): 1, (1, 2): 5}),
        ]
        for f in units:
            for g in units:
                assert residue(worked, f.mul(g)) == residue(worked, f) * residue(
                    worked, g
                )


class TestFractions:
    def test_value_difference(self, worked):
        assert eval_fraction(
            worked, WeylFraction(Y.pow(2), Y)
        ) == rational(1, 2)

    def test_zero_value_unit(self, worked):
        frac = WeylFraction(elem({(1, 2): 1}), WeylElement.scalar(Rat(1)))
        assert eval_fraction(worked, frac) == rational(0)
        assert residue_fraction(worked, frac) == Rat(1)

    def test_cancelling_powers(self, worked):
        frac = WeylFraction(Y.pow(2), Y.pow(2))
        assert eval_fraction(worked, frac) == rational(0)
        assert residue_fraction(worked, frac) == Rat(1)


class TestMonomialGap:
    def test_single_index(self, worked):
        # x*y^2 - its residue lands at the next tower value
        assert monomial_gap_value(worked, (1, 2)) == rational(1, 4)

    def test_scalar_word(self, worked):
        assert monomial_gap_value(worked, (0,)) is INFINITY

    def test_nonzero_word_rejected(self, worked):
        with pytest.raises(NonzeroValue):
            monomial_gap_value(worked, (0, 1))

    def test_equal_minimum_with_cancellation(self):
        # Steps (1,3),(1,4),(1,4),(1,7): the word w0^3 * w1^{-4} has value 0
        # and both factors sit at next-level value 1/4; their leading
        # contributions cancel (3*4 - 4*3 = 0 in lcm weights), so the gap
        # drops past 1/4 down the tower: 1/4 + 1/7 = 11/28.
        dd = OmegaDescriptor.from_json(
            {
                "steps": [
                    {"m": 1, "n": 3, "beta": "1"},
                    {"m": 1, "n": 4, "beta": "1"},
                    {"m": 1, "n": 4, "beta": "1"},
                    {"m": 1, "n": 7, "beta": "1"},
                ],
                "alpha_signs": [{"i": 2, "j": 3, "sign": 1}],
            }
        )
        gap = monomial_gap_value(dd, (0, 3, -4))
        assert gap == rational(11, 28)
        assert gap.cmp(rational(1, 4)) > 0
        # unique-minimum control on the same tower
        assert monomial_gap_value(dd, (1, 3, 0)) == rational(1, 4)


class TestUnitGenerators:
    def test_empty_prefix(self, worked):
        assert unit_generators(worked, 0) == []

    def test_single_step(self, worked):
        assert unit_generators(worked, 1) == [(1, 2)]

    def test_two_steps(self, worked):
        gens = set(unit_generators(worked, 2))
        assert {(1, 2, 0), (1, 0, 4)} <= gens
        # every generator is a zero-value exponent vector
        values = [Rat(-1), Rat(1, 2), Rat(1, 4)]
        for vec in gens:
            assert sum(k * v for k, v in zip(vec, values)) == 0


class TestEquivalence:
    def test_reflexive(self, worked):
        f = elem({(1, 2): 1, (0, 1): 3})
        assert equivalent(worked, f, f)

    def test_higher_order_perturbation(self, worked):
        base = elem({(1, 2): 1})
        w1sq = omega_element(worked, 1).pow(2)
        assert equivalent(worked, base, base.add(w1sq))

    def test_different_values(self, worked):
        assert not equivalent(worked, Y, X)

    def test_same_value_different_residue(self, worked):
        one = WeylElement.scalar(Rat(1))
        two = WeylElement.scalar(Rat(2))
        assert not equivalent(worked, one, two)

    def test_multiplication_congruence(self, worked, rng):
        base = elem({(1, 2): 1})
        pert = base.add(omega_element(worked, 1).pow(2))
        for _ in range(10):
            c = sample_element(rng, max_degree=3, max_terms=3, coeff_bound=5)
            if c.is_zero():
                continue
            assert equivalent(worked, c.mul(base), c.mul(pert))
            assert equivalent(worked, base.mul(c), pert.mul(c))


class TestShadowOracle:
    def test_spot_values(self, worked):
        assert shadow_eval(worked, elem({(2, 4): 1, (0, 0): -1})) == rational(1, 4)
        assert shadow_eval(worked, Y) == rational(1, 2)

    def test_agreement_batch(self, worked, rng):
        for _ in range(60):
            f = sample_element(rng, max_degree=6, max_terms=5, coeff_bound=9)
            main = eval_element(worked, f)
            shadow = shadow_eval(worked, f)
            if main is INFINITY:
                assert shadow is INFINITY
            else:
                assert main.cmp(shadow) == 0


class TestValuationLaws:
    def test_product_rule(self, worked, rng):
        for _ in range(40):
            f = sample_element(rng, max_degree=4, max_terms=3, coeff_bound=7)
            g = sample_element(rng, max_degree=4, max_terms=3, coeff_bound=7)
            if f.is_zero() or g.is_zero():
                continue
            assert eval_element(worked, f.mul(g)).cmp(
                eval_element(worked, f).add(eval_element(worked, g))
            ) == 0

    def test_ultrametric(self, worked, rng):
        for _ in range(40):
            f = sample_element(rng, max_degree=4, max_terms=3, coeff_bound=7)
            g = sample_element(rng, max_degree=4, max_terms=3, coeff_bound=7)
            vf, vg = eval_element(worked, f), eval_element(worked, g)
            vs = eval_element(worked, f.add(g))
            low = vf if vf.cmp(vg) <= 0 else vg
            assert vs.cmp(low) >= 0
            if vf is not INFINITY and vg is not INFINITY and vf.cmp(vg) != 0:
                assert vs.cmp(low) == 0

    def test_commutator_dominance(self, worked):
        # v([x, y]) = 0 > v(x) + v(y) = -1/2
        assert eval_element(worked, commutator(X, Y)) == rational(0)
        assert rational(0).cmp(rational(-1, 2)) > 0

    def test_strongly_abelian_report(self, worked):
        report = strongly_abelian_sample(worked, seed=5, trials=40, max_degree=4)
        assert report.trials == 40
        assert report.violations == []

    def test_power_comparison(self, worked, rng):
        # pairs 1 + f, 1 + g (value 0, residue 1): the difference value is
        # preserved by powers 2, 3, and -1
        for _ in range(12):
            f = sample_element(rng, max_degree=3, max_terms=3, coeff_bound=5)
            g = sample_element(rng, max_degree=3, max_terms=3, coeff_bound=5)
            one = WeylElement.scalar(Rat(1))
            seven = Y.pow(7)  # v = 7/2 forces the perturbations above 0
            a = one.add(seven.mul(f))
            b = one.add(seven.mul(g))
            base = eval_element(worked, a.sub(b))
            if base is INFINITY:
                continue
            for n in (2, 3):
                assert eval_element(worked, a.pow(n).sub(b.pow(n))).cmp(base) == 0
            inverse_diff = WeylFraction(b.sub(a), a.mul(b))
            assert eval_fraction(worked, inverse_diff).cmp(base) == 0


class TestSampler:
    def test_reproducible(self):
        a = sample_element(random.Random(3), max_degree=5)
        b = sample_element(random.Random(3), max_degree=5)
        assert a == b

    def test_degree_bound(self, rng):
        for _ in range(20):
            f = sample_element(rng, max_degree=4, max_terms=3, coeff_bound=5)
            for (i, j) in f.terms:
                assert 0 <= i <= 4 and 0 <= j <= 4

"""Rational coefficient helpers."""

import pytest
from hypothesis import given, strategies as st

from weylval import Rat, format_rat, parse_rat
from weylval.coeff import nth_root, odd_part, sgn, two_adic_valuation
from weylval.errors import EvenRootOfNegative, NoRationalRoot, ParseError


rationals = st.fractions(
    min_value=-10**6, max_value=10**6, max_denominator=10**4
)


class TestParseFormat:
    def test_integer(self):
        assert parse_rat("7") == Rat(7)

    def test_fraction(self):
        assert parse_rat("-3/4") == Rat(-3, 4)

    def test_whitespace(self):
        assert parse_rat(" 1/2 ") == Rat(1, 2)

    def test_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_rat("1/0")
        with pytest.raises(ParseError):
            parse_rat("x")

    @given(rationals)
    def test_roundtrip(self, q):
        assert parse_rat(format_rat(Rat(q))) == Rat(q)


class TestNthRoot:
    def test_cube_root(self):
        assert nth_root(Rat(8), 3) == Rat(2)

    def test_square_root_of_fraction(self):
        assert nth_root(Rat(9, 4), 2) == Rat(3, 2)

    def test_negative_odd(self):
        assert nth_root(Rat(-27), 3) == Rat(-3)

    def test_negative_even_rejected(self):
        with pytest.raises(EvenRootOfNegative):
            nth_root(Rat(-4), 2)

    def test_irrational_rejected(self):
        with pytest.raises(NoRationalRoot):
            nth_root(Rat(2), 2)

    @given(rationals.filter(lambda q: q != 0), st.integers(1, 5))
    def test_root_of_power(self, q, n):
        base = Rat(q)
        if n % 2 == 0:
            base = abs(base)
        assert nth_root(base**n, n) == base


class TestTwoAdic:
    def test_even_integer(self):
        assert two_adic_valuation(Rat(12)) == 2

    def test_odd_denominator_negative(self):
        assert two_adic_valuation(Rat(3, 8)) == -3

    def test_odd(self):
        assert two_adic_valuation(Rat(5)) == 0

    @given(rationals.filter(lambda q: q != 0), rationals.filter(lambda q: q != 0))
    def test_additive_on_products(self, a, b):
        assert two_adic_valuation(Rat(a) * Rat(b)) == two_adic_valuation(
            Rat(a)
        ) + two_adic_valuation(Rat(b))

    def test_odd_part(self):
        assert odd_part(24) == 3
        with pytest.raises(ValueError):
            odd_part(-40)

    def test_sgn(self):
        assert sgn(Rat(3, 7)) == 1
        assert sgn(Rat(-2)) == -1
        assert sgn(Rat(0)) == 0

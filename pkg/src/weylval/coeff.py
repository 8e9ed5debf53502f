"""Exact coefficient field: arbitrary-precision rationals plus root helpers.

`Rat` is the stdlib `fractions.Fraction`; this module adds the handful of
exact operations the rest of the package needs (odd/even n-th roots, 2-adic
valuation, text round-trip) without introducing any floating point.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import EvenRootOfNegative, NoRationalRoot, ParseError

Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)


def parse_rat(text: str) -> Rat:
    """Parse "p/q" or "p" (optionally signed) into a Rat.

    >>> parse_rat("-3/4")
    Fraction(-3, 4)
    """
    try:
        return Rat(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational literal {text!r}: {exc}") from None


def format_rat(value: Rat) -> str:
    """Render a Rat as "p/q", or "p" when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _int_nth_root(value: int, n: int) -> int | None:
    """Exact n-th root of a nonnegative integer, or None."""
    if value < 0:
        raise ValueError("negative base")
    if value in (0, 1):
        return value
    root = round(value ** (1.0 / n))
    # float seeding only; correctness comes from the exact scan below
    for candidate in range(max(root - 2, 1), root + 3):
        if candidate**n == value:
            return candidate
    return None


def nth_root(value: Rat, n: int) -> Rat:
    """Exact rational n-th root with real-root sign semantics.

    Odd n: the unique real root (sign follows the base).  Even n: the
    positive root of a positive base; a negative base raises
    EvenRootOfNegative.  A base with no exact rational root raises
    NoRationalRoot.

    >>> nth_root(Rat(-27, 8), 3)
    Fraction(-3, 2)
    """
    if n <= 0:
        raise ValueError("root index must be positive")
    if n == 1:
        return value
    if value < 0 and n % 2 == 0:
        raise EvenRootOfNegative(f"even root of {format_rat(value)}")
    sign = -1 if value < 0 else 1
    num = _int_nth_root(abs(value.numerator), n)
    den = _int_nth_root(value.denominator, n)
    if num is None or den is None:
        raise NoRationalRoot(f"{format_rat(value)} has no rational {n}-th root")
    return Rat(sign * num, den)


def two_adic_valuation(value: Rat) -> int:
    """v_2 of a nonzero rational: v_2(p) - v_2(q) for p/q in lowest terms.

    >>> two_adic_valuation(Rat(12))
    2
    >>> two_adic_valuation(Rat(1, 4))
    -2
    """
    if value == 0:
        raise ValueError("v_2(0) is undefined")

    def v2(k: int) -> int:
        k = abs(k)
        count = 0
        while k % 2 == 0:
            k //= 2
            count += 1
        return count

    return v2(value.numerator) - v2(value.denominator)


def odd_part(k: int) -> int:
    """Largest odd divisor of a positive integer."""
    if k <= 0:
        raise ValueError("odd_part needs a positive integer")
    while k % 2 == 0:
        k //= 2
    return k


def sgn(value: Rat) -> int:
    """Sign of a rational as -1, 0, or 1."""
    if value < 0:
        return -1
    return 1 if value > 0 else 0

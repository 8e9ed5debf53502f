"""Exact arithmetic in the first Weyl algebra.

Elements are finite sums  sum c_{i,j} x^i y^j  stored in normal form (all x
powers to the left of all y powers) with exact rational coefficients.  The
defining relation is  y*x - x*y = 1.  y exponents must stay nonnegative; x
exponents may be any integer (Laurent extension), which the valuation
machinery needs internally.  The spec-facing normal form uses nonnegative
exponents only; `apply_to_poly` enforces that.
"""

from __future__ import annotations

from math import comb
from typing import Dict, Iterable, Tuple, Union

from .coeff import Rat, format_rat
from .errors import NegativeXPower, NonzeroRequired

Monomial = Tuple[int, int]  # (x exponent, y exponent)


def _falling(c: int, t: int) -> int:
    """Falling factorial c (c-1) ... (c-t+1); valid for any integer c."""
    out = 1
    for s in range(t):
        out *= c - s
    return out


class WeylElement:
    """A normal-form element of the (Laurent-in-x) Weyl algebra."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Monomial, Rat] | None = None):
        self.terms: Dict[Monomial, Rat] = {}
        if terms:
            for key, coeff in terms.items():
                if coeff != 0:
                    if key[1] < 0:
                        raise ValueError("y exponents must be nonnegative")
                    self.terms[key] = Rat(coeff)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "WeylElement":
        return cls()

    @classmethod
    def scalar(cls, c) -> "WeylElement":
        return cls({(0, 0): Rat(c)})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "WeylElement":
        return cls({(i, j): Rat(c)})

    @classmethod
    def x(cls) -> "WeylElement":
        return cls.monomial(1, 0)

    @classmethod
    def y(cls) -> "WeylElement":
        return cls.monomial(0, 1)

    # -- ring operations ----------------------------------------------------

    def add(self, other: "WeylElement") -> "WeylElement":
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = out.get(key, Rat(0)) + coeff
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
        result = WeylElement()
        result.terms = out
        return result

    def neg(self) -> "WeylElement":
        result = WeylElement()
        result.terms = {key: -coeff for key, coeff in self.terms.items()}
        return result

    def sub(self, other: "WeylElement") -> "WeylElement":
        return self.add(other.neg())

    def scale(self, c) -> "WeylElement":
        c = Rat(c)
        result = WeylElement()
        if c != 0:
            result.terms = {key: coeff * c for key, coeff in self.terms.items()}
        return result

    def mul(self, other: "WeylElement") -> "WeylElement":
        """Exact product; moves every y of self past every x of other."""
        out: Dict[Monomial, Rat] = {}
        for (a, b), c1 in self.terms.items():
            for (c, d), c2 in other.terms.items():
                # y^b x^c = sum_t C(b,t) falling(c,t) x^{c-t} y^{b-t}
                for t in range(0, b + 1):
                    coeff = comb(b, t) * _falling(c, t)
                    if coeff == 0:
                        continue
                    key = (a + c - t, b + d - t)
                    acc = out.get(key, Rat(0)) + c1 * c2 * coeff
                    if acc == 0:
                        out.pop(key, None)
                    else:
                        out[key] = acc
        result = WeylElement()
        result.terms = out
        return result

    def pow(self, n: int) -> "WeylElement":
        if n < 0:
            raise ValueError("negative powers are not normal-form elements")
        result = WeylElement.scalar(1)
        for _ in range(n):
            result = result.mul(self)
        return result

    __add__ = add
    __sub__ = sub
    __neg__ = neg
    __mul__ = mul
    __pow__ = pow

    # -- queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def min_x_exponent(self) -> int:
        return min((i for i, _ in self.terms), default=0)

    def max_degrees(self) -> Tuple[int, int]:
        if not self.terms:
            return (0, 0)
        return (
            max(i for i, _ in self.terms),
            max(j for _, j in self.terms),
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces: list[str] = []
        for (i, j), coeff in sorted(self.terms.items(), reverse=True):
            factors: list[str] = []
            if i != 0:
                factors.append("x" if i == 1 else f"x^{i}")
            if j != 0:
                factors.append("y" if j == 1 else f"y^{j}")
            body = "*".join(factors)
            mag = abs(coeff)
            if not body:
                text = format_rat(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{format_rat(mag)}*{body}"
            if not pieces:
                pieces.append(text if coeff > 0 else f"-{text}")
            else:
                pieces.append(("+ " if coeff > 0 else "- ") + text)
        return " ".join(pieces)

    __repr__ = __str__


Word = Iterable[Union[str, Rat, int, WeylElement]]


def normalize(word: Word) -> WeylElement:
    """Multiply a written-order sequence of generators/scalars into normal form.

    Each item is "x", "y", a rational scalar, or an already-built element.

    >>> str(normalize(["y", "y", "x"]))
    'x*y^2 + 2*y'
    """
    result = WeylElement.scalar(1)
    for item in word:
        if isinstance(item, str):
            if item == "x":
                factor = WeylElement.x()
            elif item == "y":
                factor = WeylElement.y()
            else:
                raise ValueError(f"unknown generator {item!r}")
        elif isinstance(item, WeylElement):
            factor = item
        else:
            factor = WeylElement.scalar(item)
        result = result.mul(factor)
    return result


def mul(a: WeylElement, b: WeylElement) -> WeylElement:
    return a.mul(b)


def commutator(a: WeylElement, b: WeylElement) -> WeylElement:
    """a*b - b*a."""
    return a.mul(b).sub(b.mul(a))


Poly1 = list  # dense univariate polynomial over Rat, index = power of t


def poly_str(p: Poly1) -> str:
    return " + ".join(f"{format_rat(c)}*t^{k}" for k, c in enumerate(p) if c != 0) or "0"


def apply_to_poly(w: WeylElement, poly: Poly1) -> Poly1:
    """Apply w as a differential operator: x acts as (p -> t*p), y as d/dt.

    The left factor acts outermost:  apply(a*b, p) = apply(a, apply(b, p)).
    Raises NegativeXPower if w is not polynomial in x.
    """

    def d_dt(p: Poly1) -> Poly1:
        return [p[k] * k for k in range(1, len(p))]

    def times_t(p: Poly1, i: int) -> Poly1:
        return [Rat(0)] * i + list(p)

    out: Poly1 = []
    for (i, j), coeff in w.terms.items():
        if i < 0:
            raise NegativeXPower("operator application needs x exponents >= 0")
        piece = list(poly)
        for _ in range(j):
            piece = d_dt(piece)
        piece = times_t(piece, i)
        piece = [c * coeff for c in piece]
        # accumulate
        if len(piece) > len(out):
            out, piece = piece, out
        for k, c in enumerate(piece):
            out[k] = out[k] + c
    while out and out[-1] == 0:
        out.pop()
    return out


class WeylFraction:
    """Formal fraction num/den of Weyl elements, den nonzero.

    No reduction is attempted; only valuation and residue queries use these.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: WeylElement, den: WeylElement):
        if den.is_zero():
            raise NonzeroRequired("fraction denominator must be nonzero")
        self.num = num
        self.den = den

    def __str__(self) -> str:
        return f"({self.num}) / ({self.den})"

    __repr__ = __str__

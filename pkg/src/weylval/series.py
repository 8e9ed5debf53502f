"""Truncated Puiseux series, the Ore ring over them, and z-sequence valuations.

A PuiseuxSeries is a finite sum of c * x^{-q} terms plus an optional
precision horizon: the element is exact for exponents below `known_up_to`
and unknown beyond it.  OrePoly is a polynomial in one skew variable over
these coefficients with the commutation rule (variable * p = p * variable
+ p'), which covers both the y-basis and every z-basis at once.

A ZSequence carries the data z_{i+1} = z_i - gamma_{i+1} x^{-r_{i+1}} with
z_0 = y, finished by an irrational terminal value, an infinite rule with a
limit r*, or nothing (a bare prefix).  z_eval dispatches on the tail kind.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .coeff import Rat, format_rat, parse_rat
from .errors import (
    DepthExceeded,
    NonzeroValue,
    ParseError,
    TruncationLoss,
)
from .valuegroup import INFINITY, Value, ValueGroupElement
from .weyl import WeylElement


# -- Puiseux series ---------------------------------------------------------------


@dataclass(frozen=True)
class PuiseuxSeries:
    """Sum of c * x^{-q} with strictly increasing q; exact below known_up_to."""

    terms: Tuple[Tuple[Rat, Rat], ...]
    known_up_to: Optional[Rat] = None

    @staticmethod
    def make(
        pairs: Sequence[Tuple[Rat, Rat]], known_up_to: Optional[Rat] = None
    ) -> "PuiseuxSeries":
        acc: Dict[Rat, Rat] = {}
        for q, c in pairs:
            acc[q] = acc.get(q, Rat(0)) + c
        out = [
            (q, c)
            for q, c in sorted(acc.items())
            if c and (known_up_to is None or q < known_up_to)
        ]
        return PuiseuxSeries(tuple(out), known_up_to)

    @staticmethod
    def zero() -> "PuiseuxSeries":
        return PuiseuxSeries((), None)

    @staticmethod
    def scalar(c: Rat) -> "PuiseuxSeries":
        return PuiseuxSeries.make([(Rat(0), Rat(c))])

    @staticmethod
    def x_power(e: Rat) -> "PuiseuxSeries":
        """x^e, stored as the exponent record q = -e."""
        return PuiseuxSeries.make([(Rat(-e), Rat(1))])

    def is_exact_zero(self) -> bool:
        return not self.terms and self.known_up_to is None

    def leading(self) -> Optional[Tuple[Rat, Rat]]:
        return self.terms[0] if self.terms else None

    def value_floor(self) -> Tuple[bool, Value]:
        """(is_exact, bound): the value if certain, else a lower bound."""
        if self.terms:
            return True, ValueGroupElement.rational(self.terms[0][0])
        if self.known_up_to is None:
            return True, INFINITY
        return False, ValueGroupElement.rational(self.known_up_to)

    def add(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        bound = _min_bound(self.known_up_to, other.known_up_to)
        return PuiseuxSeries.make(self.terms + other.terms, bound)

    def neg(self) -> "PuiseuxSeries":
        return PuiseuxSeries(
            tuple((q, -c) for q, c in self.terms), self.known_up_to
        )

    def sub(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        return self.add(other.neg())

    def scale(self, c: Rat) -> "PuiseuxSeries":
        if c == 0:
            return PuiseuxSeries((), self.known_up_to)
        return PuiseuxSeries(
            tuple((q, c * coeff) for q, coeff in self.terms), self.known_up_to
        )

    def mul(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        # error horizon: unknown(a) * leading(b), leading(a) * unknown(b),
        # unknown * unknown
        va = self.terms[0][0] if self.terms else None
        vb = other.terms[0][0] if other.terms else None
        bounds = []
        if self.known_up_to is not None:
            if vb is not None:
                bounds.append(self.known_up_to + vb)
            if other.known_up_to is not None:
                bounds.append(self.known_up_to + other.known_up_to)
        if other.known_up_to is not None and va is not None:
            bounds.append(other.known_up_to + va)
        bound = min(bounds) if bounds else None
        pairs = [
            (qa + qb, ca * cb)
            for qa, ca in self.terms
            for qb, cb in other.terms
        ]
        return PuiseuxSeries.make(pairs, bound)

    def pow(self, n: int) -> "PuiseuxSeries":
        assert n >= 0
        out = PuiseuxSeries.scalar(Rat(1))
        for _ in range(n):
            out = out.mul(self)
        return out

    def shift_exp(self, dq: Rat) -> "PuiseuxSeries":
        """Multiply by x^{-dq}."""
        bound = None if self.known_up_to is None else self.known_up_to + dq
        return PuiseuxSeries(
            tuple((q + dq, c) for q, c in self.terms), bound
        )

    def delta(self) -> "PuiseuxSeries":
        """Derivative: x^{-q} goes to -q x^{-q-1}; the horizon shifts by 1."""
        bound = None if self.known_up_to is None else self.known_up_to + 1
        return PuiseuxSeries.make(
            [(q + 1, -q * c) for q, c in self.terms if q != 0], bound
        )

    def truncate(self, bound: Rat) -> "PuiseuxSeries":
        new_bound = bound if self.known_up_to is None else min(bound, self.known_up_to)
        return PuiseuxSeries.make(self.terms, new_bound)

    def __str__(self) -> str:
        parts = [
            (format_rat(c) if q == 0 else f"{format_rat(c)}*x^({format_rat(-q)})")
            for q, c in self.terms
        ]
        if self.known_up_to is not None:
            parts.append(f"O(x^({format_rat(-self.known_up_to)}))")
        return " + ".join(parts) if parts else "0"


def _min_bound(a: Optional[Rat], b: Optional[Rat]) -> Optional[Rat]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def delta(p: PuiseuxSeries) -> PuiseuxSeries:
    return p.delta()


_TERM_RE = re.compile(
    r"^\s*(-?\d+(?:/\d+)?)\s*(?:\*\s*x\^\(\s*(-?\d+(?:/\d+)?)\s*\))?\s*$"
)
_O_RE = re.compile(r"O\(x\^\(\s*(-?\d+(?:/\d+)?)\s*\)\)")


def parse_series(text: str) -> PuiseuxSeries:
    """Parse the series text format, e.g. "1*x^(-1/2) + 3*x^(-2) + O(x^(-5))"."""
    body = text.strip()
    if body == "0":
        return PuiseuxSeries.zero()
    bound: Optional[Rat] = None
    match = _O_RE.search(body)
    if match:
        bound = -parse_rat(match.group(1))
        body = (body[: match.start()] + body[match.end() :]).strip()
        body = body.rstrip("+ ").strip()
    pairs: List[Tuple[Rat, Rat]] = []
    if body:
        for chunk in body.split("+"):
            m = _TERM_RE.match(chunk)
            if not m:
                raise ParseError(f"bad series term {chunk.strip()!r}")
            c = parse_rat(m.group(1))
            q = -parse_rat(m.group(2)) if m.group(2) else Rat(0)
            pairs.append((q, c))
    return PuiseuxSeries.make(pairs, bound)


def format_series(p: PuiseuxSeries) -> str:
    return str(p)


# -- Ore polynomials ---------------------------------------------------------------


@dataclass(frozen=True)
class OrePoly:
    """Sum p_i(x) * t^i over Puiseux coefficients, with t p = p t + p'."""

    coeffs: Tuple[PuiseuxSeries, ...]

    @staticmethod
    def make(coeffs: Sequence[PuiseuxSeries]) -> "OrePoly":
        out = list(coeffs)
        while out and out[-1].is_exact_zero():
            out.pop()
        return OrePoly(tuple(out))

    @staticmethod
    def zero() -> "OrePoly":
        return OrePoly(())

    @staticmethod
    def from_series(p: PuiseuxSeries) -> "OrePoly":
        return OrePoly.make([p])

    @staticmethod
    def variable() -> "OrePoly":
        return OrePoly.make([PuiseuxSeries.zero(), PuiseuxSeries.scalar(Rat(1))])

    def is_zero_record(self) -> bool:
        return all(c.is_exact_zero() for c in self.coeffs)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> PuiseuxSeries:
        return self.coeffs[i] if i < len(self.coeffs) else PuiseuxSeries.zero()

    def add(self, other: "OrePoly") -> "OrePoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return OrePoly.make(
            [self.coeff(i).add(other.coeff(i)) for i in range(n)]
        )

    def neg(self) -> "OrePoly":
        return OrePoly.make([c.neg() for c in self.coeffs])

    def sub(self, other: "OrePoly") -> "OrePoly":
        return self.add(other.neg())

    def scale_series(self, p: PuiseuxSeries) -> "OrePoly":
        """Left-multiply every coefficient by p (p commutes with nothing here,
        but left coefficients multiply on the left, so this is exact)."""
        return OrePoly.make([p.mul(c) for c in self.coeffs])

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_exact_zero():
                continue
            head = f"({c})"
            parts.append(head if i == 0 else f"{head}*t^{i}")
        return " + ".join(parts) if parts else "0"


def _iter_delta(p: PuiseuxSeries, k: int) -> PuiseuxSeries:
    for _ in range(k):
        p = p.delta()
    return p


def ore_mul(f: OrePoly, g: OrePoly) -> OrePoly:
    """Product with t^i * p = sum_k C(i,k) p^{(k)} t^{i-k}."""
    n = len(f.coeffs) + len(g.coeffs)
    acc: List[PuiseuxSeries] = [PuiseuxSeries.zero() for _ in range(max(n, 1))]
    for i, p_i in enumerate(f.coeffs):
        if p_i.is_exact_zero():
            continue
        for j, q_j in enumerate(g.coeffs):
            if q_j.is_exact_zero():
                continue
            for k in range(i + 1):
                part = p_i.mul(_iter_delta(q_j, k)).scale(Rat(math.comb(i, k)))
                acc[i - k + j] = acc[i - k + j].add(part)
    return OrePoly.make(acc)


def shift_variable(f: OrePoly, a: PuiseuxSeries) -> OrePoly:
    """Rewrite f over the shifted variable: substitute t = s + a exactly.

    Evaluated by Horner using s^j a = sum_k C(j,k) a^{(k)} s^{j-k}; the
    skew rule is basis-independent, so the result is again an OrePoly.
    """
    shifted_var = OrePoly.make([a, PuiseuxSeries.scalar(Rat(1))])
    out = OrePoly.zero()
    for p_i in reversed(f.coeffs):
        out = ore_mul(out, shifted_var).add(OrePoly.from_series(p_i))
    return out


def embed(element: WeylElement) -> OrePoly:
    """Exact image of a Weyl element: x^i y^j with y as the skew variable."""
    degree = max((j for (_, j) in element.terms), default=0)
    coeffs = [PuiseuxSeries.zero() for _ in range(degree + 1)]
    for (i, j), c in element.terms.items():
        coeffs[j] = coeffs[j].add(PuiseuxSeries.x_power(Rat(i)).scale(c))
    return OrePoly.make(coeffs)


# -- z-sequences --------------------------------------------------------------------


@dataclass(frozen=True)
class ZTerminal:
    """v(z_k) is this irrational value for the last index k."""

    value: ValueGroupElement


@dataclass(frozen=True)
class ZRule:
    """Entries continue forever along entry_fn; r_i increases to `limit`."""

    name: str
    entry_fn: Callable[[int], Tuple[Rat, Rat]]
    limit: Rat


def builtin_z_rule(name: str) -> ZRule:
    text = name.strip()
    if text == "halving_to_one":
        return ZRule(
            "halving_to_one", lambda i: (1 - Rat(1, 2**i), Rat(1)), Rat(1)
        )
    raise ParseError(f"unknown builtin z rule {name!r}")


class ZSequence:
    def __init__(
        self,
        entries: Sequence[Tuple[Rat, Rat]],
        tail: Optional[object] = None,
    ):
        self.explicit_entries = [(Rat(r), Rat(g)) for r, g in entries]
        self.tail = tail
        self._cache: Dict[int, Tuple[Rat, Rat]] = {}
        last = None
        for r, g in self.explicit_entries:
            if g == 0:
                raise ParseError("z-sequence gamma must be nonzero")
            if r >= 1 or (last is not None and r <= last):
                raise ParseError("z-sequence exponents must increase and stay < 1")
            last = r

    @property
    def terminal(self) -> Optional[ZTerminal]:
        return self.tail if isinstance(self.tail, ZTerminal) else None

    @property
    def rule(self) -> Optional[ZRule]:
        return self.tail if isinstance(self.tail, ZRule) else None

    def has_entry(self, i: int) -> bool:
        return i <= len(self.explicit_entries) or self.rule is not None

    def entry(self, i: int) -> Tuple[Rat, Rat]:
        if i < 1:
            raise ValueError("entries are 1-based")
        if i <= len(self.explicit_entries):
            return self.explicit_entries[i - 1]
        if self.rule is not None:
            if i not in self._cache:
                self._cache[i] = self.rule.entry_fn(i)
            return self._cache[i]
        raise DepthExceeded(f"z-sequence exhausted at entry {i}", consulted=i)

    def to_json(self) -> dict:
        out: dict = {
            "entries": [
                {"r": format_rat(r), "gamma": format_rat(g)}
                for r, g in self.explicit_entries
            ]
        }
        if self.terminal:
            out["tail"] = {"kind": "irrational", "value": self.terminal.value.to_json()}
        elif self.rule:
            out["tail"] = {
                "kind": "rule",
                "rule": self.rule.name,
                "limit": format_rat(self.rule.limit),
            }
        else:
            out["tail"] = None
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ZSequence":
        entries = [
            (parse_rat(str(e["r"])), parse_rat(str(e["gamma"])))
            for e in data.get("entries", [])
        ]
        tail_data = data.get("tail")
        tail: Optional[object] = None
        if tail_data is not None:
            kind = tail_data.get("kind")
            if kind == "irrational":
                tail = ZTerminal(ValueGroupElement.from_json(tail_data["value"]))
            elif kind == "rule":
                tail = builtin_z_rule(str(tail_data.get("rule", "")))
            else:
                raise ParseError(f"unknown z tail kind {kind!r}")
        return cls(entries, tail)


def a_series(zseq: ZSequence, depth: int, exact: bool = False) -> PuiseuxSeries:
    """a_depth = sum_{i<=depth} gamma_i x^{-r_i}.

    For rule tails the honest horizon is the next exponent; `exact` marks the
    prefix itself as an exact element (used for exact basis changes).
    """
    pairs = [zseq.entry(i) for i in range(1, depth + 1)]
    bound: Optional[Rat] = None
    if not exact and zseq.has_entry(depth + 1):
        bound = zseq.entry(depth + 1)[0]
    return PuiseuxSeries.make([(r, g) for r, g in pairs], bound)


def translate_y(zseq: ZSequence, ell: int) -> Tuple[PuiseuxSeries, ZSequence]:
    """Re-base so the new z_0 is the old z_ell.

    Returns (a_ell, shifted sequence); an element f over the old variable
    corresponds to shift_variable(f, a_ell) over the new one, with equal
    values.
    """
    if ell < 0 or ell > len(zseq.explicit_entries):
        raise ValueError("translation index outside the explicit entries")
    a = a_series(zseq, ell, exact=True)
    shifted = ZSequence(zseq.explicit_entries[ell:], zseq.tail)
    return a, shifted


# -- z-sequence valuations ------------------------------------------------------------


def _terminal_eval(
    zseq: ZSequence, f: OrePoly
) -> Tuple[Value, Optional[Rat]]:
    k = len(zseq.explicit_entries)
    t_hat = zseq.terminal.value
    g = shift_variable(f, a_series(zseq, k, exact=True))
    best: Optional[ValueGroupElement] = None
    best_j = -1
    residue_coeff: Optional[Rat] = None
    pending: List[ValueGroupElement] = []
    for j, q_j in enumerate(g.coeffs):
        exact, floor = q_j.value_floor()
        if floor is INFINITY:
            continue
        cand = floor.add(t_hat.scalar_mul(j))
        if exact:
            if best is None or cand.cmp(best) < 0:
                best, best_j = cand, j
        else:
            pending.append(cand)
    if best is None:
        if pending:
            raise TruncationLoss("all coefficients are unknown at this precision")
        return INFINITY, None
    for bound in pending:
        if bound.cmp(best) < 0:
            raise TruncationLoss("an unknown coefficient could undercut the minimum")
    if best.is_zero():
        lead = g.coeffs[best_j].leading()
        assert lead is not None and best_j == 0 and lead[0] == 0
        residue_coeff = lead[1]
    return best, residue_coeff


def _stabilized_eval(
    zseq: ZSequence, f: OrePoly, depth_limit: int
) -> Tuple[Value, Optional[Rat]]:
    """Limit-1 regime: iterate exact single-entry shifts until stable."""
    g = f
    prev_profile = None
    for k in range(1, depth_limit + 1):
        r_k, gamma_k = zseq.entry(k)
        g = shift_variable(
            g, PuiseuxSeries.make([(r_k, gamma_k)])
        )
        profile = tuple(
            (lead[0] if (lead := q_j.leading()) else None) for q_j in g.coeffs
        )
        r_next = zseq.entry(k + 1)[0]
        unique_at_zero = bool(profile) and profile[0] is not None
        if unique_at_zero:
            v0 = profile[0]
            for j in range(1, len(g.coeffs)):
                exact, floor = g.coeffs[j].value_floor()
                if floor is INFINITY:
                    continue
                assert isinstance(floor, ValueGroupElement)
                if not floor.q + j * r_next > v0:
                    unique_at_zero = False
                    break
        if unique_at_zero and profile == prev_profile:
            lead = g.coeffs[0].leading()
            assert lead is not None
            return (
                ValueGroupElement.rational(lead[0]),
                lead[1] if lead[0] == 0 else None,
            )
        prev_profile = profile
    raise DepthExceeded(
        f"coefficient values did not stabilize within {depth_limit} rounds",
        consulted=depth_limit,
    )


def _z_eval_full(
    zseq: ZSequence, f: OrePoly, depth_limit: int
) -> Tuple[Value, Optional[Rat]]:
    if f.is_zero_record():
        return INFINITY, None
    if zseq.terminal is not None:
        return _terminal_eval(zseq, f)
    if zseq.rule is not None:
        if zseq.rule.limit < 1:
            # below limit 1, plain commutative substitution IS the valuation
            return _naive_substitution_eval(zseq, f, depth_limit)
        return _stabilized_eval(zseq, f, depth_limit)
    raise DepthExceeded("bare z-sequence prefix defines no tail regime")


def z_eval(zseq: ZSequence, f: OrePoly, depth_limit: int = 64) -> Value:
    """v(f) for the valuation defined by the z-sequence."""
    return _z_eval_full(zseq, f, depth_limit)[0]


def _naive_substitution_eval(
    zseq: ZSequence, f: OrePoly, depth_limit: int
) -> Tuple[Value, Optional[Rat]]:
    """Verdict of plain commutative substitution.

    Substitutes exact prefix sums of the sequence for the variable using
    ordinary commutative arithmetic — every twist correction already baked
    into the coefficients stays, none is compensated — and returns the first
    verdict that survives a doubling of the prefix length.  A zero verdict
    must survive deg(f)+1 distinct prefixes, since a prefix sum can happen
    to be a root of the coefficient polynomial.

    For limit < 1 this is the defining formula of the valuation; at limit 1
    it is the documented wrong baseline that the shifted-basis evaluation
    corrects.
    """
    degree = max(len(f.coeffs) - 1, 0)
    cap = None if zseq.rule is not None else len(zseq.explicit_entries)
    verdicts: List[Value] = []
    depth = 1 if cap is None else cap
    while True:
        used = depth if cap is None else min(depth, cap)
        s = a_series(zseq, used, exact=True)
        total = PuiseuxSeries.zero()
        for j, q_j in enumerate(f.coeffs):
            total = total.add(q_j.mul(s.pow(j)))
        lead = total.leading()
        if lead is None and total.known_up_to is not None:
            raise TruncationLoss(
                "coefficients are too imprecise for a substitution verdict"
            )
        value: Value = (
            INFINITY if lead is None else ValueGroupElement.rational(lead[0])
        )
        residue = lead[1] if lead is not None and lead[0] == 0 else None
        verdicts.append(value)
        if cap is not None and used == cap:
            return value, residue
        needed = 2 if lead is not None else max(2, degree + 1)
        window = verdicts[-needed:]
        if len(window) == needed and all(u.cmp(window[0]) == 0 for u in window):
            return value, residue
        if depth >= depth_limit:
            raise DepthExceeded(
                f"substitution verdict did not stabilize within {depth_limit}",
                consulted=depth,
            )
        depth *= 2


def z_eval_naive(zseq: ZSequence, f: OrePoly, depth_limit: int = 64) -> Value:
    """Deliberately-naive path: commutative substitution regardless of the
    tail regime.  Kept as the documented wrong baseline for limit-1
    sequences; agrees with z_eval only when the limit stays below 1."""
    if f.is_zero_record():
        return INFINITY
    return _naive_substitution_eval(zseq, f, depth_limit)[0]


def z_residue(zseq: ZSequence, f: OrePoly, depth_limit: int = 64) -> Rat:
    value, coeff = _z_eval_full(zseq, f, depth_limit)
    if value is INFINITY or not value.is_zero():
        raise NonzeroValue(f"element has value {value}, not 0")
    assert coeff is not None
    return coeff


def tilde_eval(zseq: ZSequence, f: OrePoly, depth_limit: int = 64) -> Value:
    """Value over the infinitesimally-extended group: v(z) = r* - mu.

    Rewrites f over the deep z-variable at doubling depths and takes
    min_j v(q_j) + j(r* - mu), stopping once the verdict survives two
    doublings (single agreements can be flukes when a prefix sum happens
    to be a root of a coefficient).

    Input convention — tail-faithful coefficients: a truncation bound on an
    input coefficient asserts that its hidden tail follows the sequence's
    own continuation, the only truncated elements the infinitesimal
    extension contributes.  Under that reading a rewritten coefficient with
    no decidable term is exactly zero, which is what lets the deep
    variable's infinitesimal value surface.  Fully exact inputs never
    invoke the convention and agree with z_eval.
    """
    rule = zseq.rule
    if rule is None:
        raise ValueError("tilde evaluation needs an infinite-rule tail")
    r_star = rule.limit
    if f.is_zero_record():
        return INFINITY

    def attempt(depth: int) -> Value:
        g = shift_variable(f, a_series(zseq, depth, exact=True))
        best: Value = INFINITY
        for j, q_j in enumerate(g.coeffs):
            exact, floor = q_j.value_floor()
            if floor is INFINITY or not exact:
                continue
            assert isinstance(floor, ValueGroupElement)
            cand = ValueGroupElement(floor.q + j * r_star, 0, j)
            if cand.cmp(best) < 0:
                best = cand
        return best

    depth = 1
    verdicts: List[Value] = []
    while depth <= depth_limit:
        verdicts.append(attempt(depth))
        window = verdicts[-3:]
        if len(window) == 3 and all(u.cmp(window[0]) == 0 for u in window):
            return window[0]
        depth *= 2
    raise DepthExceeded(
        f"tilde value did not stabilize within depth {depth_limit}",
        consulted=depth_limit,
    )

"""Tower descriptors: the data defining one valuation.

A descriptor lists steps (m_i, n_i, beta_i), i >= 1, building the tower
    w_0 = y,   w_i = x^{m_i} w_{i-1}^{n_i} - beta_i,
with generator values v(x) = -1, v(w_{i-1}) = m_i/n_i.  A tail either
declares the last tower element's value irrational (rank-two value group),
or supplies a rule generating steps forever, or is absent (the descriptor is
a prefix truncation).  Index 0 in pair computations refers to x itself via
the convention (m_0, n_0) = (1, -1) with conceptual beta_0 = 1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .coeff import Rat, format_rat, odd_part, parse_rat, sgn, two_adic_valuation, nth_root
from .errors import (
    DeclarationInconsistent,
    DepthExceeded,
    MissingSignChoice,
    NegativeXPower,
    ParseError,
)
from .valuegroup import INFINITY, Value, ValueGroupElement
from .weyl import WeylElement, WeylFraction


@dataclass(frozen=True)
class OmegaStep:
    m: int
    n: int
    beta: Rat

    def ratio(self) -> Rat:
        return Rat(self.m, self.n)


class GroupKind:
    TWO_DIVISIBLE = "TwoDivisibleRationalSubgroup"
    NON_TWO_DIVISIBLE = "NonTwoDivisibleRationalSubgroup"
    RANK_TWO = "RankTwo"


@dataclass(frozen=True)
class IrrationalTerminal:
    """Tail declaring v(w_N) = value, a positive irrational."""

    value: ValueGroupElement


@dataclass(frozen=True)
class InfiniteRule:
    """Tail generating steps for every index >= 1.

    `window` is the declared prefix window: the maximal 2-adic depth of the
    value group must already be attained by the steps inside it (checked by
    the ordering machinery when it applies).
    """

    name: str
    step_fn: Callable[[int], OmegaStep]
    declared_kind: str
    window: int = 8


Tail = Optional[object]  # IrrationalTerminal | InfiniteRule | None


_CONSTANT_RE = re.compile(r"constant\(\s*(-?\d+)\s*,\s*(\d+)\s*,\s*([^,)]+)\)\s*$")


def builtin_rule(name: str) -> InfiniteRule:
    """Builtin step rules addressable from descriptor files.

    "halving" is the family i -> (1, 2^i, 1) (2-divisible value group).
    "constant(m,n,beta)" is the geometric family i -> (m, n^i, beta); with
    odd n it gives a non-2-divisible rational value group.
    """
    text = name.strip()
    if text == "halving":
        return InfiniteRule(
            "halving", lambda i: OmegaStep(1, 2**i, Rat(1)), GroupKind.TWO_DIVISIBLE
        )
    match = _CONSTANT_RE.match(text)
    if match:
        m, n, beta = int(match.group(1)), int(match.group(2)), parse_rat(match.group(3))
        if n < 2:
            raise ParseError("constant(m,n,beta) needs n >= 2")
        kind = (
            GroupKind.NON_TWO_DIVISIBLE if n % 2 == 1 else GroupKind.TWO_DIVISIBLE
        )
        return InfiniteRule(
            f"constant({m},{n},{format_rat(beta)})",
            lambda i: OmegaStep(m, n**i, beta),
            kind,
        )
    raise ParseError(f"unknown builtin rule {name!r}")


class OmegaDescriptor:
    """Steps + tail + stored residue-unit signs."""

    def __init__(
        self,
        steps: List[OmegaStep],
        tail: Tail = None,
        alpha_signs: Optional[Dict[Tuple[int, int], int]] = None,
    ):
        self.explicit_steps = list(steps)
        self.tail = tail
        self.alpha_signs = dict(alpha_signs or {})
        for (i, j), sign in self.alpha_signs.items():
            if not (1 <= i < j) or sign not in (-1, 1):
                raise DeclarationInconsistent(
                    f"alpha sign for ({i},{j}) must have 1 <= i < j and sign +-1"
                )
        self._cache: Dict[int, OmegaStep] = {}
        if isinstance(tail, IrrationalTerminal):
            t = tail.value
            if t.k_xi == 0 or t.k_mu != 0:
                raise DeclarationInconsistent(
                    "terminal value must be irrational (k_xi != 0, k_mu = 0)"
                )

    # -- step access ---------------------------------------------------------

    def has_step(self, i: int) -> bool:
        return i <= len(self.explicit_steps) or isinstance(self.tail, InfiniteRule)

    def step(self, i: int) -> OmegaStep:
        """1-based step access; materializes rule steps on demand."""
        if i < 1:
            raise ValueError("step indices are 1-based")
        if i <= len(self.explicit_steps):
            return self.explicit_steps[i - 1]
        if isinstance(self.tail, InfiniteRule):
            if i not in self._cache:
                self._cache[i] = self.tail.step_fn(i)
            return self._cache[i]
        raise DepthExceeded(f"descriptor exhausted at step {i}", consulted=i)

    @property
    def terminal(self) -> Optional[IrrationalTerminal]:
        return self.tail if isinstance(self.tail, IrrationalTerminal) else None

    @property
    def rule(self) -> Optional[InfiniteRule]:
        return self.tail if isinstance(self.tail, InfiniteRule) else None

    @property
    def terminal_index(self) -> Optional[int]:
        """Tower index N with v(w_N) irrational, when a terminal is declared."""
        return len(self.explicit_steps) if self.terminal else None

    def xi_scale(self) -> Rat:
        if self.terminal:
            return self.terminal.value.xi_scale
        return Rat(1)

    # -- generator values ----------------------------------------------------

    def generator_value(self, i: int) -> Value:
        """v(w_i) for i >= -1 (w_{-1} = x, w_0 = y)."""
        if i < -1:
            raise ValueError("generator indices start at -1")
        if i == -1:
            return ValueGroupElement.rational(-1)
        if self.terminal and i == self.terminal_index:
            return self.terminal.value
        step = self.step(i + 1)
        return ValueGroupElement.rational(step.ratio())

    def pair_mn(self, i: int) -> Tuple[int, int]:
        """(m_i, n_i) with the index-0 convention (1, -1)."""
        if i == 0:
            return (1, -1)
        step = self.step(i)
        return (step.m, step.n)

    def beta(self, i: int) -> Rat:
        """beta_i with the conceptual beta_0 = 1."""
        if i == 0:
            return Rat(1)
        return self.step(i).beta

    def h(self, i: int) -> int:
        """2-adic depth of |n_i| (h_0 = 0)."""
        _, n = self.pair_mn(i)
        return two_adic_valuation(Rat(abs(n)))

    # -- JSON -----------------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {
            "steps": [
                {"m": s.m, "n": s.n, "beta": format_rat(s.beta)}
                for s in self.explicit_steps
            ]
        }
        if self.terminal:
            out["tail"] = {"kind": "irrational", "value": self.terminal.value.to_json()}
        elif self.rule:
            out["tail"] = {
                "kind": "rule",
                "rule": self.rule.name,
                "group_kind": self.rule.declared_kind,
            }
        if self.alpha_signs:
            out["alpha_signs"] = [
                {"i": i, "j": j, "sign": sign}
                for (i, j), sign in sorted(self.alpha_signs.items())
            ]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "OmegaDescriptor":
        if not isinstance(data, dict):
            raise ParseError("descriptor JSON must be an object")
        steps = []
        for entry in data.get("steps", []):
            try:
                steps.append(
                    OmegaStep(int(entry["m"]), int(entry["n"]), parse_rat(str(entry["beta"])))
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad step entry {entry!r}: {exc}") from None
        tail_data = data.get("tail")
        tail: Tail = None
        if tail_data is not None:
            kind = tail_data.get("kind")
            if kind == "irrational":
                tail = IrrationalTerminal(
                    ValueGroupElement.from_json(tail_data.get("value", {}))
                )
            elif kind == "rule":
                tail = builtin_rule(str(tail_data.get("rule", "")))
                declared = tail_data.get("group_kind")
                if declared is not None and declared != tail.declared_kind:
                    raise DeclarationInconsistent(
                        f"rule {tail.name} has group kind {tail.declared_kind}, "
                        f"not {declared}"
                    )
            else:
                raise ParseError(f"unknown tail kind {kind!r}")
        alpha_signs: Dict[Tuple[int, int], int] = {}
        for entry in data.get("alpha_signs", []):
            try:
                alpha_signs[(int(entry["i"]), int(entry["j"]))] = int(entry["sign"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad alpha sign entry {entry!r}: {exc}") from None
        return cls(steps, tail, alpha_signs)


# -- pair data ----------------------------------------------------------------


@dataclass(frozen=True)
class PairData:
    i: int
    j: int
    d: int
    k_ij: int
    k_ji: int


def pair_data(desc: OmegaDescriptor, i: int, j: int) -> PairData:
    """Crossing data for generator indices 0 <= i != j (0 means x).

    d = gcd(|m_j n_i|, |m_i n_j|);  K_ij = m_j n_i / d;  K_ji = m_i n_j / d.
    """
    if i == j or i < 0 or j < 0:
        raise ValueError("pair_data needs distinct indices >= 0")
    m_i, n_i = desc.pair_mn(i)
    m_j, n_j = desc.pair_mn(j)
    d = math.gcd(abs(m_j * n_i), abs(m_i * n_j))
    k_ij, k_ji = (m_j * n_i) // d, (m_i * n_j) // d
    # cross identity that pins the sign conventions
    assert k_ij * m_i * n_j == k_ji * m_j * n_i
    return PairData(i, j, d, k_ij, k_ji)


def _alpha_root_data(desc: OmegaDescriptor, i: int, j: int):
    """(d_odd, l1, l2) with alpha_{i,j}^{d_odd} = beta_i^{l1} beta_j^{-l2}."""
    data = pair_data(desc, i, j)
    m_i, _ = desc.pair_mn(i)
    m_j, _ = desc.pair_mn(j)
    d_odd = odd_part(data.d)
    if (d_odd * m_j) % data.d or (d_odd * m_i) % data.d:
        raise AssertionError("odd-part shortcut exponents must be integral")
    return d_odd, (d_odd * m_j) // data.d, (d_odd * m_i) // data.d


def _is_stored_sign_pair(desc: OmegaDescriptor, i: int, j: int) -> bool:
    """Pairs whose residue unit needs a stored sign: both n even (so i,j >= 1)."""
    if i == 0 or j == 0:
        return False
    return desc.pair_mn(i)[1] % 2 == 0 and desc.pair_mn(j)[1] % 2 == 0


def _stored_sign(desc: OmegaDescriptor, i: int, j: int) -> int:
    key = (min(i, j), max(i, j))
    if key in desc.alpha_signs:
        return desc.alpha_signs[key]
    if desc.rule is not None:
        # infinitely many pairs exist; unstored ones default to +1
        return 1
    raise MissingSignChoice(f"pair {key} needs a stored residue-unit sign")


def alpha(desc: OmegaDescriptor, i: int, j: int) -> Rat:
    """Residue of w_{i-1}^{K_ij} w_{j-1}^{-K_ji}, exact rational mode.

    Raises NoRationalRoot when the residue exists as a real number but not in
    Q, and MissingSignChoice when both n_i, n_j are even and the descriptor
    stores no sign for the pair.
    """
    if i == j:
        return Rat(1)
    if i > j:
        return 1 / alpha(desc, j, i)
    data = pair_data(desc, i, j)
    beta_i, beta_j = desc.beta(i), desc.beta(j)
    m_i, _ = desc.pair_mn(i)
    m_j, _ = desc.pair_mn(j)
    if _is_stored_sign_pair(desc, i, j):
        sign = _stored_sign(desc, i, j)
        target = beta_i**m_j * beta_j ** (-m_i)
        return sign * nth_root(target, data.d)
    d_odd, l1, l2 = _alpha_root_data(desc, i, j)
    base = beta_i**l1 * beta_j ** (-l2)
    return nth_root(base, d_odd)


def alpha_sign(desc: OmegaDescriptor, i: int, j: int) -> int:
    """Sign of the residue unit, computable even when its value is irrational."""
    if i == j:
        return 1
    if i > j:
        return alpha_sign(desc, j, i)
    if _is_stored_sign_pair(desc, i, j):
        return _stored_sign(desc, i, j)
    _, l1, l2 = _alpha_root_data(desc, i, j)
    sign = sgn(desc.beta(i)) ** abs(l1) * sgn(desc.beta(j)) ** abs(l2)
    return 1 if sign >= 0 else -1


# -- tower elements -----------------------------------------------------------


def omega_element(desc: OmegaDescriptor, i: int) -> WeylElement:
    """Expanded normal form of w_i; raises NegativeXPower if some m_k < 0."""
    if i < -1:
        raise ValueError("tower indices start at -1")
    if i == -1:
        return WeylElement.x()
    element = WeylElement.y()
    for k in range(1, i + 1):
        step = desc.step(k)
        if step.m < 0:
            raise NegativeXPower(
                f"step {k} has m = {step.m}; use omega_fraction instead"
            )
        element = WeylElement.monomial(step.m, 0).mul(element.pow(step.n)).sub(
            WeylElement.scalar(step.beta)
        )
    return element


def omega_fraction(desc: OmegaDescriptor, i: int) -> WeylFraction:
    """w_i as a fraction x^{-d} * num, clearing one trailing negative x power.

    Supports all-nonnegative prefixes (denominator 1) and a single negative
    m at the last step; deeper nesting of negative powers has no closed
    normal form here and raises NegativeXPower.
    """
    if i <= 0:
        return WeylFraction(omega_element(desc, i), WeylElement.scalar(1))
    last = desc.step(i)
    if last.m >= 0:
        return WeylFraction(omega_element(desc, i), WeylElement.scalar(1))
    inner = omega_element(desc, i - 1)  # raises if earlier steps are negative too
    num = inner.pow(last.n).sub(WeylElement.monomial(-last.m, 0).scale(last.beta))
    return WeylFraction(num, WeylElement.monomial(-last.m, 0))


def commutator_value(desc: OmegaDescriptor, i: int, j: int) -> Value:
    """Closed-form value of [w_j, w_i] for -1 <= i < j.

    Equals -v(x y w_1 ... w_{j-1} with w_i omitted); [y, x] is the scalar 1,
    so (i, j) = (-1, 0) gives 0.
    """
    if not (-1 <= i < j):
        raise ValueError("need -1 <= i < j")
    total = ValueGroupElement.rational(0)
    for ell in range(-1, j):
        if ell == i:
            continue
        value = desc.generator_value(ell)
        if value is INFINITY:
            raise DepthExceeded("commutator value needs deeper descriptor data")
        total = total.add(value)
    return total.neg()


# -- value group shape ---------------------------------------------------------


def group_kind(desc: OmegaDescriptor) -> str:
    if desc.terminal:
        return GroupKind.RANK_TWO
    if desc.rule:
        return desc.rule.declared_kind
    return GroupKind.NON_TWO_DIVISIBLE


def basis_slot(desc: OmegaDescriptor) -> Optional[Tuple[int, int]]:
    """(H, b) for the 2-torsion basis of the rational part, or None.

    H is the maximal 2-adic step depth, b the first step index attaining it;
    b = 0 denotes the x slot (all-odd-n descriptors, H = 0).  None means the
    rational part is 2-divisible (no slot).
    """
    kind = group_kind(desc)
    if kind == GroupKind.TWO_DIVISIBLE:
        return None
    if desc.rule:
        indices = range(1, desc.rule.window + 1)
    else:
        indices = range(1, len(desc.explicit_steps) + 1)
    best_h, best_i = 0, 0
    for i in indices:
        h_i = desc.h(i)
        if h_i > best_h:
            best_h, best_i = h_i, i
    return (best_h, best_i if best_h >= 1 else 0)


def prefix_sum(desc: OmegaDescriptor, k: int) -> Rat:
    """-1 + sum_{i=1..k} m_i/n_i  (the k-th product-value partial sum)."""
    total = Rat(-1)
    for i in range(1, k + 1):
        total += desc.step(i).ratio()
    return total


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str


def validate(desc: OmegaDescriptor, prefix_depth: int = 8) -> List[Violation]:
    """Check descriptor well-formedness over the first `prefix_depth` steps.

    Returns a list of violations (empty means valid as far as checked).
    """
    out: List[Violation] = []
    depth = prefix_depth
    if not desc.rule:
        depth = min(prefix_depth, len(desc.explicit_steps))

    steps = []
    for i in range(1, depth + 1):
        steps.append(desc.step(i))

    for idx, step in enumerate(steps, start=1):
        if step.n < 1:
            out.append(Violation("StepShape", f"step {idx}: n must be >= 1"))
            continue
        if math.gcd(abs(step.m), step.n) != 1:
            out.append(
                Violation("StepShape", f"step {idx}: gcd(|m|, n) must be 1")
            )
        if step.beta == 0:
            out.append(Violation("StepShape", f"step {idx}: beta must be nonzero"))
        if idx == 1 and Rat(step.m, step.n) >= 1:
            out.append(Violation("StepShape", "step 1: m/n must be < 1"))
        if idx >= 2 and step.m <= 0:
            out.append(
                Violation("StepShape", f"step {idx}: m must be positive beyond step 1")
            )

    if any(v.rule == "StepShape" for v in out):
        return out  # downstream checks assume well-shaped steps

    # product-value partial sums stay negative
    for k in range(1, depth + 1):
        if prefix_sum(desc, k) >= 0:
            out.append(
                Violation("PrefixSum", f"partial sum at k = {k} is not negative")
            )
            break
    if desc.terminal:
        n = len(desc.explicit_steps)
        t = desc.terminal.value
        if not ValueGroupElement.rational(0).cmp(t) < 0:
            out.append(Violation("TerminalShape", "terminal value must be positive"))
        total = ValueGroupElement.rational(prefix_sum(desc, n)).add(t)
        if not total.cmp(ValueGroupElement.rational(0)) < 0:
            out.append(
                Violation("PrefixSum", "prefix sum plus terminal value is not negative")
            )

    # sign constancy over even-n steps
    even_signs = {sgn(s.beta) for s in steps if s.n % 2 == 0}
    if desc.terminal or desc.rule is None:
        # finite data: include every explicit step
        even_signs |= {
            sgn(s.beta) for s in desc.explicit_steps if s.n % 2 == 0
        }
    if len(even_signs) > 1:
        out.append(
            Violation("SignConstancy", "beta signs differ across even-n steps")
        )

    # triple condition: alpha_{a,b} alpha_{a,c} alpha_{b,c} > 0 when
    # h_a = h_b <= h_c (indices include 0 = x with h_0 = 0)
    indices = list(range(0, depth + 1))
    h_vals = {i: desc.h(i) for i in indices}
    for a in indices:
        for b in indices:
            if b <= a:
                continue
            if h_vals[a] != h_vals[b]:
                continue
            for c in indices:
                if c in (a, b) or h_vals[c] < h_vals[a]:
                    continue
                try:
                    product = (
                        alpha_sign(desc, a, b)
                        * alpha_sign(desc, a, c)
                        * alpha_sign(desc, b, c)
                    )
                except MissingSignChoice as exc:
                    out.append(Violation("MissingSignChoice", str(exc)))
                    return out
                if product <= 0:
                    out.append(
                        Violation(
                            "TripleCondition",
                            f"residue-unit signs inconsistent on ({a},{b},{c})",
                        )
                    )
    return out

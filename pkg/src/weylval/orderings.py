"""Compatible orderings: enumeration, the sign oracle, and the extension map.

An ordering compatible with a tower valuation is pinned by one sign per slot
of a fixed 2-torsion basis of the value group modulo doubled values.  The
basis is the tower generator of maximal 2-adic step depth (x itself when
every n_i is odd) together with the irrational terminal slot when one is
declared, so a descriptor carries 1, 2, or 4 compatible orderings.

The sign of a nonzero element is computed from its certified leading data:
the sign of the residue relative to the canonical representative word, times
the character evaluated on the representative's two parities.  Squares of
even representatives have positive residue, which makes the value of the
representative the only thing that matters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Union

from .coeff import sgn
from .descriptor import OmegaDescriptor, basis_slot, omega_element
from .errors import DeclarationInconsistent, NonzeroRequired, NotExtendable, ParseError
from .evaluate import SampleReport, eval_element, leading_data, sample_element
from .extension import check_extendable
from .valuegroup import INFINITY, cmp as value_cmp
from .weyl import WeylElement, WeylFraction


@dataclass(frozen=True)
class OrderingDescriptor:
    """A character on the 2-torsion basis: one sign per basis slot.

    omega_index is the tower index of the maximal-depth generator (-1 means
    x itself, the all-odd-n case); None when the rational part of the value
    group is 2-divisible and the slot does not exist.  terminal marks the
    irrational slot of rank-two groups.  Signs of absent slots stay +1.
    """

    omega_index: Optional[int] = None
    terminal: bool = False
    omega_sign: int = 1
    terminal_sign: int = 1

    def __post_init__(self) -> None:
        if self.omega_sign not in (-1, 1) or self.terminal_sign not in (-1, 1):
            raise DeclarationInconsistent("ordering signs must be +1 or -1")
        if self.omega_index is None and self.omega_sign != 1:
            raise DeclarationInconsistent("no omega slot to carry a -1 sign")
        if not self.terminal and self.terminal_sign != 1:
            raise DeclarationInconsistent("no terminal slot to carry a -1 sign")

    def character(self, eps_omega: int, eps_terminal: int) -> int:
        """Character value on a vector given by its two basis parities."""
        out = 1
        if self.omega_index is not None and eps_omega % 2:
            out *= self.omega_sign
        if self.terminal and eps_terminal % 2:
            out *= self.terminal_sign
        return out

    def to_json(self) -> dict:
        basis: dict = {}
        signs: List[int] = []
        if self.omega_index is not None:
            basis["omega_index"] = self.omega_index
            signs.append(self.omega_sign)
        if self.terminal:
            basis["terminal"] = True
            signs.append(self.terminal_sign)
        return {"basis": basis, "signs": signs}

    @classmethod
    def from_json(cls, data: dict) -> "OrderingDescriptor":
        if not isinstance(data, dict):
            raise ParseError("ordering JSON must be an object")
        basis = data.get("basis", {})
        if not isinstance(basis, dict):
            raise ParseError("ordering basis must be an object")
        omega_index = basis.get("omega_index")
        terminal = bool(basis.get("terminal", False))
        signs = list(data.get("signs", []))
        expected = (omega_index is not None) + terminal
        if len(signs) != expected:
            raise ParseError(
                f"ordering needs {expected} signs for its basis, got {len(signs)}"
            )
        omega_sign = int(signs.pop(0)) if omega_index is not None else 1
        terminal_sign = int(signs.pop(0)) if terminal else 1
        try:
            return cls(
                None if omega_index is None else int(omega_index),
                terminal,
                omega_sign,
                terminal_sign,
            )
        except DeclarationInconsistent as exc:
            raise ParseError(str(exc)) from None


def enumerate_orderings(desc: OmegaDescriptor) -> List[OrderingDescriptor]:
    """All orderings compatible with the descriptor's valuation: 1, 2, or 4."""
    slot = basis_slot(desc)
    omega_index = None if slot is None else slot[1] - 1
    has_terminal = desc.terminal is not None
    omega_choices = (1, -1) if slot is not None else (1,)
    terminal_choices = (1, -1) if has_terminal else (1,)
    return [
        OrderingDescriptor(omega_index, has_terminal, s_o, s_t)
        for s_o in omega_choices
        for s_t in terminal_choices
    ]


def _part_sign(
    desc: OmegaDescriptor,
    ordering: OrderingDescriptor,
    element: WeylElement,
    depth_limit: int,
) -> int:
    data = leading_data(desc, element, depth_limit)
    if data.value is INFINITY:
        raise NonzeroRequired("the zero element has no sign")
    assert data.lam is not None and data.lam != 0
    return sgn(data.lam) * ordering.character(data.eps_basis, data.eps_terminal)


def sign(
    desc: OmegaDescriptor,
    ordering: OrderingDescriptor,
    element: Union[WeylElement, WeylFraction],
    depth_limit: int = 64,
) -> int:
    """Sign of a nonzero element or left fraction under one ordering."""
    if isinstance(element, WeylFraction):
        return _part_sign(desc, ordering, element.num, depth_limit) * _part_sign(
            desc, ordering, element.den, depth_limit
        )
    return _part_sign(desc, ordering, element, depth_limit)


def compatibility_check(
    desc: OmegaDescriptor,
    ordering: OrderingDescriptor,
    trials: int = 200,
    seed: int = 0,
    max_degree: int = 5,
    depth_limit: int = 64,
) -> SampleReport:
    """Sample the ordering axioms the sign oracle must satisfy.

    Per trial: squares are positive, sign is multiplicative, and adding a
    strictly higher-value element does not change the sign (which is exactly
    invariance of sign across equivalent elements).
    """
    rng = random.Random(seed)
    report = SampleReport(trials=trials)
    for _ in range(trials):
        f = sample_element(rng, max_degree=max_degree, max_terms=4, coeff_bound=5)
        g = sample_element(rng, max_degree=max_degree, max_terms=4, coeff_bound=5)
        s_f = sign(desc, ordering, f, depth_limit)
        s_g = sign(desc, ordering, g, depth_limit)
        if sign(desc, ordering, g.mul(g), depth_limit) != 1:
            report.violations.append({"kind": "square", "g": str(g)})
        if sign(desc, ordering, f.mul(g), depth_limit) != s_f * s_g:
            report.violations.append(
                {"kind": "multiplicativity", "f": str(f), "g": str(g)}
            )
        c = value_cmp(
            eval_element(desc, f, depth_limit), eval_element(desc, g, depth_limit)
        )
        if c != 0:
            s_low = s_f if c < 0 else s_g
            if sign(desc, ordering, f.add(g), depth_limit) != s_low:
                report.violations.append(
                    {"kind": "equivalence", "f": str(f), "g": str(g)}
                )
    return report


@dataclass(frozen=True)
class ExtensionResult:
    """Extension data for one ordering: the forced root sign, if any, and
    the unique compatible ordering on the extension ring."""

    sign_choice: Optional[int]
    ordering: OrderingDescriptor

    def to_json(self) -> dict:
        return {
            "sign_choice": self.sign_choice,
            "ordering": self.ordering.to_json(),
        }


def extend_ordering(
    desc: OmegaDescriptor,
    ordering: OrderingDescriptor,
    depth_limit: int = 64,
) -> ExtensionResult:
    """Extend one compatible ordering to the Ore ring over Puiseux series.

    Raises NotExtendable when the valuation itself does not extend, or when
    x is negative under the ordering (the extension ring contains fractional
    powers of x, which are squares there, so x must be positive).  Otherwise
    the root sign is forced by positivity of the maximal-depth generator,
    and the extension ring carries a unique compatible ordering: its value
    group's rational part is fully divisible, leaving only the terminal
    slot's sign to survive.
    """
    violation = check_extendable(desc)
    if violation is not None:
        raise NotExtendable(
            f"extension condition {violation.condition} fails: {violation.detail}"
        )
    if sign(desc, ordering, WeylElement.x(), depth_limit) != 1:
        raise NotExtendable("x is negative under this ordering")
    slot = basis_slot(desc)
    sign_choice: Optional[int] = None
    if slot is not None and slot[0] >= 1:
        base = omega_element(desc, slot[1] - 1)
        sign_choice = sign(desc, ordering, base, depth_limit)
    has_terminal = desc.terminal is not None
    extended = OrderingDescriptor(
        omega_index=None,
        terminal=has_terminal,
        terminal_sign=ordering.terminal_sign if has_terminal else 1,
    )
    return ExtensionResult(sign_choice, extended)


enumerate = enumerate_orderings

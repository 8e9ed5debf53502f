"""Extending a Weyl-algebra valuation to the Ore ring over Puiseux series.

Three stages: an extendability gate (two sign conditions over the step
prefix), resolution of the per-step real roots gamma-tilde (with the one
free sign in the non-2-divisible case), and the conversion state machine
that turns an omega tower into a z-sequence entry by entry.

The conversion keeps its remainder symbolic: a list of records
(scalar, x-exponent, atoms), where each atom is an opaque value-0 factor
with a closed-form residue (the root cofactors B_i, their inverses, and
the cofactor tails S_{i,j}) or a single z variable.  Commutation
corrections add at least 1 to a record's value, which puts them above
every emission and above the terminal, so they are dropped at birth.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .coeff import Rat, format_rat, nth_root
from .descriptor import (
    GroupKind,
    OmegaDescriptor,
    alpha_sign,
    basis_slot,
    group_kind,
    omega_element,
)
from .errors import (
    ConversionInternalError,
    DepthExceeded,
    NotExtendable,
    SignChoiceForbidden,
    SignChoiceRequired,
)
from .evaluate import eval_element
from .series import (
    OrePoly,
    PuiseuxSeries,
    ZSequence,
    ZTerminal,
    embed,
    ore_mul,
    z_eval,
)
from .valuegroup import ValueGroupElement, cmp as value_cmp
from .weyl import WeylElement


# -- extendability ------------------------------------------------------------------


@dataclass(frozen=True)
class ExtendViolation:
    """Which of the two extension conditions failed, and where."""

    condition: int
    indices: Tuple[int, ...]
    detail: str

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "indices": list(self.indices),
            "detail": self.detail,
        }


def _prefix_window(desc: OmegaDescriptor) -> int:
    if desc.rule is not None:
        return desc.rule.window
    return len(desc.explicit_steps)


def check_extendable(desc: OmegaDescriptor) -> Optional[ExtendViolation]:
    """None when both extension conditions hold over the step prefix.

    Condition 1: every even-n step has a positive beta (so the real root
    exists).  Condition 2: for h_i < h_j <= h_l the alpha signs alpha(i,j)
    and alpha(i,l) agree; index 0 is the x slot with h = 0.
    """
    window = _prefix_window(desc)
    for i in range(1, window + 1):
        step = desc.step(i)
        if step.n % 2 == 0 and step.beta < 0:
            return ExtendViolation(
                1, (i,), f"step {i} has even n={step.n} with beta<0"
            )
    h = {i: desc.h(i) for i in range(0, window + 1)}
    for i in range(0, window + 1):
        linked = [j for j in range(1, window + 1) if h[i] < h[j]]
        for a in range(len(linked)):
            for b in range(a + 1, len(linked)):
                j, l = linked[a], linked[b]
                if h[j] > h[l]:
                    j, l = l, j
                if alpha_sign(desc, i, j) * alpha_sign(desc, i, l) < 0:
                    return ExtendViolation(
                        2,
                        (i, j, l),
                        f"alpha({i},{j}) and alpha({i},{l}) have opposite signs",
                    )
    return None


# -- gamma resolution ----------------------------------------------------------------


@dataclass(frozen=True)
class GammaResolution:
    """Real roots gamma_i with gamma_i^{n_i} = beta_i, signs pinned by alpha."""

    gammas: Tuple[Rat, ...]
    free_choice_index: Optional[int]
    chosen_sign: Optional[int]

    def gamma(self, i: int) -> Rat:
        return self.gammas[i - 1]

    def to_json(self) -> dict:
        out: dict = {"gammas": [format_rat(g) for g in self.gammas]}
        if self.free_choice_index is not None:
            out["free_choice_index"] = self.free_choice_index
            out["chosen_sign"] = self.chosen_sign
        return out


def _linked_sign(desc: OmegaDescriptor, i: int, window: int) -> Optional[int]:
    """Sign of gamma_i propagated from any deeper step with larger h."""
    hi = desc.h(i)
    for j in range(i + 1, window + 1):
        if not desc.has_step(j):
            break
        if desc.h(j) > hi:
            return alpha_sign(desc, i, j)
    return None


def gamma_tilde(
    desc: OmegaDescriptor,
    i: int,
    free_index: Optional[int],
    chosen_sign: Optional[int],
) -> Rat:
    """One resolved root; callers beyond the resolved prefix use this directly."""
    step = desc.step(i)
    if step.n % 2 == 1:
        return nth_root(step.beta, step.n)
    root = nth_root(step.beta, step.n)
    if free_index is not None and i == free_index:
        assert chosen_sign in (1, -1)
        return chosen_sign * root
    window = max(_prefix_window(desc), i + 1)
    sign = _linked_sign(desc, i, window)
    if sign is None:
        raise ConversionInternalError(
            f"no deeper step pins the sign of gamma_{i}"
        )
    return sign * root


def resolve_gammas(
    desc: OmegaDescriptor, sign_choice: Optional[int] = None
) -> GammaResolution:
    """All gamma-tilde over the prefix; the free sign only where the value
    group admits one (non-2-divisible with a deepest even step)."""
    violation = check_extendable(desc)
    if violation is not None:
        raise NotExtendable(f"extension condition {violation.condition} fails: {violation.detail}")
    slot = basis_slot(desc)
    free_index: Optional[int] = None
    if group_kind(desc) != GroupKind.TWO_DIVISIBLE and slot is not None:
        height, b = slot
        if height >= 1:
            free_index = b
    if free_index is None:
        if sign_choice is not None:
            raise SignChoiceForbidden("this descriptor leaves no free sign")
    else:
        if sign_choice is None:
            raise SignChoiceRequired(
                f"a sign choice is required at step {free_index}"
            )
        if sign_choice not in (1, -1):
            raise SignChoiceRequired("sign choice must be +1 or -1")
    count = _prefix_window(desc)
    gammas = tuple(
        gamma_tilde(desc, i, free_index, sign_choice) for i in range(1, count + 1)
    )
    return GammaResolution(gammas, free_index, sign_choice if free_index else None)


# -- cofactor machinery ---------------------------------------------------------------


@lru_cache(maxsize=None)
def tail_count(n: int, k: int, j: int) -> int:
    """Coefficient table of the cofactor tails: prefix sums of the previous row.

    tail_count(n, k, 1) = k; tail_count(n, k, j+1) = sum of the first k
    entries of row j.  Row j has n - j entries; the prefix one past the
    end (k = n - j + 1) is accepted and equals the full row-(j-1) total,
    which is the residue multiplier of the depth-(j-1) tail.
    """
    assert 1 <= j <= n and 1 <= k <= n - j + 1
    if j == 1:
        return k
    return sum(tail_count(n, l, j - 1) for l in range(1, k + 1))


def _base_ore(desc: OmegaDescriptor, i: int) -> OrePoly:
    """b_i = x^{m_i/n_i} omega_{i-1} as an Ore polynomial."""
    step = desc.step(i)
    factor = PuiseuxSeries.x_power(Rat(step.m, step.n))
    return embed(omega_element(desc, i - 1)).scale_series(factor)


def _ore_pow(f: OrePoly, n: int) -> OrePoly:
    out = OrePoly.from_series(PuiseuxSeries.scalar(Rat(1)))
    for _ in range(n):
        out = ore_mul(out, f)
    return out


def root_cofactor(desc: OmegaDescriptor, res: GammaResolution, i: int) -> OrePoly:
    """B_i = sum_{j=1..n} b_i^{n-j} gamma^{j-1}, the cofactor with
    (b_i - gamma) B_i = b_i^n - beta_i."""
    step = desc.step(i)
    b = _base_ore(desc, i)
    g = res.gamma(i)
    out = OrePoly.zero()
    for j in range(1, step.n + 1):
        out = out.add(_ore_pow(b, step.n - j).scale_series(
            PuiseuxSeries.scalar(g ** (j - 1))
        ))
    return out


def cofactor_tail(
    desc: OmegaDescriptor, res: GammaResolution, i: int, j: int
) -> OrePoly:
    """S_{i,j} with (b_i - gamma) S_{i,j+1} = S_{i,j} - residue(S_{i,j})."""
    step = desc.step(i)
    assert 1 <= j <= step.n - 1
    b = _base_ore(desc, i)
    g = res.gamma(i)
    out = OrePoly.zero()
    for k in range(1, step.n - j + 1):
        coeff = Rat(tail_count(step.n, k, j)) * g ** (k - 1)
        out = out.add(_ore_pow(b, step.n - j - k).scale_series(
            PuiseuxSeries.scalar(coeff)
        ))
    return out


def root_cofactor_residue(desc: OmegaDescriptor, res: GammaResolution, i: int) -> Rat:
    step = desc.step(i)
    return step.n * res.gamma(i) ** (step.n - 1)


def cofactor_tail_residue(
    desc: OmegaDescriptor, res: GammaResolution, i: int, j: int
) -> Rat:
    step = desc.step(i)
    total = tail_count(step.n, step.n - j, j + 1)
    return total * res.gamma(i) ** (step.n - j - 1)


# -- the conversion state machine -----------------------------------------------------


@dataclass(frozen=True)
class _Atom:
    kind: str  # "z" | "B" | "Binv" | "S"
    i: int
    j: int = 0


@dataclass(frozen=True)
class _Record:
    scalar: Rat
    xexp: Rat
    atoms: Tuple[_Atom, ...]

    def z_pos(self) -> Optional[int]:
        for p, a in enumerate(self.atoms):
            if a.kind == "z":
                return p
        return None


class _Conversion:
    def __init__(self, desc: OmegaDescriptor, res: GammaResolution, depth: int):
        self.desc = desc
        self.res = res
        self.depth = depth
        self.entries: List[Tuple[Rat, Rat]] = []
        self.k = 0
        self.sigma = Rat(0)  # sum of m_i/n_i over closed steps
        self.bbar = Rat(1)   # product of root-cofactor residues
        self.C: List[_Record] = []
        self.devs: Dict[int, List[_Record]] = {}

    # -- gamma access --------------------------------------------------------

    def _gamma(self, i: int) -> Rat:
        if i <= len(self.res.gammas):
            return self.res.gamma(i)
        return gamma_tilde(
            self.desc, i, self.res.free_choice_index, self.res.chosen_sign
        )

    # -- atom data -----------------------------------------------------------

    def _atom_residue(self, a: _Atom) -> Rat:
        if a.kind == "B":
            return root_cofactor_residue(self.desc, self.res, a.i)
        if a.kind == "Binv":
            return 1 / root_cofactor_residue(self.desc, self.res, a.i)
        if a.kind == "S":
            return cofactor_tail_residue(self.desc, self.res, a.i, a.j)
        raise AssertionError(f"no scalar residue for atom {a}")

    def _residue(self, rec: _Record) -> Rat:
        assert rec.z_pos() is None
        out = rec.scalar
        for a in rec.atoms:
            out *= self._atom_residue(a)
        return out

    # -- record algebra --------------------------------------------------------

    def _b_atoms(self, upto: int) -> Tuple[_Atom, ...]:
        return tuple(
            _Atom("B", i) for i in range(1, upto + 1) if self.desc.step(i).n >= 2
        )

    def _s_atom(self, i: int, j: int) -> Tuple[Tuple[_Atom, ...], Rat]:
        """S_{i,j} as (atoms, scalar): degree-0 tails fold to their constant."""
        n = self.desc.step(i).n
        assert 1 <= j <= n - 1
        if j == n - 1:
            coeff = Rat(tail_count(n, 1, j)) * self._gamma(i) ** 0
            return (), coeff
        return (_Atom("S", i, j),), Rat(1)

    def _atom_dev(self, a: _Atom) -> List[_Record]:
        """atom - residue(atom), as records (uses the live deviation store)."""
        if a.kind == "B":
            tail_atoms, tail_scalar = self._s_atom(a.i, 1)
            return [
                _Record(d.scalar * tail_scalar, d.xexp, d.atoms + tail_atoms)
                for d in self.devs[a.i]
            ]
        if a.kind == "S":
            n = self.desc.step(a.i).n
            if a.j + 1 > n - 1:
                return []
            tail_atoms, tail_scalar = self._s_atom(a.i, a.j + 1)
            return [
                _Record(d.scalar * tail_scalar, d.xexp, d.atoms + tail_atoms)
                for d in self.devs[a.i]
            ]
        if a.kind == "Binv":
            bbar = root_cofactor_residue(self.desc, self.res, a.i)
            out = []
            for d in self._atom_dev(_Atom("B", a.i)):
                out.append(
                    _Record(
                        -d.scalar / bbar, d.xexp, (_Atom("Binv", a.i),) + d.atoms
                    )
                )
            return out
        raise AssertionError(f"no deviation for atom {a}")

    def _telescope(self, rec: _Record) -> List[_Record]:
        """rec minus its residue part: replace each atom in turn by its
        deviation, folding the residues of the atoms after it."""
        assert rec.z_pos() is None
        out: List[_Record] = []
        for p, a in enumerate(rec.atoms):
            suffix = Rat(1)
            for b in rec.atoms[p + 1 :]:
                suffix *= self._atom_residue(b)
            for d in self._atom_dev(a):
                out.append(
                    _Record(
                        rec.scalar * d.scalar * suffix,
                        rec.xexp + d.xexp,
                        rec.atoms[:p] + d.atoms,
                    )
                )
        return out

    # -- maintenance -----------------------------------------------------------

    def _substitute(self, r: Rat, gamma: Rat) -> None:
        """z_l = gamma x^{-r} + z_{l+1} in every stored record."""

        def walk(records: List[_Record]) -> List[_Record]:
            out: List[_Record] = []
            for rec in records:
                p = rec.z_pos()
                if p is None:
                    out.append(rec)
                    continue
                z = rec.atoms[p]
                out.append(
                    _Record(
                        rec.scalar * gamma,
                        rec.xexp - r,
                        rec.atoms[:p] + rec.atoms[p + 1 :],
                    )
                )
                out.append(
                    _Record(
                        rec.scalar,
                        rec.xexp,
                        rec.atoms[:p] + (_Atom("z", z.i + 1),) + rec.atoms[p + 1 :],
                    )
                )
            return out

        self.C = walk(self.C)
        for i in list(self.devs):
            self.devs[i] = walk(self.devs[i])

    def _prune(self) -> None:
        last_r = self.entries[-1][0] if self.entries else None

        def keep(rec: _Record) -> bool:
            if rec.scalar == 0:
                return False
            if rec.z_pos() is None:
                return -rec.xexp + self.sigma < 1
            if last_r is None:
                return True
            return -rec.xexp + self.sigma + last_r < 1

        self.C = [r for r in self.C if keep(r)]
        for i in list(self.devs):
            self.devs[i] = [r for r in self.devs[i] if keep(r)]

    # -- case machinery ----------------------------------------------------------

    def _heads(self) -> Tuple[Optional[Rat], List[_Record]]:
        """Minimal value among exact records, with the records attaining it."""
        best: Optional[Rat] = None
        group: List[_Record] = []
        for rec in self.C:
            if rec.z_pos() is not None:
                assert rec.xexp < self.sigma
                continue
            value = -rec.xexp
            if best is None or value < best:
                best, group = value, [rec]
            elif value == best:
                group.append(rec)
        return best, group

    def _omega_value(self):
        try:
            return self.desc.generator_value(self.k)
        except DepthExceeded:
            return None

    def _emit(self, r: Rat, gamma: Rat) -> None:
        assert gamma != 0
        assert r < 1
        if self.entries:
            assert r > self.entries[-1][0]
        self.entries.append((r, gamma))
        self._substitute(r, gamma)

    def _rewrite(self, consumed: List[_Record], emitted: bool) -> None:
        """Close step k+1: build omega_{k+1} from omega_k's decomposition."""
        step = self.desc.step(self.k + 1)
        mn = Rat(step.m, step.n)
        g = self._gamma(self.k + 1)
        consumed_ids = {id(rec) for rec in consumed}
        rest = [rec for rec in self.C if id(rec) not in consumed_ids]

        new_parts: List[_Record] = []
        if emitted:
            gamma_emitted = self.entries[-1][1]
            # gamma * (prod B_i - prod of their residues), telescoped
            b_indices = [
                i for i in range(1, self.k + 1) if self.desc.step(i).n >= 2
            ]
            for pos, j in enumerate(b_indices):
                prefix = tuple(_Atom("B", i) for i in b_indices[:pos])
                suffix = Rat(1)
                for i in b_indices[pos + 1 :]:
                    suffix *= root_cofactor_residue(self.desc, self.res, i)
                for d in self._atom_dev(_Atom("B", j)):
                    new_parts.append(
                        _Record(
                            gamma_emitted * d.scalar * suffix,
                            d.xexp,
                            prefix + d.atoms,
                        )
                    )
        for rec in consumed:
            new_parts.extend(
                _Record(t.scalar, t.xexp + mn, t.atoms)
                for t in self._telescope(rec)
            )
        shifted_rest = [_Record(r.scalar, r.xexp + mn, r.atoms) for r in rest]

        z_index = len(self.entries)
        primary = _Record(
            Rat(1), self.sigma + mn, (_Atom("z", z_index),) + self._b_atoms(self.k)
        )
        dev_new = [primary] + new_parts + shifted_rest
        self.devs[self.k + 1] = dev_new

        b_new: Tuple[_Atom, ...] = (_Atom("B", self.k + 1),) if step.n >= 2 else ()
        self.C = [
            _Record(r.scalar, r.xexp, r.atoms + b_new)
            for r in new_parts + shifted_rest
        ]
        self.sigma += mn
        self.bbar *= step.n * g ** (step.n - 1)
        self.k += 1

    def run(self) -> ZSequence:
        max_iter = 8 * (self.depth + _prefix_window(self.desc) + 4)
        for _ in range(max_iter):
            self._prune()
            head_val, heads = self._heads()
            w = self._omega_value()
            terminal_here = (
                self.desc.terminal is not None
                and self.k == self.desc.terminal_index
            )
            if w is None and head_val is None:
                return ZSequence(self.entries, None)
            w_below = w is not None and (
                head_val is None
                or value_cmp(w, ValueGroupElement.rational(head_val)) < 0
            )
            if w_below:
                if terminal_here:
                    assert isinstance(w, ValueGroupElement)
                    total = w.add(ValueGroupElement.rational(self.sigma))
                    return ZSequence(self.entries, ZTerminal(total))
                if len(self.entries) >= self.depth:
                    return ZSequence(self.entries, None)
                gamma = self._gamma(self.k + 1) / self.bbar
                self._emit(w.q + self.sigma, gamma)
                self._rewrite([], emitted=True)
                continue
            head_above = w is None or (
                head_val is not None
                and value_cmp(ValueGroupElement.rational(head_val), w) < 0
            )
            if head_above:
                if len(self.entries) >= self.depth:
                    return ZSequence(self.entries, None)
                res_head = sum(
                    (self._residue(h) for h in heads), start=Rat(0)
                )
                if res_head == 0:
                    raise ConversionInternalError(
                        "remainder heads cancel exactly; a deeper expansion "
                        "order would be needed"
                    )
                assert head_val is not None
                r = head_val + self.sigma
                gamma = -res_head / self.bbar
                self._emit(r, gamma)
                folded = _Record(gamma, self.sigma - r, self._b_atoms(self.k))
                consumed_ids = {id(h) for h in heads}
                keep = [rec for rec in self.C if id(rec) not in consumed_ids]
                replaced: List[_Record] = []
                for rec in heads + [folded]:
                    replaced.extend(self._telescope(rec))
                self.C = keep + replaced
                continue
            # equal values: only rational omega values can tie with records
            assert not terminal_here
            assert isinstance(w, ValueGroupElement) and w.is_rational()
            res_head = sum((self._residue(h) for h in heads), start=Rat(0))
            gamma_num = self._gamma(self.k + 1) - res_head
            if gamma_num == 0:
                self._rewrite(heads, emitted=False)
                continue
            if len(self.entries) >= self.depth:
                return ZSequence(self.entries, None)
            self._emit(w.q + self.sigma, gamma_num / self.bbar)
            self._rewrite(heads, emitted=True)
        raise DepthExceeded(
            f"conversion did not settle within {max_iter} iterations",
            consulted=self.k,
        )


def omega_to_z(
    desc: OmegaDescriptor, res: GammaResolution, depth: int
) -> ZSequence:
    """Convert the omega tower to its z-sequence, emitting up to `depth`
    entries; rank-two descriptors finish with the irrational terminal."""
    if depth == 0 and desc.terminal is None:
        return ZSequence([], None)
    return _Conversion(desc, res, depth).run()


# -- round trip ------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundtripReport:
    trials: int
    mismatches: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "mismatches": list(self.mismatches),
            "ok": self.ok,
        }


def roundtrip_check(
    desc: OmegaDescriptor,
    res: GammaResolution,
    samples: Sequence[WeylElement],
    depth: int = 16,
    depth_limit: int = 64,
) -> RoundtripReport:
    """z_eval after embedding must match eval on the Weyl algebra."""
    zseq = omega_to_z(desc, res, depth)
    mismatches: List[str] = []
    for element in samples:
        direct = eval_element(desc, element, depth_limit)
        via_z = z_eval(zseq, embed(element), depth_limit)
        if value_cmp(direct, via_z) != 0:
            mismatches.append(f"{element}: {direct} vs {via_z}")
    return RoundtripReport(len(samples), tuple(mismatches))

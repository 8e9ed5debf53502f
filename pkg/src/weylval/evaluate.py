"""Valuation evaluation on Weyl elements, plus the commutative shadow oracle.

The main path works on pools of terms coeff * word, where a word is a product
of generator powers x^k, w_i^k and formal sum-inverse blocks.  Levels are
processed in increasing value order; a level is certified as v(F) as soon as
the relative residues of its terms do not cancel, otherwise every term is
rewritten exactly into terms of strictly larger value.

The shadow path re-evaluates the same data on commutative Laurent monomials
and shares nothing with the main path except the kernel residue map rho.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .coeff import Rat, nth_root, sgn, two_adic_valuation
from .descriptor import OmegaDescriptor, alpha, omega_element, pair_data
from .errors import DepthExceeded, NonzeroValue
from .valuegroup import INFINITY, Value, ValueGroupElement, cmp as value_cmp
from .weyl import WeylElement, WeylFraction, commutator

# A factor is ("x", k), ("w", i, k) with w_0 = y, or ("si", q_word, n, rho):
# the formal inverse of sum_{j<n} Q^{n-1-j} rho^j for a pure value-0 word Q
# with residue rho (the block has value 0 and residue 1/(n rho^{n-1})).
Factor = tuple
Word = Tuple[Factor, ...]
Emission = Tuple[Rat, Word]


def _x(k: int) -> Factor:
    return ("x", k)


def _w(i: int, k: int) -> Factor:
    return ("w", i, k)


def _gen_order(f: Factor) -> int:
    # canonical generator order: x before w_0 before w_1 ...
    return -1 if f[0] == "x" else f[1]


def _same_generator(f: Factor, g: Factor) -> bool:
    if f[0] not in ("x", "w") or g[0] not in ("x", "w"):
        return False
    return _gen_order(f) == _gen_order(g)


def _merged(f: Factor, g: Factor) -> Optional[Factor]:
    k = f[-1] + g[-1]
    if k == 0:
        return None
    return f[:-1] + (k,)


def _concat(*parts: Iterable[Factor]) -> Word:
    """Concatenate factor sequences, collapsing adjacent same-generator powers."""
    out: List[Factor] = []
    for part in parts:
        for f in part:
            if f[0] in ("x", "w") and f[-1] == 0:
                continue
            if out and _same_generator(out[-1], f):
                m = _merged(out.pop(), f)
                if m is not None:
                    out.append(m)
            else:
                out.append(f)
    # collapsing may create new adjacencies around removed factors
    changed = True
    while changed:
        changed = False
        for p in range(len(out) - 1):
            if _same_generator(out[p], out[p + 1]):
                m = _merged(out[p], out[p + 1])
                out[p : p + 2] = [m] if m is not None else []
                changed = True
                break
    return tuple(out)


def _invert_pure(word: Word) -> Word:
    assert all(f[0] != "si" for f in word)
    return tuple(f[:-1] + (-f[-1],) for f in reversed(word))


def _word_exponents(word: Word) -> Dict[int, int]:
    """Net exponents keyed by step slot: 0 is x, slot s >= 1 is w_{s-1}."""
    out: Dict[int, int] = {}
    for f in word:
        if f[0] == "x":
            out[0] = out.get(0, 0) + f[1]
        elif f[0] == "w":
            out[f[1] + 1] = out.get(f[1] + 1, 0) + f[2]
    return {s: k for s, k in out.items() if k}


class _Ctx:
    """Descriptor access with a depth limit and small caches."""

    def __init__(self, desc: OmegaDescriptor, depth_limit: int):
        self.desc = desc
        self.depth_limit = depth_limit
        self._values: Dict[int, ValueGroupElement] = {}
        self._commutators: Dict[tuple, Tuple[Emission, ...]] = {}
        self._word_values: Dict[Word, ValueGroupElement] = {}
        self._sorted: Dict[Word, Tuple[Word, Tuple[Emission, ...]]] = {}
        self._def_content: Dict[Factor, Tuple[Emission, ...]] = {}
        self._def_values: Dict[Factor, ValueGroupElement] = {}
        self._tower: Dict[int, WeylElement] = {}

    def check(self, step_index: int) -> None:
        if step_index > self.depth_limit:
            raise DepthExceeded(
                f"depth limit {self.depth_limit} exceeded at step {step_index}",
                consulted=step_index,
            )

    def step(self, i: int):
        self.check(i)
        return self.desc.step(i)

    def pair_mn(self, s: int) -> Tuple[int, int]:
        if s > 0:
            self.check(s)
        return self.desc.pair_mn(s)

    def beta(self, s: int) -> Rat:
        if s > 0:
            self.check(s)
        return self.desc.beta(s)

    def gen_value(self, i: int) -> ValueGroupElement:
        if i not in self._values:
            if i >= 0:
                if self.desc.terminal_index == i:
                    self.check(i)
                else:
                    self.check(i + 1)
            self._values[i] = self.desc.generator_value(i)
        return self._values[i]

    def word_value(self, word: Word) -> ValueGroupElement:
        if word not in self._word_values:
            total = ValueGroupElement.rational(0)
            for f in word:
                if f[0] == "x":
                    total = total.add(ValueGroupElement.rational(-f[1]))
                elif f[0] == "w":
                    total = total.add(self.gen_value(f[1]).scalar_mul(f[2]))
                elif f[0] in ("cw", "cs"):
                    total = total.add(_def_value(self, f))
            self._word_values[word] = total
        return self._word_values[word]


# -- kernel residue map rho -----------------------------------------------------


def _signed_root(target: Rat, k: int) -> Rat:
    # unique real k-th root for odd k (k may be negative)
    if k < 0:
        target, k = 1 / target, -k
    return nth_root(target, k)


def _rho(ctx: _Ctx, vec: Dict[int, int]) -> Rat:
    """Residue of the zero-value monomial with exponent vector `vec`.

    Defined on kernel vectors of the value pairing; reduces the support one
    slot at a time through residue units alpha, extracting odd roots.
    """
    vec = {s: k for s, k in vec.items() if k}
    if not vec:
        return Rat(1)
    supp = sorted(vec)
    if len(supp) == 1:
        b = supp[0]
        m_b, n_b = ctx.pair_mn(b)
        if b == 0 or m_b != 0:
            raise AssertionError("exponent vector is not a kernel vector")
        # gcd(|m|, n) = 1 forces n_b = 1 here, so w_{b-1} itself has residue beta_b
        return ctx.beta(b) ** vec[b]
    if len(supp) == 2 and supp[0] == 0:
        b = supp[1]
        m_b, n_b = ctx.pair_mn(b)
        t, r = divmod(vec[b], n_b)
        if r or vec[0] != t * m_b:
            raise AssertionError("exponent vector is not a kernel vector")
        return ctx.beta(b) ** t
    a, b = supp[0], supp[1]
    data = pair_data(ctx.desc, a, b)
    if data.k_ij % 2 == 0:
        a, b = b, a
        data = pair_data(ctx.desc, a, b)
    assert data.k_ij % 2 == 1  # one orientation always has an odd crossing count
    k_a = vec.get(a, 0)
    reduced = {s: k * data.k_ij for s, k in vec.items()}
    reduced[a] = 0
    reduced[b] = vec.get(b, 0) * data.k_ij + k_a * data.k_ji
    target = alpha(ctx.desc, a, b) ** k_a * _rho(ctx, reduced)
    return _signed_root(target, data.k_ij)


def _si_sigma(si: Factor) -> Rat:
    _, _, n, rho_q = si
    return 1 / (n * rho_q ** (n - 1))


def _word_residue(ctx: _Ctx, word: Word) -> Rat:
    """Residue of a value-0 word: rho of its exponents times block residues."""
    out = _rho(ctx, _word_exponents(word))
    for f in word:
        if f[0] == "si":
            out *= _si_sigma(f)
    return out


# -- commutators of generator powers --------------------------------------------


def _factor_commutator(ctx: _Ctx, f: Factor, g: Factor) -> Tuple[Emission, ...]:
    """[f, g] = f g - g f as emissions; every word has value > v(f) + v(g)."""
    key = (f, g)
    if key in ctx._commutators:
        return ctx._commutators[key]
    out = tuple(_factor_commutator_raw(ctx, f, g))
    ctx._commutators[key] = out
    return out


def _negated(emissions: Iterable[Emission]) -> List[Emission]:
    return [(-c, w) for c, w in emissions]


def _factor_commutator_raw(ctx: _Ctx, f: Factor, g: Factor) -> List[Emission]:
    if f[0] == "si" or g[0] == "si":
        raise AssertionError("sum-inverse blocks have their own commutator path")
    if f[0] == "x" and g[0] == "x":
        return []
    if f[0] == "x":
        return _negated(_factor_commutator(ctx, g, f))
    if g[0] == "w" and f[1] == g[1]:
        return []
    if g[0] == "w" and f[1] > g[1]:
        return _negated(_factor_commutator(ctx, g, f))
    # now f = w_i^k; g is x^a or w_j^l with i < j
    i, k = f[1], f[2]
    if k != 1:
        return _left_power_commutator(ctx, ("w", i, 1), k, g)
    if g[0] == "x":
        return _base_wx(ctx, i, g[1])
    j, l = g[1], g[2]
    if l != 1:
        return _right_power_commutator(ctx, f, ("w", j, 1), l)
    return _base_ww(ctx, i, j)


def _left_power_commutator(
    ctx: _Ctx, base: Factor, k: int, g: Factor
) -> List[Emission]:
    # [A^k, g] from [A, g]: k > 0 spreads over positions, k < 0 conjugates
    if k < 0:
        inner = _factor_commutator(ctx, base[:-1] + (-k,), g)
        wrap = (base[:-1] + (k,),)
        return [(-c, _concat(wrap, u, wrap)) for c, u in inner]
    inner = _factor_commutator(ctx, base, g)
    out: List[Emission] = []
    for ell in range(1, k + 1):
        left = (base[:-1] + (k - ell,),) if k - ell else ()
        right = (base[:-1] + (ell - 1,),) if ell - 1 else ()
        for c, u in inner:
            out.append((c, _concat(left, u, right)))
    return out


def _right_power_commutator(
    ctx: _Ctx, f: Factor, base: Factor, l: int
) -> List[Emission]:
    # [f, B^l] from [f, B]
    if l < 0:
        inner = _factor_commutator(ctx, f, base[:-1] + (-l,))
        wrap = (base[:-1] + (l,),)
        return [(-c, _concat(wrap, u, wrap)) for c, u in inner]
    inner = _factor_commutator(ctx, f, base)
    out: List[Emission] = []
    for ell in range(1, l + 1):
        left = (base[:-1] + (ell - 1,),) if ell - 1 else ()
        right = (base[:-1] + (l - ell,),) if l - ell else ()
        for c, u in inner:
            out.append((c, _concat(left, u, right)))
    return out


def _base_wx(ctx: _Ctx, i: int, a: int) -> List[Emission]:
    # [w_i, x^a]; the base of the tower is [y, x^a] = a x^{a-1}
    if a == 0:
        return []
    if i == 0:
        return [(Rat(a), _concat((_x(a - 1),)))]
    step = ctx.step(i)
    inner = _base_wx(ctx, i - 1, a)
    out: List[Emission] = []
    for ell in range(1, step.n + 1):
        left = (_x(step.m), _w(i - 1, step.n - ell)) if step.n - ell else (_x(step.m),)
        right = (_w(i - 1, ell - 1),) if ell - 1 else ()
        for c, u in inner:
            out.append((c, _concat(left, u, right)))
    return out


def _base_ww(ctx: _Ctx, i: int, j: int) -> List[Emission]:
    # [w_i, w_j] for i < j, unfolding w_j = x^{m_j} w_{j-1}^{n_j} - beta_j
    step = ctx.step(j)
    out: List[Emission] = []
    for c, u in _factor_commutator(ctx, _w(i, 1), _x(step.m)):
        out.append((c, _concat(u, (_w(j - 1, step.n),))))
    for c, u in _factor_commutator(ctx, _w(i, 1), _w(j - 1, step.n)):
        out.append((c, _concat((_x(step.m),), u)))
    return out


# -- exact expansions ------------------------------------------------------------


def _expand_unit(ctx: _Ctx, word: Word) -> List[Emission]:
    """Emissions of (word - 1) for a pure word with all net exponents zero.

    Sorts the word into canonical generator order; each out-of-order swap
    materializes one commutator, whose value strictly exceeds 0.
    """
    out: List[Emission] = []
    items = list(word)
    while True:
        # collapse adjacent same-generator powers first: it is free and exact
        p = 0
        while p < len(items) - 1:
            if _same_generator(items[p], items[p + 1]):
                m = _merged(items[p], items[p + 1])
                items[p : p + 2] = [m] if m is not None else []
                p = max(p - 1, 0)
            else:
                p += 1
        swap_at = None
        for p in range(len(items) - 1):
            if _gen_order(items[p]) > _gen_order(items[p + 1]):
                swap_at = p
                break
        if swap_at is None:
            break
        f, g = items[swap_at], items[swap_at + 1]
        prefix, suffix = tuple(items[:swap_at]), tuple(items[swap_at + 2 :])
        out.append((Rat(1), prefix + (_deferred(f, g),) + suffix))
        items[swap_at], items[swap_at + 1] = g, f
    assert not items, "zero-exponent word must sort and cancel to 1"
    return out


def _expand_pure(ctx: _Ctx, word: Word) -> List[Emission]:
    """Emissions of (word - residue(word)) for a pure value-0 word.

    If the exponent vector is outside the unit-product lattice, pass to the
    N-th power against a sum-inverse block; inside it, strip one unit product
    a_s = x^{m_s} w_{s-1}^{n_s} at a time and finish with the unit sort.
    """
    exps = _word_exponents(word)
    n_fold = 1
    for s, k in exps.items():
        if s == 0:
            continue
        n_s = ctx.pair_mn(s)[1]
        n_fold = math.lcm(n_fold, n_s // math.gcd(abs(k), n_s))
    if n_fold > 1:
        rho_p = _rho(ctx, exps)
        si = ("si", word, n_fold, rho_p)
        powered = _concat(*([word] * n_fold))
        return [(c, _concat(u, (si,))) for c, u in _expand_pure(ctx, powered)]
    out: List[Emission] = []
    scalar = Rat(1)
    main = word
    for s in sorted(s for s in exps if s != 0):
        step = ctx.step(s)
        d_s = exps[s] // step.n
        for _ in range(abs(d_s)):
            if d_s > 0:
                out.append(
                    (
                        scalar,
                        _concat(
                            main, (_w(s - 1, -step.n), _x(-step.m), _w(s, 1))
                        ),
                    )
                )
                main = _concat(main, (_w(s - 1, -step.n), _x(-step.m)))
                scalar *= step.beta
            else:
                out.append((-scalar / step.beta, _concat(main, (_w(s, 1),))))
                main = _concat(main, (_x(step.m), _w(s - 1, step.n)))
                scalar /= step.beta
    for c, u in _expand_unit(ctx, main):
        out.append((scalar * c, u))
    return out


def _expand_si(ctx: _Ctx, si: Factor) -> List[Emission]:
    """Emissions of (block - residue(block)) for a sum-inverse block."""
    _, q_word, n, rho_q = si
    sigma = _si_sigma(si)
    pure = _expand_pure(ctx, q_word)
    out: List[Emission] = []
    for p in range(n - 1):
        mid = _concat(*([q_word] * (n - 2 - p)))
        weight = -(p + 1) * rho_q**p * sigma
        for c, u in pure:
            out.append((weight * c, _concat((si,), mid, u)))
    return out


def _si_commutator(ctx: _Ctx, si: Factor, f: Factor) -> List[Emission]:
    # [block, f] = -block [S, f] block where S is the inverted sum
    _, q_word, n, rho_q = si
    out: List[Emission] = []
    for j in range(n):
        a = n - 1 - j
        if a == 0:
            continue
        base = []
        for p, qf in enumerate(q_word):
            for c, u in _factor_commutator(ctx, qf, f):
                base.append((c, _concat(q_word[:p], u, q_word[p + 1 :])))
        for b in range(a):
            left = _concat(*([q_word] * (a - 1 - b)))
            right = _concat(*([q_word] * b))
            for c, u in base:
                out.append(
                    (-(rho_q**j) * c, _concat((si,), left, u, right, (si,)))
                )
    return out


def _deferred(f: Factor, g: Factor) -> Factor:
    """Opaque factor standing for the commutator [f, g], expanded lazily.

    Materializing commutator spreads at every reordering swap floods the
    worklist with words far above the level that eventually certifies; a
    deferred factor keeps one pending entry per swap and is only unfolded if
    the level scan actually reaches its value.
    """
    return ("cs" if f[0] == "si" else "cw", f, g)


def _def_content(ctx: _Ctx, f: Factor) -> Tuple[Emission, ...]:
    kind, a, b = f
    if kind == "cs":
        cached = ctx._def_content.get(f)
        if cached is None:
            cached = tuple(_si_commutator(ctx, a, b))
            ctx._def_content[f] = cached
        return cached
    return _factor_commutator(ctx, a, b)


def _def_value(ctx: _Ctx, f: Factor) -> ValueGroupElement:
    cached = ctx._def_values.get(f)
    if cached is None:
        best: Optional[ValueGroupElement] = None
        for _, u in _def_content(ctx, f):
            val = ctx.word_value(u)
            if best is None or val.cmp(best) < 0:
                best = val
        assert best is not None, "deferred commutator has empty content"
        cached = best
        ctx._def_values[f] = cached
    return cached


def _bubble_si_right(ctx: _Ctx, word: Word) -> Tuple[Word, List[Emission]]:
    """Move all sum-inverse blocks to the right; corrections have value > 0."""
    items = list(word)
    corrections: List[Emission] = []
    while True:
        swap_at = None
        for p in range(len(items) - 1):
            if items[p][0] == "si" and items[p + 1][0] != "si":
                swap_at = p
                break
        if swap_at is None:
            break
        si, f = items[swap_at], items[swap_at + 1]
        prefix, suffix = tuple(items[:swap_at]), tuple(items[swap_at + 2 :])
        corrections.append((Rat(1), prefix + (_deferred(si, f),) + suffix))
        items[swap_at], items[swap_at + 1] = f, si
    return tuple(items), corrections


def _sort_word(ctx: _Ctx, word: Word) -> Tuple[Word, Tuple[Emission, ...]]:
    """Sorted form of a word plus the exact corrections the reordering costs.

    The sorted form has the x power first, then tower generators by depth,
    then sum-inverse blocks in encounter order, with adjacent equal
    generators merged and zero powers dropped.  Only the word itself is
    sorted — a finite bubble pass — while every materialized commutator is
    returned unsorted.  Corrections all have value strictly greater than the
    word (full recursive normalization would not terminate for sum-inverse
    blocks, whose normal form is an infinite series of increasing values),
    so callers keep them lazily and sort them only if the worklist ever
    reaches their level.
    """
    cached = ctx._sorted.get(word)
    if cached is not None:
        return cached
    items = [f for f in word if f[0] == "si" or f[-1] != 0]
    corrections: List[Emission] = []
    while True:
        p = 0
        while p < len(items) - 1:
            if _same_generator(items[p], items[p + 1]):
                m = _merged(items[p], items[p + 1])
                items[p : p + 2] = [] if m is None else [m]
                p = max(p - 1, 0)
            else:
                p += 1
        swap_at = None
        for p in range(len(items) - 1):
            f, g = items[p], items[p + 1]
            if f[0] == "si":
                if g[0] != "si":
                    swap_at = p
                    break
                continue
            if g[0] == "si":
                continue
            if _gen_order(f) > _gen_order(g):
                swap_at = p
                break
        if swap_at is None:
            break
        f, g = items[swap_at], items[swap_at + 1]
        prefix, suffix = tuple(items[:swap_at]), tuple(items[swap_at + 2 :])
        corrections.append((Rat(1), prefix + (_deferred(f, g),) + suffix))
        items[swap_at], items[swap_at + 1] = g, f
    result = (tuple(items), tuple(corrections))
    ctx._sorted[word] = result
    return result


def _expand_zero(ctx: _Ctx, word: Word, res: Rat) -> List[Emission]:
    """Exact emissions of (word - res) for a value-0 word; each value > 0."""
    main, out = _bubble_si_right(ctx, word)
    split = len(main)
    while split and main[split - 1][0] == "si":
        split -= 1
    pure, blocks = main[:split], main[split:]
    rho_p = _rho(ctx, _word_exponents(pure))
    sigmas = [_si_sigma(b) for b in blocks]
    assert rho_p * math.prod(sigmas, start=Rat(1)) == res
    for c, u in _expand_pure(ctx, pure):
        out.append((c, _concat(u, blocks)))
    running = rho_p
    for idx, block in enumerate(blocks):
        rest = blocks[idx + 1 :]
        for c, u in _expand_si(ctx, block):
            out.append((running * c, _concat(u, rest)))
        running *= sigmas[idx]
    return out


# -- canonical level representative ---------------------------------------------


def _extgcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0)
    g, s, t = _extgcd(b, a % b)
    return (g, t, s - (a // b) * t)


def _solve_int_combo(coeffs: Sequence[int], target: int) -> List[int]:
    """Deterministic integer vector c with sum c_i coeffs_i = target."""
    combo = [0] * len(coeffs)
    combo[0] = 1
    g = coeffs[0]
    for idx in range(1, len(coeffs)):
        g2, s, t = _extgcd(g, coeffs[idx])
        combo = [s * c for c in combo]
        combo[idx] = t
        g = g2
    assert g != 0 and target % g == 0
    scale = target // g
    return [c * scale for c in combo]


@dataclass(frozen=True)
class CanonicalRef:
    word: Word
    eps_basis: int
    eps_terminal: int


def _canonical_ref(ctx: _Ctx, g: Value) -> CanonicalRef:
    """Canonical generator word with value g, with its two residue parities.

    The parities record whether the representative needs one odd copy of the
    2-torsion basis generator and of the terminal tower element; squares of
    kernel monomials always have positive residue, which makes the choice of
    the even bulk irrelevant for signs.
    """
    desc = ctx.desc
    assert isinstance(g, ValueGroupElement)
    if g.is_zero():
        return CanonicalRef((), 0, 0)
    c_t = 0
    q = g.q
    if g.k_xi:
        term = desc.terminal
        assert term is not None and g.xi_scale == term.value.xi_scale
        c_t, rem = divmod(g.k_xi, term.value.k_xi)
        assert rem == 0
        q = g.q - c_t * term.value.q
    if desc.rule:
        r = max(desc.rule.window, 1)
    else:
        r = len(desc.explicit_steps)
    lcm_n = 1
    for i in range(1, r + 1):
        lcm_n = math.lcm(lcm_n, ctx.step(i).n)
    while lcm_n % q.denominator:
        r += 1
        lcm_n = math.lcm(lcm_n, ctx.step(r).n)
    h_max, b = 0, 0
    for i in range(1, r + 1):
        h_i = desc.h(i)
        if h_i > h_max:
            h_max, b = h_i, i
    eps_b = 0
    if q != 0 and two_adic_valuation(q) == -h_max:
        eps_b = 1
    v_b = Rat(-1) if b == 0 else ctx.step(b).ratio()
    half = (q - eps_b * v_b) / 2
    coeffs = [-lcm_n] + [
        ctx.step(i).m * (lcm_n // ctx.step(i).n) for i in range(1, r + 1)
    ]
    target = half * lcm_n
    assert target.denominator == 1
    combo = _solve_int_combo(coeffs, int(target))
    slots = {i: 2 * c for i, c in enumerate(combo)}
    slots[b] = slots.get(b, 0) + eps_b
    factors: List[Factor] = []
    if slots.get(0):
        factors.append(_x(slots[0]))
    for i in range(1, r + 1):
        if slots.get(i):
            factors.append(_w(i - 1, slots[i]))
    if c_t:
        factors.append(_w(len(desc.explicit_steps), c_t))
    return CanonicalRef(tuple(factors), eps_b, c_t & 1)


# -- the worklist ----------------------------------------------------------------


@dataclass(frozen=True)
class LeadingData:
    """Certified leading behavior of an element.

    value: v(F); lam: residue of F relative to the canonical representative
    (None only when F = 0); ref: the representative word; the parities feed
    the ordering sign computation.
    """

    value: Value
    lam: Optional[Rat]
    ref: Word
    eps_basis: int
    eps_terminal: int


_ZERO_LEADING = LeadingData(INFINITY, None, (), 0, 0)


def _leading(ctx: _Ctx, pool: Dict[Word, Rat]) -> LeadingData:
    """Certify the leading level of a pool of words.

    Two zones keep the scan exact yet lazy: ``canon`` holds sorted words (so
    equal content merges and cancels eagerly) and ``pending`` holds raw words
    not yet sorted.  Sorting happens only for pending words whose value equals
    the level under inspection; reordering corrections above the eventual
    certification level are carried along but never paid for.
    """
    canon: Dict[Word, Rat] = {}
    pending: Dict[Word, Rat] = {}
    for w, c in pool.items():
        if c:
            pending[w] = pending.get(w, Rat(0)) + c
    while True:
        level: Optional[ValueGroupElement] = None
        for zone in (canon, pending):
            for w, c in zone.items():
                if not c:
                    continue
                val = ctx.word_value(w)
                if level is None or val.cmp(level) < 0:
                    level = val
        if level is None:
            return _ZERO_LEADING
        still: Dict[Word, Rat] = {}
        queue: List[Tuple[Word, Rat]] = []
        for w, c in pending.items():
            if not c:
                continue
            if ctx.word_value(w).cmp(level) == 0:
                queue.append((w, c))
            else:
                still[w] = still.get(w, Rat(0)) + c
        while queue:
            w, c = queue.pop()
            spot = next(
                (p for p, f in enumerate(w) if f[0] in ("cw", "cs")), None
            )
            if spot is None:
                sw, corrections = _sort_word(ctx, w)
                canon[sw] = canon.get(sw, Rat(0)) + c
                for cc, cu in corrections:
                    still[cu] = still.get(cu, Rat(0)) + c * cc
                continue
            head, tail = w[:spot], w[spot + 1 :]
            for cc, u in _def_content(ctx, w[spot]):
                nw = _concat(head, u, tail)
                nc = c * cc
                if ctx.word_value(nw).cmp(level) == 0:
                    queue.append((nw, nc))
                else:
                    still[nw] = still.get(nw, Rat(0)) + nc
        pending = still
        group = [
            (w, c)
            for w, c in canon.items()
            if c and ctx.word_value(w).cmp(level) == 0
        ]
        if not group:
            canon = {w: c for w, c in canon.items() if c}
            continue
        ref = _canonical_ref(ctx, level)
        inv_ref = _invert_pure(ref.word)
        members = []
        lam = Rat(0)
        for w, c in group:
            rel = _concat(inv_ref, w)
            res = _word_residue(ctx, rel)
            members.append((w, c, rel, res))
            lam += c * res
        if lam != 0:
            return LeadingData(level, lam, ref.word, ref.eps_basis, ref.eps_terminal)
        for w, c, rel, res in members:
            del canon[w]
            for cc, ww in _expand_zero(ctx, rel, res):
                nw = _concat(ref.word, ww)
                pending[nw] = pending.get(nw, Rat(0)) + c * cc
        canon = {w: c for w, c in canon.items() if c}
        pending = {w: c for w, c in pending.items() if c}


def _tower_weyl(ctx: _Ctx, i: int) -> WeylElement:
    """The i-th tower element as a normal-form Weyl algebra element."""
    cached = ctx._tower.get(i)
    if cached is None:
        ctx.check(i)
        cached = omega_element(ctx.desc, i)
        ctx._tower[i] = cached
    return cached


def _divmod_right(
    dividend: WeylElement, divisor: WeylElement, d: int, lead_x: int
) -> Tuple[WeylElement, WeylElement]:
    """Quotient and remainder with dividend = quotient * divisor + remainder.

    The divisor must have a unique top y-degree term x^lead_x y^d with
    coefficient 1; the remainder has y-degree below d.  Works over Laurent x
    powers, so the division never gets stuck on a non-invertible coefficient.
    """
    quotient = WeylElement.zero()
    rest = dividend
    while rest.terms:
        deg = max(j for (_, j) in rest.terms)
        if deg < d:
            break
        block = WeylElement(
            {
                (i - lead_x, deg - d): c
                for (i, j), c in rest.terms.items()
                if j == deg
            }
        )
        quotient = quotient.add(block)
        rest = rest.sub(block.mul(divisor))
    return quotient, rest


def _digit_pool(ctx: _Ctx, element: WeylElement) -> Dict[Word, Rat]:
    """Expand an element into the tower digit basis.

    Result words have the form x^i w_0^{j_0} ... w_K^{j_K} with every digit
    below the next step's power, obtained by successive division by tower
    elements from the deepest one down.  The division absorbs the bulk
    cancellation between plain monomials algebraically, so the level scan
    afterwards starts from words whose values rarely collide.
    """
    if ctx.desc.rule is None:
        max_index = len(ctx.desc.explicit_steps)
    else:
        max_index = ctx.depth_limit
    pool: Dict[Word, Rat] = {}

    def emit(terms: Dict[Tuple[int, int], Rat], suffix: Word) -> None:
        for (i, j), c in terms.items():
            factors: List[Factor] = []
            if i:
                factors.append(_x(i))
            if j:
                factors.append(_w(0, j))
            word = tuple(factors) + suffix
            acc = pool.get(word, Rat(0)) + c
            if acc:
                pool[word] = acc
            else:
                pool.pop(word, None)

    def rec(part: WeylElement, suffix: Word) -> None:
        if not part.terms:
            return
        deg_y = max(j for (_, j) in part.terms)
        index, d_index = 0, 1
        while index < max_index:
            n_next = abs(ctx.pair_mn(index + 1)[1])
            if d_index * n_next > deg_y:
                break
            index, d_index = index + 1, d_index * n_next
        if index == 0:
            emit(part.terms, suffix)
            return
        divisor = _tower_weyl(ctx, index)
        lead_x = next(i for (i, j) in divisor.terms if j == d_index)
        power = 0
        rest = part
        while rest.terms:
            rest, digit = _divmod_right(rest, divisor, d_index, lead_x)
            if digit.terms:
                head = (_w(index, power),) if power else ()
                rec(digit, head + suffix)
            power += 1

    rec(element, ())
    return pool


def leading_data(
    desc: OmegaDescriptor, element: WeylElement, depth_limit: int = 64
) -> LeadingData:
    """Value, relative residue, and representative parities of an element."""
    ctx = _Ctx(desc, depth_limit)
    return _leading(ctx, _digit_pool(ctx, element))


def eval(desc: OmegaDescriptor, element: WeylElement, depth_limit: int = 64) -> Value:
    """The valuation v(element); Infinity for the zero element."""
    return leading_data(desc, element, depth_limit).value


def residue(desc: OmegaDescriptor, element: WeylElement, depth_limit: int = 64) -> Rat:
    """Residue of a value-0 element; NonzeroValue otherwise."""
    data = leading_data(desc, element, depth_limit)
    if data.value is INFINITY or not data.value.is_zero():
        raise NonzeroValue(f"element has value {data.value}, not 0")
    # the canonical representative of value 0 is the empty word, so lam is
    # already the absolute residue
    assert data.ref == ()
    return data.lam


def eval_fraction(
    desc: OmegaDescriptor, fraction: WeylFraction, depth_limit: int = 64
) -> Value:
    """v(num) - v(den) for a left fraction."""
    num = eval(desc, fraction.num, depth_limit)
    den = eval(desc, fraction.den, depth_limit)
    if num is INFINITY:
        return INFINITY
    assert isinstance(den, ValueGroupElement)
    return num.sub(den)


def residue_fraction(
    desc: OmegaDescriptor, fraction: WeylFraction, depth_limit: int = 64
) -> Rat:
    """Residue of a value-0 fraction as the quotient of relative residues."""
    num = leading_data(desc, fraction.num, depth_limit)
    den = leading_data(desc, fraction.den, depth_limit)
    if num.value is INFINITY or value_cmp(num.value, den.value) != 0:
        raise NonzeroValue("fraction does not have value 0")
    # both sides use the same canonical representative, which cancels
    assert num.ref == den.ref
    return num.lam / den.lam


def monomial_gap_value(
    desc: OmegaDescriptor, exponents: Sequence[int], depth_limit: int = 64
) -> Value:
    """v(word - residue(word)) for the value-0 monomial with given exponents.

    `exponents` lists (x, w_0, ..., w_{r-1}) powers.
    """
    ctx = _Ctx(desc, depth_limit)
    factors: List[Factor] = []
    if exponents and exponents[0]:
        factors.append(_x(exponents[0]))
    for slot, k in enumerate(exponents[1:], start=0):
        if k:
            factors.append(_w(slot, k))
    word = tuple(factors)
    if not ctx.word_value(word).is_zero():
        raise NonzeroValue("monomial must have value 0")
    res = _word_residue(ctx, word)
    pool = {word: Rat(1)}
    pool[()] = pool.get((), Rat(0)) - res
    return _leading(ctx, pool).value


# -- commutative shadow oracle ---------------------------------------------------

# Shadow monomial key: (gens, blocks) where gens is a sorted tuple of
# (slot, exponent) over slot 0 = X, slot s = the commutative stand-in for
# w_{s-1}, and blocks is a sorted tuple of commutative sum-inverse markers
# (gens_of_q, n, rho) with multiplicity.
SKey = Tuple[Tuple[Tuple[int, int], ...], Tuple[Tuple[tuple, int, Rat], ...]]


def _skey(gens: Dict[int, int], blocks: Iterable[tuple] = ()) -> SKey:
    return (
        tuple(sorted((s, k) for s, k in gens.items() if k)),
        tuple(sorted(blocks, key=lambda b: (b[0], b[1]))),
    )


def _sgens(key: SKey) -> Dict[int, int]:
    return dict(key[0])


def _shadow_value(ctx: _Ctx, key: SKey) -> ValueGroupElement:
    total = ValueGroupElement.rational(0)
    for s, k in key[0]:
        if s == 0:
            total = total.add(ValueGroupElement.rational(-k))
        else:
            total = total.add(ctx.gen_value(s - 1).scalar_mul(k))
    return total


def _shadow_residue(ctx: _Ctx, key: SKey) -> Rat:
    out = _rho(ctx, _sgens(key))
    for _, n, rho_q in key[1]:
        out *= 1 / (n * rho_q ** (n - 1))
    return out


def _shadow_mul(key: SKey, gens: Dict[int, int], scale_blocks: Iterable[tuple] = ()) -> SKey:
    merged = _sgens(key)
    for s, k in gens.items():
        merged[s] = merged.get(s, 0) + k
    return _skey(merged, key[1] + tuple(scale_blocks))


def _shadow_expand_pure(ctx: _Ctx, gens: Dict[int, int]) -> List[Tuple[Rat, SKey]]:
    """Commutative emissions of (monomial - residue), all of value > 0."""
    gens = {s: k for s, k in gens.items() if k}
    n_fold = 1
    for s, k in gens.items():
        if s == 0:
            continue
        n_s = ctx.pair_mn(s)[1]
        n_fold = math.lcm(n_fold, n_s // math.gcd(abs(k), n_s))
    if n_fold > 1:
        rho_p = _rho(ctx, gens)
        block = (_skey(gens)[0], n_fold, rho_p)
        powered = {s: k * n_fold for s, k in gens.items()}
        return [
            (c, _skey(_sgens(k2), k2[1] + (block,)))
            for c, k2 in _shadow_expand_pure(ctx, powered)
        ]
    # inside the unit-product lattice: telescope across the unit products
    slots = sorted(s for s in gens if s != 0)
    d = {s: gens[s] // ctx.pair_mn(s)[1] for s in slots}
    out: List[Tuple[Rat, SKey]] = []
    prefix_scalar = Rat(1)
    for pos, s in enumerate(slots):
        step = ctx.step(s)
        # suffix exponents: remaining unit products beyond position pos
        suffix: Dict[int, int] = {}
        for s2 in slots[pos + 1 :]:
            step2 = ctx.step(s2)
            suffix[0] = suffix.get(0, 0) + d[s2] * step2.m
            suffix[s2] = suffix.get(s2, 0) + d[s2] * step2.n
        for c, mono in _shadow_power_minus_residue(ctx, s, d[s]):
            merged = dict(mono)
            for s2, k2 in suffix.items():
                merged[s2] = merged.get(s2, 0) + k2
            out.append((prefix_scalar * c, _skey(merged)))
        prefix_scalar *= step.beta ** d[s]
    return out


def _shadow_power_minus_residue(
    ctx: _Ctx, s: int, d: int
) -> List[Tuple[Rat, Dict[int, int]]]:
    """a_s^d - beta_s^d as monomials, each containing one positive w_s power."""
    step = ctx.step(s)
    if d == 0:
        return []
    if d < 0:
        inner = _shadow_power_minus_residue(ctx, s, -d)
        out = []
        for c, mono in inner:
            merged = {0: d * step.m, s: d * step.n}
            for k, v in mono.items():
                merged[k] = merged.get(k, 0) + v
            out.append((-c * step.beta**d, merged))
        return out
    # a^d - beta^d = (a - beta) sum_c a^{d-1-c} beta^c and a - beta is the
    # next tower variable w_s
    out = []
    for c_idx in range(d):
        power = d - 1 - c_idx
        mono = {0: power * step.m, s: power * step.n}
        mono[s + 1] = mono.get(s + 1, 0) + 1
        out.append((step.beta**c_idx, mono))
    return out


def _shadow_expand_block(ctx: _Ctx, block: tuple) -> List[Tuple[Rat, SKey]]:
    q_gens_t, n, rho_q = block
    sigma = 1 / (n * rho_q ** (n - 1))
    q_gens = dict(q_gens_t)
    pure = _shadow_expand_pure(ctx, q_gens)
    out: List[Tuple[Rat, SKey]] = []
    for p in range(n - 1):
        weight = -(p + 1) * rho_q**p * sigma
        reps = n - 2 - p
        for c, key in pure:
            merged = _sgens(key)
            for s, k in q_gens.items():
                merged[s] = merged.get(s, 0) + k * reps
            out.append((weight * c, _skey(merged, key[1] + (block,))))
    return out


def shadow_eval(
    desc: OmegaDescriptor, element: WeylElement, depth_limit: int = 64
) -> Value:
    """Independent commutative re-evaluation of v(element).

    Maps the normal form to a commutative Laurent polynomial and runs the
    same level discipline with plain monomial algebra: no commutator
    corrections exist, and cancellations are resolved by the tower rewrite
    a_s - beta_s = w_s alone.
    """
    ctx = _Ctx(desc, depth_limit)
    pool: Dict[SKey, Rat] = {}
    for (i, j), c in element.terms.items():
        key = _skey({0: i, 1: j})
        pool[key] = pool.get(key, Rat(0)) + c
    pool = {k: c for k, c in pool.items() if c}
    while pool:
        level: Optional[ValueGroupElement] = None
        for key in pool:
            val = _shadow_value(ctx, key)
            if level is None or val.cmp(level) < 0:
                level = val
        group = sorted(
            (key for key in pool if _shadow_value(ctx, key).cmp(level) == 0)
        )
        ref = _sgens(group[0])
        inv_ref = {s: -k for s, k in ref.items()}
        lam = Rat(0)
        members = []
        for key in group:
            rel = _shadow_mul(key, inv_ref)
            res = _shadow_residue(ctx, rel)
            members.append((key, rel, res))
            lam += pool[key] * res
        if lam != 0:
            return level
        for key, rel, res in members:
            c = pool.pop(key)
            emissions: List[Tuple[Rat, SKey]] = []
            rel_gens = _sgens(rel)
            blocks = rel[1]
            rho_p = _rho(ctx, rel_gens)
            sigmas = [1 / (n * rq ** (n - 1)) for _, n, rq in blocks]
            for cc, kk in _shadow_expand_pure(ctx, rel_gens):
                emissions.append((cc, _skey(_sgens(kk), kk[1] + blocks)))
            running = rho_p
            for idx, block in enumerate(blocks):
                rest = blocks[idx + 1 :]
                for cc, kk in _shadow_expand_block(ctx, block):
                    emissions.append(
                        (running * cc, _skey(_sgens(kk), kk[1] + rest))
                    )
                running *= sigmas[idx]
            for cc, kk in emissions:
                nk = _shadow_mul(kk, ref)
                pool[nk] = pool.get(nk, Rat(0)) + c * cc
        pool = {k: v for k, v in pool.items() if v}
    return INFINITY


# -- derived predicates and samplers ----------------------------------------------


def equivalent(
    desc: OmegaDescriptor,
    a: WeylElement,
    b: WeylElement,
    depth_limit: int = 64,
) -> bool:
    """a ~ b: equal values and the difference sits strictly higher."""
    va = eval(desc, a, depth_limit)
    vb = eval(desc, b, depth_limit)
    if value_cmp(va, vb) != 0:
        return False
    return value_cmp(eval(desc, a.sub(b), depth_limit), va) > 0


def unit_generators(desc: OmegaDescriptor, r: int) -> List[Tuple[int, ...]]:
    """Generators of the monoid of value-0 monomials over x, w_0..w_{r-1}.

    Vectors list the x exponent first; w exponents are nonnegative, and the
    x exponent is the unique integer balancing the value to 0.  The list is
    the set of monoid-minimal solutions inside the box prod [0, n_i], which
    contains every generator since n_i e_i is itself a solution.
    """
    ratios = [desc.step(i).ratio() for i in range(1, r + 1)]
    ns = [desc.step(i).n for i in range(1, r + 1)]
    sols: List[Tuple[int, ...]] = []

    def rec(idx: int, vec: List[int], total: Rat) -> None:
        if idx == r:
            if any(vec) and total.denominator == 1:
                sols.append(tuple(vec))
            return
        for k in range(ns[idx] + 1):
            vec.append(k)
            rec(idx + 1, vec, total + k * ratios[idx])
            vec.pop()

    rec(0, [], Rat(0))
    sol_set = set(sols)
    out = []
    for s in sols:
        decomposable = False
        for s2 in sol_set:
            if s2 != s and all(a <= b for a, b in zip(s2, s)):
                rest = tuple(b - a for a, b in zip(s2, s))
                if any(rest) and rest in sol_set:
                    decomposable = True
                    break
        if not decomposable:
            x_exp = sum(k * v for k, v in zip(s, ratios))
            assert x_exp.denominator == 1
            out.append((int(x_exp),) + s)
    return sorted(out)


def sample_element(
    rng: random.Random, max_degree: int = 8, max_terms: int = 6, coeff_bound: int = 9
) -> WeylElement:
    """Random nonzero element with total degree at most max_degree."""
    while True:
        terms: Dict[Tuple[int, int], Rat] = {}
        for _ in range(rng.randint(1, max_terms)):
            i = rng.randint(0, max_degree)
            j = rng.randint(0, max_degree - i)
            c = rng.randint(-coeff_bound, coeff_bound)
            if c:
                terms[(i, j)] = terms.get((i, j), Rat(0)) + Rat(c)
        element = WeylElement({k: v for k, v in terms.items() if v})
        if not element.is_zero():
            return element


@dataclass
class SampleReport:
    trials: int
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"trials": self.trials, "violations": self.violations}


def strongly_abelian_sample(
    desc: OmegaDescriptor,
    seed: int,
    trials: int,
    max_degree: int = 5,
    depth_limit: int = 64,
) -> SampleReport:
    """Check v([a, b]) > v(a) + v(b) on random nonzero pairs."""
    rng = random.Random(seed)
    report = SampleReport(trials=trials)
    for _ in range(trials):
        a = sample_element(rng, max_degree=max_degree, max_terms=4, coeff_bound=5)
        b = sample_element(rng, max_degree=max_degree, max_terms=4, coeff_bound=5)
        va = eval(desc, a, depth_limit)
        vb = eval(desc, b, depth_limit)
        vc = eval(desc, commutator(a, b), depth_limit)
        bound = va.add(vb) if va is not INFINITY and vb is not INFINITY else INFINITY
        if not (vc is INFINITY or (bound is not INFINITY and vc.cmp(bound) > 0)):
            report.violations.append(
                {"a": str(a), "b": str(b), "v_a": str(va), "v_b": str(vb), "v_comm": str(vc)}
            )
    return report


eval_element = eval

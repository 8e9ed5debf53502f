"""Extendability checks, root resolution, cofactor algebra, and the
tower-to-z-sequence conversion with its round trip."""

import pytest

from weylval import (
    NotExtendable,
    OmegaDescriptor,
    OrePoly,
    PuiseuxSeries,
    Rat,
    RoundtripReport,
    SignChoiceForbidden,
    SignChoiceRequired,
    ZSequence,
    check_extendable,
    cofactor_tail,
    cofactor_tail_residue,
    embed,
    omega_element,
    omega_to_z,
    ore_mul,
    resolve_gammas,
    root_cofactor,
    root_cofactor_residue,
    roundtrip_check,
    sample_element,
    tail_count,
    validate,
)


def desc(steps, tail=None, signs=None):
    data = {"steps": [{"m": m, "n": n, "beta": str(b)} for m, n, b in steps]}
    if tail is not None:
        data["tail"] = tail
    if signs:
        data["alpha_signs"] = [{"i": i, "j": j, "sign": s} for i, j, s in signs]
    return OmegaDescriptor.from_json(data)


def scalar_poly(r):
    return OrePoly.from_series(PuiseuxSeries.scalar(Rat(r)))


def base_root(d, i):
    """x^{m_i/n_i} omega_{i-1}, the element whose residue is gamma_i."""
    step = d.step(i)
    factor = PuiseuxSeries.x_power(Rat(step.m, step.n))
    return embed(omega_element(d, i - 1)).scale_series(factor)


def ore_pow(f, n):
    out = scalar_poly(1)
    for _ in range(n):
        out = ore_mul(out, f)
    return out


IRRATIONAL_THIRD = {
    "kind": "irrational",
    "value": {"q": "0", "k_xi": 1, "k_mu": 0, "scale": "1/3"},
}


class TestCheckExtendable:
    def test_worked_descriptor_passes(self, worked):
        assert check_extendable(worked) is None

    def test_halving_rule_passes(self, halving):
        assert check_extendable(halving) is None

    def test_even_step_with_negative_beta_fails_condition_one(self):
        violation = check_extendable(desc([(1, 2, -1), (1, 4, -1)]))
        assert violation is not None
        assert violation.condition == 1
        assert violation.indices == (1,)

    def test_even_negative_beta_beats_later_odd_step(self):
        violation = check_extendable(desc([(1, 2, -1), (1, 3, 1)]))
        assert violation is not None
        assert violation.condition == 1

    def test_odd_steps_allow_negative_beta(self):
        assert check_extendable(desc([(1, 3, -8)])) is None

    def test_twisted_sign_triple_fails_condition_two(self):
        violation = check_extendable(
            desc(
                [(1, 2, 1), (1, 4, 1), (1, 8, 1)],
                signs=[(1, 2, 1), (1, 3, -1), (2, 3, 1)],
            )
        )
        assert violation is not None
        assert violation.condition == 2
        assert violation.indices == (1, 2, 3)

    def test_consistent_sign_triple_passes(self):
        ok = desc(
            [(1, 2, 1), (1, 4, 1), (1, 8, 1)],
            signs=[(1, 2, 1), (1, 3, 1), (2, 3, 1)],
        )
        assert check_extendable(ok) is None

    def test_violation_json_shape(self):
        violation = check_extendable(desc([(1, 2, -1), (1, 4, -1)]))
        out = violation.to_json()
        assert out["condition"] == 1
        assert out["indices"] == [1]
        assert isinstance(out["detail"], str) and out["detail"]


class TestResolveGammas:
    def test_odd_root_is_unique(self):
        res = resolve_gammas(desc([(1, 3, 8)]))
        assert res.gamma(1) == Rat(2)
        assert res.free_choice_index is None

    def test_odd_root_rejects_sign_choice(self):
        with pytest.raises(SignChoiceForbidden):
            resolve_gammas(desc([(1, 3, 8)]), sign_choice=1)

    def test_negative_odd_root(self):
        assert resolve_gammas(desc([(1, 3, -8)])).gamma(1) == Rat(-2)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_free_even_root_follows_sign_choice(self, single24, sign):
        res = resolve_gammas(single24, sign_choice=sign)
        assert res.gamma(1) == sign * Rat(2)
        assert res.free_choice_index == 1
        assert res.chosen_sign == sign

    def test_free_even_root_requires_sign_choice(self, single24):
        with pytest.raises(SignChoiceRequired):
            resolve_gammas(single24)

    def test_sign_choice_must_be_a_unit(self, single24):
        with pytest.raises(SignChoiceRequired):
            resolve_gammas(single24, sign_choice=3)

    def test_halving_rule_pins_every_root(self, halving):
        res = resolve_gammas(halving)
        assert set(res.gammas) == {Rat(1)}
        assert res.free_choice_index is None
        with pytest.raises(SignChoiceForbidden):
            resolve_gammas(halving, sign_choice=1)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_worked_descriptor_free_sign_sits_at_top_step(self, worked, sign):
        res = resolve_gammas(worked, sign_choice=sign)
        assert res.gammas == (Rat(1), sign * Rat(1))
        assert res.free_choice_index == 2

    def test_not_extendable_raises(self):
        with pytest.raises(NotExtendable):
            resolve_gammas(desc([(1, 2, -1), (1, 4, -1)]))

    def test_json_shape(self, single24):
        out = resolve_gammas(single24, sign_choice=-1).to_json()
        assert out == {
            "gammas": ["-2"],
            "free_choice_index": 1,
            "chosen_sign": -1,
        }


class TestTailCounts:
    def test_first_row_counts_up(self):
        assert [tail_count(4, k, 1) for k in (1, 2, 3)] == [1, 2, 3]

    def test_later_rows_are_prefix_sums(self):
        assert [tail_count(4, k, 2) for k in (1, 2)] == [1, 3]
        assert tail_count(4, 1, 3) == 1

    def test_one_past_the_end_is_the_row_total(self):
        assert tail_count(4, 3, 2) == 6
        assert tail_count(4, 2, 3) == 4
        assert tail_count(3, 2, 2) == 3
        assert tail_count(2, 1, 2) == 1

    def test_row_total_law(self):
        for n in range(2, 7):
            for j in range(1, n):
                total = sum(tail_count(n, k, j) for k in range(1, n - j + 1))
                assert tail_count(n, n - j, j + 1) == total

    def test_out_of_range_indices_rejected(self):
        with pytest.raises(AssertionError):
            tail_count(4, 4, 2)
        with pytest.raises(AssertionError):
            tail_count(4, 1, 5)
        with pytest.raises(AssertionError):
            tail_count(4, 0, 1)


@pytest.fixture(scope="module")
def mixed():
    d = desc([(1, 3, 8), (1, 4, 1)])
    return d, resolve_gammas(d, sign_choice=1)


class TestCofactorAlgebra:
    def test_resolved_roots(self, mixed):
        d, res = mixed
        assert res.gammas == (Rat(2), Rat(1))

    @pytest.mark.parametrize("i", [1, 2])
    def test_root_cofactor_clears_the_root(self, mixed, i):
        d, res = mixed
        step = d.step(i)
        b = base_root(d, i)
        b_minus_gamma = b.sub(scalar_poly(res.gamma(i)))
        lhs = ore_mul(b_minus_gamma, root_cofactor(d, res, i))
        rhs = ore_pow(b, step.n).sub(scalar_poly(step.beta))
        assert lhs == rhs

    @pytest.mark.parametrize("i", [1, 2])
    def test_first_tail_peels_the_cofactor_residue(self, mixed, i):
        d, res = mixed
        b = base_root(d, i)
        b_minus_gamma = b.sub(scalar_poly(res.gamma(i)))
        cofactor = root_cofactor(d, res, i)
        lhs = ore_mul(b_minus_gamma, cofactor_tail(d, res, i, 1))
        rhs = cofactor.sub(scalar_poly(root_cofactor_residue(d, res, i)))
        assert lhs == rhs

    @pytest.mark.parametrize("i", [1, 2])
    def test_tail_chain_telescopes(self, mixed, i):
        d, res = mixed
        step = d.step(i)
        b = base_root(d, i)
        b_minus_gamma = b.sub(scalar_poly(res.gamma(i)))
        for j in range(1, step.n - 1):
            lhs = ore_mul(b_minus_gamma, cofactor_tail(d, res, i, j + 1))
            rhs = cofactor_tail(d, res, i, j).sub(
                scalar_poly(cofactor_tail_residue(d, res, i, j))
            )
            assert lhs == rhs

    def test_residue_closed_forms(self, mixed):
        d, res = mixed
        # step 1: n=3, gamma=2; step 2: n=4, gamma=1
        assert root_cofactor_residue(d, res, 1) == Rat(12)
        assert cofactor_tail_residue(d, res, 1, 1) == Rat(6)
        assert cofactor_tail_residue(d, res, 1, 2) == Rat(1)
        assert root_cofactor_residue(d, res, 2) == Rat(4)
        assert cofactor_tail_residue(d, res, 2, 1) == Rat(6)
        assert cofactor_tail_residue(d, res, 2, 2) == Rat(4)
        assert cofactor_tail_residue(d, res, 2, 3) == Rat(1)

    def test_worked_first_cofactor_residue(self, worked):
        res = resolve_gammas(worked, sign_choice=1)
        assert root_cofactor_residue(worked, res, 1) == Rat(2)


class TestConversion:
    def test_single_step_first_emission_is_the_root(self):
        d = desc([(1, 2, 1)], tail=IRRATIONAL_THIRD)
        assert validate(d) == []
        res = resolve_gammas(d, sign_choice=1)
        z = omega_to_z(d, res, depth=3)
        assert z.explicit_entries == [(Rat(1, 2), Rat(1))]
        assert z.terminal is not None

    @pytest.mark.parametrize("sign", [1, -1])
    def test_worked_emissions_and_terminal(self, worked, sign):
        res = resolve_gammas(worked, sign_choice=sign)
        z = omega_to_z(worked, res, depth=2)
        assert z.explicit_entries == [
            (Rat(1, 2), Rat(1)),
            (Rat(3, 4), sign * Rat(1, 2)),
        ]
        total = z.terminal.value
        assert total.q == Rat(3, 4)
        assert total.k_xi == 1
        assert total.k_mu == 0
        assert total.xi_scale == Rat(1, 8)

    def test_worked_second_gamma_divides_by_cofactor_residue(self, worked):
        res = resolve_gammas(worked, sign_choice=1)
        z = omega_to_z(worked, res, depth=2)
        gamma2 = z.explicit_entries[1][1]
        assert gamma2 == res.gamma(2) / root_cofactor_residue(worked, res, 1)

    def test_halving_rule_entries(self, halving):
        res = resolve_gammas(halving)
        z = omega_to_z(halving, res, depth=4)
        assert z.explicit_entries == [
            (Rat(1, 2), Rat(1)),
            (Rat(3, 4), Rat(1, 2)),
            (Rat(7, 8), Rat(1, 8)),
            (Rat(15, 16), Rat(1, 64)),
        ]
        assert z.terminal is None and z.rule is None

    def test_geometric_rule_entries(self, constant131):
        res = resolve_gammas(constant131)
        z = omega_to_z(constant131, res, depth=3)
        assert z.explicit_entries == [
            (Rat(1, 3), Rat(1)),
            (Rat(4, 9), Rat(1, 3)),
            (Rat(13, 27), Rat(1, 27)),
        ]

    def test_entries_increase_and_stay_below_one(self, halving, constant131):
        for d in (halving, constant131):
            res = resolve_gammas(d)
            z = omega_to_z(d, res, depth=5)
            rs = [r for r, _ in z.explicit_entries]
            assert all(a < b for a, b in zip(rs, rs[1:]))
            assert all(Rat(0) < r < Rat(1) for r in rs)

    def test_depth_zero_gives_empty_prefix(self, worked, halving):
        for d, sign in ((worked, 1), (halving, None)):
            res = (
                resolve_gammas(d, sign_choice=sign)
                if sign
                else resolve_gammas(d)
            )
            z = omega_to_z(d, res, depth=0)
            assert z.explicit_entries == []
            assert z.terminal is None

    def test_single_terminal_conversion(self, single_terminal):
        for sign in (1, -1):
            res = resolve_gammas(single_terminal, sign_choice=sign)
            z = omega_to_z(single_terminal, res, depth=4)
            assert z.explicit_entries == [(Rat(1, 2), sign * Rat(2))]
            total = z.terminal.value
            assert total.q == Rat(1, 2)
            assert total.k_xi == 1
            assert total.xi_scale == Rat(1, 3)


class TestRoundtrip:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_worked_roundtrip(self, worked, rng, sign):
        res = resolve_gammas(worked, sign_choice=sign)
        samples = [sample_element(rng, max_degree=5) for _ in range(15)]
        report = roundtrip_check(worked, res, samples, depth=8)
        assert report.ok
        assert report.trials == 15

    @pytest.mark.parametrize("sign", [1, -1])
    def test_single_terminal_roundtrip(self, single_terminal, rng, sign):
        res = resolve_gammas(single_terminal, sign_choice=sign)
        samples = [sample_element(rng, max_degree=5) for _ in range(15)]
        report = roundtrip_check(single_terminal, res, samples, depth=8)
        assert report.ok

    def test_report_json_shape(self):
        report = RoundtripReport(3, ("y: 1 vs 2",))
        assert not report.ok
        assert report.to_json() == {
            "trials": 3,
            "mismatches": ["y: 1 vs 2"],
            "ok": False,
        }

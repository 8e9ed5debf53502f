"""Normal-form arithmetic on the x/y generators and the operator oracle."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from weylval import Rat, WeylElement, apply_to_poly, commutator, normalize
from weylval.weyl import mul, poly_str


def elem(terms):
    return WeylElement({k: Rat(v) for k, v in terms.items()})


X = WeylElement.x()
Y = WeylElement.y()
ONE = WeylElement.scalar(Rat(1))


def random_element(rng, max_degree=6, max_terms=4, coeff_bound=9):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        i = rng.randint(0, max_degree)
        j = rng.randint(0, max_degree)
        c = rng.randint(-coeff_bound, coeff_bound)
        if c:
            terms[(i, j)] = terms.get((i, j), 0) + c
    return WeylElement({k: Rat(v) for k, v in terms.items() if v})


def random_poly(rng, degree=12):
    return [Rat(rng.randint(-9, 9)) for _ in range(degree + 1)]


class TestNormalize:
    def test_defining_relation(self):
        assert normalize(["y", "x"]) == elem({(1, 1): 1, (0, 0): 1})

    def test_already_normal(self):
        assert normalize(["x", "y"]) == elem({(1, 1): 1})

    def test_two_rewrites(self):
        # y^2 x = x y^2 + 2 y
        assert normalize(["y", "y", "x"]) == elem({(1, 2): 1, (0, 1): 2})

    def test_scalars_and_elements_in_words(self):
        f = elem({(1, 2): 1})
        # 3 * y * (x*y^2) = 3*x*y^3 + 3*y^2
        assert normalize([Rat(3), "y", f]) == elem({(1, 3): 3, (0, 2): 3})

    def test_unknown_generator_rejected(self):
        with pytest.raises(ValueError):
            normalize(["z"])


class TestMul:
    def test_square_of_unit_relation(self):
        f = elem({(1, 2): 1, (0, 0): -1})
        expected = elem({(2, 4): 1, (1, 3): 2, (1, 2): -2, (0, 0): 1})
        assert mul(f, f) == expected
        assert f.mul(f) == expected

    def test_identity(self):
        f = elem({(3, 2): 5, (0, 1): -2})
        assert mul(f, ONE) == f
        assert mul(ONE, f) == f

    def test_associativity_sample(self):
        rng = random.Random(7)
        for _ in range(40):
            a, b, c = (random_element(rng, 4, 3, 5) for _ in range(3))
            assert mul(mul(a, b), c) == mul(a, mul(b, c))

    def test_distributivity_sample(self):
        rng = random.Random(8)
        for _ in range(40):
            a, b, c = (random_element(rng, 4, 3, 5) for _ in range(3))
            assert mul(a, b.add(c)) == mul(a, b).add(mul(a, c))


class TestCommutator:
    def test_canonical(self):
        assert commutator(Y, X) == ONE

    def test_self(self):
        f = elem({(2, 3): 4, (1, 0): 1})
        assert commutator(f, f) == WeylElement.zero()

    def test_unit_with_x(self):
        # [x y^2 - 1, x] = 2 x y
        f = elem({(1, 2): 1, (0, 0): -1})
        assert commutator(f, X) == elem({(1, 1): 2})

    def test_antisymmetry_and_bilinearity(self):
        rng = random.Random(9)
        for _ in range(30):
            a, b, c = (random_element(rng, 4, 3, 5) for _ in range(3))
            assert commutator(a, b) == commutator(b, a).neg()
            assert commutator(a.add(b), c) == commutator(a, c).add(
                commutator(b, c)
            )


class TestOperatorOracle:
    """x acts as multiplication by t, y as d/dt; the action is faithful on
    the tested degree window."""

    def test_derivative(self):
        assert apply_to_poly(Y, [Rat(0), Rat(0), Rat(0), Rat(1)]) == [
            Rat(0),
            Rat(0),
            Rat(3),
        ]

    def test_t_ddt(self):
        xy = elem({(1, 1): 1})
        assert apply_to_poly(xy, [Rat(0), Rat(0), Rat(1)]) == [
            Rat(0),
            Rat(0),
            Rat(2),
        ]

    def test_canonical_relation_acts_as_identity(self):
        rng = random.Random(10)
        yx_minus_xy = commutator(Y, X)
        for _ in range(10):
            p = random_poly(rng, 8)
            assert apply_to_poly(yx_minus_xy, p) == p

    def test_product_action_composes(self):
        rng = random.Random(11)
        for _ in range(60):
            a = random_element(rng, 6, 3, 5)
            b = random_element(rng, 6, 3, 5)
            p = random_poly(rng, 12)
            assert apply_to_poly(mul(a, b), p) == apply_to_poly(
                a, apply_to_poly(b, p)
            )

    def test_poly_str(self):
        assert poly_str([Rat(1), Rat(0), Rat(-2)]) == "1*t^0 + -2*t^2"
        assert poly_str([]) == "0"


def tower_steps_strategy():
    step = st.tuples(
        st.integers(1, 2), st.sampled_from([2, 3, 4]), st.integers(1, 4)
    )
    return st.lists(step, min_size=1, max_size=3)


def build_tower(steps):
    """omega_i = x^{m_i} omega_{i-1}^{n_i} - beta_i starting from omega_0 = y."""
    towers = [Y]
    for m, n, beta in steps:
        prev = towers[-1]
        term = mul(WeylElement.monomial(m, 0, Rat(1)), prev.pow(n))
        towers.append(term.sub(WeylElement.scalar(Rat(beta))))
    return towers


def ladder_expansion(steps, towers):
    """Independent nested closed form for [omega_i, x], built by the
    derivative-ladder recursion instead of a direct product difference."""
    m1, n1, _ = steps[0]
    expansion = WeylElement.monomial(m1, n1 - 1, Rat(n1))
    for level, (m, n, _) in enumerate(steps[1:], start=1):
        prev = towers[level]
        x_m = WeylElement.monomial(m, 0, Rat(1))
        total = WeylElement.zero()
        for ell in range(1, n + 1):
            total = total.add(
                mul(mul(prev.pow(n - ell), expansion), prev.pow(ell - 1))
            )
        expansion = mul(x_m, total)
    return expansion


class TestCommutatorLadder:
    @settings(max_examples=12, deadline=None)
    @given(tower_steps_strategy())
    def test_nested_closed_form(self, steps):
        towers = build_tower(steps)
        assert commutator(towers[-1], X) == ladder_expansion(steps, towers)

"""Exact polynomial arithmetic: examples, serialization, and ring properties."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondual.errors import DimensionMismatch
from canondual.polynomial import MultiPoly, first_diff_term, rat


def two_var(terms):
    return MultiPoly.from_terms(2, terms)


@pytest.fixture
def f2():
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    return 2 * x**2 - Fraction(21, 20) * x**4 + Fraction(1, 6) * x**6 + x * y + y**2


@pytest.fixture
def h_poly():
    s = MultiPoly.variable(1, 0)
    return 1 + (s + 1) ** 2 * (3 * s**2 - 14 * s + 19)


@pytest.fixture
def g_poly():
    t = MultiPoly.variable(1, 0)
    return 30 + t**2 * (3 * t**2 - 16 * t + 18)


class TestRat:
    def test_parses_fraction_strings(self):
        assert rat("-21/20") == Fraction(-21, 20)
        assert rat("53/3") == Fraction(53, 3)
        assert rat(7) == 7

    def test_floats_convert_exactly(self):
        assert rat(0.5) == Fraction(1, 2)
        assert float(rat(1.76)) == 1.76

    def test_rejects_junk(self):
        with pytest.raises((TypeError, ValueError)):
            rat("three")
        with pytest.raises(TypeError):
            rat(True)


class TestEval:
    def test_every_monomial_positive_degree_vanishes_at_origin(self, f2):
        assert f2.eval((0.0, 0.0)) == 0.0

    def test_goldstein_price_at_reported_minimizer(self):
        # Oracle: the factored product form evaluated directly in floats.
        def factored(x, y):
            a = 1 + (x + y + 1) ** 2 * (19 - 14 * x + 3 * x * x - 14 * y + 6 * x * y + 3 * y * y)
            b = 30 + (2 * x - 3 * y) ** 2 * (
                18 - 32 * x + 12 * x * x + 48 * y - 36 * x * y + 27 * y * y
            )
            return a * b

        from canondual.benchmarks import gp_objective

        assert factored(0.0, -1.0) == 3.0
        assert gp_objective().eval((0.0, -1.0)) == pytest.approx(3.0, abs=1e-12)

    def test_g_at_one(self, g_poly):
        assert g_poly.eval((1.0,)) == 30 + 1 * (18 - 16 + 3) == 35

    def test_exact_eval_matches_float(self, g_poly):
        assert g_poly.eval_exact([Fraction(1, 3)]) == Fraction(
            30 * 81 + 9 * 18 - 3 * 16 + 3, 81
        )

    def test_arity_mismatch(self, f2):
        with pytest.raises(DimensionMismatch):
            f2.eval((1.0,))


class TestRingOps:
    def test_additive_inverse(self, f2):
        assert (f2 + f2.scale(-1)).is_zero()

    def test_difference_of_squares(self):
        x = MultiPoly.variable(1, 0)
        assert (x + 1) * (x - 1) == x**2 - 1

    def test_product_of_quartics_has_degree_eight(self, h_poly, g_poly):
        hs = MultiPoly.from_terms(2, {(e[0], 0): c for e, c in h_poly.terms.items()})
        gt = MultiPoly.from_terms(2, {(0, e[0]): c for e, c in g_poly.terms.items()})
        product = hs * gt
        assert product.total_degree() == 8
        assert product.degree_in(0) == 4
        assert product.degree_in(1) == 4

    def test_arity_mismatch_raises(self, f2, g_poly):
        with pytest.raises(DimensionMismatch):
            f2 + g_poly


class TestDerivatives:
    def test_h_prime_expands_to_shifted_cubic(self, h_poly):
        dh = h_poly.partial_derivative(0)
        assert dh == MultiPoly.from_terms(1, {(3,): 12, (2,): -24, (1,): -12, (0,): 24})
        # Same thing in factored form: 12 (s+1)(s-1)(s-2).
        s = MultiPoly.variable(1, 0)
        assert dh == 12 * (s + 1) * (s - 1) * (s - 2)

    def test_g_prime(self, g_poly):
        dg = g_poly.partial_derivative(0)
        assert dg == MultiPoly.from_terms(1, {(3,): 12, (2,): -48, (1,): 36})

    def test_constant_derivative_is_zero(self):
        assert MultiPoly.constant(3, Fraction(5, 7)).partial_derivative(1).is_zero()

    def test_index_bounds(self, f2):
        with pytest.raises(DimensionMismatch):
            f2.partial_derivative(2)


class TestSubstituteLinear:
    def test_identity_substitution(self, f2):
        eye = [[1, 0], [0, 1]]
        assert f2.substitute_linear(eye) == f2

    def test_partial_freeze(self):
        x = MultiPoly.variable(2, 0)
        y = MultiPoly.variable(2, 1)
        p = (x + y + 1) ** 2
        composed = p.substitute_linear([[1], [0]], shift=[0, -1])
        u = MultiPoly.variable(1, 0)
        assert composed == u**2

    def test_shape_mismatch(self, f2):
        with pytest.raises(DimensionMismatch):
            f2.substitute_linear([[1, 0]])
        with pytest.raises(DimensionMismatch):
            f2.substitute_linear([[1], [0]], shift=[1])


class TestSerialization:
    def test_graded_lex_descending_lines(self):
        p = two_var({(0, 0): 5, (2, 0): 1, (1, 1): Fraction(-1, 2), (0, 2): 3})
        assert p.to_text().splitlines() == [
            "1/1 2 0",
            "-1/2 1 1",
            "3/1 0 2",
            "5/1 0 0",
        ]

    def test_zero_serializes_empty(self):
        assert MultiPoly.zero(2).to_text() == ""

    def test_first_diff_term(self):
        p = two_var({(2, 0): 1, (0, 0): 1})
        q = two_var({(2, 0): 1, (0, 0): 2})
        assert first_diff_term(p, q) == (0, 0)
        assert first_diff_term(p, p) is None


class TestValidation:
    def test_arity_cap(self):
        with pytest.raises(DimensionMismatch):
            MultiPoly.zero(5)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            MultiPoly.from_terms(1, {(-1,): 1})

    def test_zero_terms_pruned(self):
        p = MultiPoly.from_terms(2, {(1, 0): 0, (0, 1): 2})
        assert list(p.terms) == [(0, 1)]


# -- property tests ---------------------------------------------------------

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=12)
exponent_pairs = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(exponent_pairs, coefficients, max_size=4).map(
    lambda terms: MultiPoly.from_terms(2, terms)
)
rational_points = st.tuples(coefficients, coefficients)


@given(polys, polys)
def test_addition_and_multiplication_commute(p, q):
    assert p + q == q + p
    assert p * q == q * p


@given(polys, polys, polys)
def test_associativity_and_distributivity(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r


@given(polys, polys)
def test_product_rule_is_exact(p, q):
    for var in range(2):
        lhs = (p * q).partial_derivative(var)
        rhs = p.partial_derivative(var) * q + p * q.partial_derivative(var)
        assert lhs == rhs


@given(polys)
def test_decoupling_transform_round_trips(p):
    T = [[1, 1], [2, -3]]
    T_inv = [[Fraction(3, 5), Fraction(1, 5)], [Fraction(2, 5), Fraction(-1, 5)]]
    assert p.substitute_linear(T).substitute_linear(T_inv) == p


@given(polys, rational_points)
def test_substitution_commutes_with_evaluation(p, point):
    M = [[Fraction(1, 2), 1], [-1, Fraction(2, 3)]]
    d = [Fraction(1, 4), -2]
    composed = p.substitute_linear(M, d)
    u0, u1 = point
    image = (M[0][0] * u0 + M[0][1] * u1 + d[0], M[1][0] * u0 + M[1][1] * u1 + d[1])
    assert composed.eval_exact(point) == p.eval_exact(image)

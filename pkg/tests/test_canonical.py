"""The canonical duality framework on the decoupled quartic and synthetic problems."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondual import canonical
from canondual.benchmarks import gp_canonical_g, gp_dual_closed_form, gp_g
from canondual.errors import ColumnSpaceViolation, DimensionMismatch, SingularMatrixError
from canondual.oracle import Lcg
from canondual.smallmat import SymMatrix, Vector


@pytest.fixture(scope="module")
def gp():
    return gp_canonical_g()


def make_problem(A, f, C, b, c, a, beta, n=1):
    return canonical.CanonicalProblem(
        n=n,
        A=SymMatrix(n, tuple(A)) if isinstance(A, (list, tuple)) else SymMatrix(1, (A,)),
        f=Vector(tuple(f) if isinstance(f, (list, tuple)) else (f,)),
        ops=(
            canonical.QuadOperator(
                C=SymMatrix(n, tuple(C)) if isinstance(C, (list, tuple)) else SymMatrix(1, (C,)),
                b=Vector(tuple(b) if isinstance(b, (list, tuple)) else (b,)),
                c=c,
            ),
        ),
        V=canonical.ConvexQuadV(((a, beta),)),
    )


class TestLambdaEval:
    def test_at_recovered_minimizer(self, gp):
        assert canonical.lambda_eval(gp, (3.0,)) == pytest.approx((-1.0,), abs=1e-12)

    def test_at_vertex_of_the_measure(self, gp):
        # The measure is (t - 4/3)^2 - 34/9, so its minimum value is -34/9.
        assert canonical.lambda_eval(gp, (4.0 / 3.0,))[0] == pytest.approx(-34.0 / 9.0, abs=1e-12)

    def test_plain_square_measure_at_origin(self):
        pr = make_problem(A=0.0, f=0.0, C=2.0, b=0.0, c=0.0, a=1.0, beta=0.0)
        assert canonical.lambda_eval(pr, (0.0,)) == (0.0,)

    def test_dimension_mismatch(self, gp):
        with pytest.raises(DimensionMismatch):
            canonical.lambda_eval(gp, (1.0, 2.0))


class TestPrimalValue:
    @pytest.mark.parametrize("t", [3.0, 0.0, 1.0, -2.5, 0.7])
    def test_matches_quartic(self, gp, t):
        assert canonical.primal_value(gp, (t,)) == pytest.approx(gp_g().eval((t,)), abs=1e-9)

    def test_reported_values(self, gp):
        assert canonical.primal_value(gp, (3.0,)) == pytest.approx(3.0, abs=1e-12)
        assert canonical.primal_value(gp, (0.0,)) == pytest.approx(30.0, abs=1e-12)
        assert canonical.primal_value(gp, (1.0,)) == pytest.approx(35.0, abs=1e-12)


class TestConjugate:
    def test_certified_point_value(self):
        V = canonical.ConvexQuadV(((3.0, -9.0),))
        assert canonical.conjugate_value(V, (-15.0,)) == pytest.approx(3.0, abs=1e-12)

    def test_plain_square(self):
        V = canonical.ConvexQuadV(((1.0, 0.0),))
        assert canonical.conjugate_value(V, (0.0,)) == 0.0
        assert canonical.conjugate_gradient(V, (0.0,)) == (0.0,)
        assert canonical.conjugate_value(V, (2.0,)) == pytest.approx(1.0)
        assert canonical.conjugate_gradient(V, (2.0,)) == (1.0,)

    def test_convexity_validation(self):
        with pytest.raises(ValueError):
            canonical.ConvexQuadV(((0.0, 1.0),))


class TestGAndF:
    def test_at_certified_point(self, gp):
        assert canonical.g_matrix(gp, (-15.0,)).entry(0, 0) == pytest.approx(16.0 / 3.0, abs=1e-12)
        assert canonical.f_vector(gp, (-15.0,))[0] == pytest.approx(16.0, abs=1e-12)

    def test_at_zero_reduces_to_problem_data(self, gp):
        assert canonical.g_matrix(gp, (0.0,)).entry(0, 0) == gp.A.entry(0, 0)
        assert canonical.f_vector(gp, (0.0,)).entries == gp.f.entries

    def test_boundary_of_feasible_interval(self, gp):
        assert canonical.g_matrix(gp, (-53.0 / 3.0,)).entry(0, 0) == pytest.approx(0.0, abs=1e-12)


class TestDualValue:
    def test_at_certified_point(self, gp):
        assert canonical.dual_value(gp, (-15.0,)) == pytest.approx(3.0, abs=1e-12)

    def test_at_minus_nine(self, gp):
        assert canonical.dual_value(gp, (-9.0,)) == pytest.approx(-150.0 / 13.0, abs=1e-10)

    def test_pure_conjugate_when_forcing_vanishes(self):
        pr = make_problem(A=1.0, f=0.0, C=0.0, b=0.0, c=0.0, a=1.0, beta=0.0)
        assert canonical.dual_value(pr, (1.0,)) == pytest.approx(-0.25, abs=1e-14)

    def test_closed_form_reproduction_at_1000_samples(self, gp):
        rng = Lcg(11)
        worst = 0.0
        for _ in range(1000):
            sigma = rng.uniform(-53.0 / 3.0 + 1e-3, 40.0)
            a = canonical.dual_value(gp, (sigma,))
            b = gp_dual_closed_form(sigma)
            worst = max(worst, abs(a - b) / (1.0 + abs(b)))
        assert worst <= 1e-10


class TestDualGradient:
    def test_vanishes_at_certified_point(self, gp):
        grad = canonical.dual_gradient(gp, (-15.0,))
        assert abs(grad[0]) <= 1e-10
        # Both envelope pieces individually: measure at t=3 and conjugate slope.
        assert canonical.lambda_eval(gp, (3.0,))[0] == pytest.approx(-1.0, abs=1e-12)
        assert canonical.conjugate_gradient(gp.V, (-15.0,))[0] == pytest.approx(-1.0, abs=1e-12)

    def test_matches_finite_differences(self, gp):
        rng = Lcg(12)
        for _ in range(20):
            sigma = rng.uniform(-53.0 / 3.0 + 0.5, 40.0)
            analytic = canonical.dual_gradient(gp, (sigma,))[0]
            h = 1e-5 * (1.0 + abs(sigma))
            fd = (
                canonical.dual_value(gp, (sigma + h,))
                - canonical.dual_value(gp, (sigma - h,))
            ) / (2.0 * h)
            assert analytic == pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_zero_at_constructed_stationary_point(self):
        # With no coupling (C=0, b=0) the gradient is c - (sigma - beta)/(2a),
        # which vanishes exactly at sigma = 2 a c + beta.
        pr = make_problem(A=1.0, f=0.0, C=0.0, b=0.0, c=1.5, a=1.0, beta=0.0)
        assert canonical.dual_gradient(pr, (3.0,)) == pytest.approx((0.0,), abs=1e-14)

    def test_singular_g_raises(self, gp):
        with pytest.raises(SingularMatrixError):
            canonical.dual_gradient(gp, (-53.0 / 3.0,))


class TestComplementary:
    def test_equality_chain_at_critical_pair(self, gp):
        xi = canonical.complementary_value(gp, (3.0,), (-15.0,))
        assert xi == pytest.approx(canonical.primal_value(gp, (3.0,)), abs=1e-10)
        assert xi == pytest.approx(canonical.dual_value(gp, (-15.0,)), abs=1e-10)

    def test_at_frozen_primal_point(self, gp):
        # Lambda(0) = -2 and U(0) = 0, so Xi(0, s) = -V*(s) - 2 s.
        for sigma in (-15.0, -5.0, 0.0, 7.5):
            expected = -canonical.conjugate_value(gp.V, (sigma,)) - 2.0 * sigma
            assert canonical.complementary_value(gp, (0.0,), (sigma,)) == pytest.approx(
                expected, abs=1e-12
            )

    def test_zero_problem(self):
        pr = make_problem(A=0.0, f=0.0, C=0.0, b=0.0, c=0.0, a=1.0, beta=0.0)
        assert canonical.complementary_value(pr, (4.0,), (0.0,)) == 0.0


class TestRecoverPrimal:
    def test_certified_point(self, gp):
        assert canonical.recover_primal(gp, (-15.0,))[0] == pytest.approx(3.0, abs=1e-12)

    def test_at_zero(self, gp):
        assert canonical.recover_primal(gp, (0.0,))[0] == pytest.approx(84.0 / 53.0, abs=1e-12)

    def test_unconstrained_quadratic(self):
        pr = make_problem(A=1.0, f=1.0, C=0.0, b=0.0, c=0.0, a=1.0, beta=0.0)
        assert canonical.recover_primal(pr, (0.0,))[0] == pytest.approx(1.0, abs=1e-14)


class TestPositiveDomain:
    def test_certified_point_is_interior(self, gp):
        ok, margin = canonical.in_positive_domain(gp, (-15.0,))
        assert ok and margin == pytest.approx(16.0 / 3.0, abs=1e-12)

    def test_outside(self, gp):
        ok, margin = canonical.in_positive_domain(gp, (-20.0,))
        assert not ok and margin < 0

    def test_boundary(self, gp):
        ok, margin = canonical.in_positive_domain(gp, (-53.0 / 3.0,))
        assert ok and abs(margin) <= 1e-9

    def test_spurious_primal_critical_points_are_rejected(self, gp):
        # The other critical points of the quartic, t = 0 and t = 1, map
        # through sigma = 6 xi - 9 to exactly -21 and -31: both infeasible.
        for t, expected_sigma in ((Fraction(0), -21), (Fraction(1), -31)):
            xi = t * t - Fraction(8, 3) * t - 2
            sigma = 6 * xi - 9
            assert sigma == expected_sigma
            ok, _ = canonical.in_positive_domain(gp, (float(sigma),))
            assert not ok


class TestDualityGap:
    def test_zero_at_critical_pair(self, gp):
        gap_px, gap_xd = canonical.duality_gap(gp, (3.0,), (-15.0,))
        assert gap_px <= 1e-8 * 4 and gap_xd <= 1e-8 * 4

    def test_positive_at_noncritical_primal(self, gp):
        gap_px, _ = canonical.duality_gap(gp, (0.0,), (-15.0,))
        assert gap_px > 1.0  # |30 - Xi(0, -15)| is large

    def test_degenerate_zero_problem(self):
        pr = make_problem(A=0.0, f=0.0, C=0.0, b=0.0, c=0.0, a=1.0, beta=0.0)
        assert canonical.duality_gap(pr, (0.0,), (0.0,)) == (0.0, 0.0)

    def test_propagates_column_space_violation(self):
        # Singular G with F outside its column space: A=0, C=0 (so G == 0), f != 0.
        pr = make_problem(A=0.0, f=1.0, C=0.0, b=0.0, c=0.0, a=1.0, beta=0.0)
        with pytest.raises(ColumnSpaceViolation):
            canonical.duality_gap(pr, (0.0,), (0.0,))


class TestWeakDualityAndConcavity:
    def test_weak_duality_sampling(self, gp):
        rng = Lcg(13)
        sigmas = [rng.uniform(-53.0 / 3.0 + 1e-6, 40.0) for _ in range(100)]
        ts = [rng.uniform(-10.0, 10.0) for _ in range(100)]
        max_dual = max(canonical.dual_value(gp, (s,)) for s in sigmas)
        min_primal = min(canonical.primal_value(gp, (t,)) for t in ts)
        assert max_dual <= min_primal + 1e-8

    def test_midpoint_concavity(self, gp):
        rng = Lcg(14)
        for _ in range(200):
            a = rng.uniform(-53.0 / 3.0 + 1e-3, 40.0)
            b = rng.uniform(-53.0 / 3.0 + 1e-3, 40.0)
            mid = canonical.dual_value(gp, (0.5 * (a + b),))
            avg = 0.5 * (canonical.dual_value(gp, (a,)) + canonical.dual_value(gp, (b,)))
            assert mid >= avg - 1e-9


class TestPrimalPolynomial:
    def test_matches_primal_value_on_samples(self, gp):
        poly = canonical.primal_polynomial(gp)
        rng = Lcg(15)
        for _ in range(50):
            t = rng.uniform(-6.0, 6.0)
            assert poly.eval((t,)) == pytest.approx(
                canonical.primal_value(gp, (t,)), rel=1e-9, abs=1e-9
            )

    def test_coefficients_match_quartic_to_rounding(self, gp):
        # The problem stores 106/3 and -8/3 as floats, so the reconstruction
        # differs from the exact quartic only at float-representation level.
        diff = canonical.primal_polynomial(gp) - gp_g()
        assert all(abs(float(c)) <= 1e-12 for c in diff.terms.values())


class TestDualPoint:
    def test_carries_feasibility_margin(self, gp):
        point = canonical.dual_point(gp, (-15.0,))
        assert point.sigma == (-15.0,)
        assert point.g_margin == pytest.approx(16.0 / 3.0, abs=1e-12)


# -- Legendre relations as properties ----------------------------------------

a_values = st.floats(0.1, 8.0, allow_nan=False)
beta_values = st.floats(-10.0, 10.0, allow_nan=False)
sigma_values = st.floats(-30.0, 30.0, allow_nan=False)


@given(a_values, beta_values, sigma_values)
def test_conjugation_involution(a, beta, sigma):
    V = canonical.ConvexQuadV(((a, beta),))
    xi = canonical.conjugate_gradient(V, (sigma,))[0]
    back = 2.0 * a * xi + beta
    assert back == pytest.approx(sigma, rel=1e-12, abs=1e-12)


@given(
    st.fractions(min_value="1/10", max_value=8, max_denominator=40),
    st.fractions(min_value=-10, max_value=10, max_denominator=40),
    st.fractions(min_value=-30, max_value=30, max_denominator=40),
)
def test_conjugation_involution_exact_in_rationals(a, beta, sigma):
    # The same relation carried out in Fraction arithmetic is an identity.
    xi = (sigma - beta) / (2 * a)
    assert 2 * a * xi + beta == sigma
    assert math.isclose(float(xi), canonical.conjugate_gradient(
        canonical.ConvexQuadV(((float(a), float(beta)),)), (float(sigma),)
    )[0], rel_tol=1e-12, abs_tol=1e-12)


@given(a_values, beta_values, st.floats(-10.0, 10.0, allow_nan=False))
def test_conjugate_pairing_on_gradient_graph(a, beta, xi):
    V = canonical.ConvexQuadV(((a, beta),))
    sigma = 2.0 * a * xi + beta
    lhs = V.value((xi,)) + canonical.conjugate_value(V, (sigma,))
    rhs = xi * sigma
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

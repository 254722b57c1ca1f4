"""End-to-end pipelines for the two polynomial benchmarks.

Goldstein-Price decouples: under (s, t) = (x + y, 2x - 3y) the objective
factors as h(s) * g(t) with

    h(s) = 1 + (s + 1)^2 (3 s^2 - 14 s + 19)   (quartic, min 1 at s = -1)
    g(t) = 30 + t^2 (3 t^2 - 16 t + 18)        (quartic, min 3 at t = 3)

h is minimized by enumerating every real root of h'; g goes through the
generic canonical machinery with measure t^2 - (8/3) t - 2 and
V(xi) = 3 xi^2 - 9 xi, whose dual is maximized at sigma = -15.  Both
minima are strictly positive, which is what justifies
min (h * g) = (min h)(min g); the decomposition and the canonical form are
verified as exact rational identities at construction time.

Three Hump Camel (2x^2 - 1.05x^4 + x^6/6 + xy + y^2) needs two staged
measures, xi1 = x^3 - (16/5) x then xi2 = x^2 + 5 sigma1 x, because the
sextic cannot be reached by a single quadratic measure.  The staging makes
the effective G depend on sigma1^2, outside the affine-G assumption of the
generic dual, so this pipeline evaluates the resulting closed-form dual

    (-1250 s1^4 - 50 s1^2 (31 s2 - 105) + s2^2 (5 s2 + 13))
    / (240 (125 s1^2 - 5 s2 - 13))

directly over its PSD feasibility region {s2 >= 25 s1^2 - 13/5}, recovers
(x, y) from the 2x2 stationarity system, and checks the zero-gap equality
through the staged complementary function.  Both staging identities are
verified exactly in three-variable rational arithmetic (treating sigma1
as a polynomial variable).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import canonical, dual_solver, oracle
from .dual_solver import CriticalReport, SolverConfig
from .errors import (
    DomainViolation,
    IdentityViolation,
    LineSearchStalled,
    SingularMatrixError,
)
from .polynomial import MultiPoly, first_diff_term
from .smallmat import SymMatrix, Vector, is_psd

GP_BOX = oracle.Box((-2.0, -2.0), (2.0, 2.0))
THC_BOX = oracle.Box((-5.0, -5.0), (5.0, 5.0))

ORACLE_STARTS = 64
ORACLE_SEED = 42
ORACLE_AGREEMENT_TOL = 1e-4


@dataclass(frozen=True)
class GpDecomposition:
    T: tuple[tuple[Fraction, ...], ...]
    T_inv: tuple[tuple[Fraction, ...], ...]
    h: MultiPoly
    g: MultiPoly


@dataclass(frozen=True)
class ThcDual:
    """Closed-form dual evaluator plus its PSD feasibility matrix."""

    def value(self, s1: float, s2: float) -> float:
        return thc_dual(s1, s2)

    def matrix(self, s1: float, s2: float) -> SymMatrix:
        return thc_feasibility_matrix(s1, s2)

    def feasibility(self, s1: float, s2: float) -> tuple[bool, float]:
        return is_psd(self.matrix(s1, s2))


@dataclass(frozen=True)
class SolveReport:
    problem_name: str
    transformed_solution: tuple[float, ...]
    x_star: tuple[float, ...]
    value: float
    dual_report: CriticalReport
    oracle_value: float | None
    oracle_x: tuple[float, ...] | None
    oracle_agreement: bool | None


def _oracle_agrees(value: float, oracle_value: float) -> bool:
    return abs(value - oracle_value) <= ORACLE_AGREEMENT_TOL * (1.0 + abs(value))


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def gp_objective() -> MultiPoly:
    """Goldstein-Price, expanded exactly from its factored form."""
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    first = 1 + (x + y + 1) ** 2 * (19 - 14 * x + 3 * x**2 - 14 * y + 6 * x * y + 3 * y**2)
    second = 30 + (2 * x - 3 * y) ** 2 * (
        18 - 32 * x + 12 * x**2 + 48 * y - 36 * x * y + 27 * y**2
    )
    return first * second


@lru_cache(maxsize=None)
def thc_objective() -> MultiPoly:
    """Three Hump Camel Back: 2x^2 - (21/20)x^4 + (1/6)x^6 + xy + y^2."""
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    return (
        2 * x**2
        - Fraction(21, 20) * x**4
        + Fraction(1, 6) * x**6
        + x * y
        + y**2
    )


@lru_cache(maxsize=None)
def gp_h() -> MultiPoly:
    s = MultiPoly.variable(1, 0)
    return 1 + (s + 1) ** 2 * (3 * s**2 - 14 * s + 19)


@lru_cache(maxsize=None)
def gp_g() -> MultiPoly:
    t = MultiPoly.variable(1, 0)
    return 30 + t**2 * (3 * t**2 - 16 * t + 18)


# ---------------------------------------------------------------------------
# Goldstein-Price pipeline
# ---------------------------------------------------------------------------

_GP_T = ((Fraction(1), Fraction(1)), (Fraction(2), Fraction(-3)))
_GP_T_INV = (
    (Fraction(3, 5), Fraction(1, 5)),
    (Fraction(2, 5), Fraction(-1, 5)),
)


def _lift_to_pair(p: MultiPoly, slot: int) -> MultiPoly:
    """Embed a univariate polynomial into two variables at position slot."""
    terms = {}
    for (e,), coeff in p.terms.items():
        exps = [0, 0]
        exps[slot] = e
        terms[tuple(exps)] = coeff
    return MultiPoly.from_terms(2, terms)


@lru_cache(maxsize=None)
def gp_decompose() -> GpDecomposition:
    """The decoupling change of variables, verified exactly at build time."""
    h, g = gp_h(), gp_g()
    product_st = _lift_to_pair(h, 0) * _lift_to_pair(g, 1)
    # Substitute s = x + y, t = 2x - 3y and compare with the expansion.
    recombined = product_st.substitute_linear(_GP_T)
    if recombined != gp_objective():
        offender = first_diff_term(recombined, gp_objective())
        raise IdentityViolation(f"h(s)g(t) decoupling failed at monomial {offender}")
    for i in range(2):
        for j in range(2):
            acc = sum(_GP_T_INV[i][k] * _GP_T[k][j] for k in range(2))
            if acc != (1 if i == j else 0):
                raise IdentityViolation("T_inv is not the exact inverse of T")
    # Positivity of both factor minima is what licenses
    # min (h*g) = (min h)(min g); h, g alone being bounded below is not enough.
    for name, poly in (("h", h), ("g", g)):
        bound = max(10.0, 1.1 * oracle.cauchy_root_bound(poly.partial_derivative(0)))
        result = oracle.univariate_global(poly, (-bound, bound))
        if result.value <= 0:
            raise IdentityViolation(f"global minimum of {name} is not strictly positive")
    return GpDecomposition(T=_GP_T, T_inv=_GP_T_INV, h=h, g=g)


def gp_solve_h() -> tuple[float, float, list[tuple[float, float]]]:
    """Global minimum of h by enumerating every critical point.

    Returns (s_star, h(s_star), [(root, h(root)), ...]).  h' factors as
    12 (s + 1)(s - 1)(s - 2): three critical points, not one, but the
    global minimum is still at s = -1 since h has a positive leading
    coefficient and h(-1) = 1 < h(2) = 28 < h(1) = 33.
    """
    h = gp_h()
    dh = h.partial_derivative(0)
    bound = max(10.0, 1.1 * oracle.cauchy_root_bound(dh))
    roots = oracle.derivative_roots(h, (-bound, bound))
    criticals = [(root, h.eval([root])) for root in roots]
    for root, value in criticals:
        if value <= 0:
            raise IdentityViolation(f"h({root}) = {value} <= 0 breaks the decoupling guard")
    s_star, h_star = min(criticals, key=lambda pair: pair[1])
    return s_star, h_star, criticals


@lru_cache(maxsize=None)
def gp_canonical_g() -> canonical.CanonicalProblem:
    """g(t) as a canonical problem: A = 106/3, f = 56, measure
    t^2 - (8/3) t - 2, V(xi) = 3 xi^2 - 9 xi.

    The identity V(Lambda(t)) - U(t) = g(t) is checked exactly before the
    float problem is returned.
    """
    t = MultiPoly.variable(1, 0)
    lam = t**2 - Fraction(8, 3) * t - 2
    v_of_lam = 3 * lam * lam - 9 * lam
    u = -Fraction(53, 3) * t**2 + 56 * t
    if v_of_lam - u != gp_g():
        offender = first_diff_term(v_of_lam - u, gp_g())
        raise IdentityViolation(f"canonical form of g differs at monomial {offender}")
    operator = canonical.QuadOperator(
        C=SymMatrix(1, (2.0,)),
        b=Vector((float(Fraction(-8, 3)),)),
        c=-2.0,
    )
    return canonical.CanonicalProblem(
        n=1,
        A=SymMatrix(1, (float(Fraction(106, 3)),)),
        f=Vector((56.0,)),
        ops=(operator,),
        V=canonical.ConvexQuadV(((3.0, -9.0),)),
    )


def gp_dual_closed_form(sigma: float) -> float:
    """The eliminated dual of the g(t) problem in closed form."""
    return (
        (-sigma * sigma - 18.0 * sigma - 81.0) / 12.0
        - (8.0 * sigma / 3.0 + 56.0) ** 2 / (4.0 * (sigma + 53.0 / 3.0))
        - 2.0 * sigma
    )


def gp_solve(
    cfg: SolverConfig | None = None,
    with_oracle: bool = True,
    oracle_starts: int = ORACLE_STARTS,
    oracle_seed: int = ORACLE_SEED,
    oracle_box: oracle.Box = GP_BOX,
    threads: int = 1,
) -> SolveReport:
    """Full Goldstein-Price pipeline.

    s* from root enumeration on h; (sigma*, t*) from the canonical dual of
    g; then (x*, y*) = ((3 s* + t*) / 5, (2 s* - t*) / 5) via the exact
    inverse transform, and the objective value h(s*) g(t*).
    """
    cfg = cfg or SolverConfig()
    dec = gp_decompose()
    s_star, h_star, _ = gp_solve_h()
    report = dual_solver.solve_canonical(gp_canonical_g(), cfg)
    t_star = report.x_bar[0]
    x_star = (3.0 * s_star + t_star) / 5.0
    y_star = (2.0 * s_star - t_star) / 5.0
    value = dec.h.eval([s_star]) * dec.g.eval([t_star])

    oracle_value = oracle_x = agreement = None
    if with_oracle:
        best = oracle.multistart(gp_objective(), oracle_box, oracle_starts, oracle_seed, threads=threads)
        oracle_value, oracle_x = best.value, best.x_best
        agreement = _oracle_agrees(value, oracle_value)
    return SolveReport(
        problem_name="gp",
        transformed_solution=(s_star, t_star),
        x_star=(x_star, y_star),
        value=value,
        dual_report=report,
        oracle_value=oracle_value,
        oracle_x=oracle_x,
        oracle_agreement=agreement,
    )


# ---------------------------------------------------------------------------
# Three Hump Camel pipeline
# ---------------------------------------------------------------------------

def _thc_level1_sides() -> tuple[MultiPoly, MultiPoly]:
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    lhs = 6 * thc_objective()
    v1 = (x**3 - Fraction(16, 5) * x) ** 2
    minus_u1 = Fraction(1, 10) * x**4 + Fraction(44, 25) * x**2 + 6 * x * y + 6 * y**2
    return lhs, v1 + minus_u1


def _thc_level2_sides() -> tuple[MultiPoly, MultiPoly]:
    # Variables (x, y, w) with w standing for the first dual component.
    x = MultiPoly.variable(3, 0)
    y = MultiPoly.variable(3, 1)
    w = MultiPoly.variable(3, 2)
    staged = (
        (x**3 - Fraction(16, 5) * x) * w
        - Fraction(1, 4) * w**2
        + Fraction(1, 10) * x**4
        + Fraction(44, 25) * x**2
        + 6 * x * y
        + 6 * y**2
    )  # six times the level-1 complementary function
    lhs = 10 * staged
    v2 = (x**2 + 5 * w * x) ** 2
    u2 = (
        25 * w**2 * x**2
        - Fraction(88, 5) * x**2
        + 32 * w * x
        - 60 * x * y
        - 60 * y**2
        + Fraction(5, 2) * w**2
    )
    return lhs, v2 - u2


def thc_level1_identity() -> bool:
    """6 * f(x, y) == (x^3 - 16x/5)^2 - U1(x, y), exactly."""
    lhs, rhs = _thc_level1_sides()
    return lhs == rhs


def thc_level2_identity() -> bool:
    """60 * staged complementary == (x^2 + 5wx)^2 - U2(x, y, w), exactly."""
    lhs, rhs = _thc_level2_sides()
    return lhs == rhs


def thc_identity_mismatch(level: int):
    """First offending monomial of the requested staging identity, or None."""
    lhs, rhs = _thc_level1_sides() if level == 1 else _thc_level2_sides()
    return first_diff_term(lhs, rhs)


def thc_feasibility_matrix(s1: float, s2: float) -> SymMatrix:
    return SymMatrix.from_rows(
        [
            [22.0 / 75.0 - (5.0 / 12.0) * s1 * s1 + s2 / 60.0, 0.5],
            [0.5, 1.0],
        ]
    )


def thc_feasibility(s1: float, s2: float) -> tuple[bool, float]:
    """PSD test of the dual feasibility matrix; since its (2,2) entry is 1,
    the region is exactly {s2 >= 25 s1^2 - 13/5}."""
    return is_psd(thc_feasibility_matrix(s1, s2))


def thc_dual(s1: float, s2: float) -> float:
    """Closed-form dual; requires strict feasibility (nonzero denominator)."""
    denominator = 125.0 * s1 * s1 - 5.0 * s2 - 13.0
    if denominator >= 0.0:
        raise DomainViolation(
            f"({s1}, {s2}) infeasible: needs s2 > 25 s1^2 - 13/5"
        )
    numerator = (
        -1250.0 * s1**4
        - 50.0 * s1 * s1 * (31.0 * s2 - 105.0)
        + s2 * s2 * (5.0 * s2 + 13.0)
    )
    return numerator / (240.0 * denominator)


def thc_equilibrium(s1: float, s2: float) -> tuple[float, float]:
    """Stationary (x, y) of the staged complementary function at (s1, s2):
    the 2x2 linear system with matrix [[2a, 1], [1, 2]],
    a = 22/75 - (5/12) s1^2 + s2/60, right side ((8/15) s1 - s1 s2 / 12, 0)."""
    alpha = 22.0 / 75.0 - (5.0 / 12.0) * s1 * s1 + s2 / 60.0
    det = 4.0 * alpha - 1.0
    scale = max(1.0, abs(alpha))
    if abs(det) <= 1e-12 * scale:
        raise SingularMatrixError(f"equilibrium system singular at ({s1}, {s2})")
    rhs = (8.0 / 15.0) * s1 - s1 * s2 / 12.0
    x = 2.0 * rhs / det
    y = -rhs / det
    return x, y


def thc_complementary(s1: float, s2: float, x: float, y: float) -> float:
    """The fully staged complementary function of (s1, s2, x, y)."""
    alpha = 22.0 / 75.0 - (5.0 / 12.0) * s1 * s1 + s2 / 60.0
    return (
        alpha * x * x
        + y * y
        + x * y
        + (s1 * s2 / 12.0 - (8.0 / 15.0) * s1) * x
        - s1 * s1 / 24.0
        - s2 * s2 / 240.0
    )


def thc_solve(
    cfg: SolverConfig | None = None,
    with_oracle: bool = True,
    oracle_starts: int = ORACLE_STARTS,
    oracle_seed: int = ORACLE_SEED,
    oracle_box: oracle.Box = THC_BOX,
    threads: int = 1,
) -> SolveReport:
    """Full Three Hump pipeline over the closed-form dual.

    Both staging identities are revalidated, the dual is maximized with
    finite-difference gradients, (x*, y*) comes from the equilibrium
    system, and the zero-gap equality is checked through the staged
    complementary function.
    """
    cfg = cfg or SolverConfig()
    if not thc_level1_identity():
        raise IdentityViolation(f"level-1 staging failed at {thc_identity_mismatch(1)}")
    if not thc_level2_identity():
        raise IdentityViolation(f"level-2 staging failed at {thc_identity_mismatch(2)}")
    dual = ThcDual()

    def value_fn(sigma: Sequence[float]) -> float:
        return dual.value(sigma[0], sigma[1])

    def feasibility_fn(sigma: Sequence[float]) -> tuple[bool, float]:
        return dual.feasibility(sigma[0], sigma[1])

    start = dual_solver.find_interior_start(value_fn, feasibility_fn, 2, cfg.interior_margin)
    stalled = False
    try:
        result = dual_solver.maximize_concave(value_fn, None, feasibility_fn, start, cfg)
    except LineSearchStalled as stall:
        result = dual_solver.AscentResult(
            stall.sigma, stall.value, stall.grad_norm, stall.iterations, False
        )
        stalled = True

    s1, s2 = result.sigma
    x_star, y_star = thc_equilibrium(s1, s2)
    value = thc_objective().eval([x_star, y_star])
    xi_value = thc_complementary(s1, s2, x_star, y_star)
    gap = max(abs(value - xi_value), abs(xi_value - result.value))
    _, psd_margin = thc_feasibility(s1, s2)
    certificate = dual_solver.classify_certificate(
        result.converged, stalled, psd_margin, gap, value, cfg
    )
    report = CriticalReport(
        sigma_star=result.sigma,
        x_bar=Vector((x_star, y_star)),
        primal=value,
        dual=result.value,
        gap=gap,
        grad_norm=result.grad_norm,
        psd_margin=psd_margin,
        certificate=certificate,
        iterations=result.iterations,
    )

    oracle_value = oracle_x = agreement = None
    if with_oracle:
        best = oracle.multistart(thc_objective(), oracle_box, oracle_starts, oracle_seed, threads=threads)
        oracle_value, oracle_x = best.value, best.x_best
        agreement = _oracle_agrees(value, oracle_value)
    return SolveReport(
        problem_name="thc",
        transformed_solution=result.sigma,
        x_star=(x_star, y_star),
        value=value,
        dual_report=report,
        oracle_value=oracle_value,
        oracle_x=oracle_x,
        oracle_agreement=agreement,
    )

"""Independent brute-force verification oracles.

Nothing here shares code with the dual pipeline it checks: grid scans and
multistart Newton refinement attack bivariate objectives directly, and
univariate global minimization isolates every real root of the derivative
by sign-change bracketing.  Results are bit-reproducible: the pseudo-random
stream is a fixed 64-bit linear congruential generator

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64

with the top 33 bits of each state mapped to [0, 1), and all reductions are
ordered by start index, so thread count and scheduling cannot change the
answer.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, NotConverged, RootIsolationFailure
from .polynomial import MultiPoly

LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
_MASK64 = (1 << 64) - 1


class Lcg:
    """The package-wide deterministic pseudo-random stream."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (LCG_MULTIPLIER * self.state + LCG_INCREMENT) & _MASK64
        return self.state

    def next_unit(self) -> float:
        """Uniform float in [0, 1) from the top 33 bits of the state."""
        return (self.next_u64() >> 31) / float(1 << 33)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_unit()


@dataclass(frozen=True)
class Box:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        if len(lower) != len(upper):
            raise DimensionMismatch("box bounds have different lengths")
        if any(lo >= hi for lo, hi in zip(lower, upper)):
            raise ValueError("box must satisfy lower < upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return len(self.lower)


@dataclass(frozen=True)
class OracleResult:
    x_best: tuple[float, ...]
    value: float
    n_evaluations: int
    refined: bool


def lattice_points(box: Box, n_per_axis: int) -> np.ndarray:
    """Row-major lattice including both endpoints; first axis varies slowest,
    so flat order is lexicographic in the point coordinates."""
    axes = [np.linspace(lo, hi, n_per_axis) for lo, hi in zip(box.lower, box.upper)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def grid_scan(p: MultiPoly, box: Box, n_per_axis: int) -> OracleResult:
    """Exhaustive lattice evaluation; ties resolve to the lexicographically
    smallest node because argmin takes the first minimum in lattice order."""
    if p.arity != box.dim:
        raise DimensionMismatch(f"polynomial arity {p.arity} vs box dim {box.dim}")
    if p.arity > 2:
        raise DimensionMismatch("grid scan supports at most 2 variables")
    if n_per_axis < 2:
        raise ValueError("need at least 2 nodes per axis")
    pts = lattice_points(box, n_per_axis)
    values = kernels.eval_poly_many(p, pts)
    best = int(np.argmin(values))
    return OracleResult(
        x_best=tuple(float(c) for c in pts[best]),
        value=float(values[best]),
        n_evaluations=len(pts),
        refined=False,
    )


def _refine_counted(
    p: MultiPoly, start: Sequence[float], tol: float, max_iter: int
) -> tuple[tuple[float, ...], int]:
    """Newton descent with exact polynomial derivatives and backtracking.

    Falls back to unit-length steepest descent when the Hessian is not
    positive definite; the accepted step length warms up the next line
    search so crawling along steep benchmark walls stays cheap.  Returns
    (point, number of objective evaluations).
    """
    n = p.arity
    grads = p.gradient()
    value_at = kernels.poly_evaluator(p)
    grad_at = [kernels.poly_evaluator(gp) for gp in grads]
    hess_at = [
        [kernels.poly_evaluator(grads[i].partial_derivative(j)) for j in range(i, n)]
        for i in range(n)
    ]
    x = [float(c) for c in start]
    evals = 0
    value = value_at(x)
    evals += 1
    steepest_step = 1.0
    for _ in range(max_iter):
        g = [fn(x) for fn in grad_at]
        gnorm = math.sqrt(sum(gi * gi for gi in g))
        if gnorm <= tol:
            return tuple(x), evals
        direction = None
        newton = False
        if n == 1:
            h00 = hess_at[0][0](x)
            if h00 > 0:
                direction = [-g[0] / h00]
                newton = True
        else:
            h00, h01 = hess_at[0][0](x), hess_at[0][1](x)
            h11 = hess_at[1][0](x)
            det = h00 * h11 - h01 * h01
            if h00 > 0 and det > 0:
                direction = [
                    -(h11 * g[0] - h01 * g[1]) / det,
                    -(h00 * g[1] - h01 * g[0]) / det,
                ]
                newton = True
        if direction is None or sum(gi * di for gi, di in zip(g, direction)) >= 0:
            direction = [-gi / gnorm for gi in g]
            newton = False
        slope = sum(gi * di for gi, di in zip(g, direction))
        step = 1.0 if newton else min(1.0, 4.0 * steepest_step)
        accepted = False
        while step >= 1e-16:
            trial = [xi + step * di for xi, di in zip(x, direction)]
            trial_value = value_at(trial)
            evals += 1
            if trial_value <= value + 1e-4 * step * slope:
                x, value = trial, trial_value
                accepted = True
                if not newton:
                    steepest_step = step
                break
            step *= 0.5
        if not accepted:
            # Flat to rounding along the descent direction: treat the
            # current point as converged if the gradient is already tiny.
            if gnorm <= max(tol, 1e-8 * (1.0 + abs(value))):
                return tuple(x), evals
            raise NotConverged(f"line search stalled at {tuple(x)} with |grad|={gnorm:.3e}")
    raise NotConverged(f"no convergence within {max_iter} iterations from {tuple(start)}")


def local_refine(
    p: MultiPoly, start: Sequence[float], tol: float = 1e-10, max_iter: int = 500
) -> tuple[float, ...]:
    """Polish a starting point to a critical point of p (see _refine_counted)."""
    if p.arity > 2:
        raise DimensionMismatch("local refinement supports at most 2 variables")
    point, _ = _refine_counted(p, start, tol, max_iter)
    return point


def multistart(
    p: MultiPoly,
    box: Box,
    k_starts: int,
    seed: int,
    tol: float = 1e-10,
    threads: int = 1,
) -> OracleResult:
    """Refine k seeded starts and keep the best by start index.

    The reduction is ordered by start index, so running with more threads
    cannot change the result; failed refinements are skipped.
    """
    if p.arity != box.dim or p.arity > 2:
        raise DimensionMismatch("multistart supports at most 2 variables matching the box")
    rng = Lcg(seed)
    starts = [
        tuple(rng.uniform(lo, hi) for lo, hi in zip(box.lower, box.upper))
        for _ in range(k_starts)
    ]

    def attempt(start: tuple[float, ...]):
        try:
            return _refine_counted(p, start, tol, 500)
        except NotConverged:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(attempt, starts))
    else:
        outcomes = [attempt(s) for s in starts]

    best_x: tuple[float, ...] | None = None
    best_value = math.inf
    total_evals = 0
    for outcome in outcomes:  # index order: deterministic reduction
        if outcome is None:
            continue
        point, evals = outcome
        total_evals += evals
        value = p.eval(point)
        total_evals += 1
        if value < best_value:
            best_value, best_x = value, point
    if best_x is None:
        raise NotConverged("every start failed to refine")
    return OracleResult(x_best=best_x, value=best_value, n_evaluations=total_evals, refined=True)


def derivative_roots(p: MultiPoly, interval: tuple[float, float], n_scan: int = 10_000) -> list[float]:
    """All real roots of p' in [lo, hi] via sign-change scan, bisection to
    width 1e-13, and Newton polish.  Ascending, deduplicated."""
    if p.arity != 1:
        raise DimensionMismatch("derivative root isolation requires a univariate polynomial")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    dp = p.partial_derivative(0)
    if dp.is_zero():
        return []
    d2p = dp.partial_derivative(0)

    xs = np.linspace(lo, hi, n_scan + 1)
    dvals = kernels.eval_poly_many(dp, xs.reshape(-1, 1))

    roots: list[float] = []
    for i, (x, val) in enumerate(zip(xs, dvals)):
        if val == 0.0:
            roots.append(float(x))
    for i in range(len(xs) - 1):
        a, b = float(xs[i]), float(xs[i + 1])
        fa, fb = float(dvals[i]), float(dvals[i + 1])
        if fa == 0.0 or fb == 0.0 or (fa < 0) == (fb < 0):
            continue
        while b - a > 1e-13:
            mid = 0.5 * (a + b)
            fm = dp.eval([mid])
            if fm == 0.0:
                a = b = mid
                break
            if (fm < 0) == (fa < 0):
                a, fa = mid, fm
            else:
                b = mid
        root = 0.5 * (a + b)
        for _ in range(4):  # Newton polish inside the bracket
            slope = d2p.eval([root])
            if slope == 0.0:
                break
            candidate = root - dp.eval([root]) / slope
            if not (a - 1e-10 <= candidate <= b + 1e-10):
                break
            root = candidate
        roots.append(root)

    roots.sort()
    merged: list[float] = []
    gap = 1e-10 * max(1.0, hi - lo)
    for r in roots:
        if not merged or r - merged[-1] > gap:
            merged.append(r)
    return merged


def univariate_global(
    p: MultiPoly, interval: tuple[float, float], n_scan: int = 10_000
) -> OracleResult:
    """Global minimum of a univariate polynomial on [lo, hi].

    Evaluates p at every isolated critical point and both endpoints.  As a
    defensive guard, the scan-node minimum of p must not undercut the
    returned minimum: local minima always put a sign change of p' between
    nodes, so an undercut means a bracket was missed.  The scan is then
    refined once at 10x resolution before RootIsolationFailure is raised.
    """
    if p.arity != 1:
        raise DimensionMismatch("univariate minimization requires arity 1")
    lo, hi = float(interval[0]), float(interval[1])

    def attempt(resolution: int) -> tuple[OracleResult, float]:
        roots = derivative_roots(p, (lo, hi), resolution)
        candidates = [lo, hi] + roots
        values = [p.eval([x]) for x in candidates]
        best_value, best_x = min(zip(values, candidates))
        xs = np.linspace(lo, hi, resolution + 1).reshape(-1, 1)
        node_min = float(np.min(kernels.eval_poly_many(p, xs)))
        result = OracleResult(
            x_best=(best_x,),
            value=best_value,
            n_evaluations=2 * (resolution + 1) + len(candidates),
            refined=True,
        )
        return result, node_min

    result, node_min = attempt(n_scan)
    if node_min < result.value - 1e-9 * (1.0 + abs(result.value)):
        result, node_min = attempt(10 * n_scan)
        if node_min < result.value - 1e-9 * (1.0 + abs(result.value)):
            raise RootIsolationFailure(
                f"lattice value {node_min} undercuts isolated minimum {result.value}"
            )
    return result


def cauchy_root_bound(p: MultiPoly) -> float:
    """Upper bound on |roots| of a univariate polynomial: 1 + max |a_i / a_lead|."""
    if p.arity != 1:
        raise DimensionMismatch("root bound requires arity 1")
    degree = p.total_degree()
    lead = p.coefficient((degree,))
    if degree == 0 or lead == 0:
        return 1.0
    biggest = max(
        (abs(coeff / lead) for exps, coeff in p.terms.items() if exps[0] != degree),
        default=0,
    )
    return 1.0 + float(biggest)

"""Exact sparse multivariate polynomial arithmetic over the rationals.

A polynomial in up to four variables is stored as a map from exponent
tuples to ``fractions.Fraction`` coefficients:

    x0^2 * x1 + 3/2   ->   {(2, 1): Fraction(1), (0, 0): Fraction(3, 2)}

Zero coefficients are never stored, all exponent tuples have the same
length (the arity), and equality is exact term-by-term comparison.  This
makes every algebraic decomposition identity in the package testable as
exact equality instead of a float tolerance, which is the whole point:
coefficients such as -1.05 or 53/3 are carried as -21/20 and 53/3.

Python integers are arbitrary precision, so coefficient arithmetic cannot
overflow; no width guard is needed.

Display and serialization use graded lexicographic order, highest total
degree first, ties broken by descending exponent tuple, so output is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch

MAX_ARITY = 4

Exponents = tuple[int, ...]
RationalLike = int | str | float | Fraction


def rat(value: RationalLike) -> Fraction:
    """Coerce ints, "p/q" strings, floats, and Fractions to an exact Fraction.

    Floats convert exactly (every float is a dyadic rational); strings must
    be "p" or "p/q" with integer parts.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational coefficient")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num.strip()), int(den.strip()))
        return Fraction(int(text))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def grlex_key(exponents: Exponents) -> tuple[int, Exponents]:
    """Sort key realizing graded lexicographic order."""
    return (sum(exponents), exponents)


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Immutable sparse polynomial over the rationals in ``arity`` variables."""

    arity: int
    terms: dict[Exponents, Fraction]

    def __post_init__(self) -> None:
        if not 1 <= self.arity <= MAX_ARITY:
            raise DimensionMismatch(f"arity must be in 1..{MAX_ARITY}, got {self.arity}")
        clean: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            exps = tuple(exps)
            if len(exps) != self.arity:
                raise DimensionMismatch(
                    f"exponent tuple {exps} has length {len(exps)}, expected {self.arity}"
                )
            if any(not isinstance(e, int) or e < 0 for e in exps):
                raise ValueError(f"exponents must be nonnegative integers, got {exps}")
            coeff = rat(coeff)
            if coeff != 0:
                clean[exps] = coeff
        object.__setattr__(self, "terms", clean)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, arity: int) -> "MultiPoly":
        return cls(arity, {})

    @classmethod
    def constant(cls, arity: int, value: RationalLike) -> "MultiPoly":
        return cls(arity, {(0,) * arity: rat(value)})

    @classmethod
    def variable(cls, arity: int, index: int) -> "MultiPoly":
        if not 0 <= index < arity:
            raise DimensionMismatch(f"variable index {index} out of range for arity {arity}")
        exps = [0] * arity
        exps[index] = 1
        return cls(arity, {tuple(exps): Fraction(1)})

    @classmethod
    def from_terms(cls, arity: int, terms: Mapping[Sequence[int], RationalLike]) -> "MultiPoly":
        return cls(arity, {tuple(e): rat(c) for e, c in terms.items()})

    # -- ring operations ----------------------------------------------------

    def _check_same_arity(self, other: "MultiPoly") -> None:
        if self.arity != other.arity:
            raise DimensionMismatch(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "MultiPoly | RationalLike") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.arity, other)
        self._check_same_arity(other)
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            out[exps] = out.get(exps, Fraction(0)) + coeff
        return MultiPoly(self.arity, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return self.scale(-1)

    def __sub__(self, other: "MultiPoly | RationalLike") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.arity, other)
        return self + (-other)

    def __rsub__(self, other: RationalLike) -> "MultiPoly":
        return MultiPoly.constant(self.arity, other) - self

    def __mul__(self, other: "MultiPoly | RationalLike") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check_same_arity(other)
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                out[exps] = out.get(exps, Fraction(0)) + c1 * c2
        return MultiPoly(self.arity, out)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "MultiPoly":
        if not isinstance(power, int) or power < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = MultiPoly.constant(self.arity, 1)
        for _ in range(power):
            result = result * self
        return result

    def scale(self, factor: RationalLike) -> "MultiPoly":
        factor = rat(factor)
        return MultiPoly(self.arity, {e: c * factor for e, c in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    # -- calculus -----------------------------------------------------------

    def partial_derivative(self, var: int) -> "MultiPoly":
        """Formal partial derivative with respect to variable ``var``."""
        if not 0 <= var < self.arity:
            raise DimensionMismatch(f"variable index {var} out of range for arity {self.arity}")
        out: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            lowered = list(exps)
            lowered[var] = e - 1
            out[tuple(lowered)] = coeff * e
        return MultiPoly(self.arity, out)

    def gradient(self) -> tuple["MultiPoly", ...]:
        return tuple(self.partial_derivative(v) for v in range(self.arity))

    # -- substitution -------------------------------------------------------

    def substitute_linear(
        self,
        matrix: Sequence[Sequence[RationalLike]],
        shift: Sequence[RationalLike] | None = None,
    ) -> "MultiPoly":
        """Compose with an affine change of variables: p(M @ u + d).

        ``matrix`` has one row per original variable, one column per new
        variable; ``shift`` defaults to zero.  All arithmetic is exact.
        """
        if len(matrix) != self.arity:
            raise DimensionMismatch(
                f"matrix has {len(matrix)} rows, polynomial arity is {self.arity}"
            )
        widths = {len(row) for row in matrix}
        if len(widths) != 1:
            raise DimensionMismatch("matrix rows have unequal lengths")
        new_arity = widths.pop()
        if not 1 <= new_arity <= MAX_ARITY:
            raise DimensionMismatch(f"target arity {new_arity} out of range 1..{MAX_ARITY}")
        if shift is None:
            shift = [0] * self.arity
        if len(shift) != self.arity:
            raise DimensionMismatch(f"shift has length {len(shift)}, expected {self.arity}")

        # Linear image of each original variable in the new variables.
        images: list[MultiPoly] = []
        for i in range(self.arity):
            img = MultiPoly.constant(new_arity, shift[i])
            for j in range(new_arity):
                coeff = rat(matrix[i][j])
                if coeff != 0:
                    img = img + MultiPoly.variable(new_arity, j).scale(coeff)
            images.append(img)

        # Cache powers of each image up to its maximum needed exponent.
        max_exp = [0] * self.arity
        for exps in self.terms:
            for i, e in enumerate(exps):
                max_exp[i] = max(max_exp[i], e)
        powers: list[list[MultiPoly]] = []
        for i in range(self.arity):
            pows = [MultiPoly.constant(new_arity, 1)]
            for _ in range(max_exp[i]):
                pows.append(pows[-1] * images[i])
            powers.append(pows)

        result = MultiPoly.zero(new_arity)
        for exps, coeff in self.terms.items():
            term = MultiPoly.constant(new_arity, coeff)
            for i, e in enumerate(exps):
                if e:
                    term = term * powers[i][e]
            result = result + term
        return result

    # -- evaluation ---------------------------------------------------------

    def eval(self, point: Sequence[float]) -> float:
        """Evaluate at a float point."""
        if len(point) != self.arity:
            raise DimensionMismatch(f"point has length {len(point)}, expected {self.arity}")
        exps_list, coeffs = self._float_terms()
        total = 0.0
        for exps, coeff in zip(exps_list, coeffs):
            term = coeff
            for v in range(self.arity):
                x = point[v]
                for _ in range(exps[v]):
                    term *= x
            total += term
        return total

    def eval_exact(self, point: Sequence[RationalLike]) -> Fraction:
        """Evaluate at a rational point, exactly."""
        if len(point) != self.arity:
            raise DimensionMismatch(f"point has length {len(point)}, expected {self.arity}")
        values = [rat(x) for x in point]
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for v, e in enumerate(exps):
                if e:
                    term *= values[v] ** e
            total += term
        return total

    def _float_terms(self) -> tuple[list[Exponents], list[float]]:
        cached = getattr(self, "_float_cache", None)
        if cached is None:
            exps_list = self.sorted_exponents()
            coeffs = [float(self.terms[e]) for e in exps_list]
            cached = (exps_list, coeffs)
            object.__setattr__(self, "_float_cache", cached)
        return cached

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Term data as (coeffs float64 [T], exponents int64 [T, arity]) for
        the batch-evaluation kernels, in graded-lex order."""
        cached = getattr(self, "_array_cache", None)
        if cached is None:
            exps_list, coeffs = self._float_terms()
            if exps_list:
                exps = np.array(exps_list, dtype=np.int64)
                cfs = np.array(coeffs, dtype=np.float64)
            else:
                exps = np.zeros((0, self.arity), dtype=np.int64)
                cfs = np.zeros(0, dtype=np.float64)
            cached = (cfs, exps)
            object.__setattr__(self, "_array_cache", cached)
        return cached

    # -- queries and display --------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=0)

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def sorted_exponents(self) -> list[Exponents]:
        return sorted(self.terms, key=grlex_key, reverse=True)

    def sorted_terms(self) -> Iterator[tuple[Exponents, Fraction]]:
        for exps in self.sorted_exponents():
            yield exps, self.terms[exps]

    def to_text(self) -> str:
        """One line per term: "num/den e1 e2 ... ek", graded-lex order.

        The zero polynomial serializes to the empty string.
        """
        lines = []
        for exps, coeff in self.sorted_terms():
            lines.append(
                f"{coeff.numerator}/{coeff.denominator} " + " ".join(str(e) for e in exps)
            )
        return "\n".join(lines)

    def __repr__(self) -> str:
        if self.is_zero():
            return f"MultiPoly(arity={self.arity}, 0)"
        parts = []
        for exps, coeff in self.sorted_terms():
            mono = "*".join(
                f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(exps) if e
            )
            parts.append(f"{coeff}{'*' + mono if mono else ''}")
        return f"MultiPoly(arity={self.arity}, {' + '.join(parts)})"


def first_diff_term(p: MultiPoly, q: MultiPoly) -> Exponents | None:
    """First monomial (graded-lex order) on which two polynomials differ,
    or None when they are equal."""
    diff = p - q
    if diff.is_zero():
        return None
    return diff.sorted_exponents()[0]

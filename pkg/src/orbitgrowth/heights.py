"""Logarithmic Weil heights over Q, computed exactly.

Everything here works with the base field Q, where the places are the
archimedean absolute value and one p-adic absolute value per prime p
(normalized by |p|_p = 1/p). The height of a projective point is the sum
over all places of the max log absolute value of its coordinates. For a
coordinate vector scaled to a primitive integer vector (gcd 1), every
finite place contributes 0 and the height collapses to log max|x_i|.
That integer max is kept alongside the float log so that all comparisons
that matter can be done in exact integer arithmetic.

Scalars are `fractions.Fraction` throughout: always in lowest terms with
positive denominator, which is exactly the normalization the local
absolute values expect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence, Union

from sympy import factorint

Rational = Union[Fraction, int]


class AllZeroError(ValueError):
    """Raised when a projective coordinate vector is identically zero."""


class ZeroPolynomialError(ValueError):
    """Raised when asked for the height of the zero polynomial."""


class ZeroInputError(ValueError):
    """Raised when a nonzero rational is required."""


def parse_rational(text: str) -> Fraction:
    """Parse 'a/b' or 'a' into a Fraction in lowest terms."""
    return Fraction(text.strip())


def format_rational(value: Rational) -> str:
    """Canonical 'num/den' form, denominator always present ('5/1')."""
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def _ln_positive_fraction(q: Fraction) -> float:
    # math.log on the components handles integers beyond float range
    return math.log(q.numerator) - math.log(q.denominator)


@dataclass(frozen=True)
class HeightValue:
    """A height as an exact positive integer plus its natural log.

    `multiplicative` is the max absolute value of the primitive integer
    coordinate vector, so `logarithmic = ln(multiplicative)` is the Weil
    height. Exact comparisons should use `multiplicative`.
    """

    multiplicative: int
    logarithmic: float

    @staticmethod
    def from_multiplicative(mult: int) -> "HeightValue":
        if mult < 1:
            raise ValueError(f"multiplicative height must be >= 1, got {mult}")
        return HeightValue(mult, math.log(mult))

    def __float__(self) -> float:
        return self.logarithmic


ZERO_HEIGHT = HeightValue(1, 0.0)


@dataclass(frozen=True)
class PlaceDecomposition:
    """Per-place data for a nonzero rational c.

    `finite_parts` maps primes p to the valuation v_p(c) (nonzero entries
    only); `archimedean_log` is ln|c|. The product formula says
    ln|c| - sum_p v_p(c) ln p = 0, which holds here as the integer
    identity |num| = prod p^{v_p} over positive valuations and
    den = prod p^{-v_p} over negative ones.
    """

    archimedean_log: float
    finite_parts: Dict[int, int]

    def verify_product_formula(self, c: Rational) -> bool:
        """Exact integer-level product formula check for c."""
        q = Fraction(c)
        num = 1
        den = 1
        for p, v in self.finite_parts.items():
            if v > 0:
                num *= p ** v
            else:
                den *= p ** (-v)
        return num == abs(q.numerator) and den == q.denominator


def normalize_projective(coords: Sequence[Rational]) -> list:
    """Scale a rational vector to a primitive integer vector.

    Result is proportional to the input, has overall gcd 1, and its first
    nonzero entry is positive. Raises AllZeroError on the zero vector.
    """
    if not coords:
        raise AllZeroError("empty coordinate vector")
    qs = [Fraction(c) for c in coords]
    if all(q == 0 for q in qs):
        raise AllZeroError("projective point needs a nonzero coordinate")
    denom_lcm = math.lcm(*(q.denominator for q in qs))
    ints = [q.numerator * (denom_lcm // q.denominator) for q in qs]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return ints


def height_projective(coords: Sequence[Rational]) -> HeightValue:
    """Weil height of a projective point with rational coordinates.

    Equals ln max|x_i| of the primitive integer representative; invariant
    under scaling by any nonzero rational.
    """
    ints = normalize_projective(coords)
    return HeightValue.from_multiplicative(max(abs(x) for x in ints))


def height_affine(point: Sequence[Rational]) -> HeightValue:
    """Affine height: projective height of [1 : x_1 : ... : x_r]."""
    return height_projective([Fraction(1), *point])


def height_rational(c: Rational) -> HeightValue:
    """Height of a single rational: ln max(|num|, den)."""
    q = Fraction(c)
    return HeightValue.from_multiplicative(max(abs(q.numerator), q.denominator))


def height_coefficients(coeffs: Sequence[Rational]) -> HeightValue:
    """Height of a coefficient vector viewed as a projective point."""
    return height_projective(coeffs)


def height_polynomial(poly) -> HeightValue:
    """Height of a polynomial: projective height of its coefficient vector.

    Accepts anything with a `coefficient_vector()` method (sparse
    multivariate or dense univariate polynomials) or a plain coefficient
    sequence. The value does not depend on the coefficient order.
    """
    if hasattr(poly, "coefficient_vector"):
        coeffs = poly.coefficient_vector()
    else:
        coeffs = list(poly)
    if not coeffs or all(Fraction(c) == 0 for c in coeffs):
        raise ZeroPolynomialError("zero polynomial has no height")
    return height_coefficients(coeffs)


def place_decomposition(c: Rational) -> PlaceDecomposition:
    """Factorization-based valuations of a nonzero rational at all places."""
    q = Fraction(c)
    if q == 0:
        raise ZeroInputError("place decomposition needs a nonzero rational")
    parts: Dict[int, int] = {}
    for p, e in factorint(abs(q.numerator)).items():
        parts[int(p)] = int(e)
    for p, e in factorint(q.denominator).items():
        parts[int(p)] = parts.get(int(p), 0) - int(e)
    parts = {p: v for p, v in parts.items() if v != 0}
    return PlaceDecomposition(_ln_positive_fraction(abs(q)), parts)


def sum_height_bound_multiplicative(terms: Sequence[Rational]) -> Fraction:
    """Exact multiplicative form of the height bound for a sum.

    The bound ln r + sum_v max_j log+|a_j|_v exponentiates to
    r * max(1, max|a_j|) * lcm(denominators): the archimedean place
    contributes max(1, max|a_j|), and each finite place p contributes
    p^(max_j v_p(den_j)), whose product over p is the denominator lcm.
    """
    if not terms:
        raise ValueError("need at least one term")
    qs = [Fraction(c) for c in terms]
    arch = max(Fraction(1), max(abs(q) for q in qs))
    denom_lcm = math.lcm(*(q.denominator for q in qs))
    return Fraction(len(qs)) * arch * denom_lcm


def sum_height_bound(terms: Sequence[Rational]) -> float:
    """Upper bound on h(sum of terms): ln r + sum_v max_j log+|a_j|_v.

    Guaranteed >= height_rational(sum(terms)).logarithmic whenever the sum
    is nonzero; use `sum_height_bound_multiplicative` for exact
    comparisons.
    """
    return _ln_positive_fraction(sum_height_bound_multiplicative(terms))

"""Dense univariate polynomials over Q (for approximants and progressions).

Coefficients are Fractions in ascending order with no trailing zeros;
the zero polynomial is the empty tuple and reports degree -1. Division
and gcd are over the field Q, with gcd normalized monic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

Rational = Union[Fraction, int]


class RationalPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Rational] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def constant(cls, value: Rational) -> "RationalPoly":
        return cls([value])

    @classmethod
    def monomial(cls, degree: int, coeff: Rational = 1) -> "RationalPoly":
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def leading(self) -> Fraction:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coefficient_vector(self) -> list:
        """Ascending coefficients (degree+1 entries); empty for zero."""
        return list(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalPoly([other])
        if not isinstance(other, RationalPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalPoly([other])
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "RationalPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        n = max(len(self.coeffs), len(rhs.coeffs))
        return RationalPoly(
            [self.coefficient(i) + rhs.coefficient(i) for i in range(n)]
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly([-c for c in self.coeffs])

    def __sub__(self, other) -> "RationalPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other) -> "RationalPoly":
        return (-self) + other

    def __mul__(self, other) -> "RationalPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        if not self.coeffs or not rhs.coeffs:
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(rhs.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(rhs.coeffs):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __divmod__(self, other) -> Tuple["RationalPoly", "RationalPoly"]:
        rhs = self._coerce(other)
        if rhs.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        quotient = [Fraction(0)] * max(0, len(self.coeffs) - len(rhs.coeffs) + 1)
        remainder = list(self.coeffs)
        lead = rhs.leading()
        d = rhs.degree
        while len(remainder) - 1 >= d and any(c != 0 for c in remainder):
            while remainder and remainder[-1] == 0:
                remainder.pop()
            if len(remainder) - 1 < d:
                break
            shift = len(remainder) - 1 - d
            factor = remainder[-1] / lead
            quotient[shift] = factor
            for i, b in enumerate(rhs.coeffs):
                remainder[shift + i] -= factor * b
            remainder.pop()
        return RationalPoly(quotient), RationalPoly(remainder)

    def __mod__(self, other) -> "RationalPoly":
        return divmod(self, other)[1]

    def __floordiv__(self, other) -> "RationalPoly":
        return divmod(self, other)[0]

    def scaled(self, factor: Rational) -> "RationalPoly":
        q = Fraction(factor)
        return RationalPoly([c * q for c in self.coeffs])

    def monic(self) -> "RationalPoly":
        if self.is_zero():
            return self
        return self.scaled(1 / self.leading())

    def shifted(self, k: int) -> "RationalPoly":
        """Multiply by t^k."""
        if self.is_zero():
            return self
        return RationalPoly([Fraction(0)] * k + list(self.coeffs))

    def truncated(self, order: int) -> "RationalPoly":
        """Reduce mod t^order."""
        return RationalPoly(self.coeffs[:order])

    def evaluate(self, x: Rational) -> Fraction:
        q = Fraction(x)
        total = Fraction(0)
        for c in reversed(self.coeffs):
            total = total * q + c
        return total

    def format(self, variable: str = "t") -> str:
        if not self.coeffs:
            return "0"
        pieces = []
        for e in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[e]
            if c == 0:
                continue
            if e == 0:
                body = str(abs(c))
            else:
                power = variable if e == 1 else f"{variable}^{e}"
                body = power if abs(c) == 1 else f"{abs(c)}*{power}"
            pieces.append(("-" if c < 0 else "+", body))
        sign, body = pieces[0]
        text = body if sign == "+" else f"-{body}"
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"RationalPoly({self.format()!r})"


def poly_gcd(a: RationalPoly, b: RationalPoly) -> RationalPoly:
    """Monic gcd over Q."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def convolve_coefficient(
    q: Sequence[Fraction], series: Sequence[Fraction], n: int
) -> Fraction:
    """Coefficient of t^n in Q(t) * F(t), with F given by its coefficients."""
    total = Fraction(0)
    for i, qi in enumerate(q):
        if qi == 0 or i > n:
            continue
        total += qi * series[n - i]
    return total

"""Sparse multivariate polynomials over Q and the expression parser.

Polynomials are stored as a map from exponent vectors (tuples of
nonnegative ints, one slot per variable) to nonzero Fraction
coefficients. The zero polynomial has an empty term map. Terms are
ordered graded-lexicographically (total degree first, then lex with the
first variable largest) wherever a deterministic order is needed:
formatting and coefficient-vector extraction.

Expression grammar (whitespace insignificant):

    expr     := term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := base ('^' nat)?
    base     := rational | var | '(' expr ')' | '-' factor
    rational := int ('/' posint)?

Unary minus binds looser than '^', so "-x^2" is -(x^2). Exponents must
fit an unsigned 32-bit integer; exceeding that, in parsing or in
arithmetic, is a hard error rather than silent wraparound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterator, Mapping, Sequence, Tuple, Union

Rational = Union[Fraction, int]
Exponents = Tuple[int, ...]

MAX_EXPONENT = 2**32 - 1


class ParseError(ValueError):
    """Syntax error with the 0-based position in the source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class UnknownVariableError(ParseError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown variable '{name}'", position)
        self.name = name


class NegativeExponentError(ParseError):
    def __init__(self, position: int):
        super().__init__("exponent must be a nonnegative integer", position)


class ExponentOverflowError(OverflowError):
    """Exponent exceeds the 32-bit bound."""


class ArityMismatchError(ValueError):
    """Point or polynomial dimension does not match."""


def _check_exponent(e: int) -> int:
    if e > MAX_EXPONENT:
        raise ExponentOverflowError(f"exponent {e} exceeds 32-bit bound")
    return e


def _grlex_key(exps: Exponents):
    return (sum(exps), exps)


class MultivariatePolynomial:
    """Immutable sparse polynomial in `arity` variables over Q."""

    __slots__ = ("_arity", "_terms")

    def __init__(self, arity: int, terms: Mapping[Exponents, Rational]):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        clean: Dict[Exponents, Fraction] = {}
        for exps, coeff in terms.items():
            if len(exps) != arity:
                raise ArityMismatchError(
                    f"exponent vector {exps} has length {len(exps)}, expected {arity}"
                )
            for e in exps:
                if e < 0:
                    raise ValueError(f"negative exponent in {exps}")
                _check_exponent(e)
            q = Fraction(coeff)
            if q != 0:
                clean[tuple(exps)] = q
        self._arity = arity
        self._terms = clean

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def terms(self) -> Mapping[Exponents, Fraction]:
        return MappingProxyType(self._terms)

    @classmethod
    def zero(cls, arity: int) -> "MultivariatePolynomial":
        return cls(arity, {})

    @classmethod
    def constant(cls, arity: int, value: Rational) -> "MultivariatePolynomial":
        return cls(arity, {(0,) * arity: Fraction(value)})

    @classmethod
    def variable(cls, arity: int, index: int) -> "MultivariatePolynomial":
        if not 0 <= index < arity:
            raise ArityMismatchError(f"variable index {index} out of range for arity {arity}")
        exps = [0] * arity
        exps[index] = 1
        return cls(arity, {tuple(exps): Fraction(1)})

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def total_degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        return max((sum(e) for e in self._terms), default=0)

    def has_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for c in self._terms.values())

    def sorted_terms(self) -> list:
        """Terms in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def coefficient_vector(self) -> list:
        """Coefficients in the deterministic term order (for heights)."""
        return [c for _, c in self.sorted_terms()]

    def coefficients(self) -> Iterator[Fraction]:
        return iter(self._terms.values())

    def _coerce(self, other) -> "MultivariatePolynomial":
        if isinstance(other, MultivariatePolynomial):
            if other._arity != self._arity:
                raise ArityMismatchError("polynomial arities differ")
            return other
        if isinstance(other, (int, Fraction)):
            return MultivariatePolynomial.constant(self._arity, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "MultivariatePolynomial":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        merged = dict(self._terms)
        for exps, coeff in rhs._terms.items():
            merged[exps] = merged.get(exps, Fraction(0)) + coeff
        return MultivariatePolynomial(self._arity, merged)

    __radd__ = __add__

    def __neg__(self) -> "MultivariatePolynomial":
        return MultivariatePolynomial(self._arity, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "MultivariatePolynomial":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other) -> "MultivariatePolynomial":
        return (-self) + other

    def __mul__(self, other) -> "MultivariatePolynomial":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        product: Dict[Exponents, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in rhs._terms.items():
                exps = tuple(_check_exponent(a + b) for a, b in zip(e1, e2))
                product[exps] = product.get(exps, Fraction(0)) + c1 * c2
        return MultivariatePolynomial(self._arity, product)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultivariatePolynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        _check_exponent(n * self.total_degree())
        result = MultivariatePolynomial.constant(self._arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultivariatePolynomial.constant(self._arity, other)
        if not isinstance(other, MultivariatePolynomial):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._arity, frozenset(self._terms.items())))

    def evaluate(self, point: Sequence[Rational]) -> Fraction:
        """Exact value at a rational point."""
        if len(point) != self._arity:
            raise ArityMismatchError(
                f"point has {len(point)} coordinates, polynomial expects {self._arity}"
            )
        qs = [Fraction(x) for x in point]
        total = Fraction(0)
        for exps, coeff in self._terms.items():
            value = coeff
            for x, e in zip(qs, exps):
                if e:
                    value *= x**e
            total += value
        return total

    def format(self, variables: Sequence[str]) -> str:
        """Human form in descending graded-lex order; parses back exactly."""
        if len(variables) != self._arity:
            raise ArityMismatchError("variable name count does not match arity")
        if not self._terms:
            return "0"
        pieces = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for name, e in zip(variables, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            magnitude = abs(coeff)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(magnitude), *factors])
            pieces.append(("-" if coeff < 0 else "+", body))
        sign, body = pieces[0]
        text = body if sign == "+" else f"-{body}"
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        names = [f"x{i + 1}" for i in range(self._arity)]
        return f"MultivariatePolynomial({self.format(names)!r})"


@dataclass(frozen=True)
class PolySelfMap:
    """Regular self-map of affine r-space: one polynomial per coordinate."""

    coordinates: Tuple[MultivariatePolynomial, ...]

    def __post_init__(self):
        if not self.coordinates:
            raise ArityMismatchError("a self-map needs at least one coordinate")
        r = len(self.coordinates)
        for poly in self.coordinates:
            if poly.arity != r:
                raise ArityMismatchError(
                    f"coordinate polynomial arity {poly.arity} != map dimension {r}"
                )

    @property
    def arity(self) -> int:
        return len(self.coordinates)

    def apply(self, point: Sequence[Rational]) -> Tuple[Fraction, ...]:
        if len(point) != self.arity:
            raise ArityMismatchError(
                f"point has {len(point)} coordinates, map expects {self.arity}"
            )
        qs = tuple(Fraction(x) for x in point)
        return tuple(poly.evaluate(qs) for poly in self.coordinates)


@dataclass(frozen=True)
class Observable:
    """Scalar polynomial observable on the same affine space as the map."""

    polynomial: MultivariatePolynomial

    @property
    def arity(self) -> int:
        return self.polynomial.arity

    def evaluate(self, point: Sequence[Rational]) -> Fraction:
        return self.polynomial.evaluate(point)


def apply_map(f: PolySelfMap, point: Sequence[Rational]) -> Tuple[Fraction, ...]:
    return f.apply(point)


def evaluate(poly: MultivariatePolynomial, point: Sequence[Rational]) -> Fraction:
    return poly.evaluate(point)


# --- parser -----------------------------------------------------------------

_TOKEN_INT = "int"
_TOKEN_NAME = "name"
_TOKEN_OP = "op"
_TOKEN_END = "end"


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append((_TOKEN_INT, text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((_TOKEN_NAME, text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append((_TOKEN_OP, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append((_TOKEN_END, "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = list(variables)
        self.index = {name: i for i, name in enumerate(variables)}
        self.arity = len(self.variables)

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol: str):
        kind, value, at = self.peek()
        if kind != _TOKEN_OP or value != symbol:
            raise ParseError(f"expected '{symbol}'", at)
        return self.advance()

    def parse(self) -> MultivariatePolynomial:
        poly = self.parse_expr()
        kind, value, at = self.peek()
        if kind != _TOKEN_END:
            raise ParseError(f"unexpected {value!r}", at)
        return poly

    def parse_expr(self) -> MultivariatePolynomial:
        poly = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == _TOKEN_OP and value in "+-":
                self.advance()
                rhs = self.parse_term()
                poly = poly + rhs if value == "+" else poly - rhs
            else:
                return poly

    def parse_term(self) -> MultivariatePolynomial:
        poly = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == _TOKEN_OP and value == "*":
                self.advance()
                poly = poly * self.parse_factor()
            else:
                return poly

    def parse_factor(self) -> MultivariatePolynomial:
        base = self.parse_base()
        kind, value, _ = self.peek()
        if kind == _TOKEN_OP and value == "^":
            self.advance()
            kind, value, at = self.peek()
            if kind == _TOKEN_OP and value == "-":
                raise NegativeExponentError(at)
            if kind != _TOKEN_INT:
                raise ParseError("expected integer exponent after '^'", at)
            self.advance()
            exponent = int(value)
            if exponent > MAX_EXPONENT:
                raise ExponentOverflowError(f"exponent {exponent} exceeds 32-bit bound")
            return base**exponent
        return base

    def parse_base(self) -> MultivariatePolynomial:
        kind, value, at = self.peek()
        if kind == _TOKEN_OP and value == "-":
            self.advance()
            return -self.parse_factor()
        if kind == _TOKEN_OP and value == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        if kind == _TOKEN_INT:
            self.advance()
            numerator = int(value)
            kind, value, at = self.peek()
            if kind == _TOKEN_OP and value == "/":
                self.advance()
                kind, value, at = self.peek()
                if kind != _TOKEN_INT:
                    raise ParseError("expected positive integer denominator", at)
                self.advance()
                denominator = int(value)
                if denominator == 0:
                    raise ParseError("denominator must be positive", at)
                return MultivariatePolynomial.constant(
                    self.arity, Fraction(numerator, denominator)
                )
            return MultivariatePolynomial.constant(self.arity, numerator)
        if kind == _TOKEN_NAME:
            self.advance()
            if value not in self.index:
                raise UnknownVariableError(value, at)
            return MultivariatePolynomial.variable(self.arity, self.index[value])
        raise ParseError("expected a rational, variable, '(' or '-'", at)


def parse_polynomial(text: str, variables: Sequence[str]) -> MultivariatePolynomial:
    """Parse an expression into canonical sparse form.

    `variables` fixes both the arity and the exponent-slot order;
    parse(format(P)) == P for every polynomial P.
    """
    if len(set(variables)) != len(variables):
        raise ValueError("duplicate variable names")
    return _Parser(text, variables).parse()

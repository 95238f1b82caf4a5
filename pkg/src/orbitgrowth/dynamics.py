"""Orbit iteration with growth guards and the orbit generating series.

The central object is the coefficient series c_n = lambda(f^n(P)): the
formal power series whose n-th coefficient is the observable evaluated on
the n-th orbit point. Iteration is exact over Q. A per-coordinate bit
budget converts runaway (doubly exponential) growth into a typed overflow
signal carrying the partial prefix, rather than an unbounded computation.

Every denominator appearing in a coefficient is supported on the series'
bad primes: the primes dividing a coefficient denominator of the map, the
observable, or a coordinate denominator of the starting point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

from sympy import factorint

from .heights import (
    HeightValue,
    format_rational,
    height_affine,
    height_rational,
    parse_rational,
)
from .polyexpr import ArityMismatchError, Observable, PolySelfMap

DEFAULT_BIT_BUDGET = 1_000_000

Point = Tuple[Fraction, ...]


class InsufficientDataError(ValueError):
    """Not enough usable indices for the requested estimate."""


class NonIntegerOrbitError(ValueError):
    """The trivial counting bound only applies to integer orbits."""


class RepeatedPointError(ValueError):
    def __init__(self, i: int, j: int):
        super().__init__(f"orbit points at indices {i} and {j} coincide")
        self.i = i
        self.j = j


@dataclass(frozen=True)
class OrbitOverflow:
    """The next point would exceed the bit budget at index `index`."""

    index: int
    bits: int


class OrbitOverflowError(RuntimeError):
    """Raised when a computation needs orbit data beyond the bit budget."""

    def __init__(self, overflow: OrbitOverflow):
        super().__init__(
            f"orbit coordinate would need {overflow.bits} bits at index {overflow.index}"
        )
        self.overflow = overflow


@dataclass(frozen=True)
class OrbitRecord:
    index: int
    point: Point
    point_height: HeightValue
    observable_value: Fraction
    observable_height: HeightValue


@dataclass
class Orbit:
    """Contiguous orbit prefix, plus the overflow marker if the budget tripped."""

    records: List[OrbitRecord]
    overflow: Optional[OrbitOverflow]


def first_coordinate_observable(arity: int) -> Observable:
    from .polyexpr import MultivariatePolynomial

    return Observable(MultivariatePolynomial.variable(arity, 0))


def _point_bits(point: Sequence[Fraction]) -> int:
    return max(
        max(q.numerator.bit_length(), q.denominator.bit_length()) for q in point
    )


def _make_record(n: int, point: Point, observable: Observable) -> OrbitRecord:
    value = observable.evaluate(point)
    return OrbitRecord(n, point, height_affine(point), value, height_rational(value))


def iterate(
    f: PolySelfMap,
    start: Sequence[Union[Fraction, int]],
    steps: int,
    bit_budget: int = DEFAULT_BIT_BUDGET,
    observable: Optional[Observable] = None,
) -> Orbit:
    """Iterate f from `start`, recording points, heights, and observable values.

    Returns records for indices 0..steps, or a shorter prefix with an
    OrbitOverflow marker if some coordinate of the next point would exceed
    `bit_budget` bits in numerator or denominator. The observable defaults
    to the first-coordinate projection.
    """
    if len(start) != f.arity:
        raise ArityMismatchError(
            f"start point has {len(start)} coordinates, map expects {f.arity}"
        )
    if observable is None:
        observable = first_coordinate_observable(f.arity)
    elif observable.arity != f.arity:
        raise ArityMismatchError("observable arity does not match the map")
    point = tuple(Fraction(x) for x in start)
    if _point_bits(point) > bit_budget:
        raise ValueError("starting point already exceeds the bit budget")
    records = [_make_record(0, point, observable)]
    overflow = None
    for n in range(1, steps + 1):
        nxt = f.apply(point)
        bits = _point_bits(nxt)
        if bits > bit_budget:
            overflow = OrbitOverflow(n, bits)
            break
        point = nxt
        records.append(_make_record(n, point, observable))
    return Orbit(records, overflow)


def denominator_primes(
    f: PolySelfMap, observable: Observable, start: Sequence[Union[Fraction, int]]
) -> frozenset:
    """Primes dividing any coefficient or coordinate denominator of the model."""
    denominators = set()
    for poly in (*f.coordinates, observable.polynomial):
        for coeff in poly.coefficients():
            denominators.add(coeff.denominator)
    for x in start:
        denominators.add(Fraction(x).denominator)
    primes = set()
    for d in denominators:
        if d > 1:
            primes.update(int(p) for p in factorint(d))
    return frozenset(primes)


class CoefficientSeries:
    """Cached coefficient oracle for the series sum c_n t^n.

    Orbit-backed series extend on demand under the bit budget;
    `coefficient(n)` raises OrbitOverflowError beyond an overflow.
    Series may also wrap a fixed coefficient list or the expansion of a
    rational function P/Q with Q(0) = 1 (used by recovery tests); those
    have no orbit source and no arity.
    """

    def __init__(
        self,
        coefficients: List[Fraction],
        bad_primes: frozenset,
        *,
        extend: Optional[Callable[[int], Optional[Fraction]]] = None,
        source: Optional[Tuple[PolySelfMap, Observable, Point]] = None,
        overflow: Optional[OrbitOverflow] = None,
    ):
        self._coeffs = coefficients
        self._extend = extend
        self.bad_primes = bad_primes
        self.source = source
        self._overflow = overflow

    # --- constructors ---------------------------------------------------

    @classmethod
    def from_orbit(
        cls,
        f: PolySelfMap,
        observable: Optional[Observable],
        start: Sequence[Union[Fraction, int]],
        bit_budget: int = DEFAULT_BIT_BUDGET,
    ) -> "CoefficientSeries":
        if observable is None:
            observable = first_coordinate_observable(f.arity)
        point = tuple(Fraction(x) for x in start)
        series = cls(
            [observable.evaluate(point)],
            denominator_primes(f, observable, point),
            source=(f, observable, point),
        )
        series._bit_budget = bit_budget
        series._points = [point]
        series._extend = series._extend_orbit
        return series

    def _extend_orbit(self, n: int) -> Optional[Fraction]:
        f, observable, _ = self.source
        while len(self._coeffs) <= n:
            nxt = f.apply(self._points[-1])
            bits = _point_bits(nxt)
            if bits > self._bit_budget:
                self._overflow = OrbitOverflow(len(self._coeffs), bits)
                return None
            self._points.append(nxt)
            self._coeffs.append(observable.evaluate(nxt))
        return self._coeffs[n]

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[Union[Fraction, int]]) -> "CoefficientSeries":
        coeffs = [Fraction(c) for c in coefficients]
        primes = set()
        for c in coeffs:
            if c.denominator > 1:
                primes.update(int(p) for p in factorint(c.denominator))
        return cls(coeffs, frozenset(primes))

    @classmethod
    def from_rational_function(cls, numerator, denominator) -> "CoefficientSeries":
        """Series expansion of P/Q; Q is normalized so Q(0) = 1."""
        from .univariate import RationalPoly

        num = RationalPoly(numerator.coeffs if isinstance(numerator, RationalPoly) else numerator)
        den = RationalPoly(denominator.coeffs if isinstance(denominator, RationalPoly) else denominator)
        q0 = den.coefficient(0)
        if q0 == 0:
            raise ValueError("denominator must be a unit at t = 0")
        num = num.scaled(1 / q0)
        den = den.scaled(1 / q0)
        primes = set()
        for poly in (num, den):
            for c in poly.coeffs:
                if c.denominator > 1:
                    primes.update(int(p) for p in factorint(c.denominator))

        coeffs: List[Fraction] = []

        def extend(n: int) -> Optional[Fraction]:
            while len(coeffs) <= n:
                k = len(coeffs)
                total = num.coefficient(k)
                for i in range(1, min(k, den.degree) + 1):
                    total -= den.coefficient(i) * coeffs[k - i]
                coeffs.append(total)
            return coeffs[n]

        return cls(coeffs, frozenset(primes), extend=extend)

    # --- access -----------------------------------------------------------

    @property
    def is_orbit_backed(self) -> bool:
        return self.source is not None

    @property
    def arity(self) -> Optional[int]:
        return self.source[0].arity if self.source else None

    @property
    def overflow(self) -> Optional[OrbitOverflow]:
        return self._overflow

    @property
    def computed(self) -> int:
        """Number of coefficients computed so far."""
        return len(self._coeffs)

    def computed_coefficients(self) -> List[Fraction]:
        return list(self._coeffs)

    def ensure(self, n: int) -> bool:
        """Try to make coefficient n available; False on overflow/exhaustion."""
        if n < len(self._coeffs):
            return True
        if self._extend is None:
            return False
        return self._extend(n) is not None

    def coefficient(self, n: int) -> Fraction:
        if not self.ensure(n):
            if self._overflow is not None:
                raise OrbitOverflowError(self._overflow)
            raise InsufficientDataError(
                f"series has {len(self._coeffs)} coefficients, index {n} requested"
            )
        return self._coeffs[n]

    def prefix(self, count: int) -> List[Fraction]:
        """First `count` coefficients, shorter if the budget tripped."""
        self.ensure(count - 1)
        return self._coeffs[:count]

    def orbit_point(self, n: int) -> Point:
        if not self.is_orbit_backed:
            raise TypeError("series is not orbit-backed")
        self.ensure(n)
        if n >= len(self._points):
            raise OrbitOverflowError(self._overflow)
        return self._points[n]


def observable_series(
    f: PolySelfMap,
    observable: Optional[Observable],
    start: Sequence[Union[Fraction, int]],
    steps: int,
    bit_budget: int = DEFAULT_BIT_BUDGET,
) -> CoefficientSeries:
    """Series of observable values along the orbit, precomputed through `steps`.

    An overflow keeps the partial prefix and is reported on the series.
    """
    series = CoefficientSeries.from_orbit(f, observable, start, bit_budget)
    series.ensure(steps)
    return series


@dataclass(frozen=True)
class GrowthEstimate:
    """Window surrogate for the limsup of ln h(c_n) / ln n.

    `sup_ratio` is the exact max over the window (indices with height 0
    and indices n < 2 are skipped); `exp_slope` is the least-squares slope
    of ln h(c_n) against n, which diagnoses exponential height growth.
    """

    window: Tuple[int, int]
    sup_ratio: float
    exp_slope: float
    verdict_threshold: float
    samples: Tuple[Tuple[int, float], ...]


def growth_estimate(
    source,
    n_min: int,
    r: Optional[int] = None,
) -> GrowthEstimate:
    """Growth data over the window [n_min, last computed index].

    `source` is a CoefficientSeries (r taken from its map) or a sequence
    of per-index heights (HeightValue or float logs), in which case r must
    be given.
    """
    if isinstance(source, CoefficientSeries):
        if source.arity is None:
            raise TypeError("generic series needs an explicit dimension r")
        r = source.arity
        heights = [height_rational(c).logarithmic for c in source.computed_coefficients()]
    else:
        if r is None:
            raise ValueError("r is required when passing raw heights")
        heights = [float(h) for h in source]
    n_max = len(heights) - 1
    usable = [
        (n, heights[n])
        for n in range(max(n_min, 2), n_max + 1)
        if heights[n] > 0.0
    ]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"only {len(usable)} usable indices in window [{n_min}, {n_max}]"
        )
    ratios = [math.log(h) / math.log(n) for n, h in usable]
    xs = [n for n, _ in usable]
    ys = [math.log(h) for _, h in usable]
    x_mean = sum(xs) / len(xs)
    y_mean = sum(ys) / len(ys)
    denom = sum((x - x_mean) ** 2 for x in xs)
    slope = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys)) / denom
    return GrowthEstimate(
        window=(n_min, n_max),
        sup_ratio=max(ratios),
        exp_slope=slope,
        verdict_threshold=1.0 / r,
        samples=tuple((n, h) for n, h in usable),
    )


def trivial_bound_check(
    records: Sequence[OrbitRecord], r: int
) -> List[Tuple[int, bool]]:
    """Exact counting bound for injective integer orbits.

    With H_n the max multiplicative height over indices <= n, checks
    (2*H_n + 1)^r > n at every index. Points must have integer
    coordinates and be pairwise distinct.
    """
    for rec in records:
        if any(q.denominator != 1 for q in rec.point):
            raise NonIntegerOrbitError(
                f"orbit point at index {rec.index} has a non-integer coordinate"
            )
    seen = {}
    for rec in records:
        if rec.point in seen:
            raise RepeatedPointError(seen[rec.point], rec.index)
        seen[rec.point] = rec.index
    results = []
    h_max = 1
    for rec in records:
        h_max = max(h_max, rec.point_height.multiplicative)
        results.append((rec.index, (2 * h_max + 1) ** r > rec.index))
    return results


# --- orbit cache file --------------------------------------------------------
#
# One record per line: "n<TAB>coord_1 ... coord_r<TAB>c_n", every rational
# as "num/den". The format round-trips exactly.


def write_orbit_cache(records: Sequence[OrbitRecord], path) -> None:
    lines = []
    for rec in records:
        coords = " ".join(format_rational(q) for q in rec.point)
        lines.append(f"{rec.index}\t{coords}\t{format_rational(rec.observable_value)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def read_orbit_cache(path) -> List[Tuple[int, Point, Fraction]]:
    """Parse cache records; validates the index sequence is 0, 1, 2, ..."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            n = int(fields[0])
            point = tuple(parse_rational(tok) for tok in fields[1].split(" "))
            value = parse_rational(fields[2])
            entries.append((n, point, value))
    for expected, (n, _, _) in enumerate(entries):
        if n != expected:
            raise ValueError(f"cache indices not contiguous from 0 (saw {n} at row {expected})")
    return entries


def records_from_cache(
    entries: Sequence[Tuple[int, Point, Fraction]]
) -> List[OrbitRecord]:
    return [
        OrbitRecord(n, point, height_affine(point), value, height_rational(value))
        for n, point, value in entries
    ]

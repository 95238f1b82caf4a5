"""Mod-p degree profiles of the orbit generating series.

For a good prime p (one not dividing any denominator of the model), the
orbit lives in the finite set F_p^r, so the reduced coefficient sequence
is eventually periodic: preperiod m and period c with m + c <= p^r. The
series mod p is therefore the rational function

    U(t) + t^m V(t) / (1 - t^c),   deg U < m, deg V < c,

and after gcd reduction over F_p its degree h_p = max(deg A, deg B)
satisfies h_p <= 2 p^r. Cycle structure is found with Brent's algorithm;
Berlekamp-Massey on the reduced sequence is kept as an independent oracle
for the same degree.

Polynomials over F_p are plain ascending coefficient lists of ints in
[0, p); p is assumed to fit a machine word (p < 2^61).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy import primerange

from .dynamics import CoefficientSeries
from .polyexpr import MultivariatePolynomial, Observable, PolySelfMap


class BadPrimeError(ValueError):
    """The prime divides a denominator of the model."""


class InsufficientTermsError(ValueError):
    """Too few sequence terms for a reliable minimal recurrence."""


@dataclass(frozen=True)
class ModPProfile:
    """Degree data of the series reduced mod one good prime.

    `rational_degree` is max(numerator_degree, denominator_degree) of the
    reduced fraction A/B with gcd(A, B) = 1 and B(0) = 1; `degree_bound`
    is 2 * p^r, which the profile never exceeds.
    """

    prime: int
    preperiod: int
    period: int
    numerator_degree: int
    denominator_degree: int
    rational_degree: int
    degree_bound: int


@dataclass(frozen=True)
class SweepResult:
    profiles: Tuple[ModPProfile, ...]
    skipped_primes: Tuple[int, ...]


# --- F_p polynomial helpers (ascending int lists) -----------------------------


def fp_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def fp_degree(a: Sequence[int]) -> int:
    return len(a) - 1


def fp_add(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        out[i] = ((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p
    return fp_trim(out)

def fp_sub(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        out[i] = ((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
    return fp_trim(out)


def fp_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return fp_trim(out)


def fp_scale(a: Sequence[int], s: int, p: int) -> List[int]:
    return fp_trim([(x * s) % p for x in a])


def fp_divmod(a: Sequence[int], b: Sequence[int], p: int) -> Tuple[List[int], List[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero mod p")
    rem = list(a)
    inv_lead = pow(b[-1], -1, p)
    db = len(b) - 1
    quot = [0] * max(0, len(a) - db)
    while len(rem) - 1 >= db and rem:
        fp_trim(rem)
        if len(rem) - 1 < db or not rem:
            break
        shift = len(rem) - 1 - db
        factor = (rem[-1] * inv_lead) % p
        quot[shift] = factor
        for i, y in enumerate(b):
            rem[shift + i] = (rem[shift + i] - factor * y) % p
        rem.pop()
    return fp_trim(quot), fp_trim(rem)


def fp_gcd(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    a, b = list(a), list(b)
    while b:
        _, r = fp_divmod(a, b, p)
        a, b = b, r
    if a:
        a = fp_scale(a, pow(a[-1], -1, p), p)
    return a


def fp_series_expand(num: Sequence[int], den: Sequence[int], count: int, p: int) -> List[int]:
    """First `count` coefficients of num/den with den[0] = 1."""
    if not den or den[0] != 1:
        raise ValueError("denominator must have constant term 1")
    out = []
    for k in range(count):
        total = num[k] if k < len(num) else 0
        for i in range(1, min(k, len(den) - 1) + 1):
            total -= den[i] * out[k - i]
        out.append(total % p)
    return out


def reduce_fraction_pair(
    num: Sequence[int], den: Sequence[int], p: int
) -> Tuple[List[int], List[int]]:
    """gcd-reduce and normalize so the denominator has constant term 1."""
    num, den = fp_trim(list(num)), fp_trim(list(den))
    if not num:
        return [], [1]
    g = fp_gcd(num, den, p)
    if fp_degree(g) > 0:
        num, _ = fp_divmod(num, g, p)
        den, _ = fp_divmod(den, g, p)
    if not den or den[0] == 0:
        raise ValueError("reduced denominator is not a unit at t = 0")
    inv = pow(den[0], -1, p)
    return fp_scale(num, inv, p), fp_scale(den, inv, p)


# --- reduction of the model ---------------------------------------------------


def reduce_rational(q: Fraction, p: int) -> int:
    if q.denominator % p == 0:
        raise BadPrimeError(f"prime {p} divides a denominator")
    return (q.numerator * pow(q.denominator, -1, p)) % p


class ReducedPoly:
    """Sparse polynomial with coefficients reduced into F_p."""

    __slots__ = ("p", "terms")

    def __init__(self, poly: MultivariatePolynomial, p: int):
        self.p = p
        self.terms: Dict[Tuple[int, ...], int] = {}
        for exps, coeff in poly.terms.items():
            c = reduce_rational(coeff, p)
            if c:
                self.terms[exps] = c

    def evaluate(self, state: Sequence[int]) -> int:
        p = self.p
        total = 0
        for exps, coeff in self.terms.items():
            value = coeff
            for x, e in zip(state, exps):
                if e:
                    value = (value * pow(x, e, p)) % p
            total = (total + value) % p
        return total


class ReducedSelfMap:
    __slots__ = ("p", "coordinates")

    def __init__(self, f: PolySelfMap, p: int):
        self.p = p
        self.coordinates = tuple(ReducedPoly(poly, p) for poly in f.coordinates)

    @property
    def arity(self) -> int:
        return len(self.coordinates)

    def apply(self, state: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(poly.evaluate(state) for poly in self.coordinates)


def bad_primes(
    f: PolySelfMap, observable: Observable, start: Sequence
) -> frozenset:
    """Primes dividing some denominator of f, the observable, or the point."""
    from .dynamics import denominator_primes

    return denominator_primes(f, observable, start)


def cycle_structure(
    step: Callable[[Tuple[int, ...]], Tuple[int, ...]], start: Tuple[int, ...]
) -> Tuple[int, int]:
    """Minimal preperiod and period of an iteration, by Brent's algorithm."""
    power = 1
    period = 1
    tortoise = start
    hare = step(start)
    while tortoise != hare:
        if power == period:
            tortoise = hare
            power *= 2
            period = 0
        hare = step(hare)
        period += 1
    tortoise = hare = start
    for _ in range(period):
        hare = step(hare)
    preperiod = 0
    while tortoise != hare:
        tortoise = step(tortoise)
        hare = step(hare)
        preperiod += 1
    return preperiod, period


def _orbit_mod_p(series: CoefficientSeries, p: int):
    if not series.is_orbit_backed:
        raise TypeError("mod-p profiles need an orbit-backed series")
    if p in series.bad_primes:
        raise BadPrimeError(f"prime {p} is a bad prime of the series")
    f, observable, start = series.source
    rmap = ReducedSelfMap(f, p)
    rlam = ReducedPoly(observable.polynomial, p)
    state = tuple(reduce_rational(q, p) for q in start)
    return rmap, rlam, state


def rational_degree_mod_p(series: CoefficientSeries, p: int) -> ModPProfile:
    """Reduced-fraction degree of the series mod p, from the orbit cycle.

    Builds U + t^m V / (1 - t^c) from the eventually periodic reduced
    sequence and gcd-reduces it over F_p.
    """
    rmap, rlam, state = _orbit_mod_p(series, p)
    preperiod, period = cycle_structure(rmap.apply, state)
    values = []
    for _ in range(preperiod + period):
        values.append(rlam.evaluate(state))
        state = rmap.apply(state)
    # numerator of (U (1 - t^c) + t^m V) / (1 - t^c)
    u = values[:preperiod]
    v = values[preperiod:]
    denominator = [1] + [0] * (period - 1) + [p - 1]
    numerator = fp_add(
        fp_mul(fp_trim(list(u)), denominator, p),
        [0] * preperiod + v,
        p,
    )
    num, den = reduce_fraction_pair(numerator, denominator, p)
    h_p = max(max(fp_degree(num), 0), fp_degree(den))
    return ModPProfile(
        prime=p,
        preperiod=preperiod,
        period=period,
        numerator_degree=max(fp_degree(num), 0),
        denominator_degree=fp_degree(den),
        rational_degree=h_p,
        degree_bound=2 * p ** rmap.arity,
    )


def coefficients_mod_p(series: CoefficientSeries, p: int, count: int) -> List[int]:
    """First `count` terms of the reduced sequence, straight from the mod-p orbit."""
    rmap, rlam, state = _orbit_mod_p(series, p)
    out = []
    for _ in range(count):
        out.append(rlam.evaluate(state))
        state = rmap.apply(state)
    return out


def berlekamp_massey(sequence: Sequence[int], p: int) -> Tuple[List[int], int]:
    """Minimal connection polynomial C (C[0] = 1) and LFSR length L.

    The recurrence sum_i C[i] * a_{n-i} = 0 holds for L <= n < len(sequence).
    """
    s = [x % p for x in sequence]
    c = [1]
    b = [1]
    length = 0
    lag = 1
    last_disc = 1
    for n in range(len(s)):
        disc = s[n]
        for i in range(1, length + 1):
            if i < len(c):
                disc = (disc + c[i] * s[n - i]) % p
        if disc == 0:
            lag += 1
            continue
        factor = (disc * pow(last_disc, -1, p)) % p
        adjustment = [0] * lag + fp_scale(b, factor, p)
        previous = list(c)
        c = fp_sub(c, adjustment, p)
        if 2 * length <= n:
            length, lag, b, last_disc = n + 1 - length, 1, previous, disc
        else:
            lag += 1
    return c, length


def berlekamp_massey_degree(sequence: Sequence[int], p: int) -> Tuple[int, int]:
    """Recurrence order and rational-function degree of a reduced sequence.

    Independent oracle for `rational_degree_mod_p`: the minimal LFSR gives
    the connection polynomial C, the numerator is (C * F) mod t^L, and the
    degree is read off the gcd-reduced fraction. Raises
    InsufficientTermsError unless the data covers twice the LFSR length.
    """
    s = [x % p for x in sequence]
    c, length = berlekamp_massey(s, p)
    if 2 * length > len(s):
        raise InsufficientTermsError(
            f"{len(s)} terms cannot certify a recurrence of order {length}"
        )
    num = [0] * length
    for n in range(length):
        total = 0
        for i in range(min(n, len(c) - 1) + 1):
            total = (total + c[i] * s[n - i]) % p
        num[n] = total
    num, den = reduce_fraction_pair(num, c[: length + 1], p)
    degree = max(max(fp_degree(num), 0), fp_degree(den))
    return length, degree


def degree_profile_sweep(
    series: CoefficientSeries,
    prime_bound: int,
    jobs: Optional[int] = None,
) -> SweepResult:
    """One profile per good prime p <= prime_bound, ascending.

    Per-prime work is independent; with jobs > 1 it runs on a thread pool
    and the merge order (ascending p) is identical to the sequential run.
    Bad primes are skipped and listed.
    """
    primes = [int(p) for p in primerange(2, prime_bound + 1)]
    skipped = tuple(p for p in primes if p in series.bad_primes)
    good = [p for p in primes if p not in series.bad_primes]
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            profiles = tuple(pool.map(lambda p: rational_degree_mod_p(series, p), good))
    else:
        profiles = tuple(rational_degree_mod_p(series, p) for p in good)
    return SweepResult(profiles=profiles, skipped_primes=skipped)


PROFILE_CSV_COLUMNS = ("p", "m", "c", "deg_num", "deg_den", "h_p", "bound_2pr")


def profile_csv_rows(result: SweepResult) -> List[Tuple[int, ...]]:
    return [
        (
            prof.prime,
            prof.preperiod,
            prof.period,
            prof.numerator_degree,
            prof.denominator_degree,
            prof.rational_degree,
            prof.degree_bound,
        )
        for prof in result.profiles
    ]

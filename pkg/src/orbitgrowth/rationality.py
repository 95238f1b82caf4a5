"""Rationality machinery for coefficient series over Q.

Three layers:

* Approximants. `pade_via_euclid` runs the extended Euclidean algorithm
  on (t^(N+1), F mod t^(N+1)) to produce P, Q with Q*F - P vanishing to
  the requested order. This is the constructive route to the small
  approximant whose existence the Siegel-lemma bound `siegel_height_bound`
  quantifies (the bound is reported for comparison, never asserted for
  the Euclid solution, which need not be the minimal-height one).

* Semi-decision. `check_rationality` builds an approximant from a short
  prefix and verifies the contact far beyond it, both over Q (exact
  coefficient convolution) and mod sampled good primes against an
  independently computed reduced fraction. It can certify rationality,
  never irrationality.

* The criterion inequality. `criterion_check` tabulates, per truncation
  order n, the certified prime sum over good p <= P_max with
  h_p < n/(2+eta) against (3/2) ln n + (1 + 1/eta) h(F_/n). Since the
  prime sum is truncated, a row can be proved to hold but a failure is
  only "within budget". For orbit series the report also carries the
  growth-floor rows h(F_/n) >= (1/3)(n/6)^(1/r) implied when the
  criterion fails along the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .dynamics import CoefficientSeries, InsufficientDataError
from .heights import HeightValue, ZERO_HEIGHT, height_coefficients
from .modp import (
    berlekamp_massey,
    coefficients_mod_p,
    degree_profile_sweep,
    fp_trim,
    rational_degree_mod_p,
    reduce_fraction_pair,
    reduce_rational,
)
from .univariate import RationalPoly, convolve_coefficient, poly_gcd

RationalLike = Union[Fraction, int]

# rational brackets around e, for exact growth-floor comparisons
_E_UPPER = Fraction(27182818284590453, 10**16)
_E_LOWER = Fraction(27182818284590452, 10**16)


class NonIntegralEtaLError(ValueError):
    """eta * L must be an integer."""


class DegreeSplitInfeasibleError(ValueError):
    """The requested degree split cannot be met by the data."""


class NoSolutionError(ValueError):
    """Degenerate input left no usable approximant."""


@dataclass(frozen=True)
class PadeApproximant:
    """Reduced approximant P/Q with gcd(P, Q) = 1 and Q(0) = 1.

    `contact_order` is the largest N with Q*F - P = 0 mod t^(N+1) against
    the coefficients the approximant was built from.
    """

    numerator: RationalPoly
    denominator: RationalPoly
    contact_order: int


def _contact_order(
    numerator: RationalPoly,
    denominator: RationalPoly,
    coeffs: Sequence[Fraction],
) -> int:
    for n in range(len(coeffs)):
        residual = convolve_coefficient(denominator.coeffs, coeffs, n)
        residual -= numerator.coefficient(n)
        if residual != 0:
            return n - 1
    return len(coeffs) - 1


def pade_via_euclid(
    coeffs: Sequence[RationalLike],
    deg_num_max: int,
    deg_den_max: int,
) -> PadeApproximant:
    """Approximant with deg P <= deg_num_max, deg Q <= deg_den_max.

    `coeffs` are the truncation coefficients a_0..a_N; requires
    N >= deg_num_max + deg_den_max. The extended Euclidean remainder
    sequence on (t^(N+1), F) is cut at the first remainder of degree
    <= deg_num_max; the cofactor of F is the denominator.
    """
    qs = [Fraction(c) for c in coeffs]
    big_n = len(qs) - 1
    if big_n < 0:
        raise ValueError("empty truncation")
    if deg_num_max < 0 or deg_den_max < 0:
        raise DegreeSplitInfeasibleError("degree bounds must be nonnegative")
    if big_n < deg_num_max + deg_den_max:
        raise DegreeSplitInfeasibleError(
            f"need at least {deg_num_max + deg_den_max + 1} coefficients, got {big_n + 1}"
        )
    f_poly = RationalPoly(qs)
    if f_poly.is_zero():
        return PadeApproximant(RationalPoly(), RationalPoly([1]), big_n)
    r_prev = RationalPoly.monomial(big_n + 1)
    r_cur = f_poly
    u_prev, u_cur = RationalPoly(), RationalPoly([1])
    while r_cur.degree > deg_num_max:
        quotient, remainder = divmod(r_prev, r_cur)
        r_prev, r_cur = r_cur, remainder
        u_prev, u_cur = u_cur, u_prev - quotient * u_cur
    if u_cur.degree > deg_den_max:
        raise DegreeSplitInfeasibleError(
            f"denominator degree {u_cur.degree} exceeds bound {deg_den_max}"
        )
    if u_cur.is_zero():
        raise NoSolutionError("Euclidean cofactor vanished")
    g = poly_gcd(r_cur, u_cur)
    if not g.is_zero() and g.degree > 0:
        r_cur = divmod(r_cur, g)[0]
        u_cur = divmod(u_cur, g)[0]
    q0 = u_cur.coefficient(0)
    if q0 == 0:
        raise NoSolutionError("reduced denominator vanishes at t = 0")
    numerator = r_cur.scaled(1 / q0)
    denominator = u_cur.scaled(1 / q0)
    return PadeApproximant(
        numerator, denominator, _contact_order(numerator, denominator, qs)
    )


def siegel_height_bound(L: int, eta: RationalLike, h_trunc: float) -> float:
    """Height bound (1/2) ln((1+eta) L) + (1/eta) h_trunc for some solution.

    This is the guaranteed-existence bound for a small solution of the
    contact system with eta*L excess unknowns; eta*L must be an integer.
    """
    eta = Fraction(eta)
    if L < 1:
        raise ValueError("L must be a positive integer")
    if eta <= 0:
        raise ValueError("eta must be positive")
    if (eta * L).denominator != 1:
        raise NonIntegralEtaLError(f"eta*L = {eta * L} is not an integer")
    n_unknowns = int((1 + eta) * L)
    return 0.5 * math.log(n_unknowns) + float(1 / eta) * h_trunc


def truncation_height(series: CoefficientSeries, n: int) -> HeightValue:
    """Projective height of the coefficient vector a_0..a_n.

    The all-zero truncation gets height 0 by convention, so the height is
    monotone in n from the start.
    """
    coeffs = [series.coefficient(i) for i in range(n + 1)]
    if all(c == 0 for c in coeffs):
        return ZERO_HEIGHT
    return height_coefficients(coeffs)


@dataclass(frozen=True)
class RationalityVerdict:
    status: str  # "Rational" | "Undecided"
    numerator: Optional[RationalPoly]
    denominator: Optional[RationalPoly]
    max_contact: int
    primes_checked: Tuple[int, ...]

    @property
    def is_rational(self) -> bool:
        return self.status == "Rational"


def _fraction_mod_p(
    numerator: RationalPoly, denominator: RationalPoly, p: int
) -> Tuple[List[int], List[int]]:
    num = fp_trim([reduce_rational(c, p) for c in numerator.coeffs])
    den = fp_trim([reduce_rational(c, p) for c in denominator.coeffs])
    return reduce_fraction_pair(num, den, p)


def check_rationality(
    series: CoefficientSeries,
    L: int,
    verify_order: int,
    sample_primes: Sequence[int],
    eta: RationalLike = 1,
) -> RationalityVerdict:
    """Certify the series rational, or report Undecided. Never the reverse.

    Builds the approximant from the first (2+eta)L coefficients with
    degree split (deg P < (1+eta)L, deg Q <= L), then requires
    Q*F - P = 0 through t^verify_order exactly over Q, and agreement of
    the independently reduced mod-p fraction of the series with P/Q mod p
    at each usable sampled prime. Extending an orbit series past its bit
    budget propagates the overflow.
    """
    eta = Fraction(eta)
    if (eta * L).denominator != 1:
        raise NonIntegralEtaLError(f"eta*L = {eta * L} is not an integer")
    contact_target = int((2 + eta) * L)
    deg_num_max = int((1 + eta) * L) - 1
    deg_den_max = contact_target - 1 - deg_num_max
    build = [series.coefficient(i) for i in range(contact_target)]
    approximant = pade_via_euclid(build, deg_num_max, deg_den_max)
    num, den = approximant.numerator, approximant.denominator
    contact = approximant.contact_order
    if contact == contact_target - 1:
        coeffs = [series.coefficient(i) for i in range(verify_order + 1)]
        for n in range(contact_target, verify_order + 1):
            residual = convolve_coefficient(den.coeffs, coeffs, n)
            residual -= num.coefficient(n)
            if residual != 0:
                contact = n - 1
                break
        else:
            contact = verify_order
    if contact < verify_order:
        return RationalityVerdict("Undecided", None, None, contact, ())
    checked = []
    for p in sample_primes:
        if p in series.bad_primes:
            continue
        if any(c.denominator % p == 0 for c in (*num.coeffs, *den.coeffs)):
            continue
        expect = _fraction_mod_p(num, den, p)
        if series.is_orbit_backed:
            profile = rational_degree_mod_p(series, p)
            terms = coefficients_mod_p(
                series, p, profile.preperiod + 2 * profile.period + 1
            )
            got = _reduced_fraction_from_terms(terms, p)
        else:
            terms = [reduce_rational(series.coefficient(i), p) for i in range(verify_order + 1)]
            got = _reduced_fraction_from_terms(terms, p)
        if got != expect:
            return RationalityVerdict("Undecided", None, None, contact, tuple(checked))
        checked.append(p)
    if not checked:
        return RationalityVerdict("Undecided", None, None, contact, ())
    return RationalityVerdict("Rational", num, den, contact, tuple(checked))


def _reduced_fraction_from_terms(terms: Sequence[int], p: int) -> Tuple[List[int], List[int]]:
    """Reduced fraction of a sequence mod p via the recurrence oracle."""
    connection, length = berlekamp_massey(terms, p)
    num = [0] * length
    for n in range(length):
        total = 0
        for i in range(min(n, len(connection) - 1) + 1):
            total = (total + connection[i] * terms[n - i]) % p
        num[n] = total
    return reduce_fraction_pair(num, connection, p)


# --- criterion table ----------------------------------------------------------


@dataclass(frozen=True)
class CriterionRow:
    n: int
    lhs: float
    rhs: float
    lhs_is_lower_bound: bool
    verdict: str  # "ProvedHolds" | "FailsWithinBudget"


@dataclass(frozen=True)
class GrowthFloorRow:
    """h(F_/n) against the floor (1/3)(n/6)^(1/r)."""

    n: int
    h_trunc: float
    threshold: float
    holds: bool
    exact: bool


@dataclass(frozen=True)
class CriterionReport:
    eta: Fraction
    prime_budget: int
    rows: Tuple[CriterionRow, ...]
    eq9_rows: Tuple[GrowthFloorRow, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "eta": f"{self.eta.numerator}/{self.eta.denominator}",
            "prime_budget": self.prime_budget,
            "rows": [
                {
                    "n": row.n,
                    "lhs": row.lhs,
                    "rhs": row.rhs,
                    "lower_bound": row.lhs_is_lower_bound,
                    "verdict": row.verdict,
                }
                for row in self.rows
            ],
            "eq9_rows": [
                {"n": row.n, "h_trunc": row.h_trunc, "threshold": row.threshold}
                for row in self.eq9_rows
            ],
        }


def growth_floor_holds_exact(multiplicative: int, n: int, r: int) -> Optional[bool]:
    """Exact comparison ln(mult) >= (1/3)(n/6)^(1/r), r = 1 only.

    For r = 1 the threshold is n/18 and the test mult^18 vs e^n is
    decided with rational brackets around e: a pass against the upper
    bracket or a fail against the lower bracket is a certificate either
    way. Returns None for r >= 2 (irrational threshold) or in the sliver
    between the brackets; callers then fall back to floats.
    """
    if r != 1:
        return None
    lhs = Fraction(multiplicative) ** 18
    if lhs >= _E_UPPER**n:
        return True
    if lhs < _E_LOWER**n:
        return False
    return None


def criterion_check(
    series: CoefficientSeries,
    eta: RationalLike,
    n_values: Sequence[int],
    prime_bound: int,
    jobs: Optional[int] = None,
) -> CriterionReport:
    """Tabulate the criterion inequality per truncation order n.

    lhs sums ln p over good primes p <= prime_bound with h_p < n/(2+eta)
    (every summand certified, so lhs only underestimates the full prime
    sum); rhs = (3/2) ln n + (1 + 1/eta) h(F_/n). "ProvedHolds" needs
    lhs > rhs; a failed row is only a failure within the prime budget.
    """
    eta = Fraction(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    sweep = degree_profile_sweep(series, prime_bound, jobs=jobs)
    rows = []
    floor_rows = []
    r = series.arity
    rhs_factor = float(1 + 1 / eta)
    for n in sorted(set(int(n) for n in n_values)):
        threshold = Fraction(n) / (2 + eta)
        lhs = sum(
            math.log(prof.prime)
            for prof in sweep.profiles
            if prof.rational_degree < threshold
        )
        h_trunc = truncation_height(series, n)
        rhs = 1.5 * math.log(n) + rhs_factor * h_trunc.logarithmic
        verdict = "ProvedHolds" if lhs > rhs else "FailsWithinBudget"
        rows.append(CriterionRow(n, lhs, rhs, True, verdict))
        if r is not None:
            floor = (1.0 / 3.0) * (n / 6.0) ** (1.0 / r)
            exact = growth_floor_holds_exact(h_trunc.multiplicative, n, r)
            holds = exact if exact is not None else h_trunc.logarithmic >= floor
            floor_rows.append(
                GrowthFloorRow(n, h_trunc.logarithmic, floor, holds, exact is not None)
            )
    return CriterionReport(eta, prime_bound, tuple(rows), tuple(floor_rows))


# --- convergence functional (exploratory) -------------------------------------


@dataclass(frozen=True)
class RuzsaEstimate:
    """Windowed estimate of the convergence functional. Not a certificate.

    `archimedean_log_radius` estimates ln R_infinity from tail coefficient
    growth; finite places contribute the certified lower bound 0 (the
    coefficients are S-integral); the liminf term is a min over the window
    of truncated prime sums. All three are approximations and the caveats
    say so.
    """

    archimedean_log_radius: float
    finite_radius_lower_bound: float
    liminf_window_estimate: float
    total: float
    caveats: Tuple[str, ...]


def ruzsa_functional(
    series: CoefficientSeries,
    window: Tuple[int, int],
    prime_bound: int,
    jobs: Optional[int] = None,
) -> RuzsaEstimate:
    """Exploratory positivity functional: log-radius sum plus liminf term."""
    n_lo, n_hi = window
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError("window must satisfy 1 <= n_lo <= n_hi")
    usable = []
    for n in range(n_lo, n_hi + 1):
        if not series.ensure(n):
            break
        c = series.coefficient(n)
        if c != 0:
            usable.append((n, c))
    if len(usable) < 2:
        raise InsufficientDataError("window has fewer than 2 nonzero coefficients")
    arch = -max(
        (math.log(abs(c.numerator)) - math.log(c.denominator)) / n for n, c in usable
    )
    sweep = degree_profile_sweep(series, prime_bound, jobs=jobs)
    liminf_term = min(
        sum(math.log(prof.prime) for prof in sweep.profiles if prof.rational_degree < n)
        / n
        for n, _ in usable
    )
    caveats = (
        "archimedean radius estimated from a finite coefficient window",
        "finite-place radii only lower-bounded by 0 (S-integral coefficients)",
        "liminf term is a windowed min over a truncated prime sum",
    )
    return RuzsaEstimate(arch, 0.0, liminf_term, arch + 0.0 + liminf_term, caveats)

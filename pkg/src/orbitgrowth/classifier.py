"""Dichotomy classifier: polynomial on arithmetic progressions, or growth.

A coefficient sequence is "eventually polynomial on progressions" when
for some modulus d and threshold n0, every residue-class subsequence
(c_{kd+i}) with kd+i >= n0 agrees with a polynomial p_i(k). Detection is
by step-d finite differencing: the subsequence is polynomial of degree
<= g on the tail iff its (g+1)-st forward differences vanish there, which
is exact over Q and needs no algebraic numbers. Reconstruction is Newton
forward interpolation from the first g+1 tail points, then verification
against every computed coefficient past the threshold.

Candidates are scanned smallest d first, breaking ties by smaller
maximal degree and then smaller threshold, so results are deterministic.
When no decomposition exists the classifier looks for growth evidence:
a window sup of ln h(c_n)/ln n at or above 1/r, or a bit-budget overflow
(the doubly exponential signature).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .dynamics import (
    CoefficientSeries,
    GrowthEstimate,
    InsufficientDataError,
    OrbitOverflow,
    growth_estimate,
    observable_series,
    DEFAULT_BIT_BUDGET,
)
from .polyexpr import (
    ArityMismatchError,
    MultivariatePolynomial,
    Observable,
    PolySelfMap,
)
from .univariate import RationalPoly


@dataclass(frozen=True)
class ProgressionDecomposition:
    """Modulus d, threshold n0, and per-residue polynomials p_0..p_{d-1}.

    For every computed index N >= n0 with N = k*d + i, the coefficient
    equals p_i(k) exactly.
    """

    modulus: int
    threshold: int
    polynomials: Tuple[RationalPoly, ...]
    verified_range: int

    def predicted(self, n: int) -> Fraction:
        i = n % self.modulus
        k = (n - i) // self.modulus
        return self.polynomials[i].evaluate(k)


@dataclass(frozen=True)
class Classification:
    verdict: str  # "EventuallyPolynomial" | "GrowthEvidence" | "Inconclusive"
    decomposition: Optional[ProgressionDecomposition]
    growth: Optional[GrowthEstimate]
    budgets: Dict[str, object]
    overflow: Optional[OrbitOverflow]


def _difference_order(values: Sequence[Fraction], g_max: int) -> Optional[int]:
    """Minimal g <= g_max with vanishing (g+1)-st differences, if any.

    Needs len(values) >= g + 2 so at least one difference of each order is
    actually checked.
    """
    row = list(values)
    for g in range(g_max + 1):
        if len(row) < 2:
            return None
        row = [b - a for a, b in zip(row, row[1:])]
        if all(v == 0 for v in row):
            return g
    return None


def _newton_polynomial(k0: int, samples: Sequence[Fraction]) -> RationalPoly:
    """Polynomial through (k0 + j, samples[j]) by forward differences."""
    diffs = list(samples)
    leading = [diffs[0]]
    while len(diffs) > 1:
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        leading.append(diffs[0])
    poly = RationalPoly()
    basis = RationalPoly([1])
    factorial = 1
    for j, delta in enumerate(leading):
        if j > 0:
            factorial *= j
            basis = basis * RationalPoly([-(k0 + j - 1), 1])
        poly = poly + basis.scaled(Fraction(delta) / factorial)
    return poly


def _try_candidate(
    coeffs: Sequence[Fraction], d: int, n0: int, g_cap: int
) -> Optional[Tuple[int, List[RationalPoly]]]:
    """Degrees and polynomials for modulus d at threshold n0, or None."""
    count = len(coeffs)
    polys: List[RationalPoly] = []
    max_degree = -1
    for i in range(d):
        k0 = max(0, -(-(n0 - i) // d))  # ceil((n0 - i) / d)
        ks = range(k0, (count - 1 - i) // d + 1)
        tail = [coeffs[k * d + i] for k in ks]
        if len(tail) < 2:
            return None
        g = _difference_order(tail, min(g_cap, len(tail) - 2))
        if g is None:
            return None
        poly = _newton_polynomial(k0, tail[: g + 1])
        for k, value in zip(ks, tail):
            if poly.evaluate(k) != value:
                return None
        polys.append(poly)
        max_degree = max(max_degree, g)
    return max_degree, polys


def detect_progressions(
    series: CoefficientSeries,
    d_max: int,
    g_max: int,
    n0_max: int,
    *,
    strict: bool = True,
) -> Optional[ProgressionDecomposition]:
    """Smallest-modulus decomposition of the computed coefficients, or None.

    None means the whole (d, g, n0) grid was scanned and nothing fits.
    With strict=True (the default) the computed prefix must cover the full
    grid, n0_max + d_max * (g_max + 2) coefficients, before a None is
    trusted; otherwise InsufficientDataError. With strict=False the
    scannable sub-grid is searched (used by `classify` under tight step
    budgets); a found decomposition is still verified on all data.
    """
    coeffs = series.computed_coefficients()
    count = len(coeffs)
    required = n0_max + d_max * (g_max + 2)
    if strict and count < required:
        raise InsufficientDataError(
            f"{count} coefficients cover less than the detection grid ({required})"
        )
    grid_complete = count >= required
    for d in range(1, d_max + 1):
        best: Optional[Tuple[int, int, List[RationalPoly]]] = None
        for n0 in range(n0_max + 1):
            found = _try_candidate(coeffs, d, n0, g_max)
            if found is None:
                continue
            degree, polys = found
            if best is None or (degree, n0) < (best[0], best[1]):
                best = (degree, n0, polys)
        if best is not None:
            degree, n0, polys = best
            return ProgressionDecomposition(
                modulus=d,
                threshold=n0,
                polynomials=tuple(polys),
                verified_range=count - 1,
            )
    if not grid_complete:
        raise InsufficientDataError(
            f"no decomposition in the scannable sub-grid; {count} coefficients "
            f"cannot cover the requested grid ({required})"
        )
    return None


def classify(
    f: PolySelfMap,
    observable: Optional[Observable],
    start: Sequence[Union[Fraction, int]],
    *,
    steps: int = 64,
    bit_budget: int = DEFAULT_BIT_BUDGET,
    d_max: int = 8,
    g_max: int = 8,
    n0_max: int = 16,
    n_min: int = 5,
) -> Classification:
    """Run the dichotomy on an orbit source under explicit budgets.

    EventuallyPolynomial when a verified decomposition exists; else
    GrowthEvidence when the window sup of ln h(c_n)/ln n reaches 1/r or
    the bit budget tripped (with enough data for a window); else
    Inconclusive, budgets echoed.
    """
    series = observable_series(f, observable, start, steps, bit_budget)
    budgets: Dict[str, object] = {
        "steps": steps,
        "bit_budget": bit_budget,
        "d_max": d_max,
        "g_max": g_max,
        "n0_max": n0_max,
        "n_min": n_min,
        "computed": series.computed,
    }
    try:
        decomposition = detect_progressions(
            series, d_max, g_max, n0_max, strict=False
        )
    except InsufficientDataError:
        decomposition = None
        budgets["detection_grid_covered"] = False
    if decomposition is not None:
        return Classification(
            "EventuallyPolynomial", decomposition, None, budgets, series.overflow
        )
    try:
        growth = growth_estimate(series, n_min)
    except InsufficientDataError:
        growth = None
    if growth is not None and (
        growth.sup_ratio >= growth.verdict_threshold or series.overflow is not None
    ):
        return Classification("GrowthEvidence", None, growth, budgets, series.overflow)
    return Classification("Inconclusive", None, growth, budgets, series.overflow)


def recurrence_to_spec(
    p: MultivariatePolynomial, seeds: Sequence[int]
) -> Tuple[PolySelfMap, Observable, Tuple[Fraction, ...]]:
    """Shift-map model of the order-r recurrence A(n+r) = p(A(n), ..., A(n+r-1)).

    The state is (A(n), ..., A(n+r-1)); the map shifts left and fills the
    last slot with p(state). The observable projects to the first
    coordinate, so coefficient n of the resulting series is A(n) itself
    with no index offset.
    """
    r = p.arity
    if len(seeds) != r:
        raise ArityMismatchError(f"need {r} seeds for an order-{r} recurrence")
    if not p.has_integer_coefficients():
        raise ValueError("recurrence polynomial must have integer coefficients")
    coordinates = [MultivariatePolynomial.variable(r, i) for i in range(1, r)]
    coordinates.append(p)
    self_map = PolySelfMap(tuple(coordinates))
    observable = Observable(MultivariatePolynomial.variable(r, 0))
    point = tuple(Fraction(int(s)) for s in seeds)
    return self_map, observable, point


def decomposition_consistent_with_denominator(
    decomposition: ProgressionDecomposition, denominator: RationalPoly
) -> bool:
    """Check every denominator root is a d-th root of unity of small order.

    Concretely: Q(t) divides (1 - t^d)^(g+1) with g the max polynomial
    degree, tested by exact polynomial division.
    """
    g = max(poly.degree for poly in decomposition.polynomials)
    cyclic = RationalPoly([1] + [0] * (decomposition.modulus - 1) + [-1])
    power = RationalPoly([1])
    for _ in range(g + 1):
        power = power * cyclic
    _, remainder = divmod(power, denominator)
    return remainder.is_zero()

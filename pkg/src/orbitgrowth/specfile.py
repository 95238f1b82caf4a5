"""Problem-spec files: a flat key = value format describing (f, lambda, P).

Example:

    name = fib
    r = 2
    vars = x, y
    map.1 = y
    map.2 = x + y
    lambda = x
    point = 0, 1
    steps = 64

Blank lines and lines starting with '#' are ignored. Required keys:
r, vars, map.1..map.r, point. `lambda` defaults to the first declared
variable (with a warning). Budget keys (steps, bit_budget, eta, pmax,
d_max, g_max, n0_max, n_min) are optional and fall back to the defaults
below; eta may be a rational like 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .heights import parse_rational
from .polyexpr import Observable, ParseError, PolySelfMap, parse_polynomial

DEFAULT_OPTIONS: Dict[str, object] = {
    "steps": 64,
    "bit_budget": 1_000_000,
    "eta": Fraction(1),
    "pmax": 200,
    "d_max": 8,
    "g_max": 8,
    "n0_max": 16,
    "n_min": 5,
}

_INT_OPTIONS = ("steps", "bit_budget", "pmax", "d_max", "g_max", "n0_max", "n_min")


class SpecError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{message}")
        self.line = line


@dataclass
class ProblemSpec:
    name: str
    r: int
    variables: Tuple[str, ...]
    map_exprs: Tuple[str, ...]
    lambda_expr: str
    point: Tuple[Fraction, ...]
    options: Dict[str, object] = field(default_factory=dict)
    self_map: PolySelfMap = None  # filled by parse_spec
    observable: Observable = None

    def option(self, key: str):
        return self.options[key]


def parse_spec(text: str, *, default_name: str = "problem") -> Tuple[ProblemSpec, List[str]]:
    """Parse and validate a spec; returns (spec, warnings)."""
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SpecError("expected 'key = value'", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise SpecError("empty key", lineno)
        if key in entries:
            raise SpecError(f"duplicate key '{key}'", lineno)
        entries[key] = (value, lineno)

    def take(key: str) -> Optional[Tuple[str, int]]:
        return entries.pop(key, None)

    name = take("name")
    name_value = name[0] if name else default_name

    r_entry = take("r")
    if r_entry is None:
        raise SpecError("missing required key 'r'")
    try:
        r = int(r_entry[0])
    except ValueError:
        raise SpecError(f"r must be an integer, got {r_entry[0]!r}", r_entry[1])
    if r < 1:
        raise SpecError("r must be >= 1", r_entry[1])

    vars_entry = take("vars")
    if vars_entry is None:
        raise SpecError("missing required key 'vars'")
    variables = tuple(v.strip() for v in vars_entry[0].split(",") if v.strip())
    if len(variables) != r:
        raise SpecError(
            f"declared {len(variables)} variables but r = {r}", vars_entry[1]
        )
    if len(set(variables)) != len(variables):
        raise SpecError("duplicate variable names", vars_entry[1])

    map_exprs = []
    map_lines = []
    for i in range(1, r + 1):
        entry = take(f"map.{i}")
        if entry is None:
            raise SpecError(f"missing required key 'map.{i}'")
        map_exprs.append(entry[0])
        map_lines.append(entry[1])

    warnings: List[str] = []
    lambda_entry = take("lambda")
    if lambda_entry is None:
        lambda_expr = variables[0]
        lambda_line = None
        warnings.append(
            f"no 'lambda' key; defaulting to first coordinate '{variables[0]}'"
        )
    else:
        lambda_expr, lambda_line = lambda_entry

    point_entry = take("point")
    if point_entry is None:
        raise SpecError("missing required key 'point'")
    point_tokens = [tok.strip() for tok in point_entry[0].split(",") if tok.strip()]
    if len(point_tokens) != r:
        raise SpecError(
            f"point has {len(point_tokens)} coordinates but r = {r}", point_entry[1]
        )
    try:
        point = tuple(parse_rational(tok) for tok in point_tokens)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad point coordinate: {exc}", point_entry[1])

    options = dict(DEFAULT_OPTIONS)
    for key in _INT_OPTIONS:
        entry = take(key)
        if entry is None:
            continue
        try:
            options[key] = int(entry[0])
        except ValueError:
            raise SpecError(f"{key} must be an integer, got {entry[0]!r}", entry[1])
    eta_entry = take("eta")
    if eta_entry is not None:
        try:
            options["eta"] = Fraction(eta_entry[0])
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"eta must be a rational, got {eta_entry[0]!r}", eta_entry[1])
        if options["eta"] <= 0:
            raise SpecError("eta must be positive", eta_entry[1])

    if entries:
        key, (_, lineno) = next(iter(entries.items()))
        raise SpecError(f"unknown key '{key}'", lineno)

    coordinates = []
    for expr, lineno in zip(map_exprs, map_lines):
        try:
            coordinates.append(parse_polynomial(expr, variables))
        except ParseError as exc:
            raise SpecError(f"map expression: {exc}", lineno)
    try:
        observable_poly = parse_polynomial(lambda_expr, variables)
    except ParseError as exc:
        raise SpecError(f"lambda expression: {exc}", lambda_line)

    spec = ProblemSpec(
        name=name_value,
        r=r,
        variables=variables,
        map_exprs=tuple(map_exprs),
        lambda_expr=lambda_expr,
        point=point,
        options=options,
        self_map=PolySelfMap(tuple(coordinates)),
        observable=Observable(observable_poly),
    )
    return spec, warnings


def load_spec(path) -> Tuple[ProblemSpec, List[str]]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_spec(text, default_name=path.stem)

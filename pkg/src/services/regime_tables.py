"""Boundary tables of admissible tuples.

Each row is stored as a base point plus a signed multiple of a small offset per
coordinate. A coordinate is flagged as a boundary when the base point sits on
a declared boundary; mirroring the offset across the base then breaks the
verdict of the row's scenario.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

from src.conf import messages
from src.services.errors import ParameterError, TableValidationError
from src.services.regime import ExampleClass, RegimeParams, RegimeVerdict, Rational, check, parse_rational

logger = logging.getLogger(__name__)

COORDS = ("gamma", "theta", "mu", "nu", "rho")
SYMBOLS = {"gamma": "γ", "theta": "θ", "mu": "μ", "nu": "ν", "rho": "ρ"}


class Scenario(str, enum.Enum):
    weak = "weak"
    pathwise_theta_high = "pathwise_theta_high"
    pathwise_theta_low = "pathwise_theta_low"

    @property
    def verdict_level(self) -> str:
        return "weak_DAalpha" if self is Scenario.weak else "pathwise_DAalpha"


@dataclass(frozen=True)
class Coord:
    base: Fraction
    sign: int = 0
    multiplier: int = 0
    boundary: bool = False

    def value(self, offset: Fraction, mirrored: bool = False) -> Fraction:
        step = self.sign * self.multiplier * offset
        return self.base - step if mirrored else self.base + step

    def mark(self) -> str:
        if self.sign == 0:
            return str(self.base)
        return f"{self.base}{'⁺' if self.sign > 0 else '⁻'}"


def exact(base) -> Coord:
    return Coord(Fraction(base))


def plus(base, multiplier: int = 1, boundary: bool = True) -> Coord:
    return Coord(Fraction(base), 1, multiplier, boundary)


def minus(base, multiplier: int = 1, boundary: bool = True) -> Coord:
    return Coord(Fraction(base), -1, multiplier, boundary)


@dataclass(frozen=True)
class RowTemplate:
    d: int
    gamma: Coord
    mu: Coord
    nu: Coord
    rho: Coord
    note: str = ""

    def coords(self, theta: Coord) -> Dict[str, Coord]:
        return {"gamma": self.gamma, "theta": theta, "mu": self.mu, "nu": self.nu, "rho": self.rho}


F = Fraction
HALF = exact(F(1, 2))
THETA_HIGH = minus(1)
THETA_LOW = plus(0, 10)

_HEAT_ROWS = [
    RowTemplate(1, plus(F(1, 4), 4), exact(0), plus(0, 2), minus(F(1, 8))),
    RowTemplate(1, exact(1), exact(0), minus(F(3, 4), 2), plus(F(-1, 4))),
    RowTemplate(1, plus(F(1, 2), 4), exact(0), plus(F(1, 4), 1, boundary=False), exact(0)),
    RowTemplate(2, plus(F(1, 2), 4), exact(0), plus(0, 2), minus(F(1, 4))),
    RowTemplate(2, exact(1), exact(0), minus(F(1, 2), 2), plus(0)),
    RowTemplate(2, plus(1, 4), exact(0), plus(F(1, 2), 1, boundary=False), exact(0)),
    RowTemplate(3, plus(F(3, 4), 4), exact(0), plus(0, 2), minus(F(3, 8))),
    RowTemplate(3, exact(1), exact(0), minus(F(1, 4), 2), plus(F(1, 4))),
    RowTemplate(3, plus(F(3, 2), 4), exact(0), plus(F(3, 4), 1, boundary=False), exact(0)),
]

_HEAT_ROWS_THETA_LOW = [
    RowTemplate(1, exact(F(1, 2)), exact(0), plus(0), plus(0)),
    RowTemplate(1, exact(1), exact(0), plus(F(1, 2), 1, boundary=False), plus(F(-1, 4))),
    RowTemplate(1, plus(F(1, 2), 4), exact(0), plus(0), exact(0)),
    RowTemplate(2, exact(1), exact(0), plus(0), plus(0)),
    RowTemplate(2, plus(1, 4), exact(0), plus(0), exact(0)),
    RowTemplate(3, exact(F(3, 2)), exact(0), plus(0), plus(0)),
    RowTemplate(3, plus(F(3, 2), 4), exact(0), plus(0), exact(0)),
]

_CRITICAL_ROW = RowTemplate(1, exact(1), exact(F(1, 8)), exact(F(1, 2)), exact(0), note="critical")

_BURGERS_ROWS = [
    RowTemplate(1, exact(1), plus(0, 2), minus(F(3, 4), 4), plus(F(-1, 4), 3)),
    RowTemplate(1, exact(1), exact(F(1, 4)), plus(F(1, 4)), plus(0)),
    RowTemplate(2, plus(F(5, 4), 4), exact(F(1, 4)), plus(F(1, 2), 2), minus(F(1, 8))),
    RowTemplate(2, plus(1, 4), exact(F(1, 2)), plus(0, 2), minus(F(1, 2))),
    RowTemplate(3, plus(F(7, 4), 4), exact(F(1, 4)), plus(F(3, 4), 2), minus(F(1, 8))),
    RowTemplate(3, plus(F(3, 2), 4), exact(F(1, 2)), plus(F(1, 4), 2), minus(F(1, 2))),
]

_BURGERS_ROWS_THETA_LOW = [
    RowTemplate(1, exact(1), exact(F(1, 4)), plus(F(1, 4)), plus(0)),
    RowTemplate(2, plus(F(3, 2), 4), exact(F(1, 2)), plus(0), exact(F(1, 4)), note="rho lowered from 1/2 to keep the trace condition"),
    RowTemplate(3, plus(F(9, 4), 4), exact(F(1, 2)), plus(F(1, 4)), exact(F(1, 8)), note="rho lowered from 1/2 to keep the trace condition"),
]


def _burgers_weak() -> List[RowTemplate]:
    return _BURGERS_ROWS[:1] + [_CRITICAL_ROW] + _BURGERS_ROWS[1:]


TABLES: Dict[Tuple[ExampleClass, Scenario], Tuple[Coord, List[RowTemplate]]] = {
    (ExampleClass.fractional_heat, Scenario.weak): (HALF, _HEAT_ROWS),
    (ExampleClass.fractional_heat, Scenario.pathwise_theta_high): (THETA_HIGH, _HEAT_ROWS),
    (ExampleClass.fractional_heat, Scenario.pathwise_theta_low): (THETA_LOW, _HEAT_ROWS_THETA_LOW),
    (ExampleClass.burgers, Scenario.weak): (HALF, _burgers_weak()),
    (ExampleClass.burgers, Scenario.pathwise_theta_high): (THETA_HIGH, _BURGERS_ROWS),
    (ExampleClass.burgers, Scenario.pathwise_theta_low): (THETA_LOW, _BURGERS_ROWS_THETA_LOW),
}

Offsets = Union[Rational, Mapping[str, Rational]]


def _offsets(offsets: Offsets) -> Dict[str, Fraction]:
    if isinstance(offsets, Mapping):
        unknown = set(offsets) - set(COORDS)
        if unknown:
            raise ParameterError(f"unknown offset coordinates: {sorted(unknown)}")
        default = parse_rational(offsets.get("default", 0), "offset") if "default" in offsets else None
        out = {}
        for name in COORDS:
            if name in offsets:
                out[name] = parse_rational(offsets[name], f"offset[{name}]")
            elif default is not None:
                out[name] = default
            else:
                raise ParameterError(f"missing offset for {name}")
    else:
        value = parse_rational(offsets, "offset")
        out = {name: value for name in COORDS}
    for name, value in out.items():
        if value <= 0:
            raise ParameterError(f"offset for {name} must be positive, got {value}")
    return out


@dataclass
class TableRow:
    example_class: ExampleClass
    scenario: Scenario
    index: int
    d: int
    coords: Dict[str, Coord]
    values: Dict[str, Fraction]
    offsets: Dict[str, Fraction]
    verdict: Optional[RegimeVerdict]
    note: str = ""

    @property
    def boundary_coords(self) -> List[str]:
        return [name for name in COORDS if self.coords[name].boundary]

    def marks(self) -> Dict[str, str]:
        return {name: self.coords[name].mark() for name in COORDS}

    def params(self, mirrored: Optional[str] = None) -> RegimeParams:
        values = dict(self.values)
        if mirrored is not None:
            values[mirrored] = self.coords[mirrored].value(self.offsets[mirrored], mirrored=True)
        return RegimeParams(self.d, values["gamma"], values["theta"], values["mu"], values["nu"], values["rho"],
                            example_class=self.example_class)

    def as_dict(self) -> dict:
        out = {"example_class": self.example_class.value, "scenario": self.scenario.value,
               "row": self.index, "d": self.d}
        for name in COORDS:
            out[name] = str(self.values[name])
            out[f"{name}_mark"] = self.coords[name].mark()
        out["boundary"] = ",".join(self.boundary_coords)
        out["offset"] = {name: str(v) for name, v in self.offsets.items()}
        if self.verdict is not None:
            out.update(weak=self.verdict.weak_DAalpha, pathwise=self.verdict.pathwise_DAalpha,
                       critical=self.verdict.critical)
        out["note"] = self.note
        return out


def _table_key(example_class: ExampleClass, scenario: Scenario) -> Tuple[ExampleClass, Scenario]:
    if example_class is ExampleClass.navier_stokes:
        return ExampleClass.burgers, scenario
    key = (example_class, scenario)
    if key not in TABLES:
        raise ParameterError(messages.NO_TABLE_FOR_CLASS.format(example_class=example_class.value))
    return key


def emit_table(example_class: Union[ExampleClass, str], scenario: Union[Scenario, str],
               offsets: Offsets) -> List[TableRow]:
    """
    The emit_table function builds the boundary table for a class and scenario at the given
    offsets and re-checks every row. Rows that do not pass at their scenario level are
    collected and raised together.

    :param example_class: ExampleClass: fractional_heat, burgers or navier_stokes
    :param scenario: Scenario: weak, pathwise_theta_high or pathwise_theta_low
    :param offsets: Offsets: one positive rational or one per coordinate
    :return: list of validated rows
    :raises TableValidationError: when any row fails, with one entry per failing row
    """
    example_class, scenario = ExampleClass(example_class), Scenario(scenario)
    theta, templates = TABLES[_table_key(example_class, scenario)]
    eps = _offsets(offsets)
    rows, failures = [], []
    for index, template in enumerate(templates, start=1):
        coords = template.coords(theta)
        values = {name: coords[name].value(eps[name]) for name in COORDS}
        row = TableRow(example_class, scenario, index, template.d, coords, values, eps, None, template.note)
        try:
            row.verdict = check(row.params())
        except ParameterError as err:
            failures.append({"row": index, "d": template.d, "predicates": [str(err)]})
            continue
        if not row.verdict.level(scenario.verdict_level):
            failures.append({"row": index, "d": template.d, "predicates": list(row.verdict.failed_conditions)})
            continue
        rows.append(row)
    if failures:
        raise TableValidationError(
            f"{len(failures)} row(s) of the {example_class.value}/{scenario.value} table fail at offsets "
            f"{ {k: str(v) for k, v in eps.items()} }",
            failures,
        )
    logger.debug("emitted %d rows for %s/%s", len(rows), example_class.value, scenario.value)
    return rows


def boundary_flips(row: TableRow) -> Dict[str, bool]:
    """For every flagged coordinate, whether mirroring its offset breaks the row's verdict."""
    flips = {}
    for name in row.boundary_coords:
        try:
            verdict = check(row.params(mirrored=name))
        except ParameterError:
            flips[name] = True
            continue
        flips[name] = not verdict.level(row.scenario.verdict_level)
    return flips

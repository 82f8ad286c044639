"""Exact admissibility of uniqueness regimes.

All conditions are written in units of the base operator (γ, μ, ν, ρ), which
is the hypothesis in (α, β, δ) multiplied through by γ > 0, and are evaluated
with ``fractions.Fraction`` so that boundary cases are decided exactly.
Every condition is affine in ρ; ``admissible_rho`` solves the same
conditions that ``check`` evaluates.
"""
from __future__ import annotations

import enum
import logging
import operator
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from src.conf import messages
from src.services.errors import ParameterError

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int, str]


class ExampleClass(str, enum.Enum):
    fractional_heat = "fractional_heat"
    burgers = "burgers"
    navier_stokes = "navier_stokes"
    cahn_hilliard = "cahn_hilliard"
    cahn_hilliard_quartic = "cahn_hilliard_quartic"
    reaction_diffusion = "reaction_diffusion"


class Level(str, enum.Enum):
    weak = "weak"
    pathwise = "pathwise"
    bounded = "bounded"
    h_data = "h_data"


def parse_rational(value: Rational, name: str = "value") -> Fraction:
    """
    The parse_rational function turns ints, Fractions and strings such as "3/4",
    "-1/4" or "0.25" into an exact Fraction. Floats are refused: they cannot carry
    the exact boundary values the checker has to decide.

    :param value: Rational: value to convert
    :param name: str: field name used in the error message
    :return: Fraction
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ParameterError(f"{name} must be given as an exact rational, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as err:
        raise ParameterError(f"{name}: cannot read {value!r} as a rational ({err})")


@dataclass(frozen=True)
class RegimeParams:
    d: int
    gamma: Fraction
    theta: Fraction
    mu: Fraction
    nu: Fraction
    rho: Fraction
    drift_bounded: bool = False
    example_class: ExampleClass = ExampleClass.fractional_heat
    p: Optional[Fraction] = None
    r: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("gamma", "theta", "mu", "nu", "rho"):
            object.__setattr__(self, name, parse_rational(getattr(self, name), name))
        for name in ("p", "r"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, parse_rational(getattr(self, name), name))
        object.__setattr__(self, "example_class", ExampleClass(self.example_class))
        if self.d not in (1, 2, 3):
            raise ParameterError(f"d must be 1, 2 or 3, got {self.d}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if not 0 < self.theta < 1:
            raise ParameterError(f"theta must lie in (0,1), got {self.theta}")
        if self.mu < 0 or self.nu < 0:
            raise ParameterError(f"mu and nu must be nonnegative, got mu={self.mu}, nu={self.nu}")
        self._check_class_fields()

    def _check_class_fields(self):
        cls = self.example_class
        if cls is ExampleClass.reaction_diffusion:
            if self.p is None or self.r is None:
                raise ParameterError("reaction_diffusion needs p and r")
            if self.gamma != 1:
                raise ParameterError("reaction_diffusion is posed with the Dirichlet Laplacian (gamma = 1)")
            mu, nu = reaction_diffusion_exponents(self.d, self.p, self.r)
            if (self.mu, self.nu) != (mu, nu):
                raise ParameterError(f"reaction_diffusion with p={self.p}, r={self.r} fixes mu={mu}, nu={nu}")
            return
        if self.p is not None or self.r is not None:
            raise ParameterError(f"p and r only apply to reaction_diffusion, not {cls.value}")
        if cls in (ExampleClass.cahn_hilliard, ExampleClass.cahn_hilliard_quartic):
            mu, nu = (Fraction(1), Fraction(0)) if cls is ExampleClass.cahn_hilliard else (Fraction(1, 2), Fraction(1))
            if self.gamma != 2 or (self.mu, self.nu) != (mu, nu):
                raise ParameterError(f"{cls.value} is posed on (I + A_N)^2 with mu={mu}, nu={nu}")

    @property
    def alpha(self) -> Fraction:
        return self.mu / self.gamma

    @property
    def beta(self) -> Fraction:
        return self.nu / self.gamma

    @property
    def delta(self) -> Fraction:
        return self.rho / self.gamma

    @classmethod
    def cahn_hilliard(cls, d: int, theta: Rational, rho: Rational, quartic: bool = False,
                      drift_bounded: bool = False) -> "RegimeParams":
        if quartic:
            return cls(d, Fraction(2), theta, Fraction(1, 2), Fraction(1), rho, drift_bounded,
                       ExampleClass.cahn_hilliard_quartic)
        return cls(d, Fraction(2), theta, Fraction(1), Fraction(0), rho, drift_bounded, ExampleClass.cahn_hilliard)

    @classmethod
    def reaction_diffusion(cls, d: int, theta: Rational, p: Rational, r: Rational, rho: Rational,
                           drift_bounded: bool = False) -> "RegimeParams":
        p, r = parse_rational(p, "p"), parse_rational(r, "r")
        mu, nu = reaction_diffusion_exponents(d, p, r)
        return cls(d, Fraction(1), theta, mu, nu, rho, drift_bounded, ExampleClass.reaction_diffusion, p, r)

    def as_dict(self) -> dict:
        out = {"d": self.d, "gamma": str(self.gamma), "theta": str(self.theta), "mu": str(self.mu),
               "nu": str(self.nu), "rho": str(self.rho), "alpha": str(self.alpha), "beta": str(self.beta),
               "delta": str(self.delta), "drift_bounded": self.drift_bounded,
               "example_class": self.example_class.value}
        if self.p is not None:
            out.update(p=str(self.p), r=str(self.r))
        return out


def reaction_diffusion_exponents(d: int, p: Fraction, r: Fraction) -> Tuple[Fraction, Fraction]:
    if r <= 0:
        raise ParameterError(f"r must be positive, got {r}")
    return Fraction(d) * (r - 2) / (4 * r), Fraction(d) * (2 * (p - 1) - r) / (4 * r)


_RELATIONS: Dict[str, Callable[[Fraction, Fraction], bool]] = {
    ">": operator.gt, ">=": operator.ge, "<": operator.lt, "<=": operator.le,
}
_PRETTY = {">": ">", ">=": "≥", "<": "<", "<=": "≤"}


@dataclass(frozen=True)
class Condition:
    """A predicate ``slope·ρ + offset  REL  bound``; ``slope == 0`` when ρ does not enter."""
    name: str
    text: str
    level: Level
    slope: Fraction
    offset: Fraction
    relation: str
    bound: Fraction

    def lhs(self, rho: Fraction) -> Fraction:
        return self.slope * rho + self.offset

    def holds(self, rho: Fraction) -> bool:
        return _RELATIONS[self.relation](self.lhs(rho), self.bound)

    def render(self, rho: Fraction) -> str:
        return f"{self.text}: {self.lhs(rho)} {_PRETTY[self.relation]} {self.bound}"


def _cond(name, text, level, relation, bound, offset, slope=Fraction(0)) -> Condition:
    return Condition(name, text, level, Fraction(slope), Fraction(offset), relation, Fraction(bound))


def conditions(params: RegimeParams) -> List[Condition]:
    """All predicates of the weak, pathwise, bounded-drift and H-data levels for ``params``."""
    d, g, t, m, n = params.d, params.gamma, params.theta, params.mu, params.nu
    half_d = Fraction(d, 2)
    out = [
        _cond("alpha_range", "μ < γ", Level.weak, "<", g, m),
        _cond("delta_lower", "ρ > μ − γ/2", Level.weak, ">", m - g / 2, 0, slope=1),
        _cond("delta_upper", "ρ ≤ γ/2", Level.weak, "<=", g / 2, 0, slope=1),
        _cond("beta_delta", "ν + ρ ≤ γ/2", Level.weak, "<=", g / 2, n, slope=1),
        _cond("noise_trace", "γ + 2ρ − 2μ > d/2", Level.weak, ">", half_d, g - 2 * m, slope=2),
    ]
    out += _class_conditions(params)
    out += [
        _cond("pathwise_trace", "γ(1+θ) − 2ν − 2(1−θ)ρ − 2θμ > d/2", Level.pathwise, ">", half_d,
              g * (1 + t) - 2 * n - 2 * t * m, slope=-2 * (1 - t)),
        _cond("pathwise_balance", "θμ + (1−θ)ρ < μ + γθ/2", Level.pathwise, "<", m + g * t / 2,
              t * m, slope=1 - t),
        _cond("drift_bounded", "B bounded", Level.bounded, ">", 0, 1 if params.drift_bounded else 0),
        _cond("h_data_balance", "θμ + (1−θ)ρ < γθ/2", Level.h_data, "<", g * t / 2, t * m, slope=1 - t),
    ]
    return out


def _class_conditions(params: RegimeParams) -> List[Condition]:
    cls, d, m, n = params.example_class, params.d, params.mu, params.nu
    if cls in (ExampleClass.burgers, ExampleClass.navier_stokes):
        if d == 1:
            return [
                _cond("burgers_mu_positive", "μ > 0", Level.weak, ">", 0, m),
                _cond("burgers_nu_lower", "ν ≥ max{0, 3/4 − 2μ}", Level.weak, ">=", max(Fraction(0), Fraction(3, 4) - 2 * m), n),
            ]
        return [
            _cond("burgers_mu_lower", "μ ≥ 1/4", Level.weak, ">=", Fraction(1, 4), m),
            _cond("burgers_mu_upper", "μ ≤ 1/2", Level.weak, "<=", Fraction(1, 2), m),
            _cond("burgers_nu_lower", "ν ≥ 1/2 − μ", Level.weak, ">=", Fraction(1, 2) - m, n),
            _cond("burgers_product", "2μ + ν > (d+2)/4", Level.weak, ">", Fraction(d + 2, 4), 2 * m + n),
        ]
    if cls is ExampleClass.cahn_hilliard:
        return [
            _cond("cahn_hilliard_rho_lower", "ρ > d/4", Level.weak, ">", Fraction(d, 4), 0, slope=1),
            _cond("cahn_hilliard_rho_upper", "ρ ≤ 1", Level.weak, "<=", 1, 0, slope=1),
            _cond("cahn_hilliard_rho_open", "ρ < 1", Level.pathwise, "<", 1, 0, slope=1),
        ]
    if cls is ExampleClass.cahn_hilliard_quartic:
        return [
            _cond("cahn_hilliard_rho_lower", "ρ > d/4 − 1/2", Level.weak, ">", Fraction(d, 4) - Fraction(1, 2), 0, slope=1),
            _cond("cahn_hilliard_rho_upper", "ρ ≤ 1", Level.weak, "<=", 1, 0, slope=1),
            _cond("cahn_hilliard_rho_open", "ρ < 1", Level.pathwise, "<", 1, 0, slope=1),
        ]
    if cls is ExampleClass.reaction_diffusion:
        p, r = params.p, params.r
        return [
            _cond("reaction_p", "p > 2", Level.weak, ">", 2, p),
            _cond("reaction_r_lower", "r ≥ max{2, p−1}", Level.weak, ">=", max(Fraction(2), p - 1), r),
            _cond("reaction_r_upper", "r ≤ 2(p−1)", Level.weak, "<=", 2 * (p - 1), r),
        ]
    return []


@dataclass(frozen=True)
class RegimeVerdict:
    weak_DAalpha: bool
    weak_H: bool
    pathwise_DAalpha: bool
    pathwise_H: bool
    critical: bool
    failed_conditions: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()

    @property
    def admissible(self) -> bool:
        return self.weak_DAalpha

    def level(self, name: str) -> bool:
        return getattr(self, name)

    def as_dict(self) -> dict:
        return {
            "weak_DAalpha": self.weak_DAalpha, "weak_H": self.weak_H,
            "pathwise_DAalpha": self.pathwise_DAalpha, "pathwise_H": self.pathwise_H,
            "critical": self.critical, "failed_conditions": list(self.failed_conditions),
            "notes": list(self.notes),
        }


def check(params: RegimeParams) -> RegimeVerdict:
    """
    The check function evaluates every hypothesis for the tuple and combines them
    into the four verdict levels. The critical flag only signals that a smallness
    condition on the drift is needed; it never makes a verdict false.

    :param params: RegimeParams: the full parameter tuple
    :return: RegimeVerdict with the failed predicates rendered with exact values
    """
    rho = params.rho
    by_level: Dict[Level, bool] = {level: True for level in Level}
    failed = []
    for cond in conditions(params):
        if not cond.holds(rho):
            by_level[cond.level] = False
            failed.append(f"{cond.name}: {cond.render(rho)}")

    weak = by_level[Level.weak]
    pathwise = weak and by_level[Level.pathwise]
    bounded = by_level[Level.bounded]
    critical = params.nu + params.rho == params.gamma / 2
    notes = (messages.CRITICAL_SMALLNESS, messages.CRITICAL_WEAK_NOTE) if critical else ()
    return RegimeVerdict(
        weak_DAalpha=weak,
        weak_H=weak and bounded,
        pathwise_DAalpha=pathwise,
        pathwise_H=pathwise and bounded and by_level[Level.h_data],
        critical=critical,
        failed_conditions=tuple(failed),
        notes=notes,
    )


@dataclass(frozen=True)
class Interval:
    """Rational interval; ``None`` endpoints are infinite."""
    lower: Optional[Fraction]
    upper: Optional[Fraction]
    lower_closed: bool = False
    upper_closed: bool = False

    @property
    def empty(self) -> bool:
        if self.lower is None or self.upper is None:
            return False
        if self.lower < self.upper:
            return False
        return not (self.lower == self.upper and self.lower_closed and self.upper_closed)

    def __contains__(self, x: Fraction) -> bool:
        if self.lower is not None and (x < self.lower or (x == self.lower and not self.lower_closed)):
            return False
        if self.upper is not None and (x > self.upper or (x == self.upper and not self.upper_closed)):
            return False
        return True

    def __str__(self) -> str:
        left = "[" if self.lower_closed else "("
        right = "]" if self.upper_closed else ")"
        lo = "-inf" if self.lower is None else str(self.lower)
        hi = "+inf" if self.upper is None else str(self.upper)
        return f"{left}{lo}, {hi}{right}"

    def as_dict(self) -> dict:
        return {"lower": None if self.lower is None else str(self.lower),
                "upper": None if self.upper is None else str(self.upper),
                "lower_closed": self.lower_closed, "upper_closed": self.upper_closed,
                "text": str(self)}


def _solve(conds: List[Condition]) -> List[Interval]:
    lower, lower_closed = None, False
    upper, upper_closed = None, False
    for cond in conds:
        if cond.slope == 0:
            if not cond.holds(Fraction(0)):
                return []
            continue
        point = (cond.bound - cond.offset) / cond.slope
        relation = cond.relation
        if cond.slope < 0:
            relation = {">": "<", ">=": "<=", "<": ">", "<=": ">="}[relation]
        closed = relation in (">=", "<=")
        # on equal endpoints the open bound wins
        if relation in (">", ">="):
            if lower is None or point > lower:
                lower, lower_closed = point, closed
            elif point == lower:
                lower_closed = lower_closed and closed
        else:
            if upper is None or point < upper:
                upper, upper_closed = point, closed
            elif point == upper:
                upper_closed = upper_closed and closed
    interval = Interval(lower, upper, lower_closed, upper_closed)
    return [] if interval.empty else [interval]


@dataclass(frozen=True)
class RhoIntervals:
    weak: List[Interval] = field(default_factory=list)
    pathwise: List[Interval] = field(default_factory=list)
    pathwise_H: List[Interval] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {level: [i.as_dict() for i in getattr(self, level)] for level in ("weak", "pathwise", "pathwise_H")}


def admissible_rho(d: int, gamma: Rational, theta: Rational, mu: Rational, nu: Rational,
                   drift_bounded: bool = False, example_class: ExampleClass = ExampleClass.fractional_heat,
                   p: Optional[Rational] = None, r: Optional[Rational] = None) -> RhoIntervals:
    """
    The admissible_rho function returns, for every verdict level, the exact set of
    noise exponents ρ making the tuple admissible (one interval or nothing).

    :param d: int: space dimension
    :param gamma: Rational: power of the base operator
    :param theta: Rational: Hölder exponent of the drift
    :param mu: Rational: data exponent
    :param nu: Rational: target exponent
    :param drift_bounded: bool: whether B is bounded (needed for the H-data level)
    :param example_class: ExampleClass: class whose structural constraints apply
    :return: RhoIntervals with weak, pathwise and pathwise_H intervals
    """
    probe = RegimeParams(d, gamma, theta, mu, nu, Fraction(0), drift_bounded, example_class,
                         None if p is None else parse_rational(p, "p"),
                         None if r is None else parse_rational(r, "r"))
    conds = conditions(probe)
    weak = [c for c in conds if c.level is Level.weak]
    pathwise = weak + [c for c in conds if c.level is Level.pathwise]
    pathwise_h = pathwise + [c for c in conds if c.level in (Level.bounded, Level.h_data)]
    return RhoIntervals(weak=_solve(weak), pathwise=_solve(pathwise), pathwise_H=_solve(pathwise_h))


def with_rho(params: RegimeParams, rho: Rational) -> RegimeParams:
    return replace(params, rho=parse_rational(rho, "rho"))

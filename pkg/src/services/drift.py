"""Catalog of drift nonlinearities B and their regime metadata.

Every drift is evaluated in coefficient space: states are mapped to a
collocation grid of ``2·n`` points, nonlinear terms are formed pointwise and
the result is projected back onto the first ``n`` modes. Exponents μ and ν
of composition drifts act through the base operator A° (the Laplacian),
so that α = μ/γ and β = ν/γ for A = (A°)^γ.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from src.services.errors import ConfigurationError, ParameterError
from src.services.noise import NoiseStream
from src.services.regime import ExampleClass
from src.services.spectral import (
    Basis,
    ModeVector,
    SpectralOperator,
    derivative_matrix,
    grid_coefficients,
    grid_values,
    second_derivative_factors,
    sobolev_norms,
)

logger = logging.getLogger(__name__)

HOLDER_SAFETY = 2.0


class DriftKind(str, enum.Enum):
    zero = "zero"
    composition = "composition"
    burgers1d = "burgers1d"
    cahn_hilliard1d = "cahn_hilliard1d"
    reaction_diffusion1d = "reaction_diffusion1d"


class FunctionKind(str, enum.Enum):
    power_holder = "power_holder"
    bounded_holder = "bounded_holder"
    sine = "sine"
    const = "const"


@dataclass(frozen=True)
class ScalarFunction:
    """
    Pointwise nonlinearity F: power_holder(θ) u ↦ sign(u)|u|^θ, bounded_holder(θ)
    u ↦ sign(u)·min(1, |u|^θ), sine u ↦ sin(u) and const(c).
    """
    kind: FunctionKind
    theta: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FunctionKind(self.kind))
        if self.kind in (FunctionKind.power_holder, FunctionKind.bounded_holder) and not 0 < self.theta <= 1:
            raise ParameterError(f"Hölder exponent must lie in (0,1], got {self.theta}")

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.kind is FunctionKind.power_holder:
            return np.sign(u) * np.abs(u) ** self.theta
        if self.kind is FunctionKind.bounded_holder:
            return np.sign(u) * np.minimum(1.0, np.abs(u) ** self.theta)
        if self.kind is FunctionKind.sine:
            return np.sin(u)
        return np.full_like(u, self.c, dtype=float)

    @property
    def bounded(self) -> bool:
        return self.kind is not FunctionKind.power_holder

    @property
    def sup(self) -> Optional[float]:
        if self.kind is FunctionKind.power_holder:
            return None
        if self.kind is FunctionKind.const:
            return abs(self.c)
        return 1.0

    @property
    def holder_exponent(self) -> float:
        if self.kind in (FunctionKind.power_holder, FunctionKind.bounded_holder):
            return self.theta
        return 1.0


@dataclass(frozen=True)
class DriftSpec:
    """
    The DriftSpec class describes B. ``mu`` and ``nu`` are the composition exponents
    for composition drifts and the declared regularity pair for Burgers;
    ``poly`` holds F₁ coefficients in increasing degree for Cahn–Hilliard and
    reaction–diffusion; ``shift`` is the constant z₀ subtracted in the critical regime.
    """
    kind: DriftKind
    F: Optional[ScalarFunction] = None
    mu: float = 0.0
    nu: float = 0.0
    poly: Optional[Tuple[float, ...]] = None
    scale: float = 1.0
    r: Optional[float] = None
    shift: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kind", DriftKind(self.kind))
        if self.poly is not None:
            object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))
        object.__setattr__(self, "shift", tuple(float(c) for c in self.shift))
        if self.mu < 0 or self.nu < 0:
            raise ParameterError(f"exponents must be nonnegative, got mu={self.mu}, nu={self.nu}")
        validate = {
            DriftKind.composition: self._validate_composition,
            DriftKind.burgers1d: self._validate_burgers,
            DriftKind.cahn_hilliard1d: self._validate_cahn_hilliard,
            DriftKind.reaction_diffusion1d: self._validate_reaction_diffusion,
        }.get(self.kind)
        if validate is not None:
            validate()

    def _validate_composition(self):
        if self.F is None:
            raise ParameterError("composition drift needs F")

    def _validate_burgers(self):
        # product estimate ranges for d = 1
        if not self.mu > 0 or self.nu < max(0.0, 0.75 - 2.0 * self.mu):
            raise ParameterError(f"Burgers regularity pair (mu={self.mu}, nu={self.nu}) outside mu > 0, "
                                 "nu >= max(0, 3/4 - 2mu)")
        if self.F is not None and not self.F.bounded:
            raise ParameterError("the Burgers perturbation must be bounded")

    def _validate_cahn_hilliard(self):
        if self.poly is None:
            object.__setattr__(self, "poly", (0.0, -1.0, 0.0, 1.0))
        if self.F is not None and not self.F.bounded:
            raise ParameterError("the Cahn–Hilliard perturbation F₂ must be bounded")

    def _validate_reaction_diffusion(self):
        if self.poly is None:
            object.__setattr__(self, "poly", (0.0, 1.0, 0.0, -1.0))
        poly = Polynomial(self.poly).trim()
        degree = poly.degree()
        if degree < 3 or degree % 2 == 0:
            raise ParameterError("reaction-diffusion F₁ must be an odd polynomial of degree ≥ 3")
        if any(abs(c) > 0 for c in poly.coef[0::2]):
            raise ParameterError("reaction-diffusion F₁ must be odd")
        if not poly.coef[-1] < 0:
            raise ParameterError("reaction-diffusion F₁ must have a negative leading coefficient")
        if self.F is not None and not self.F.bounded:
            raise ParameterError("the reaction-diffusion perturbation F₂ must be bounded")
        p = degree + 1
        r = float(max(2, p - 1)) if self.r is None else self.r
        if not max(2, p - 1) <= r <= 2 * (p - 1):
            raise ParameterError(f"r={r} outside [max(2, p-1), 2(p-1)] for p={p}")
        object.__setattr__(self, "r", r)

    @classmethod
    def zero(cls) -> "DriftSpec":
        return cls(DriftKind.zero)

    @classmethod
    def composition(cls, F: ScalarFunction, mu: float = 0.0, nu: float = 0.0) -> "DriftSpec":
        return cls(DriftKind.composition, F=F, mu=mu, nu=nu)

    @classmethod
    def burgers(cls, mu: float = 0.25, nu: float = 0.25, scale: float = 1.0) -> "DriftSpec":
        return cls(DriftKind.burgers1d, mu=mu, nu=nu, scale=scale)

    @property
    def degree(self) -> Optional[int]:
        return None if self.poly is None else Polynomial(self.poly).trim().degree()


@dataclass(frozen=True)
class DriftMetadata:
    alpha: float
    beta: float
    theta: Optional[float]
    bounded: bool
    C_B: Optional[float]
    example_class: ExampleClass
    notes: Tuple[str, ...] = ()
    p: Optional[float] = None
    r: Optional[float] = None

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "theta": self.theta, "bounded": self.bounded,
                "C_B": self.C_B, "example_class": self.example_class.value, "notes": list(self.notes),
                "p": self.p, "r": self.r}


_REQUIRED_BASIS = {
    DriftKind.composition: Basis.dirichlet_sine,
    DriftKind.burgers1d: Basis.dirichlet_sine,
    DriftKind.reaction_diffusion1d: Basis.dirichlet_sine,
    DriftKind.cahn_hilliard1d: Basis.neumann_shifted_cosine,
}
_REQUIRED_POWER = {DriftKind.cahn_hilliard1d: 2.0, DriftKind.reaction_diffusion1d: 1.0}


def check_basis(spec: DriftSpec, op: SpectralOperator):
    required = _REQUIRED_BASIS.get(spec.kind)
    if required is None:
        return
    allowed = (required, Basis.neumann_shifted_cosine) if spec.kind is DriftKind.composition else (required,)
    if op.basis not in allowed:
        raise ConfigurationError(f"{spec.kind.value} drift is not defined on the {op.basis.value} basis")
    power = _REQUIRED_POWER.get(spec.kind)
    if power is not None and op.power != power:
        raise ConfigurationError(f"{spec.kind.value} drift is posed with power {power}, got {op.power}")


def metadata(spec: DriftSpec, op: SpectralOperator) -> DriftMetadata:
    """
    The metadata function describes the drift in regime terms: exponents (α, β), Hölder
    exponent θ, boundedness and, when available in closed form, the bound C_B.

    :param spec: DriftSpec: the drift
    :param op: SpectralOperator: ambient operator, whose power γ converts exponents
    :return: DriftMetadata
    """
    gamma = op.power
    if spec.kind is DriftKind.zero:
        return DriftMetadata(0.0, 0.0, None, True, 0.0, ExampleClass.fractional_heat)
    if spec.kind is DriftKind.composition:
        F = spec.F
        c_b = None if F.sup is None else max(1.0, F.sup)
        return DriftMetadata(spec.mu / gamma, spec.nu / gamma, F.holder_exponent, F.bounded, c_b,
                             ExampleClass.fractional_heat)
    if spec.kind is DriftKind.burgers1d:
        return DriftMetadata(spec.mu / gamma, spec.nu / gamma, None, False, None, ExampleClass.burgers,
                             ("B₁ is locally Lipschitz between the declared spaces",))
    if spec.kind is DriftKind.cahn_hilliard1d:
        theta = None if spec.F is None else spec.F.holder_exponent
        return DriftMetadata(1.0 / gamma, 0.0, theta, False, None, ExampleClass.cahn_hilliard,
                             ("polynomial part is locally Lipschitz",))
    p = float(spec.degree + 1)
    mu, nu = (spec.r - 2.0) / (4.0 * spec.r), (2.0 * (p - 1.0) - spec.r) / (4.0 * spec.r)
    theta = None if spec.F is None else spec.F.holder_exponent
    return DriftMetadata(mu / gamma, nu / gamma, theta, False, None, ExampleClass.reaction_diffusion,
                         ("dissipative polynomial, locally Lipschitz",), p=p, r=spec.r)


def _rational(value: float) -> Fraction:
    return Fraction(value).limit_denominator(10 ** 6)


def regime_exponents(spec: DriftSpec, op: SpectralOperator, delta: float) -> dict:
    """Exact (γ, μ, ν, ρ) for handing a simulated configuration to the regime checker."""
    meta = metadata(spec, op)
    gamma = _rational(op.power)
    out = {"gamma": gamma, "mu": _rational(meta.alpha * op.power), "nu": _rational(meta.beta * op.power),
           "rho": _rational(delta * op.power), "example_class": meta.example_class, "drift_bounded": meta.bounded}
    if meta.example_class is ExampleClass.cahn_hilliard:
        out.update(gamma=Fraction(2), mu=Fraction(1), nu=Fraction(0))
    if meta.example_class is ExampleClass.reaction_diffusion:
        out.update(p=_rational(meta.p), r=_rational(meta.r))
    return out


def _grid(n: int) -> int:
    return 2 * n


def _composition(spec: DriftSpec, op: SpectralOperator, coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    lam0 = op.base_eigenvalues[:n]
    u = grid_values(op, lam0 ** spec.mu * coeffs, _grid(n))
    return lam0 ** spec.nu * grid_coefficients(op, spec.F(u), n)


def _burgers(spec: DriftSpec, op: SpectralOperator, coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    m = _grid(n)
    u = grid_values(op, coeffs, m)
    u_x = coeffs @ derivative_matrix(op.basis, n, m).T
    out = spec.scale * grid_coefficients(op, u * u_x, n)
    if spec.F is not None:
        out = out + _composition(spec, op, coeffs)
    return out


def _cahn_hilliard(spec: DriftSpec, op: SpectralOperator, coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    m = _grid(n)
    f1 = Polynomial(spec.poly)
    df1, d2f1 = f1.deriv(1), f1.deriv(2)
    u = grid_values(op, coeffs, m)
    u_x = coeffs @ derivative_matrix(op.basis, n, m).T
    u_xx = grid_values(op, second_derivative_factors(op, n) * coeffs, m)
    # Δ F₁(u) = F₁''(u)|u'|² + F₁'(u)u''
    pointwise = d2f1(u) * u_x ** 2 + df1(u) * u_xx
    if spec.F is not None:
        pointwise = pointwise + spec.F(u)
    lam0 = op.base_eigenvalues[:n]
    # φ - 2Δφ with -Δ = A° - I on the shifted Neumann basis
    return grid_coefficients(op, pointwise, n) + (2.0 * lam0 - 1.0) * coeffs


def _reaction_diffusion(spec: DriftSpec, op: SpectralOperator, coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    u = grid_values(op, coeffs, _grid(n))
    pointwise = Polynomial(spec.poly)(u)
    if spec.F is not None:
        pointwise = pointwise + spec.F(u)
    return grid_coefficients(op, pointwise, n)


_EVALUATORS = {
    DriftKind.composition: _composition,
    DriftKind.burgers1d: _burgers,
    DriftKind.cahn_hilliard1d: _cahn_hilliard,
    DriftKind.reaction_diffusion1d: _reaction_diffusion,
}


def evaluate(spec: DriftSpec, op: SpectralOperator, coeffs: np.ndarray) -> np.ndarray:
    """Batched B over the last axis of a coefficient array of shape (..., n)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if spec.kind is DriftKind.zero:
        return np.zeros_like(coeffs)
    check_basis(spec, op)
    if coeffs.shape[-1] > op.n_modes:
        raise ConfigurationError(f"state has {coeffs.shape[-1]} modes, the operator only {op.n_modes}")
    return _EVALUATORS[spec.kind](spec, op, coeffs)


def eval_drift(spec: DriftSpec, op: SpectralOperator, x: ModeVector) -> ModeVector:
    """B(x) for one state; the result carries Sobolev index -β."""
    if not np.all(np.isfinite(x.coeffs)):
        raise ParameterError("drift evaluated at a non-finite state")
    meta = metadata(spec, op)
    return ModeVector(evaluate(spec, op, x.coeffs), -meta.beta)


def _ball_samples(rng: np.random.Generator, n: int, count: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random((count, 1)) ** (1.0 / n))


def holder_profile(spec: DriftSpec, op: SpectralOperator, theta_test: float, radii: Sequence[float],
                   n_pairs: int, stream: NoiseStream) -> np.ndarray:
    """
    The holder_profile function samples pairs once in the largest D(A^α)-ball and reports,
    for every radius, the largest ratio ‖B(x) - B(y)‖_{-β} / ‖x - y‖_α^θ over pairs inside
    that ball. Smaller balls use a subset of the pairs, so the profile is nondecreasing.

    :param spec: DriftSpec: the drift
    :param op: SpectralOperator: operator giving the norms
    :param theta_test: float: tested Hölder exponent
    :param radii: Sequence[float]: ball radii in the D(A^α) norm
    :param n_pairs: int: number of sampled pairs
    :param stream: NoiseStream: source of the sampling generator
    :return: array of lower bounds of the local seminorm, one per radius
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ParameterError("radius must be positive")
    if n_pairs < 1:
        raise ParameterError("n_pairs must be at least 1")
    if not 0 < theta_test <= 1:
        raise ParameterError(f"theta_test must lie in (0,1], got {theta_test}")
    if spec.kind is DriftKind.zero:
        return np.zeros(radii.shape)

    meta = metadata(spec, op)
    n = op.n_modes
    lam = op.eigenvalues
    big = float(radii.max())
    rng = stream.generator()
    n_far = (n_pairs + 1) // 2
    z_x = _ball_samples(rng, n, n_pairs, big)
    z_y = np.empty_like(z_x)
    z_y[:n_far] = _ball_samples(rng, n, n_far, big)
    # close pairs probe small separations
    n_near = n_pairs - n_far
    if n_near:
        direction = rng.standard_normal((n_near, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        step = big * 10.0 ** (-6.0 * rng.random((n_near, 1)))
        near = z_x[n_far:] + step * direction
        norms = np.linalg.norm(near, axis=1, keepdims=True)
        z_y[n_far:] = np.where(norms > big, near * (big / norms), near)

    x = lam ** (-meta.alpha) * z_x
    y = lam ** (-meta.alpha) * z_y
    numerator = sobolev_norms(op, -meta.beta, evaluate(spec, op, x) - evaluate(spec, op, y))
    distance = np.linalg.norm(z_x - z_y, axis=1)
    ratio = np.where(distance > 0, numerator / np.where(distance > 0, distance, 1.0) ** theta_test, 0.0)
    reach = np.maximum(np.linalg.norm(z_x, axis=1), np.linalg.norm(z_y, axis=1))
    return np.array([float(np.max(ratio[reach <= r * (1 + 1e-12)], initial=0.0)) for r in radii])


def holder_estimate(spec: DriftSpec, op: SpectralOperator, theta_test: float, radius: float,
                    n_pairs: int, stream: NoiseStream) -> float:
    return float(holder_profile(spec, op, theta_test, [radius], n_pairs, stream)[0])


@dataclass(frozen=True)
class BoundConstant:
    value: float
    source: str


def bound_constant(spec: DriftSpec, op: SpectralOperator, stream: NoiseStream, n_pairs: int,
                   radius: float = 1.0) -> BoundConstant:
    """C_B: the analytic value when the catalog has one, otherwise a safety multiple of the sampled seminorm."""
    meta = metadata(spec, op)
    if meta.C_B is not None:
        return BoundConstant(meta.C_B, "analytic")
    theta = meta.theta if meta.theta is not None else 1.0
    estimate = holder_estimate(spec, op, theta, radius, n_pairs, stream)
    value = max(1.0, HOLDER_SAFETY * estimate)
    logger.info("C_B for %s taken from sampled seminorm %.4g (x%.1f)", spec.kind.value, estimate, HOLDER_SAFETY)
    return BoundConstant(value, "holder_estimate")

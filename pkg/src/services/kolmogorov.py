"""Finite-dimensional Kolmogorov equation on the first n ≤ 4 modes.

The equation c̄λ_k u − L u − ⟨B_n, Du⟩ = g is solved in its mild form
u(x) = ∫₀^∞ e^{−c̄λ_k t} R_t[⟨B_n, Du⟩ + g](x) dt by Picard iteration on a
tensor grid. Gaussian expectations R_t φ use a Monte Carlo or a Gauss–Hermite
rule, and Du is produced by the Malliavin weight estimator at every sweep.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RegularGridInterpolator
from scipy.special import gamma as euler_gamma

from src.conf import messages
from src.conf.config import settings
from src.services import drift as drifts
from src.services.drift import DriftKind, DriftSpec
from src.services.errors import (
    ConfigurationError,
    DimensionError,
    DivergenceError,
    EstimateRangeError,
    ParameterError,
    RegimeMismatchError,
)
from src.services.noise import NoiseStream, convolution_variance
from src.services.spectral import SpectralOperator

logger = logging.getLogger(__name__)

MAX_MODES = 4
CRITICAL_TOL = 1e-12
CHUNK_POINTS = 2 ** 17
DIVERGENCE_SWEEPS = 3
UNIFORMITY_FACTOR = 2.0

Forcing = Callable[[np.ndarray], np.ndarray]


class Regime(str, enum.Enum):
    sub_critical = "sub_critical"
    critical = "critical"


def smallness_threshold(beta: float, theta: float, m_constant: Optional[float] = None) -> float:
    """Largest admissible sup‖B − z₀‖_{−β} in the critical regime."""
    m = settings.m_constant if m_constant is None else m_constant
    return theta * (1.0 - theta) * (1.0 - beta) / (4.0 * m * (2.0 - theta))


def cbar(beta: float, delta: float, theta: float, lambda1: float, c_b: float,
         regime: Regime = Regime.sub_critical, c_tilde: Optional[float] = None,
         m_constant: Optional[float] = None, safety: Optional[float] = None) -> float:
    """
    The cbar function returns the lower bound on the constant c̄ of the Kolmogorov
    equation, multiplied by a safety factor.

    :param beta: float: drift exponent β
    :param delta: float: noise exponent δ, with β + δ ≤ 1/2
    :param theta: float: Hölder exponent θ of the drift
    :param lambda1: float: first eigenvalue λ₁
    :param c_b: float: bound C_B of the drift
    :param regime: Regime: sub_critical when β + δ < 1/2, critical when β + δ = 1/2
    :param c_tilde: float: sup‖B − z₀‖, required in the critical regime
    :param m_constant: float: interpolation constant M, defaults to settings.m_constant
    :param safety: float: multiplier of the bound, defaults to settings.cbar_safety
    :return: safety · bound
    """
    m = settings.m_constant if m_constant is None else m_constant
    safety = settings.cbar_safety if safety is None else safety
    regime = Regime(regime)
    if not lambda1 > 0:
        raise ParameterError(f"λ₁ must be positive, got {lambda1}")
    if c_b < 0 or m <= 0:
        raise ParameterError("C_B must be nonnegative and M positive")
    if not 0 < theta < 1:
        raise ParameterError(f"theta must lie in (0,1), got {theta}")
    excess = beta + delta - 0.5
    if excess > CRITICAL_TOL:
        raise ParameterError(f"β + δ = {beta + delta} exceeds 1/2")
    on_critical_line = abs(excess) <= CRITICAL_TOL
    if regime is Regime.sub_critical:
        if on_critical_line:
            raise RegimeMismatchError(f"β + δ = 1/2 needs the critical bound: {messages.CRITICAL_SMALLNESS}")
        exponent = 0.5 - beta - delta
        bound = max(4.0 * c_b / lambda1, (4.0 * m * c_b * euler_gamma(exponent)) ** (1.0 / exponent) / lambda1)
        return safety * bound
    if not on_critical_line:
        raise RegimeMismatchError(f"the critical bound needs β + δ = 1/2, got {beta + delta}")
    if c_tilde is None:
        raise ParameterError("the critical bound needs sup‖B − z₀‖")
    if c_tilde >= smallness_threshold(beta, theta, m):
        raise RegimeMismatchError(messages.CRITICAL_SMALLNESS)
    exponent = theta * (1.0 - beta)
    total = c_tilde + c_b
    inner = 16.0 * m * euler_gamma(exponent) * total * (
        1.0 + 2.0 * m * (2.0 - theta) / (theta * (1.0 - theta) * (1.0 - beta)) * total)
    return safety * (inner ** (1.0 / exponent) / lambda1 + 8.0 * c_b / lambda1)


@dataclass(frozen=True, eq=False)
class GaussianRule:
    """Points ξ of a standard Gaussian on R^n with weights summing to one."""
    nodes: np.ndarray
    weights: np.ndarray
    monte_carlo: bool = False
    antithetic: bool = False

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def mean(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Weighted mean over the last axis and its standard error (zero for quadrature)."""
        value = values @ self.weights
        if not self.monte_carlo:
            return value, np.zeros_like(value)
        if self.antithetic:
            half = self.size // 2
            values = (values[..., :half] + values[..., half:]) / 2.0
        count = values.shape[-1]
        return value, values.std(axis=-1, ddof=1) / np.sqrt(count)


def hermite_rule(n: int, order: int) -> GaussianRule:
    """Tensor Gauss–Hermite rule, exact for polynomials of degree < 2·order in each variable."""
    if order < 1:
        raise ParameterError(f"order must be at least 1, got {order}")
    x, w = hermegauss(order)
    w = w / np.sqrt(2.0 * np.pi)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return GaussianRule(nodes, weights)


def monte_carlo_rule(n: int, samples: int, stream: NoiseStream, antithetic: bool = True,
                     moment_matching: bool = True) -> GaussianRule:
    """
    Monte Carlo draws from the stream's generator. Antithetic rules hold the pairs (ξ, −ξ)
    in their two halves; moment matching rescales every coordinate to unit second moment.
    """
    if samples < 2:
        raise ParameterError(f"at least 2 samples are needed, got {samples}")
    if antithetic and samples % 2:
        raise ParameterError("antithetic sampling needs an even number of samples")
    rng = stream.generator()
    if antithetic:
        half = rng.standard_normal((samples // 2, n))
        nodes = np.vstack([half, -half])
    else:
        nodes = rng.standard_normal((samples, n))
        if moment_matching:
            nodes = nodes - nodes.mean(axis=0)
    if moment_matching:
        nodes = nodes / np.sqrt(np.mean(nodes ** 2, axis=0))
    return GaussianRule(nodes, np.full(samples, 1.0 / samples), monte_carlo=True, antithetic=antithetic)


def make_rule(n: int, method: str = "monte_carlo", samples: int = 2000, order: int = 5,
              seed: Optional[int] = None) -> GaussianRule:
    if method == "hermite":
        return hermite_rule(n, order)
    if method == "monte_carlo":
        return monte_carlo_rule(n, samples, NoiseStream(settings.default_seed if seed is None else seed, n))
    raise ParameterError(f"unknown expectation method {method!r}")


@dataclass(frozen=True)
class Estimate:
    value: np.ndarray
    stderr: np.ndarray


@dataclass(frozen=True, eq=False)
class KolmogorovProblem:
    """
    Data of the equation for mode ``k`` on the operator's modes. Without ``forcing`` the
    right side is g_k(x) = ⟨B(x), e_k⟩. Passing ``z0`` selects the critical regime and
    the semigroup shifted by z₀. A missing ``cbar`` is set to the safety multiple of
    its lower bound, and a given one must exceed that bound.
    """
    operator: SpectralOperator
    delta: float
    drift: DriftSpec = field(default_factory=DriftSpec.zero)
    forcing: Optional[Forcing] = None
    k: int = 1
    cbar: Optional[float] = None
    z0: Optional[Tuple[float, ...]] = None
    c_b: Optional[float] = None
    c_tilde: Optional[float] = None
    theta: Optional[float] = None
    bound: float = field(init=False, default=0.0)

    def __post_init__(self):
        n = self.operator.n_modes
        if n > MAX_MODES:
            raise DimensionError(f"the Kolmogorov solver handles at most {MAX_MODES} modes, got {n}")
        if not 1 <= self.k <= n:
            raise DimensionError(f"mode index {self.k} outside 1..{n}")
        meta = drifts.metadata(self.drift, self.operator)
        if not meta.bounded:
            raise ConfigurationError(messages.KOLMOGOROV_UNBOUNDED_DRIFT)
        drifts.check_basis(self.drift, self.operator)
        theta = self.theta if self.theta is not None else (meta.theta if meta.theta is not None else 0.5)
        object.__setattr__(self, "theta", float(theta))
        if self.c_b is None:
            stream = NoiseStream(settings.default_seed)
            object.__setattr__(self, "c_b", drifts.bound_constant(self.drift, self.operator, stream,
                                                                  settings.holder_pairs).value)
        if self.z0 is None and self.drift.shift:
            object.__setattr__(self, "z0", self.drift.shift)
        if self.z0 is not None:
            if len(self.z0) > n:
                raise DimensionError(f"z0 has {len(self.z0)} coefficients for {n} modes")
            z0 = np.zeros(n)
            z0[:len(self.z0)] = self.z0
            object.__setattr__(self, "z0", tuple(z0))
        bound = cbar(meta.beta, self.delta, self.theta, float(self.operator.eigenvalues[0]), self.c_b,
                     self.regime, self.c_tilde, safety=1.0)
        object.__setattr__(self, "bound", bound)
        if self.cbar is None:
            object.__setattr__(self, "cbar", settings.cbar_safety * bound if bound > 0 else 1.0)
        elif not self.cbar > bound:
            raise ParameterError(f"c̄ = {self.cbar} does not exceed its lower bound {bound:.6g}")

    @property
    def n(self) -> int:
        return self.operator.n_modes

    @property
    def regime(self) -> Regime:
        return Regime.sub_critical if self.z0 is None else Regime.critical

    @property
    def beta(self) -> float:
        return drifts.metadata(self.drift, self.operator).beta

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.operator.eigenvalues

    @property
    def rate(self) -> float:
        """c̄λ_k, the discount of the time integral."""
        return self.cbar * float(self.eigenvalues[self.k - 1])

    @property
    def g_norm(self) -> float:
        """The bound C_B λ_k^β of g_k."""
        return self.c_b * float(self.eigenvalues[self.k - 1]) ** self.beta

    def g(self, z: np.ndarray) -> np.ndarray:
        if self.forcing is not None:
            return np.asarray(self.forcing(z), dtype=float)
        return drifts.evaluate(self.drift, self.operator, z)[..., self.k - 1]

    def variances(self, t: float) -> np.ndarray:
        return convolution_variance(self.eigenvalues, self.delta, t)

    def shift(self, t: float, x: np.ndarray) -> np.ndarray:
        """Mean e^{−tA}x of the semigroup, plus ∫₀ᵗ e^{−(t−s)A}z₀ ds in the critical regime."""
        lam = self.eigenvalues
        out = np.exp(-t * lam) * x
        if self.z0 is not None:
            out = out + (-np.expm1(-t * lam) / lam) * np.asarray(self.z0)
        return out

    def drift_field(self, z: np.ndarray) -> np.ndarray:
        b = drifts.evaluate(self.drift, self.operator, z)
        if self.z0 is not None:
            b = b - np.asarray(self.z0)
        return b


def _check_time(t: float):
    if not t > 0:
        raise ParameterError(f"time must be positive, got {t}")


def _point(problem: KolmogorovProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise DimensionError(f"point of shape {x.shape} for {problem.n} modes")
    return x


def ou_expect(problem: KolmogorovProblem, t: float, phi: Callable, x, rule: GaussianRule) -> Estimate:
    """
    The ou_expect function estimates (R_t φ)(x) = E φ(e^{−tA}x + Y) with Y ~ N(0, Q_t),
    Q_t diagonal with entries λ^{−1−2δ}(1 − e^{−2λt})/2.

    :param problem: KolmogorovProblem: operator, δ and the optional shift z₀
    :param t: float: time, positive
    :param phi: Callable: function of points of shape (..., n)
    :param x: point of R^n
    :param rule: GaussianRule: Gaussian samples or quadrature nodes
    :return: Estimate with the value and its standard error
    """
    _check_time(t)
    x = _point(problem, x)
    z = problem.shift(t, x) + np.sqrt(problem.variances(t)) * rule.nodes
    value, stderr = rule.mean(np.asarray(phi(z), dtype=float))
    return Estimate(float(value), float(stderr))


def ou_gradient(problem: KolmogorovProblem, t: float, phi: Callable, x, rule: GaussianRule,
                weight: float = 0.0) -> Estimate:
    """
    The ou_gradient function estimates A^γ D(R_t φ)(x) with the Malliavin weight
    e^{−tλ_j} ξ_j / √q_j; φ at the mean is subtracted as a control variate.

    :param problem: KolmogorovProblem: operator, δ and the optional shift z₀
    :param t: float: time, positive
    :param phi: Callable: function of points of shape (..., n)
    :param x: point of R^n
    :param rule: GaussianRule: Gaussian samples or quadrature nodes
    :param weight: float: the power γ of A applied to the gradient
    :return: Estimate with arrays of length n
    """
    _check_time(t)
    x = _point(problem, x)
    lam = problem.eigenvalues
    scale = np.sqrt(problem.variances(t))
    mean = problem.shift(t, x)
    values = np.asarray(phi(mean + scale * rule.nodes), dtype=float) - float(np.asarray(phi(mean[None]))[0])
    value, stderr = rule.mean((rule.nodes * values[:, None]).T)
    factor = lam ** weight * np.exp(-t * lam) / scale
    return Estimate(factor * value, factor * stderr)


@dataclass(frozen=True)
class GridSpec:
    radius: float = 1.0
    nodes: int = 9

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"grid radius must be positive, got {self.radius}")
        if self.nodes < 3:
            raise ParameterError(f"at least 3 nodes per axis are needed, got {self.nodes}")

    def axes(self, n: int) -> Tuple[np.ndarray, ...]:
        return tuple(np.linspace(-self.radius, self.radius, self.nodes) for _ in range(n))


@dataclass(frozen=True)
class TimeQuadrature:
    """Gauss–Legendre nodes on (0, t_max] graded towards 0 by t = t_max·τ^grading."""
    n_nodes: int = 64
    grading: float = 2.0
    t_max: Optional[float] = None

    def rule(self, rate: float, tol: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of ∫₀^∞ e^{−rate·t} f(t) dt, the discount folded into the weights."""
        if self.n_nodes < 2 or self.grading < 1:
            raise ParameterError("time quadrature needs at least 2 nodes and grading ≥ 1")
        t_max = self.t_max if self.t_max is not None else math.log(10.0 / tol) / rate
        tau, w = leggauss(self.n_nodes)
        tau, w = (tau + 1.0) / 2.0, w / 2.0
        times = t_max * tau ** self.grading
        weights = w * self.grading * t_max * tau ** (self.grading - 1.0)
        return times, weights * np.exp(-rate * times)


@dataclass
class KolmogorovIterate:
    axes: Tuple[np.ndarray, ...]
    u: np.ndarray
    du: np.ndarray
    deltas: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    converged: bool = False

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def spacing(self) -> float:
        return float(self.axes[0][1] - self.axes[0][0])

    def points(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(grids, axis=-1)

    def gradient_interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(self.axes, self.du, bounds_error=False, fill_value=None)

    def value_at(self, x) -> np.ndarray:
        interp = RegularGridInterpolator(self.axes, self.u, bounds_error=False, fill_value=None)
        return interp(np.asarray(x, dtype=float))

    @property
    def sup_u(self) -> float:
        return float(np.max(np.abs(self.u)))

    def as_dict(self) -> dict:
        return {"nodes_per_axis": len(self.axes[0]), "radius": float(self.axes[0][-1]), "sweeps": len(self.deltas),
                "deltas": self.deltas, "ratios": self.ratios, "converged": self.converged, "sup_u": self.sup_u,
                "sup_du": float(np.max(np.linalg.norm(self.du, axis=-1)))}


def _integrand(problem: KolmogorovProblem, z: np.ndarray,
               du: Optional[RegularGridInterpolator]) -> np.ndarray:
    out = problem.g(z)
    if du is not None:
        out = out + np.sum(problem.drift_field(z) * du(z), axis=-1)
    return out


def _sweep(problem: KolmogorovProblem, points: np.ndarray, du: Optional[RegularGridInterpolator],
           times: np.ndarray, weights: np.ndarray, rule: GaussianRule) -> Tuple[np.ndarray, np.ndarray]:
    n_points = points.shape[0]
    lam = problem.eigenvalues
    u_new = np.zeros(n_points)
    du_new = np.zeros((n_points, problem.n))
    block = max(1, CHUNK_POINTS // rule.size)
    for t, w in zip(times, weights):
        scale = np.sqrt(problem.variances(t))
        factor = np.exp(-t * lam) / scale
        means = problem.shift(t, points)
        for start in range(0, n_points, block):
            chunk = slice(start, start + block)
            z = means[chunk, None, :] + scale * rule.nodes[None]
            values = _integrand(problem, z, du)
            centre = _integrand(problem, means[chunk], du)
            u_new[chunk] += w * (values @ rule.weights)
            du_new[chunk] += w * factor * np.einsum("bs,s,sj->bj", values - centre[:, None], rule.weights,
                                                    rule.nodes)
    return u_new, du_new


def solve_u(problem: KolmogorovProblem, grid: GridSpec = GridSpec(), quad: TimeQuadrature = TimeQuadrature(),
            rule: Optional[GaussianRule] = None, tol: float = 1e-6, max_iter: int = 50) -> KolmogorovIterate:
    """
    The solve_u function runs the Picard iteration u ← ∫₀^∞ e^{−c̄λ_k t} R_t[⟨B_n, Du⟩ + g] dt
    at every grid node, with Du taken from the gradient estimator of the previous sweep.

    :param problem: KolmogorovProblem: the equation
    :param grid: GridSpec: box [−R, R]^n and nodes per axis
    :param quad: TimeQuadrature: graded time rule, truncated where e^{−c̄λ_k t} falls below tol/10
    :param rule: GaussianRule: Gaussian expectations, defaults to 2000 antithetic samples
    :param tol: float: stop when the sup-norm update is below tol
    :param max_iter: int: maximal number of sweeps
    :return: KolmogorovIterate with values, gradients, deltas and contraction ratios
    :raises DivergenceError: after three consecutive sweeps with ratio ≥ 1
    """
    if not tol > 0 or max_iter < 1:
        raise ParameterError("tol must be positive and max_iter at least 1")
    rule = rule if rule is not None else make_rule(problem.n)
    if rule.n != problem.n:
        raise DimensionError(f"Gaussian rule on R^{rule.n} for {problem.n} modes")
    axes = grid.axes(problem.n)
    shape = (grid.nodes,) * problem.n
    iterate = KolmogorovIterate(axes, np.zeros(shape), np.zeros(shape + (problem.n,)))
    points = iterate.points().reshape(-1, problem.n)
    times, weights = quad.rule(problem.rate, tol)
    interacting = problem.drift.kind is not DriftKind.zero or problem.z0 is not None

    for sweep in range(1, max_iter + 1):
        started = time.perf_counter()
        du = iterate.gradient_interpolator() if interacting and sweep > 1 else None
        u_new, du_new = _sweep(problem, points, du, times, weights, rule)
        delta = float(np.max(np.abs(u_new.reshape(shape) - iterate.u)))
        if not np.all(np.isfinite(u_new)):
            raise DivergenceError(f"non-finite values at sweep {sweep}", iterate.ratios)
        if iterate.deltas:
            previous = iterate.deltas[-1]
            iterate.ratios.append(delta / previous if previous > 0 else (0.0 if delta == 0 else math.inf))
        iterate.deltas.append(delta)
        iterate.u = u_new.reshape(shape)
        iterate.du = du_new.reshape(shape + (problem.n,))
        logger.info("sweep %d: delta=%.3e ratio=%s", sweep, delta,
                    f"{iterate.ratios[-1]:.3f}" if iterate.ratios else "-")
        logger.debug("sweep %d took %.3fs over %d nodes", sweep, time.perf_counter() - started, points.shape[0])
        recent = iterate.ratios[-DIVERGENCE_SWEEPS:]
        if len(recent) == DIVERGENCE_SWEEPS and all(r >= 1.0 for r in recent):
            raise DivergenceError("Picard iteration does not contract: c̄ too small or M too optimistic",
                                  iterate.ratios)
        if delta < tol:
            iterate.converged = True
            break
    if not iterate.converged:
        logger.warning("Picard iteration stopped after %d sweeps with delta %.3e", max_iter, iterate.deltas[-1])
    return iterate


def generator_residual(problem: KolmogorovProblem, iterate: KolmogorovIterate) -> float:
    """
    Max over interior nodes of |c̄λ_k u − ½Σλ_j^{−2δ}∂²_j u + Σλ_j x_j ∂_j u − ⟨B_n, Du⟩ − g|
    with central differences on the grid.
    """
    u, h = iterate.u, iterate.spacing
    interior = tuple(slice(1, -1) for _ in range(iterate.n))
    pts = iterate.points()[interior]
    lam = problem.eigenvalues
    residual = problem.rate * u[interior] - problem.g(pts)
    gradient = np.empty(pts.shape)
    for j in range(iterate.n):
        plus = tuple(slice(2, None) if i == j else slice(1, -1) for i in range(iterate.n))
        minus = tuple(slice(None, -2) if i == j else slice(1, -1) for i in range(iterate.n))
        first = (u[plus] - u[minus]) / (2.0 * h)
        second = (u[plus] - 2.0 * u[interior] + u[minus]) / h ** 2
        residual += -0.5 * lam[j] ** (-2.0 * problem.delta) * second + lam[j] * pts[..., j] * first
        gradient[..., j] = first
    if problem.drift.kind is not DriftKind.zero:
        residual -= np.sum(drifts.evaluate(problem.drift, problem.operator, pts) * gradient, axis=-1)
    return float(np.max(np.abs(residual)))


def check_estimate_range(name: str, gamma: float, beta: float, delta: float, theta: float):
    if name == "est1":
        if not 0.0 <= gamma <= beta:
            raise EstimateRangeError(f"est1 needs γ in [0, β] = [0, {beta}], got {gamma}")
    elif name == "est2":
        if not (1.0 - theta) * delta < theta / 2.0:
            raise EstimateRangeError("est2 needs (1 − θ)δ < θ/2")
        ceiling = theta / 2.0 - delta * (2.0 - theta)
        if not -delta <= gamma < ceiling:
            raise EstimateRangeError(f"est2 needs γ in [−δ, {ceiling:.6g}), got {gamma}")
    elif name != "est0":
        raise ParameterError(f"unknown estimate {name!r}")


def estimate_constants(problem: KolmogorovProblem, iterate: KolmogorovIterate,
                       est1_gammas: Sequence[float] = (0.0,), est2_gammas: Sequence[float] = (),
                       g_norm: Optional[float] = None) -> Dict[str, float]:
    """
    The estimate_constants function returns the empirical constants of the uniform estimates:
    each supremum over the grid multiplied by the inverse of its c̄λ_k factor and divided by ‖g‖.
    """
    if g_norm is None:
        if problem.forcing is not None:
            raise ParameterError("a custom forcing needs its norm")
        g_norm = problem.g_norm
    if not g_norm > 0:
        raise ParameterError("the forcing norm must be positive")
    theta, delta, beta, rate = problem.theta, problem.delta, problem.beta, problem.rate
    lam = problem.eigenvalues
    out = {"est0": iterate.sup_u / g_norm}
    for gamma in est1_gammas:
        check_estimate_range("est1", gamma, beta, delta, theta)
        sup = float(np.max(np.linalg.norm(lam ** gamma * iterate.du, axis=-1)))
        out[f"est1[{gamma:g}]"] = sup * rate ** ((1.0 + theta) / 2.0 - gamma - (1.0 - theta) * delta) / g_norm
    for gamma in est2_gammas:
        check_estimate_range("est2", gamma, beta, delta, theta)
        weighted = lam ** gamma * iterate.du
        axes = tuple(range(iterate.n))
        jacobian = np.stack(np.gradient(weighted, iterate.spacing, axis=axes) if iterate.n > 1
                            else [np.gradient(weighted, iterate.spacing, axis=0)], axis=-1)
        sup = float(np.max(np.linalg.norm(jacobian, ord=2, axis=(-2, -1))))
        out[f"est2[{gamma:g}]"] = sup * rate ** (theta / 2.0 - gamma - delta * (2.0 - theta)) / g_norm
    return out


@dataclass
class MonitorReport:
    cbar: float
    theta: float
    beta: float
    delta: float
    cases: List[dict]
    spread: Dict[str, float]
    uniform: Dict[str, bool]

    def as_dict(self) -> dict:
        return {"cbar": self.cbar, "theta": self.theta, "beta": self.beta, "delta": self.delta, "cases": self.cases,
                "spread": self.spread, "uniform": self.uniform}


def estimate_monitor(operator: SpectralOperator, delta: float, drift: DriftSpec, n_values: Sequence[int],
                     k_values: Sequence[int], est1_gammas: Sequence[float] = (0.0,),
                     est2_gammas: Sequence[float] = (), grid: GridSpec = GridSpec(),
                     quad: TimeQuadrature = TimeQuadrature(), method: str = "monte_carlo", samples: int = 2000,
                     order: int = 5, seed: Optional[int] = None, tol: float = 1e-6, max_iter: int = 50,
                     cbar_value: Optional[float] = None,
                     solutions: Optional[Mapping[Tuple[int, int], Tuple[KolmogorovProblem, KolmogorovIterate]]] = None
                     ) -> MonitorReport:
    """
    The estimate_monitor function solves the equation with g = g_k for every (n, k) with k ≤ n
    and reports the empirical constants of the uniform estimates. A constant whose largest and
    smallest values across the sweep differ by more than a factor 2 is flagged non-uniform.

    :param operator: SpectralOperator: operator whose restrictions give the n-mode problems
    :param delta: float: noise exponent δ
    :param drift: DriftSpec: bounded drift
    :param n_values: Sequence[int]: Galerkin dimensions, at most 4
    :param k_values: Sequence[int]: mode indices
    :param solutions: Mapping: precomputed (problem, iterate) per (n, k); every pair must be present
    :return: MonitorReport
    """
    pairs = [(n, k) for n in sorted(set(n_values)) for k in sorted(set(k_values)) if k <= n]
    if not pairs:
        raise ParameterError("the sweep has no pair with k ≤ n")
    if solutions is not None:
        missing = [pair for pair in pairs if pair not in solutions]
        if missing:
            raise ParameterError(f"missing solutions for {missing}")
    if max(n for n, _ in pairs) > operator.n_modes:
        raise DimensionError(f"n up to {max(n_values)} exceeds the operator's {operator.n_modes} modes")

    reference = KolmogorovProblem(operator.restrict(max(n for n, _ in pairs)), delta, drift, cbar=cbar_value)
    theta = reference.theta
    for gamma in est1_gammas:
        check_estimate_range("est1", gamma, reference.beta, delta, theta)
    for gamma in est2_gammas:
        check_estimate_range("est2", gamma, reference.beta, delta, theta)

    cases = []
    for n, k in pairs:
        if solutions is not None:
            problem, iterate = solutions[(n, k)]
        else:
            problem = KolmogorovProblem(operator.restrict(n), delta, drift, k=k, cbar=reference.cbar,
                                        c_b=reference.c_b, theta=theta)
            rule = make_rule(n, method, samples, order, seed)
            iterate = solve_u(problem, grid, quad, rule, tol, max_iter)
        constants = estimate_constants(problem, iterate, est1_gammas, est2_gammas)
        cases.append({"n": n, "k": k, "converged": iterate.converged, "sweeps": len(iterate.deltas),
                      **constants})
        logger.info("monitor n=%d k=%d: %s", n, k, constants)

    spread, uniform = {}, {}
    for name in [key for key in cases[0] if key.startswith("est")]:
        values = np.array([case[name] for case in cases])
        spread[name] = float(values.max() / values.min()) if values.min() > 0 else math.inf
        uniform[name] = spread[name] <= UNIFORMITY_FACTOR
    return MonitorReport(reference.cbar, theta, reference.beta, delta, cases, spread, uniform)

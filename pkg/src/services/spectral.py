"""Diagonal spectral calculus on the unit interval.

Operators are given by their eigenvalue sequence in the sine (Dirichlet) or
shifted cosine (Neumann, ``I + A_N``) eigenbasis. States are coefficient
vectors in that basis; collocation grids are only used to evaluate
nonlinearities pointwise.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.special import zeta

from src.conf.config import settings
from src.services.errors import ConfigurationError, DimensionError, ParameterError

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


class Basis(str, enum.Enum):
    dirichlet_sine = "dirichlet_sine"
    neumann_shifted_cosine = "neumann_shifted_cosine"
    custom = "custom"


class Backend(str, enum.Enum):
    matrix = "matrix"
    fft = "fft"


@dataclass(frozen=True)
class SpectralOperator:
    """
    The SpectralOperator class is the diagonal operator A = (A°)^power, where A° is
    the Dirichlet Laplacian, I + the Neumann Laplacian, or a user eigenvalue list.

    :param basis: Basis: eigenbasis of A°
    :param n_modes: int: number of active modes (Galerkin dimension)
    :param power: float: exponent γ applied to the base eigenvalues
    :param custom_eigenvalues: tuple: base eigenvalues for the custom basis
    :param growth_exponent: float: q in λ°_k ~ k^q, required for the custom basis
    """
    basis: Basis
    n_modes: int
    power: float = 1.0
    custom_eigenvalues: Optional[Tuple[float, ...]] = None
    growth_exponent: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "basis", Basis(self.basis))
        if self.n_modes < 1:
            raise DimensionError(f"n_modes must be positive, got {self.n_modes}")
        if not self.power > 0:
            raise ParameterError(f"power must be positive, got {self.power}")
        if self.basis is Basis.custom:
            if self.custom_eigenvalues is None or self.growth_exponent is None:
                raise ConfigurationError("custom basis needs eigenvalues and a declared growth exponent")
            values = tuple(float(v) for v in self.custom_eigenvalues)
            if len(values) < self.n_modes:
                raise DimensionError(f"{len(values)} custom eigenvalues for {self.n_modes} modes")
            if values[0] <= 0 or any(b <= a for a, b in zip(values, values[1:])):
                raise ParameterError("custom eigenvalues must be positive and strictly increasing")
            if not self.growth_exponent > 0:
                raise ParameterError("growth exponent must be positive")
            object.__setattr__(self, "custom_eigenvalues", values)
        elif self.custom_eigenvalues is not None:
            raise ConfigurationError(f"eigenvalues are fixed for the {self.basis.value} basis")

    @cached_property
    def base_eigenvalues(self) -> np.ndarray:
        values = base_eigenvalues(self, self.n_modes)
        values.flags.writeable = False
        return values

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        values = self.base_eigenvalues ** self.power
        values.flags.writeable = False
        return values

    @property
    def law_exponent(self) -> float:
        # interval Laplacians: λ°_k ~ k² (d = 1)
        if self.basis is Basis.custom:
            return float(self.growth_exponent)
        return 2.0

    @property
    def has_eigenfunctions(self) -> bool:
        return self.basis is not Basis.custom

    def restrict(self, n_modes: int) -> "SpectralOperator":
        """Galerkin projection P_n: the same operator on its first ``n_modes`` modes."""
        return replace(self, n_modes=n_modes)


@dataclass(frozen=True, eq=False)
class ModeVector:
    coeffs: np.ndarray
    sobolev_index: float = 0.0

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1:
            raise DimensionError(f"coefficients must be one-dimensional, got shape {coeffs.shape}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, n: int, sobolev_index: float = 0.0) -> "ModeVector":
        return cls(np.zeros(n), sobolev_index)

    @classmethod
    def unit(cls, k: int, n: int) -> "ModeVector":
        """e_k (1-based index) as a vector of length ``n``."""
        if not 1 <= k <= n:
            raise DimensionError(f"mode {k} outside 1..{n}")
        coeffs = np.zeros(n)
        coeffs[k - 1] = 1.0
        return cls(coeffs)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def resized(self, n: int) -> "ModeVector":
        """Truncate (P_n) or zero-pad to length ``n``."""
        coeffs = np.zeros(n)
        m = min(n, self.n)
        coeffs[:m] = self.coeffs[:m]
        return ModeVector(coeffs, self.sobolev_index)

    def __sub__(self, other: "ModeVector") -> "ModeVector":
        n = max(self.n, other.n)
        return ModeVector(self.resized(n).coeffs - other.resized(n).coeffs, self.sobolev_index)


@dataclass(frozen=True, eq=False)
class GridField:
    values: np.ndarray
    grid: Basis

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid", Basis(self.grid))

    @property
    def n_points(self) -> int:
        return self.values.shape[-1]

    def l2_norm(self) -> float:
        """Discrete L² norm with the grid's quadrature weights."""
        return float(np.sqrt(np.sum(quadrature_weight(self.grid, self.n_points) * self.values ** 2)))


def base_eigenvalues(op: SpectralOperator, n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    if op.basis is Basis.dirichlet_sine:
        return (np.pi * k) ** 2
    if op.basis is Basis.neumann_shifted_cosine:
        return 1.0 + (np.pi * (k - 1.0)) ** 2
    return np.array(op.custom_eigenvalues[:n], dtype=float)


def _check_associated(op: SpectralOperator, n: int):
    if n > op.n_modes:
        raise DimensionError(f"vector of length {n} exceeds the operator's {op.n_modes} modes")


def frac_apply(op: SpectralOperator, sigma: float, v: ModeVector) -> ModeVector:
    """A^σ v: multiply mode k by λ_k^σ; the result lives σ below v on the Sobolev scale."""
    _check_associated(op, v.n)
    if sigma == 0:
        return v
    return ModeVector(op.eigenvalues[:v.n] ** sigma * v.coeffs, v.sobolev_index - sigma)


def sobolev_norm(op: SpectralOperator, sigma: float, v: ModeVector) -> float:
    _check_associated(op, v.n)
    return float(np.linalg.norm(op.eigenvalues[:v.n] ** sigma * v.coeffs))


def sobolev_norms(op: SpectralOperator, sigma: float, coeffs: np.ndarray) -> np.ndarray:
    """Batched ‖·‖_σ over the last axis of a coefficient array."""
    n = coeffs.shape[-1]
    _check_associated(op, n)
    return np.linalg.norm(op.eigenvalues[:n] ** sigma * coeffs, axis=-1)


@dataclass(frozen=True)
class TraceResult:
    finite: bool
    value: Optional[float] = None
    terms: int = 0
    tail: float = float("inf")


def _tail_bound(op: SpectralOperator, s: float, k: int) -> float:
    """Upper bound of Σ_{j>k} (λ°_j)^{-s}."""
    if op.basis is Basis.dirichlet_sine:
        return float(np.pi ** (-2 * s) * zeta(2 * s, k + 1))
    if op.basis is Basis.neumann_shifted_cosine:
        # λ°_j ≥ π²(j-1)² and j - 1 ≥ k
        return float(np.pi ** (-2 * s) * zeta(2 * s, k))
    q = op.law_exponent
    lam_k = op.custom_eigenvalues[k - 1]
    return float(lam_k ** (-s) * k ** (q * s) * zeta(q * s, k + 1))


def trace_power(op: SpectralOperator, sigma: float, tail_tol: Optional[float] = None) -> TraceResult:
    """
    The trace_power function decides whether A^{-σ} is trace class and, if so,
    returns Tr A^{-σ} = Σ λ_k^{-σ}: partial sum plus the analytic tail bound.

    :param op: SpectralOperator: operator (only its basis and power matter)
    :param sigma: float: exponent σ
    :param tail_tol: float: stop once the tail bound is below this value
    :return: TraceResult with finite=False when q·σ·γ ≤ 1
    """
    tail_tol = settings.tail_tol if tail_tol is None else tail_tol
    if not tail_tol > 0:
        raise ParameterError("tail_tol must be positive")
    s = sigma * op.power
    if op.law_exponent * s <= 1:
        return TraceResult(finite=False)

    if op.basis is Basis.custom:
        k = len(op.custom_eigenvalues)
        partial = float(np.sum(np.asarray(op.custom_eigenvalues) ** (-s)))
        tail = _tail_bound(op, s, k)
        return TraceResult(finite=True, value=partial + tail, terms=k, tail=tail)

    k = 1024
    while True:
        tail = _tail_bound(op, s, k)
        if tail < tail_tol or k >= settings.trace_max_terms:
            break
        k *= 2
    if tail >= tail_tol:
        logger.warning("trace_power stopped at %d terms with tail bound %.3e", k, tail)
    partial = float(np.sum(base_eigenvalues(op, k) ** (-s)))
    return TraceResult(finite=True, value=partial + tail, terms=k, tail=tail)


def collocation_points(grid: Basis, n_points: int) -> np.ndarray:
    grid = Basis(grid)
    j = np.arange(n_points, dtype=float)
    if grid is Basis.dirichlet_sine:
        return (j + 1.0) / (n_points + 1.0)
    if grid is Basis.neumann_shifted_cosine:
        return (j + 0.5) / n_points
    raise ConfigurationError("the custom basis has no collocation grid")


def quadrature_weight(grid: Basis, n_points: int) -> float:
    grid = Basis(grid)
    if grid is Basis.dirichlet_sine:
        return 1.0 / (n_points + 1.0)
    if grid is Basis.neumann_shifted_cosine:
        return 1.0 / n_points
    raise ConfigurationError("the custom basis has no collocation grid")


def _frequencies(grid: Basis, n_modes: int) -> np.ndarray:
    k = np.arange(1, n_modes + 1, dtype=float)
    return np.pi * (k if grid is Basis.dirichlet_sine else k - 1.0)


@lru_cache(maxsize=64)
def basis_matrix(grid: Basis, n_modes: int, n_points: int) -> np.ndarray:
    """E[j, k] = e_k(ξ_j)."""
    xi = collocation_points(grid, n_points)[:, None]
    freq = _frequencies(grid, n_modes)[None, :]
    if grid is Basis.dirichlet_sine:
        matrix = SQRT2 * np.sin(freq * xi)
    else:
        matrix = SQRT2 * np.cos(freq * xi)
        matrix[:, 0] = 1.0
    matrix.flags.writeable = False
    return matrix


@lru_cache(maxsize=64)
def derivative_matrix(grid: Basis, n_modes: int, n_points: int) -> np.ndarray:
    """D[j, k] = e_k'(ξ_j)."""
    xi = collocation_points(grid, n_points)[:, None]
    freq = _frequencies(grid, n_modes)[None, :]
    if grid is Basis.dirichlet_sine:
        matrix = SQRT2 * freq * np.cos(freq * xi)
    else:
        matrix = -SQRT2 * freq * np.sin(freq * xi)
    matrix.flags.writeable = False
    return matrix


def second_derivative_factors(op: SpectralOperator, n: int) -> np.ndarray:
    """e_k'' = -(frequency_k)² e_k for both interval bases."""
    return -_frequencies(op.basis, n) ** 2


def _check_grid(op: SpectralOperator, n_modes: int, n_points: int):
    if not op.has_eigenfunctions:
        raise ConfigurationError("the custom basis has no eigenfunctions to collocate")
    if n_points < n_modes:
        raise DimensionError(f"n_points={n_points} is smaller than n_modes={n_modes}")


def grid_values(op: SpectralOperator, coeffs: np.ndarray, n_points: int,
                backend: Backend = Backend.matrix) -> np.ndarray:
    """Batched synthesis: coefficient arrays (..., n) to grid values (..., n_points)."""
    n = coeffs.shape[-1]
    _check_grid(op, n, n_points)
    if Backend(backend) is Backend.matrix:
        return coeffs @ basis_matrix(op.basis, n, n_points).T
    padded = np.zeros(coeffs.shape[:-1] + (n_points,))
    padded[..., :n] = coeffs
    if op.basis is Basis.dirichlet_sine:
        return (SQRT2 / 2.0) * sp_fft.dst(padded, type=1, axis=-1)
    padded[..., 1:] *= SQRT2 / 2.0
    return sp_fft.dct(padded, type=3, axis=-1)


def grid_coefficients(op: SpectralOperator, values: np.ndarray, n_modes: int,
                      backend: Backend = Backend.matrix) -> np.ndarray:
    """Batched analysis: grid values (..., n_points) to the first ``n_modes`` coefficients."""
    n_points = values.shape[-1]
    _check_grid(op, n_modes, n_points)
    w = quadrature_weight(op.basis, n_points)
    if Backend(backend) is Backend.matrix:
        return w * (values @ basis_matrix(op.basis, n_modes, n_points))
    if op.basis is Basis.dirichlet_sine:
        return (SQRT2 / (2.0 * (n_points + 1.0))) * sp_fft.dst(values, type=1, axis=-1)[..., :n_modes]
    out = sp_fft.dct(values, type=2, axis=-1)[..., :n_modes] / (2.0 * n_points)
    out[..., 1:] *= SQRT2
    return out


def to_collocation(op: SpectralOperator, v: ModeVector, n_points: Optional[int] = None,
                   backend: Backend = Backend.matrix) -> GridField:
    _check_associated(op, v.n)
    n_points = 2 * v.n if n_points is None else n_points
    return GridField(grid_values(op, v.coeffs, n_points, backend), op.basis)


def from_collocation(op: SpectralOperator, f: GridField, n_modes: Optional[int] = None,
                     backend: Backend = Backend.matrix) -> ModeVector:
    n_modes = op.n_modes if n_modes is None else n_modes
    if f.grid is not op.basis:
        raise ConfigurationError(f"grid {f.grid.value} does not match basis {op.basis.value}")
    _check_associated(op, n_modes)
    return ModeVector(grid_coefficients(op, f.values, n_modes, backend))


def build_operator(basis: str, n_modes: int, power: float = 1.0,
                   custom_eigenvalues: Optional[Sequence[float]] = None,
                   growth_exponent: Optional[float] = None) -> SpectralOperator:
    return SpectralOperator(
        basis=Basis(basis), n_modes=n_modes, power=power,
        custom_eigenvalues=tuple(custom_eigenvalues) if custom_eigenvalues is not None else None,
        growth_exponent=growth_exponent,
    )

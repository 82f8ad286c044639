"""Counter-based Gaussian draws and exact Ornstein–Uhlenbeck transitions.

The draw for (seed, trajectory, step, mode) comes from a Philox generator keyed
by (seed, trajectory) and positioned at ``step << 64``, so draws for fewer
modes are a prefix of draws for more modes and every step is independent of
how many steps were taken before it.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Optional, Sequence, Union

import numpy as np

from src.services.errors import DimensionError, ParameterError
from src.services.spectral import ModeVector, SpectralOperator, TraceResult, trace_power

logger = logging.getLogger(__name__)

SMALL_ARGUMENT = 1e-8


def _key(seed: int, trajectory_id: int) -> np.ndarray:
    return np.random.SeedSequence(seed, spawn_key=(trajectory_id,)).generate_state(2, np.uint64)


def _generator(key: np.ndarray, step: int) -> np.random.Generator:
    if step < 0:
        raise ParameterError(f"step index must be nonnegative, got {step}")
    return np.random.Generator(np.random.Philox(key=key, counter=step << 64))


@dataclass
class DrawLedger:
    """Running count and blake2b checksum of every draw consumed."""
    count: int = 0
    _hash: Any = field(default_factory=lambda: hashlib.blake2b(digest_size=16), repr=False)

    def update(self, draws: np.ndarray):
        self.count += int(draws.size)
        self._hash.update(np.ascontiguousarray(draws, dtype="<f8").tobytes())

    @property
    def checksum(self) -> str:
        return self._hash.hexdigest()


@dataclass(frozen=True)
class NoiseStream:
    seed: int
    trajectory_id: int = 0
    counter: int = 0

    @cached_property
    def key(self) -> np.ndarray:
        return _key(self.seed, self.trajectory_id)

    def at(self, counter: int) -> "NoiseStream":
        return replace(self, counter=counter)

    def generator(self) -> np.random.Generator:
        """A generator positioned at this stream's step, for sampling other than Gaussian increments."""
        return _generator(self.key, self.counter)

    def normals(self, n: int, ledger: Optional[DrawLedger] = None) -> np.ndarray:
        """The first ``n`` standard normal draws at this stream's step."""
        draws = _generator(self.key, self.counter).standard_normal(n)
        if ledger is not None:
            ledger.update(draws)
        return draws


@dataclass(frozen=True)
class NoiseEnsemble:
    """A block of trajectories sharing one seed, drawn together as an (E, n) array."""
    seed: int
    trajectory_ids: Sequence[int]

    def __post_init__(self):
        object.__setattr__(self, "trajectory_ids", tuple(int(t) for t in self.trajectory_ids))
        if not self.trajectory_ids:
            raise DimensionError("an ensemble needs at least one trajectory")

    @classmethod
    def of_size(cls, seed: int, size: int, first: int = 0) -> "NoiseEnsemble":
        return cls(seed, range(first, first + size))

    @property
    def size(self) -> int:
        return len(self.trajectory_ids)

    @cached_property
    def keys(self) -> list:
        return [_key(self.seed, t) for t in self.trajectory_ids]

    def stream(self, index: int) -> NoiseStream:
        return NoiseStream(self.seed, self.trajectory_ids[index])

    def normals(self, step: int, n: int,
                ledger: Optional[Union[DrawLedger, Sequence[DrawLedger]]] = None) -> np.ndarray:
        """(E, n) draws at ``step``; a sequence of ledgers is updated row by row."""
        draws = np.stack([_generator(key, step).standard_normal(n) for key in self.keys])
        if isinstance(ledger, DrawLedger):
            ledger.update(draws)
        elif ledger is not None:
            for row, row_ledger in zip(draws, ledger):
                row_ledger.update(row)
        return draws


def convolution_variance(lam, delta: float, t: float):
    """
    The convolution_variance function returns the variance of one mode of the stochastic
    convolution at time t, λ^{-2δ}(1 - e^{-2λt})/(2λ). Works elementwise on arrays of λ.

    :param lam: float or ndarray: eigenvalue(s) λ > 0
    :param delta: float: noise exponent δ
    :param t: float: time t ≥ 0
    :return: variance with the same shape as lam
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ParameterError("eigenvalues must be positive")
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    x = lam * t
    small = x < SMALL_ARGUMENT
    safe = np.where(small, 1.0, lam)
    exact = -np.expm1(-2.0 * safe * t) / (2.0 * safe)
    series = t * (1.0 - x)
    out = lam ** (-2.0 * delta) * np.where(small, series, exact)
    return float(out) if out.ndim == 0 else out


def stationary_variance(lam, delta: float):
    lam = np.asarray(lam, dtype=float)
    return lam ** (-1.0 - 2.0 * delta) / 2.0


def stationary_trace(op: SpectralOperator, delta: float) -> TraceResult:
    """Σ_k v_k(∞) = Tr(A^{-1-2δ})/2; finite exactly when the trace is."""
    trace = trace_power(op, 1.0 + 2.0 * delta)
    if not trace.finite:
        return trace
    return TraceResult(finite=True, value=trace.value / 2.0, terms=trace.terms, tail=trace.tail / 2.0)


def _check_modes(op: SpectralOperator, n: int):
    if n > op.n_modes:
        raise DimensionError(f"state has {n} modes, the operator only {op.n_modes}")


def _ou_coefficients(lam: np.ndarray, delta: float, h: float, refine: int):
    if lam.shape[0] == 0:
        raise DimensionError("no modes to advance")
    if not h > 0:
        raise ParameterError(f"step size must be positive, got {h}")
    if refine < 1:
        raise ParameterError(f"refine must be at least 1, got {refine}")
    h_fine = h / refine
    std_fine = np.sqrt(convolution_variance(lam, delta, h_fine))
    # ζ = Σ_i e^{-λ(h-(i+1)h_f)} sqrt(v(h_f)) ξ_i reproduces the fine-step recursion
    weights = np.stack([np.exp(-lam * (h - (i + 1) * h_fine)) * std_fine for i in range(refine)])
    return np.exp(-lam * h), weights


def ou_step_batch(op: SpectralOperator, delta: float, h: float, coeffs: np.ndarray, ensemble: NoiseEnsemble,
                  step: int, refine: int = 1,
                  ledger: Optional[Union[DrawLedger, Sequence[DrawLedger]]] = None) -> np.ndarray:
    """Exact OU transition of an (E, n) state array over one step of size ``h``."""
    n = coeffs.shape[-1]
    _check_modes(op, n)
    lam = op.eigenvalues[:n]
    decay, weights = _ou_coefficients(lam, delta, h, refine)
    out = decay * coeffs
    for i in range(refine):
        out = out + weights[i] * ensemble.normals(step * refine + i, n, ledger)
    return out


def ou_step(op: SpectralOperator, delta: float, h: float, state: ModeVector, stream: NoiseStream,
            refine: int = 1, ledger: Optional[DrawLedger] = None) -> ModeVector:
    """
    The ou_step function advances one state by the exact transition of the linear equation:
    state'_k = e^{-λ_k h} state_k + ζ_k with ζ_k ~ N(0, v_k(h)).
    With ``refine > 1`` the noise increment is composed from the draws of ``refine``
    fine steps, so it matches a run with step h/refine under the same stream.

    :param op: SpectralOperator: the operator A
    :param delta: float: noise exponent δ
    :param h: float: step size
    :param state: ModeVector: current state
    :param stream: NoiseStream: stream positioned at the current step
    :param refine: int: number of fine draws composing the increment
    :param ledger: DrawLedger: optional draw accounting
    :return: ModeVector at time t + h
    """
    n = state.n
    _check_modes(op, n)
    lam = op.eigenvalues[:n]
    decay, weights = _ou_coefficients(lam, delta, h, refine)
    out = decay * state.coeffs
    for i in range(refine):
        out = out + weights[i] * stream.at(stream.counter * refine + i).normals(n, ledger)
    return ModeVector(out, state.sobolev_index)

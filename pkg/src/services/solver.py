"""Galerkin simulation by exponential Euler stepping of the mild formulation.

Per mode k: X'_k = e^{-λ_k h} X_k + h·φ₁(λ_k h)·B(X)_k + ζ_k, with the drift
frozen at the left endpoint and ζ the exact Ornstein–Uhlenbeck increment.
Ensembles are advanced as (E, n) arrays; every trajectory keeps its own
draw count and checksum.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.conf import messages
from src.conf.config import settings
from src.services import drift as drifts
from src.services.drift import DriftSpec
from src.services.errors import ConfigurationError, DimensionError, ParameterError, SimulationError
from src.services.noise import DrawLedger, NoiseEnsemble, NoiseStream, convolution_variance, ou_step_batch
from src.services.regime import RegimeParams, RegimeVerdict, check
from src.services.spectral import ModeVector, SpectralOperator, sobolev_norms

logger = logging.getLogger(__name__)

SMALL_ARGUMENT = 1e-8
TIME_TOL = 1e-9


def phi1(z: np.ndarray) -> np.ndarray:
    """(1 - e^{-z})/z, continued by its series near 0."""
    z = np.asarray(z, dtype=float)
    small = z < SMALL_ARGUMENT
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z / 2.0, -np.expm1(-safe) / safe)


@dataclass(frozen=True)
class InitialData:
    """
    Initial state in coefficients. ``sobolev_index`` is 0 for data in D(A^α) or H and
    -α̃ for rough data; ``in_h`` marks data taken only in H, which needs a bounded drift.
    """
    coeffs: Tuple[float, ...]
    sobolev_index: float = 0.0
    in_h: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not all(np.isfinite(self.coeffs)):
            raise ParameterError("initial data must be finite")
        if self.sobolev_index > 0:
            raise ParameterError("rough data is described by a nonpositive Sobolev index")

    @property
    def roughness(self) -> float:
        """α̃ ≥ 0 such that the data lies in D(A^{-α̃})."""
        return -self.sobolev_index

    def vector(self, n: int) -> np.ndarray:
        return ModeVector(np.asarray(self.coeffs)).resized(n).coeffs


@dataclass(frozen=True)
class SimConfig:
    operator: SpectralOperator
    drift: DriftSpec
    delta: float
    T: float
    h: float
    initial: InitialData
    save_times: Tuple[float, ...] = ()
    ensemble: int = 1
    seed: int = field(default_factory=lambda: settings.default_seed)
    noise: bool = True
    theta: Optional[float] = None
    refine: int = 1
    blowup_bound: float = field(default_factory=lambda: settings.blowup_bound)
    first_trajectory: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ParameterError(f"step size must be positive, got {self.h}")
        if not self.T > 0:
            raise ParameterError(f"time horizon must be positive, got {self.T}")
        if self.ensemble < 1:
            raise ParameterError("ensemble size must be at least 1")
        if self.refine < 1:
            raise ParameterError("refine must be at least 1")
        if self.theta is not None and not 0 < self.theta < 1:
            raise ParameterError(f"theta must lie in (0,1), got {self.theta}")
        if len(self.initial.coeffs) > self.operator.n_modes:
            raise DimensionError(f"{len(self.initial.coeffs)} initial coefficients for {self.operator.n_modes} modes")
        times = tuple(float(t) for t in self.save_times) or (self.T,)
        if any(t < 0 or t > self.T + TIME_TOL for t in times):
            raise ParameterError(f"save times must lie in [0, {self.T}]")
        object.__setattr__(self, "save_times", tuple(sorted(set(times))))
        self.save_steps()
        drifts.check_basis(self.drift, self.operator)
        if self.initial.in_h and not drifts.metadata(self.drift, self.operator).bounded:
            raise ConfigurationError(messages.H_DATA_UNBOUNDED_DRIFT)

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.h))

    def save_steps(self) -> List[int]:
        steps = []
        for t in self.save_times:
            j = int(round(t / self.h))
            if abs(j * self.h - t) > TIME_TOL * max(1.0, self.T):
                raise ParameterError(f"save time {t} is not on the step grid of size {self.h}")
            steps.append(j)
        if abs(self.n_steps * self.h - self.T) > TIME_TOL * max(1.0, self.T):
            raise ParameterError(f"T={self.T} is not a multiple of h={self.h}")
        return steps

    @property
    def work(self) -> int:
        return self.ensemble * self.n_steps * self.refine * self.operator.n_modes

    def noise_ensemble(self) -> NoiseEnsemble:
        return NoiseEnsemble.of_size(self.seed, self.ensemble, self.first_trajectory)


@dataclass
class Ensemble:
    times: np.ndarray
    states: np.ndarray
    draw_counts: List[int]
    checksums: List[str]
    blown_up: List[Optional[int]]
    verdict: Optional[RegimeVerdict] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def alive(self) -> np.ndarray:
        return np.array([b is None for b in self.blown_up])

    @property
    def checksum(self) -> str:
        digest = hashlib.blake2b(digest_size=16)
        for value in self.checksums:
            digest.update(value.encode())
        return digest.hexdigest()

    def trajectory(self, index: int) -> List[ModeVector]:
        return [ModeVector(state) for state in self.states[index]]

    def norms(self, op: SpectralOperator, sigma: float = 0.0) -> np.ndarray:
        """(E, S) Sobolev norms; truncated trajectories give NaN after their blow-up."""
        return sobolev_norms(op, sigma, self.states)

    def statistics(self, op: SpectralOperator, sigma: float = 0.0) -> Dict[str, np.ndarray]:
        norms = self.norms(op, sigma)[self.alive]
        if norms.shape[0] == 0:
            nan = np.full(self.times.shape, np.nan)
            return {"mean": nan, "mean_sq": nan, "var": nan}
        return {"mean": np.nanmean(norms, axis=0), "mean_sq": np.nanmean(norms ** 2, axis=0),
                "var": np.nanvar(norms, axis=0)}


def _theta_for_regime(theta: Optional[float], meta) -> Fraction:
    if theta is not None:
        return Fraction(theta).limit_denominator(10 ** 6)
    if meta.theta is not None and 0 < meta.theta < 1:
        return Fraction(meta.theta).limit_denominator(10 ** 6)
    return Fraction(1, 2)


def drift_verdict(operator: SpectralOperator, drift: DriftSpec, delta: float,
                  theta: Optional[float] = None) -> Tuple[Optional[RegimeVerdict], List[str]]:
    """Check an operator, drift and noise exponent against the regime hypotheses in d = 1."""
    meta = drifts.metadata(drift, operator)
    exps = drifts.regime_exponents(drift, operator, delta)
    try:
        params = RegimeParams(d=1, theta=_theta_for_regime(theta, meta), **exps)
    except ParameterError as err:
        return None, [f"{messages.EXPLORATORY_RUN}: {err}"]
    verdict = check(params)
    warnings = []
    if not verdict.weak_DAalpha:
        warnings.append(messages.EXPLORATORY_RUN)
    if verdict.critical:
        warnings.append(messages.CRITICAL_SMALLNESS)
    return verdict, warnings


def regime_verdict(cfg: SimConfig) -> Tuple[Optional[RegimeVerdict], List[str]]:
    return drift_verdict(cfg.operator, cfg.drift, cfg.delta, cfg.theta)


def _drift_increment(cfg: SimConfig, coeffs: np.ndarray) -> np.ndarray:
    lam = cfg.operator.eigenvalues[:coeffs.shape[-1]]
    b = drifts.evaluate(cfg.drift, cfg.operator, coeffs)
    return cfg.h * phi1(lam * cfg.h) * b


def _advance(cfg: SimConfig, coeffs: np.ndarray, ensemble: NoiseEnsemble, step_index: int,
             ledgers: Optional[Sequence[DrawLedger]]) -> np.ndarray:
    drift_part = _drift_increment(cfg, coeffs)
    if cfg.noise:
        linear = ou_step_batch(cfg.operator, cfg.delta, cfg.h, coeffs, ensemble, step_index, cfg.refine, ledgers)
    else:
        linear = np.exp(-cfg.operator.eigenvalues[:coeffs.shape[-1]] * cfg.h) * coeffs
    return linear + drift_part


def step(state: ModeVector, cfg: SimConfig, stream: NoiseStream, ledger: Optional[DrawLedger] = None) -> ModeVector:
    """
    The step function performs one exponential Euler step for one trajectory,
    drawing the noise of ``stream`` at its current counter.

    :param state: ModeVector: state at t_j, of dimension n_modes
    :param cfg: SimConfig: the simulation configuration
    :param stream: NoiseStream: stream positioned at step j
    :param ledger: DrawLedger: optional draw accounting
    :return: ModeVector at t_{j+1}
    :raises SimulationError: if the new state is not finite
    """
    if state.n != cfg.operator.n_modes:
        raise DimensionError(f"state has {state.n} modes, expected {cfg.operator.n_modes}")
    ensemble = NoiseEnsemble(stream.seed, [stream.trajectory_id])
    ledgers = None if ledger is None else [ledger]
    out = _advance(cfg, state.coeffs[None, :], ensemble, stream.counter, ledgers)[0]
    if not np.all(np.isfinite(out)):
        raise SimulationError("non-finite state", stream.counter + 1)
    return ModeVector(out)


def simulate(cfg: SimConfig) -> Ensemble:
    """
    The simulate function advances the whole ensemble to T and records the states at the
    save times. Trajectories whose norm exceeds the blow-up bound, or that stop being
    finite, are filled with NaN from that step on and flagged.

    :param cfg: SimConfig: the simulation configuration
    :return: Ensemble with states of shape (E, S, n), per-trajectory checksums and the regime verdict
    """
    verdict, warnings = regime_verdict(cfg)
    for warning in warnings:
        logger.warning(warning)

    n = cfg.operator.n_modes
    noise = cfg.noise_ensemble()
    ledgers = [DrawLedger() for _ in range(cfg.ensemble)] if cfg.noise else None
    save_steps = cfg.save_steps()
    slots: Dict[int, List[int]] = {}
    for slot, j in enumerate(save_steps):
        slots.setdefault(j, []).append(slot)

    states = np.full((cfg.ensemble, len(save_steps), n), np.nan)
    current = np.tile(cfg.initial.vector(n), (cfg.ensemble, 1))
    blown_up: List[Optional[int]] = [None] * cfg.ensemble
    alive = np.ones(cfg.ensemble, dtype=bool)

    for j in range(cfg.n_steps + 1):
        for slot in slots.get(j, []):
            states[alive, slot] = current[alive]
        if j == cfg.n_steps:
            break
        current = _advance(cfg, current, noise, j, ledgers)
        with np.errstate(invalid="ignore", over="ignore"):
            bad = alive & (~np.all(np.isfinite(current), axis=1) |
                           (np.linalg.norm(current, axis=1) > cfg.blowup_bound))
        for e in np.flatnonzero(bad):
            blown_up[e] = j + 1
            logger.warning("trajectory %d truncated at step %d", cfg.first_trajectory + e, j + 1)
        alive &= ~bad
        current[~alive] = 0.0

    if not alive.any():
        raise SimulationError("every trajectory blew up", min(b for b in blown_up if b is not None))
    return Ensemble(
        times=np.array(cfg.save_times),
        states=states,
        draw_counts=[ledger.count for ledger in ledgers] if ledgers else [0] * cfg.ensemble,
        checksums=[ledger.checksum for ledger in ledgers] if ledgers else [""] * cfg.ensemble,
        blown_up=blown_up,
        verdict=verdict,
        warnings=warnings,
    )


@dataclass
class GalerkinLevel:
    n: int
    mean_error: float
    mean_sq_error: float
    standard_error: float
    tail: float
    closed_form_sq: Optional[float]
    profile: List[float]

    def as_dict(self) -> dict:
        return {"n": self.n, "mean_error": self.mean_error, "mean_sq_error": self.mean_sq_error,
                "standard_error": self.standard_error, "tail": self.tail,
                "closed_form_sq": self.closed_form_sq, "profile": self.profile}


@dataclass
class GalerkinReport:
    reference: int
    weight_exponent: float
    times: List[float]
    levels: List[GalerkinLevel]
    observed_rate: Optional[float]
    verdict: Optional[RegimeVerdict]
    warnings: List[str]


def _closed_form_sq(cfg: SimConfig, n: int, reference: int, t: float) -> float:
    lam = cfg.operator.eigenvalues[n:reference]
    x = cfg.initial.vector(reference)[n:reference]
    out = np.sum(np.exp(-2.0 * lam * t) * x ** 2)
    if cfg.noise and t > 0:
        out += np.sum(convolution_variance(lam, cfg.delta, t))
    return float(out)


def galerkin_study(cfg: SimConfig, mode_levels: Sequence[int]) -> GalerkinReport:
    """
    The galerkin_study function runs the same ensemble at several Galerkin dimensions with
    shared noise and reports sup_t t^{α̃} E‖X_n(t) - X_ref(t)‖ against the largest level.

    :param cfg: SimConfig: configuration; its operator fixes the basis and power
    :param mode_levels: Sequence[int]: strictly increasing dimensions, the last is the reference
    :return: GalerkinReport with one entry per level (the reference included, at zero)
    :raises SimulationError: if no trajectory survives at both a level and the reference
    """
    levels = [int(n) for n in mode_levels]
    if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
        raise ParameterError("mode levels must be at least two strictly increasing positive integers")
    reference = levels[-1]
    if reference < 2 or reference > cfg.operator.n_modes:
        raise ParameterError(f"reference level {reference} must lie in [2, {cfg.operator.n_modes}]")

    ref_cfg = replace(cfg, operator=cfg.operator.restrict(reference),
                      initial=replace(cfg.initial, coeffs=tuple(cfg.initial.vector(reference))))
    ref_run = simulate(ref_cfg)
    times = ref_run.times
    weight_exponent = cfg.initial.roughness
    weights = np.where(times > 0, times ** weight_exponent, 0.0 if weight_exponent > 0 else 1.0)
    lam_ref = ref_cfg.operator.eigenvalues

    results = []
    for n in levels:
        level_cfg = replace(ref_cfg, operator=ref_cfg.operator.restrict(n),
                            initial=replace(cfg.initial, coeffs=tuple(cfg.initial.vector(n))))
        run = ref_run if n == reference else simulate(level_cfg)
        padded = np.zeros_like(ref_run.states)
        padded[..., :n] = run.states
        alive = ref_run.alive & run.alive
        if not alive.any():
            raise SimulationError(f"no trajectory survives at both n={n} and the reference n={reference}")
        errors = np.linalg.norm(padded - ref_run.states, axis=-1)[alive]
        mean = errors.mean(axis=0) * weights
        mean_sq = (errors ** 2).mean(axis=0) * weights ** 2
        se = errors.std(axis=0, ddof=1) / np.sqrt(errors.shape[0]) * weights if errors.shape[0] > 1 \
            else np.zeros_like(mean)
        k = int(np.argmax(mean))
        closed = None
        if cfg.drift.kind is drifts.DriftKind.zero:
            closed = _closed_form_sq(ref_cfg, n, reference, float(times[k])) * float(weights[k]) ** 2
        tail = float(np.sum(lam_ref[n:] ** (-1.0 - 2.0 * cfg.delta)))
        results.append(GalerkinLevel(n, float(mean[k]), float(mean_sq[k]), float(se[k]), tail, closed,
                                     [float(v) for v in mean]))

    observed_rate = None
    usable = [(lv.n, lv.mean_error) for lv in results[:-1] if lv.mean_error > 0]
    if len(usable) >= 2:
        ns, errs = zip(*usable)
        observed_rate = float(-np.polyfit(np.log(ns), np.log(errs), 1)[0])
    return GalerkinReport(reference, weight_exponent, [float(t) for t in times], results, observed_rate,
                          ref_run.verdict, ref_run.warnings)


@dataclass
class CouplingReport:
    distance: float
    sup_rms: float
    stderr: float
    ratio: Optional[float]
    profile: List[float]
    times: List[float]
    degenerate: bool
    checksums_match: bool
    verdict: Optional[RegimeVerdict]

    def as_dict(self) -> dict:
        return {"distance": self.distance, "sup_rms": self.sup_rms, "stderr": self.stderr, "ratio": self.ratio,
                "profile": self.profile, "times": self.times, "degenerate": self.degenerate,
                "checksums_match": self.checksums_match,
                "verdict": None if self.verdict is None else self.verdict.as_dict()}


def couple(cfg: SimConfig, x: InitialData, y: InitialData) -> CouplingReport:
    """
    The couple function runs two ensembles from x and y on the same noise and reports
    sup_t (E‖X(t) - Y(t)‖_α²)^{1/2} and its ratio to ‖x - y‖_α.

    :param cfg: SimConfig: shared configuration; its initial data is replaced by x and y
    :param x: InitialData: first initial state
    :param y: InitialData: second initial state
    :return: CouplingReport; ``degenerate`` is set when x = y
    """
    meta = drifts.metadata(cfg.drift, cfg.operator)
    n = cfg.operator.n_modes
    run_x = simulate(replace(cfg, initial=x))
    run_y = simulate(replace(cfg, initial=y))
    distance = float(sobolev_norms(cfg.operator, meta.alpha, x.vector(n) - y.vector(n)))
    alive = run_x.alive & run_y.alive
    gaps = sobolev_norms(cfg.operator, meta.alpha, run_x.states - run_y.states)[alive]
    squares = gaps ** 2
    profile = np.sqrt(squares.mean(axis=0))
    k = int(np.argmax(profile))
    sup_rms = float(profile[k])
    # delta method on the mean square at the maximising time
    stderr = 0.0
    if squares.shape[0] > 1 and sup_rms > 0:
        stderr = float(squares[:, k].std(ddof=1) / np.sqrt(squares.shape[0]) / (2.0 * sup_rms))
    degenerate = distance == 0.0
    return CouplingReport(
        distance=distance,
        sup_rms=sup_rms,
        stderr=stderr,
        ratio=None if degenerate else sup_rms / distance,
        profile=[float(v) for v in profile],
        times=[float(t) for t in run_x.times],
        degenerate=degenerate,
        checksums_match=run_x.checksums == run_y.checksums and run_x.draw_counts == run_y.draw_counts,
        verdict=run_x.verdict,
    )

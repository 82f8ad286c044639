"""Experiment registry: every config kind maps to a runner returning an Artifact.

Runners echo the validated config and the regime verdict in the summary.
The continuous-dependence ladder refuses inadmissible tuples; simulations on
them run and are marked exploratory.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.conf import messages
from src.conf.config import settings
from src.schemas import (
    ContinuousDependenceConfig,
    CouplingConfig,
    DemoConfig,
    ExperimentConfig,
    ExperimentKind,
    GalerkinConfig,
    KolmogorovConfig,
    MonitorConfig,
    RegimeParamsModel,
    RegimeTableConfig,
    RhoIntervalModel,
    RunCreate,
    SimulationConfig,
)
from src.services import drift as drifts
from src.services import kolmogorov as kolmo
from src.services import solver
from src.services.errors import ParameterError, RegimeMismatchError
from src.services.regime import admissible_rho, check
from src.services.regime_tables import COORDS, boundary_flips, emit_table
from src.services.reports import Artifact, Table, plain
from src.services.solver import InitialData, SimConfig
from src.services.spectral import ModeVector, sobolev_norm

logger = logging.getLogger(__name__)

VERDICT_COLUMNS = ["weak_DAalpha", "weak_H", "pathwise_DAalpha", "pathwise_H", "critical"]


# deterministic non-uniqueness

@dataclass
class NonuniquenessReport:
    theta: float
    T: float
    times: np.ndarray
    solutions: Dict[str, np.ndarray]
    zero_residual: float
    closed_residual: float
    closed_fd_residual: float
    separation: float
    delayed: List[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"theta": self.theta, "T": self.T, "points": int(self.times.size),
                "zero_residual": self.zero_residual, "closed_residual": self.closed_residual,
                "closed_fd_residual": self.closed_fd_residual, "separation": self.separation,
                "delayed": self.delayed}


def nonuniqueness_demo(theta: float, T: float = 1.0, points: int = 1001,
                       delays: Sequence[float] = ()) -> NonuniquenessReport:
    """
    The nonuniqueness_demo function exhibits several solutions of x' = sign(x)|x|^θ, x(0) = 0:
    x ≡ 0, x(t) = ((1−θ)t)^{1/(1−θ)} and its delayed copies started at each s in ``delays``.
    Residuals are measured with the exact derivative and, for comparison, with second order
    finite differences on the grid.

    :param theta: float: exponent in (0, 1)
    :param T: float: horizon
    :param points: int: grid points on [0, T]
    :param delays: Sequence[float]: start times of the delayed solutions, in [0, T]
    :return: NonuniquenessReport
    """
    if not 0 < theta < 1:
        raise ParameterError(f"theta must lie in (0,1), got {theta}")
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    if points < 3:
        raise ParameterError("at least 3 grid points are needed")
    if any(not 0 <= s <= T for s in delays):
        raise ParameterError(f"delays must lie in [0, {T}]")

    t = np.linspace(0.0, T, points)
    power = 1.0 / (1.0 - theta)

    def rhs(x):
        return np.sign(x) * np.abs(x) ** theta

    def closed(s):
        base = (1.0 - theta) * np.clip(t - s, 0.0, None)
        return base ** power, base ** (theta * power)

    zero = np.zeros_like(t)
    x, dx = closed(0.0)
    fd = np.gradient(x, t, edge_order=2)
    solutions = {"zero": zero, "closed_form": x}
    delayed = []
    for s in delays:
        xs, dxs = closed(s)
        solutions[f"delayed[{s:g}]"] = xs
        delayed.append({"delay": float(s), "separation": float(xs[-1]),
                        "residual": float(np.max(np.abs(dxs - rhs(xs))))})
    report = NonuniquenessReport(
        theta=float(theta), T=float(T), times=t, solutions=solutions,
        zero_residual=float(np.max(np.abs(np.gradient(zero, t) - rhs(zero)))),
        closed_residual=float(np.max(np.abs(dx - rhs(x)))),
        closed_fd_residual=float(np.max(np.abs(fd - rhs(x)))),
        separation=float(x[-1] - zero[-1]),
        delayed=delayed,
    )
    logger.info("non-uniqueness demo θ=%g: separation %.6g, residual %.3e", theta, report.separation,
                report.closed_residual)
    return report


# continuous dependence

@dataclass
class LadderReport:
    rows: List[dict]
    max_ratio: Optional[float]
    verdict: object
    warnings: List[str]


def continuous_dependence(cfg: SimConfig, ladder: Sequence[float],
                          direction: Optional[Sequence[float]] = None) -> LadderReport:
    """
    The continuous_dependence function couples x = cfg.initial with y = x + m·v/‖v‖_α for each
    magnitude m of the ladder and reports the coupling ratio with its Monte Carlo error bar.
    The headline statistic is the largest ratio across the ladder.

    :param cfg: SimConfig: configuration whose initial data is the base point x
    :param ladder: Sequence[float]: magnitudes ‖x − y‖_α, nonnegative
    :param direction: Sequence[float]: perturbation direction v, defaults to e_1
    :return: LadderReport
    :raises RegimeMismatchError: when the configuration is not admissible, with its verdict
    """
    verdict, warnings = solver.regime_verdict(cfg)
    if verdict is None or not verdict.weak_DAalpha:
        raise RegimeMismatchError(messages.NOT_ADMISSIBLE, verdict)
    if not ladder or any(m < 0 for m in ladder):
        raise ParameterError("the ladder needs nonnegative magnitudes")
    op = cfg.operator
    n = op.n_modes
    v = ModeVector(np.asarray(direction if direction is not None else (1.0,), dtype=float)).resized(n)
    alpha = drifts.metadata(cfg.drift, op).alpha
    scale = sobolev_norm(op, alpha, v)
    if not scale > 0:
        raise ParameterError("the perturbation direction has zero norm")
    x = cfg.initial.vector(n)

    rows = []
    for magnitude in ladder:
        y = InitialData(tuple(x + magnitude * v.coeffs / scale), cfg.initial.sobolev_index, cfg.initial.in_h)
        report = solver.couple(cfg, cfg.initial, y)
        rows.append({
            "magnitude": float(magnitude), "distance": report.distance, "sup_rms": report.sup_rms,
            "stderr": report.stderr, "ratio": report.ratio,
            "ratio_stderr": None if report.degenerate else report.stderr / report.distance,
            "degenerate": report.degenerate, "exact_zero": report.sup_rms == 0.0,
            "checksums_match": report.checksums_match,
        })
        logger.info("ladder magnitude %g: ratio %s", magnitude, report.ratio)
    ratios = [row["ratio"] for row in rows if row["ratio"] is not None]
    return LadderReport(rows, max(ratios) if ratios else None, verdict, warnings)


# runners

def _verdict_dict(verdict) -> Optional[dict]:
    return None if verdict is None else verdict.as_dict()


def _regime_check(section: RegimeParamsModel, seed: int) -> Artifact:
    params = section.to_params()
    verdict = check(params)
    table = Table(["d"] + list(COORDS) + ["example_class"] + VERDICT_COLUMNS + ["failed_conditions"])
    table.add(**params.as_dict(), **verdict.as_dict())
    summary = {"params": params.as_dict(), "verdict": verdict.as_dict(), "admissible": verdict.admissible}
    return Artifact("regime_check", "Regime check", summary, {"verdict": table})


def _rho_interval(section: RhoIntervalModel, seed: int) -> Artifact:
    exps = section.exponents()
    intervals = admissible_rho(section.d, exps["gamma"], section.theta, exps["mu"], exps["nu"],
                               section.drift_bounded, section.example_class, section.p, section.r)
    table = Table(["level", "lower", "lower_closed", "upper", "upper_closed", "text"])
    for level, items in intervals.as_dict().items():
        for item in items:
            table.add(level=level, **item)
        if not items:
            table.add(level=level, text="empty")
    summary = {"tuple": {**section.dict(exclude={"p", "r"}), **exps}, "intervals": intervals.as_dict(),
               "verdict": None}
    return Artifact("rho_interval", "Admissible noise exponents", summary, {"rho_intervals": table})


def _regime_table(section: RegimeTableConfig, seed: int) -> Artifact:
    rows = emit_table(section.example_class, section.scenario, section.table_offsets())
    columns = ["row", "d"] + [f"{c}_mark" for c in COORDS] + list(COORDS) + \
        ["boundary", "weak", "pathwise", "critical", "flips", "note"]
    table = Table(columns)
    all_flip = True
    for row in rows:
        flips = boundary_flips(row)
        all_flip = all_flip and all(flips.values())
        data = row.as_dict()
        data["flips"] = ",".join(name for name, flipped in flips.items() if flipped)
        table.add(**data)
    summary = {"example_class": section.example_class, "scenario": section.scenario,
               "offsets": {k: str(v) for k, v in rows[0].offsets.items()} if rows else {},
               "rows": len(rows), "all_boundaries_flip": all_flip,
               "verdicts": [row.verdict.as_dict() for row in rows]}
    logger.info("table %s/%s: %d rows, boundaries flip: %s", section.example_class.value, section.scenario.value,
                len(rows), all_flip)
    title = f"Boundary table {section.example_class.value}/{section.scenario.value}"
    return Artifact("regime_table", title, summary, {"table": table})


def _statistics_table(run: solver.Ensemble, cfg: SimConfig, sigmas: Sequence[float]) -> Table:
    table = Table(["time", "sigma", "mean", "mean_sq", "var", "alive"])
    alive = int(run.alive.sum())
    for sigma in sigmas:
        stats = run.statistics(cfg.operator, sigma)
        for i, t in enumerate(run.times):
            table.add(time=float(t), sigma=float(sigma), mean=stats["mean"][i], mean_sq=stats["mean_sq"][i],
                      var=stats["var"][i], alive=alive)
    return table


def _simulate(section: SimulationConfig, seed: int) -> Artifact:
    cfg = section.build(seed)
    logger.info("simulate: %d modes, %d steps, ensemble %d, seed %d", cfg.operator.n_modes, cfg.n_steps,
                cfg.ensemble, cfg.seed)
    run = solver.simulate(cfg)
    summary = {"config": section.dict(), "seed": cfg.seed, "verdict": _verdict_dict(run.verdict),
               "warnings": run.warnings, "exploratory": messages.EXPLORATORY_RUN in run.warnings,
               "checksum": run.checksum, "draws": sum(run.draw_counts),
               "blown_up": sum(b is not None for b in run.blown_up)}
    logger.info("simulate done: checksum %s", run.checksum)
    return Artifact("simulate", "Galerkin simulation", summary,
                    {"statistics": _statistics_table(run, cfg, section.norms)})


def _couple(section: CouplingConfig, seed: int) -> Artifact:
    cfg = section.simulation.build(seed)
    report = solver.couple(cfg, section.x.build(), section.y.build())
    table = Table(["time", "rms"])
    for t, value in zip(report.times, report.profile):
        table.add(time=t, rms=value)
    summary = {"config": section.dict(), "seed": cfg.seed,
               **{k: v for k, v in report.as_dict().items() if k not in ("profile", "times")}}
    return Artifact("couple", "Same-noise coupling", summary, {"coupling": table})


def _continuous_dependence(section: ContinuousDependenceConfig, seed: int) -> Artifact:
    cfg = section.simulation.build(seed, initial=section.base.build())
    report = continuous_dependence(cfg, section.ladder, section.direction)
    table = Table(["magnitude", "distance", "sup_rms", "stderr", "ratio", "ratio_stderr", "degenerate",
                   "exact_zero", "checksums_match"], report.rows)
    summary = {"config": section.dict(), "seed": cfg.seed, "verdict": _verdict_dict(report.verdict),
               "warnings": report.warnings, "max_ratio": report.max_ratio}
    return Artifact("continuous_dependence", "Continuous dependence ladder", summary, {"ladder": table})


def _galerkin(section: GalerkinConfig, seed: int) -> Artifact:
    cfg = section.simulation.build(seed)
    report = solver.galerkin_study(cfg, section.levels)
    levels = Table(["n", "mean_error", "mean_sq_error", "standard_error", "tail", "closed_form_sq"])
    profile = Table(["time", "n", "error"])
    for level in report.levels:
        levels.add(**{k: v for k, v in level.as_dict().items() if k != "profile"})
        for t, value in zip(report.times, level.profile):
            profile.add(time=t, n=level.n, error=value)
    summary = {"config": section.dict(), "seed": cfg.seed, "reference": report.reference,
               "weight_exponent": report.weight_exponent, "observed_rate": report.observed_rate,
               "verdict": _verdict_dict(report.verdict), "warnings": report.warnings}
    return Artifact("galerkin", "Galerkin convergence", summary, {"levels": levels, "profile": profile})


def _kolmogorov(section: KolmogorovConfig, seed: int) -> Artifact:
    op = section.operator.build()
    drift = section.drift.build()
    problem = kolmo.KolmogorovProblem(op, section.delta, drift, section.forcing.build(op.n_modes), section.k,
                                      section.cbar, c_tilde=section.c_tilde, theta=section.theta)
    rule = kolmo.make_rule(op.n_modes, section.expectation.method, section.expectation.samples,
                           section.expectation.order, seed)
    iterate = kolmo.solve_u(problem, section.grid.build(), section.quadrature.build(), rule, section.tol,
                            section.max_iter)
    residual = kolmo.generator_residual(problem, iterate)
    norm = section.forcing.norm(section.grid.radius)
    norm = problem.g_norm if norm is None else norm
    constants = kolmo.estimate_constants(problem, iterate, section.est1_gammas, section.est2_gammas, norm) \
        if norm > 0 else {}
    verdict, warnings = solver.drift_verdict(op, drift, section.delta, problem.theta)

    sweeps = Table(["sweep", "delta", "ratio"])
    for i, delta in enumerate(iterate.deltas):
        sweeps.add(sweep=i + 1, delta=delta, ratio=iterate.ratios[i - 1] if i > 0 else None)
    coords = [f"x{j + 1}" for j in range(op.n_modes)]
    grads = [f"du{j + 1}" for j in range(op.n_modes)]
    solution = Table(coords + ["u"] + grads)
    points = iterate.points().reshape(-1, op.n_modes)
    for x, u, du in zip(points, iterate.u.ravel(), iterate.du.reshape(-1, op.n_modes)):
        solution.add(**dict(zip(coords, x)), u=u, **dict(zip(grads, du)))
    summary = {"config": section.dict(), "seed": seed, "regime": problem.regime, "cbar": problem.cbar,
               "cbar_bound": problem.bound, "rate": problem.rate, "theta": problem.theta, "c_b": problem.c_b,
               "z0": problem.z0, "iterate": iterate.as_dict(), "residual": residual, "constants": constants,
               "verdict": _verdict_dict(verdict), "warnings": warnings}
    return Artifact("kolmogorov", "Kolmogorov fixed point", summary, {"sweeps": sweeps, "solution": solution})


def _monitor(section: MonitorConfig, seed: int) -> Artifact:
    op = section.operator.build()
    drift = section.drift.build()
    report = kolmo.estimate_monitor(op, section.delta, drift, section.n_values, section.k_values,
                                    section.est1_gammas, section.est2_gammas, section.grid.build(),
                                    section.quadrature.build(), section.expectation.method,
                                    section.expectation.samples, section.expectation.order, seed, section.tol,
                                    section.max_iter, section.cbar)
    verdict, warnings = solver.drift_verdict(op, drift, section.delta, report.theta)
    table = Table(list(report.cases[0].keys()), report.cases)
    summary = {"config": section.dict(), "seed": seed,
               **{k: v for k, v in report.as_dict().items() if k != "cases"},
               "verdict": _verdict_dict(verdict), "warnings": warnings}
    return Artifact("monitor", "Uniform estimate monitor", summary, {"constants": table})


def _demo(section: DemoConfig, seed: int) -> Artifact:
    report = nonuniqueness_demo(section.theta, section.T, section.points, section.delays)
    names = list(report.solutions)
    table = Table(["time"] + names)
    for i, t in enumerate(report.times):
        table.add(time=t, **{name: report.solutions[name][i] for name in names})
    summary = {"config": section.dict(), **report.as_dict(), "verdict": None}
    return Artifact("demo", "Deterministic non-uniqueness", summary, {"solutions": table})


RUNNERS: Dict[ExperimentKind, Callable[..., Artifact]] = {
    ExperimentKind.regime_check: _regime_check,
    ExperimentKind.rho_interval: _rho_interval,
    ExperimentKind.regime_table: _regime_table,
    ExperimentKind.simulate: _simulate,
    ExperimentKind.couple: _couple,
    ExperimentKind.continuous_dependence: _continuous_dependence,
    ExperimentKind.galerkin: _galerkin,
    ExperimentKind.kolmogorov: _kolmogorov,
    ExperimentKind.monitor: _monitor,
    ExperimentKind.demo: _demo,
}


def resolve_seed(config: ExperimentConfig, seed: Optional[int] = None) -> int:
    """Explicit seed, then the experiment's, then the section's, then the settings default."""
    section_seed = getattr(config.section, "seed", None)
    for candidate in (seed, config.seed, section_seed, settings.default_seed):
        if candidate is not None:
            return int(candidate)


def run_section(kind: ExperimentKind, section, seed: Optional[int] = None) -> Artifact:
    return run_experiment(ExperimentConfig(kind=kind, **{kind.value: section}), seed)


def run_experiment(config: ExperimentConfig, seed: Optional[int] = None) -> Artifact:
    """
    The run_experiment function dispatches a validated config to its runner.

    :param config: ExperimentConfig: the experiment, with exactly one section
    :param seed: int: overrides every seed in the config
    :return: Artifact with summary, tables and checksum
    """
    seed = resolve_seed(config, seed)
    logger.info("run %s with seed %d", config.kind.value, seed)
    artifact = RUNNERS[config.kind](config.section, seed)
    artifact.summary.setdefault("seed", seed)
    logger.info("%s finished: checksum %s", config.kind.value, artifact.checksum)
    return artifact


def run_record(artifact: Artifact, config: dict, seed: Optional[int] = None) -> RunCreate:
    """The ledger entry of a finished experiment; the config echo is stored once, outside the summary."""
    summary = plain({k: v for k, v in artifact.summary.items() if k != "config"})
    return RunCreate(kind=artifact.kind, seed=summary.get("seed", seed), config=plain(config),
                     verdict=summary.get("verdict"), checksum=artifact.checksum, summary=summary)

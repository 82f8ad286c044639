import enum
import re
from datetime import datetime
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Extra, Field, root_validator, validator

from src.conf.config import settings
from src.database.models import RunKind
from src.services.drift import DriftKind, DriftSpec, FunctionKind, ScalarFunction
from src.services.errors import ParameterError
from src.services.kolmogorov import GridSpec, TimeQuadrature
from src.services.regime import ExampleClass, RegimeParams, reaction_diffusion_exponents
from src.services.regime_tables import COORDS, Scenario
from src.services.solver import InitialData, SimConfig
from src.services.spectral import Basis, SpectralOperator, build_operator

RATIONAL_PATTERN = re.compile(r"[+-]?\d+(/\d+)?")


class ExactRational(str):
    """
    An exact rational written as an integer or "p/q". Decimal and float spellings are refused
    so that boundary values reach the checker unchanged. The stored text is the reduced form.
    """

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, value):
        if isinstance(value, bool):
            raise TypeError("a rational cannot be a boolean")
        if isinstance(value, int):
            return cls(str(value))
        if not isinstance(value, str):
            raise TypeError('rationals are written as integers or strings "p/q"')
        text = value.strip()
        if not RATIONAL_PATTERN.fullmatch(text):
            raise ValueError(f'{value!r} is not an integer or "p/q"')
        try:
            return cls(str(Fraction(text)))
        except ZeroDivisionError:
            raise ValueError(f"{value!r} has a zero denominator")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self)


def _fraction(value: Optional[ExactRational]) -> Optional[Fraction]:
    return None if value is None else Fraction(value)


class LabModel(BaseModel):
    class Config:
        extra = Extra.forbid


# regime

class RegimeTupleModel(LabModel):
    d: int = Field(ge=1, le=3)
    gamma: Optional[ExactRational] = None
    theta: ExactRational
    mu: Optional[ExactRational] = None
    nu: Optional[ExactRational] = None
    drift_bounded: bool = False
    example_class: ExampleClass = ExampleClass.fractional_heat
    p: Optional[ExactRational] = None
    r: Optional[ExactRational] = None

    def exponents(self) -> Dict[str, Fraction]:
        """
        The exponents function fills γ, μ and ν for the classes that fix them: Cahn–Hilliard
        on (I + A_N)² and reaction–diffusion from (p, r). Values given explicitly are kept so
        that the checker can refuse inconsistent ones.

        :return: dict with gamma, mu and nu as Fractions
        """
        cls = self.example_class
        given = {"gamma": _fraction(self.gamma), "mu": _fraction(self.mu), "nu": _fraction(self.nu)}
        if cls is ExampleClass.cahn_hilliard:
            fixed = {"gamma": Fraction(2), "mu": Fraction(1), "nu": Fraction(0)}
        elif cls is ExampleClass.cahn_hilliard_quartic:
            fixed = {"gamma": Fraction(2), "mu": Fraction(1, 2), "nu": Fraction(1)}
        elif cls is ExampleClass.reaction_diffusion and self.p is not None and self.r is not None:
            mu, nu = reaction_diffusion_exponents(self.d, Fraction(self.p), Fraction(self.r))
            fixed = {"gamma": Fraction(1), "mu": mu, "nu": nu}
        else:
            fixed = {}
        out = {name: given[name] if given[name] is not None else fixed.get(name) for name in given}
        missing = [name for name, value in out.items() if value is None]
        if missing:
            raise ParameterError(f"missing {', '.join(missing)} for {cls.value}")
        return out


class RegimeParamsModel(RegimeTupleModel):
    rho: ExactRational

    def to_params(self) -> RegimeParams:
        return RegimeParams(self.d, theta=Fraction(self.theta), rho=Fraction(self.rho),
                            drift_bounded=self.drift_bounded, example_class=self.example_class,
                            p=_fraction(self.p), r=_fraction(self.r), **self.exponents())


class RhoIntervalModel(RegimeTupleModel):
    pass


class RegimeVerdictResponse(BaseModel):
    weak_DAalpha: bool
    weak_H: bool
    pathwise_DAalpha: bool
    pathwise_H: bool
    critical: bool
    admissible: bool
    failed_conditions: List[str] = []
    notes: List[str] = []
    params: dict = {}


class IntervalResponse(BaseModel):
    lower: Optional[str]
    upper: Optional[str]
    lower_closed: bool
    upper_closed: bool
    text: str


class RhoIntervalResponse(BaseModel):
    weak: List[IntervalResponse]
    pathwise: List[IntervalResponse]
    pathwise_H: List[IntervalResponse]


class RegimeTableConfig(LabModel):
    example_class: ExampleClass
    scenario: Scenario
    offset: ExactRational = Field(default_factory=lambda: ExactRational.validate(settings.table_offset))
    offsets: Optional[Dict[str, ExactRational]] = None

    @validator("offsets")
    def known_coordinates(cls, value):
        if value is not None:
            unknown = set(value) - set(COORDS)
            if unknown:
                raise ValueError(f"unknown offset coordinates: {sorted(unknown)}")
        return value

    def table_offsets(self):
        if not self.offsets:
            return Fraction(self.offset)
        return {name: Fraction(self.offsets.get(name, self.offset)) for name in COORDS}


class TableRowResponse(BaseModel):
    example_class: str
    scenario: str
    row: int
    d: int
    gamma: str
    theta: str
    mu: str
    nu: str
    rho: str
    gamma_mark: str
    theta_mark: str
    mu_mark: str
    nu_mark: str
    rho_mark: str
    boundary: str
    offset: Dict[str, str]
    weak: bool
    pathwise: bool
    critical: bool
    note: str = ""


# simulation

class OperatorConfig(LabModel):
    basis: Basis = Basis.dirichlet_sine
    n_modes: int = Field(16, ge=1)
    power: float = Field(1.0, gt=0)
    custom_eigenvalues: Optional[List[float]] = None
    growth_exponent: Optional[float] = None

    def build(self) -> SpectralOperator:
        return build_operator(self.basis, self.n_modes, self.power, self.custom_eigenvalues, self.growth_exponent)


class FunctionConfig(LabModel):
    name: FunctionKind
    theta: float = Field(1.0, gt=0, le=1)
    c: float = 0.0

    def build(self) -> ScalarFunction:
        return ScalarFunction(self.name, self.theta, self.c)


class DriftConfig(LabModel):
    kind: DriftKind = DriftKind.zero
    F: Optional[FunctionConfig] = None
    mu: Optional[float] = Field(None, ge=0)
    nu: Optional[float] = Field(None, ge=0)
    f1: Optional[List[float]] = None
    scale: float = 1.0
    p: Optional[int] = None
    r: Optional[float] = None
    z0: Optional[List[float]] = None

    def build(self) -> DriftSpec:
        default = 0.25 if self.kind is DriftKind.burgers1d else 0.0
        spec = DriftSpec(
            kind=self.kind,
            F=None if self.F is None else self.F.build(),
            mu=default if self.mu is None else self.mu,
            nu=default if self.nu is None else self.nu,
            poly=None if self.f1 is None else tuple(self.f1),
            scale=self.scale,
            r=self.r,
            shift=tuple(self.z0 or ()),
        )
        if self.p is not None and (spec.degree is None or spec.degree + 1 != self.p):
            raise ParameterError(f"p={self.p} does not match the degree of f1")
        return spec


class NoiseConfig(LabModel):
    enabled: bool = True
    delta: float = 0.0
    refinement: int = Field(1, ge=1)


class InitialSpace(str, enum.Enum):
    DAalpha = "DAalpha"
    H = "H"
    rough = "rough"


class InitialDataConfig(LabModel):
    coefficients: List[float] = Field([1.0], min_items=1)
    space: InitialSpace = InitialSpace.DAalpha
    alpha_tilde: float = Field(0.0, ge=0)

    @root_validator(skip_on_failure=True)
    def roughness_only_for_rough_data(cls, values):
        if values["alpha_tilde"] > 0 and values["space"] is not InitialSpace.rough:
            raise ValueError("alpha_tilde applies to rough data only")
        return values

    def build(self) -> InitialData:
        return InitialData(tuple(self.coefficients), sobolev_index=-self.alpha_tilde,
                           in_h=self.space is InitialSpace.H)


class SimulationConfig(LabModel):
    operator: OperatorConfig = OperatorConfig()
    drift: DriftConfig = DriftConfig()
    noise: NoiseConfig = NoiseConfig()
    T: float = Field(gt=0)
    h: float = Field(gt=0)
    save_times: List[float] = []
    initial: InitialDataConfig = InitialDataConfig()
    ensemble: int = Field(1, ge=1)
    seed: Optional[int] = None
    theta: Optional[float] = Field(None, gt=0, lt=1)
    norms: List[float] = [0.0]

    def build(self, seed: Optional[int] = None, initial: Optional[InitialData] = None) -> SimConfig:
        return SimConfig(
            operator=self.operator.build(),
            drift=self.drift.build(),
            delta=self.noise.delta,
            T=self.T,
            h=self.h,
            initial=initial if initial is not None else self.initial.build(),
            save_times=tuple(self.save_times),
            ensemble=self.ensemble,
            seed=next(s for s in (seed, self.seed, settings.default_seed) if s is not None),
            noise=self.noise.enabled,
            theta=self.theta,
            refine=self.noise.refinement,
        )

    @property
    def work(self) -> int:
        return self.operator.n_modes * self.ensemble * self.noise.refinement * int(round(self.T / self.h))


class CouplingConfig(LabModel):
    simulation: SimulationConfig
    x: InitialDataConfig
    y: InitialDataConfig

    @property
    def work(self) -> int:
        return 2 * self.simulation.work


class ContinuousDependenceConfig(LabModel):
    simulation: SimulationConfig
    base: InitialDataConfig = InitialDataConfig()
    direction: List[float] = Field([1.0], min_items=1)
    ladder: List[float] = Field(min_items=1)

    @validator("ladder", each_item=True)
    def nonnegative_magnitude(cls, value):
        if value < 0:
            raise ValueError("magnitudes must be nonnegative")
        return value


class GalerkinConfig(LabModel):
    simulation: SimulationConfig
    levels: List[int] = Field(min_items=2)

    @property
    def work(self) -> int:
        return len(self.levels) * self.simulation.work


# kolmogorov

class ForcingMode(str, enum.Enum):
    drift = "drift"
    constant = "constant"
    linear = "linear"
    quadratic = "quadratic"


class ForcingConfig(LabModel):
    mode: ForcingMode = ForcingMode.drift
    value: float = 1.0
    j: int = Field(1, ge=1)

    def build(self, n: int) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        if self.mode is ForcingMode.drift:
            return None
        if self.j > n:
            raise ParameterError(f"forcing component {self.j} outside 1..{n}")
        j, value = self.j - 1, self.value
        if self.mode is ForcingMode.constant:
            return lambda z: np.full(np.shape(z)[:-1], value)
        if self.mode is ForcingMode.linear:
            return lambda z: value * z[..., j]
        return lambda z: value * z[..., j] ** 2

    def norm(self, radius: float) -> Optional[float]:
        """Sup of |g| over the grid box, None for the drift forcing."""
        if self.mode is ForcingMode.drift:
            return None
        power = {ForcingMode.constant: 0, ForcingMode.linear: 1, ForcingMode.quadratic: 2}[self.mode]
        return abs(self.value) * radius ** power


class GridConfig(LabModel):
    radius: float = Field(1.0, gt=0)
    nodes: int = Field(9, ge=3)

    def build(self) -> GridSpec:
        return GridSpec(self.radius, self.nodes)


class QuadratureConfig(LabModel):
    n_nodes: int = Field(64, ge=2)
    grading: float = Field(2.0, ge=1)
    t_max: Optional[float] = Field(None, gt=0)

    def build(self) -> TimeQuadrature:
        return TimeQuadrature(self.n_nodes, self.grading, self.t_max)


class ExpectationMethod(str, enum.Enum):
    monte_carlo = "monte_carlo"
    hermite = "hermite"


class ExpectationConfig(LabModel):
    method: ExpectationMethod = ExpectationMethod.monte_carlo
    samples: int = Field(2000, ge=2)
    order: int = Field(5, ge=1)


class KolmogorovConfig(LabModel):
    operator: OperatorConfig = OperatorConfig(n_modes=2)
    delta: float = 0.0
    drift: DriftConfig = DriftConfig()
    forcing: ForcingConfig = ForcingConfig()
    k: int = Field(1, ge=1)
    cbar: Optional[float] = Field(None, gt=0)
    c_tilde: Optional[float] = Field(None, ge=0)
    theta: Optional[float] = Field(None, gt=0, lt=1)
    grid: GridConfig = GridConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    expectation: ExpectationConfig = ExpectationConfig()
    tol: float = Field(1e-6, gt=0)
    max_iter: int = Field(50, ge=1)
    est1_gammas: List[float] = [0.0]
    est2_gammas: List[float] = []
    seed: Optional[int] = None

    @property
    def work(self) -> int:
        """Gaussian evaluations per time node and sweep."""
        per_node = self.expectation.samples if self.expectation.method is ExpectationMethod.monte_carlo \
            else self.expectation.order ** self.operator.n_modes
        return self.grid.nodes ** self.operator.n_modes * per_node


class MonitorConfig(LabModel):
    operator: OperatorConfig = OperatorConfig(n_modes=4)
    delta: float = 0.0
    drift: DriftConfig
    n_values: List[int] = Field(min_items=1)
    k_values: List[int] = [1]
    cbar: Optional[float] = Field(None, gt=0)
    grid: GridConfig = GridConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    expectation: ExpectationConfig = ExpectationConfig()
    tol: float = Field(1e-6, gt=0)
    max_iter: int = Field(50, ge=1)
    est1_gammas: List[float] = [0.0]
    est2_gammas: List[float] = []
    seed: Optional[int] = None


class DemoConfig(LabModel):
    theta: float = Field(0.5, gt=0, lt=1)
    T: float = Field(1.0, gt=0)
    points: int = Field(1001, ge=3)
    delays: List[float] = []

    @property
    def work(self) -> int:
        return self.points * (2 + len(self.delays))


# experiments

class ExperimentKind(str, enum.Enum):
    regime_check = "regime_check"
    rho_interval = "rho_interval"
    regime_table = "regime_table"
    simulate = "simulate"
    couple = "couple"
    galerkin = "galerkin"
    kolmogorov = "kolmogorov"
    monitor = "monitor"
    demo = "demo"
    continuous_dependence = "continuous_dependence"


class OutputFormat(str, enum.Enum):
    csv = "csv"
    json = "json"
    markdown = "markdown"


class ExperimentConfig(LabModel):
    kind: ExperimentKind
    regime_check: Optional[RegimeParamsModel] = None
    rho_interval: Optional[RhoIntervalModel] = None
    regime_table: Optional[RegimeTableConfig] = None
    simulate: Optional[SimulationConfig] = None
    couple: Optional[CouplingConfig] = None
    galerkin: Optional[GalerkinConfig] = None
    kolmogorov: Optional[KolmogorovConfig] = None
    monitor: Optional[MonitorConfig] = None
    demo: Optional[DemoConfig] = None
    continuous_dependence: Optional[ContinuousDependenceConfig] = None
    out_dir: Optional[str] = None
    seed: Optional[int] = None
    formats: List[OutputFormat] = [OutputFormat.csv, OutputFormat.json, OutputFormat.markdown]

    @root_validator(skip_on_failure=True)
    def one_section_for_the_kind(cls, values):
        kind = values["kind"]
        if values.get(kind.value) is None:
            raise ValueError(f"experiment kind {kind.value!r} needs a {kind.value!r} section")
        extra = [k.value for k in ExperimentKind if k is not kind and values.get(k.value) is not None]
        if extra:
            raise ValueError(f"sections {extra} do not belong to a {kind.value!r} experiment")
        return values

    @property
    def section(self) -> BaseModel:
        return getattr(self, self.kind.value)


class ExperimentResult(BaseModel):
    kind: ExperimentKind
    checksum: str
    summary: dict
    tables: Dict[str, List[dict]] = {}
    run_id: Optional[int] = None


# run ledger

class RunCreate(BaseModel):
    kind: RunKind
    seed: Optional[int] = None
    config: dict
    verdict: Optional[dict] = None
    checksum: Optional[str] = None
    summary: dict = {}


class RunResponse(BaseModel):
    id: int
    kind: RunKind
    seed: Optional[int]
    config: dict
    verdict: Optional[dict]
    checksum: Optional[str]
    summary: dict
    created_at: datetime

    class Config:
        orm_mode = True

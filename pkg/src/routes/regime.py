from typing import List

from fastapi import APIRouter, Depends, HTTPException, Path, Query, status
from pydantic import ValidationError
from sqlalchemy.orm import Session

from src.conf.config import settings
from src.database.db import get_db
from src.repository import runs as repository_runs
from src.routes.errors import http_error
from src.schemas import (
    ExperimentKind,
    RegimeParamsModel,
    RegimeTableConfig,
    RegimeVerdictResponse,
    RhoIntervalModel,
    RhoIntervalResponse,
    TableRowResponse,
)
from src.services.errors import LabError
from src.services.experiments import run_record, run_section
from src.services.regime import ExampleClass
from src.services.regime_tables import Scenario, emit_table

router = APIRouter(prefix="/regime", tags=['regime'])


@router.post("/check", response_model=RegimeVerdictResponse, name="Check a parameter tuple:")
async def check_tuple(body: RegimeParamsModel, db: Session = Depends(get_db)):
    """
    The check_tuple function decides the four uniqueness levels for an exact parameter tuple.
    A tuple that is not admissible is still a successful answer; only inconsistent input fails.

    :param body: RegimeParamsModel: d, gamma, theta, mu, nu, rho as "p/q" strings
    :param db: Session: Record the run
    :return: The verdict with the failed predicates rendered exactly
    """
    try:
        artifact = run_section(ExperimentKind.regime_check, body)
    except LabError as err:
        raise http_error(err)
    await repository_runs.create(run_record(artifact, body.dict()), db)
    return {**artifact.summary["verdict"], "admissible": artifact.summary["admissible"],
            "params": artifact.summary["params"]}


@router.post("/rho-interval", response_model=RhoIntervalResponse, name="Admissible noise exponents:")
async def rho_interval(body: RhoIntervalModel, db: Session = Depends(get_db)):
    """
    The rho_interval function returns, per verdict level, the exact set of rho keeping the
    tuple admissible.

    :param body: RhoIntervalModel: the tuple without rho
    :param db: Session: Record the run
    :return: weak, pathwise and pathwise_H intervals, empty lists when nothing is admissible
    """
    try:
        artifact = run_section(ExperimentKind.rho_interval, body)
    except LabError as err:
        raise http_error(err)
    await repository_runs.create(run_record(artifact, body.dict()), db)
    return artifact.summary["intervals"]


@router.get("/table/{example_class}/{scenario}", response_model=List[TableRowResponse], name="Boundary table:")
async def table(example_class: ExampleClass = Path(description="fractional_heat, burgers or navier_stokes"),
                scenario: Scenario = Path(description="weak, pathwise_theta_high or pathwise_theta_low"),
                offset: str = Query(default=settings.table_offset, description='positive rational "p/q"')):
    """
    The table function regenerates a boundary table at the given offset; every row is checked
    before it is returned.

    :param example_class: ExampleClass: class of the table
    :param scenario: Scenario: uniqueness scenario
    :param offset: str: value of the ⁺/⁻ offsets
    :return: The table rows
    """
    try:
        config = RegimeTableConfig(example_class=example_class, scenario=scenario, offset=offset)
    except ValidationError as err:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=err.errors())
    try:
        rows = emit_table(config.example_class, config.scenario, config.table_offsets())
    except LabError as err:
        raise http_error(err)
    return [row.as_dict() for row in rows]

from fastapi import APIRouter, Depends, status
from sqlalchemy.orm import Session

from src.conf.config import settings
from src.database.db import get_db
from src.repository import runs as repository_runs
from src.routes.errors import check_work, http_error
from src.schemas import (
    CouplingConfig,
    DemoConfig,
    ExperimentKind,
    ExperimentResult,
    GalerkinConfig,
    KolmogorovConfig,
    SimulationConfig,
)
from src.services.errors import LabError
from src.services.experiments import run_record, run_section
from src.services.reports import plain

router = APIRouter(prefix="/experiments", tags=['experiments'])


async def execute(kind: ExperimentKind, body, db: Session) -> ExperimentResult:
    """
    The execute function runs one experiment section, records it in the run ledger and
    returns its summary and tables.

    :param kind: ExperimentKind: which runner to use
    :param body: the validated section
    :param db: Session: Access the database
    :return: ExperimentResult with the ledger id
    """
    check_work(body.work, settings.api_max_work)
    try:
        artifact = run_section(kind, body)
    except LabError as err:
        raise http_error(err)
    run = await repository_runs.create(run_record(artifact, body.dict()), db)
    return ExperimentResult(kind=kind, checksum=artifact.checksum, summary=plain(artifact.summary),
                            tables={name: plain(t.rows) for name, t in artifact.tables.items()}, run_id=run.id)


@router.post("/simulate", response_model=ExperimentResult, status_code=status.HTTP_201_CREATED)
async def simulate(body: SimulationConfig, db: Session = Depends(get_db)):
    return await execute(ExperimentKind.simulate, body, db)


@router.post("/couple", response_model=ExperimentResult, status_code=status.HTTP_201_CREATED)
async def couple(body: CouplingConfig, db: Session = Depends(get_db)):
    return await execute(ExperimentKind.couple, body, db)


@router.post("/galerkin", response_model=ExperimentResult, status_code=status.HTTP_201_CREATED)
async def galerkin(body: GalerkinConfig, db: Session = Depends(get_db)):
    return await execute(ExperimentKind.galerkin, body, db)


@router.post("/kolmogorov", response_model=ExperimentResult, status_code=status.HTTP_201_CREATED)
async def kolmogorov(body: KolmogorovConfig, db: Session = Depends(get_db)):
    """
    The kolmogorov function solves the finite-dimensional equation by Picard iteration.
    Grids and rules are bounded by the HTTP work limit; larger solves belong to the CLI.
    """
    return await execute(ExperimentKind.kolmogorov, body, db)


@router.post("/demo/nonuniqueness", response_model=ExperimentResult, status_code=status.HTTP_201_CREATED)
async def nonuniqueness(body: DemoConfig, db: Session = Depends(get_db)):
    return await execute(ExperimentKind.demo, body, db)

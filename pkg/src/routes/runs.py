from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Path, Query, status
from sqlalchemy.orm import Session

from src.conf import messages
from src.database.db import get_db
from src.database.models import RunKind
from src.repository import runs as repository_runs
from src.schemas import RunResponse

router = APIRouter(prefix="/runs", tags=['runs'])


@router.get("/", response_model=List[RunResponse], name="Recorded runs:")
async def get_runs(kind: Optional[RunKind] = Query(default=None), limit: int = Query(default=50, ge=1, le=500),
                   offset: int = Query(default=0, ge=0), db: Session = Depends(get_db)):
    """
    The get_runs function lists recorded runs, newest first.

    :param kind: RunKind: Keep only runs of this kind
    :param limit: int: Page size
    :param offset: int: Number of runs skipped
    :param db: Session: Access the database
    :return: A list of runs
    """
    return await repository_runs.get_runs(db, kind, limit, offset)


@router.get("/{run_id}", response_model=RunResponse)
async def get_run(run_id: int = Path(ge=1), db: Session = Depends(get_db)):
    run = await repository_runs.get_run_by_id(run_id, db)
    if run is None:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=messages.RUN_NOT_FOUND)
    return run


@router.delete("/{run_id}", response_model=RunResponse)
async def remove_run(run_id: int = Path(ge=1), db: Session = Depends(get_db)):
    """
    The remove_run function deletes a run from the ledger.

    :param run_id: int: Id of the run
    :param db: Session: Access the database
    :return: The deleted run
    """
    run = await repository_runs.remove(run_id, db)
    if run is None:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=messages.RUN_NOT_FOUND)
    return run

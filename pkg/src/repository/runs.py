from typing import List, Optional

from sqlalchemy.orm import Session

from src.schemas import RunCreate
from src.database.models import Run, RunKind


async def get_runs(db: Session, kind: Optional[RunKind] = None, limit: int = 50, offset: int = 0) -> List[Run]:
    """
    The get_runs function returns recorded runs, newest first, optionally filtered by kind.

    :param db: Session: Pass the database session into the function
    :param kind: RunKind: Keep only runs of this kind
    :param limit: int: Maximal number of runs returned
    :param offset: int: Number of runs skipped
    :return: A list of run objects
    """
    query = db.query(Run)
    if kind is not None:
        query = query.filter_by(kind=kind)
    return query.order_by(Run.id.desc()).offset(offset).limit(limit).all()


async def get_run_by_id(run_id: int, db: Session) -> Optional[Run]:
    """
    The get_run_by_id function returns the run with the given id, or None.

    :param run_id: int: Filter the run by id
    :param db: Session: Pass the database session to the function
    :return: A run by its id
    """
    return db.query(Run).filter_by(id=run_id).first()


async def create(body: RunCreate, db: Session) -> Run:
    """
    The create function records a finished experiment.

    :param body: RunCreate: kind, seed, config echo, verdict, checksum and summary
    :param db: Session: Access the database and perform operations on it
    :return: The stored run
    """
    run = Run(**body.dict())
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


async def remove(run_id: int, db: Session) -> Optional[Run]:
    run = db.query(Run).filter_by(id=run_id).first()
    if run:
        db.delete(run)
        db.commit()
    return run

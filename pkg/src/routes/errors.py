from fastapi import HTTPException, status

from src.conf import messages
from src.services.reports import plain
from src.services.errors import (
    ConfigurationError,
    DimensionError,
    DivergenceError,
    LabError,
    ParameterError,
    RegimeMismatchError,
    SimulationError,
    TableValidationError,
)

STATUS_BY_ERROR = (
    (RegimeMismatchError, status.HTTP_409_CONFLICT),
    (TableValidationError, status.HTTP_409_CONFLICT),
    (ParameterError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (ConfigurationError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (DimensionError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (SimulationError, status.HTTP_500_INTERNAL_SERVER_ERROR),
    (DivergenceError, status.HTTP_500_INTERNAL_SERVER_ERROR),
)


def http_error(err: LabError) -> HTTPException:
    """
    The http_error function translates a lab error into the HTTPException the routes raise.
    Conflicts carry their verdict or failing rows next to the message.

    :param err: LabError: error raised by a service
    :return: HTTPException with the mapped status code
    """
    code = next((code for cls, code in STATUS_BY_ERROR if isinstance(err, cls)),
                status.HTTP_500_INTERNAL_SERVER_ERROR)
    detail = {"error": type(err).__name__, "message": str(err)}
    if isinstance(err, RegimeMismatchError) and err.verdict is not None:
        detail["verdict"] = err.verdict.as_dict()
    if isinstance(err, TableValidationError):
        detail["failures"] = err.failures
    if isinstance(err, SimulationError):
        detail["step"] = err.step
    if isinstance(err, DivergenceError):
        detail["ratios"] = plain(err.ratios)
    return HTTPException(status_code=code, detail=detail)


def check_work(work: int, limit: int):
    if work > limit:
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
                            detail=f"{messages.WORK_LIMIT_EXCEEDED} ({work} > {limit})")

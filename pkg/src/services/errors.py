"""Exceptions raised by the numerical services.

Routes translate them into ``HTTPException`` and the CLI into exit codes,
so services never import anything from FastAPI.
"""
from __future__ import annotations

from typing import Any, List, Optional


class LabError(Exception):
    """Base class of every error raised by the lab."""


class ParameterError(LabError):
    pass


class ConfigurationError(LabError):
    pass


class DimensionError(LabError):
    pass


class EstimateRangeError(ParameterError):
    pass


class SimulationError(LabError):
    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class DivergenceError(LabError):
    def __init__(self, message: str, ratios: Optional[List[float]] = None):
        super().__init__(message)
        self.ratios = list(ratios or [])


class RegimeMismatchError(LabError):
    def __init__(self, message: str, verdict: Any = None):
        super().__init__(message)
        self.verdict = verdict


class TableValidationError(LabError):
    def __init__(self, message: str, failures: Optional[List[Any]] = None):
        super().__init__(message)
        self.failures = list(failures or [])

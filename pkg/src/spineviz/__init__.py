"""Exploration workbench for time-dependent spine-simulation results."""

from .errors import (
    DivergenceError,
    FormatError,
    FrameError,
    GeometryError,
    ParameterError,
    QueryError,
    SpinevizError,
)

__version__ = "0.1.0"

__all__ = [
    "DivergenceError",
    "FormatError",
    "FrameError",
    "GeometryError",
    "ParameterError",
    "QueryError",
    "SpinevizError",
    "__version__",
]

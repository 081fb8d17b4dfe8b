"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SpinevizError(Exception):
    """Base class for all spineviz errors."""


class FormatError(SpinevizError):
    """A file or stream violates its documented format."""


class ParameterError(SpinevizError):
    """A configuration or model parameter is out of its valid range."""


class FrameError(SpinevizError):
    """A rotation is not proper orthonormal within tolerance."""


class GeometryError(SpinevizError):
    """A mesh or geometric input is unusable (e.g. empty)."""


class QueryError(SpinevizError):
    """A lookup referenced data that is not present or not comparable."""


class DivergenceError(SpinevizError):
    """The integrator produced a non-finite state.

    Carries the first offending body and the simulation time at which it
    was detected.
    """

    def __init__(self, body_id: str, time_s: float):
        self.body_id = body_id
        self.time_s = time_s
        super().__init__(
            f"simulation diverged at body {body_id!r}, t={time_s:.6f} s"
        )

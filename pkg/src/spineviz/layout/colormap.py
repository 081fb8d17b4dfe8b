"""Perceptually uniform value-to-color mapping.

The 256-entry reference table ships as package data; lookups interpolate
linearly between entries. The discretized variant (used by ensemble strips)
quantizes a value range into uniform bins first and then samples bin centers,
so neighboring cells snap to clearly distinct colors.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_TABLE_PATH = Path(__file__).parent / "data" / "viridis.csv"
_TABLE: np.ndarray | None = None


def _table() -> np.ndarray:
    global _TABLE
    if _TABLE is None:
        _TABLE = np.loadtxt(_TABLE_PATH, delimiter=",", skiprows=1)
    return _TABLE


def viridis(u: float) -> tuple[float, float, float]:
    """RGB in [0,1] for a unit-interval position; u is clamped."""
    table = _table()
    u = min(max(float(u), 0.0), 1.0)
    pos = u * (len(table) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(table) - 1)
    frac = pos - lo
    rgb = table[lo] * (1.0 - frac) + table[hi] * frac
    return (float(rgb[0]), float(rgb[1]), float(rgb[2]))


def discretize(value: float, value_range: tuple[float, float], bins: int) -> int:
    """Uniform bin index over the range; values outside clamp, hi maps to the
    last bin (so range [0,4] with 4 bins puts 2.0 at the start of bin 2)."""
    lo, hi = float(value_range[0]), float(value_range[1])
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if hi <= lo:
        raise ValueError("value range must be non-empty")
    u = (float(value) - lo) / (hi - lo)
    idx = int(np.floor(u * bins))
    return min(max(idx, 0), bins - 1)


def bin_color(bin_index: int, bins: int) -> tuple[float, float, float]:
    """Color of a bin's center; shared by every view that discretizes."""
    return viridis((bin_index + 0.5) / bins)


def sample_color(
    value: float, value_range: tuple[float, float], bins: int
) -> tuple[float, float, float]:
    """Continuous color for bins == 0, discretized otherwise."""
    lo, hi = float(value_range[0]), float(value_range[1])
    if bins == 0:
        if hi <= lo:
            return viridis(0.0)
        return viridis((float(value) - lo) / (hi - lo))
    return bin_color(discretize(value, value_range, bins), bins)

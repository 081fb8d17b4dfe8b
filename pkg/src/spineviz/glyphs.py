"""Force-direction glyphs for intervertebral discs.

Each glyph is an arrow of scene-uniform length aiming at the disc barycenter
along the (frame-corrected) interface force, capped by a disc-shaped plane
orthogonal to the arrow at its tip. Arrow length encodes nothing; direction is
the whole message. Geometry is built in the disc's local frame — callers apply
the pose transform for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .geometry import IsolineSet, as_rotation_matrix, barycenter, isolines, mean_radius, to_local_force

FORCE_EPSILON = 1e-9  # N; below this the force has no direction worth drawing
SPACING_THRESHOLD = 0.15  # arrows appear once the spine is pulled apart this far
GAP_FACTOR = 0.25  # tip-to-barycenter clearance as a fraction of arrow length
PLANE_RADIUS_FACTOR = 0.8
DEFAULT_ISOLINE_LEVELS = 5
DEFAULT_TRAJECTORY_WINDOW = 0.5  # s


@dataclass(frozen=True)
class GlyphConfig:
    spacing: float = 0.0
    arrow_length: float | None = None  # None: 1.5 x mean mesh radius
    isoline_levels: int = DEFAULT_ISOLINE_LEVELS
    epsilon: float = FORCE_EPSILON


@dataclass(frozen=True)
class TrajectoryStrip:
    """Ruled surface swept by the arrow over a trailing time window."""

    quads: tuple[tuple[tuple[float, float, float], ...], ...]  # 4 corners each
    opacities: tuple[tuple[float, float, float, float], ...]  # per corner
    swept_angle_deg: float


EMPTY_STRIP = TrajectoryStrip((), (), 0.0)


@dataclass(frozen=True)
class ForceGlyph:
    disc: str
    t: float
    visible: bool
    tail: tuple[float, float, float] | None
    tip: tuple[float, float, float] | None
    length: float
    plane_center: tuple[float, float, float] | None
    plane_normal: tuple[float, float, float] | None
    plane_u: tuple[float, float, float] | None
    plane_v: tuple[float, float, float] | None
    plane_radius: float
    isoline_set: IsolineSet
    trajectory: TrajectoryStrip = EMPTY_STRIP

    def has_geometry(self) -> bool:
        return self.tip is not None


def plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed in-plane basis (u, v) with u x v = normal.

    Seeds from the world axis least aligned with the normal (lowest index on
    ties) so the basis never degenerates and never depends on call order.
    """
    normal = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(normal) - 1.0) > 1e-6:
        raise GeometryError("plane normal must be a unit vector")
    seed_index = int(np.argmin(np.abs(normal)))
    seed = np.zeros(3)
    seed[seed_index] = 1.0
    u = np.cross(seed, normal)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def _hidden(disc: str, t: float, direction: np.ndarray | None, length: float) -> ForceGlyph:
    empty = IsolineSet(
        direction=direction if direction is not None else np.zeros(3),
        levels=np.zeros(0),
        polylines=(),
    )
    return ForceGlyph(
        disc=disc,
        t=t,
        visible=False,
        tail=None,
        tip=None,
        length=length,
        plane_center=None,
        plane_normal=None,
        plane_u=None,
        plane_v=None,
        plane_radius=PLANE_RADIUS_FACTOR * length,
        isoline_set=empty,
    )


def build_glyph(
    mesh,
    f_global: np.ndarray,
    rotation: np.ndarray,
    t: float,
    config: GlyphConfig = GlyphConfig(),
    disc: str = "",
) -> ForceGlyph:
    """Construct the glyph for one disc at one tick.

    The force is corrected into the disc frame first, so the same glyph comes
    out whether the caller passes (f_global, pose) or the pre-corrected local
    force with an identity rotation. Arrows only become visible once spacing
    exceeds the pull-apart threshold, but isolines are attached whenever the
    force is nonzero: they stay readable on the unexpanded spine.
    """
    local = to_local_force(np.asarray(f_global, dtype=float), rotation)
    magnitude = float(np.linalg.norm(local))
    length = (
        config.arrow_length
        if config.arrow_length is not None
        else 1.5 * mean_radius(mesh)
    )
    if magnitude < config.epsilon:
        return _hidden(disc, t, None, length)

    d = local / magnitude
    center = barycenter(mesh)
    gap = GAP_FACTOR * length
    tip = center - d * gap
    tail = tip - d * length
    u, v = plane_basis(d)
    iso = isolines(mesh, center, d, config.isoline_levels)
    visible = config.spacing > SPACING_THRESHOLD
    return ForceGlyph(
        disc=disc,
        t=t,
        visible=visible,
        tail=tuple(float(c) for c in tail),
        tip=tuple(float(c) for c in tip),
        length=length,
        plane_center=tuple(float(c) for c in tip),
        plane_normal=tuple(float(c) for c in d),
        plane_u=tuple(float(c) for c in u),
        plane_v=tuple(float(c) for c in v),
        plane_radius=PLANE_RADIUS_FACTOR * length,
        isoline_set=iso,
    )


def disc_axis(rotation_cranial: np.ndarray, rotation_caudal: np.ndarray) -> np.ndarray:
    """Disc axis: mean of the two adjacent endplate normals (local +y mapped
    through each vertebra's pose), normalized."""
    y = np.array([0.0, 1.0, 0.0])
    a = as_rotation_matrix(rotation_cranial) @ y + as_rotation_matrix(rotation_caudal) @ y
    n = np.linalg.norm(a)
    if n < 1e-12:
        raise GeometryError("adjacent endplate normals cancel; disc axis undefined")
    return a / n


def shear_angle(f_hat: np.ndarray, axis: np.ndarray, epsilon: float = FORCE_EPSILON) -> float | None:
    """Angle in degrees between the impacting force and the disc axis.

    0 = purely axial impact (force antiparallel to the axis), 90 = pure shear.
    Returns None when the force is too small to have a direction.
    """
    f_hat = np.asarray(f_hat, dtype=float)
    magnitude = np.linalg.norm(f_hat)
    if magnitude < epsilon:
        return None
    axis = np.asarray(axis, dtype=float)
    cosine = float(np.dot(f_hat / magnitude, -axis / np.linalg.norm(axis)))
    return math.degrees(math.acos(min(max(cosine, -1.0), 1.0)))


def trajectory_surface(
    directions: np.ndarray,
    tips: np.ndarray,
    times: np.ndarray,
    t: float,
    window: float = DEFAULT_TRAJECTORY_WINDOW,
    arrow_length: float = 1.0,
) -> TrajectoryStrip:
    """Ruled strip traced by the arrow segment over [t - window, t].

    Opacity fades linearly from 1 at t to 0 at the trailing edge, so older
    motion dissolves. The swept angle (sum of consecutive angular deviations,
    degrees) summarizes how restless the force direction was: a steady
    direction sweeps ~0 and leaves almost no surface.
    """
    directions = np.asarray(directions, dtype=float)
    tips = np.asarray(tips, dtype=float)
    times = np.asarray(times, dtype=float)
    if not (len(directions) == len(tips) == len(times)):
        raise GeometryError("trajectory inputs must have matching lengths")
    if window <= 0:
        raise GeometryError("trajectory window must be positive")
    keep = (times >= t - window - 1e-12) & (times <= t + 1e-12)
    directions, tips, times = directions[keep], tips[keep], times[keep]
    if len(times) < 2:
        return EMPTY_STRIP

    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    unit = directions / norms
    cosines = np.clip(np.einsum("ij,ij->i", unit[:-1], unit[1:]), -1.0, 1.0)
    swept = float(np.degrees(np.arccos(cosines)).sum())

    tails = tips - unit * arrow_length
    opacity = np.clip(1.0 - (t - times) / window, 0.0, 1.0)
    quads = []
    opacities = []
    for i in range(len(times) - 1):
        quads.append(
            (
                tuple(map(float, tails[i])),
                tuple(map(float, tips[i])),
                tuple(map(float, tips[i + 1])),
                tuple(map(float, tails[i + 1])),
            )
        )
        opacities.append(
            (float(opacity[i]), float(opacity[i]), float(opacity[i + 1]), float(opacity[i + 1]))
        )
    return TrajectoryStrip(tuple(quads), tuple(opacities), swept)

"""Mesh and frame mathematics.

Rotations are stored as unit quaternions (w, x, y, z) and converted to 3x3
matrices where needed. All lengths are in mm, forces in N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FrameError, GeometryError

ORTHO_TOL = 1e-6
WELD_TOL = 1e-9
FLAT_TOL = 1e-6


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise FrameError("zero quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = quat_normalize(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_axis_angle(axis: np.ndarray, angle_rad: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise FrameError("zero rotation axis")
    half = 0.5 * angle_rad
    return np.concatenate([[np.cos(half)], np.sin(half) * axis / n])


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) of a unit quaternion, shortest arc."""
    w, v = q[0], np.asarray(q[1:4], dtype=float)
    if w < 0.0:
        w, v = -w, -v
    s = np.linalg.norm(v)
    if s < 1e-12:
        return 2.0 * v
    angle = 2.0 * np.arctan2(s, w)
    return (angle / s) * v


def quat_slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc."""
    a = quat_normalize(a)
    b = quat_normalize(b)
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b, dot = -b, -dot
    if dot > 1.0 - 1e-12:
        return quat_normalize(a + t * (b - a))
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - t) * theta) / s) * a + (np.sin(t * theta) / s) * b


# ---------------------------------------------------------------------------
# Frame correction
# ---------------------------------------------------------------------------

def as_rotation_matrix(rotation: np.ndarray) -> np.ndarray:
    """Coerce a unit quaternion or a 3x3 matrix to a proper orthonormal matrix.

    Raises FrameError if the matrix deviates from orthonormality by more
    than 1e-6 or is a reflection.
    """
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape == (4,):
        phi = quat_to_matrix(rotation)
    elif rotation.shape == (3, 3):
        phi = rotation
    else:
        raise FrameError(f"rotation must be a quaternion or 3x3 matrix, got shape {rotation.shape}")
    dev = np.abs(phi.T @ phi - np.eye(3)).max()
    if dev > ORTHO_TOL:
        raise FrameError(f"rotation not orthonormal (deviation {dev:.3e})")
    if np.linalg.det(phi) < 0.0:
        raise FrameError("rotation is a reflection (det < 0)")
    return phi


def to_local_force(f_global: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """Express a global-frame force in the structure's local frame.

    The structure's pose rotation maps local to global, so the local force
    is the transpose applied to the global vector.
    """
    phi = as_rotation_matrix(rotation)
    return phi.T @ np.asarray(f_global, dtype=float)


@dataclass(frozen=True)
class LocalForce:
    """A force vector paired with its frame-corrected local expression."""

    f_global: np.ndarray
    rotation: np.ndarray
    f_local: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "f_local", to_local_force(self.f_global, self.rotation))


# ---------------------------------------------------------------------------
# Barycenter
# ---------------------------------------------------------------------------

def barycenter(mesh) -> np.ndarray:
    """Arithmetic mean of the unique vertex positions of a mesh."""
    vertices = np.asarray(mesh.vertices, dtype=float)
    if vertices.size == 0:
        raise GeometryError("cannot take the barycenter of an empty mesh")
    unique = np.unique(vertices, axis=0)
    return unique.mean(axis=0)


def mean_radius(mesh) -> float:
    """Mean distance of unique vertices from the mesh barycenter."""
    vertices = np.unique(np.asarray(mesh.vertices, dtype=float), axis=0)
    center = vertices.mean(axis=0)
    return float(np.linalg.norm(vertices - center, axis=1).mean())


# ---------------------------------------------------------------------------
# Silhouette
# ---------------------------------------------------------------------------

def silhouette(mesh, view_dir: np.ndarray) -> np.ndarray:
    """Silhouette edges of a mesh for a view direction.

    An interior edge is a silhouette edge when its two faces face opposite
    ways relative to the view; a boundary edge when its single face is
    front-facing. A face with n.v == 0 counts as back-facing. Returns an
    (n, 2) array of vertex index pairs.
    """
    view = np.asarray(view_dir, dtype=float)
    if np.linalg.norm(view) == 0.0:
        raise GeometryError("view direction must be nonzero")
    vertices = np.asarray(mesh.vertices, dtype=float)
    triangles = np.asarray(mesh.triangles, dtype=int)
    if len(triangles) == 0:
        return np.zeros((0, 2), dtype=int)

    normals = np.cross(
        vertices[triangles[:, 1]] - vertices[triangles[:, 0]],
        vertices[triangles[:, 2]] - vertices[triangles[:, 0]],
    )
    front = normals @ view > 0.0

    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fi, (a, b, c) in enumerate(triangles):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            edge_faces.setdefault(key, []).append(fi)

    edges = []
    for key, faces in sorted(edge_faces.items()):
        sides = [front[f] for f in faces]
        if len(sides) == 1:
            if sides[0]:
                edges.append(key)
        elif any(sides) and not all(sides):
            edges.append(key)
    return np.array(edges, dtype=int).reshape(-1, 2)


# ---------------------------------------------------------------------------
# Isolines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Isoline:
    points: np.ndarray  # (k, 3)
    closed: bool


@dataclass(frozen=True)
class IsolineSet:
    """Level sets of position projected onto a direction, on a mesh surface."""

    direction: np.ndarray
    levels: np.ndarray
    polylines: tuple[tuple[Isoline, ...], ...]  # one tuple of chains per level

    def all_points(self) -> np.ndarray:
        chunks = [line.points for chains in self.polylines for line in chains]
        if not chunks:
            return np.zeros((0, 3))
        return np.concatenate(chunks, axis=0)


def _plane_segments(vertices, triangles, s_rel):
    """Per-triangle intersection segments with the plane s_rel == 0.

    Returns point ids keyed per crossing edge so shared edges weld exactly.
    """
    side = s_rel >= 0.0
    points: list[np.ndarray] = []
    edge_point: dict[tuple[int, int], int] = {}
    segments: list[tuple[int, int]] = []

    def point_on(u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        pid = edge_point.get(key)
        if pid is None:
            su, sv = s_rel[key[0]], s_rel[key[1]]
            t = su / (su - sv)
            pid = len(points)
            points.append(vertices[key[0]] + t * (vertices[key[1]] - vertices[key[0]]))
            edge_point[key] = pid
        return pid

    for a, b, c in triangles:
        crossing = [
            (u, v)
            for u, v in ((a, b), (b, c), (c, a))
            if side[u] != side[v]
        ]
        if len(crossing) != 2:
            continue
        p0 = point_on(*crossing[0])
        p1 = point_on(*crossing[1])
        if p0 != p1:
            segments.append((p0, p1))
    return points, segments


def _chain(points: list[np.ndarray], segments: list[tuple[int, int]]) -> list[Isoline]:
    edges = {(min(s), max(s)) for s in segments if s[0] != s[1]}
    adjacency: dict[int, set[int]] = {}
    for a, b in edges:
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)

    def degree(v: int) -> int:
        return sum(1 for n in adjacency.get(v, ()) if (min(v, n), max(v, n)) in edges)

    def walk(start: int) -> list[int]:
        path = [start]
        while True:
            nxt = None
            for cand in sorted(adjacency.get(path[-1], ())):
                if (min(path[-1], cand), max(path[-1], cand)) in edges:
                    nxt = cand
                    break
            if nxt is None:
                return path
            edges.discard((min(path[-1], nxt), max(path[-1], nxt)))
            path.append(nxt)

    chains: list[Isoline] = []
    # open chains first, starting at odd-degree endpoints; leftovers are cycles
    while True:
        odd = [v for v in sorted(adjacency) if degree(v) % 2 == 1]
        if not odd:
            break
        path = walk(odd[0])
        if len(path) >= 2:
            chains.append(Isoline(np.array([points[i] for i in path]), closed=False))
    while edges:
        start = min(edges)[0]
        path = walk(start)
        closed = path[0] == path[-1]
        if closed:
            path = path[:-1]
        if len(path) >= 2:
            chains.append(Isoline(np.array([points[i] for i in path]), closed=closed))
    return chains


def isolines(mesh, origin: np.ndarray, direction: np.ndarray, n_levels: int) -> IsolineSet:
    """Intersection chains of a mesh with planes normal to a direction.

    Levels are equally spaced strictly inside the span of the projected
    vertices; a mesh flat along the direction yields an empty set.
    """
    if n_levels < 1:
        raise GeometryError("n_levels must be >= 1")
    direction = np.asarray(direction, dtype=float)
    n = np.linalg.norm(direction)
    if abs(n - 1.0) > 1e-6:
        raise GeometryError("direction must be a unit vector")
    origin = np.asarray(origin, dtype=float)
    vertices = np.asarray(mesh.vertices, dtype=float)
    triangles = np.asarray(mesh.triangles, dtype=int)

    s = (vertices - origin) @ direction
    smin, smax = float(s.min()), float(s.max())
    if smax - smin < FLAT_TOL:
        return IsolineSet(direction=direction, levels=np.zeros(0), polylines=())

    levels = smin + (np.arange(1, n_levels + 1) / (n_levels + 1)) * (smax - smin)
    per_level = []
    for level in levels:
        points, segments = _plane_segments(vertices, triangles, s - level)
        per_level.append(tuple(_chain(points, segments)))
    return IsolineSet(direction=direction, levels=levels, polylines=tuple(per_level))

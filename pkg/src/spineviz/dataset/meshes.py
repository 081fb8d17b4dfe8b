"""Triangle meshes and a small OBJ reader/writer.

Only `v` and `f` records are honored; anything else (`vn`, `vt`, comments,
groups) is skipped. Face indices are 1-based. Faces with more than three
vertices are fanned into triangles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FormatError

# cross-product norm below this (mm^2) counts as a degenerate triangle
DEGENERATE_AREA2 = 1e-12

MIN_VERTICES = 4


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (V, 3) mm
    triangles: np.ndarray  # (F, 3) int, 0-based
    owner: str = ""

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        tris = np.asarray(self.triangles, dtype=int).reshape(-1, 3)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise FormatError(f"triangle index out of range for {len(verts)} vertices")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def face_normals(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        n = np.cross(b - a, c - a)
        lengths = np.linalg.norm(n, axis=1)
        lengths[lengths == 0.0] = 1.0
        return n / lengths[:, None]


def _drop_degenerate(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    if not len(triangles):
        return triangles
    a, b, c = (vertices[triangles[:, i]] for i in range(3))
    area2 = np.linalg.norm(np.cross(b - a, c - a), axis=1)
    distinct = (
        (triangles[:, 0] != triangles[:, 1])
        & (triangles[:, 1] != triangles[:, 2])
        & (triangles[:, 0] != triangles[:, 2])
    )
    return triangles[(area2 > DEGENERATE_AREA2) & distinct]


def parse_obj_subset(text: str, owner: str = "") -> Mesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise FormatError(f"line {line_no}: vertex needs 3 coordinates")
            try:
                vertices.append([float(x) for x in parts[1:4]])
            except ValueError as exc:
                raise FormatError(f"line {line_no}: bad vertex coordinate") from exc
        elif tag == "f":
            idx = []
            for token in parts[1:]:
                head = token.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise FormatError(f"line {line_no}: bad face index {token!r}") from exc
                if i < 1:
                    raise FormatError(f"line {line_no}: face index {i} out of range")
                idx.append(i - 1)
            if len(idx) < 3:
                raise FormatError(f"line {line_no}: face needs at least 3 indices")
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
        # every other record type is silently skipped

    if len(vertices) < MIN_VERTICES:
        raise FormatError(f"mesh has {len(vertices)} vertices, need >= {MIN_VERTICES}")
    verts = np.array(vertices, dtype=float)
    tris = np.array(faces, dtype=int).reshape(-1, 3)
    if tris.size and tris.max() >= len(verts):
        bad = int(tris.max()) + 1
        raise FormatError(f"face index {bad} out of range for {len(verts)} vertices")
    tris = _drop_degenerate(verts, tris)
    if not len(tris):
        raise FormatError("mesh has no non-degenerate triangles")
    return Mesh(verts, tris, owner)


def serialize_obj(mesh: Mesh) -> str:
    lines = [f"v {v[0]!r} {v[1]!r} {v[2]!r}" for v in mesh.vertices.tolist()]
    lines += [f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}" for t in mesh.triangles.tolist()]
    return "\n".join(lines) + "\n"

"""Rigid-body pose tracks for vertebrae.

Each vertebra contributes seven CSV columns: a scalar-first unit quaternion
(qw,qx,qy,qz) and a translation (tx,ty,tz) in millimetres. Quaternions a hair
off unit length are renormalised at parse time; badly off ones are rejected.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError

POSE_SUFFIXES = (":qw", ":qx", ":qy", ":qz", ":tx", ":ty", ":tz")

# |q| may drift this far from 1 before we call the file corrupt.
QUAT_NORM_TOL = 1e-3


@dataclass(frozen=True)
class KinematicsTrack:
    """Per-tick poses: quaternions (T,B,4) scalar-first, translations (T,B,3)."""

    times: np.ndarray
    bodies: tuple[str, ...]
    quaternions: np.ndarray
    translations: np.ndarray
    _body_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        quats = np.asarray(self.quaternions, dtype=float)
        trans = np.asarray(self.translations, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "quaternions", quats)
        object.__setattr__(self, "translations", trans)
        shape = (len(times), len(self.bodies))
        if quats.shape != shape + (4,) or trans.shape != shape + (3,):
            raise FormatError("pose arrays do not match times x bodies layout")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise FormatError("times are not strictly increasing")
        object.__setattr__(self, "_body_index", {b: i for i, b in enumerate(self.bodies)})

    @property
    def n_ticks(self) -> int:
        return len(self.times)

    def has_body(self, body_id: str) -> bool:
        return body_id in self._body_index

    def pose(self, row: int, body_id: str) -> tuple[np.ndarray, np.ndarray]:
        i = self._body_index[body_id]
        return self.quaternions[row, i], self.translations[row, i]

    def body_quaternions(self, body_id: str) -> np.ndarray:
        return self.quaternions[:, self._body_index[body_id]]

    def body_translations(self, body_id: str) -> np.ndarray:
        return self.translations[:, self._body_index[body_id]]


def parse_kinematics_csv(text: str) -> KinematicsTrack:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError("empty kinematics file")
    header = [c.strip() for c in rows[0]]
    if not header or header[0] != "time":
        raise FormatError("kinematics header must start with a 'time' column")
    pose_cols = header[1:]
    if len(pose_cols) % 7 != 0:
        raise FormatError("kinematics header is not grouped in 7-column poses")
    bodies = []
    for i in range(0, len(pose_cols), 7):
        group = pose_cols[i : i + 7]
        bases = [c[: -len(s)] if c.endswith(s) else None for c, s in zip(group, POSE_SUFFIXES)]
        if None in bases or len(set(bases)) != 1:
            raise FormatError(f"bad pose column group {group}")
        bodies.append(bases[0])

    times = []
    quats = []
    trans = []
    width = len(header)
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise FormatError(f"line {line_no}: ragged row ({len(row)} cells, expected {width})")
        try:
            numbers = [float(c) for c in row]
        except ValueError as exc:
            raise FormatError(f"line {line_no}: bad numeric cell") from exc
        if any(math.isnan(x) for x in numbers):
            raise FormatError(f"line {line_no}: kinematics rows may not have missing cells")
        t = numbers[0]
        if times and t <= times[-1]:
            raise FormatError(f"line {line_no}: non-monotonic time {t!r}")
        times.append(t)
        pose = np.array(numbers[1:], dtype=float).reshape(len(bodies), 7)
        q = pose[:, :4]
        norms = np.linalg.norm(q, axis=1)
        if np.any(np.abs(norms - 1.0) > QUAT_NORM_TOL):
            worst = bodies[int(np.argmax(np.abs(norms - 1.0)))]
            raise FormatError(f"line {line_no}: quaternion for {worst!r} is far from unit length")
        quats.append(q / norms[:, None])
        trans.append(pose[:, 4:])

    return KinematicsTrack(np.array(times), tuple(bodies), np.array(quats), np.array(trans))


def serialize_kinematics_csv(track: KinematicsTrack) -> str:
    out = io.StringIO()
    header = ["time"] + [b + s for b in track.bodies for s in POSE_SUFFIXES]
    out.write(",".join(header) + "\n")
    for row in range(track.n_ticks):
        cells = [repr(float(track.times[row]))]
        for i in range(len(track.bodies)):
            cells.extend(repr(float(x)) for x in track.quaternions[row, i])
            cells.extend(repr(float(x)) for x in track.translations[row, i])
        out.write(",".join(cells) + "\n")
    return out.getvalue()

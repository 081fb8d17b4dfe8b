"""Toy multibody spine description and scenario definitions.

Bodies are rigid vertebrae in a cranial-to-caudal chain. Adjacent bodies are
tied by a joint carrying two spring/damper attachment points (so bending
moments transfer) plus a torsional spring on the relative orientation. Facet
contacts are unilateral vertical springs at a lateral offset that only push
once their rest clearance is used up.

Units throughout: N, mm, s, kg (inertia kg*mm^2, torque N*mm).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..dataset.structures import VERTEBRA_ORDER, disc_id, expand_span
from ..errors import FormatError, ParameterError

# sides for facet contacts; LEFT sits at -x, RIGHT at +x
SIDE_LEFT = "L"
SIDE_RIGHT = "R"

DEFAULT_INTERNAL_DT = 1e-3
DEFAULT_TICK = 0.01

# degeneration degree d in 1..5 scales disc stiffness by 1/(1 + 0.35*(d-1))
DEGENERATION_SLOPE = 0.35


def degeneration_factor(degree: int) -> float:
    if not isinstance(degree, (int, np.integer)) or isinstance(degree, bool):
        raise ParameterError(f"degeneration degree must be an integer, got {degree!r}")
    if not 1 <= degree <= 5:
        raise ParameterError(f"degeneration degree {degree} outside 1..5")
    return 1.0 / (1.0 + DEGENERATION_SLOPE * (degree - 1))


@dataclass(frozen=True)
class Body:
    id: str
    mass: float  # kg
    inertia: float  # kg*mm^2, scalar
    position: np.ndarray  # rest COM, mm
    orientation: np.ndarray  # rest unit quaternion, scalar-first
    fixed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        q = np.asarray(self.orientation, dtype=float)
        n = np.linalg.norm(q)
        if n == 0:
            raise ParameterError(f"body {self.id!r} has a zero orientation quaternion")
        object.__setattr__(self, "orientation", q / n)
        if self.mass <= 0:
            raise ParameterError(f"body {self.id!r} mass must be > 0")
        if self.inertia <= 0:
            raise ParameterError(f"body {self.id!r} inertia must be > 0")


@dataclass(frozen=True)
class Joint:
    cranial: str
    caudal: str
    disc: bool  # False for the ligament-only C1-C2 level
    stiffness: np.ndarray  # per world axis, N/mm (total over both attachments)
    damping: np.ndarray  # per world axis, N*s/mm
    rotational_stiffness: float  # N*mm/rad
    rotational_damping: float  # N*mm*s/rad
    attachment_offset: float  # mm, attachments at +-offset in x

    def __post_init__(self):
        object.__setattr__(self, "stiffness", np.asarray(self.stiffness, dtype=float))
        object.__setattr__(self, "damping", np.asarray(self.damping, dtype=float))
        if np.any(self.stiffness < 0) or np.any(self.damping < 0):
            raise ParameterError(f"joint {self.id}: stiffness/damping must be >= 0")
        if self.rotational_stiffness < 0 or self.rotational_damping < 0:
            raise ParameterError(f"joint {self.id}: rotational terms must be >= 0")

    @property
    def id(self) -> str:
        return disc_id(self.cranial, self.caudal)


@dataclass(frozen=True)
class FacetContact:
    cranial: str
    caudal: str
    side: str  # SIDE_LEFT or SIDE_RIGHT
    lateral_offset: float  # mm
    stiffness: float  # N/mm
    clearance: float  # mm of play before the contact pushes

    def __post_init__(self):
        if self.side not in (SIDE_LEFT, SIDE_RIGHT):
            raise ParameterError(f"facet side must be L or R, got {self.side!r}")
        if self.stiffness < 0 or self.clearance < 0:
            raise ParameterError(f"facet {self.id}: stiffness/clearance must be >= 0")

    @property
    def id(self) -> str:
        return f"{disc_id(self.cranial, self.caudal)}_facet{self.side}"

    @property
    def offset_x(self) -> float:
        return -self.lateral_offset if self.side == SIDE_LEFT else self.lateral_offset


@dataclass(frozen=True)
class SpineModel:
    span: str
    bodies: tuple[Body, ...]
    joints: tuple[Joint, ...]
    facets: tuple[FacetContact, ...]

    def __post_init__(self):
        ids = [b.id for b in self.bodies]
        if len(set(ids)) != len(ids):
            raise ParameterError("duplicate body ids")
        order = {v: i for i, v in enumerate(VERTEBRA_ORDER)}
        ranks = [order.get(i) for i in ids]
        if None in ranks or any(a >= b for a, b in zip(ranks, ranks[1:])):
            raise ParameterError("bodies must be listed cranial to caudal")
        index = {b.id: i for i, b in enumerate(self.bodies)}
        for j in list(self.joints) + list(self.facets):
            if j.cranial not in index or j.caudal not in index:
                raise ParameterError(f"{j.id} references an unknown body")
            if index[j.caudal] != index[j.cranial] + 1:
                raise ParameterError(f"{j.id} must tie adjacent bodies")

    def body_index(self) -> dict[str, int]:
        return {b.id: i for i, b in enumerate(self.bodies)}

    def disc_joints(self) -> tuple[Joint, ...]:
        return tuple(j for j in self.joints if j.disc)

    def joint_midpoint(self, joint: Joint) -> np.ndarray:
        idx = self.body_index()
        a = self.bodies[idx[joint.cranial]].position
        b = self.bodies[idx[joint.caudal]].position
        return (a + b) / 2.0


@dataclass(frozen=True)
class Scenario:
    duration: float  # s
    tick: float = DEFAULT_TICK  # s between output rows
    internal_dt: float = DEFAULT_INTERNAL_DT  # s integrator step
    gravity: np.ndarray = (0.0, 0.0, 0.0)  # mm/s^2
    external_force: np.ndarray = ()  # rows of (t, fx, fy, fz); piecewise linear
    degeneration: dict = field(default_factory=dict)  # disc id -> degree 1..5

    def __post_init__(self):
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))
        profile = np.asarray(self.external_force, dtype=float).reshape(-1, 4)
        object.__setattr__(self, "external_force", profile)
        if self.duration <= 0 or self.tick <= 0 or self.internal_dt <= 0:
            raise ParameterError("duration, tick and internal_dt must be > 0")
        if self.tick + 1e-12 < self.internal_dt:
            raise ParameterError("tick must be at least one internal step")
        if self.gravity.shape != (3,):
            raise ParameterError("gravity must be a 3-vector")
        if len(profile) > 1 and not np.all(np.diff(profile[:, 0]) > 0):
            raise ParameterError("external force profile times must increase")
        for degree in self.degeneration.values():
            degeneration_factor(degree)

    def force_at(self, t: float) -> np.ndarray:
        profile = self.external_force
        if not len(profile):
            return np.zeros(3)
        return np.array(
            [np.interp(t, profile[:, 0], profile[:, 1 + k]) for k in range(3)]
        )


def apply_degeneration(model: SpineModel, degrees) -> SpineModel:
    """Soften disc joints: stiffness scaled by 1/(1 + 0.35*(d-1)) per disc."""
    disc_ids = {j.id for j in model.disc_joints()}
    if isinstance(degrees, (int, np.integer)) and not isinstance(degrees, bool):
        degrees = {d: int(degrees) for d in disc_ids}
    unknown = set(degrees) - disc_ids
    if unknown:
        raise ParameterError(f"degeneration names unknown discs: {sorted(unknown)}")
    factors = {d: degeneration_factor(deg) for d, deg in degrees.items()}
    joints = tuple(
        replace(
            j,
            stiffness=j.stiffness * factors[j.id],
            rotational_stiffness=j.rotational_stiffness * factors[j.id],
        )
        if j.id in factors
        else j
        for j in model.joints
    )
    return replace(model, joints=joints)


# --- JSON schemas ---------------------------------------------------------


def _require(doc: dict, keys: set[str], what: str) -> None:
    missing = keys - set(doc)
    if missing:
        raise FormatError(f"{what} is missing keys: {sorted(missing)}")


def model_from_json(text: str) -> SpineModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from exc
    _require(doc, {"span", "bodies", "joints", "facets"}, "model")
    bodies = []
    for b in doc["bodies"]:
        _require(b, {"id", "mass", "inertia", "position"}, f"body {b.get('id')!r}")
        bodies.append(
            Body(
                id=b["id"],
                mass=float(b["mass"]),
                inertia=float(b["inertia"]),
                position=b["position"],
                orientation=b.get("orientation", (1.0, 0.0, 0.0, 0.0)),
                fixed=bool(b.get("fixed", False)),
            )
        )
    joints = []
    for j in doc["joints"]:
        _require(
            j,
            {"cranial", "caudal", "disc", "stiffness", "damping",
             "rotational_stiffness", "rotational_damping", "attachment_offset"},
            "joint",
        )
        joints.append(
            Joint(
                cranial=j["cranial"],
                caudal=j["caudal"],
                disc=bool(j["disc"]),
                stiffness=j["stiffness"],
                damping=j["damping"],
                rotational_stiffness=float(j["rotational_stiffness"]),
                rotational_damping=float(j["rotational_damping"]),
                attachment_offset=float(j["attachment_offset"]),
            )
        )
    facets = []
    for f in doc["facets"]:
        _require(
            f,
            {"cranial", "caudal", "side", "lateral_offset", "stiffness", "clearance"},
            "facet",
        )
        facets.append(
            FacetContact(
                cranial=f["cranial"],
                caudal=f["caudal"],
                side=f["side"],
                lateral_offset=float(f["lateral_offset"]),
                stiffness=float(f["stiffness"]),
                clearance=float(f["clearance"]),
            )
        )
    return SpineModel(doc["span"], tuple(bodies), tuple(joints), tuple(facets))


def model_to_json(model: SpineModel) -> str:
    doc = {
        "span": model.span,
        "bodies": [
            {
                "id": b.id,
                "mass": b.mass,
                "inertia": b.inertia,
                "position": b.position.tolist(),
                "orientation": b.orientation.tolist(),
                "fixed": b.fixed,
            }
            for b in model.bodies
        ],
        "joints": [
            {
                "cranial": j.cranial,
                "caudal": j.caudal,
                "disc": j.disc,
                "stiffness": j.stiffness.tolist(),
                "damping": j.damping.tolist(),
                "rotational_stiffness": j.rotational_stiffness,
                "rotational_damping": j.rotational_damping,
                "attachment_offset": j.attachment_offset,
            }
            for j in model.joints
        ],
        "facets": [
            {
                "cranial": f.cranial,
                "caudal": f.caudal,
                "side": f.side,
                "lateral_offset": f.lateral_offset,
                "stiffness": f.stiffness,
                "clearance": f.clearance,
            }
            for f in model.facets
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def scenario_from_json(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"scenario file is not valid JSON: {exc}") from exc
    _require(doc, {"duration"}, "scenario")
    degeneration = doc.get("degeneration", {})
    if not isinstance(degeneration, dict):
        raise FormatError("scenario 'degeneration' must map disc ids to degrees")
    try:
        return Scenario(
            duration=float(doc["duration"]),
            tick=float(doc.get("tick", DEFAULT_TICK)),
            internal_dt=float(doc.get("internal_dt", DEFAULT_INTERNAL_DT)),
            gravity=doc.get("gravity", (0.0, 0.0, 0.0)),
            external_force=doc.get("external_force", ()),
            degeneration={str(k): int(v) for k, v in degeneration.items()},
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad scenario value: {exc}") from exc


def scenario_to_json(scenario: Scenario) -> str:
    doc = {
        "duration": scenario.duration,
        "tick": scenario.tick,
        "internal_dt": scenario.internal_dt,
        "gravity": scenario.gravity.tolist(),
        "external_force": scenario.external_force.tolist(),
        "degeneration": dict(scenario.degeneration),
    }
    return json.dumps(doc, indent=2) + "\n"


_DATA_DIR = Path(__file__).parent / "data"


def bundled_model_path(name: str = "cervical_default") -> Path:
    return _DATA_DIR / f"{name}.json"


def bundled_scenario_path(name: str) -> Path:
    return _DATA_DIR / f"scenario_{name}.json"


def load_model(source: str | Path) -> SpineModel:
    """Load a model from a file path or a bundled name like 'cervical_default'."""
    path = Path(source)
    if not path.is_file():
        candidate = bundled_model_path(str(source))
        if candidate.is_file():
            path = candidate
        else:
            raise FormatError(f"no model file or bundled model named {source!r}")
    return model_from_json(path.read_text())


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario from a file path or a bundled name like 'static_hold'."""
    path = Path(source)
    if not path.is_file():
        candidate = bundled_scenario_path(str(source))
        if candidate.is_file():
            path = candidate
        else:
            raise FormatError(f"no scenario file or bundled scenario named {source!r}")
    return scenario_from_json(path.read_text())

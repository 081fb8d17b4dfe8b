"""Dataset directory layout: a manifest plus the files it references.

A dataset is a directory with a `manifest.json` naming the matrix CSVs, the
kinematics CSV, and one OBJ per meshed structure. Paths are relative to the
manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import FormatError
from .kinematics import KinematicsTrack, parse_kinematics_csv, serialize_kinematics_csv
from .matrices import Attribute, ValueMatrix, parse_matrix_csv, serialize_matrix_csv
from .meshes import Mesh, parse_obj_subset, serialize_obj
from .structures import StructureRegistry, build_registry

MANIFEST_NAME = "manifest.json"
MANIFEST_KEYS = ("id", "span", "dt", "matrices", "kinematics", "meshes", "compare")


@dataclass(frozen=True)
class DatasetManifest:
    id: str
    span: str
    dt: float
    matrices: dict[str, str]  # attribute name -> relative path
    kinematics: str
    meshes: dict[str, str]  # structure id -> relative path
    compare: str | None = None

    def to_json(self) -> str:
        doc = {
            "id": self.id,
            "span": self.span,
            "dt": self.dt,
            "matrices": dict(self.matrices),
            "kinematics": self.kinematics,
            "meshes": dict(self.meshes),
            "compare": self.compare,
        }
        return json.dumps(doc, indent=2) + "\n"


def parse_manifest(text: str) -> DatasetManifest:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("manifest must be a JSON object")
    unknown = set(doc) - set(MANIFEST_KEYS)
    if unknown:
        raise FormatError(f"manifest has unknown keys: {sorted(unknown)}")
    missing = set(MANIFEST_KEYS) - {"compare"} - set(doc)
    if missing:
        raise FormatError(f"manifest is missing keys: {sorted(missing)}")
    if not isinstance(doc["matrices"], dict) or not isinstance(doc["meshes"], dict):
        raise FormatError("manifest 'matrices' and 'meshes' must be maps")
    for attr in doc["matrices"]:
        try:
            Attribute(attr)
        except ValueError as exc:
            raise FormatError(f"manifest names unknown attribute {attr!r}") from exc
    compare = doc.get("compare")
    if compare is not None and not isinstance(compare, str):
        raise FormatError("manifest 'compare' must be a dataset id or null")
    try:
        dt = float(doc["dt"])
    except (TypeError, ValueError) as exc:
        raise FormatError("manifest 'dt' must be a number") from exc
    if dt <= 0:
        raise FormatError("manifest 'dt' must be positive")
    return DatasetManifest(
        id=str(doc["id"]),
        span=str(doc["span"]),
        dt=dt,
        matrices={str(k): str(v) for k, v in doc["matrices"].items()},
        kinematics=str(doc["kinematics"]),
        meshes={str(k): str(v) for k, v in doc["meshes"].items()},
        compare=compare,
    )


@dataclass(frozen=True)
class SimulationDataset:
    """A fully loaded dataset: immutable after construction."""

    manifest: DatasetManifest
    registry: StructureRegistry
    matrices: dict[Attribute, ValueMatrix]
    kinematics: KinematicsTrack
    meshes: dict[str, Mesh] = field(default_factory=dict)

    @property
    def id(self) -> str:
        return self.manifest.id

    @property
    def times(self):
        return self.kinematics.times

    def matrix(self, attribute: Attribute) -> ValueMatrix | None:
        return self.matrices.get(attribute)


def _read(path: Path) -> str:
    if not path.is_file():
        raise FormatError(f"referenced file does not exist: {path}")
    return path.read_text()


def load_dataset(directory: str | Path) -> SimulationDataset:
    root = Path(directory)
    manifest = parse_manifest(_read(root / MANIFEST_NAME))

    matrices: dict[Attribute, ValueMatrix] = {}
    for attr_name, rel in manifest.matrices.items():
        attr = Attribute(attr_name)
        matrices[attr] = parse_matrix_csv(_read(root / rel), attr)

    kinematics = parse_kinematics_csv(_read(root / manifest.kinematics))

    meshes = {
        sid: parse_obj_subset(_read(root / rel), owner=sid)
        for sid, rel in manifest.meshes.items()
    }

    observed: set[str] = set(manifest.meshes)
    for matrix in matrices.values():
        observed.update(matrix.columns)
    observed.update(kinematics.bodies)
    registry = build_registry(manifest.span, observed)

    return SimulationDataset(manifest, registry, matrices, kinematics, meshes)


def write_dataset(dataset: SimulationDataset, directory: str | Path) -> Path:
    """Write a dataset directory that load_dataset reads back identically."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    (root / MANIFEST_NAME).write_text(dataset.manifest.to_json())
    for attr, rel in dataset.manifest.matrices.items():
        matrix = dataset.matrices[Attribute(attr)]
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(serialize_matrix_csv(matrix))
    (root / dataset.manifest.kinematics).parent.mkdir(parents=True, exist_ok=True)
    (root / dataset.manifest.kinematics).write_text(
        serialize_kinematics_csv(dataset.kinematics)
    )
    for sid, rel in dataset.manifest.meshes.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(serialize_obj(dataset.meshes[sid]))
    return root


def structure_census(manifest: DatasetManifest) -> dict[str, int]:
    """Structure counts knowable from the manifest alone (span + mesh keys)."""
    registry = build_registry(manifest.span, set(manifest.meshes))
    return registry.census()

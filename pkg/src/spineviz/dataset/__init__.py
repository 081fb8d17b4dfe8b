from .kinematics import KinematicsTrack, parse_kinematics_csv, serialize_kinematics_csv
from .manifest import (
    MANIFEST_NAME,
    DatasetManifest,
    SimulationDataset,
    load_dataset,
    parse_manifest,
    structure_census,
    write_dataset,
)
from .matrices import Attribute, ValueMatrix, parse_matrix_csv, serialize_matrix_csv
from .meshes import Mesh, parse_obj_subset, serialize_obj
from .structures import (
    StructureKind,
    StructureRef,
    StructureRegistry,
    build_registry,
    disc_id,
    expand_span,
    facet_ids,
)
from .validation import (
    ALL_MISSING_VALUES,
    MISSING_COLUMN,
    NEGATIVE_MAGNITUDE,
    TIMEBASE_MISMATCH,
    ValidationIssue,
    ValidationReport,
    validate_dataset,
)

__all__ = [
    "ALL_MISSING_VALUES",
    "Attribute",
    "DatasetManifest",
    "KinematicsTrack",
    "MANIFEST_NAME",
    "MISSING_COLUMN",
    "Mesh",
    "NEGATIVE_MAGNITUDE",
    "SimulationDataset",
    "StructureKind",
    "StructureRef",
    "StructureRegistry",
    "TIMEBASE_MISMATCH",
    "ValidationIssue",
    "ValidationReport",
    "ValueMatrix",
    "build_registry",
    "disc_id",
    "expand_span",
    "facet_ids",
    "load_dataset",
    "parse_kinematics_csv",
    "parse_manifest",
    "parse_matrix_csv",
    "parse_obj_subset",
    "serialize_kinematics_csv",
    "serialize_matrix_csv",
    "serialize_obj",
    "structure_census",
    "validate_dataset",
    "write_dataset",
]

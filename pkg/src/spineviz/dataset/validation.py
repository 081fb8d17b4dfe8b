"""Report-only dataset checks.

Nothing here raises on bad data: the point is to surface holes (a structure
whose column was never written, an all-empty column, mismatched time bases,
physically impossible negatives) so a reviewer can spot them quickly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .manifest import SimulationDataset
from .matrices import Attribute
from .structures import StructureKind

MISSING_COLUMN = "MISSING_COLUMN"
ALL_MISSING_VALUES = "ALL_MISSING_VALUES"
TIMEBASE_MISMATCH = "TIMEBASE_MISMATCH"
NEGATIVE_MAGNITUDE = "NEGATIVE_MAGNITUDE"

# time bases are written with full-precision floats; anything beyond noise is a mismatch
_TIME_ATOL = 1e-9

# which structure kinds each attribute is expected to cover; facet force is
# magnitude-only, disc deformation has no facet analogue
_EXPECTED_KINDS = {
    Attribute.FORCE_MAGNITUDE: (
        StructureKind.DISC,
        StructureKind.FACET_LEFT,
        StructureKind.FACET_RIGHT,
    ),
    Attribute.FORCE_VECTOR: (StructureKind.DISC,),
    Attribute.DEFORMATION: (StructureKind.DISC,),
}

_MAGNITUDE_ATTRS = (Attribute.FORCE_MAGNITUDE, Attribute.DEFORMATION)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    structure: str
    attribute: str
    detail: str

    def format(self) -> str:
        subject = self.structure or "-"
        return f"{self.code} {subject} [{self.attribute}]: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return bool(self.issues)

    @property
    def clean(self) -> bool:
        return not self.issues

    def codes(self) -> tuple[str, ...]:
        return tuple(i.code for i in self.issues)

    def for_structure(self, structure_id: str) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.structure == structure_id)

    def format(self) -> str:
        if not self.issues:
            return "dataset clean: no issues found\n"
        lines = [issue.format() for issue in self.issues]
        lines.append(f"{len(self.issues)} issue(s) found")
        return "\n".join(lines) + "\n"


def validate_dataset(dataset: SimulationDataset) -> ValidationReport:
    """Pure scan of a loaded dataset; identical inputs give identical reports."""
    issues: list[ValidationIssue] = []
    registry = dataset.registry

    base_times = dataset.kinematics.times
    for attr, matrix in sorted(dataset.matrices.items(), key=lambda kv: kv[0].value):
        expected = [
            ref.id
            for ref in registry.structures.values()
            if ref.kind in _EXPECTED_KINDS[attr]
        ]
        if len(matrix.times) != len(base_times) or (
            len(base_times)
            and float(np.max(np.abs(matrix.times - base_times))) > _TIME_ATOL
        ):
            issues.append(
                ValidationIssue(
                    TIMEBASE_MISMATCH,
                    "",
                    attr.value,
                    f"matrix has {len(matrix.times)} ticks, kinematics has {len(base_times)}",
                )
            )

        for sid in expected:
            if not matrix.has_column(sid):
                issues.append(
                    ValidationIssue(
                        MISSING_COLUMN, sid, attr.value, "no column in matrix"
                    )
                )
            elif matrix.all_missing(sid):
                issues.append(
                    ValidationIssue(
                        ALL_MISSING_VALUES, sid, attr.value, "every cell is missing"
                    )
                )

        if attr in _MAGNITUDE_ATTRS:
            for sid in matrix.columns:
                col = matrix.column_values(sid)
                negative = np.where(np.nan_to_num(col, nan=0.0) < 0.0)[0]
                if negative.size:
                    first = int(negative[0])
                    issues.append(
                        ValidationIssue(
                            NEGATIVE_MAGNITUDE,
                            sid,
                            attr.value,
                            f"{negative.size} negative cell(s), first at t={matrix.times[first]!r}",
                        )
                    )

    return ValidationReport(tuple(issues))

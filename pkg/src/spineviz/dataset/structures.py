"""Anatomical structure identities and the per-dataset registry.

Structure ids follow a fixed naming scheme: vertebrae carry their anatomical
name ("C1".."C7", "Th1".."Th12", "L1".."L5"), a disc between adjacent
vertebrae A (cranial) and B (caudal) is "AB" (e.g. "C2C3"), and the paired
facet joints are "AB_facetL" / "AB_facetR".
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from ..errors import FormatError

# canonical cranial-to-caudal ordering used to expand span strings
VERTEBRA_ORDER = (
    [f"C{i}" for i in range(1, 8)]
    + [f"Th{i}" for i in range(1, 13)]
    + [f"L{i}" for i in range(1, 6)]
)

FACET_LEFT_SUFFIX = "_facetL"
FACET_RIGHT_SUFFIX = "_facetR"


class StructureKind(str, Enum):
    VERTEBRA = "vertebra"
    DISC = "disc"
    FACET_LEFT = "facet_left"
    FACET_RIGHT = "facet_right"


@dataclass(frozen=True)
class StructureRef:
    """Identity of one anatomical structure.

    cranial/caudal name the adjacent vertebra pair for discs and facets and
    are empty for vertebrae.
    """

    id: str
    kind: StructureKind
    cranial: str = ""
    caudal: str = ""


def expand_span(span: str) -> list[str]:
    """Expand a span like "C1..Th3" (or a single name) to ordered vertebrae."""
    span = span.strip()
    if ".." in span:
        start, _, end = span.partition("..")
    else:
        start = end = span
    try:
        i0 = VERTEBRA_ORDER.index(start.strip())
        i1 = VERTEBRA_ORDER.index(end.strip())
    except ValueError as exc:
        raise FormatError(f"unknown vertebra name in span {span!r}") from exc
    if i1 < i0:
        raise FormatError(f"span {span!r} runs caudal to cranial")
    return VERTEBRA_ORDER[i0 : i1 + 1]


def disc_id(cranial: str, caudal: str) -> str:
    return f"{cranial}{caudal}"


def facet_ids(cranial: str, caudal: str) -> tuple[str, str]:
    base = disc_id(cranial, caudal)
    return base + FACET_LEFT_SUFFIX, base + FACET_RIGHT_SUFFIX


class StructureRegistry:
    """All structures of one dataset, with anatomical adjacency.

    Vertebrae and facet pairs follow directly from the span's adjacency;
    discs are data: only the adjacent pairs named in `disc_pairs` carry one
    (the C1-C2 level of a cervical model has none).
    """

    def __init__(self, vertebrae: Iterable[str], disc_pairs: Iterable[tuple[str, str]]):
        self.vertebrae = list(vertebrae)
        if len(set(self.vertebrae)) != len(self.vertebrae):
            raise FormatError("duplicate vertebra ids in registry")
        order = {v: i for i, v in enumerate(self.vertebrae)}
        pairs = set()
        for a, b in disc_pairs:
            if a not in order or b not in order or order[b] - order[a] != 1:
                raise FormatError(f"disc pair ({a}, {b}) is not anatomically adjacent")
            pairs.add((a, b))

        self.structures: dict[str, StructureRef] = {}
        for v in self.vertebrae:
            self._add(StructureRef(v, StructureKind.VERTEBRA))
        for a, b in self.adjacent_pairs():
            if (a, b) in pairs:
                self._add(StructureRef(disc_id(a, b), StructureKind.DISC, a, b))
            left, right = facet_ids(a, b)
            self._add(StructureRef(left, StructureKind.FACET_LEFT, a, b))
            self._add(StructureRef(right, StructureKind.FACET_RIGHT, a, b))

    def _add(self, ref: StructureRef) -> None:
        if ref.id in self.structures:
            raise FormatError(f"duplicate structure id {ref.id!r}")
        self.structures[ref.id] = ref

    def adjacent_pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.vertebrae, self.vertebrae[1:]))

    def discs(self) -> list[StructureRef]:
        return [s for s in self.structures.values() if s.kind == StructureKind.DISC]

    def facets(self) -> list[StructureRef]:
        return [
            s
            for s in self.structures.values()
            if s.kind in (StructureKind.FACET_LEFT, StructureKind.FACET_RIGHT)
        ]

    def of_kind(self, *kinds: StructureKind) -> list[StructureRef]:
        return [s for s in self.structures.values() if s.kind in kinds]

    def __contains__(self, structure_id: str) -> bool:
        return structure_id in self.structures

    def __getitem__(self, structure_id: str) -> StructureRef:
        return self.structures[structure_id]

    def census(self) -> dict[str, int]:
        return {
            "vertebrae": len(self.vertebrae),
            "discs": len(self.discs()),
            "facet_pairs": len(self.adjacent_pairs()),
        }


def classify_structure_id(structure_id: str, vertebrae: list[str]) -> StructureRef | None:
    """Resolve a raw id against the naming scheme, or None if it does not fit."""
    if structure_id in vertebrae:
        return StructureRef(structure_id, StructureKind.VERTEBRA)
    base = structure_id
    kind = StructureKind.DISC
    if structure_id.endswith(FACET_LEFT_SUFFIX):
        base = structure_id[: -len(FACET_LEFT_SUFFIX)]
        kind = StructureKind.FACET_LEFT
    elif structure_id.endswith(FACET_RIGHT_SUFFIX):
        base = structure_id[: -len(FACET_RIGHT_SUFFIX)]
        kind = StructureKind.FACET_RIGHT
    for a, b in zip(vertebrae, vertebrae[1:]):
        if base == disc_id(a, b):
            return StructureRef(structure_id, kind, a, b)
    return None


def build_registry(span: str, observed_ids: Iterable[str]) -> StructureRegistry:
    """Registry for a span, with discs taken from the ids observed in the data.

    Raises FormatError for any observed id that fits no structure of the span.
    """
    vertebrae = expand_span(span)
    disc_pairs = []
    for sid in observed_ids:
        ref = classify_structure_id(sid, vertebrae)
        if ref is None:
            raise FormatError(f"structure id {sid!r} does not match any structure of span {span!r}")
        if ref.kind == StructureKind.DISC:
            disc_pairs.append((ref.cranial, ref.caudal))
    return StructureRegistry(vertebrae, disc_pairs)

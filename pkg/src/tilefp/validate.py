"""Independent checker for floorplan documents.

Everything here works from exactly two artifacts, the floorplan document
and the fabric file, and recomputes every claim with plain cell-by-cell
loops instead of the query structures the pipeline uses. A clean result is
an empty violation list.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fabric import Fabric, Rect, ResourceKind, ResourceVector, parse_fabric

__all__ = [
    "FloorplanDocument",
    "PlacementRecord",
    "parse_floorplan",
    "validate_floorplan",
]


@dataclass(frozen=True)
class PlacementRecord:
    """One placed module as the document states it."""

    module_id: str
    rect: Rect
    req: ResourceVector
    wastage_frames: int


@dataclass(frozen=True)
class FloorplanDocument:
    """Parsed form of a floorplan document."""

    alpha: float
    beta: float
    ar_bounds: tuple[float, float] | None
    records: tuple[PlacementRecord, ...]
    total_wastage: int
    total_wirelength: int
    backtracks: int


def parse_floorplan(text: str) -> FloorplanDocument:
    """Parse a floorplan document; malformed input raises ValueError."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty floorplan document")

    # layouts: mode alpha A beta B ar off | mode alpha A beta B ar LO HI
    head = lines[0].split()
    if (
        len(head) < 7
        or head[0] != "mode"
        or head[1] != "alpha"
        or head[3] != "beta"
        or head[5] != "ar"
    ):
        raise ValueError(f"bad mode line: {lines[0]!r}")
    alpha, beta = float(head[2]), float(head[4])
    tail = head[6:]
    if tail == ["off"]:
        ar_bounds = None
    elif len(tail) == 2:
        ar_bounds = (float(tail[0]), float(tail[1]))
    else:
        raise ValueError(f"bad aspect-ratio field: {lines[0]!r}")

    records = []
    total = None
    for line in lines[1:]:
        fields = line.split()
        if fields[0] == "place":
            if len(fields) != 10:
                raise ValueError(f"bad place line: {line!r}")
            nums = [int(v) for v in fields[2:]]
            records.append(
                PlacementRecord(
                    fields[1],
                    Rect(*nums[0:4]),
                    ResourceVector(*nums[4:7]),
                    nums[7],
                )
            )
        elif fields[0] == "total":
            if total is not None:
                raise ValueError("two total lines")
            if (
                len(fields) != 7
                or fields[1] != "wastage"
                or fields[3] != "wirelength"
                or fields[5] != "backtracks"
            ):
                raise ValueError(f"bad total line: {line!r}")
            total = (int(fields[2]), int(fields[4]), int(fields[6]))
        else:
            raise ValueError(f"unknown record {fields[0]!r}")
    if total is None:
        raise ValueError("missing total line")
    return FloorplanDocument(alpha, beta, ar_bounds, tuple(records), *total)


def _reserved_cells(fabric: Fabric) -> set[tuple[int, int]]:
    cells = set()
    for rect in fabric.reserved_rects:
        for r in range(rect.row0, rect.row1 + 1):
            for c in range(rect.col0, rect.col1 + 1):
                cells.add((r, c))
    return cells


def validate_floorplan(document_text: str, fabric_text: str) -> list[str]:
    """All rule violations found in a floorplan document, worded for humans.

    Checks bounds, reserved-tile avoidance, pairwise overlap, resource
    coverage, the per-record and total wastage arithmetic, and the
    aspect-ratio window when the document declares one.
    """
    doc = parse_floorplan(document_text)
    fabric = parse_fabric(fabric_text)
    reserved = _reserved_cells(fabric)
    frames = fabric.frames
    problems: list[str] = []

    seen_ids: set[str] = set()
    wastage_sum = 0
    for rec in doc.records:
        rid = rec.module_id
        if rid in seen_ids:
            problems.append(f"{rid}: placed twice")
            continue
        seen_ids.add(rid)
        rect = rec.rect
        if not (
            0 <= rect.row0 <= rect.row1 < fabric.rows
            and 0 <= rect.col0 <= rect.col1 < fabric.cols
        ):
            problems.append(f"{rid}: rect {tuple(rect)} leaves the device")
            continue

        counts = {kind: 0 for kind in ResourceKind}
        overlap_reserved = 0
        for r in range(rect.row0, rect.row1 + 1):
            for c in range(rect.col0, rect.col1 + 1):
                if (r, c) in reserved:
                    overlap_reserved += 1
                else:
                    counts[fabric.kind_of(c)] += 1
        if overlap_reserved:
            problems.append(
                f"{rid}: covers {overlap_reserved} reserved tile(s)"
            )
        have = ResourceVector(
            counts[ResourceKind.CLB],
            counts[ResourceKind.BRAM],
            counts[ResourceKind.DSP],
        )
        if not have.covers(rec.req):
            problems.append(
                f"{rid}: rect holds {tuple(have)} which misses requirement "
                f"{tuple(rec.req)}"
            )
        else:
            waste = sum(
                (h - n) * frames[kind]
                for kind, h, n in zip(ResourceKind, have, rec.req)
            )
            if waste != rec.wastage_frames:
                problems.append(
                    f"{rid}: wastage says {rec.wastage_frames}, tiles give {waste}"
                )
            wastage_sum += waste
        if doc.ar_bounds is not None:
            lo, hi = doc.ar_bounds
            ar = rect.width / rect.height
            if not lo <= ar <= hi:
                problems.append(
                    f"{rid}: aspect ratio {ar:.3f} outside [{lo:g}, {hi:g}]"
                )

    recs = doc.records
    for i in range(len(recs)):
        for j in range(i + 1, len(recs)):
            if recs[i].rect.overlaps(recs[j].rect):
                problems.append(
                    f"{recs[i].module_id} and {recs[j].module_id}: "
                    f"rectangles overlap"
                )

    if not problems and wastage_sum != doc.total_wastage:
        problems.append(
            f"total wastage says {doc.total_wastage}, records sum to {wastage_sum}"
        )
    return problems

"""Tile-grid model of a partially reconfigurable FPGA device.

The device is a matrix of tiles. Rows are clock regions, counted bottom to
top; columns are resource columns, counted left to right. Every column
carries a single resource kind over the full device height, so layout
heterogeneity is purely column-wise. Rectangles are inclusive on both ends.
"""

from __future__ import annotations

import enum
from typing import Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "DEFAULT_FRAMES",
    "Fabric",
    "FabricError",
    "Rect",
    "ResourceKind",
    "ResourceVector",
    "parse_fabric",
]


class FabricError(ValueError):
    """Malformed fabric document or invalid fabric query."""


class ResourceKind(enum.Enum):
    """Resource kind a column can carry."""

    CLB = "C"
    BRAM = "B"
    DSP = "D"

    @classmethod
    def from_char(cls, ch: str) -> "ResourceKind":
        try:
            return cls(ch)
        except ValueError:
            raise FabricError(f"unknown resource kind {ch!r}") from None

    @property
    def index(self) -> int:
        return _KIND_INDEX[self]


_KIND_INDEX = {ResourceKind.CLB: 0, ResourceKind.BRAM: 1, ResourceKind.DSP: 2}

# Reconfiguration frames per tile, by kind.
DEFAULT_FRAMES: Mapping[ResourceKind, int] = {
    ResourceKind.CLB: 36,
    ResourceKind.BRAM: 30,
    ResourceKind.DSP: 28,
}


class ResourceVector(NamedTuple):
    """Tile counts by kind, combined and compared componentwise."""

    clb: int = 0
    bram: int = 0
    dsp: int = 0

    def covers(self, other: "ResourceVector") -> bool:
        return (
            self.clb >= other.clb
            and self.bram >= other.bram
            and self.dsp >= other.dsp
        )

    def of(self, kind: ResourceKind) -> int:
        return self[kind.index]

    @property
    def total(self) -> int:
        return self.clb + self.bram + self.dsp

    def __add__(self, other):  # type: ignore[override]
        return ResourceVector(
            self.clb + other.clb, self.bram + other.bram, self.dsp + other.dsp
        )

    # Subtraction is only defined when it stays non-negative; a surplus
    # computation that would go negative is always a caller bug.
    def __sub__(self, other):
        if not self.covers(other):
            raise ValueError(f"subtraction would go negative: {self} - {other}")
        return ResourceVector(
            self.clb - other.clb, self.bram - other.bram, self.dsp - other.dsp
        )


class Rect(NamedTuple):
    """Inclusive tile rectangle, rows bottom to top and columns left to right."""

    row0: int
    col0: int
    row1: int
    col1: int

    @property
    def width(self) -> int:
        return self.col1 - self.col0 + 1

    @property
    def height(self) -> int:
        return self.row1 - self.row0 + 1

    @property
    def tile_count(self) -> int:
        return self.width * self.height

    @property
    def aspect_ratio(self) -> float:
        return self.width / self.height

    @property
    def center(self) -> tuple[float, float]:
        """Geometric center in tile units, x along columns and y along rows."""
        return (self.col0 + self.col1 + 1) / 2, (self.row0 + self.row1 + 1) / 2

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.col1 < other.col0
            or other.col1 < self.col0
            or self.row1 < other.row0
            or other.row1 < self.row0
        )

    def contains(self, other: "Rect") -> bool:
        return (
            self.row0 <= other.row0
            and self.col0 <= other.col0
            and other.row1 <= self.row1
            and other.col1 <= self.col1
        )


class Fabric:
    """Immutable device grid with O(1) rectangle resource queries.

    ``column_kinds`` may be a string of C/B/D characters or a sequence of
    ResourceKind values. Reserved rectangles mark tiles (typically static
    logic) no reconfigurable region may use.
    """

    def __init__(
        self,
        rows: int,
        column_kinds: str | Sequence[ResourceKind],
        reserved: Iterable[Rect] = (),
        frames: Mapping[ResourceKind, int] | None = None,
    ) -> None:
        if rows < 1:
            raise FabricError("device needs at least one clock-region row")
        if isinstance(column_kinds, str):
            kinds = tuple(ResourceKind.from_char(ch) for ch in column_kinds)
        else:
            kinds = tuple(column_kinds)
        if not kinds:
            raise FabricError("device needs at least one resource column")
        self._rows = rows
        self._kinds = kinds
        self._frames = dict(DEFAULT_FRAMES)
        if frames:
            self._frames.update(frames)
        for kind, per_tile in self._frames.items():
            if per_tile < 1:
                raise FabricError(f"frames per {kind.name} tile must be positive")

        cols = len(kinds)
        # Per-kind column prefix counts: _kind_prefix[k][c] counts columns of
        # kind k in [0, c).
        self._kind_prefix = [[0] * (cols + 1) for _ in range(3)]
        for c, kind in enumerate(kinds):
            for k in range(3):
                self._kind_prefix[k][c + 1] = self._kind_prefix[k][c]
            self._kind_prefix[kind.index][c + 1] += 1
        self._columns_by_kind = {
            kind: tuple(c for c, k in enumerate(kinds) if k is kind)
            for kind in ResourceKind
        }

        reserved = tuple(reserved)
        for rect in reserved:
            if not (
                0 <= rect.row0 <= rect.row1 < rows
                and 0 <= rect.col0 <= rect.col1 < cols
            ):
                raise FabricError(f"reserved rect out of bounds: {rect}")
        self._reserved_rects = reserved
        # 2D prefix sum of the reserved cell mask, for O(1) rect queries.
        pref = [[0] * (cols + 1) for _ in range(rows + 1)]
        if reserved:
            mask = [[False] * cols for _ in range(rows)]
            for rect in reserved:
                for r in range(rect.row0, rect.row1 + 1):
                    row = mask[r]
                    for c in range(rect.col0, rect.col1 + 1):
                        row[c] = True
            for r in range(rows):
                row_pref = pref[r + 1]
                prev = pref[r]
                acc = 0
                for c in range(cols):
                    acc += mask[r][c]
                    row_pref[c + 1] = prev[c + 1] + acc
        self._reserved_prefix = pref

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return len(self._kinds)

    @property
    def frames(self) -> Mapping[ResourceKind, int]:
        return dict(self._frames)

    @property
    def reserved_rects(self) -> tuple[Rect, ...]:
        return self._reserved_rects

    @property
    def bounds(self) -> Rect:
        return Rect(0, 0, self._rows - 1, self.cols - 1)

    def kind_of(self, col: int) -> ResourceKind:
        if not 0 <= col < self.cols:
            raise FabricError(f"column {col} out of range")
        return self._kinds[col]

    def kind_at(self, row: int, col: int) -> ResourceKind:
        if not 0 <= row < self._rows:
            raise FabricError(f"row {row} out of range")
        return self.kind_of(col)

    def columns_of(self, kind: ResourceKind) -> tuple[int, ...]:
        return self._columns_by_kind[kind]

    def in_bounds(self, rect: Rect) -> bool:
        return (
            0 <= rect.row0 <= rect.row1 < self._rows
            and 0 <= rect.col0 <= rect.col1 < self.cols
        )

    def _check_rect(self, rect: Rect) -> None:
        if not self.in_bounds(rect):
            raise FabricError(f"rect out of bounds: {rect}")

    def resources_in_rect(self, rect: Rect) -> ResourceVector:
        """Tile counts by kind inside the rect; every cell counts once."""
        self._check_rect(rect)
        counts = []
        for k in range(3):
            pref = self._kind_prefix[k]
            counts.append((pref[rect.col1 + 1] - pref[rect.col0]) * rect.height)
        return ResourceVector(*counts)

    def reserved_tiles_in(self, rect: Rect) -> int:
        self._check_rect(rect)
        pref = self._reserved_prefix
        return (
            pref[rect.row1 + 1][rect.col1 + 1]
            - pref[rect.row0][rect.col1 + 1]
            - pref[rect.row1 + 1][rect.col0]
            + pref[rect.row0][rect.col0]
        )

    def is_reserved(self, row: int, col: int) -> bool:
        return self.reserved_tiles_in(Rect(row, col, row, col)) > 0

    def is_free_rect(self, rect: Rect, occupied: Iterable[Rect] = ()) -> bool:
        """True when rect is in bounds, off reserved tiles and off ``occupied``."""
        if not self.in_bounds(rect):
            return False
        if self.reserved_tiles_in(rect):
            return False
        return not any(rect.overlaps(other) for other in occupied)

    def frames_of(self, vec: ResourceVector) -> int:
        """Reconfiguration frame count of a tile bundle."""
        return (
            vec.clb * self._frames[ResourceKind.CLB]
            + vec.bram * self._frames[ResourceKind.BRAM]
            + vec.dsp * self._frames[ResourceKind.DSP]
        )

    def total_resources(self) -> ResourceVector:
        return ResourceVector(
            *(len(self._columns_by_kind[k]) * self._rows for k in ResourceKind)
        )

    def available_in_rect(self, rect: Rect) -> ResourceVector:
        """Tile counts by kind inside ``rect`` but outside reserved areas."""
        self._check_rect(rect)
        counts = [0, 0, 0]
        for c in range(rect.col0, rect.col1 + 1):
            reserved = self.reserved_tiles_in(Rect(rect.row0, c, rect.row1, c))
            counts[self._kinds[c].index] += rect.height - reserved
        return ResourceVector(*counts)

    def available_resources(self) -> ResourceVector:
        """Tile counts by kind outside reserved areas."""
        return self.available_in_rect(self.bounds)


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def parse_fabric(text: str) -> Fabric:
    """Parse a fabric document.

    Directives, one per line: ``rows N``, ``columns <C/B/D string>``,
    ``reserved row0 col0 row1 col1`` (repeatable) and an optional
    ``frames clb bram dsp`` override. ``#`` starts a comment. A repeated
    ``columns`` line must match the first one, since kinds are uniform
    over the column height.
    """
    rows: int | None = None
    columns: str | None = None
    frames: dict[ResourceKind, int] | None = None
    reserved_raw: list[tuple[int, tuple[int, int, int, int]]] = []

    def fail(lineno: int, msg: str) -> None:
        raise FabricError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        parts = line.split()
        directive, args = parts[0], parts[1:]
        if directive == "rows":
            if len(args) != 1 or not args[0].lstrip("-").isdigit():
                fail(lineno, "expected: rows <count>")
            rows = int(args[0])
            if rows < 1:
                fail(lineno, f"row count must be positive, got {rows}")
        elif directive == "columns":
            if len(args) != 1:
                fail(lineno, "expected: columns <kind string>")
            for ch in args[0]:
                if ch not in "CBD":
                    fail(lineno, f"unknown resource kind {ch!r}")
            if columns is None:
                columns = args[0]
            elif columns != args[0]:
                fail(lineno, "column kinds differ between rows")
        elif directive == "reserved":
            if len(args) != 4:
                fail(lineno, "expected: reserved <row0> <col0> <row1> <col1>")
            try:
                coords = tuple(int(a) for a in args)
            except ValueError:
                fail(lineno, "reserved coordinates must be integers")
            reserved_raw.append((lineno, coords))
        elif directive == "frames":
            if len(args) != 3:
                fail(lineno, "expected: frames <clb> <bram> <dsp>")
            try:
                values = [int(a) for a in args]
            except ValueError:
                fail(lineno, "frame counts must be integers")
            if any(v < 1 for v in values):
                fail(lineno, "frame counts must be positive")
            frames = dict(zip(ResourceKind, values))
        else:
            fail(lineno, f"unknown directive {directive!r}")

    if rows is None:
        raise FabricError("missing 'rows' directive")
    if columns is None:
        raise FabricError("missing 'columns' directive")

    reserved = []
    for lineno, (r0, c0, r1, c1) in reserved_raw:
        if not (0 <= r0 <= r1 < rows and 0 <= c0 <= c1 < len(columns)):
            raise FabricError(f"line {lineno}: reserved rect out of bounds")
        reserved.append(Rect(r0, c0, r1, c1))

    return Fabric(rows, columns, reserved, frames)

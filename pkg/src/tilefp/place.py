"""Candidate scoring, module ordering and the trial-and-error placer.

Every candidate of a module is scored against the module's anchor point:
wastage in frames and Manhattan distance to the anchor are each normalized
to the module's own maxima and blended with the two objective weights.
Modules are then placed frame-hungriest first by a depth-first search that
takes the best-scored rectangle not colliding with anything placed so far
and backs up a level whenever a module runs out of rectangles. The first
complete assignment wins.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .design import Design
from .fabric import Fabric, Rect
from .tessellation import PlacementCandidate

__all__ = [
    "Floorplan",
    "PlacementInfeasibleError",
    "PlacementTimeoutError",
    "ScoredCandidate",
    "floorplan_wastage",
    "floorplan_wirelength",
    "normalize_candidates",
    "order_modules",
    "trial_and_error_place",
    "write_floorplan",
]


class PlacementInfeasibleError(Exception):
    """The backtracking search ran out of candidate combinations."""

    def __init__(self, module_id: str, placed: int) -> None:
        self.module_id = module_id
        self.placed = placed
        super().__init__(
            f"module {module_id!r} has no non-overlapping candidate left "
            f"(deepest search state placed {placed} modules)"
        )


class PlacementTimeoutError(Exception):
    """The time budget ran out before a full floorplan was found."""

    def __init__(self, placed: int, total: int) -> None:
        self.placed = placed
        self.total = total
        super().__init__(
            f"time budget exhausted with {placed} of {total} modules placed"
        )


class ScoredCandidate(NamedTuple):
    """A candidate with its normalized metrics and blended objective."""

    candidate: PlacementCandidate
    wastage_norm: float
    anchor_dist_norm: float
    objective: float


@dataclass(frozen=True)
class Floorplan:
    """Final rectangle per module plus the two quality metrics."""

    rects: dict[str, Rect]
    total_wastage_frames: int
    total_wirelength: float
    backtracks: int = 0


def normalize_candidates(
    candidates: Sequence[PlacementCandidate],
    anchor: tuple[float, float],
    alpha: float,
    beta: float,
) -> list[ScoredCandidate]:
    """Score one module's candidates against its anchor and sort them.

    Wastage and anchor distance are divided by their maximum over the list
    (a zero maximum maps every value to zero) and blended as
    alpha * wastage + beta * distance. Sorting is ascending by that
    objective; ties fall back to raw wastage, then bottom-left position.
    """
    if not candidates:
        raise ValueError("cannot score an empty candidate list")
    ax, ay = anchor
    dists = [abs(c.center[0] - ax) + abs(c.center[1] - ay) for c in candidates]
    max_dist = max(dists)
    max_waste = max(c.wastage_frames for c in candidates)
    scored = []
    for cand, dist in zip(candidates, dists):
        wastage_norm = cand.wastage_frames / max_waste if max_waste else 0.0
        dist_norm = dist / max_dist if max_dist else 0.0
        scored.append(
            ScoredCandidate(
                cand,
                wastage_norm,
                dist_norm,
                alpha * wastage_norm + beta * dist_norm,
            )
        )
    scored.sort(
        key=lambda s: (
            s.objective,
            s.candidate.wastage_frames,
            s.candidate.rect.row0,
            s.candidate.rect.col0,
        )
    )
    return scored


def order_modules(design: Design, fabric: Fabric) -> list[str]:
    """Module ids sorted hungriest first: frame count down, then id up."""
    ranked = sorted(design.modules, key=lambda m: (-fabric.frames_of(m.req), m.id))
    return [m.id for m in ranked]


def trial_and_error_place(
    fabric: Fabric,
    ordered_modules: Sequence[str],
    scored: Mapping[str, Sequence[ScoredCandidate]],
    time_budget: float | None = 60.0,
) -> tuple[dict[str, Rect], int]:
    """First feasible floorplan by depth-first search in scoring order.

    Returns the chosen rectangle per module (in placement order) and the
    number of times the search backed up a level. Deterministic: identical
    inputs walk identical search trees.
    """
    order = list(ordered_modules)
    for module_id in order:
        if not scored[module_id]:
            raise PlacementInfeasibleError(module_id, 0)
    deadline = None if time_budget is None else time.monotonic() + time_budget
    chosen: dict[str, Rect] = {}
    next_try = [0] * len(order)
    backtracks = 0
    deepest = 0
    depth = 0
    while 0 <= depth < len(order):
        if deadline is not None and time.monotonic() >= deadline:
            raise PlacementTimeoutError(deepest, len(order))
        module_id = order[depth]
        options = scored[module_id]
        placed = None
        i = next_try[depth]
        while i < len(options):
            rect = options[i].candidate.rect
            if fabric.is_free_rect(rect, chosen.values()):
                placed = rect
                break
            i += 1
        if placed is None:
            next_try[depth] = 0
            depth -= 1
            if depth >= 0:
                del chosen[order[depth]]
                backtracks += 1
        else:
            chosen[module_id] = placed
            next_try[depth] = i + 1
            depth += 1
            deepest = max(deepest, depth)
    if depth < 0:
        raise PlacementInfeasibleError(order[deepest], deepest)
    return chosen, backtracks


def floorplan_wastage(
    placements: Mapping[str, Rect], design: Design, fabric: Fabric
) -> int:
    """Frames inside the chosen rectangles beyond their requirements."""
    total = 0
    for module in design.modules:
        have = fabric.available_in_rect(placements[module.id])
        total += fabric.frames_of(have - module.req)
    return total


def floorplan_wirelength(placements: Mapping[str, Rect], design: Design) -> float:
    """Signal-weighted Manhattan distance between connected region centers."""
    total = 0.0
    for conn in design.connections:
        ax, ay = placements[conn.a].center
        bx, by = placements[conn.b].center
        total += conn.signals * (abs(ax - bx) + abs(ay - by))
    return total


def write_floorplan(
    floorplan: Floorplan,
    design: Design,
    fabric: Fabric,
    alpha: float,
    beta: float,
    ar_bounds: tuple[float, float] | None,
) -> str:
    """Serialize a floorplan to its line-oriented document form.

    The first line records the run mode (weights and aspect-ratio window),
    one ``place`` line per module gives its rectangle, its requirement and
    its wastage so checkers need nothing but this document and the fabric,
    and the ``total`` line closes with the aggregate metrics.
    """
    ar = "off" if ar_bounds is None else f"{ar_bounds[0]:g} {ar_bounds[1]:g}"
    lines = [f"mode alpha {alpha:g} beta {beta:g} ar {ar}"]
    for module_id, rect in floorplan.rects.items():
        req = design.module(module_id).req
        waste = fabric.frames_of(fabric.available_in_rect(rect) - req)
        lines.append(
            f"place {module_id} {rect.row0} {rect.col0} {rect.row1} {rect.col1} "
            f"{req.clb} {req.bram} {req.dsp} {waste}"
        )
    lines.append(
        f"total wastage {floorplan.total_wastage_frames} "
        f"wirelength {round(floorplan.total_wirelength)} "
        f"backtracks {floorplan.backtracks}"
    )
    return "\n".join(lines) + "\n"

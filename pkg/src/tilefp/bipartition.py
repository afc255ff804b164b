"""Recursive pseudo-bipartitioning that assigns every module an anchor point.

The device is halved again and again along one axis. At each halving a
binary quadratic model decides which side every member module goes to: the
objective charges each connection by the signal count times the average
extents of the two endpoints whenever they end up on opposite sides (or on
the far side of an already-anchored external module), and knapsack rows per
resource kind keep each half within its capacity, using the most optimistic
footprint a module could take on that side. Modules that cannot put at
least three quarters of any candidate into either half stay behind at the
parent's center and their requirement is charged to both halves in
proportion to area. Two independent passes, one with vertical cuts and one
with horizontal cuts, fix the x and the y coordinate of each anchor.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import IO, Literal, Mapping, Sequence

import numpy as np

from .design import Connection, Design, ModuleSpec
from .fabric import Fabric, Rect, ResourceVector
from .tessellation import PlacementCandidate

__all__ = [
    "Axis",
    "BqpModel",
    "InfeasibleModelError",
    "Partition",
    "SideData",
    "assignment_feasible",
    "build_bqp",
    "compute_anchors",
    "external_cut_cost",
    "objective_of",
    "pair_cut_cost",
    "placement_side",
    "recursive_bipartition",
    "side_data",
    "solve_bqp",
    "split_partition",
]

Axis = Literal["vertical", "horizontal"]
Point = tuple[float, float]

SIDE_FRACTION = 0.75
EXACT_LIMIT = 16
DEFAULT_NODE_BUDGET = 100_000


class InfeasibleModelError(Exception):
    """No side assignment can satisfy the capacity constraints."""


@dataclass(frozen=True)
class Partition:
    """A rectangular slice of the device and the modules routed into it."""

    rect: Rect
    members: tuple[str, ...]
    available: ResourceVector

    @property
    def center(self) -> Point:
        return self.rect.center


@dataclass(frozen=True)
class SideData:
    """How one module relates to the two halves of a partition.

    ``w0``/``w1`` are the mean extents along the cut axis of the candidates
    landing on each side; ``occ0``/``occ1`` are the componentwise-minimum
    resource footprints, the least any placement on that side would consume.
    A side with no candidates is forbidden outright.
    """

    module_id: str
    placements0: tuple[PlacementCandidate, ...]
    placements1: tuple[PlacementCandidate, ...]
    w0: float | None
    w1: float | None
    occ0: ResourceVector | None
    occ1: ResourceVector | None

    @property
    def parent_only(self) -> bool:
        return not self.placements0 and not self.placements1

    @property
    def forced_side(self) -> int | None:
        """0 or 1 when only that side is possible, else None."""
        if self.placements0 and not self.placements1:
            return 0
        if self.placements1 and not self.placements0:
            return 1
        return None


@dataclass
class BqpModel:
    """Binary side-assignment model in tabular form.

    Every variable i carries a cost pair ``linear[i][v]`` for taking value
    v, every variable pair a 2x2 corner table, and ``const`` collects the
    cost of everything already decided. All entries are nonnegative, which
    is what makes prefix cost plus remaining linear minima an admissible
    bound during search. ``fixed`` holds members whose side was forced
    before solving; ``parent_only`` the members not assignable at all.
    """

    variables: list[str]
    linear: list[tuple[float, float]]
    pairs: dict[tuple[int, int], tuple[tuple[float, float], tuple[float, float]]]
    const: float
    occ0: list[tuple[int, int, int]]
    occ1: list[tuple[int, int, int]]
    avail0: tuple[float, float, float]
    avail1: tuple[float, float, float]
    fixed: dict[str, int] = field(default_factory=dict)
    parent_only: list[str] = field(default_factory=list)


def split_partition(parent: Partition, axis: Axis, fabric: Fabric) -> tuple[Partition, Partition]:
    """Halve a partition; the left (or bottom) child gets the floor half."""
    rect = parent.rect
    if axis == "vertical":
        if rect.width < 2:
            raise ValueError(f"partition {rect} too thin for a vertical cut")
        mid = rect.col0 + rect.width // 2
        r0 = Rect(rect.row0, rect.col0, rect.row1, mid - 1)
        r1 = Rect(rect.row0, mid, rect.row1, rect.col1)
    else:
        if rect.height < 2:
            raise ValueError(f"partition {rect} too thin for a horizontal cut")
        mid = rect.row0 + rect.height // 2
        r0 = Rect(rect.row0, rect.col0, mid - 1, rect.col1)
        r1 = Rect(mid, rect.col0, rect.row1, rect.col1)
    return (
        Partition(r0, (), fabric.available_in_rect(r0)),
        Partition(r1, (), fabric.available_in_rect(r1)),
    )


def _cut_coordinate(child0: Partition, axis: Axis) -> float:
    """Position of the cut line in center coordinates."""
    if axis == "vertical":
        return float(child0.rect.col1 + 1)
    return float(child0.rect.row1 + 1)


def _anchor_side(anchor: Point, cut: float, axis: Axis) -> int:
    """Side of the cut an anchored point falls on; on the line counts as 0."""
    coord = anchor[0] if axis == "vertical" else anchor[1]
    return 0 if coord <= cut else 1


def placement_side(
    candidate: PlacementCandidate, child0: Partition, child1: Partition
) -> int | None:
    """Child index holding at least 75% of the candidate's area, else None."""
    area = candidate.rect.tile_count
    for side, child in enumerate((child0, child1)):
        inside = _overlap_area(candidate.rect, child.rect)
        if inside * 4 >= area * 3:
            return side
    return None


def _overlap_area(a: Rect, b: Rect) -> int:
    rows = min(a.row1, b.row1) - max(a.row0, b.row0) + 1
    cols = min(a.col1, b.col1) - max(a.col0, b.col0) + 1
    return max(rows, 0) * max(cols, 0)


def _extent(rect: Rect, axis: Axis) -> int:
    return rect.width if axis == "vertical" else rect.height


def _min_occupancy(cands: Sequence[PlacementCandidate]) -> ResourceVector:
    return ResourceVector(
        min(c.resources.clb for c in cands),
        min(c.resources.bram for c in cands),
        min(c.resources.dsp for c in cands),
    )


def side_data(
    module: ModuleSpec,
    candidates: Sequence[PlacementCandidate],
    child0: Partition,
    child1: Partition,
    axis: Axis,
) -> SideData:
    """Split a module's candidates between two halves and summarize them."""
    by_side: tuple[list, list] = ([], [])
    for cand in candidates:
        side = placement_side(cand, child0, child1)
        if side is not None:
            by_side[side].append(cand)
    p0, p1 = by_side

    def mean_extent(cands: list) -> float:
        return sum(_extent(c.rect, axis) for c in cands) / len(cands)

    return SideData(
        module.id,
        tuple(p0),
        tuple(p1),
        mean_extent(p0) if p0 else None,
        mean_extent(p1) if p1 else None,
        _min_occupancy(p0) if p0 else None,
        _min_occupancy(p1) if p1 else None,
    )


def pair_cut_cost(
    n_ij: float,
    m_i: int,
    m_j: int,
    w_i0: float,
    w_i1: float,
    w_j0: float,
    w_j1: float,
) -> float:
    """Cost of a connection whose endpoints may land on opposite sides."""
    if m_i == m_j:
        # the quadratic term cancels the linear ones exactly; evaluating
        # the full expression would leave rounding residue below zero
        return 0.0
    both = w_i0 + w_i1 + w_j0 + w_j1
    return n_ij * (m_i * (w_i1 + w_j0) + m_j * (w_i0 + w_j1) - m_i * m_j * both)


def external_cut_cost(
    n_ie: float, m_i: int, w_i0: float, w_i1: float, external_side: int, w_e: float
) -> float:
    """Cost of a connection to a module already anchored outside the cut."""
    if external_side == 0:
        return n_ie * m_i * (w_i1 + w_e)
    return n_ie * (1 - m_i) * (w_i0 + w_e)


def build_bqp(
    parent: Partition,
    data: Sequence[SideData],
    connections: Sequence[Connection],
    anchors: Mapping[str, Point],
    axis: Axis,
    extents: Mapping[str, float],
    children: tuple[Partition, Partition],
    requirements: Mapping[str, ResourceVector],
) -> BqpModel:
    """Assemble the side-assignment model for one halving.

    ``extents`` gives each module's mean extent over its full candidate
    list (the estimate used for connection endpoints outside this
    partition) and ``requirements`` the tile needs of the parent-only
    members, charged to both halves pro rata by area.
    """
    child0, child1 = children
    cut = _cut_coordinate(child0, axis)
    by_id = {d.module_id: d for d in data}

    variables: list[str] = []
    fixed: dict[str, int] = {}
    parent_only: list[str] = []
    for d in data:
        if d.parent_only:
            parent_only.append(d.module_id)
        elif d.forced_side is not None:
            fixed[d.module_id] = d.forced_side
        else:
            variables.append(d.module_id)
    index = {m: i for i, m in enumerate(variables)}

    avail0 = list(map(float, children[0].available))
    avail1 = list(map(float, children[1].available))
    share0 = child0.rect.tile_count / parent.rect.tile_count
    for m in parent_only:
        for k, amount in enumerate(requirements[m]):
            avail0[k] -= amount * share0
            avail1[k] -= amount * (1 - share0)
    for m, side in fixed.items():
        occ = by_id[m].occ0 if side == 0 else by_id[m].occ1
        target = avail0 if side == 0 else avail1
        for k, amount in enumerate(occ):  # type: ignore[union-attr]
            target[k] -= amount
    if min(avail0) < 0 or min(avail1) < 0:
        raise InfeasibleModelError(
            f"forced assignments exceed capacity in partition {parent.rect}"
        )

    linear = [[0.0, 0.0] for _ in variables]
    pairs: dict[tuple[int, int], tuple[tuple[float, float], tuple[float, float]]] = {}
    const = 0.0

    def settled_side(module_id: str) -> int:
        """Side of an endpoint that is not a free variable of this solve."""
        if module_id in fixed:
            return fixed[module_id]
        return _anchor_side(anchors[module_id], cut, axis)

    def settled_extent(module_id: str, side: int) -> float:
        """Mean extent of a settled endpoint, as seen from this cut."""
        if module_id in fixed:
            d = by_id[module_id]
            w = d.w0 if side == 0 else d.w1
            assert w is not None
            return w
        return extents.get(module_id, 0.0)

    for conn in connections:
        a, b, n = conn.a, conn.b, conn.signals
        if a not in by_id and b not in by_id:
            continue
        a_free, b_free = a in index, b in index
        if a_free and b_free:
            da, db = by_id[a], by_id[b]
            i, j = index[a], index[b]
            if j < i:
                i, j = j, i
                da, db = db, da
            add = tuple(
                tuple(
                    pair_cut_cost(n, vi, vj, da.w0, da.w1, db.w0, db.w1)
                    for vj in (0, 1)
                )
                for vi in (0, 1)
            )
            old = pairs.get((i, j))
            if old is not None:
                add = tuple(
                    tuple(old[vi][vj] + add[vi][vj] for vj in (0, 1))
                    for vi in (0, 1)
                )
            pairs[(i, j)] = add  # type: ignore[assignment]
        elif a_free or b_free:
            # A settled endpoint costs exactly like a fixed substitution
            # into the pair formula, with its settled side's mean extent.
            if b_free:
                a, b = b, a
            d = by_id[a]
            i = index[a]
            side = settled_side(b)
            w_b = settled_extent(b, side)
            for v in (0, 1):
                linear[i][v] += external_cut_cost(n, v, d.w0, d.w1, side, w_b)
        else:
            sa, sb = settled_side(a), settled_side(b)
            if sa != sb:
                const += n * (settled_extent(a, sa) + settled_extent(b, sb))

    return BqpModel(
        variables=variables,
        linear=[tuple(row) for row in linear],  # type: ignore[misc]
        pairs=pairs,
        const=const,
        occ0=[tuple(by_id[m].occ0) for m in variables],  # type: ignore[arg-type]
        occ1=[tuple(by_id[m].occ1) for m in variables],  # type: ignore[arg-type]
        avail0=tuple(avail0),  # type: ignore[arg-type]
        avail1=tuple(avail1),  # type: ignore[arg-type]
        fixed=fixed,
        parent_only=parent_only,
    )


def objective_of(model: BqpModel, assignment: Sequence[int]) -> float:
    """Objective value of a full 0/1 assignment."""
    total = model.const
    for i, v in enumerate(assignment):
        total += model.linear[i][v]
    for (i, j), corners in model.pairs.items():
        total += corners[assignment[i]][assignment[j]]
    return total


def assignment_feasible(model: BqpModel, assignment: Sequence[int]) -> bool:
    """Whether an assignment satisfies all six capacity rows."""
    for k in range(3):
        load0 = sum(model.occ0[i][k] for i, v in enumerate(assignment) if v == 0)
        load1 = sum(model.occ1[i][k] for i, v in enumerate(assignment) if v == 1)
        if load0 > model.avail0[k] or load1 > model.avail1[k]:
            return False
    return True


def _solve_exhaustive(model: BqpModel) -> list[int] | None:
    """Vectorized sweep of every assignment; first minimum wins ties."""
    n = len(model.variables)
    count = 1 << n
    rows = np.arange(count, dtype=np.int64)
    bits = (rows[:, None] >> (n - 1 - np.arange(n))) & 1
    a = bits.astype(np.float64)

    e = np.asarray(model.linear)
    obj = np.full(count, model.const) + a @ e[:, 1] + (1.0 - a) @ e[:, 0]
    for (i, j), c in model.pairs.items():
        ai, aj = a[:, i], a[:, j]
        obj += (
            c[0][0] * (1 - ai) * (1 - aj)
            + c[0][1] * (1 - ai) * aj
            + c[1][0] * ai * (1 - aj)
            + c[1][1] * ai * aj
        )

    occ0 = np.asarray(model.occ0, dtype=np.float64)
    occ1 = np.asarray(model.occ1, dtype=np.float64)
    load0 = (1.0 - a) @ occ0
    load1 = a @ occ1
    feasible = np.all(load0 <= np.asarray(model.avail0), axis=1) & np.all(
        load1 <= np.asarray(model.avail1), axis=1
    )
    if not feasible.any():
        return None
    obj[~feasible] = np.inf
    best = int(np.argmin(obj))
    return [int(b) for b in bits[best]]


def _greedy_assignment(model: BqpModel) -> list[int]:
    """Sequential seed: each variable takes the locally cheaper side.

    Capacity is tracked and a side that would overflow is avoided when the
    other still fits; ties go to side 0.
    """
    n = len(model.variables)
    out: list[int] = []
    load0 = [0.0, 0.0, 0.0]
    load1 = [0.0, 0.0, 0.0]
    for i in range(n):
        costs = [model.linear[i][v] for v in (0, 1)]
        for (a, b), corners in model.pairs.items():
            if b == i and a < len(out):
                costs[0] += corners[out[a]][0]
                costs[1] += corners[out[a]][1]
        fits0 = all(load0[k] + model.occ0[i][k] <= model.avail0[k] for k in range(3))
        fits1 = all(load1[k] + model.occ1[i][k] <= model.avail1[k] for k in range(3))
        if fits0 != fits1:
            pick = 0 if fits0 else 1
        else:
            pick = 0 if costs[0] <= costs[1] else 1
        out.append(pick)
        target = load0 if pick == 0 else load1
        occ = model.occ0[i] if pick == 0 else model.occ1[i]
        for k in range(3):
            target[k] += occ[k]
    return out


def _overflow(model: BqpModel, assignment: Sequence[int]) -> float:
    total = 0.0
    for k in range(3):
        load0 = sum(model.occ0[i][k] for i, v in enumerate(assignment) if v == 0)
        load1 = sum(model.occ1[i][k] for i, v in enumerate(assignment) if v == 1)
        total += max(load0 - model.avail0[k], 0.0) + max(load1 - model.avail1[k], 0.0)
    return total


def _repair(model: BqpModel, assignment: list[int]) -> list[int] | None:
    """Flip variables until capacity holds, greedily by overflow reduction."""
    current = _overflow(model, assignment)
    for _ in range(2 * len(assignment) + 1):
        if current == 0:
            return assignment
        best = None
        for i in range(len(assignment)):
            flipped = assignment.copy()
            flipped[i] ^= 1
            over = _overflow(model, flipped)
            if over < current:
                key = (over, objective_of(model, flipped), i)
                if best is None or key < best[0]:
                    best = (key, flipped)
        if best is None:
            return None
        assignment = best[1]
        current = best[0][0]
    return assignment if current == 0 else None


def _local_search(model: BqpModel, assignment: list[int]) -> list[int]:
    """Deterministic improvement sweeps: single flips, then opposite swaps."""
    n = len(assignment)
    best_obj = objective_of(model, assignment)
    improved = True
    while improved:
        improved = False
        for i in range(n):
            assignment[i] ^= 1
            obj = objective_of(model, assignment)
            if obj < best_obj and assignment_feasible(model, assignment):
                best_obj = obj
                improved = True
            else:
                assignment[i] ^= 1
        for i, j in itertools.combinations(range(n), 2):
            if assignment[i] == assignment[j]:
                continue
            assignment[i] ^= 1
            assignment[j] ^= 1
            obj = objective_of(model, assignment)
            if obj < best_obj and assignment_feasible(model, assignment):
                best_obj = obj
                improved = True
            else:
                assignment[i] ^= 1
                assignment[j] ^= 1
    return assignment


def _solve_branch_and_bound(
    model: BqpModel, node_budget: int
) -> list[int] | None:
    """Depth-first search with a nonnegativity bound and a node cap."""
    n = len(model.variables)
    seed = _repair(model, _greedy_assignment(model))
    best: list[int] | None = None
    best_obj = math.inf
    if seed is not None:
        seed = _local_search(model, seed)
        best, best_obj = seed.copy(), objective_of(model, seed)

    suffix_min = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + min(model.linear[i])
    pairs_by_high = [[] for _ in range(n)]
    for (i, j), corners in model.pairs.items():
        pairs_by_high[j].append((i, corners))

    prefix = [0] * n
    nodes = 0

    def descend(depth: int, cost: float, load0: list[float], load1: list[float]) -> None:
        nonlocal best, best_obj, nodes
        if depth == n:
            if cost < best_obj:
                best, best_obj = prefix.copy(), cost
            return
        for v in (0, 1):
            if nodes >= node_budget:
                return
            nodes += 1
            step = cost + model.linear[depth][v]
            for i, corners in pairs_by_high[depth]:
                step += corners[prefix[i]][v]
            if step + suffix_min[depth + 1] >= best_obj:
                continue
            occ = model.occ0[depth] if v == 0 else model.occ1[depth]
            load = load0 if v == 0 else load1
            avail = model.avail0 if v == 0 else model.avail1
            if any(load[k] + occ[k] > avail[k] for k in range(3)):
                continue
            prefix[depth] = v
            for k in range(3):
                load[k] += occ[k]
            descend(depth + 1, step, load0, load1)
            for k in range(3):
                load[k] -= occ[k]
    descend(0, model.const, [0.0] * 3, [0.0] * 3)
    return best


def solve_bqp(model: BqpModel, node_budget: int = DEFAULT_NODE_BUDGET) -> dict[str, int] | None:
    """Best side assignment found for the model's free variables.

    Exhaustive (and therefore exact) up to 16 variables; beyond that a
    greedy seed, local search and budgeted branch-and-bound. The budget is
    counted in search nodes, not seconds, so results are reproducible.
    Returns None when no feasible assignment exists (or none was found
    within budget).
    """
    if not model.variables:
        return {}
    if len(model.variables) <= EXACT_LIMIT:
        bits = _solve_exhaustive(model)
    else:
        bits = _solve_branch_and_bound(model, node_budget)
    if bits is None:
        return None
    return dict(zip(model.variables, bits))


def _mean_extents(
    candidates: Mapping[str, Sequence[PlacementCandidate]], axis: Axis
) -> dict[str, float]:
    return {
        m: sum(_extent(c.rect, axis) for c in cands) / len(cands)
        for m, cands in candidates.items()
        if cands
    }


def recursive_bipartition(
    fabric: Fabric,
    design: Design,
    candidates: Mapping[str, Sequence[PlacementCandidate]],
    axis: Axis,
    node_budget: int = DEFAULT_NODE_BUDGET,
    log: IO[str] | None = None,
) -> dict[str, Point]:
    """Anchor every module by recursive halving along one axis.

    Each halving solves the side-assignment model and moves the assigned
    modules' anchors to their half's center; modules stuck at a partition
    keep its center. A solve may only read the anchors that existed when
    its parent's solve finished, so sibling subtrees cannot influence each
    other and the recursion is order-independent.
    """
    bounds = fabric.bounds
    module_ids = [m.id for m in design.modules]
    anchors: dict[str, Point] = {m: bounds.center for m in module_ids}
    extents = _mean_extents(candidates, axis)
    requirements = {m.id: m.req for m in design.modules}

    root = Partition(bounds, tuple(module_ids), fabric.available_in_rect(bounds))
    root_lists = {m: tuple(candidates[m]) for m in module_ids}
    stack = [(root, root_lists, dict(anchors), True)]
    while stack:
        partition, cand_lists, snapshot, is_root = stack.pop()
        span = partition.rect.width if axis == "vertical" else partition.rect.height
        if len(partition.members) < 2 or span < 2:
            continue
        child0, child1 = split_partition(partition, axis, fabric)
        data = [
            side_data(design.module(m), cand_lists[m], child0, child1, axis)
            for m in partition.members
        ]
        started = time.perf_counter()
        try:
            model = build_bqp(
                partition, data, design.connections, snapshot, axis,
                extents, (child0, child1), requirements,
            )
            assignment = solve_bqp(model, node_budget)
        except InfeasibleModelError:
            model, assignment = None, None
        if assignment is None or model is None:
            if is_root:
                raise InfeasibleModelError(
                    f"no feasible side assignment at the device root ({axis} pass)"
                )
            # members keep the parent's anchor; placement may still succeed
            continue
        if log is not None:
            record = {
                "axis": axis,
                "rect": list(partition.rect),
                "variables": len(model.variables),
                "objective": objective_of(
                    model, [assignment[m] for m in model.variables]
                ),
                "solve_ms": round((time.perf_counter() - started) * 1000.0, 3),
            }
            log.write(json.dumps(record) + "\n")

        sides = dict(assignment)
        sides.update(model.fixed)
        updates: dict[str, Point] = {}
        members: tuple[list[str], list[str]] = ([], [])
        lists: tuple[dict, dict] = ({}, {})
        for d in data:
            if d.module_id not in sides:
                continue
            side = sides[d.module_id]
            child = child0 if side == 0 else child1
            updates[d.module_id] = child.center
            anchors[d.module_id] = child.center
            members[side].append(d.module_id)
            lists[side][d.module_id] = d.placements0 if side == 0 else d.placements1
        child_snapshot = {**snapshot, **updates}
        for side, child in ((0, child0), (1, child1)):
            stack.append((
                Partition(child.rect, tuple(members[side]), child.available),
                lists[side],
                dict(child_snapshot),
                False,
            ))
    return anchors


def compute_anchors(
    fabric: Fabric,
    design: Design,
    candidates: Mapping[str, Sequence[PlacementCandidate]],
    node_budget: int = DEFAULT_NODE_BUDGET,
    log: IO[str] | None = None,
) -> dict[str, Point]:
    """Final anchors: x from the vertical-cut pass, y from the horizontal."""
    vertical = recursive_bipartition(fabric, design, candidates, "vertical", node_budget, log)
    horizontal = recursive_bipartition(fabric, design, candidates, "horizontal", node_budget, log)
    return {m: (vertical[m][0], horizontal[m][1]) for m in vertical}

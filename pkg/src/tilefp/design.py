"""Design model: reconfigurable modules, interconnect and priority classes.

Modules carry tile requirements by resource kind. For candidate generation
they are grouped into four classes by which scarce kinds they need; each
class orders the kinds by decreasing scarcity, and that order drives the
kernel expansion phases.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .fabric import Fabric, ResourceKind, ResourceVector

__all__ = [
    "Connection",
    "Design",
    "DesignError",
    "GenerationError",
    "ModuleSpec",
    "PriorityClass",
    "PRIORITY_CLASSES",
    "class_of",
    "classify_modules",
    "generate_random_design",
    "parse_design",
    "total_frames",
    "write_design",
]

CONNECTION_SIGNALS = 64  # bus width used by the random generator


class DesignError(ValueError):
    """Malformed design document or inconsistent design data."""


class GenerationError(ValueError):
    """Random design generation cannot meet the requested occupancy."""


@dataclass(frozen=True)
class ModuleSpec:
    """One reconfigurable module and its tile requirement."""

    id: str
    req: ResourceVector
    name: str = ""

    def __post_init__(self) -> None:
        if not self.id or any(ch.isspace() for ch in self.id):
            raise DesignError(f"bad module id {self.id!r}")
        if any(v < 0 for v in self.req):
            raise DesignError(f"module {self.id}: negative requirement")
        if self.req.total == 0:
            raise DesignError(f"module {self.id}: requirement is all zero")
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class Connection:
    """Undirected bus between two modules, weighted by signal count."""

    a: str
    b: str
    signals: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise DesignError(f"connection from {self.a} to itself")
        if self.signals < 1:
            raise DesignError(
                f"connection {self.a}-{self.b}: signal count must be positive"
            )

    def other(self, module_id: str) -> str:
        return self.b if module_id == self.a else self.a


@dataclass
class Design:
    """A set of modules plus interconnect and objective weights."""

    modules: list[ModuleSpec]
    connections: list[Connection] = field(default_factory=list)
    alpha: float = 0.5
    beta: float = 0.5

    def __post_init__(self) -> None:
        ids = [m.id for m in self.modules]
        if len(set(ids)) != len(ids):
            raise DesignError("duplicate module ids")
        known = set(ids)
        seen_pairs = set()
        for conn in self.connections:
            if conn.a not in known or conn.b not in known:
                raise DesignError(f"connection references unknown module: {conn}")
            pair = frozenset((conn.a, conn.b))
            if pair in seen_pairs:
                raise DesignError(f"duplicate connection {conn.a}-{conn.b}")
            seen_pairs.add(pair)
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise DesignError("objective weights must be non-negative, not both zero")

    def module(self, module_id: str) -> ModuleSpec:
        for m in self.modules:
            if m.id == module_id:
                return m
        raise KeyError(module_id)

    def connections_of(self, module_id: str) -> list[Connection]:
        return [c for c in self.connections if module_id in (c.a, c.b)]


@dataclass(frozen=True)
class PriorityClass:
    """Resource kinds a module class needs, ordered by decreasing scarcity."""

    tag: str
    primary: ResourceKind
    secondary: ResourceKind | None = None
    tertiary: ResourceKind | None = None

    @property
    def kinds(self) -> tuple[ResourceKind, ...]:
        out = [self.primary]
        if self.secondary is not None:
            out.append(self.secondary)
        if self.tertiary is not None:
            out.append(self.tertiary)
        return tuple(out)


PRIORITY_CLASSES = (
    PriorityClass("S1", ResourceKind.DSP, ResourceKind.BRAM, ResourceKind.CLB),
    PriorityClass("S2", ResourceKind.DSP, ResourceKind.CLB),
    PriorityClass("S3", ResourceKind.BRAM, ResourceKind.CLB),
    PriorityClass("S4", ResourceKind.CLB),
)

_CLASS_BY_TAG = {cls.tag: cls for cls in PRIORITY_CLASSES}


def class_of(req: ResourceVector) -> PriorityClass:
    """Priority class for a requirement vector."""
    if req.dsp > 0 and req.bram > 0:
        return _CLASS_BY_TAG["S1"]
    if req.dsp > 0:
        return _CLASS_BY_TAG["S2"]
    if req.bram > 0:
        return _CLASS_BY_TAG["S3"]
    return _CLASS_BY_TAG["S4"]


def classify_modules(design: Design) -> dict[str, list[ModuleSpec]]:
    """Group modules into the four classes, each sorted for processing.

    Sort key: requirement of the class kinds in priority order, then id.
    """
    groups: dict[str, list[ModuleSpec]] = {cls.tag: [] for cls in PRIORITY_CLASSES}
    for module in design.modules:
        groups[class_of(module.req).tag].append(module)
    for tag, members in groups.items():
        kinds = _CLASS_BY_TAG[tag].kinds
        members.sort(key=lambda m: tuple(m.req.of(k) for k in kinds) + (m.id,))
    return groups


def total_frames(design: Design, fabric: Fabric) -> int:
    """Frames needed by all module requirements together."""
    return sum(fabric.frames_of(m.req) for m in design.modules)


def parse_design(text: str) -> Design:
    """Parse a design document.

    Lines: ``module <id> <clb> <bram> <dsp>``, ``connect <idA> <idB>
    <signals>`` and an optional ``weights <alpha> <beta>``. Connections for
    the same unordered pair are merged by summing signals. ``#`` starts a
    comment.
    """
    modules: list[ModuleSpec] = []
    seen_ids: set[str] = set()
    pair_signals: dict[frozenset[str], int] = {}
    pair_order: list[frozenset[str]] = []
    weights: tuple[float, float] | None = None

    def fail(lineno: int, msg: str) -> None:
        raise DesignError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        cut = raw.find("#")
        line = (raw if cut < 0 else raw[:cut]).strip()
        if not line:
            continue
        parts = line.split()
        directive, args = parts[0], parts[1:]
        if directive == "module":
            if len(args) != 4:
                fail(lineno, "expected: module <id> <clb> <bram> <dsp>")
            mid = args[0]
            if mid in seen_ids:
                fail(lineno, f"duplicate module id {mid!r}")
            try:
                req = ResourceVector(*(int(a) for a in args[1:]))
            except ValueError:
                fail(lineno, "requirements must be integers")
            try:
                modules.append(ModuleSpec(mid, req))
            except DesignError as exc:
                fail(lineno, str(exc))
            seen_ids.add(mid)
        elif directive == "connect":
            if len(args) != 3:
                fail(lineno, "expected: connect <idA> <idB> <signals>")
            a, b = args[0], args[1]
            try:
                signals = int(args[2])
            except ValueError:
                fail(lineno, "signal count must be an integer")
            if a == b:
                fail(lineno, f"connection from {a} to itself")
            if signals < 1:
                fail(lineno, "signal count must be positive")
            pair = frozenset((a, b))
            if pair not in pair_signals:
                pair_order.append(pair)
                pair_signals[pair] = 0
            pair_signals[pair] += signals
        elif directive == "weights":
            if len(args) != 2:
                fail(lineno, "expected: weights <alpha> <beta>")
            try:
                weights = (float(args[0]), float(args[1]))
            except ValueError:
                fail(lineno, "weights must be numbers")
        else:
            fail(lineno, f"unknown directive {directive!r}")

    if not modules:
        raise DesignError("design has no modules")
    connections = [
        Connection(*sorted(pair), pair_signals[pair]) for pair in pair_order
    ]
    kwargs = {}
    if weights is not None:
        kwargs = {"alpha": weights[0], "beta": weights[1]}
    return Design(modules, connections, **kwargs)


def write_design(design: Design) -> str:
    """Serialize a design so that it parses back to the same content."""
    lines = []
    for m in design.modules:
        lines.append(f"module {m.id} {m.req.clb} {m.req.bram} {m.req.dsp}")
    for c in design.connections:
        lines.append(f"connect {c.a} {c.b} {c.signals}")
    lines.append(f"weights {design.alpha:g} {design.beta:g}")
    return "\n".join(lines) + "\n"


def _weighted_split(rng: random.Random, amount: int, shares: int) -> list[int]:
    """Split ``amount`` into ``shares`` parts by normalized random weights.

    Weights are uniform in [1, 2]. Fractional parts are floored and the
    remainder goes to the lowest-index parts, so the parts always sum to
    ``amount`` exactly.
    """
    if shares == 0:
        return []
    weights = [1.0 + rng.random() for _ in range(shares)]
    total_weight = sum(weights)
    parts = [math.floor(amount * w / total_weight) for w in weights]
    remainder = amount - sum(parts)
    for i in range(remainder):
        parts[i] += 1
    return parts


def generate_random_design(
    n: int,
    fabric: Fabric,
    occupancy: tuple[float, float, float],
    seed: int,
) -> Design:
    """Generate a pseudo-random design sized against a fabric.

    Per-kind tile targets are ``floor(occupancy * available tiles)``. The
    CLB target is split over all modules with one tile reserved for each up
    front, so no module ends up empty; BRAM and DSP targets go to random
    subsets (each module flagged with probability one half, at least one
    flagged when the target is positive). Any two modules are connected
    with probability ``1/n`` by a 64-signal bus.

    The generator draws from Python's seeded Mersenne Twister in a fixed
    documented order, so one seed always yields the same design.
    """
    if n < 2:
        raise GenerationError("need at least two modules")
    for frac in occupancy:
        if not 0 < frac <= 1:
            raise GenerationError(f"occupancy {frac} outside (0, 1]")

    rng = random.Random(seed)
    avail = fabric.available_resources()
    targets = [math.floor(frac * avail[i]) for i, frac in enumerate(occupancy)]

    clb_target = targets[ResourceKind.CLB.index]
    if clb_target < n:
        raise GenerationError(
            f"CLB target {clb_target} cannot give each of {n} modules a tile"
        )
    clb_parts = _weighted_split(rng, clb_target - n, n)
    reqs = [[1 + part, 0, 0] for part in clb_parts]

    for kind in (ResourceKind.BRAM, ResourceKind.DSP):
        target = targets[kind.index]
        if target == 0:
            continue
        flags = [rng.random() < 0.5 for _ in range(n)]
        if not any(flags):
            flags[int(rng.random() * n)] = True
        flagged = [i for i, f in enumerate(flags) if f]
        for i, part in zip(flagged, _weighted_split(rng, target, len(flagged))):
            reqs[i][kind.index] = part

    width = len(str(n - 1))
    modules = [
        ModuleSpec(f"m{i:0{width}d}", ResourceVector(*req))
        for i, req in enumerate(reqs)
    ]
    connections = []
    p = 1.0 / n
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                connections.append(
                    Connection(modules[i].id, modules[j].id, CONNECTION_SIGNALS)
                )
    return Design(modules, connections)

"""Shared brute-force oracles for the test suite.

These enumerate exhaustively and independently of the production code, so
tests can compare algorithm output against ground truth on small inputs.
"""

from itertools import combinations, product

from tilefp.bipartition import BqpModel
from tilefp.fabric import Fabric, Rect, ResourceVector


def brute_force_rects(fabric, req, ar_bounds):
    """Every rect that covers ``req``, avoids reserved tiles and fits the
    aspect-ratio bounds. Returns a dict rect -> wastage frames."""
    out = {}
    for r0 in range(fabric.rows):
        for r1 in range(r0, fabric.rows):
            for c0 in range(fabric.cols):
                for c1 in range(c0, fabric.cols):
                    rect = Rect(r0, c0, r1, c1)
                    if fabric.reserved_tiles_in(rect):
                        continue
                    res = fabric.resources_in_rect(rect)
                    if not res.covers(req):
                        continue
                    if ar_bounds is not None:
                        ar = rect.width / rect.height
                        if not ar_bounds[0] <= ar <= ar_bounds[1]:
                            continue
                    out[rect] = fabric.frames_of(res - req)
    return out


def first_feasible_assignment(fabric, candidate_lists):
    """First non-overlapping pick across ordered candidate lists, scanning
    index tuples in lexicographic order. Exponential; keep inputs tiny."""
    for combo in product(*(range(len(lst)) for lst in candidate_lists)):
        rects = [lst[i].rect for lst, i in zip(candidate_lists, combo)]
        ok = True
        for i in range(len(rects)):
            if fabric.reserved_tiles_in(rects[i]):
                ok = False
                break
            for j in range(i + 1, len(rects)):
                if rects[i].overlaps(rects[j]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return combo
    return None


def random_fabric(rng, max_rows=4, max_cols=20, reserve_chance=0.3):
    """Small random fabric with mixed columns and sometimes a reserved block."""
    rows = rng.randrange(2, max_rows + 1)
    cols = rng.randrange(6, max_cols + 1)
    kinds = "".join(rng.choice("CCCCCBD") for _ in range(cols))
    if "C" not in kinds:
        kinds = "C" + kinds[1:]
    reserved = []
    if rng.random() < reserve_chance:
        r0 = rng.randrange(rows)
        c0 = rng.randrange(cols)
        r1 = min(rows - 1, r0 + rng.randrange(2))
        c1 = min(cols - 1, c0 + rng.randrange(3))
        reserved.append(Rect(r0, c0, r1, c1))
    return Fabric(rows, kinds, reserved)


def random_requirement(rng, fabric):
    """Requirement that the fabric can in principle satisfy somewhere."""
    avail = fabric.available_resources()
    clb = rng.randrange(1, max(2, avail.clb // 2 + 1))
    bram = rng.randrange(0, max(1, avail.bram // 2) + 1) if rng.random() < 0.5 else 0
    dsp = rng.randrange(0, max(1, avail.dsp // 2) + 1) if rng.random() < 0.5 else 0
    return ResourceVector(clb, bram, dsp)


def random_bqp_model(rng, n_vars):
    """Side-assignment model with random costs and mild capacity pressure."""
    linear = []
    occ0, occ1 = [], []
    for _ in range(n_vars):
        linear.append((float(rng.randint(0, 8)), float(rng.randint(0, 8))))
        occ0.append((rng.randint(0, 3), rng.randint(0, 2), 0))
        occ1.append((rng.randint(0, 3), rng.randint(0, 2), 0))
    pairs = {}
    for i, j in combinations(range(n_vars), 2):
        if rng.random() < 0.4:
            w = [rng.randint(0, 4) for _ in range(4)]
            n = rng.randint(1, 8)
            pairs[(i, j)] = (
                (0.0, float(n * (w[0] + w[3]))),
                (float(n * (w[1] + w[2])), 0.0),
            )
    cap = max(2, (3 * n_vars) // 2)
    return BqpModel(
        variables=[f"m{i}" for i in range(n_vars)],
        linear=linear,
        pairs=pairs,
        const=float(rng.randint(0, 5)),
        occ0=occ0,
        occ1=occ1,
        avail0=(float(cap), float(cap), 1.0),
        avail1=(float(cap), float(cap), 1.0),
    )


def bqp_enumeration_min(model):
    """Brute-force reference: scan every assignment the slow way."""
    best = None
    n = len(model.variables)
    for bits in product((0, 1), repeat=n):
        loads = [[0.0] * 3, [0.0] * 3]
        for i, v in enumerate(bits):
            occ = model.occ0[i] if v == 0 else model.occ1[i]
            for k in range(3):
                loads[v][k] += occ[k]
        if any(loads[0][k] > model.avail0[k] for k in range(3)):
            continue
        if any(loads[1][k] > model.avail1[k] for k in range(3)):
            continue
        cost = model.const
        for i, v in enumerate(bits):
            cost += model.linear[i][v]
        for (i, j), corners in model.pairs.items():
            cost += corners[bits[i]][bits[j]]
        if best is None or cost < best[1]:
            best = (bits, cost)
    return best

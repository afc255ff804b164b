"""Scoring, ordering and backtracking-placer tests."""

import random

import pytest

from tilefp.design import Connection, Design, ModuleSpec
from tilefp.fabric import Rect, ResourceVector, parse_fabric
from tilefp.place import (
    Floorplan,
    PlacementInfeasibleError,
    PlacementTimeoutError,
    floorplan_wastage,
    floorplan_wirelength,
    normalize_candidates,
    order_modules,
    trial_and_error_place,
    write_floorplan,
)
from tilefp.tessellation import PlacementCandidate, generate_placements

from helpers import (
    brute_force_rects,
    first_feasible_assignment,
    random_fabric,
    random_requirement,
)


def cand(rect, wastage, module_id="m"):
    return PlacementCandidate(
        module_id, rect, ResourceVector(1, 0, 0), wastage, rect.center
    )


def sdr_design():
    return Design(
        [
            ModuleSpec("matched_filter", ResourceVector(25, 0, 5)),
            ModuleSpec("carrier_recovery", ResourceVector(7, 0, 1)),
            ModuleSpec("demodulator", ResourceVector(5, 2, 0)),
            ModuleSpec("decoder", ResourceVector(12, 1, 0)),
            ModuleSpec("video_decoder", ResourceVector(55, 2, 5)),
        ],
        [
            Connection("matched_filter", "carrier_recovery", 64),
            Connection("carrier_recovery", "demodulator", 64),
            Connection("demodulator", "decoder", 64),
            Connection("decoder", "video_decoder", 64),
        ],
    )


# --- normalize_candidates ---------------------------------------------------

def test_normalize_extremes_map_to_unit_interval():
    cands = [cand(Rect(0, 0, 0, 1), 0), cand(Rect(0, 4, 0, 5), 72)]
    scored = normalize_candidates(cands, (1.0, 0.5), 1.0, 0.0)
    by_rect = {s.candidate.rect: s for s in scored}
    assert by_rect[Rect(0, 0, 0, 1)].wastage_norm == 0.0
    assert by_rect[Rect(0, 4, 0, 5)].wastage_norm == 1.0


def test_normalize_equidistant_candidates_order_by_wastage():
    cands = [cand(Rect(0, 0, 0, 0), 36), cand(Rect(0, 2, 0, 2), 0)]
    # anchor at the midpoint: both centers are 1 tile away
    scored = normalize_candidates(cands, (1.5, 0.5), 0.5, 0.5)
    assert all(s.anchor_dist_norm == 1.0 for s in scored)
    assert [s.candidate.wastage_frames for s in scored] == [0, 36]


def test_normalize_pure_wastage_mode():
    rng = random.Random(3)
    cands = [
        cand(Rect(0, c, 0, c + rng.randrange(3)), rng.randrange(0, 300))
        for c in range(10)
    ]
    scored = normalize_candidates(cands, (0.0, 0.0), 1.0, 0.0)
    wastes = [s.candidate.wastage_frames for s in scored]
    assert wastes == sorted(wastes)


def test_normalize_zero_maxima_and_tie_break():
    cands = [cand(Rect(0, 2, 0, 2), 0), cand(Rect(0, 0, 0, 0), 0)]
    scored = normalize_candidates(cands, (99.0, 99.0), 1.0, 0.0)
    # wastage norm is zero everywhere, so bottom-left position decides
    assert [s.candidate.rect.col0 for s in scored] == [0, 2]
    assert all(s.objective == 0.0 for s in scored)
    with pytest.raises(ValueError):
        normalize_candidates([], (0.0, 0.0), 1.0, 0.0)


def test_normalize_distance_mode_prefers_near_anchor():
    cands = [cand(Rect(0, c, 0, c), 100 - c) for c in range(6)]
    scored = normalize_candidates(cands, (5.5, 0.5), 0.0, 1.0)
    assert scored[0].candidate.rect.col0 == 5
    assert scored[0].anchor_dist_norm == 0.0


# --- order_modules -----------------------------------------------------------

def test_order_modules_sdr_by_frames():
    fab = parse_fabric("rows 2\ncolumns CBD\n")
    assert order_modules(sdr_design(), fab) == [
        "video_decoder",
        "matched_filter",
        "decoder",
        "carrier_recovery",
        "demodulator",
    ]


def test_order_modules_ties_by_id():
    fab = parse_fabric("rows 2\ncolumns CBD\n")
    design = Design(
        [
            ModuleSpec("b", ResourceVector(2, 0, 0)),
            ModuleSpec("a", ResourceVector(2, 0, 0)),
            ModuleSpec("only", ResourceVector(1, 0, 0)),
        ]
    )
    assert order_modules(design, fab) == ["a", "b", "only"]


# --- trial_and_error_place ---------------------------------------------------

def score_all(cands, anchors=None, alpha=1.0, beta=0.0):
    anchors = anchors or {}
    return {
        m: normalize_candidates(lst, anchors.get(m, (0.0, 0.0)), alpha, beta)
        for m, lst in cands.items()
    }


def test_place_disjoint_best_candidates_no_backtrack():
    fab = parse_fabric("rows 1\ncolumns CCCC\n")
    cands = {
        "a": [cand(Rect(0, 0, 0, 0), 0, "a"), cand(Rect(0, 1, 0, 1), 0, "a")],
        "b": [cand(Rect(0, 2, 0, 2), 0, "b"), cand(Rect(0, 3, 0, 3), 0, "b")],
    }
    scored = score_all(cands)
    rects, backtracks = trial_and_error_place(fab, ["a", "b"], scored)
    assert rects == {"a": Rect(0, 0, 0, 0), "b": Rect(0, 2, 0, 2)}
    assert backtracks == 0


def test_place_collision_takes_next_candidate():
    fab = parse_fabric("rows 1\ncolumns CCC\n")
    cands = {
        "a": [cand(Rect(0, 0, 0, 0), 0, "a")],
        "b": [cand(Rect(0, 0, 0, 0), 0, "b"), cand(Rect(0, 1, 0, 1), 36, "b")],
    }
    scored = score_all(cands)
    rects, backtracks = trial_and_error_place(fab, ["a", "b"], scored)
    assert rects["b"] == Rect(0, 1, 0, 1)
    assert backtracks == 0


def test_place_backtracks_across_depths():
    fab = parse_fabric("rows 1\ncolumns CCCC\n")
    # a's first pick starves b and c; only a's second pick leaves room
    cands = {
        "a": [
            cand(Rect(0, 1, 0, 2), 0, "a"),
            cand(Rect(0, 0, 0, 1), 0, "a"),
        ],
        "b": [cand(Rect(0, 2, 0, 2), 0, "b"), cand(Rect(0, 3, 0, 3), 0, "b")],
        "c": [cand(Rect(0, 3, 0, 3), 0, "c")],
    }
    scored = {m: [ScoredStub(c) for c in lst] for m, lst in cands.items()}
    rects, backtracks = trial_and_error_place(fab, ["a", "b", "c"], scored)
    assert rects == {
        "a": Rect(0, 0, 0, 1),
        "b": Rect(0, 2, 0, 2),
        "c": Rect(0, 3, 0, 3),
    }
    assert backtracks >= 1


class ScoredStub:
    """Bare candidate wrapper preserving list order for placer tests."""

    def __init__(self, candidate):
        self.candidate = candidate


def test_place_matches_exhaustive_first_feasible():
    rng = random.Random(41)
    agreements = 0
    for _ in range(40):
        fab = random_fabric(rng, max_rows=3, max_cols=10)
        lists = []
        ids = []
        for k in range(rng.randint(2, 4)):
            module_id = f"m{k}"
            req = random_requirement(rng, fab)
            pool = [
                PlacementCandidate(module_id, rect, ResourceVector(), w, rect.center)
                for rect, w in sorted(brute_force_rects(fab, req, None).items())[
                    : rng.randint(1, 6)
                ]
            ]
            if not pool:
                break
            ids.append(module_id)
            lists.append(pool)
        if len(lists) < 2:
            continue
        expect = first_feasible_assignment(fab, lists)
        scored = {
            m: [ScoredStub(c) for c in lst] for m, lst in zip(ids, lists)
        }
        if expect is None:
            with pytest.raises(PlacementInfeasibleError):
                trial_and_error_place(fab, ids, scored)
        else:
            rects, _ = trial_and_error_place(fab, ids, scored)
            assert rects == {
                m: lists[k][expect[k]].rect for k, m in enumerate(ids)
            }
        agreements += 1
    assert agreements >= 20


def test_place_zero_budget_times_out():
    fab = parse_fabric("rows 1\ncolumns CC\n")
    cands = {"a": [cand(Rect(0, 0, 0, 0), 0, "a")]}
    scored = score_all(cands)
    with pytest.raises(PlacementTimeoutError):
        trial_and_error_place(fab, ["a"], scored, time_budget=0.0)


def test_place_infeasible_names_blocking_module():
    fab = parse_fabric("rows 1\ncolumns CC\n")
    shared = Rect(0, 0, 0, 1)
    cands = {
        "a": [cand(shared, 0, "a")],
        "b": [cand(shared, 0, "b")],
    }
    scored = score_all(cands)
    with pytest.raises(PlacementInfeasibleError) as err:
        trial_and_error_place(fab, ["a", "b"], scored)
    assert err.value.module_id == "b"
    assert err.value.placed == 1


def test_place_rejects_reserved_rects():
    fab = parse_fabric("rows 1\ncolumns CCC\nreserved 0 0 0 0\n")
    cands = {
        "a": [cand(Rect(0, 0, 0, 0), 0, "a"), cand(Rect(0, 2, 0, 2), 0, "a")],
    }
    scored = score_all(cands)
    rects, _ = trial_and_error_place(fab, ["a"], scored)
    assert rects["a"] == Rect(0, 2, 0, 2)


# --- metrics -----------------------------------------------------------------

def test_wastage_exact_fit_is_zero():
    fab = parse_fabric("rows 1\ncolumns CCB\n")
    design = Design([ModuleSpec("m", ResourceVector(2, 1, 0))])
    assert floorplan_wastage({"m": Rect(0, 0, 0, 2)}, design, fab) == 0


def test_wastage_two_surplus_clb_tiles():
    fab = parse_fabric("rows 1\ncolumns CCCC\n")
    design = Design([ModuleSpec("m", ResourceVector(2, 0, 0))])
    assert floorplan_wastage({"m": Rect(0, 0, 0, 3)}, design, fab) == 72


def test_wirelength_example_and_degenerate_cases():
    design = Design(
        [ModuleSpec("a", ResourceVector(1, 0, 0)), ModuleSpec("b", ResourceVector(1, 0, 0))],
        [Connection("a", "b", 64)],
    )
    # centers (1, 1) and (4, 3)
    placements = {"a": Rect(0, 0, 1, 1), "b": Rect(2, 3, 3, 4)}
    assert placements["a"].center == (1.0, 1.0)
    assert placements["b"].center == (4.0, 3.0)
    assert floorplan_wirelength(placements, design) == 320

    solo = Design([ModuleSpec("a", ResourceVector(1, 0, 0))])
    assert floorplan_wirelength({"a": Rect(0, 0, 1, 1)}, solo) == 0

    coincident = {"a": Rect(0, 0, 1, 1), "b": Rect(0, 0, 1, 1)}
    assert floorplan_wirelength(coincident, design) == 0


def test_wirelength_translation_invariance():
    design = Design(
        [ModuleSpec("a", ResourceVector(1, 0, 0)), ModuleSpec("b", ResourceVector(1, 0, 0))],
        [Connection("a", "b", 7)],
    )
    base = {"a": Rect(0, 0, 1, 1), "b": Rect(2, 3, 3, 4)}
    moved = {
        m: Rect(r.row0 + 2, r.col0 + 5, r.row1 + 2, r.col1 + 5)
        for m, r in base.items()
    }
    assert floorplan_wirelength(base, design) == floorplan_wirelength(moved, design)


# --- document ----------------------------------------------------------------

def test_write_floorplan_document_shape():
    fab = parse_fabric("rows 1\ncolumns CCCC\n")
    design = Design(
        [ModuleSpec("a", ResourceVector(1, 0, 0)), ModuleSpec("b", ResourceVector(2, 0, 0))],
        [Connection("a", "b", 64)],
    )
    rects = {"b": Rect(0, 0, 0, 1), "a": Rect(0, 2, 0, 2)}
    plan = Floorplan(
        rects,
        floorplan_wastage(rects, design, fab),
        floorplan_wirelength(rects, design),
        backtracks=0,
    )
    text = write_floorplan(plan, design, fab, 1.0, 0.0, None)
    lines = text.splitlines()
    assert lines[0] == "mode alpha 1 beta 0 ar off"
    assert lines[1] == "place b 0 0 0 1 2 0 0 0"
    assert lines[2] == "place a 0 2 0 2 1 0 0 0"
    # centers (1.0, 0.5) and (2.5, 0.5): 64 signals over distance 1.5
    assert lines[3] == "total wastage 0 wirelength 96 backtracks 0"
    assert text.endswith("\n")


def test_write_floorplan_ar_bounds_line():
    fab = parse_fabric("rows 2\ncolumns CC\n")
    design = Design([ModuleSpec("a", ResourceVector(1, 0, 0))])
    rects = {"a": Rect(0, 0, 0, 0)}
    plan = Floorplan(rects, 36, 0.0)
    text = write_floorplan(plan, design, fab, 0.5, 0.5, (0.2, 0.7))
    assert text.splitlines()[0] == "mode alpha 0.5 beta 0.5 ar 0.2 0.7"


def test_end_to_end_small_pipeline_is_deterministic():
    fab = parse_fabric("rows 2\ncolumns CCCCBCCD\n")
    design = Design(
        [
            ModuleSpec("a", ResourceVector(2, 1, 0)),
            ModuleSpec("b", ResourceVector(1, 0, 1)),
        ],
        [Connection("a", "b", 16)],
    )
    outputs = []
    for _ in range(2):
        cands = generate_placements(fab, design, ar_bounds=None)
        from tilefp.bipartition import compute_anchors

        anchors = compute_anchors(fab, design, cands)
        scored = {
            m: normalize_candidates(lst, anchors[m], design.alpha, design.beta)
            for m, lst in cands.items()
        }
        order = order_modules(design, fab)
        rects, backtracks = trial_and_error_place(fab, order, scored)
        plan = Floorplan(
            rects,
            floorplan_wastage(rects, design, fab),
            floorplan_wirelength(rects, design),
            backtracks,
        )
        outputs.append(write_floorplan(plan, design, fab, 0.5, 0.5, None))
    assert outputs[0] == outputs[1]
    assert "total wastage" in outputs[0]

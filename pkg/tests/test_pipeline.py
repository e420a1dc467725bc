"""Solve loop: step construction, traces, replay, determinism.

Oracles: structural assertions on generated traces [TRIVIAL/DERIVED],
byte-frozen golden trace [DERIVED], replay round-trip.
"""

import json
import pathlib

import pytest

from musolve import dsl, pipeline, zoo
from musolve import encode as enc
from musolve.mus import SearchConfig

GOLDEN = pathlib.Path(__file__).parent / "golden"


def solve(puzzle, seed=11, **kw):
    return pipeline.solve_puzzle(puzzle, SearchConfig(seed=seed), **kw)


def test_shidoku_trace_is_all_unit_batches(shidoku):
    # [DERIVED] the bundled instance is solvable by singles only
    trace = solve(shidoku)
    assert trace["steps"]
    assert all(s["kind"] == "unit-batch" for s in trace["steps"])
    assert trace["finalGrid"] == {
        pipeline.cell_name(c): v for c, v in sorted(shidoku.solution.items())}


def test_complete_instance_gives_empty_trace(shidoku):
    grid = {c: v for c, v in shidoku.solution.items()}
    rows = []
    for i in range(1, 5):
        rows.append("  [" + ", ".join(
            str(grid[("grid", (i, j))]) for j in range(1, 5)) + "]")
    text = "instance shidoku\nparam fixed = [\n" + ",\n".join(rows) + "\n]\n"
    puzzle = zoo.build("shidoku", instance_text=text)
    trace = solve(puzzle)
    assert trace["steps"] == []
    assert len(trace["finalGrid"]) == 16


def test_trace_replays(shidoku, futoshiki, binairo):
    for puzzle in (shidoku, futoshiki, binairo):
        trace = solve(puzzle)
        grid = pipeline.replay(trace, puzzle)
        assert grid == trace["finalGrid"]


def test_trace_field_order_fixed(shidoku):
    trace = solve(shidoku)
    assert list(trace) == ["puzzle", "seed", "mode", "steps", "finalGrid"]
    step = trace["steps"][0]
    assert list(step) == ["kind", "mus", "deductions"]
    ded = step["deductions"][0]
    assert list(ded) == ["kind", "var", "value", "mus_index"]


def test_golden_trace_bytes(futoshiki):
    # [DERIVED] frozen serialization of a full solve; catches any
    # accidental change to search behavior or trace layout
    got = pipeline.trace_json(solve(futoshiki, seed=11))
    path = GOLDEN / "futoshiki-seed11.json"
    assert got == path.read_text()


def test_deductions_never_touch_solution_values(futoshiki):
    trace = solve(futoshiki)
    sol = {pipeline.cell_name(c): v for c, v in futoshiki.solution.items()}
    for step in trace["steps"]:
        for d in step["deductions"]:
            if d["kind"] == "eliminate":
                assert sol[d["var"]] != d["value"]
            else:
                assert sol[d["var"]] == d["value"]


def test_unit_batch_mus_indices_align(shidoku):
    trace = solve(shidoku)
    for step in trace["steps"]:
        if step["kind"] != "unit-batch":
            continue
        assert len(step["mus"]) == len(step["deductions"])
        for i, d in enumerate(step["deductions"]):
            assert d["mus_index"] == i


def test_determinism_across_worker_counts(futoshiki, binairo):
    for puzzle in (futoshiki, binairo):
        t1 = pipeline.trace_json(pipeline.solve_puzzle(
            puzzle, SearchConfig(seed=3, workers=1)))
        t2 = pipeline.trace_json(pipeline.solve_puzzle(
            puzzle, SearchConfig(seed=3, workers=3)))
        assert t1 == t2


def test_force_explain_true_literal_not_deducible(shidoku):
    search = pipeline.make_search(shidoku, SearchConfig(seed=1))
    try:
        state = pipeline.SolveState(shidoku)
        cell = next(c for c in sorted(state.candidates) if c not in state.known)
        step = pipeline.force_explain(search, state, cell,
                                      shidoku.solution[cell])
        assert step is None
        wrong = next(v for v in shidoku.cell_values(*cell)
                     if v != shidoku.solution[cell]
                     and v in state.candidates[cell])
        step = pipeline.force_explain(search, state, cell, wrong)
        assert step is not None and step.muses
    finally:
        search.close()


def test_manual_chooser_any_choice_still_solves():
    from musolve.cli import solve_with_chooser
    puzzle = zoo.build("thermometers")
    calls = []

    def chooser(options):
        calls.append(len(options))
        return len(options) - 1       # always pick the last option

    trace = solve_with_chooser(puzzle, SearchConfig(seed=2), False,
                               chooser=chooser)
    assert calls, "expected at least one tied-MUS choice"
    pipeline.replay(trace, puzzle)


def test_positive_only_mode_assigns(shidoku):
    trace = pipeline.solve_puzzle(shidoku, SearchConfig(seed=4),
                                  positive_only=True)
    assert trace["mode"] == "positive"
    kinds = {d["kind"] for s in trace["steps"] for d in s["deductions"]}
    assert kinds == {"assign"}
    pipeline.replay(trace, shidoku)

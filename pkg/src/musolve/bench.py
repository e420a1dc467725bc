"""Benchmark harness: compare MUS-search techniques on a fixed step
sequence.

Protocol: each instance is first solved with the deterministic
deletion-based technique ("basic"); the resulting step sequence is then
frozen, and every technique is re-run on the same sequence of states so
all of them face identical queries.  Per state we record wall time, the
smallest MUS size found, the number of candidate literals achieving it
("choices"), and the set of distinct smallest MUSes.

Unit-batch states are excluded from the per-technique replay: the size-1
pass is exact and identical across techniques, so those states add equal
constants to every row while dominating runtime.  Comparisons therefore
happen exactly where the techniques differ.
"""

from __future__ import annotations

import io
import csv
import time
from dataclasses import dataclass, field

from . import pipeline, zoo
from .mus import MusSearch, SearchConfig


@dataclass
class TechniqueResult:
    technique: str
    solved: int = 0                 # instances completing the protocol
    time: float = 0.0               # total find_global_mus wall time
    choices: int = 0                # candidates at the smallest MUS size
    distinct_muses: int = 0         # distinct smallest member sets
    states: int = 0


@dataclass
class FixedSequence:
    """The frozen solve: per-step deductions plus which were standard."""
    puzzle_id: str
    instance_id: str
    steps: list = field(default_factory=list)       # list of Deduction lists
    standard: list = field(default_factory=list)    # parallel bools


def technique_config(technique, base=None):
    base = base or SearchConfig()
    cfg = SearchConfig(**vars(base))
    if technique == "basic":
        # the baseline: one seeded deletion pass per candidate per size
        # round, no chopping -- so it yields (at most) one MUS per
        # candidate where the randomized techniques can surface several
        cfg.algorithm = "basic"
        cfg.attempts = 1
        cfg.core_passthrough = False
    elif technique == "chop":
        cfg.algorithm = "chop"
        cfg.core_passthrough = False
    elif technique == "chop-nocore":
        cfg.algorithm = "chop"
        cfg.core_passthrough = True
    else:
        raise ValueError(f"unknown technique {technique!r}")
    return cfg


def fix_sequence(puzzle, puzzle_id, instance_id, config=None):
    """Solve once with LimitMUS (deletion under the size cap, full
    attempt budget); freeze the step sequence."""
    seq = FixedSequence(puzzle_id, instance_id)
    cfg = technique_config("basic", config)
    cfg.attempts = (config or SearchConfig()).attempts

    def on_step(step, state):
        seq.steps.append(list(step.deductions))
        seq.standard.append(step.kind == "standard")

    pipeline.solve_puzzle(puzzle, cfg, on_step=on_step)
    return seq


def replay_states(puzzle, seq, standard_only=True, max_states=None):
    """Yield (state_assumptions, target_map) along the fixed sequence."""
    state = pipeline.SolveState(puzzle)
    yielded = 0
    for deds, is_standard in zip(seq.steps, seq.standard):
        if (not standard_only) or is_standard:
            if max_states is not None and yielded >= max_states:
                return
            targets = pipeline.candidate_literals(state)
            yield list(state.assumptions), targets
            yielded += 1
        for d in deds:
            state.apply(d)


def run_technique(puzzle, seq, technique, config=None, max_states=None):
    """One technique over the fixed sequence of one instance."""
    cfg = technique_config(technique, config)
    search = pipeline.make_search(puzzle, cfg)
    result = TechniqueResult(technique)
    try:
        for assumptions, targets in replay_states(
                puzzle, seq, max_states=max_states):
            t0 = time.perf_counter()
            dictionary = search.find_global_mus(assumptions, list(targets))
            result.time += time.perf_counter() - t0
            entries = dictionary.smallest_entries()
            result.choices += len(entries)
            result.distinct_muses += len(dictionary.distinct_smallest())
            result.states += 1
        result.solved = 1
    finally:
        search.close()
    return result


DEFAULT_SET = tuple(
    ("sudoku", iid) for iid in
    ("escargot-desk", "inkala2012-desk", "platinum-desk",
     "goldennugget-desk", "eastermonster-desk", "inkala2010-desk"))


def run_benchmark(instances=DEFAULT_SET, techniques=("basic", "chop"),
                  config=None, max_states=None, log=None):
    """Totals per technique across the instance set."""
    totals = {t: TechniqueResult(t) for t in techniques}
    for puzzle_id, instance_id in instances:
        puzzle = zoo.build(puzzle_id, instance_id)
        t0 = time.perf_counter()
        seq = fix_sequence(puzzle, puzzle_id, instance_id, config)
        if log:
            log(f"{puzzle_id}/{instance_id}: sequence fixed, "
                f"{sum(seq.standard)} standard / {len(seq.steps)} steps, "
                f"{time.perf_counter()-t0:.1f}s")
        for technique in techniques:
            r = run_technique(puzzle, seq, technique, config, max_states)
            t = totals[technique]
            t.solved += r.solved
            t.time += r.time
            t.choices += r.choices
            t.distinct_muses += r.distinct_muses
            t.states += r.states
            if log:
                log(f"  {technique}: {r.time:.1f}s choices={r.choices} "
                    f"distinct={r.distinct_muses} states={r.states}")
    return totals


def benchmark_csv(totals):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["technique", "solved", "time_s", "choices", "distinct_muses"])
    for t in totals.values():
        w.writerow([t.technique, t.solved, f"{t.time:.2f}",
                    t.choices, t.distinct_muses])
    return buf.getvalue()


def run_benchmark_csv(config=None):
    return benchmark_csv(run_benchmark(config=config))

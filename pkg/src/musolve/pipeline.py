"""Step-by-step solve loop with explained deductions.

Each loop iteration finds the smallest MUS over every candidate
deduction, picks the best step (fewest constraints, then smallest scope,
then most literals eliminated, then lexicographic on the descriptions),
extends it to every other literal the same MUS justifies, applies the
deductions, and records the step.  Size-1 MUSes are special-cased: when
any exist, all of them are applied in one batch step.

The trace is deterministic for a given (puzzle, seed, mode) regardless
of worker count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import encode as enc
from .mus import Mus, MusSearch, SearchConfig, Refuter, is_minimal


@dataclass
class Deduction:
    kind: str              # "eliminate" | "assign"
    cell: tuple            # (name, index)
    value: int
    mus_index: int = 0


@dataclass
class ExplanationStep:
    kind: str              # "unit-batch" | "standard"
    muses: list            # list of Mus
    deductions: list       # list of Deduction


class SolveState:
    """Live candidate sets for every problem cell.

    Applied deductions become assumption literals for later MUS queries;
    a cell whose candidate set shrinks to one value is marked known.
    """

    def __init__(self, puzzle):
        self.puzzle = puzzle
        self.candidates = {}
        self.known = {}
        self.assumptions = []
        for cell in puzzle.var_cells():
            self.candidates[cell] = set(puzzle.cell_values(*cell))
        fixed = enc.level0_assignment(puzzle)
        for cell in sorted(self.candidates):
            for v in sorted(puzzle.cell_values(*cell)):
                lit = puzzle.litmap.direct(cell[0], cell[1], v)
                if fixed.get(lit) is False:
                    self.candidates[cell].discard(v)
            if len(self.candidates[cell]) == 1:
                self._mark_known(cell)

    def _mark_known(self, cell):
        (v,) = self.candidates[cell]
        if cell in self.known:
            return
        self.known[cell] = v
        self.assumptions.append(
            self.puzzle.litmap.direct(cell[0], cell[1], v))

    def solved(self):
        return len(self.known) == len(self.candidates)

    def total_candidates(self):
        return sum(len(c) for c in self.candidates.values())

    def eliminate(self, cell, value):
        if value == self.puzzle.solution[cell]:
            raise AssertionError(
                f"attempted to eliminate the solution value {value} of {cell}")
        if value in self.candidates[cell]:
            self.candidates[cell].discard(value)
            self.assumptions.append(
                -self.puzzle.litmap.direct(cell[0], cell[1], value))
            if len(self.candidates[cell]) == 1:
                self._mark_known(cell)

    def assign(self, cell, value):
        if value != self.puzzle.solution[cell]:
            raise AssertionError(
                f"attempted to assign non-solution value {value} to {cell}")
        if cell not in self.known:
            self.candidates[cell] = {value}
            self._mark_known(cell)

    def apply(self, deduction):
        if deduction.kind == "eliminate":
            self.eliminate(deduction.cell, deduction.value)
        else:
            self.assign(deduction.cell, deduction.value)


def candidate_literals(state, positive_only=False):
    """Map from refutation-target literal to the deduction it would prove.

    Default mode: asserting cell=value for a live non-solution value; its
    refutation eliminates the value.  Positive-only mode: asserting
    cell != solution for an unsolved cell; its refutation assigns it.
    """
    puzzle = state.puzzle
    out = {}
    for cell in sorted(state.candidates):
        if cell in state.known:
            continue
        sol = puzzle.solution[cell]
        if positive_only:
            lit = puzzle.litmap.direct(cell[0], cell[1], sol)
            out[-lit] = Deduction("assign", cell, sol)
        else:
            for v in sorted(state.candidates[cell]):
                if v == sol:
                    continue
                lit = puzzle.litmap.direct(cell[0], cell[1], v)
                out[lit] = Deduction("eliminate", cell, v)
    return out


def reuse_mus(search, state, mus, targets, exclude):
    """Other live deduction targets justified by the same member set.

    Only literals inside the union of the members' scopes are candidates;
    each must be refuted by the member set minimally.
    """
    puzzle = state.puzzle
    scope_union = set()
    for act in mus.members:
        scope_union |= puzzle.con_by_act(act).scope
    extras = []
    for lit in sorted(targets):
        if lit == exclude:
            continue
        ded = targets[lit]
        if (ded.cell, ded.value) not in scope_union:
            continue
        ref = Refuter(search.main_engine, list(state.assumptions) + [lit])
        if is_minimal(ref, mus.members):
            extras.append(lit)
    return extras


def ranked_choices(search, state, dictionary, targets):
    """All tied-smallest MUSes ranked by the selection ordering:
    fewest constraints, then smallest scope union, then most eliminated
    literals (after reuse expansion), then lexicographic descriptions."""
    puzzle = state.puzzle
    ranked = []
    for lit, mus in dictionary.smallest_entries():
        extras = reuse_mus(search, state, mus, targets, exclude=lit)
        scope_union = set()
        descriptions = []
        for act in sorted(mus.members):
            con = puzzle.con_by_act(act)
            scope_union |= con.scope
            descriptions.append(con.description)
        key = (len(mus.members), len(scope_union), -(1 + len(extras)),
               "\n".join(sorted(descriptions)))
        ranked.append((key, lit, mus, extras))
    ranked.sort(key=lambda r: r[0])
    return ranked


def select_best(search, state, dictionary, targets):
    _, lit, mus, extras = ranked_choices(search, state, dictionary,
                                         targets)[0]
    return lit, mus, extras


def choice_summary(state, lit, mus, extras, targets):
    """Human/JSON-facing description of one manual-mode option."""
    puzzle = state.puzzle
    deds = [targets[l] for l in [lit] + extras]
    return {
        "deductions": [{"kind": d.kind, "var": cell_name(d.cell),
                        "value": d.value} for d in deds],
        "mus": [puzzle.con_by_act(a).description
                for a in sorted(mus.members)],
    }


def build_step(search, state, dictionary, targets, chooser=None):
    """One explanation step from a MUS dictionary (not yet applied).

    ``chooser`` (manual mode) is called with the list of tied-smallest
    option summaries and must return an index into it; size-1 batches
    never offer a choice.
    """
    if dictionary.smallest == 1:
        muses = []
        deductions = []
        for lit, mus in sorted(dictionary.muses.items()):
            if len(mus.members) != 1:
                continue
            deduction = targets[lit]
            deduction.mus_index = len(muses)
            muses.append(mus)
            deductions.append(deduction)
        return ExplanationStep("unit-batch", muses, deductions)
    if chooser is not None:
        ranked = ranked_choices(search, state, dictionary, targets)
        options = [choice_summary(state, lit, mus, extras, targets)
                   for _, lit, mus, extras in ranked]
        picked = ranked[chooser(options)]
        _, lit, mus, extras = picked
    else:
        lit, mus, extras = select_best(search, state, dictionary, targets)
    deductions = []
    for l in [lit] + extras:
        d = targets[l]
        d.mus_index = 0
        deductions.append(d)
    deductions.sort(key=lambda d: (d.cell, d.value))
    return ExplanationStep("standard", [mus], deductions)


def make_search(puzzle, config=None, backend="auto"):
    """MusSearch over a puzzle's clause database.

    The known solution seeds every engine's branching polarity, which
    makes the frequent "does this subset still refute?" queries converge
    in a few conflicts instead of hundreds.
    """
    hints = [puzzle.litmap.direct(cell[0], cell[1], v)
             for cell, v in sorted(puzzle.solution.items())]
    return MusSearch(puzzle.clauses, puzzle.num_vars,
                     puzzle.activation_ids(), config, backend=backend,
                     polarity_hints=hints,
                     model_vars=set(puzzle.litmap.forward.values()))


def solve_puzzle(puzzle, config=None, positive_only=False, backend="auto",
                 on_step=None, search=None, max_steps=None):
    """Solve to completion (or for ``max_steps`` steps), returning the
    Trace dict."""
    config = config or SearchConfig()
    own_search = search is None
    if search is None:
        search = make_search(puzzle, config, backend=backend)
    state = SolveState(puzzle)
    steps = []
    try:
        while not state.solved():
            if max_steps is not None and len(steps) >= max_steps:
                break
            targets = candidate_literals(state, positive_only)
            if not targets:
                break
            before = state.total_candidates()
            dictionary = search.find_global_mus(
                list(state.assumptions), list(targets))
            if not dictionary.muses:
                break   # nothing under the size cap: stop with a partial trace
            step = build_step(search, state, dictionary, targets)
            for d in step.deductions:
                state.apply(d)
            assert state.total_candidates() < before, "step made no progress"
            steps.append(step)
            if on_step is not None:
                on_step(step, state)
    finally:
        if own_search:
            search.close()
    return make_trace(puzzle, config, positive_only, steps, state)


def force_explain(search, state, cell, value, positive_only=False):
    """Explain one specific deduction without applying it.

    Returns an ExplanationStep, or None when the deduction target is not
    refutable (e.g. trying to eliminate the true value).
    """
    puzzle = state.puzzle
    targets = candidate_literals(state, positive_only)
    wanted = None
    for lit, ded in targets.items():
        if ded.cell == cell and ded.value == value:
            wanted = lit
            break
    if wanted is None:
        return None
    mus = search.force_search(list(state.assumptions), wanted)
    if mus is None:
        return None
    deduction = targets[wanted]
    deduction.mus_index = 0
    return ExplanationStep("standard", [mus], [deduction])


# ---------------------------------------------------------------------------
# Trace serialization


def cell_name(cell):
    name, idx = cell
    return f"{name}[{','.join(str(i) for i in idx)}]"


def parse_cell_name(text):
    name, rest = text.split("[", 1)
    idx = tuple(int(p) for p in rest.rstrip("]").split(","))
    return (name, idx)


def _mus_json(puzzle, mus):
    out = []
    for act in sorted(mus.members):
        con = puzzle.con_by_act(act)
        out.append({
            "id": act,
            "description": con.description,
            "scope": [[cell_name(cell), value]
                      for cell, value in sorted(con.scope)],
        })
    return out


def step_json(puzzle, step):
    return {
        "kind": step.kind,
        # one flat list of constraint entries; for unit-batch steps each
        # size-1 MUS contributes one entry and deductions point at
        # theirs via mus_index
        "mus": [item for m in step.muses for item in _mus_json(puzzle, m)],
        "deductions": [
            {"kind": d.kind, "var": cell_name(d.cell), "value": d.value,
             "mus_index": d.mus_index}
            for d in step.deductions
        ],
    }


def make_trace(puzzle, config, positive_only, steps, state):
    return {
        "puzzle": puzzle.model.spec.name,
        "seed": config.seed,
        "mode": "positive" if positive_only else "default",
        "steps": [step_json(puzzle, s) for s in steps],
        "finalGrid": {cell_name(c): v
                      for c, v in sorted(state.known.items())},
    }


def trace_json(trace):
    return json.dumps(trace, indent=2, sort_keys=False) + "\n"


def replay(trace, puzzle):
    """Re-apply a trace's deductions from scratch; verify the final grid.

    Returns the reconstructed final grid dict; raises if any deduction is
    inapplicable or the result differs from the recorded grid.
    """
    state = SolveState(puzzle)
    for step in trace["steps"]:
        for d in step["deductions"]:
            cell = parse_cell_name(d["var"])
            state.apply(Deduction(d["kind"], cell, d["value"]))
    grid = {cell_name(c): v for c, v in sorted(state.known.items())}
    if grid != trace["finalGrid"]:
        raise AssertionError("replay did not reproduce the recorded grid")
    if not state.solved():
        raise AssertionError("replay did not solve the puzzle")
    return grid

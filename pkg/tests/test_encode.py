"""CNF encoder: decomposition counts, removal passes, scopes, and the
semantic property probes.

Oracles: combinatorial counts [TRIVIAL], brute-force enumeration for the
two-solution witness [DERIVED], published examples [PAPER], and the
independent formula evaluator for the property probes [DERIVED].
"""

import random

import pytest

from musolve import dsl, zoo
from musolve import encode as enc
from musolve.sat import Engine, SAT

import probes


def build_text(spec_src, inst_src, verify=True):
    spec = dsl.parse_spec(spec_src)
    inst = dsl.parse_instance(inst_src, spec)
    return enc.encode(dsl.ground(spec, inst), verify=verify)


# -- alldifferent decomposition --------------------------------------------

ALLDIFF_SPEC = """
puzzle ad
@VAR find grid : [1..{n}] of 1..{m}
@CON find c : [1..1] of bool
template c "cells {{c1}} and {{c2}} cannot both be {{d}}" "some cell must be {{d}}"
such that forall i : 1..1 . c[i] -> alldifferent([grid[j] | j : 1..{n}])
"""


def alldiff_counts(n, m):
    puzzle = build_text(ALLDIFF_SPEC.format(n=n, m=m), "instance ad\n",
                        verify=False)
    fams = [c.index for c in puzzle.cons if c.family == "c"]
    alo = sum(1 for idx in fams if idx[-3:-1] == (-1, -1))
    pair = len(fams) - alo
    return pair, alo


def test_alldiff_9_vars_9_values():
    # [TRIVIAL] C(9,2)*9 pairwise + 9 at-least-one
    assert alldiff_counts(9, 9) == (324, 9)


def test_alldiff_3_vars_9_values():
    # [PAPER] no at-least-one side when cells and values are not in
    # bijection ("could not consider hidden singles")
    assert alldiff_counts(3, 9) == (27, 0)


def test_alldiff_1_var():
    assert alldiff_counts(1, 3) == (0, 0)


def test_pairwise_constraint_single_clause(shidoku):
    # [PAPER] one clause {-act, -(x=d), -(y=d)} per pairwise piece
    con = next(c for c in shidoku.cons
               if c.family == "con_ad" and len(c.origins) == 1)
    assert len(con.clause_ids) == 1
    clause = shidoku.clauses[con.clause_ids[0]]
    body = [l for l in clause if l != -con.act]
    assert len(body) == 2 and all(l < 0 for l in body)


# -- uniqueness verification ------------------------------------------------

LATIN2 = """
puzzle latin2
@VAR find grid : [1..2, 1..2] of 1..2
@CON find row : [1..2] of bool
template row "row {a[0]} alldiff" "row {a[0]} complete"
@CON find col : [1..2] of bool
template col "col {a[0]} alldiff" "col {a[0]} complete"
such that forall i : 1..2 . row[i] -> alldifferent([grid[i, j] | j : 1..2])
such that forall j : 1..2 . col[j] -> alldifferent([grid[i, j] | i : 1..2])
"""


def test_two_solution_instance_rejected_with_witness():
    # [DERIVED] a blank 2x2 Latin square has exactly two solutions
    with pytest.raises(enc.NonUniqueError) as err:
        build_text(LATIN2, "instance latin2\n")
    assert err.value.witness is not None
    cell, v1, v2 = err.value.witness
    assert v1 != v2


# -- counting splits --------------------------------------------------------

COUNT_SPEC = """
puzzle cnt
param k : [1..1] of 0..3
@VAR find g : [1..3] of 0..1
@CON find h : [1..1] of bool
template h "at most {k[1]} ones" "at least {k[1]} ones"
such that forall i : 1..1 . h[i] -> count([g[j] | j : 1..3], 1) = k[1]
"""


def count_halves(k):
    puzzle = build_text(COUNT_SPEC, f"instance cnt\nparam k = [{k}]\n",
                        verify=False)
    return [c.description for c in puzzle.cons if c.family == "h"]


def test_count_split_into_two_described_halves():
    halves = count_halves(2)
    assert sorted(halves) == ["at least 2 ones", "at most 2 ones"]


def test_count_zero_drops_ge_side():
    # [TRIVIAL] ">= 0" is vacuous and removed as trivial
    assert count_halves(0) == ["at most 0 ones"]


def test_count_full_drops_le_side():
    # [TRIVIAL] "<= capacity" is vacuous and removed as trivial
    assert count_halves(3) == ["at least 3 ones"]


# -- removal passes ---------------------------------------------------------

def test_no_clause_free_activations(shidoku, futoshiki, binairo):
    for puzzle in (shidoku, futoshiki, binairo):
        for con in puzzle.cons:
            assert con.clause_ids, (con.family, con.index)


def test_givens_make_row_pairs_trivial(sudoku_newspaper):
    # [PAPER] the given 5 at (1,1): row pairs pinning 5 against (1,1)
    # are settled at level 0 and removed
    surviving = {c.index for c in sudoku_newspaper.cons
                 if c.family == "con_ad"}
    all_ground = {idx for (fam, idx) in sudoku_newspaper.ground_formulas
                  if fam == "con_ad"}
    removed = all_ground - {i for c in sudoku_newspaper.cons
                            for (f, i, _) in c.origins if f == "con_ad"}
    assert any(idx[0] == 1 and idx[3] == 5 and 1 in (idx[1], idx[2])
               for idx in removed)
    assert surviving  # but plenty remain


def test_dedup_merges_row_and_box_pair(sudoku_newspaper):
    # [PAPER] cells (1,1),(1,2) value d: row-pair and box-pair encode the
    # same clause, one activation survives carrying both origins
    merged = [c for c in sudoku_newspaper.cons if len(c.origins) > 1]
    assert merged
    fams = {frozenset(f for f, _, _ in c.origins) for c in merged}
    assert any({"con_ad", "con_box"} <= s for s in fams)


def test_dedup_is_a_fixpoint(shidoku):
    before = [(c.act, tuple(c.clause_ids)) for c in shidoku.cons]
    again = enc.dedup_identical(shidoku)
    assert [(c.act, tuple(c.clause_ids)) for c in again.cons] == before


# -- scope ------------------------------------------------------------------

def test_pairwise_scope(shidoku):
    con = next(c for c in shidoku.cons
               if c.family == "con_ad" and len(c.origins) == 1)
    d = con.index[3]
    cells = {cell for cell, v in con.scope}
    values = {v for _, v in con.scope}
    assert values == {d}
    assert len(cells) == 2


def test_scope_covers_only_mentioned_cells(binairo):
    for con in binairo.cons[:40]:
        cells = {cell for cell, _ in con.scope}
        assert cells, con.description
        # every scoped cell belongs to the problem grid or aux cells
        names = {c[0] for c in cells}
        assert names <= {n for n, *_ in
                         [(nm, i) for nm, i, _, _ in binairo.model.cells]}


# -- semantic properties (small budget; acceptance runs the full one) ------

@pytest.mark.parametrize("pid", ["shidoku", "futoshiki", "binairo", "tents",
                                 "thermometers", "skyscrapers"])
def test_property_probes_small(pid):
    puzzle = zoo.build(pid)
    n, violations = probes.run_all_probes(puzzle, 100, seed=42)
    assert violations == []


def test_one_way_implication_explicit(shidoku):
    # every activation can be off in some model: v -> c, never v <-> c
    eng = Engine(shidoku.clauses, shidoku.num_vars)
    rng = random.Random(3)
    for act in rng.sample(shidoku.activation_ids(), 25):
        assert eng.solve([-act]).status == SAT

"""Model fidelity: the verified solution of each bundled instance
satisfies the intended puzzle rules, checked by independent Python
re-implementations of those rules.

Oracles: hand-written rule checkers over ``puzzle.solution`` [DERIVED];
given-clue agreement against the instance bindings [TRIVIAL].
"""

import pytest

from musolve import zoo


def grid_of(puzzle, name="grid"):
    cells = {idx: v for (nm, idx), v in puzzle.solution.items() if nm == name}
    assert cells
    return cells


def bindings(pid, iid=None):
    entry = zoo.get_entry(pid)
    iid = iid or entry.instances[0].id
    return zoo.load_instance(pid, iid).bindings


# -- sudoku family -----------------------------------------------------------

def latin_checks(g, n):
    for i in range(1, n + 1):
        assert sorted(g[(i, j)] for j in range(1, n + 1)) == list(range(1, n + 1))
        assert sorted(g[(j, i)] for j in range(1, n + 1)) == list(range(1, n + 1))


def box_checks(g):
    for br in range(3):
        for bc in range(3):
            vals = sorted(g[(3 * br + p, 3 * bc + q)]
                          for p in range(1, 4) for q in range(1, 4))
            assert vals == list(range(1, 10))


def test_sudoku_newspaper_solution(sudoku_newspaper):
    g = grid_of(sudoku_newspaper)
    latin_checks(g, 9)
    box_checks(g)
    fixed = bindings("sudoku", "newspaper")["fixed"]
    for i in range(1, 10):
        for j in range(1, 10):
            if fixed[i - 1][j - 1]:
                assert g[(i, j)] == fixed[i - 1][j - 1]


def test_x_sudoku_diagonals():
    g = grid_of(zoo.build("x-sudoku"))
    latin_checks(g, 9)
    box_checks(g)
    assert sorted(g[(i, i)] for i in range(1, 10)) == list(range(1, 10))
    assert sorted(g[(i, 10 - i)] for i in range(1, 10)) == list(range(1, 10))


def test_jigsaw_sudoku_regions():
    g = grid_of(zoo.build("jigsaw-sudoku"))
    latin_checks(g, 9)
    region = bindings("jigsaw-sudoku")["region"]
    by_region = {}
    for i in range(1, 10):
        for j in range(1, 10):
            by_region.setdefault(region[i - 1][j - 1], []).append(g[(i, j)])
    assert len(by_region) == 9
    for vals in by_region.values():
        assert sorted(vals) == list(range(1, 10))


def test_miracle_sudoku_rules():
    puzzle = zoo.build("miracle-sudoku")
    g = grid_of(puzzle)
    latin_checks(g, 9)
    box_checks(g)
    fixed = bindings("miracle-sudoku")["fixed"]
    givens = [(i, j, fixed[i - 1][j - 1])
              for i in range(1, 10) for j in range(1, 10)
              if fixed[i - 1][j - 1]]
    assert len(givens) == 2          # the famous two-given instance
    for i, j, v in givens:
        assert g[(i, j)] == v
    for (i1, j1), v1 in g.items():
        for (i2, j2), v2 in g.items():
            if (i1, j1) >= (i2, j2):
                continue
            di, dj = abs(i1 - i2), abs(j1 - j2)
            if {di, dj} == {1}:                      # king's move (diagonal)
                assert v1 != v2
            if {di, dj} == {1, 2}:                   # knight's move
                assert v1 != v2
            if di + dj == 1:                         # orthogonal neighbours
                assert abs(v1 - v2) != 1


# -- binary / placement puzzles ---------------------------------------------

def test_binairo_rules(binairo):
    g = grid_of(binairo)
    for i in range(1, 7):
        assert sum(g[(i, j)] for j in range(1, 7)) == 3
        assert sum(g[(j, i)] for j in range(1, 7)) == 3
        for j in range(1, 5):
            assert len({g[(i, j)], g[(i, j + 1)], g[(i, j + 2)]}) > 1
            assert len({g[(j, i)], g[(j + 1, i)], g[(j + 2, i)]}) > 1
    rows = [tuple(g[(i, j)] for j in range(1, 7)) for i in range(1, 7)]
    cols = [tuple(g[(i, j)] for i in range(1, 7)) for j in range(1, 7)]
    assert len(set(rows)) == 6 and len(set(cols)) == 6
    fixed = bindings("binairo")["fixed"]
    for i in range(1, 7):
        for j in range(1, 7):
            if fixed[i - 1][j - 1] != 2:
                assert g[(i, j)] == fixed[i - 1][j - 1]


def test_tents_rules():
    g = grid_of(zoo.build("tents"))
    b = bindings("tents")
    trees = {t: (b["treerow"][t - 1], b["treecol"][t - 1])
             for t in range(1, 8) if b["treerow"][t - 1]}
    # tree cells carry -t, every tree has exactly one tent labelled t,
    # and that tent is orthogonally adjacent to its tree
    for t, (tr, tc) in trees.items():
        assert g[(tr, tc)] == -t
        tents = [(i, j) for (i, j), v in g.items() if v == t]
        assert len(tents) == 1
        (i, j), = tents
        assert abs(i - tr) + abs(j - tc) == 1
    tent_cells = [(i, j) for (i, j), v in g.items() if v >= 1]
    assert len(tent_cells) == len(trees)
    for a in tent_cells:
        for c in tent_cells:
            if a < c:
                assert max(abs(a[0] - c[0]), abs(a[1] - c[1])) > 1
    for i in range(1, 7):
        if b["rowhint"][i - 1] != -1:
            assert sum(1 for (r, _) in tent_cells if r == i) == b["rowhint"][i - 1]
        if b["colhint"][i - 1] != -1:
            assert sum(1 for (_, c) in tent_cells if c == i) == b["colhint"][i - 1]


def test_starbattle_rules():
    g = grid_of(zoo.build("starbattle"), name="star")
    b = bindings("starbattle")
    k = b["stars"][0]
    region = b["region"]
    stars = [(i, j) for (i, j), v in g.items() if v == 1]
    for i in range(1, 9):
        assert sum(1 for (r, _) in stars if r == i) == k
        assert sum(1 for (_, c) in stars if c == i) == k
    by_region = {}
    for (i, j) in stars:
        by_region[region[i - 1][j - 1]] = by_region.get(region[i - 1][j - 1], 0) + 1
    assert all(v == k for v in by_region.values()) and len(by_region) == 8
    for a in stars:
        for c in stars:
            if a < c:
                assert max(abs(a[0] - c[0]), abs(a[1] - c[1])) > 1


def test_skyscrapers_visibility():
    g = grid_of(zoo.build("skyscrapers"))
    b = bindings("skyscrapers")

    def visible(line):
        best, n = 0, 0
        for v in line:
            if v > best:
                best, n = v, n + 1
        return n

    for i in range(1, 6):
        row = [g[(i, j)] for j in range(1, 6)]
        col = [g[(j, i)] for j in range(1, 6)]
        assert sorted(row) == sorted(col) == [1, 2, 3, 4, 5]
        if b["left"][i - 1]:
            assert visible(row) == b["left"][i - 1]
        if b["right"][i - 1]:
            assert visible(row[::-1]) == b["right"][i - 1]
        if b["top"][i - 1]:
            assert visible(col) == b["top"][i - 1]
        if b["bottom"][i - 1]:
            assert visible(col[::-1]) == b["bottom"][i - 1]


# -- line puzzles ------------------------------------------------------------

def test_futoshiki_inequalities(futoshiki):
    g = grid_of(futoshiki)
    latin_checks(g, 5)
    b = bindings("futoshiki")
    signs = 0
    for i in range(1, 6):
        for j in range(1, 5):
            if b["hsign"][i - 1][j - 1] == 1:
                assert g[(i, j)] > g[(i, j + 1)]
            elif b["hsign"][i - 1][j - 1] == 2:
                assert g[(i, j)] < g[(i, j + 1)]
            if b["vsign"][j - 1][i - 1] == 1:
                assert g[(j, i)] > g[(j + 1, i)]
            elif b["vsign"][j - 1][i - 1] == 2:
                assert g[(j, i)] < g[(j + 1, i)]
            signs += (b["hsign"][i - 1][j - 1] != 0) + \
                     (b["vsign"][j - 1][i - 1] != 0)
    assert signs


def test_thermometers_monotone():
    g = grid_of(zoo.build("thermometers"), name="fill")
    b = bindings("thermometers")
    for i in range(1, 7):
        for j in range(1, 7):
            if b["onth"][i - 1][j - 1] == 0:
                assert g[(i, j)] == 0
            pr, pc = b["prevr"][i - 1][j - 1], b["prevc"][i - 1][j - 1]
            if pr and g[(i, j)] == 1:
                assert g[(pr, pc)] == 1         # mercury fills from the bulb
        if b["rowhint"][i - 1] != -1:
            assert sum(g[(i, j)] for j in range(1, 7)) == b["rowhint"][i - 1]
        if b["colhint"][i - 1] != -1:
            assert sum(g[(j, i)] for j in range(1, 7)) == b["colhint"][i - 1]


def test_kakuro_sums():
    g = grid_of(zoo.build("kakuro"), name="grid")
    b = bindings("kakuro")
    for key, sums in (("hrunid", "hsum"), ("vrunid", "vsum")):
        runs = {}
        for i in range(1, 8):
            for j in range(1, 8):
                r = b[key][i - 1][j - 1]
                if r:
                    runs.setdefault(r, []).append(g[(i, j)])
        assert runs
        for r, digits in runs.items():
            assert all(1 <= d <= 9 for d in digits)
            assert len(set(digits)) == len(digits)   # no repeats in a run
            assert sum(digits) == b[sums][r - 1]
    for i in range(1, 8):
        for j in range(1, 8):
            if b["active"][i - 1][j - 1] == 0:
                assert g[(i, j)] == 0

"""MUS search: deletion minimization, chop parameters, randomized
search, exact size-1 pass, and the global search against brute force.

Oracles: exhaustive subset enumeration on planted instances [DERIVED],
the published chop numbers [PAPER], direct assertions [TRIVIAL].
"""

import itertools
import random

import pytest

from musolve.mus import (MusSearch, SearchConfig, Refuter, chop_params,
                         delete_mus, limit_mus, many_chop, is_minimal)
from musolve.sat import Engine


def planted_problem(n_extra=20, mus_size=3, seed=1):
    """A group CNF whose only MUS (against target literal t) has
    ``mus_size`` members: acts a1..ak guard x1..xk and one guard forbids
    their conjunction; extra acts guard free tautology-ish clauses."""
    rng = random.Random(seed)
    nv = 0

    def var():
        nonlocal nv
        nv += 1
        return nv

    t = var()
    xs = [var() for _ in range(mus_size - 1)]
    acts = []
    clauses = []
    # act_i: t -> x_i   (i.e. -act v -t v x_i)
    for x in xs:
        a = var()
        acts.append(a)
        clauses.append([-a, -t, x])
    # final act: not all xs (with t) -- closes the refutation
    a = var()
    acts.append(a)
    clauses.append([-a, -t] + [-x for x in xs])
    planted = list(acts)
    # distractors: implications over fresh variables, never contradictory
    for _ in range(n_extra):
        a = var()
        acts.append(a)
        u, v = var(), var()
        clauses.append([-a, -u, v])
    rng.shuffle(acts)
    return clauses, nv, acts, planted, t


def brute_min_mus(clauses, nv, acts, t, max_k=5):
    eng = Engine(clauses, nv)
    for k in range(1, max_k + 1):
        for subset in itertools.combinations(sorted(acts), k):
            if eng.solve([t] + list(subset)).status != "sat":
                return set(subset)
    return None


# -- chop parameters ---------------------------------------------------------

def test_chop_params_match_published_numbers():
    # [PAPER] max_size=5: remove 1/4 per chop, i.e. step=2, keep 3/4
    p = chop_params(5)
    assert p.step == 2
    assert p.frac == 0.75
    assert p.attempts == 20


def test_chop_params_survival_floor_holds():
    for size in range(1, 12):
        p = chop_params(size)
        assert p.frac ** size >= 0.1
        if p.step > 1:  # the step is minimal
            assert (1 - 0.5 ** (p.step - 1)) ** size < 0.1


def test_planted_mus_survival_rate_quick():
    # [PAPER] ~23.7% of single chops keep a planted size-5 MUS alive
    rng = random.Random(7)
    p = chop_params(5)
    pool = list(range(1000))
    planted = set(rng.sample(pool, 5))
    keep = round(p.frac * len(pool))
    hits = sum(planted <= set(rng.sample(pool, keep)) for _ in range(2000))
    assert 0.19 <= hits / 2000 <= 0.29


# -- deletion & limit --------------------------------------------------------

def test_delete_mus_finds_planted():
    clauses, nv, acts, planted, t = planted_problem()
    eng = Engine(clauses, nv)
    ref = Refuter(eng, [t])
    mus = delete_mus(ref, acts, random.Random(3))
    assert set(mus) == set(planted)


def test_limit_mus_respects_cap():
    clauses, nv, acts, planted, t = planted_problem(mus_size=4)
    eng = Engine(clauses, nv)
    ref = Refuter(eng, [t])
    assert limit_mus(ref, acts, 2, random.Random(3)) is None
    found = limit_mus(ref, acts, 4, random.Random(3))
    assert set(found) == set(planted)


def test_many_chop_finds_planted():
    clauses, nv, acts, planted, t = planted_problem(n_extra=60)
    eng = Engine(clauses, nv)
    ref = Refuter(eng, [t])
    hits = 0
    for seed in range(10):
        out = many_chop(ref, acts, 3, random.Random(seed))
        if out is not None:
            assert set(out) == set(planted)
            hits += 1
    assert hits >= 5   # survival odds are far above floor at this size


def test_is_minimal():
    clauses, nv, acts, planted, t = planted_problem()
    eng = Engine(clauses, nv)
    ref = Refuter(eng, [t])
    assert is_minimal(ref, planted)
    assert not is_minimal(ref, acts)              # not minimal
    assert not is_minimal(ref, planted[:-1])      # not refuting


# -- MusSearch over a real puzzle ---------------------------------------------

@pytest.fixture(scope="module")
def shidoku_search():
    from musolve import zoo, pipeline
    puzzle = zoo.build("shidoku")
    search = pipeline.make_search(puzzle, SearchConfig(seed=11))
    state = pipeline.SolveState(puzzle)
    targets = pipeline.candidate_literals(state)
    yield puzzle, search, state, targets
    search.close()


def test_size1_pass_is_exact(shidoku_search):
    # [DERIVED] brute force: act a is a size-1 MUS for lit iff {a} refutes
    puzzle, search, state, targets = shidoku_search
    found = search.find_size1_muses(list(state.assumptions), list(targets))
    eng = Engine(puzzle.clauses, puzzle.num_vars)
    expected = {}
    for lit in targets:
        singles = frozenset(
            a for a in puzzle.activation_ids()
            if eng.solve(list(state.assumptions) + [lit, a]).status != "sat")
        if singles:
            expected[lit] = singles
    got = {lit: mus.members for lit, mus in found.muses.items()
           if len(mus.members) == 1}
    # the pass is complete over literals: exactly those with any
    # single-constraint refutation get one, and it is a true refuter
    assert set(got) == set(expected)
    for lit, members in got.items():
        assert set(members) <= expected[lit]


def test_find_global_mus_smallest_is_one_on_opening(shidoku_search):
    puzzle, search, state, targets = shidoku_search
    d = search.find_global_mus(list(state.assumptions), list(targets))
    assert d.smallest == 1
    for lit, mus in d.muses.items():
        ref = Refuter(search.main_engine, list(state.assumptions) + [lit])
        assert is_minimal(ref, mus.members)


def test_force_search_explains_arbitrary_literal(shidoku_search):
    puzzle, search, state, targets = shidoku_search
    lit = sorted(targets)[0]
    mus = search.force_search(list(state.assumptions), lit)
    assert mus is not None
    ref = Refuter(search.main_engine, list(state.assumptions) + [lit])
    assert is_minimal(ref, mus.members)


def test_determinism_across_worker_counts_small():
    from musolve import zoo, pipeline
    puzzle = zoo.build("shidoku")
    results = []
    for workers in (1, 2):
        search = pipeline.make_search(
            puzzle, SearchConfig(seed=5, workers=workers))
        try:
            state = pipeline.SolveState(puzzle)
            targets = pipeline.candidate_literals(state)
            d = search.find_global_mus(list(state.assumptions), list(targets))
            results.append(sorted((lit, tuple(sorted(m.members)))
                                  for lit, m in d.muses.items()))
        finally:
            search.close()
    assert results[0] == results[1]

"""Satisfiability engine: both backends against a brute-force oracle.

Oracles: exhaustive truth-table evaluation of random small CNFs
[DERIVED]; semantic checks of returned models and cores [DERIVED];
degenerate inputs [TRIVIAL].
"""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from musolve.sat import (Engine, SAT, UNSAT, UNKNOWN, HAVE_COMPILED_CORE)

BACKENDS = ["python"] + (["compiled"] if HAVE_COMPILED_CORE else [])


def brute_force(clauses, num_vars, fixed=()):
    """All satisfying assignments as sets of true variables."""
    fixed = set(fixed)
    sols = []
    for bits in itertools.product([False, True], repeat=num_vars):
        def val(lit):
            v = bits[abs(lit) - 1]
            return v if lit > 0 else not v
        if any(not val(l) for l in fixed):
            continue
        if all(any(val(l) for l in cl) for cl in clauses):
            sols.append(frozenset(i + 1 for i, b in enumerate(bits) if b))
    return sols


@st.composite
def random_cnfs(draw):
    num_vars = draw(st.integers(2, 6))
    n_clauses = draw(st.integers(1, 12))
    clauses = []
    for _ in range(n_clauses):
        width = draw(st.integers(1, 3))
        lits = draw(st.lists(
            st.integers(1, num_vars).flatmap(
                lambda v: st.sampled_from([v, -v])),
            min_size=width, max_size=width))
        clauses.append(lits)
    return num_vars, clauses


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=120, deadline=None)
@given(data=st.data())
def test_solve_matches_brute_force(backend, data):
    num_vars, clauses = data.draw(random_cnfs())
    sols = brute_force(clauses, num_vars)
    eng = Engine(clauses, num_vars, backend=backend)
    out = eng.solve()
    if sols:
        assert out.status == SAT
        assert out.model in sols
    else:
        assert out.status == UNSAT


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=120, deadline=None)
@given(data=st.data())
def test_assumptions_and_core(backend, data):
    num_vars, clauses = data.draw(random_cnfs())
    k = data.draw(st.integers(1, num_vars))
    assumptions = data.draw(st.lists(
        st.integers(1, num_vars).flatmap(lambda v: st.sampled_from([v, -v])),
        min_size=k, max_size=k, unique_by=abs))
    sols = brute_force(clauses, num_vars, assumptions)
    eng = Engine(clauses, num_vars, backend=backend)
    out = eng.solve(assumptions)
    if sols:
        assert out.status == SAT
        assert out.model in sols
    else:
        assert out.status == UNSAT
        core = list(out.core)
        assert set(core) <= set(assumptions)
        # the core alone must already be unsatisfiable
        assert brute_force(clauses, num_vars, core) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_empty_and_trivial(backend):
    eng = Engine([], 3, backend=backend)
    assert eng.solve().status == SAT
    eng2 = Engine([[1], [-1]], 1, backend=backend)
    assert eng2.solve().status == UNSAT
    eng3 = Engine([[]], 1, backend=backend)
    assert eng3.solve().status == UNSAT


@pytest.mark.parametrize("backend", BACKENDS)
def test_incremental_add_clause(backend):
    eng = Engine([[1, 2]], 2, backend=backend)
    assert eng.solve([-1]).status == SAT
    eng.add_clause([-2])
    assert eng.solve([-1]).status == UNSAT


@pytest.mark.parametrize("backend", BACKENDS)
def test_budget_reports_unknown(backend):
    rng = random.Random(5)
    # a hard random 3-CNF at clause ratio ~4.3 takes more than 2 conflicts
    num_vars = 60
    clauses = []
    for _ in range(258):
        vs = rng.sample(range(1, num_vars + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    eng = Engine(clauses, num_vars, backend=backend)
    out = eng.solve(budget=2)
    assert out.status in (UNKNOWN, SAT, UNSAT)
    full = eng.solve()
    assert full.status in (SAT, UNSAT)


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_pooled_solve_equals_plain_solve(backend, data):
    num_vars, clauses = data.draw(random_cnfs())
    pool = sorted(data.draw(st.sets(st.integers(1, num_vars),
                                    min_size=1, max_size=num_vars)))
    mask = bytes(data.draw(st.sampled_from([0, 1]))
                 for _ in pool)
    eng = Engine(clauses, num_vars, backend=backend)
    eng.set_assumption_pool(pool)
    out = eng.solve_pooled([], mask)
    expected = [p if m else -p for p, m in zip(pool, mask)]
    eng2 = Engine(clauses, num_vars, backend=backend)
    ref = eng2.solve(expected)
    assert out.status == ref.status


@pytest.mark.parametrize("backend", BACKENDS)
def test_model_filter(backend):
    eng = Engine([[1], [2], [-3]], 4, backend=backend)
    eng.set_model_filter([2, 3])
    assert eng.solve().status == SAT
    assert sorted(eng.filtered_model()) == [2]


@pytest.mark.skipif(not HAVE_COMPILED_CORE, reason="compiled core missing")
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_backends_agree(data):
    num_vars, clauses = data.draw(random_cnfs())
    a = Engine(clauses, num_vars, backend="compiled").solve()
    b = Engine(clauses, num_vars, backend="python").solve()
    assert a.status == b.status


@pytest.mark.parametrize("backend", BACKENDS)
def test_reset_learnts_restores_baseline(backend):
    rng = random.Random(9)
    num_vars = 30
    clauses = []
    for _ in range(120):
        vs = rng.sample(range(1, num_vars + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    eng = Engine(clauses, num_vars, backend=backend)
    first = eng.solve([1, 2])
    eng.solve([-1])
    eng.reset_learnts()
    again = eng.solve([1, 2])
    assert first.status == again.status
    if first.status == SAT:
        assert first.model == again.model

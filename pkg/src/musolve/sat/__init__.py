"""Satisfiability engine: solving under assumptions and unsat-core extraction.

The compiled CDCL core is used when available; a pure-Python twin with the
same behavior contract backs it up.  One :class:`Engine` instance is
single-threaded; create one engine per worker.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import pyengine

try:
    from . import _cdcl

    HAVE_COMPILED_CORE = True
except ImportError:  # pragma: no cover - build-environment dependent
    _cdcl = None
    HAVE_COMPILED_CORE = False

log = logging.getLogger(__name__)

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"


class BudgetExceeded(Exception):
    """The conflict budget ran out before an answer was reached."""


@dataclass
class SolveOutcome:
    status: str
    model: frozenset = frozenset()   # set of true variable ids (1-based)
    core: tuple = ()                 # subset of the passed assumptions


@dataclass
class EngineStats:
    solves: int = 0
    sat_answers: int = 0
    unsat_answers: int = 0
    conflicts: int = 0
    propagations: int = 0


class Engine:
    """A CDCL engine over one clause database.

    Learned clauses persist across calls by default; ``reset_learnts``
    restores the canonical baseline so results depend only on the clause
    database and the query.  ``core_passthrough`` makes ``find_unsat_core``
    return its input instead of the analyzed core (the degraded mode used
    by the benchmark harness).
    """

    def __init__(self, clauses=(), num_vars=0, backend="auto",
                 core_passthrough=False, check_cores=False):
        if backend == "auto":
            backend = "compiled" if HAVE_COMPILED_CORE else "python"
        if backend == "compiled":
            if not HAVE_COMPILED_CORE:
                raise RuntimeError("compiled SAT core is not available")
            self._s = _cdcl.Solver()
        elif backend == "python":
            self._s = pyengine.Solver()
        else:
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self.core_passthrough = core_passthrough
        self.check_cores = check_cores
        self.stats = EngineStats()
        self._nvars = 0
        if num_vars:
            self._s.ensure_vars(num_vars)
            self._nvars = num_vars
        for cl in clauses:
            self.add_clause(cl)

    def new_var(self):
        self._nvars += 1
        self._s.ensure_vars(self._nvars)
        return self._nvars

    def add_clause(self, lits):
        lits = list(lits)
        for l in lits:
            self._nvars = max(self._nvars, abs(l))
        self._s.add_clause(lits)

    @property
    def num_vars(self):
        return self._nvars

    def solve(self, assumptions=(), budget=None, want_model=True):
        """Solve under assumptions.

        SAT outcomes carry a full model (the set of true variables) unless
        ``want_model`` is off; UNSAT outcomes carry a core: a subset of the
        assumptions that is jointly inconsistent with the clause database.
        """
        assumptions = list(assumptions)
        res = self._s.solve(assumptions, -1 if budget is None else budget)
        self.stats.solves += 1
        if res == 1:
            self.stats.sat_answers += 1
            model = frozenset(v for v in self._s.model() if v > 0) \
                if want_model else frozenset()
            return SolveOutcome(SAT, model=model)
        if res == 0:
            self.stats.unsat_answers += 1
            core = tuple(self._s.core())
            if self.check_cores and core:
                recheck = self._s.solve(list(core), -1)
                assert recheck == 0, "extracted core is not unsatisfiable"
            return SolveOutcome(UNSAT, core=core)
        return SolveOutcome(UNKNOWN)

    def set_assumption_pool(self, lits):
        """Register the fixed literal pool used by ``solve_pooled``."""
        self._s.set_assumption_pool(list(lits))

    def set_model_filter(self, vars):
        """Register the variables reported by ``filtered_model``."""
        self._s.set_model_filter(list(vars))

    def filtered_model(self):
        """True variables (among the registered filter) of the last model."""
        return self._s.filtered_model()

    def solve_pooled(self, base, mask, budget=None):
        """Solve with assumptions = base + sign-masked pool literals.

        ``mask`` is bytes parallel to the registered pool: nonzero keeps
        the pool literal, zero negates it.  No model set is built; use
        ``filtered_model`` for a cheap projection after a SAT answer.
        """
        res = self._s.solve_pooled(list(base), mask,
                                   -1 if budget is None else budget)
        self.stats.solves += 1
        if res == 1:
            self.stats.sat_answers += 1
            return SolveOutcome(SAT)
        if res == 0:
            self.stats.unsat_answers += 1
            return SolveOutcome(UNSAT, core=tuple(self._s.core()))
        return SolveOutcome(UNKNOWN)

    def find_unsat_core(self, assumptions, restrict_to=None, budget=None):
        """Return a core over the assumptions, or None if satisfiable.

        The returned core is a not-necessarily-minimal subset such that the
        database plus the core is unsatisfiable.  ``restrict_to`` filters
        the reported core to a set of interesting assumption literals
        (activation literals); assumptions outside it are treated as
        background facts.
        """
        outcome = self.solve(assumptions, budget=budget)
        if outcome.status == SAT:
            return None
        if outcome.status == UNKNOWN:
            raise BudgetExceeded(
                f"conflict budget exhausted after {self._s.conflicts} conflicts")
        if self.core_passthrough:
            core = list(assumptions)
        else:
            core = list(outcome.core)
        if restrict_to is not None:
            core = [c for c in core if c in restrict_to]
        return core

    def set_polarity_hints(self, lits):
        """Fix first-try branching polarities (heuristic only)."""
        self._s.set_polarity_hints(list(lits))

    def reset_learnts(self):
        self._s.reset_learnts()

    def snapshot_stats(self):
        self.stats.conflicts = self._s.conflicts
        self.stats.propagations = self._s.propagations
        return self.stats

    def log_stats(self, context=""):
        s = self.snapshot_stats()
        log.info(
            "sat-stats context=%s solves=%d conflicts=%d propagations=%d",
            context, s.solves, s.conflicts, s.propagations)

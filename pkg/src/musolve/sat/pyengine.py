"""Pure-Python CDCL engine.

Mirrors the low-level interface of the compiled core (`_cdcl.Solver`):
watched literals, first-UIP learning, phase saving, Luby restarts and
assumption handling with final-conflict analysis.  It exists as a
dependency-free fallback and as a differential-testing twin for the
compiled engine; it is considerably slower but algorithmically the same.

Literals are DIMACS-style signed integers externally and packed
``2*v`` / ``2*v+1`` internally.
"""

from __future__ import annotations


def _luby(y, x):
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


class Solver:
    def __init__(self):
        self.nvars = 0
        self.ok = True
        self.clauses = []        # original clauses, list[list[int]]
        self.learnts = []
        self.watches = []        # per packed literal: list of clauses
        self.assigns = []        # None / True / False per var
        self.level = []
        self.reason = []
        self.activity = []
        self.polarity = []
        self.seen = []
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.var_inc = 1.0
        self.conflicts = 0
        self.propagations = 0
        self.decisions = 0
        self._model = []
        self._core = []
        self._assumptions = []
        self.unit_facts = []     # units passed to add_clause, for reset replay
        self.user_pol = []       # fixed branching preference: 0 none, 1 T, 2 F
        self.pool = []           # pooled-assumption literals (solve_pooled)
        self.filter = []         # variables reported by filtered_model

    # -- construction ---------------------------------------------------

    def ensure_vars(self, n):
        while self.nvars < n:
            self.watches.append([])
            self.watches.append([])
            self.assigns.append(None)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.polarity.append(False)
            self.seen.append(False)
            self.user_pol.append(0)
            self.nvars += 1

    def set_polarity_hints(self, lits):
        """Fix the first-try branching polarity of the given variables.

        A pure search heuristic (completeness is unaffected); part of the
        engine's canonical configuration, so ``reset_learnts`` keeps it.
        """
        for e in lits:
            self.user_pol[abs(e) - 1] = 1 if e > 0 else 2

    def _intern(self, ext):
        v = abs(ext) - 1
        return 2 * v + (1 if ext < 0 else 0)

    def _extern(self, lit):
        v = (lit >> 1) + 1
        return -v if lit & 1 else v

    def _value(self, lit):
        a = self.assigns[lit >> 1]
        if a is None:
            return None
        return a ^ bool(lit & 1)

    def add_clause(self, ext_lits):
        if not self.ok:
            return False
        self._cancel_until(0)
        for e in ext_lits:
            self.ensure_vars(abs(e))
        lits = sorted({self._intern(e) for e in ext_lits})
        for a, b in zip(lits, lits[1:]):
            if a == b ^ 1:
                return True  # tautology
        kept = []
        for l in lits:
            val = self._value(l)
            if val is True and self.level[l >> 1] == 0:
                return True
            if val is False and self.level[l >> 1] == 0:
                continue
            kept.append(l)
        if not kept:
            self.ok = False
            return False
        if len(kept) == 1:
            self.unit_facts.append(kept[0])
            self._enqueue(kept[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        clause = kept
        self.clauses.append(clause)
        self._attach(clause)
        return True

    def _attach(self, clause):
        self.watches[clause[0] ^ 1].append(clause)
        self.watches[clause[1] ^ 1].append(clause)

    # -- search ---------------------------------------------------------

    def _enqueue(self, lit, reason):
        v = lit >> 1
        self.assigns[v] = not (lit & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.polarity[v] = not (lit & 1)
        self.trail.append(lit)

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        limit = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, limit - 1, -1):
            v = self.trail[i] >> 1
            self.assigns[v] = None
            self.reason[v] = None
        del self.trail[limit:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _propagate(self):
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            ws = self.watches[p]
            kept = []
            conflict = None
            for idx, clause in enumerate(ws):
                if conflict is not None:
                    kept.extend(ws[idx:])
                    break
                false_lit = p ^ 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._value(first) is True:
                    kept.append(clause)
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self._value(clause[k]) is not False:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches[clause[1] ^ 1].append(clause)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(clause)
                if self._value(first) is False:
                    conflict = clause
                else:
                    self._enqueue(first, clause)
            self.watches[p] = kept
            if conflict is not None:
                self.qhead = len(self.trail)
                return conflict
        return None

    def _bump(self, v):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100

    def _analyze(self, conflict):
        learnt = [None]
        path = 0
        p = None
        idx = len(self.trail) - 1
        clause = conflict
        seen = self.seen
        while True:
            start = 0 if p is None else 1
            if clause[0] != p and p is not None:
                clause = [p] + [l for l in clause if l != p]
            for q in clause[start:]:
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= len(self.trail_lim):
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            clause = self.reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path <= 0:
                break
        learnt[0] = p ^ 1
        marked = list(learnt)
        for l in marked:
            seen[l >> 1] = True
        out = [learnt[0]]
        for l in learnt[1:]:
            v = l >> 1
            r = self.reason[v]
            redundant = r is not None and all(
                seen[q >> 1] or self.level[q >> 1] == 0
                for q in r if (q >> 1) != v)
            if not redundant:
                out.append(l)
        for l in marked:
            seen[l >> 1] = False
        if len(out) == 1:
            bt = 0
        else:
            maxi = max(range(1, len(out)), key=lambda i: self.level[out[i] >> 1])
            out[1], out[maxi] = out[maxi], out[1]
            bt = self.level[out[1] >> 1]
        return out, bt

    def _analyze_final(self, p):
        # p is the negation of the failed assumption; report the assumption.
        core = [self._extern(p ^ 1)]
        if not self.trail_lim:
            self._core = core
            return
        seen = self.seen
        seen[p >> 1] = True
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            v = self.trail[i] >> 1
            if not seen[v]:
                continue
            if self.reason[v] is None:
                core.append(self._extern(self.trail[i]))
            else:
                for q in self.reason[v]:
                    if self.level[q >> 1] > 0:
                        seen[q >> 1] = True
            seen[v] = False
        seen[p >> 1] = False
        self._core = core

    def solve(self, assumptions, conflict_budget=-1):
        self._core = []
        self._model = []
        if not self.ok:
            return 0
        for e in assumptions:
            self.ensure_vars(abs(e))
        self._assumptions = [self._intern(e) for e in assumptions]
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return 0
        budget = None if conflict_budget < 0 else self.conflicts + conflict_budget
        restart_seq = 0
        restart_base = self.conflicts
        restart_limit = 100 * _luby(2, restart_seq)
        order = None
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    self.ok = False
                    self._core = []
                    return 0
                learnt, bt = self._analyze(conflict)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self._attach(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= 0.95
                order = None
                if budget is not None and self.conflicts >= budget:
                    self._cancel_until(0)
                    return -1
                if self.conflicts - restart_base >= restart_limit:
                    restart_seq += 1
                    restart_limit = 100 * _luby(2, restart_seq)
                    restart_base = self.conflicts
                    self._cancel_until(0)
            else:
                nxt = None
                while len(self.trail_lim) < len(self._assumptions):
                    p = self._assumptions[len(self.trail_lim)]
                    val = self._value(p)
                    if val is True:
                        self.trail_lim.append(len(self.trail))
                    elif val is False:
                        self._analyze_final(p ^ 1)
                        self._cancel_until(0)
                        return 0
                    else:
                        nxt = p
                        break
                if nxt is None:
                    if order is None:
                        order = sorted(
                            range(self.nvars),
                            key=lambda v: (-self.activity[v], v))
                    free = next((v for v in order if self.assigns[v] is None),
                                None)
                    if free is None:
                        self._model = [
                            (v + 1) if self.assigns[v] else -(v + 1)
                            for v in range(self.nvars)
                        ]
                        self._cancel_until(0)
                        return 1
                    pol = (self.user_pol[free] == 1) if self.user_pol[free] \
                        else self.polarity[free]
                    nxt = 2 * free + (0 if pol else 1)
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(nxt, None)

    def set_assumption_pool(self, lits):
        """Register the fixed literal pool used by ``solve_pooled``."""
        self.pool = list(lits)
        for e in self.pool:
            self.ensure_vars(abs(e))

    def solve_pooled(self, base, mask, conflict_budget=-1):
        """Solve with assumptions = base + sign-masked pool literals.

        ``mask`` is a bytes-like object parallel to the pool: a nonzero
        byte keeps the pool literal, a zero byte negates it.
        """
        assumps = list(base)
        for e, keep in zip(self.pool, mask):
            assumps.append(e if keep else -e)
        return self.solve(assumps, conflict_budget)

    def set_model_filter(self, vars):
        """Register the variables reported by ``filtered_model``."""
        self.filter = list(vars)

    def filtered_model(self):
        truth = set(self._model)
        return [v for v in self.filter if v in truth]

    def model(self):
        return list(self._model)

    def core(self):
        return list(self._core)

    def reset_learnts(self):
        self._cancel_until(0)
        # Drop every level-0 assignment (learnt units leave facts on the
        # trail), restore the canonical (as-added, sorted) literal order and
        # rebuild the watch lists from scratch, then re-derive level-0 facts
        # from the original unit clauses.  A reset engine is a pure function
        # of its clause database.
        for lit in self.trail:
            v = lit >> 1
            self.assigns[v] = None
            self.reason[v] = None
        self.trail = []
        self.qhead = 0
        for i in range(len(self.watches)):
            self.watches[i] = []
        for clause in self.clauses:
            clause.sort()
            self._attach(clause)
        self.learnts = []
        self.activity = [0.0] * self.nvars
        self.polarity = [False] * self.nvars
        self.var_inc = 1.0
        if not self.ok:
            return
        for lit in self.unit_facts:
            val = self._value(lit)
            if val is False:
                self.ok = False
                return
            if val is None:
                self._enqueue(lit, None)
        if self._propagate() is not None:
            self.ok = False

    @property
    def num_vars(self):
        return self.nvars

    @property
    def num_learnts(self):
        return len(self.learnts)

    @property
    def num_clauses(self):
        return len(self.clauses)

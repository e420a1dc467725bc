"""Minimal-unsatisfiable-subset search over activation literals.

A MUS here is a minimal set of constraint activations that, together with
the clause database and a refutation target (the negation of a candidate
deduction), is unsatisfiable: the smallest bundle of rules that forces
the deduction.  Finding a guaranteed-smallest MUS is intractable, so the
search is randomized: deletion-based minimization over shuffled cores
(delete_mus), a size-capped variant that gives up early (limit_mus), a
subset-chopping accelerator that searches random fractions of the
constraint set (many_chop), and an iterative-deepening driver that hunts
the smallest MUS over every candidate deduction at once
(find_global_mus), with an exact fast pass for size-1 MUSes.

Determinism contract: every random draw comes from a stream keyed by
(seed, literal, attempt, targetsize); the unit of parallel work is one
literal's whole round, run sequentially on an engine reset to its
canonical state at the start, so a literal's results are a pure function
of (clause database, background facts, literal, seed) and identical no
matter how many workers run or how tasks are scheduled.

Two memoization layers accelerate repeated rounds across solve steps
(background facts only ever grow, and the RNG streams ignore them, so
each (literal, attempt, targetsize) task re-draws the same chop subsets
every step):

* satisfiability witnesses: a model proving "this chop subset does not
  refute" stays valid while it is consistent with the background facts,
  which reduces to one set intersection on its deviation-from-solution;
* found MUSes: a MUS stays unsatisfiable forever (facts only grow) and
  is re-verified minimal each round before reuse, so an attempt whose
  chop subset contains a known MUS can return it without searching.

Both layers are per-literal state mutated only by that literal's task,
so parallel scheduling cannot influence results.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from random import Random

import numpy as np

from .sat import SAT, Engine


class ModelError(Exception):
    """A candidate literal is not refutable: the puzzle is under-determined
    or the encoding is wrong."""


@dataclass(frozen=True)
class Mus:
    members: frozenset     # activation ids
    target: int            # asserted literal (negation of the deduction)


@dataclass(frozen=True)
class ChopParams:
    max_size: int
    step: int
    frac: float
    attempts: int = 20
    survival_floor: float = 0.1


@dataclass
class SearchConfig:
    seed: int = 0
    attempts: int = 10            # tries per literal per size round
    max_size: int | None = None   # deepening cap (None = as deep as needed)
    workers: int = 1
    survival_floor: float = 0.1
    chop_attempts: int = 20
    algorithm: str = "chop"       # "chop" (many_chop) or "basic" (limit_mus)
    core_passthrough: bool = False


@dataclass
class MusDictionary:
    muses: dict = field(default_factory=dict)   # target literal -> Mus
    smallest: int | None = None
    found: set = field(default_factory=set)     # every recorded member set

    def record(self, target, members):
        members = frozenset(members)
        cur = self.muses.get(target)
        if cur is None or len(members) < len(cur.members):
            self.muses[target] = Mus(members, target)
        self.found.add(members)
        size = len(members)
        if self.smallest is None or size < self.smallest:
            self.smallest = size

    def smallest_entries(self):
        return [(t, m) for t, m in sorted(self.muses.items())
                if len(m.members) == self.smallest]

    def distinct_smallest(self):
        """All distinct smallest-size member sets found, including ties
        beyond the one-per-target dictionary."""
        return {m for m in self.found if len(m) == self.smallest}


class Refuter:
    """Core queries for one refutation target against one engine.

    ``assumptions`` holds the target literal plus any background facts
    (known cell values); ``core(subset)`` asks whether the database plus
    assumptions plus the given activations is unsatisfiable, returning a
    core filtered to the activations, or None when satisfiable.
    """

    def __init__(self, engine, assumptions, budget=None):
        self.engine = engine
        self.assumptions = list(assumptions)
        self.budget = budget
        self.calls = 0

    def core(self, subset):
        self.calls += 1
        subset = list(subset)
        return self.engine.find_unsat_core(
            self.assumptions + subset, restrict_to=set(subset),
            budget=self.budget)


def _stream(seed, *parts):
    """Deterministic RNG keyed by integers, stable across processes."""
    key = seed & 0xFFFFFFFFFFFFFFFF
    for p in parts:
        key = (key * 0x100000001B3 ^ (p & 0xFFFFFFFFFFFFFFFF)) \
            & 0xFFFFFFFFFFFFFFFF
    return Random(key)


def _lit_true(model, lit):
    """Truth of a literal in a model given as the set of true variables."""
    return (lit in model) if lit > 0 else (-lit not in model)


@dataclass(frozen=True)
class Witness:
    """A cached SAT model plus the set of constraints its grid violates.

    A witness proves a query SAT without a solver call: if the model makes
    the target literal true and violates no activation in the queried
    subset, flipping those activations on yields a model of the query
    (activation variables are unconstrained apart from their guards).
    """
    model: frozenset       # true variable ids
    violated: frozenset    # activation ids whose clause bodies fail


@dataclass
class _LitCache:
    """Per-literal memoization across solve steps (see module doc).

    ``muses``: every MUS found for this literal so far (frozensets).
    ``witnesses``: (attempt r, targetsize, chop index) -> the
    deviation-from-solution variable set of a model that proved the
    corresponding chop subset satisfiable.  The same key re-draws the
    same subset every step, so the entry stays valid exactly while its
    deviation set avoids the known facts.
    """
    muses: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)


def delete_mus(refuter, activations, rng):
    """Deletion-based minimization: shuffle, core, one deletion pass.

    Precondition: the full activation set refutes the target.  Returns a
    list of activation ids forming a true MUS.
    """
    pool = list(activations)
    rng.shuffle(pool)
    mus = refuter.core(pool)
    if mus is None:
        raise ValueError("delete_mus called on a satisfiable activation set")
    order = list(mus)
    rng.shuffle(order)
    for c in order:
        if c not in mus:
            continue
        trial = [x for x in mus if x != c]
        core = refuter.core(trial)
        if core is not None:
            mus = core
    return mus


def limit_mus(refuter, activations, max_size, rng):
    """Deletion-based minimization that gives up past ``max_size``.

    Counts members confirmed as required; once ``max_size`` of them exist,
    the set is truncated to exactly those members and returned iff they
    alone refute the target, else None ("no MUS this small found on this
    randomized pass" — not a proof of absence).

    The truncated confirmed set needs no further deletion pass: each
    member was confirmed required with respect to a superset of it, and
    subsets of satisfiable sets are satisfiable, so confirmation carries
    down to the truncated set.
    """
    pool = list(activations)
    rng.shuffle(pool)
    mus = refuter.core(pool)
    if mus is None:
        raise ValueError("limit_mus called on a satisfiable activation set")
    order = list(mus)
    rng.shuffle(order)
    confirmed = []
    for c in order:
        if c not in mus:
            continue
        trial = [x for x in mus if x != c]
        core = refuter.core(trial)
        if core is not None:
            mus = core
            continue
        confirmed.append(c)
        if len(confirmed) == max_size:
            if set(confirmed) == set(mus):
                return mus
            if refuter.core(confirmed) is not None:
                return list(confirmed)
            return None
    return mus


def chop_params(max_size, survival_floor=0.1, attempts=20):
    """Chop step/fraction: the largest removal fraction that still leaves
    a size-``max_size`` MUS intact with probability >= survival_floor."""
    step = 1
    while (1 - 0.5 ** step) ** max_size < survival_floor:
        step += 1
    return ChopParams(max_size=max_size, step=step, frac=1 - 0.5 ** step,
                      attempts=attempts, survival_floor=survival_floor)


def many_chop(refuter, activations, max_size, rng, params=None):
    """Randomized subset chopping (accelerated small-MUS search).

    Up to ``attempts`` times: keep a random frac-sized subset of the
    activation set; if that subset still refutes the target, delegate to
    limit_mus on it (the attempt loop ends either way).  None when every
    attempt misses or the delegated minimization exceeds the cap.
    """
    if params is None:
        params = chop_params(max_size)
    pool = list(activations)
    keep = round(params.frac * len(pool))
    perm = np.random.default_rng(rng.getrandbits(64))
    for _ in range(params.attempts):
        idx = perm.permutation(len(pool))
        subset = [pool[i] for i in idx[:keep]]
        if refuter.core(subset) is not None:
            return limit_mus(refuter, subset, max_size, rng)
    return None


def is_minimal(refuter, members):
    """True iff members refute the target and no single removal does."""
    members = list(members)
    if refuter.core(members) is None:
        return False
    for c in members:
        if refuter.core([x for x in members if x != c]) is not None:
            return False
    return True


class MusSearch:
    """Smallest-MUS search over all candidate literals of one state.

    Owns a sequential main engine (learned clauses retained across
    queries) and a pool of worker engines (reset to canonical state
    before every task, so scheduling cannot influence results).
    """

    def __init__(self, clauses, num_vars, activations, config=None,
                 backend="auto", polarity_hints=(), model_vars=()):
        self.clauses = clauses
        self.num_vars = num_vars
        self.activations = list(activations)
        self.config = config or SearchConfig()
        self.backend = backend
        # Branching-polarity hints (e.g. the known solution) shared by
        # every engine; a fixed part of the canonical engine state.
        self.polarity_hints = list(polarity_hints)
        # Problem-cell variables (for cheap model projections) and the
        # solution's true variables among them (for deviation sets).
        self.model_vars = sorted(model_vars)
        self._solution_true = frozenset(
            h for h in self.polarity_hints if h > 0)
        # The pooled-assumption order for chop masks (canonical: sorted).
        self._pool_acts = sorted(self.activations)
        self._act_pos = {a: i for i, a in enumerate(self._pool_acts)}
        self._act_set = frozenset(self._pool_acts)
        self.main_engine = self._new_engine()
        self._local = threading.local()
        self._pool = None
        if self.config.workers > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.config.workers)
        # Append-only witness store (see Witness); shared across threads.
        # Witnesses only ever answer "satisfiable", which is a semantic
        # fact, so sharing them cannot make results depend on scheduling.
        self._witnesses = []
        # Per-literal caches for the deepening rounds (see module doc).
        self._lit_cache = {}

    def _new_engine(self):
        eng = Engine(clauses=self.clauses, num_vars=self.num_vars,
                     backend=self.backend,
                     core_passthrough=self.config.core_passthrough)
        if self.polarity_hints:
            eng.set_polarity_hints(self.polarity_hints)
        eng.set_assumption_pool(self._pool_acts)
        if self.model_vars:
            eng.set_model_filter(self.model_vars)
        return eng

    @property
    def _act_clauses(self):
        """Guarded clause bodies per activation (activation guard removed)."""
        cached = getattr(self, "_act_clauses_cache", None)
        if cached is None:
            cached = {a: [] for a in self.activations}
            for cl in self.clauses:
                for l in cl:
                    if l < 0 and -l in cached:
                        cached[-l].append([x for x in cl if x != l])
            self._act_clauses_cache = cached
        return cached

    def _worker_engine(self):
        eng = getattr(self._local, "engine", None)
        if eng is None:
            eng = self._new_engine()
            self._local.engine = eng
        return eng

    # -- witness cache ---------------------------------------------------

    @property
    def _act_eval(self):
        """Flat numpy view of every guarded body clause, for vectorized
        violated-set computation: literal array, clause offsets, and the
        owning activation per clause."""
        cached = getattr(self, "_act_eval_cache", None)
        if cached is None:
            lits, offsets, owners = [], [0], []
            for act, bodies in self._act_clauses.items():
                for cl in bodies:
                    lits.extend(cl)
                    offsets.append(len(lits))
                    owners.append(act)
            cached = (np.asarray(lits, dtype=np.int64),
                      np.asarray(offsets[:-1], dtype=np.int64),
                      np.asarray(owners, dtype=np.int64))
            self._act_eval_cache = cached
        return cached

    def _add_witness(self, model):
        lits, offsets, owners = self._act_eval
        truth = np.zeros(self.num_vars + 1, dtype=bool)
        truth[np.fromiter(model, dtype=np.int64, count=len(model))] = True
        var_true = truth[np.abs(lits)]
        lit_true = np.where(lits > 0, var_true, ~var_true)
        any_true = np.maximum.reduceat(lit_true, offsets) \
            if len(offsets) else np.empty(0, dtype=bool)
        violated = frozenset(int(a) for a in np.unique(owners[~any_true]))
        if len(self._witnesses) >= 2048:   # cache, not ground truth: a
            del self._witnesses[0]         # dropped witness only costs time
        self._witnesses.append(Witness(model, violated))

    def _prune_witnesses(self, knowns):
        """Drop witnesses inconsistent with the background facts.

        Facts only grow over a solve, so pruned witnesses never come back.
        Called from the sequential driver only.
        """
        self._witnesses = [
            w for w in self._witnesses
            if all(_lit_true(w.model, k) for k in knowns)]

    def _witness_sat(self, lit, subset):
        subset = subset if isinstance(subset, (set, frozenset)) \
            else set(subset)
        witnesses = self._witnesses    # snapshot; list is append-only
        for w in witnesses:
            if _lit_true(w.model, lit) and not (w.violated & subset):
                return True
        return False

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    # -- refutability and the size-1 fast pass ---------------------------

    def initial_cores(self, knowns, targets):
        """Engine core for each target over the full activation set.

        Raises ModelError if any target is irrefutable.
        """
        cores = {}
        for lit in sorted(targets):
            ref = Refuter(self.main_engine, list(knowns) + [lit])
            core = ref.core(self.activations)
            if core is None:
                raise ModelError(
                    f"literal {lit} is not refutable; the instance may have "
                    f"multiple solutions")
            cores[lit] = core
        return cores

    def find_size1_muses(self, knowns, targets, cores=None):
        """Exact (complete) pass for single-activation refutations.

        For each target the candidate activations are narrowed by
        witness models: a model consistent with the facts that makes the
        target true certifies every activation whose body it satisfies
        as non-refuting, so only the intersection of the violated sets
        of all such witnesses needs a solver call.  Each satisfiable
        probe contributes a fresh witness, so the intersection collapses
        after a handful of models.  Returns a MusDictionary when at
        least one target has a size-1 MUS, else None.
        """
        if cores is None:
            cores = self.initial_cores(knowns, targets)
        found = MusDictionary()
        self._prune_witnesses(knowns)
        for lit in sorted(targets):
            assumptions = list(knowns) + [lit]
            cands = None
            for w in self._witnesses:
                if _lit_true(w.model, lit):
                    cands = w.violated if cands is None \
                        else (cands & w.violated)
                    if not cands:
                        break
            if cands is None:
                cands = self._act_set
            for act in sorted(cands):
                if act not in cands:
                    continue
                outcome = self.main_engine.solve(assumptions + [act])
                if outcome.status == SAT:
                    self._add_witness(outcome.model)
                    cands = cands & self._witnesses[-1].violated
                    continue
                found.record(lit, [act])
                break
        if found.muses:
            return found
        return None

    # -- the deepening driver --------------------------------------------

    def _core_members(self, core):
        """Positive activation literals of a pooled core.

        Negated pool assumptions never make a satisfiable set
        unsatisfiable (activation variables occur only negatively, in
        their guard clauses), so dropping them from a core keeps it
        unsatisfiable.
        """
        return [c for c in core if c > 0 and c in self._act_set]

    def _core_or_input(self, core, input_members):
        """Core filtering honoring the degraded benchmark mode: with
        ``core_passthrough`` the refuting set is not narrowed at all."""
        if self.config.core_passthrough:
            return list(input_members)
        return self._core_members(core)

    def _mask_for(self, members):
        mask = np.zeros(len(self._pool_acts), dtype=np.uint8)
        for a in members:
            mask[self._act_pos[a]] = 1
        return mask

    def _pooled_refutes(self, eng, base, members):
        out = eng.solve_pooled(base, self._mask_for(members).tobytes())
        return out.status != SAT

    def _pooled_minimal(self, eng, base, members):
        """is_minimal with every non-member activation assumed off."""
        members = list(members)
        if not self._pooled_refutes(eng, base, members):
            return False
        for c in members:
            if self._pooled_refutes(eng, base,
                                    [x for x in members if x != c]):
                return False
        return True

    def _pooled_limit_mus(self, eng, base, first_members, max_size, rng):
        """Deletion-based minimization over a pooled core (cf. limit_mus).

        ``first_members`` is the activation part of the core of a chop
        subset that refuted the target.  Returns a frozenset MUS of size
        <= max_size, or None when this randomized pass exceeds the cap.
        """
        mus = list(first_members)
        order = list(mus)
        rng.shuffle(order)
        confirmed = []
        for c in order:
            if c not in mus:
                continue
            trial = [x for x in mus if x != c]
            out = eng.solve_pooled(base, self._mask_for(trial).tobytes())
            if out.status != SAT:
                mus = self._core_or_input(out.core, trial)
                continue
            confirmed.append(c)
            if len(confirmed) == max_size:
                if set(confirmed) == set(mus):
                    return frozenset(mus)
                if self._pooled_refutes(eng, base, confirmed):
                    return frozenset(confirmed)
                return None
        return frozenset(mus)

    def _deviations(self, eng):
        """Deviation-from-solution of the engine's last model, as the set
        of problem variables whose truth differs from the solution's."""
        return frozenset(set(eng.filtered_model()) ^ self._solution_true)

    def _lit_round(self, knowns, known_vars, lit, targetsize):
        """One literal's full round: ``attempts`` many-chop tasks.

        Returns a list with one entry per task r: a frozenset MUS of size
        <= targetsize, or None.  Runs sequentially on one engine reset to
        canonical state, so the outcome is scheduling-independent.
        """
        cache = self._lit_cache.setdefault(lit, _LitCache())
        eng = self._worker_engine()
        eng.reset_learnts()
        base = list(knowns) + [lit]
        if self.config.algorithm == "basic":
            results = []
            for r in range(self.config.attempts):
                rng = _stream(self.config.seed, lit, r, targetsize)
                ref = Refuter(eng, base)
                results.append(limit_mus(
                    ref, self.activations, targetsize, rng))
            return results
        # Re-verify the cached MUSes under the current facts: they stay
        # unsatisfiable forever, but a member can become redundant.
        valid = []
        for mus in sorted(cache.muses, key=lambda m: (len(m), sorted(m))):
            if len(mus) <= targetsize and \
                    self._pooled_minimal(eng, base, mus):
                valid.append((mus, [self._act_pos[a] for a in mus]))
        cache.muses = [m for m, _ in valid] + \
            [m for m in cache.muses if len(m) > targetsize]
        params = chop_params(targetsize, self.config.survival_floor,
                             self.config.chop_attempts)
        npool = len(self._pool_acts)
        keep = round(params.frac * npool)
        results = []
        for r in range(self.config.attempts):
            rng = _stream(self.config.seed, lit, r, targetsize)
            perm = np.random.default_rng(rng.getrandbits(64))
            found = None
            for a in range(params.attempts):
                idx = perm.permutation(npool)
                mask = np.zeros(npool, dtype=np.uint8)
                mask[idx[:keep]] = 1
                # (1) a known MUS inside the subset settles the attempt
                contained = [m for m, pos in valid
                             if all(mask[p] for p in pos)]
                if contained:
                    found = min(contained,
                                key=lambda m: (len(m), sorted(m)))
                    break
                # (2) a still-consistent witness proves the attempt misses
                key = (r, targetsize, a)
                dev = cache.witnesses.get(key)
                if dev is not None:
                    if dev.isdisjoint(known_vars):
                        continue
                    del cache.witnesses[key]
                # (3) solve the chop subset for real
                out = eng.solve_pooled(base, mask.tobytes())
                if out.status == SAT:
                    if self.model_vars:
                        cache.witnesses[key] = self._deviations(eng)
                    continue
                # refuting subset: minimize within it; the task ends here
                # whether or not the cap is met (cf. many_chop)
                members = self._core_or_input(
                    out.core, (self._pool_acts[i] for i in idx[:keep]))
                found = self._pooled_limit_mus(
                    eng, base, members, targetsize, rng)
                if found is not None and found not in cache.muses:
                    cache.muses.append(found)
                    valid.append(
                        (found, [self._act_pos[x] for x in found]))
                break
            results.append(found)
        return results

    def find_global_mus(self, knowns, targets):
        """Iterative deepening toward the smallest MUS of any target.

        Size-1 fast pass first; then rounds of randomized attempts with a
        growing size cap.  A round always completes even after a hit, so
        ties at the final size are all collected.  Returns a
        MusDictionary; with a max_size cap the dictionary may be empty.
        """
        cores = self.initial_cores(knowns, targets)
        quick = self.find_size1_muses(knowns, targets, cores)
        if quick is not None:
            return quick
        found = MusDictionary()
        # The size-1 pass is exact, so reaching this point proves no
        # size-1 MUS exists and the first deepening round can start at 2.
        targetsize = 2
        order = sorted(targets)
        known_vars = frozenset(abs(k) for k in knowns)
        # literals no longer under consideration free their caches
        self._lit_cache = {l: c for l, c in self._lit_cache.items()
                           if l in set(order)}
        while True:
            if self.config.max_size is not None and \
                    targetsize > self.config.max_size:
                return found
            if self._pool is not None:
                results = list(self._pool.map(
                    lambda lit: self._lit_round(
                        knowns, known_vars, lit, targetsize), order))
            else:
                results = [self._lit_round(knowns, known_vars, l, targetsize)
                           for l in order]
            # deterministic merge: ordered by (literal, attempt)
            for lit, rlist in zip(order, results):
                for members in rlist:
                    if members is not None:
                        found.record(lit, members)
            if found.smallest is not None and found.smallest <= targetsize:
                return found
            targetsize += 1

    def force_search(self, knowns, lit):
        """Full-depth MUS search for a single literal, no size-1 pass.

        Returns a Mus, or None if the literal is not refutable.
        """
        ref = Refuter(self.main_engine, list(knowns) + [lit])
        if ref.core(self.activations) is None:
            return None
        known_vars = frozenset(abs(k) for k in knowns)
        best = None
        targetsize = 1
        while True:
            for members in self._lit_round(knowns, known_vars, lit,
                                           targetsize):
                if members is not None and \
                        (best is None or len(members) < len(best)):
                    best = members
            if best is not None and len(best) <= targetsize:
                return Mus(frozenset(best), lit)
            if self.config.max_size is not None and \
                    targetsize >= self.config.max_size:
                if best is not None:
                    return Mus(frozenset(best), lit)
                # deepen past the cap with plain deletion so force mode
                # always answers for a refutable literal
                rng = _stream(self.config.seed, lit, 0, 0)
                members = delete_mus(ref, self.activations, rng)
                return Mus(frozenset(members), lit)
            targetsize += 1

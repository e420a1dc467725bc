"""Flatten a ground puzzle model to CNF with activation literals.

Every problem cell gets one direct-encoding literal per domain value plus
exactly-one clauses.  Every ground constraint gets an activation literal
``act`` and is encoded one-way as ``act -> formula`` — the activation is
never forced true by the formula holding, so deactivating a constraint
relaxes the puzzle without otherwise changing it.

After encoding, activations whose clauses are all satisfied by the givens
are removed, activations with identical (simplified) clause sets are
merged, and each survivor gets a literal scope: the set of (cell, value)
pairs whose membership decides the constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import dsl
from .sat import Engine, SAT

# How many distributed clauses an or-node may produce before its branches
# are replaced by defined auxiliary literals.
_DISTRIBUTE_LIMIT = 64

_NEGATE = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


class EncodingError(Exception):
    pass


class NonUniqueError(EncodingError):
    """The instance has zero or more than one solution."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness   # differing cell: ((name, idx), v1, v2)


@dataclass
class EncodedCon:
    act: int                  # activation variable (positive literal)
    description: str
    family: str
    index: tuple
    clause_ids: list
    origins: list             # merged (family, index, description) triples
    scope: frozenset = frozenset()


@dataclass
class LiteralMap:
    forward: dict = field(default_factory=dict)   # (name,idx,value) -> var
    reverse: dict = field(default_factory=dict)   # var -> tag tuple

    def direct(self, name, idx, value):
        return self.forward.get((name, idx, value))

    def tag(self, var):
        return self.reverse.get(var, ("aux", "unknown"))


@dataclass
class EncodedPuzzle:
    model: dsl.GroundModel
    clauses: list
    num_vars: int
    litmap: LiteralMap
    cons: list                # surviving EncodedCon, activation set X
    solution: dict            # (name, idx) -> value, VAR cells only
    true_var: int
    # every ground constraint's formula (after alldifferent expansion),
    # including ones later removed as trivial or merged by dedup; keyed
    # (family, index) like EncodedCon.origins entries
    ground_formulas: dict = field(default_factory=dict)

    def activation_ids(self):
        return [c.act for c in self.cons]

    def con_by_act(self, act):
        for c in self.cons:
            if c.act == act:
                return c
        raise KeyError(act)

    def var_cells(self):
        return [(name, idx) for name, idx, _, _ in self.model.cells
                if name in self.model.var_names]

    def cell_values(self, name, idx):
        return list(self.model.cell_domain(name, idx))


class _Encoder:
    def __init__(self, model):
        self.model = model
        self.nvars = 0
        self.clauses = []
        self.litmap = LiteralMap()
        self.domains = {}          # (name, idx) -> list of values
        self.order_cache = {}
        self.auxlit_cache = {}
        self.sum_cache = {}
        self.count_cache = {}
        self.reg_serial = 0
        for name, idx, rng, _ in model.cells:
            self.domains[(name, idx)] = list(rng)
        self.true_var = self.new_var(("aux", "true"))
        self.emit([self.true_var])

    # -- variables and clauses ------------------------------------------

    def new_var(self, tag):
        self.nvars += 1
        self.litmap.reverse[self.nvars] = tag
        return self.nvars

    def emit(self, lits):
        lits = [l for l in lits if l != -self.true_var]
        if self.true_var in lits:
            return None
        if not lits:
            raise EncodingError("encoded an empty clause: model is inconsistent")
        seen = set()
        out = []
        for l in lits:
            if -l in seen:
                return None   # tautology
            if l not in seen:
                seen.add(l)
                out.append(l)
        self.clauses.append(out)
        return len(self.clauses) - 1

    def dlit(self, cell, value):
        if value not in self.domains[cell]:
            return -self.true_var
        v = self.litmap.forward.get((cell[0], cell[1], value))
        if v is None:
            raise EncodingError(f"no literal for {cell}={value}")
        return v

    def olit(self, cell, bound):
        """Positive literal meaning cell <= bound."""
        dom = self.domains[cell]
        if bound >= dom[-1]:
            return self.true_var
        if bound < dom[0]:
            return -self.true_var
        key = (cell, bound)
        if key in self.order_cache:
            return self.order_cache[key]
        v = self.new_var(("order", cell[0], cell[1], bound))
        self.order_cache[key] = v
        low = [self.dlit(cell, d) for d in dom if d <= bound]
        for l in low:
            self.emit([-l, v])
        self.emit([-v] + low)
        return v

    def fresh_register(self, values):
        """Internal integer variable with direct encoding over `values`."""
        self.reg_serial += 1
        cell = ("_reg", (self.reg_serial,))
        self.domains[cell] = sorted(values)
        lits = []
        for d in self.domains[cell]:
            v = self.new_var(("aux", "register", self.reg_serial, d))
            self.litmap.forward[(cell[0], cell[1], d)] = v
            lits.append(v)
        self.emit(lits)
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                self.emit([-lits[i], -lits[j]])
        return cell

    # -- formula flattening ---------------------------------------------

    def clausify(self, f, negate=False):
        """CNF of f (or of !f), as a list of clauses over literal ints."""
        kind = f[0]
        if kind == "bool":
            return [] if (f[1] ^ negate) else [[]]
        if kind == "not":
            return self.clausify(f[1], not negate)
        if kind == "implies":
            return self.clausify(("or", ("not", f[1]), f[2]), negate)
        if kind == "and" and not negate or kind == "or" and negate:
            return self.clausify(f[1], negate) + self.clausify(f[2], negate)
        if kind in ("and", "or"):
            parts = [self.clausify(f[1], negate), self.clausify(f[2], negate)]
            return self._disjoin(parts, (f, negate))
        if kind == "cmp":
            op = f[1] if not negate else _NEGATE[f[1]]
            if op in ("=", "!=") and (_is_formula(f[2]) or _is_formula(f[3])):
                # boolean equivalence between formulas / bool cells
                a, b = f[2], f[3]
                iff = ("and", ("implies", a, b), ("implies", b, a))
                return self.clausify(iff, negate=(op == "!="))
            return self.atom_clauses(op, f[2], f[3])
        if kind == "alldifferent":
            if negate:
                raise EncodingError("negated alldifferent is not supported")
            out = []
            for piece, _ in self.alldiff_pieces(f[1]):
                out.extend(self.clausify(piece))
            return out
        if kind == "cell":
            return self.clausify(("cmp", "!=", f, ("int", 0)), negate)
        raise EncodingError(f"cannot encode node {kind!r}")

    def _disjoin(self, parts, cache_key):
        # [] is the CNF of TRUE (no clauses): it makes the disjunction
        # true.  [[]] is the CNF of FALSE (one empty clause): it drops
        # out of the disjunction.
        if any(p == [] for p in parts):
            return []
        parts = [p for p in parts if p != [[]]]
        if not parts:
            return [[]]
        total = 1
        for p in parts:
            total *= len(p)
        if total > _DISTRIBUTE_LIMIT:
            parts = [[[self.aux_lit_for(p)]] if len(p) > 1 else p
                     for p in parts]
        out = [[]]
        for p in parts:
            out = [c + pc for c in out for pc in p]
        return out

    def aux_lit_for(self, clause_list):
        key = tuple(tuple(c) for c in clause_list)
        if key in self.auxlit_cache:
            return self.auxlit_cache[key]
        z = self.new_var(("aux", "definition"))
        self.auxlit_cache[key] = z
        # z appears only positively inside guarded clauses, so one
        # direction (z -> formula) is sufficient.
        for c in clause_list:
            self.emit([-z] + c)
        return z

    def atom_clauses(self, op, t1, t2):
        a = self._affine(t1)
        b = self._affine(t2)
        if a is not None and b is not None:
            return self._affine_cmp(op, a, b)
        for lhs, rhs, o in ((t1, t2, op), (t2, t1, _flip(op))):
            if lhs[0] == "countof":
                rv = self._affine(rhs)
                if rv is None or rv[0] is not None:
                    raise EncodingError(
                        "count/sum comparisons need a constant bound")
                return self.count_cmp(lhs, o, rv[1])
            if lhs[0] == "sumof":
                rv = self._affine(rhs)
                if rv is None or rv[0] is not None:
                    raise EncodingError(
                        "count/sum comparisons need a constant bound")
                reg = self.chain_register(lhs)
                return self._affine_cmp(o, (reg, 0), (None, rv[1]))
        raise EncodingError(f"cannot encode comparison over {t1[0]}/{t2[0]}")

    def count_indicators(self, term):
        """(indicator literals, constant base) for a countof term."""
        inds = []
        base = 0
        vterm = term[2]
        for t in term[1]:
            if _is_formula(t):
                # formula term counts as 1 when true; match against 0/1
                va = self._affine(vterm)
                if va is None or va[0] is not None:
                    raise EncodingError("count of formulas needs a 0/1 value")
                lit = self.formula_indicator(t)
                if va[1] == 1:
                    inds.append(lit)
                elif va[1] == 0:
                    inds.append(-lit)
                continue
            cl = self.atom_clauses("=", t, vterm)
            if cl == []:
                base += 1
            elif cl == [[]]:
                continue
            elif len(cl) == 1 and len(cl[0]) == 1:
                inds.append(cl[0][0])
            else:
                inds.append(self.aux_equiv(cl, ("cmp", "=", t, vterm)))
        return inds, base

    def formula_indicator(self, f):
        cl = self.clausify(f)
        if len(cl) == 1 and len(cl[0]) == 1:
            return cl[0][0]
        return self.aux_equiv(cl, f)

    def count_cmp(self, term, op, k):
        """Clauses for count(...) op k, with single-clause fast paths for
        the at-least-one / at-most-zero / all / not-all boundary cases."""
        inds, base = self.count_indicators(term)
        if op == "=":
            return self._count_le(inds, base, k) + self._count_ge(inds, base, k)
        if op == "!=":
            reg = self._reg_for(inds, base)
            return self._affine_cmp("!=", (reg, 0), (None, k))
        if op == "<":
            return self._count_le(inds, base, k - 1)
        if op == "<=":
            return self._count_le(inds, base, k)
        if op == ">":
            return self._count_ge(inds, base, k + 1)
        return self._count_ge(inds, base, k)

    def _count_ge(self, inds, base, k):
        lo, hi = base, base + len(inds)
        if k <= lo:
            return []
        if k > hi:
            return [[]]
        if k == lo + 1:
            return [list(inds)]
        if k == hi:
            return [[i] for i in inds]
        reg = self._reg_for(inds, base)
        return self._affine_cmp(">=", (reg, 0), (None, k))

    def _count_le(self, inds, base, k):
        lo, hi = base, base + len(inds)
        if k >= hi:
            return []
        if k < lo:
            return [[]]
        if k == lo:
            return [[-i] for i in inds]
        if k == hi - 1:
            return [[-i for i in inds]]
        reg = self._reg_for(inds, base)
        return self._affine_cmp("<=", (reg, 0), (None, k))

    def _reg_for(self, inds, base):
        key = ("count", tuple(inds), base)
        if key not in self.count_cache:
            self.count_cache[key] = self._build_count_chain(inds, base)
        return self.count_cache[key]

    def _affine(self, t):
        """Term as (cell | None, offset), or None if not that shape."""
        if t[0] == "int":
            return (None, t[1])
        if t[0] == "bool":
            return (None, 1 if t[1] else 0)
        if t[0] == "cell":
            return ((t[1], t[2]), 0)
        if t[0] in ("add", "sub"):
            a = self._affine(t[1])
            b = self._affine(t[2])
            if a is None or b is None:
                return None
            if t[0] == "sub":
                if b[0] is not None:
                    return None
                b = (None, -b[1])
            if a[0] is not None and b[0] is not None:
                return None
            cell = a[0] if a[0] is not None else b[0]
            return (cell, a[1] + b[1])
        return None

    def _affine_cmp(self, op, a, b):
        (ca, ka), (cb, kb) = a, b
        if ca is None and cb is None:
            return [] if dsl._cmp(op, ka, kb) else [[]]
        if ca is None:
            return self._affine_cmp(_flip(op), b, a)
        if cb is None:
            # ca + ka  op  const
            m = kb - ka
            if op == "=":
                return [[self.dlit(ca, m)]]
            if op == "!=":
                return [[-self.dlit(ca, m)]]
            if op == "<=":
                return [[self.olit(ca, m)]]
            if op == "<":
                return [[self.olit(ca, m - 1)]]
            if op == ">=":
                return [[-self.olit(ca, m - 1)]]
            return [[-self.olit(ca, m)]]
        # two cells: condition on each value of cb
        out = []
        shift = kb - ka
        for v in self.domains[cb]:
            w = v + shift   # value ca must compare against
            neg = -self.dlit(cb, v)
            if op == "=":
                out.append([neg, self.dlit(ca, w)])
            elif op == "!=":
                out.append([neg, -self.dlit(ca, w)])
            elif op == "<=":
                out.append([neg, self.olit(ca, w)])
            elif op == "<":
                out.append([neg, self.olit(ca, w - 1)])
            elif op == ">=":
                out.append([neg, -self.olit(ca, w - 1)])
            else:
                out.append([neg, -self.olit(ca, w)])
        if op == "=":
            for v in self.domains[ca]:
                out.append([-self.dlit(ca, v), self.dlit(cb, v - shift)])
        return [c for c in out if c is not None]

    # -- counting and sum chains ----------------------------------------

    def chain_register(self, term):
        """Register cell holding the value of a sum(...) or count(..., v)."""
        if term[0] == "sumof":
            cells = []
            offset = 0
            for t in term[1]:
                av = self._affine(t)
                if av is None:
                    raise EncodingError("sum terms must be cells or constants")
                if av[0] is None:
                    offset += av[1]
                else:
                    cells.append(av)
            key = ("sum", tuple(cells), offset)
            if key in self.sum_cache:
                return self.sum_cache[key]
            reg = self._build_sum_chain(cells, offset)
            self.sum_cache[key] = reg
            return reg
        inds, base = self.count_indicators(term)
        return self._reg_for(inds, base)

    def aux_equiv(self, pos_clauses, formula):
        """Aux z with z <-> formula (both directions, usable as indicator)."""
        key = ("equiv", tuple(tuple(c) for c in pos_clauses))
        if key in self.auxlit_cache:
            return self.auxlit_cache[key]
        z = self.new_var(("aux", "indicator"))
        self.auxlit_cache[key] = z
        for c in pos_clauses:
            self.emit([-z] + c)
        for c in self.clausify(formula, negate=True):
            self.emit([z] + c)
        return z

    def _build_sum_chain(self, cells, offset):
        values = {offset}
        reg = None
        for cell, k in cells:
            dom = [d + k for d in self.domains[cell]]
            new_values = {a + b for a in values for b in dom}
            new_reg = self.fresh_register(new_values)
            for b in self.domains[cell]:
                blit = -self.dlit(cell, b)
                if reg is None:
                    self.emit([blit, self.dlit(new_reg, offset + b + k)])
                else:
                    for a in values:
                        self.emit([-self.dlit(reg, a), blit,
                                   self.dlit(new_reg, a + b + k)])
            values = new_values
            reg = new_reg
        if reg is None:
            reg = self.fresh_register({offset})
        return reg

    def _build_count_chain(self, inds, base):
        values = {base}
        reg = None
        for ind in inds:
            new_values = {a + b for a in values for b in (0, 1)}
            new_reg = self.fresh_register(new_values)
            for b, blit in ((1, ind), (0, -ind)):
                if reg is None:
                    self.emit([-blit, self.dlit(new_reg, base + b)])
                else:
                    for a in values:
                        self.emit([-self.dlit(reg, a), -blit,
                                   self.dlit(new_reg, a + b)])
            values = new_values
            reg = new_reg
        if reg is None:
            reg = self.fresh_register({base})
        return reg

    # -- alldifferent ----------------------------------------------------

    def alldiff_pieces(self, terms):
        """Pairwise (and, for permutations, at-least-one) pieces.

        Returns (formula, ("pair", i, j, k) | ("alo", k)) tuples; the
        formulas reference the original cell terms.
        """
        cells = []
        for t in terms:
            if t[0] != "cell":
                raise EncodingError("alldifferent needs plain cell arguments")
            cells.append((t[1], t[2]))
        values = sorted({d for c in cells for d in self.domains[c]})
        pieces = []
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                if cells[i] == cells[j]:
                    continue
                for k in values:
                    pieces.append((
                        ("or",
                         ("cmp", "!=", ("cell",) + cells[i], ("int", k)),
                         ("cmp", "!=", ("cell",) + cells[j], ("int", k))),
                        ("pair", i, j, k)))
        if len(cells) == len(values):
            for k in values:
                disj = None
                for c in cells:
                    atom = ("cmp", "=", ("cell",) + c, ("int", k))
                    disj = atom if disj is None else ("or", disj, atom)
                pieces.append((disj, ("alo", k)))
        return pieces


def _is_formula(t):
    # a nested comparison can only mean a truth value, so "=" against one
    # is an equivalence, not arithmetic
    return t[0] in ("and", "or", "not", "implies", "alldifferent", "cmp")


def _flip(op):
    return {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}[op]


def _cell_text(cell, model):
    name, idx = cell
    pos = "(" + ",".join(str(i) for i in idx) + ")"
    if len(model.var_names) <= 1:
        return pos
    return f"{name}{pos}"


def decompose_alldifferent(con, enc):
    """Expand a constraint whose body is a bare alldifferent into pairwise
    pieces (and at-least-one pieces when cells and values are in
    bijection), each with its own activation and description."""
    terms = con.formula[1]
    tpl_pair = con.description
    model = enc.model
    tpl_alo = None
    tpl = model.spec.templates.get(con.family)
    if tpl is not None and tpl.ge_text is not None:
        tpl_alo = dsl._render(tpl.ge_text, con.index,
                              {p.name: model.instance.bindings[p.name]
                               for p in model.spec.params})
    out = []
    cells = [(t[1], t[2]) for t in terms]
    for piece, tag in enc.alldiff_pieces(terms):
        if tag[0] == "pair":
            _, i, j, k = tag
            desc = (tpl_pair
                    .replace("{c1}", _cell_text(cells[i], model))
                    .replace("{c2}", _cell_text(cells[j], model))
                    .replace("{d}", str(k)))
            out.append(dsl.GroundCon(con.family, con.index + (i, j, k),
                                     desc, piece))
        else:
            _, k = tag
            base = tpl_alo if tpl_alo is not None else \
                "at least one of the cells {cells} must be {d}"
            desc = (base
                    .replace("{cells}", ", ".join(_cell_text(c, model)
                                                  for c in cells))
                    .replace("{d}", str(k)))
            out.append(dsl.GroundCon(con.family, con.index + (-1, -1, k),
                                     desc, piece))
    return out


def encode_raw(model):
    """Encode without trivial/identical removal or solution verification."""
    enc = _Encoder(model)
    # direct literals + exactly-one per declared cell
    for name, idx, rng, _ in model.cells:
        lits = []
        for d in rng:
            v = enc.new_var(("direct", name, idx, d))
            enc.litmap.forward[(name, idx, d)] = v
            lits.append(v)
        enc.emit(lits)
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                enc.emit([-lits[i], -lits[j]])
    # expand alldifferent constraint bodies into described pieces
    cons = []
    for con in model.cons:
        if con.formula[0] == "alldifferent":
            cons.extend(decompose_alldifferent(con, enc))
        else:
            cons.append(con)
    # activation variables, in final constraint order; counting halves
    # share the source index, so the role joins the tuple to keep every
    # activation's (family, index) unique
    encoded = []
    for con in cons:
        index = con.index + ((con.split_role,) if con.split_role else ())
        act = enc.new_var(("act", con.family, index))
        encoded.append(EncodedCon(
            act=act, description=con.description, family=con.family,
            index=index, clause_ids=[],
            origins=[(con.family, index, con.description)]))
    # hard formulas
    for f in model.hard:
        for cl in enc.clausify(f):
            enc.emit(cl)
    # guarded constraint clauses
    for con, ec in zip(cons, encoded):
        for cl in enc.clausify(con.formula):
            cid = enc.emit([-ec.act] + cl)
            if cid is not None:
                ec.clause_ids.append(cid)
    return EncodedPuzzle(
        model=model, clauses=enc.clauses, num_vars=enc.nvars,
        litmap=enc.litmap, cons=encoded, solution={},
        true_var=enc.true_var,
        ground_formulas={
            (c.family, c.index + ((c.split_role,) if c.split_role else ())):
            c.formula for c in cons})


def level0_assignment(puzzle):
    """Literals fixed by unit propagation over the clause database."""
    fixed = {}
    clauses = puzzle.clauses
    changed = True
    while changed:
        changed = False
        for cl in clauses:
            unassigned = []
            satisfied = False
            for l in cl:
                v = fixed.get(abs(l))
                if v is None:
                    unassigned.append(l)
                elif (l > 0) == v:
                    satisfied = True
                    break
            if satisfied:
                continue
            if len(unassigned) == 1:
                l = unassigned[0]
                fixed[abs(l)] = l > 0
                changed = True
    return fixed


def simplified_clause_sets(puzzle, fixed=None):
    """Per-activation canonical clause sets after given propagation.

    Satisfied clauses are dropped and false literals removed; the
    activation literal itself is excluded so identical constraints
    compare equal.
    """
    if fixed is None:
        fixed = level0_assignment(puzzle)
    out = {}
    for con in puzzle.cons:
        simp = set()
        for cid in con.clause_ids:
            kept = []
            satisfied = False
            for l in puzzle.clauses[cid]:
                if l == -con.act:
                    continue
                v = fixed.get(abs(l))
                if v is None:
                    kept.append(l)
                elif (l > 0) == v:
                    satisfied = True
                    break
            if not satisfied:
                simp.add(tuple(sorted(kept)))
        out[con.act] = frozenset(simp)
    return out


def remove_trivial(puzzle):
    """Drop activations with no remaining (unsatisfied) clauses."""
    simp = simplified_clause_sets(puzzle)
    puzzle.cons = [c for c in puzzle.cons if simp[c.act]]
    return puzzle


def dedup_identical(puzzle):
    """Merge activations whose simplified clause sets are identical."""
    simp = simplified_clause_sets(puzzle)
    survivors = {}
    out = []
    for con in puzzle.cons:
        key = simp[con.act]
        keeper = survivors.get(key)
        if keeper is None:
            survivors[key] = con
            out.append(con)
        else:
            keeper.origins.extend(con.origins)
    puzzle.cons = out
    return puzzle


def compute_scope(puzzle, con, _index=None):
    """Recursive literal closure deciding the constraint (its scope).

    Direct-encoding literals contribute their (cell, value); order
    literals contribute every value up to their bound; any other literal
    pulls in all literals of all clauses containing its negation.
    """
    if _index is None:
        _index = clause_index(puzzle)
    scope = set()
    seen = set()
    frontier = [con.act]
    while frontier:
        lit = frontier.pop()
        if lit in seen:
            continue
        seen.add(lit)
        tag = puzzle.litmap.tag(abs(lit))
        if tag[0] == "direct" and tag[1] != "_reg":
            scope.add(((tag[1], tag[2]), tag[3]))
            continue
        if tag[0] == "order" and tag[1] != "_reg":
            cell = (tag[1], tag[2])
            for v in puzzle.model.cell_domain(*cell):
                if v <= tag[3]:
                    scope.add((cell, v))
            continue
        if tag[0] == "aux" and tag[1] == "true":
            continue
        for cid in _index.get(-lit, ()):
            for l in puzzle.clauses[cid]:
                if l not in seen:
                    frontier.append(l)
    return frozenset(scope)


def clause_index(puzzle):
    index = {}
    for cid, cl in enumerate(puzzle.clauses):
        for l in cl:
            index.setdefault(l, []).append(cid)
    return index


def verify_unique_solution(puzzle, backend="auto"):
    """Check the puzzle has exactly one solution on VAR cells; store it."""
    eng = Engine(clauses=puzzle.clauses, num_vars=puzzle.num_vars,
                 backend=backend)
    acts = puzzle.activation_ids()
    outcome = eng.solve(acts)
    if outcome.status != SAT:
        raise NonUniqueError("instance has no solution")
    solution = {}
    blocking = []
    for cell in puzzle.var_cells():
        for v in puzzle.cell_values(*cell):
            lit = puzzle.litmap.direct(cell[0], cell[1], v)
            if lit in outcome.model:
                solution[cell] = v
                blocking.append(-lit)
    eng.add_clause(blocking)
    second = eng.solve(acts)
    if second.status == SAT:
        for cell, v in solution.items():
            for w in puzzle.cell_values(*cell):
                if w != v and puzzle.litmap.direct(cell[0], cell[1], w) \
                        in second.model:
                    raise NonUniqueError(
                        f"instance has multiple solutions: cell {cell} can "
                        f"be {v} or {w}", witness=(cell, v, w))
        raise NonUniqueError("instance has multiple solutions")
    puzzle.solution = solution
    return puzzle


def encode(model, verify=True, backend="auto"):
    """Full encoding pipeline: flatten, prune, scope, verify uniqueness."""
    puzzle = encode_raw(model)
    remove_trivial(puzzle)
    dedup_identical(puzzle)
    index = clause_index(puzzle)
    for con in puzzle.cons:
        con.scope = compute_scope(puzzle, con, index)
    if verify:
        verify_unique_solution(puzzle, backend=backend)
    return puzzle

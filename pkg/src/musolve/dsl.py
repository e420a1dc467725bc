"""Declarative puzzle language: parsing, validation and grounding.

A puzzle class is described in a small text language with three kinds of
declarations: ``param`` inputs, annotated ``find`` variables and
``such that`` constraints.  Every find carries exactly one of the
annotations @VAR (cells the player fills), @CON (boolean activation
variables standing for one human-readable constraint each) or @AUX
(helper variables invisible to the player).  Instances bind every param
to a concrete integer tensor; grounding expands the quantifiers into a
flat model of cells, hard formulas and described constraints.

Grounding is deterministic: quantifier tuples expand row-major and
constraint families keep declaration order, so identical (spec,
instance) pairs always produce identical ground models.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class DslError(Exception):
    """Parse or validation failure, with source position when known."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}:{col}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Surface AST


@dataclass(frozen=True)
class Range:
    lo: int
    hi: int

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __len__(self):
        return max(0, self.hi - self.lo + 1)

    def __contains__(self, v):
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class ParamDecl:
    name: str
    shape: tuple          # tuple of Range, () for scalar
    range: Range


@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str             # VAR | CON | AUX
    shape: tuple
    domain: Range
    is_bool: bool = False


# Expression nodes are tuples: (kind, ...).  Kinds:
#   ('int', n)                        ('ref', name, (idx_exprs...))
#   ('bind', name)                    quantifier-bound index variable
#   ('add'|'sub'|'mul', a, b)         ('neg', a)
#   ('cmp', op, a, b)                 op in = != < <= > >=
#   ('and'|'or', a, b)                ('not', a)     ('implies', a, b)
#   ('bool', True|False)
#   ('forall', binds, guard|None, body)   binds = ((name, Range), ...)
#   ('list', (exprs...))              ('comp', expr, binds, guard|None)
#   ('alldifferent', listexpr)        ('sumof', listexpr)
#   ('countof', listexpr, valexpr)


@dataclass(frozen=True)
class ConTemplate:
    text: str
    ge_text: str | None = None   # second half for split count/sum equalities


@dataclass(frozen=True)
class PuzzleSpec:
    name: str
    params: tuple
    decls: tuple
    templates: dict
    constraints: tuple    # surface constraint expressions, in order

    def decl(self, name):
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def param(self, name):
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Instance:
    spec_name: str
    bindings: dict        # param name -> int or nested lists


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<dots>\.\.)
  | (?P<num>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ann>@VAR|@CON|@AUX)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<op><->|->|<=|>=|!=|/\\|\\/|[=<>!+\-*,:.\[\]()|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


def tokenize(source):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise DslError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup
        if kind != "ws":
            if kind == "num" and text.startswith("-") and tokens and \
                    tokens[-1].kind in ("num", "name") :
                # "a -1" after an operand is subtraction, not a negative literal
                tokens.append(Token("op", "-", line, col))
                tokens.append(Token("num", text[1:], line, col + 1))
            else:
                tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}
_BUILTINS = {"alldifferent", "sum", "count"}
_KEYWORDS = {"puzzle", "param", "find", "template", "such", "that", "of",
             "forall", "where", "bool", "true", "false", "and", "or", "not",
             "instance"} | _BUILTINS


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self, ahead=0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise DslError(msg, tok.line, tok.col)

    def expect(self, value=None, kind=None):
        t = self.peek()
        if value is not None and t.value != value:
            self.error(f"expected {value!r}, found {t.value!r}")
        if kind is not None and t.kind != kind:
            self.error(f"expected {kind}, found {t.value!r}")
        return self.next()

    def at(self, value):
        return self.peek().value == value

    # -- declarations ---------------------------------------------------

    def parse_spec(self):
        if self.peek().kind == "eof":
            self.error("no puzzle declaration")
        self.expect("puzzle")
        name = self.expect(kind="name").value
        params, decls, constraints = [], [], []
        templates = {}
        while self.peek().kind != "eof":
            t = self.peek()
            if t.value == "param":
                params.append(self.parse_param())
            elif t.kind == "ann" or t.value == "find":
                decls.append(self.parse_find())
            elif t.value == "template":
                n, tpl = self.parse_template()
                if n in templates:
                    self.error(f"duplicate template for {n}", t)
                templates[n] = tpl
            elif t.value == "such":
                self.next()
                self.expect("that")
                constraints.append(self.parse_expr())
                while self.at(","):
                    self.next()
                    constraints.append(self.parse_expr())
            else:
                self.error(f"unexpected token {t.value!r}")
        spec = PuzzleSpec(name, tuple(params), tuple(decls), templates,
                          tuple(constraints))
        _validate_spec(spec)
        return spec

    def parse_param(self):
        self.expect("param")
        name = self.expect(kind="name").value
        self.expect(":")
        shape = self.parse_shape()
        self.expect("of")
        rng = self.parse_range()
        return ParamDecl(name, shape, rng)

    def parse_find(self):
        t = self.peek()
        if t.kind != "ann":
            if t.value == "find":
                self.error("missing annotation on find declaration", t)
            self.error(f"unexpected token {t.value!r}")
        kind = self.next().value[1:]
        self.expect("find")
        name = self.expect(kind="name").value
        self.expect(":")
        shape = self.parse_shape()
        self.expect("of")
        if self.at("bool"):
            self.next()
            return VarDecl(name, kind, shape, Range(0, 1), is_bool=True)
        rng = self.parse_range()
        return VarDecl(name, kind, shape, rng)

    def parse_template(self):
        self.expect("template")
        name = self.expect(kind="name").value
        text = _unquote(self.expect(kind="str").value)
        ge_text = None
        if self.peek().kind == "str":
            ge_text = _unquote(self.next().value)
        return name, ConTemplate(text, ge_text)

    def parse_shape(self):
        if not self.at("["):
            return ()
        self.next()
        dims = [self.parse_range()]
        while self.at(","):
            self.next()
            dims.append(self.parse_range())
        self.expect("]")
        for d in dims:
            if len(d) == 0:
                self.error("empty range in shape")
        return tuple(dims)

    def parse_range(self):
        lo = self.parse_int()
        self.expect("..")
        hi = self.parse_int()
        return Range(lo, hi)

    def parse_int(self):
        negate = False
        if self.at("-"):
            self.next()
            negate = True
        t = self.expect(kind="num")
        v = int(t.value)
        return -v if negate else v

    # -- expressions ----------------------------------------------------

    def parse_expr(self):
        if self.at("forall"):
            return self.parse_forall()
        lhs = self.parse_or()
        if self.at("->"):
            self.next()
            rhs = self.parse_expr()
            return ("implies", lhs, rhs)
        if self.at("<->"):
            self.next()
            rhs = self.parse_expr()
            return ("cmp", "=", lhs, rhs)
        return lhs

    def parse_forall(self):
        self.expect("forall")
        binds = self.parse_binds()
        guard = None
        if self.at("where"):
            self.next()
            guard = self.parse_or()
        self.expect(".")
        body = self.parse_expr()
        return ("forall", binds, guard, body)

    def parse_binds(self):
        binds = []
        while True:
            names = [self.expect(kind="name").value]
            while self.at(","):
                self.next()
                names.append(self.expect(kind="name").value)
            self.expect(":")
            rng = self.parse_range()
            binds.extend((n, rng) for n in names)
            if self.at(","):
                self.next()
                continue
            return tuple(binds)

    def parse_or(self):
        lhs = self.parse_and()
        while self.peek().value in ("\\/", "or"):
            self.next()
            lhs = ("or", lhs, self.parse_and())
        return lhs

    def parse_and(self):
        lhs = self.parse_not()
        while self.peek().value in ("/\\", "and"):
            self.next()
            lhs = ("and", lhs, self.parse_not())
        return lhs

    def parse_not(self):
        if self.peek().value in ("!", "not"):
            self.next()
            return ("not", self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self):
        lhs = self.parse_sum()
        if self.peek().value in _CMP_OPS:
            op = self.next().value
            rhs = self.parse_sum()
            return ("cmp", op, lhs, rhs)
        return lhs

    def parse_sum(self):
        lhs = self.parse_term()
        while self.peek().value in ("+", "-"):
            op = self.next().value
            rhs = self.parse_term()
            lhs = ("add" if op == "+" else "sub", lhs, rhs)
        return lhs

    def parse_term(self):
        lhs = self.parse_factor()
        while self.at("*"):
            self.next()
            lhs = ("mul", lhs, self.parse_factor())
        return lhs

    def parse_factor(self):
        t = self.peek()
        if t.value == "-":
            self.next()
            return ("neg", self.parse_factor())
        if t.kind == "num":
            self.next()
            return ("int", int(t.value))
        if t.value == "true":
            self.next()
            return ("bool", True)
        if t.value == "false":
            self.next()
            return ("bool", False)
        if t.value == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.value == "[":
            return self.parse_list()
        if t.value == "forall":
            return self.parse_forall()
        if t.value in _BUILTINS:
            return self.parse_builtin()
        if t.kind == "name":
            self.next()
            if self.at("["):
                self.next()
                idx = [self.parse_expr()]
                while self.at(","):
                    self.next()
                    idx.append(self.parse_expr())
                self.expect("]")
                return ("ref", t.value, tuple(idx))
            return ("ref", t.value, ())
        self.error(f"unexpected token {t.value!r}")

    def parse_builtin(self):
        name = self.next().value
        self.expect("(")
        lst = self.parse_list_arg()
        if name == "alldifferent":
            self.expect(")")
            return ("alldifferent", lst)
        if name == "sum":
            self.expect(")")
            return ("sumof", lst)
        self.expect(",")
        val = self.parse_expr()
        self.expect(")")
        return ("countof", lst, val)

    def parse_list_arg(self):
        if self.at("["):
            return self.parse_list()
        self.error("expected a list argument")

    def parse_list(self):
        self.expect("[")
        first = self.parse_expr()
        if self.at("|"):
            self.next()
            binds = self.parse_binds()
            guard = None
            if self.at("where"):
                self.next()
                guard = self.parse_or()
            self.expect("]")
            return ("comp", first, binds, guard)
        items = [first]
        while self.at(","):
            self.next()
            items.append(self.parse_expr())
        self.expect("]")
        return ("list", tuple(items))

    # -- instances ------------------------------------------------------

    def parse_instance(self):
        if self.peek().kind == "eof":
            self.error("empty instance file")
        self.expect("instance")
        name = self.expect(kind="name").value
        bindings = {}
        while self.peek().kind != "eof":
            self.expect("param")
            pname = self.expect(kind="name").value
            self.expect("=")
            if pname in bindings:
                self.error(f"duplicate binding for param {pname!r}")
            bindings[pname] = self.parse_tensor()
        return Instance(name, bindings)

    def parse_tensor(self):
        if self.at("["):
            self.next()
            items = []
            if not self.at("]"):
                items.append(self.parse_tensor())
                while self.at(","):
                    self.next()
                    items.append(self.parse_tensor())
            self.expect("]")
            return items
        return self.parse_int()


def _unquote(s):
    return s[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _validate_spec(spec):
    names = set()
    for d in list(spec.params) + list(spec.decls):
        if d.name in names:
            raise DslError(f"duplicate name {d.name!r}")
        names.add(d.name)
    for d in spec.decls:
        if d.kind == "CON":
            if not d.is_bool:
                raise DslError(f"CON variable {d.name!r} must be bool")
            if d.name not in spec.templates:
                raise DslError(f"CON variable {d.name!r} has no template")
    for tname in spec.templates:
        d = spec.decl(tname)
        if d is None or d.kind != "CON":
            raise DslError(f"template for non-CON name {tname!r}")


def parse_spec(source):
    return _Parser(tokenize(source)).parse_spec()


def parse_instance(source, spec):
    inst = _Parser(tokenize(source)).parse_instance()
    if inst.spec_name != spec.name:
        raise DslError(
            f"instance is for {inst.spec_name!r}, not {spec.name!r}")
    for p in spec.params:
        if p.name not in inst.bindings:
            raise DslError(f"missing param {p.name!r}")
        _check_tensor(p, inst.bindings[p.name])
    for name in inst.bindings:
        if spec.param(name) is None:
            raise DslError(f"unknown param {name!r}")
    return inst


def _check_tensor(p, value, depth=0):
    if depth == len(p.shape):
        if not isinstance(value, int):
            raise DslError(f"param {p.name!r}: shape mismatch")
        if value not in p.range:
            raise DslError(
                f"param {p.name!r}: value {value} outside {p.range.lo}.."
                f"{p.range.hi}")
        return
    rng = p.shape[depth]
    if not isinstance(value, list) or len(value) != len(rng):
        raise DslError(
            f"param {p.name!r}: shape mismatch at dimension {depth + 1}")
    for v in value:
        _check_tensor(p, v, depth + 1)


# ---------------------------------------------------------------------------
# Pretty printer (round-trip support)


def pretty(spec):
    out = [f"puzzle {spec.name}"]
    for p in spec.params:
        out.append(f"param {p.name} : {_fmt_shape(p.shape)}of "
                   f"{p.range.lo}..{p.range.hi}")
    for d in spec.decls:
        dom = "bool" if d.is_bool and d.kind != "VAR" and d.domain == Range(0, 1) \
            else f"{d.domain.lo}..{d.domain.hi}"
        if d.is_bool:
            dom = "bool"
        out.append(f"@{d.kind} find {d.name} : {_fmt_shape(d.shape)}of {dom}")
        tpl = spec.templates.get(d.name)
        if tpl is not None:
            line = f'template {d.name} "{_escape(tpl.text)}"'
            if tpl.ge_text is not None:
                line += f' "{_escape(tpl.ge_text)}"'
            out.append(line)
    for c in spec.constraints:
        out.append(f"such that {_fmt_expr(c)}")
    return "\n".join(out) + "\n"


def _escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _fmt_shape(shape):
    if not shape:
        return ""
    dims = ", ".join(f"{r.lo}..{r.hi}" for r in shape)
    return f"[{dims}] "


def _fmt_binds(binds):
    return ", ".join(f"{n} : {r.lo}..{r.hi}" for n, r in binds)


def _fmt_expr(e):
    kind = e[0]
    if kind == "int":
        return str(e[1])
    if kind == "bool":
        return "true" if e[1] else "false"
    if kind == "ref":
        if not e[2]:
            return e[1]
        return f"{e[1]}[{', '.join(_fmt_expr(i) for i in e[2])}]"
    if kind == "neg":
        return f"-({_fmt_expr(e[1])})"
    if kind in ("add", "sub", "mul"):
        op = {"add": "+", "sub": "-", "mul": "*"}[kind]
        return f"({_fmt_expr(e[1])} {op} {_fmt_expr(e[2])})"
    if kind == "cmp":
        return f"({_fmt_expr(e[2])} {e[1]} {_fmt_expr(e[3])})"
    if kind == "and":
        return f"({_fmt_expr(e[1])} /\\ {_fmt_expr(e[2])})"
    if kind == "or":
        return f"({_fmt_expr(e[1])} \\/ {_fmt_expr(e[2])})"
    if kind == "not":
        return f"!({_fmt_expr(e[1])})"
    if kind == "implies":
        return f"({_fmt_expr(e[1])} -> {_fmt_expr(e[2])})"
    if kind == "forall":
        guard = f" where {_fmt_expr(e[2])}" if e[2] is not None else ""
        return f"forall {_fmt_binds(e[1])}{guard} . {_fmt_expr(e[3])}"
    if kind == "list":
        return f"[{', '.join(_fmt_expr(i) for i in e[1])}]"
    if kind == "comp":
        guard = f" where {_fmt_expr(e[3])}" if e[3] is not None else ""
        return f"[{_fmt_expr(e[1])} | {_fmt_binds(e[2])}{guard}]"
    if kind == "alldifferent":
        return f"alldifferent({_fmt_expr(e[1])})"
    if kind == "sumof":
        return f"sum({_fmt_expr(e[1])})"
    if kind == "countof":
        return f"count({_fmt_expr(e[1])}, {_fmt_expr(e[2])})"
    raise ValueError(f"unknown node {kind!r}")


# ---------------------------------------------------------------------------
# Grounding


@dataclass(frozen=True)
class GroundCon:
    family: str
    index: tuple
    description: str
    formula: tuple
    split_role: str = ""   # "", "le" or "ge" for split counting halves


@dataclass
class GroundModel:
    spec: PuzzleSpec
    instance: Instance
    cells: list            # [(name, index-tuple, Range, is_bool)] VAR+AUX
    var_names: set         # names of VAR-kind matrices
    hard: list             # ground formulas, always enforced
    cons: list             # list[GroundCon]

    def cell_domain(self, name, index):
        d = self.spec.decl(name)
        return d.domain


def ground(spec, inst):
    """Expand quantifiers into a flat model.

    Each iteration of a CON family's quantifier becomes one ground
    constraint with its rendered description; count/sum equalities inside
    CON bodies are split into an at-most and an at-least half, each with
    its own activation, when the template provides both descriptions.
    """
    params = {p.name: inst.bindings[p.name] for p in spec.params}
    g = _Grounder(spec, params)
    cells = []
    for d in spec.decls:
        if d.kind == "CON":
            continue
        for index in _index_tuples(d.shape):
            cells.append((d.name, index, d.domain, d.is_bool))
    for c in spec.constraints:
        g.ground_constraint(c)
    return GroundModel(
        spec=spec,
        instance=inst,
        cells=cells,
        var_names={d.name for d in spec.decls if d.kind == "VAR"},
        hard=g.hard,
        cons=g.cons,
    )


def _index_tuples(shape):
    if not shape:
        return [()]
    out = [()]
    for rng in shape:
        out = [t + (v,) for t in out for v in rng]
    return out


class _Grounder:
    def __init__(self, spec, params):
        self.spec = spec
        self.params = params
        self.hard = []
        self.cons = []
        self.seen_con_cells = set()

    def ground_constraint(self, expr, env=None):
        env = env or {}
        if expr[0] == "forall":
            _, binds, guard, body = expr
            for tup in _index_tuples(tuple(r for _, r in binds)):
                inner = dict(env)
                inner.update({n: v for (n, _), v in zip(binds, tup)})
                if guard is not None and not _truthy(self.eval_static(guard, inner)):
                    continue
                self.ground_constraint(body, inner)
            return
        # A constraint whose antecedent is a CON cell founds a family entry.
        if expr[0] == "implies" and expr[1][0] == "ref":
            name = expr[1][1]
            d = self.spec.decl(name)
            if d is not None and d.kind == "CON":
                self.emit_con(name, expr[1][2], expr[2], env)
                return
        f = self.ground_formula(expr, env)
        if f == ("bool", True):
            return
        if f == ("bool", False):
            raise DslError("hard constraint is false after grounding")
        self.hard.append(f)

    def emit_con(self, name, idx_exprs, body, env):
        d = self.spec.decl(name)
        index = tuple(self.eval_static(i, env) for i in idx_exprs)
        if len(index) != len(d.shape):
            raise DslError(f"{name}: wrong index arity")
        for v, rng in zip(index, d.shape):
            if v not in rng:
                raise DslError(f"{name}{list(index)}: index out of bounds")
        if (name, index) in self.seen_con_cells:
            raise DslError(
                f"{name}{list(index)} used by more than one quantified body")
        self.seen_con_cells.add((name, index))
        formula = self.ground_formula(body, env)
        tpl = self.spec.templates[name]
        split = _split_count_equality(formula)
        if split is not None and tpl.ge_text is not None:
            le_f, ge_f = split
            self.cons.append(GroundCon(
                name, index, _render(tpl.text, index, self.params),
                le_f, split_role="le"))
            self.cons.append(GroundCon(
                name, index, _render(tpl.ge_text, index, self.params),
                ge_f, split_role="ge"))
            return
        if split is not None and tpl.ge_text is None:
            raise DslError(
                f"{name}: count/sum equality needs an at-most and an "
                f"at-least template")
        self.cons.append(GroundCon(
            name, index, _render(tpl.text, index, self.params), formula))

    # Static evaluation: indices and params only (guards, index arithmetic).
    def eval_static(self, expr, env):
        kind = expr[0]
        if kind == "int":
            return expr[1]
        if kind == "bool":
            return expr[1]
        if kind == "ref":
            name = expr[1]
            if name in env and not expr[2]:
                return env[name]
            if name in self.params:
                val = self.params[name]
                for i in expr[2]:
                    iv = self.eval_static(i, env)
                    p = self.spec.param(name)
                    dim = p.shape[len(p.shape) - _depth_of(val)]
                    if iv not in dim:
                        raise DslError(
                            f"param {name}: index {iv} out of bounds")
                    val = val[iv - dim.lo]
                return val
            raise DslError(
                f"{name!r} is not usable in a guard or index expression")
        if kind == "neg":
            return -self.eval_static(expr[1], env)
        if kind in ("add", "sub", "mul"):
            a = self.eval_static(expr[1], env)
            b = self.eval_static(expr[2], env)
            return a + b if kind == "add" else a - b if kind == "sub" else a * b
        if kind == "cmp":
            a = self.eval_static(expr[2], env)
            b = self.eval_static(expr[3], env)
            return _cmp(expr[1], a, b)
        if kind == "and":
            return _truthy(self.eval_static(expr[1], env)) and \
                _truthy(self.eval_static(expr[2], env))
        if kind == "or":
            return _truthy(self.eval_static(expr[1], env)) or \
                _truthy(self.eval_static(expr[2], env))
        if kind == "not":
            return not _truthy(self.eval_static(expr[1], env))
        if kind == "implies":
            return (not _truthy(self.eval_static(expr[1], env))) or \
                _truthy(self.eval_static(expr[2], env))
        raise DslError(f"node {kind!r} not allowed in static context")

    # Full grounding: cells stay symbolic, everything else folds.
    def ground_formula(self, expr, env):
        kind = expr[0]
        if kind in ("int", "bool"):
            return expr
        if kind == "ref":
            name = expr[1]
            if name in env and not expr[2]:
                return ("int", env[name])
            if name in self.params:
                return ("int", self.eval_static(expr, env))
            d = self.spec.decl(name)
            if d is None:
                raise DslError(f"unknown name {name!r}")
            if d.kind == "CON":
                raise DslError(
                    f"CON variable {name!r} may only appear as an "
                    f"implication antecedent")
            index = tuple(self.eval_static(i, env) for i in expr[2])
            if len(index) != len(d.shape):
                raise DslError(f"{name}: wrong index arity")
            for v, rng in zip(index, d.shape):
                if v not in rng:
                    raise DslError(f"{name}{list(index)}: index out of bounds")
            return ("cell", name, index)
        if kind == "neg":
            a = self.ground_formula(expr[1], env)
            if a[0] == "int":
                return ("int", -a[1])
            return ("neg", a)
        if kind in ("add", "sub", "mul"):
            a = self.ground_formula(expr[1], env)
            b = self.ground_formula(expr[2], env)
            if a[0] == "int" and b[0] == "int":
                return ("int", a[1] + b[1] if kind == "add"
                        else a[1] - b[1] if kind == "sub" else a[1] * b[1])
            return (kind, a, b)
        if kind == "cmp":
            a = self.ground_formula(expr[2], env)
            b = self.ground_formula(expr[3], env)
            if a[0] == "int" and b[0] == "int":
                return ("bool", _cmp(expr[1], a[1], b[1]))
            return ("cmp", expr[1], a, b)
        if kind in ("and", "or"):
            a = self.ground_formula(expr[1], env)
            b = self.ground_formula(expr[2], env)
            if a[0] == "bool":
                if kind == "and":
                    return b if a[1] else ("bool", False)
                return ("bool", True) if a[1] else b
            if b[0] == "bool":
                if kind == "and":
                    return a if b[1] else ("bool", False)
                return ("bool", True) if b[1] else a
            return (kind, a, b)
        if kind == "not":
            a = self.ground_formula(expr[1], env)
            if a[0] == "bool":
                return ("bool", not a[1])
            return ("not", a)
        if kind == "implies":
            a = self.ground_formula(expr[1], env)
            b = self.ground_formula(expr[2], env)
            if a[0] == "bool":
                return b if a[1] else ("bool", True)
            if b[0] == "bool" and b[1]:
                return ("bool", True)
            return ("implies", a, b)
        if kind == "forall":
            _, binds, guard, body = expr
            parts = []
            for tup in _index_tuples(tuple(r for _, r in binds)):
                inner = dict(env)
                inner.update({n: v for (n, _), v in zip(binds, tup)})
                if guard is not None and \
                        not _truthy(self.eval_static(guard, inner)):
                    continue
                parts.append(self.ground_formula(body, inner))
            return _fold_and(parts)
        if kind in ("alldifferent", "sumof"):
            return (kind, tuple(self.ground_list(expr[1], env)))
        if kind == "countof":
            val = self.ground_formula(expr[2], env)
            return ("countof", tuple(self.ground_list(expr[1], env)), val)
        raise DslError(f"cannot ground node {kind!r}")

    def ground_list(self, lst, env):
        if lst[0] == "list":
            return [self.ground_formula(e, env) for e in lst[1]]
        if lst[0] == "comp":
            _, body, binds, guard = lst
            out = []
            for tup in _index_tuples(tuple(r for _, r in binds)):
                inner = dict(env)
                inner.update({n: v for (n, _), v in zip(binds, tup)})
                if guard is not None and \
                        not _truthy(self.eval_static(guard, inner)):
                    continue
                out.append(self.ground_formula(body, inner))
            return out
        raise DslError("expected a list")


def _depth_of(val):
    d = 0
    while isinstance(val, list):
        d += 1
        val = val[0]
    return d


def _truthy(v):
    if isinstance(v, bool):
        return v
    raise DslError("expected a boolean value")


def _cmp(op, a, b):
    a = int(a)
    b = int(b)
    return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
            ">": a > b, ">=": a >= b}[op]


def _fold_and(parts):
    parts = [p for p in parts if p != ("bool", True)]
    if not parts:
        return ("bool", True)
    if any(p == ("bool", False) for p in parts):
        return ("bool", False)
    out = parts[0]
    for p in parts[1:]:
        out = ("and", out, p)
    return out


def _split_count_equality(formula):
    """Split ``count(...) = k`` / ``sum(...) = k`` into (<=, >=) halves."""
    if formula[0] != "cmp" or formula[1] != "=":
        return None
    lhs, rhs = formula[2], formula[3]
    if rhs[0] in ("countof", "sumof") and lhs[0] == "int":
        lhs, rhs = rhs, lhs
    if lhs[0] in ("countof", "sumof") and rhs[0] == "int":
        return (("cmp", "<=", lhs, rhs), ("cmp", ">=", lhs, rhs))
    return None


_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")


def _render(template, index, params):
    """Substitute ``{a[i]}`` (with optional +n/-n), ``{name}`` and
    ``{name[a[i], ...]}`` placeholders."""

    def repl(m):
        body = m.group(1).strip()
        if body in ("c1", "c2", "d", "cells"):
            return m.group(0)   # filled in later by alldifferent expansion
        am = re.fullmatch(r"a\[(\d+)\]\s*([+-]\s*\d+)?", body)
        if am:
            v = index[int(am.group(1))]
            if am.group(2):
                v += int(am.group(2).replace(" ", ""))
            return str(v)
        pm = re.fullmatch(r"(\w+)(?:\[(.*)\])?", body)
        if pm and pm.group(1) in params:
            val = params[pm.group(1)]
            if pm.group(2):
                for part in pm.group(2).split(","):
                    part = part.strip()
                    im = re.fullmatch(r"a\[(\d+)\]\s*([+-]\s*\d+)?", part)
                    if im:
                        i = index[int(im.group(1))]
                        if im.group(2):
                            i += int(im.group(2).replace(" ", ""))
                    else:
                        i = int(part)
                    val = val[i - 1]
            return str(val)
        raise DslError(f"bad template placeholder {{{body}}}")

    return _PLACEHOLDER_RE.sub(repl, template)


# ---------------------------------------------------------------------------
# Ground-formula evaluation (used by property tests and model checks)


def eval_term(term, assignment):
    kind = term[0]
    if kind == "int":
        return term[1]
    if kind == "bool":
        return 1 if term[1] else 0
    if kind == "cell":
        return assignment[(term[1], term[2])]
    if kind == "neg":
        return -eval_term(term[1], assignment)
    if kind == "add":
        return eval_term(term[1], assignment) + eval_term(term[2], assignment)
    if kind == "sub":
        return eval_term(term[1], assignment) - eval_term(term[2], assignment)
    if kind == "mul":
        return eval_term(term[1], assignment) * eval_term(term[2], assignment)
    if kind == "sumof":
        return sum(eval_term(t, assignment) for t in term[1])
    if kind == "countof":
        v = eval_term(term[2], assignment)
        return sum(1 for t in term[1] if eval_term(t, assignment) == v)
    if kind in ("cmp", "and", "or", "not", "implies", "alldifferent"):
        return 1 if eval_formula(term, assignment) else 0
    raise ValueError(f"cannot evaluate term {kind!r}")


def eval_formula(f, assignment):
    kind = f[0]
    if kind == "bool":
        return f[1]
    if kind == "cmp":
        return _cmp(f[1], eval_term(f[2], assignment),
                    eval_term(f[3], assignment))
    if kind == "and":
        return eval_formula(f[1], assignment) and eval_formula(f[2], assignment)
    if kind == "or":
        return eval_formula(f[1], assignment) or eval_formula(f[2], assignment)
    if kind == "not":
        return not eval_formula(f[1], assignment)
    if kind == "implies":
        return (not eval_formula(f[1], assignment)) or \
            eval_formula(f[2], assignment)
    if kind == "alldifferent":
        vals = [eval_term(t, assignment) for t in f[1]]
        return len(vals) == len(set(vals))
    if kind == "cell":
        return eval_term(f, assignment) != 0
    raise ValueError(f"cannot evaluate formula {kind!r}")

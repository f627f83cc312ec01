"""Finite geometric logic and groupoids of indexed models.

Formulas live in the geometric fragment: relation and equality atoms,
truth, falsity, binary conjunction, finitary disjunction and existential
quantification.  Depth counts connective/quantifier nesting (atoms have
depth 0).  Concrete syntax:

    T    F    R(t1,...,tn)    t1 = t2    phi /\\ psi
    phi1 \\/ ... \\/ phik      exists x:Sort. phi

with precedence exists < \\/ < /\\ < atoms; exists extends maximally to
the right.  The printer emits a form the parser maps back to the same
tree.

A groupoid of indexed models carries the topologies generated by
formula-with-parameter satisfaction sets on objects and by parameter
transport sets (together with source/target preimages) on arrows.  Both
are computed at a bounded formula depth and bounded parameter tuple
length; results record the achieved depth and whether consecutive
depths produced identical open families.  Definable-set search is
semantic: formulas are enumerated by depth with one canonical
representative kept per satisfaction extension across the member
models.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, permutations, product
from typing import NamedTuple

from . import fintop
from .errors import CapExceeded, FormulaError, InputError
from .fintop import ckey
from .grpd import Subgroupoid, TopGroupoid
from .weq import Verdict

DEFAULT_TUPLE_CAP = 3
DEFAULT_FORMULA_BUDGET = 2048


# -- signatures -------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    sorts: tuple
    relations: tuple  # pairs (name, tuple of sorts)
    constants: tuple  # pairs (name, sort)

    def __post_init__(self):
        for _, arity in self.relations:
            for s in arity:
                if s not in self.sorts:
                    raise InputError(f"relation arity uses undeclared sort {s}")
        for _, s in self.constants:
            if s not in self.sorts:
                raise InputError(f"constant uses undeclared sort {s}")

    @property
    def relation_arities(self):
        return dict(self.relations)

    @property
    def constant_sorts(self):
        return dict(self.constants)


def make_signature(sorts, relations=(), constants=()) -> Signature:
    return Signature(
        tuple(sorts),
        tuple((n, tuple(a)) for n, a in dict(relations).items()),
        tuple(dict(constants).items()),
    )


# -- terms and formulas ------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Eq:
    left: object
    right: object


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    disjuncts: tuple  # length >= 2


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: object


def make_and(parts):
    parts = list(parts)
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def make_or(parts):
    parts = list(parts)
    if not parts:
        return Bot()
    if len(parts) == 1:
        return parts[0]
    return Or(tuple(parts))


def depth(ast) -> int:
    if isinstance(ast, (Top, Bot, Eq, Rel)):
        return 0
    if isinstance(ast, And):
        return 1 + max(depth(ast.left), depth(ast.right))
    if isinstance(ast, Or):
        return 1 + max(depth(d) for d in ast.disjuncts)
    if isinstance(ast, Exists):
        return 1 + depth(ast.body)
    raise InputError(f"not a formula node: {ast!r}")


def free_vars(ast) -> frozenset:
    if isinstance(ast, (Top, Bot)):
        return frozenset()
    if isinstance(ast, Eq):
        return frozenset(
            t.name for t in (ast.left, ast.right) if isinstance(t, Var)
        )
    if isinstance(ast, Rel):
        return frozenset(t.name for t in ast.args if isinstance(t, Var))
    if isinstance(ast, And):
        return free_vars(ast.left) | free_vars(ast.right)
    if isinstance(ast, Or):
        return frozenset().union(*(free_vars(d) for d in ast.disjuncts))
    if isinstance(ast, Exists):
        return free_vars(ast.body) - {ast.var}
    raise InputError(f"not a formula node: {ast!r}")


@dataclass(frozen=True)
class GeometricFormula:
    """A well-sorted geometric formula together with its typed context."""

    ast: object
    context: tuple  # pairs (var name, sort), free vars of ast a subset
    signature: Signature

    def __post_init__(self):
        ctx = dict(self.context)
        if len(ctx) != len(self.context):
            raise InputError("duplicate variable in context")
        missing = free_vars(self.ast) - set(ctx)
        if missing:
            raise InputError(f"free variables outside context: {sorted(missing)}")
        _sort_of(self.ast, ctx, self.signature)

    def __str__(self):
        return print_formula(self.ast)


def _term_sort(t, env, sig: Signature, pos=None):
    if isinstance(t, Var):
        if t.name not in env:
            raise FormulaError(f"unbound variable {t.name}", pos)
        return env[t.name]
    if isinstance(t, Const):
        cs = sig.constant_sorts
        if t.name not in cs:
            raise FormulaError(f"undeclared constant {t.name}", pos)
        return cs[t.name]
    raise InputError(f"not a term: {t!r}")


def _sort_of(ast, env, sig: Signature, pos=None):
    """Well-sortedness check; raises FormulaError on violations."""
    if isinstance(ast, (Top, Bot)):
        return
    if isinstance(ast, Eq):
        ls = _term_sort(ast.left, env, sig, pos)
        rs = _term_sort(ast.right, env, sig, pos)
        if ls != rs:
            raise FormulaError(f"equality between sorts {ls} and {rs}", pos)
        return
    if isinstance(ast, Rel):
        arities = sig.relation_arities
        if ast.name not in arities:
            raise FormulaError(f"undeclared relation {ast.name}", pos)
        arity = arities[ast.name]
        if len(ast.args) != len(arity):
            raise FormulaError(f"relation {ast.name} expects {len(arity)} arguments", pos)
        for t, s in zip(ast.args, arity):
            if _term_sort(t, env, sig, pos) != s:
                raise FormulaError(f"argument of {ast.name} has wrong sort", pos)
        return
    if isinstance(ast, And):
        _sort_of(ast.left, env, sig, pos)
        _sort_of(ast.right, env, sig, pos)
        return
    if isinstance(ast, Or):
        for d in ast.disjuncts:
            _sort_of(d, env, sig, pos)
        return
    if isinstance(ast, Exists):
        if ast.sort not in sig.sorts:
            raise FormulaError(f"undeclared sort {ast.sort}", pos)
        _sort_of(ast.body, dict(env, **{ast.var: ast.sort}), sig, pos)
        return
    raise InputError(f"not a formula node: {ast!r}")


# -- printer ----------------------------------------------------------------


def _print_term(t):
    return t.name


def _print(ast, prec):
    # precedence levels: exists 0 < or 1 < and 2 < atoms 3
    if isinstance(ast, Top):
        return "T"
    if isinstance(ast, Bot):
        return "F"
    if isinstance(ast, Eq):
        return f"{_print_term(ast.left)} = {_print_term(ast.right)}"
    if isinstance(ast, Rel):
        return f"{ast.name}({', '.join(_print_term(a) for a in ast.args)})"
    if isinstance(ast, And):
        s = f"{_print(ast.left, 2)} /\\ {_print(ast.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(ast, Or):
        s = " \\/ ".join(_print(d, 2) for d in ast.disjuncts)
        return f"({s})" if prec > 1 else s
    if isinstance(ast, Exists):
        s = f"exists {ast.var}:{ast.sort}. {_print(ast.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise InputError(f"not a formula node: {ast!r}")


def print_formula(ast) -> str:
    return _print(ast, 0)


# -- parser -----------------------------------------------------------------

_SYMBOLS = ("/\\", "\\/", "(", ")", ",", "=", ".", ":")


def _lex(text):
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                out.append((sym, i))
                i += len(sym)
                break
        else:
            if c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] in "_'"):
                    j += 1
                out.append((text[i:j], i))
                i = j
            else:
                raise FormulaError(f"unexpected character {c!r}", i)
    out.append((None, n))
    return out


class _Parser:
    def __init__(self, tokens, sig: Signature):
        self.toks = tokens
        self.pos = 0
        self.sig = sig

    def peek(self):
        return self.toks[self.pos][0]

    def here(self):
        return self.toks[self.pos][1]

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, sym):
        tok, at = self.next()
        if tok != sym:
            raise FormulaError(f"expected {sym!r}, found {tok!r}", at)

    def formula(self):
        if self.peek() == "exists":
            self.next()
            var, vat = self.next()
            if var is None or not var[0].isalpha():
                raise FormulaError("expected a variable after 'exists'", vat)
            if self.peek() == ":":
                self.next()
                sort, sat = self.next()
                if sort not in self.sig.sorts:
                    raise FormulaError(f"undeclared sort {sort!r}", sat)
            elif len(self.sig.sorts) == 1:
                # sort annotation may be dropped over a single-sorted signature
                sort = self.sig.sorts[0]
            else:
                raise FormulaError("bound variable needs a sort annotation", vat)
            self.expect(".")
            return Exists(var, sort, self.formula())
        return self.disjunction()

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek() == "\\/":
            self.next()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        out = self.atom()
        while self.peek() == "/\\":
            self.next()
            out = And(out, self.atom())
        return out

    def term(self):
        name, at = self.next()
        if name is None or not (name[0].isalpha() or name[0] == "_"):
            raise FormulaError(f"expected a term, found {name!r}", at)
        if name in self.sig.constant_sorts:
            return Const(name)
        return Var(name)

    def atom(self):
        tok, at = self.toks[self.pos]
        if tok == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok == "T":
            self.next()
            return Top()
        if tok == "F":
            self.next()
            return Bot()
        if tok is None:
            raise FormulaError("unexpected end of input", at)
        if self.toks[self.pos + 1][0] == "(":
            if tok not in self.sig.relation_arities:
                raise FormulaError(f"undeclared relation {tok}", at)
            self.next()
            self.expect("(")
            args = [self.term()]
            while self.peek() == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            return Rel(tok, tuple(args))
        left = self.term()
        self.expect("=")
        right = self.term()
        return Eq(left, right)


def parse_formula(text: str, sig: Signature, context=None) -> GeometricFormula:
    """Parse concrete syntax into a well-sorted formula.

    When `context` (pairs (var, sort)) is omitted, free-variable sorts
    are inferred from relation positions and equalities; unconstrained
    variables default to the unique sort.  Errors carry positions.
    """
    parser = _Parser(_lex(text), sig)
    ast = parser.formula()
    tok, at = parser.toks[parser.pos]
    if tok is not None:
        raise FormulaError(f"unexpected trailing input {tok!r}", at)
    if context is not None:
        return GeometricFormula(ast, tuple(tuple(p) for p in context), sig)
    inferred = _infer_context(ast, sig)
    return GeometricFormula(ast, inferred, sig)


def _infer_context(ast, sig: Signature):
    constraints = {}

    def unify(v, s, bound):
        if v in bound:
            return
        if v in constraints and constraints[v] != s:
            raise FormulaError(f"variable {v} used at two sorts", 0)
        constraints[v] = s

    def walk(node, bound):
        if isinstance(node, Rel):
            for t, s in zip(node.args, sig.relation_arities[node.name]):
                if isinstance(t, Var):
                    unify(t.name, s, bound)
        elif isinstance(node, Eq):
            ts = None
            for t in (node.left, node.right):
                if isinstance(t, Const):
                    ts = sig.constant_sorts.get(t.name)
            if ts is not None:
                for t in (node.left, node.right):
                    if isinstance(t, Var):
                        unify(t.name, ts, bound)
        elif isinstance(node, And):
            walk(node.left, bound)
            walk(node.right, bound)
        elif isinstance(node, Or):
            for d in node.disjuncts:
                walk(d, bound)
        elif isinstance(node, Exists):
            walk(node.body, bound | {node.var})

    walk(ast, frozenset())
    ctx = []
    for v in sorted(free_vars(ast)):
        if v in constraints:
            ctx.append((v, constraints[v]))
        elif len(sig.sorts) == 1:
            ctx.append((v, sig.sorts[0]))
        else:
            raise FormulaError(f"cannot infer sort of {v}", 0)
    return tuple(ctx)


# -- finite models -----------------------------------------------------------


class FinModel:
    """A finite structure: carriers per sort, relation and constant
    interpretations.  Elements must be strings or ints (canonical ids)."""

    __slots__ = ("name", "signature", "carriers", "relations", "constants")

    def __init__(self, name, signature: Signature, carriers, relations=None, constants=None):
        self.name = name
        self.signature = signature
        self.carriers = {s: frozenset(carriers.get(s, ())) for s in signature.sorts}
        rels = dict(relations or {})
        self.relations = {}
        arities = signature.relation_arities
        for rname, arity in arities.items():
            rows = frozenset(tuple(r) for r in rels.pop(rname, ()))
            for row in rows:
                if len(row) != len(arity):
                    raise InputError(f"relation {rname} row has wrong length")
                for e, s in zip(row, arity):
                    if e not in self.carriers[s]:
                        raise InputError(f"relation {rname} row outside carrier")
            self.relations[rname] = rows
        if rels:
            raise InputError(f"undeclared relation {sorted(rels)[0]}")
        self.constants = dict(constants or {})
        for cname, s in signature.constant_sorts.items():
            if cname not in self.constants:
                raise InputError(f"constant {cname} not interpreted")
            if self.constants[cname] not in self.carriers[s]:
                raise InputError(f"constant {cname} outside carrier")
        for e in self.elements():
            if not isinstance(e, (str, int)):
                raise InputError("carrier elements must be strings or ints")

    def elements(self):
        return [e for s in self.signature.sorts for e in self.carriers[s]]

    def __eq__(self, other):
        if not isinstance(other, FinModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.signature == other.signature
            and self.carriers == other.carriers
            and self.relations == other.relations
            and self.constants == other.constants
        )

    def __hash__(self):
        return hash((self.name, self.signature))

    def __repr__(self):
        sizes = ",".join(f"{s}:{len(c)}" for s, c in self.carriers.items())
        return f"FinModel({self.name}; {sizes})"


def eval_formula(model: FinModel, formula: GeometricFormula, env) -> bool:
    """Classical satisfaction of a geometric formula under an assignment
    covering the context."""
    ctx = dict(formula.context)
    for v in ctx:
        if v not in env:
            raise InputError(f"unbound variable {v}")
    return _eval(model, formula.ast, dict(env))


def _eval_term(model, t, env):
    if isinstance(t, Var):
        if t.name not in env:
            raise InputError(f"unbound variable {t.name}")
        return env[t.name]
    return model.constants[t.name]


def _eval(model, ast, env):
    if isinstance(ast, Top):
        return True
    if isinstance(ast, Bot):
        return False
    if isinstance(ast, Eq):
        return _eval_term(model, ast.left, env) == _eval_term(model, ast.right, env)
    if isinstance(ast, Rel):
        row = tuple(_eval_term(model, t, env) for t in ast.args)
        return row in model.relations[ast.name]
    if isinstance(ast, And):
        return _eval(model, ast.left, env) and _eval(model, ast.right, env)
    if isinstance(ast, Or):
        return any(_eval(model, d, env) for d in ast.disjuncts)
    if isinstance(ast, Exists):
        for e in model.carriers[ast.sort]:
            env2 = dict(env)
            env2[ast.var] = e
            if _eval(model, ast.body, env2):
                return True
        return False
    raise InputError(f"not a formula node: {ast!r}")


# -- isomorphisms ------------------------------------------------------------


class Iso(NamedTuple):
    """An isomorphism of models, used directly as an arrow point id.

    map is a tuple of (sort, element, image) triples, sorted."""

    src: str
    tgt: str
    map: tuple

    def apply(self, sort, e):
        for s, a, b in self.map:
            if s == sort and a == e:
                return b
        raise InputError(f"element {e!r} not in isomorphism domain")


def _iso_from_dict(src, tgt, assign):
    return Iso(src, tgt, tuple(sorted(assign)))


def identity_iso(m: FinModel) -> Iso:
    return _iso_from_dict(
        m.name, m.name, [(s, e, e) for s in m.signature.sorts for e in m.carriers[s]]
    )


def compose_isos(b: Iso, a: Iso) -> Iso:
    """b o a (a first)."""
    if a.tgt != b.src:
        raise InputError("isomorphisms not composable")
    lookup = {(s, x): y for s, x, y in b.map}
    return Iso(a.src, b.tgt, tuple(sorted((s, x, lookup[(s, y)]) for s, x, y in a.map)))


def invert_iso(a: Iso) -> Iso:
    return Iso(a.tgt, a.src, tuple(sorted((s, y, x) for s, x, y in a.map)))


def model_isomorphisms(m: FinModel, n: FinModel):
    """All isomorphisms m -> n, in canonical order."""
    if m.signature != n.signature:
        raise InputError("models over different signatures")
    sorts = m.signature.sorts
    per_sort = []
    for s in sorts:
        a = fintop.sorted_points(m.carriers[s])
        b = fintop.sorted_points(n.carriers[s])
        if len(a) != len(b):
            return []
        per_sort.append((s, [dict(zip(a, perm)) for perm in permutations(b)]))
    out = []
    for combo in product(*(bs for _, bs in per_sort)):
        assign = {s: d for (s, _), d in zip(per_sort, combo)}
        ok = True
        for cname, s in m.signature.constant_sorts.items():
            if assign[s][m.constants[cname]] != n.constants[cname]:
                ok = False
                break
        if ok:
            for rname, arity in m.signature.relation_arities.items():
                fwd = frozenset(
                    tuple(assign[s][e] for s, e in zip(arity, row))
                    for row in m.relations[rname]
                )
                if fwd != n.relations[rname]:
                    ok = False
                    break
        if ok:
            out.append(
                _iso_from_dict(
                    m.name,
                    n.name,
                    [(s, e, assign[s][e]) for s in sorts for e in m.carriers[s]],
                )
            )
    return sorted(out, key=ckey)


def automorphisms(m: FinModel):
    return model_isomorphisms(m, m)


# -- indexed models and model groupoids --------------------------------------


class IndexedModel:
    """A model with a partial parameter assignment hitting every element."""

    __slots__ = ("model", "indexing")

    def __init__(self, model: FinModel, indexing, params):
        self.model = model
        self.indexing = dict(indexing)
        for p, e in self.indexing.items():
            if p not in params:
                raise InputError(f"parameter {p} not declared")
            if e not in model.carriers[params[p]]:
                raise InputError(f"parameter {p} indexes a non-element")
        for s in model.signature.sorts:
            hit = {e for p, e in self.indexing.items() if params[p] == s}
            if hit != model.carriers[s]:
                raise InputError(
                    f"indexing of {model.name} not surjective on sort {s}"
                )

    @property
    def name(self):
        return self.model.name

    def interp(self, p):
        return self.indexing.get(p)

    def __eq__(self, other):
        if not isinstance(other, IndexedModel):
            return NotImplemented
        return self.model == other.model and self.indexing == other.indexing

    def __hash__(self):
        return hash((self.model, frozenset(self.indexing.items())))


class ModelGroupoid:
    """A groupoid of indexed models: member models plus a set of
    isomorphisms closed under composition and inverses (identities
    included).  derive() endows it with the logical topologies."""

    def __init__(self, signature: Signature, params, members, arrows):
        self.signature = signature
        self.params = dict(params)
        for p, s in self.params.items():
            if s not in signature.sorts:
                raise InputError(f"parameter {p} has undeclared sort {s}")
        self.members = tuple(members)
        names = [im.name for im in self.members]
        if len(set(names)) != len(names):
            raise InputError("duplicate member model names")
        self.by_name = {im.name: im for im in self.members}
        self.arrows = frozenset(arrows)
        self._derived = {}
        self._engine = None
        bad = self.validate()
        if bad:
            raise InputError("; ".join(bad))

    def validate(self):
        out = []
        for a in self.arrows:
            if a.src not in self.by_name or a.tgt not in self.by_name:
                out.append(f"arrow between non-members {a.src}->{a.tgt}")
                return out
        for im in self.members:
            if identity_iso(im.model) not in self.arrows:
                out.append(f"missing identity on {im.name}")
        for a in self.arrows:
            if invert_iso(a) not in self.arrows:
                out.append(f"arrows not closed under inverse at {a.src}->{a.tgt}")
        for a in self.arrows:
            for b in self.arrows:
                if b.src == a.tgt and compose_isos(b, a) not in self.arrows:
                    out.append("arrows not closed under composition")
                    return out
        for a in self.arrows:
            m, n = self.by_name[a.src].model, self.by_name[a.tgt].model
            lookup = dict(((s, x), y) for s, x, y in a.map)
            for s in self.signature.sorts:
                if {x for (ss, x) in lookup if ss == s} != set(m.carriers[s]):
                    out.append(f"arrow map not total on {a.src}")
                    return out
            for rname, arity in self.signature.relation_arities.items():
                fwd = frozenset(
                    tuple(lookup[(s, e)] for s, e in zip(arity, row))
                    for row in m.relations[rname]
                )
                if fwd != n.relations[rname]:
                    out.append(f"arrow {a.src}->{a.tgt} not an isomorphism")
        return out

    def member_names(self):
        return [im.name for im in self.members]

    def engine(self, budget=DEFAULT_FORMULA_BUDGET) -> "DefinableSets":
        if self._engine is None or self._engine.budget < budget:
            self._engine = DefinableSets(
                self.signature, [im.model for im in self.members], budget
            )
        return self._engine

    def interp_tuple(self, name, ptuple):
        """Interpretation of a parameter tuple in a member, or None."""
        im = self.by_name[name]
        vals = tuple(im.interp(p) for p in ptuple)
        return None if any(v is None for v in vals) else vals

    def param_tuples(self, max_len, with_replacement=False):
        """Canonically ordered parameter tuples up to the cap (sorted
        names; permutations and, unless requested, repetitions are
        absorbed by variable renaming in the formula)."""
        names = sorted(self.params)
        comb = combinations_with_replacement if with_replacement else combinations
        out = []
        for k in range(0, max_len + 1):
            out.extend(comb(names, k))
        return out

    def derive(self, depth: int, tuple_cap: int = DEFAULT_TUPLE_CAP,
               budget: int = DEFAULT_FORMULA_BUDGET) -> "DerivedGroupoid":
        key = (depth, tuple_cap)
        if key not in self._derived:
            self._derived[key] = logical_topologies(self, depth, tuple_cap, budget)
        return self._derived[key]

    def __eq__(self, other):
        if not isinstance(other, ModelGroupoid):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.params == other.params
            and self.members == other.members
            and self.arrows == other.arrows
        )

    def __hash__(self):
        return hash((self.signature, frozenset(self.params.items()), self.members, self.arrows))

    def __repr__(self):
        return f"ModelGroupoid({len(self.members)} models, {len(self.arrows)} isos)"


# -- semantic enumeration of definable sets ----------------------------------


class DefinableSets:
    """Depth-stratified enumeration of definable sets, synchronised
    across a family of models.

    level(ctx_sorts, depth) maps each realised extension -- a frozenset
    of (model name, tuple) pairs -- to one canonical formula AST of
    depth <= depth in the context x1:s1, ..., xk:sk.
    """

    def __init__(self, signature: Signature, models, budget=DEFAULT_FORMULA_BUDGET):
        self.signature = signature
        self.models = list(models)
        self.budget = budget
        self._levels = {}

    def context(self, ctx_sorts):
        return tuple((f"x{i + 1}", s) for i, s in enumerate(ctx_sorts))

    def all_tuples(self, ctx_sorts):
        out = []
        for m in self.models:
            pools = [fintop.sorted_points(m.carriers[s]) for s in ctx_sorts]
            for tup in product(*pools):
                out.append((m.name, tup))
        return out

    def _atoms(self, ctx_sorts):
        sig = self.signature
        ctx = self.context(ctx_sorts)
        terms_by_sort = {}
        for (v, s) in ctx:
            terms_by_sort.setdefault(s, []).append(Var(v))
        for c, s in sig.constants:
            terms_by_sort.setdefault(s, []).append(Const(c))
        atoms = [Top(), Bot()]
        for s in sig.sorts:
            ts = terms_by_sort.get(s, [])
            for i, a in enumerate(ts):
                for b in ts[i + 1:]:
                    atoms.append(Eq(a, b))
        for rname, arity in sorted(sig.relation_arities.items()):
            pools = [terms_by_sort.get(s, []) for s in arity]
            for args in product(*pools):
                atoms.append(Rel(rname, tuple(args)))
        return atoms

    def _extension(self, ast, ctx_sorts):
        ctx = self.context(ctx_sorts)
        names = [v for v, _ in ctx]
        ext = set()
        for m in self.models:
            pools = [fintop.sorted_points(m.carriers[s]) for s in ctx_sorts]
            for tup in product(*pools):
                if _eval(m, ast, dict(zip(names, tup))):
                    ext.add((m.name, tup))
        return frozenset(ext)

    def level(self, ctx_sorts, depth: int) -> dict:
        ctx_sorts = tuple(ctx_sorts)
        key = (ctx_sorts, depth)
        if key in self._levels:
            return self._levels[key]
        if depth == 0:
            table = {}
            for atom in self._atoms(ctx_sorts):
                ext = self._extension(atom, ctx_sorts)
                if ext not in table:
                    table[ext] = atom
            self._levels[key] = table
            return table
        prev = self.level(ctx_sorts, depth - 1)
        table = dict(prev)

        def add(ext, ast):
            if ext not in table:
                table[ext] = ast
                if len(table) > self.budget:
                    raise CapExceeded(
                        f"definable-set family exceeds budget {self.budget}"
                    )

        items = list(prev.items())
        for i, (e1, f1) in enumerate(items):
            for e2, f2 in items[i:]:
                add(e1 & e2, And(f1, f2))
                add(e1 | e2, make_or([f1, f2]))
        for s in self.signature.sorts:
            inner = self.level(ctx_sorts + (s,), depth - 1)
            var = f"x{len(ctx_sorts) + 1}"
            for ext, ast in inner.items():
                proj = frozenset((n, tup[:-1]) for n, tup in ext)
                add(proj, Exists(var, s, ast))
        self._levels[key] = table
        return table

    def lookup(self, ctx_sorts, depth, ext):
        """Canonical formula with the given extension, or None."""
        return self.level(tuple(ctx_sorts), depth).get(frozenset(ext))


# -- logical topologies -------------------------------------------------------


@dataclass(frozen=True)
class DerivedGroupoid:
    """A model groupoid's topological incarnation at a bounded depth."""

    groupoid: TopGroupoid
    depth: int
    tuple_cap: int
    stabilized: bool

    @property
    def objects(self):
        return self.groupoid.objects

    @property
    def arrows(self):
        return self.groupoid.arrows


def _object_subbasis(g: ModelGroupoid, depth, tuple_cap, budget):
    eng = g.engine(budget)
    names = g.member_names()
    subbasis = set()
    for ptuple in g.param_tuples(tuple_cap):
        ctx_sorts = tuple(g.params[p] for p in ptuple)
        level = eng.level(ctx_sorts, depth)
        for ext in level:
            opens = frozenset(
                n
                for n in names
                if (vals := g.interp_tuple(n, ptuple)) is not None
                and (n, vals) in ext
            )
            subbasis.add(opens)
    return subbasis


def _arrow_subbasis(g: ModelGroupoid, obj_subbasis):
    subbasis = set()
    for b in obj_subbasis:
        subbasis.add(frozenset(a for a in g.arrows if a.src in b))
        subbasis.add(frozenset(a for a in g.arrows if a.tgt in b))
    params = sorted(g.params)
    for p in params:
        sp = g.params[p]
        for q in params:
            if g.params[q] != sp:
                continue
            transport = frozenset(
                a
                for a in g.arrows
                if (x := g.by_name[a.src].interp(p)) is not None
                and (y := g.by_name[a.tgt].interp(q)) is not None
                and a.apply(sp, x) == y
            )
            subbasis.add(transport)
    return subbasis


def logical_topologies(g: ModelGroupoid, depth: int,
                       tuple_cap: int = DEFAULT_TUPLE_CAP,
                       budget: int = DEFAULT_FORMULA_BUDGET) -> DerivedGroupoid:
    """Endow a model groupoid with the logical topologies at bounded
    depth, deepening until consecutive open families agree or the bound
    is hit; the achieved depth and stabilization flag are recorded."""
    names = frozenset(g.member_names())
    achieved = 0
    stabilized = False
    spaces = None
    prev = None
    for d in range(0, depth + 1):
        obj_sub = _object_subbasis(g, d, tuple_cap, budget)
        arr_sub = _arrow_subbasis(g, obj_sub)
        obj_space = fintop.generate_topology(names, obj_sub)
        arr_space = fintop.generate_topology(frozenset(g.arrows), arr_sub)
        if prev is not None and (obj_space, arr_space) == prev:
            stabilized = True
            achieved = d - 1
            spaces = prev
            break
        prev = (obj_space, arr_space)
        spaces = prev
        achieved = d
    obj_space, arr_space = spaces
    src = {a: a.src for a in g.arrows}
    tgt = {a: a.tgt for a in g.arrows}
    unit = {im.name: identity_iso(im.model) for im in g.members}
    inv = {a: invert_iso(a) for a in g.arrows}
    comp = {
        (b, a): compose_isos(b, a)
        for b in g.arrows
        for a in g.arrows
        if a.tgt == b.src
    }
    grpd_obj = TopGroupoid(obj_space, arr_space, src, tgt, unit, inv, comp)
    return DerivedGroupoid(grpd_obj, achieved, tuple_cap, stabilized)


# -- definable sheaves ---------------------------------------------------------


def definable_sheaf(g: ModelGroupoid, formula: GeometricFormula, depth: int,
                    tuple_cap: int = DEFAULT_TUPLE_CAP,
                    budget: int = DEFAULT_FORMULA_BUDGET):
    """The sheaf of satisfying tuples of a geometric formula, with the
    parameter-definable topology on its total space, over the derived
    groupoid at the same depth.  An empty context yields the terminal
    sheaf."""
    from . import sheaf as sheaf_mod

    derived = g.derive(depth, tuple_cap, budget)
    base = derived.groupoid
    eng = g.engine(budget)
    ctx_sorts = tuple(s for _, s in formula.context)
    names = [v for v, _ in formula.context]
    total_pts = set()
    for im in g.members:
        m = im.model
        pools = [fintop.sorted_points(m.carriers[s]) for s in ctx_sorts]
        for tup in product(*pools):
            if _eval(m, formula.ast, dict(zip(names, tup))):
                total_pts.add((im.name, tup))
    subbasis = set()
    for ptuple in g.param_tuples(tuple_cap):
        psorts = tuple(g.params[p] for p in ptuple)
        level = eng.level(ctx_sorts + psorts, depth)
        for ext in level:
            opens = frozenset(
                (n, tup)
                for (n, tup) in total_pts
                if (vals := g.interp_tuple(n, ptuple)) is not None
                and (n, tup + vals) in ext
            )
            subbasis.add(opens)
    total = fintop.generate_topology(frozenset(total_pts), subbasis)
    proj = {pt: pt[0] for pt in total_pts}
    action = {}
    for a in g.arrows:
        sorts_of = ctx_sorts
        for (n, tup) in total_pts:
            if n == a.src:
                moved = tuple(a.apply(s, e) for s, e in zip(sorts_of, tup))
                action[(a, (n, tup))] = (a.tgt, moved)
    return sheaf_mod.EquivariantSheaf(
        base, total, fintop.ContinuousMap(total, base.objects, proj, check=False),
        action,
    )


def top_formula(sig: Signature, ctx_sorts) -> GeometricFormula:
    """Truth in the context x1:s1, ..., xk:sk."""
    ctx = tuple((f"x{i + 1}", s) for i, s in enumerate(ctx_sorts))
    return GeometricFormula(Top(), ctx, sig)


def parameter_orbit(g: ModelGroupoid, ptuple) -> frozenset:
    """Orbit of the interpretations of a parameter tuple: the closure of
    the set of pairs (interpretation, model) under the arrow action,
    inside the total space of the truth sheaf on the matching context."""
    ptuple = tuple(ptuple)
    for p in ptuple:
        if p not in g.params:
            raise InputError(f"parameter {p} not declared")
    sorts_of = tuple(g.params[p] for p in ptuple)
    start = set()
    for im in g.members:
        vals = g.interp_tuple(im.name, ptuple)
        if vals is not None:
            start.add((im.name, vals))
    out = set(start)
    for a in g.arrows:
        for (n, tup) in start:
            if n == a.src:
                out.add((a.tgt, tuple(a.apply(s, e) for s, e in zip(sorts_of, tup))))
    return frozenset(out)


def eliminates_parameters(g: ModelGroupoid, depth: int,
                          tuple_cap: int = DEFAULT_TUPLE_CAP,
                          budget: int = DEFAULT_FORMULA_BUDGET) -> Verdict:
    """Search for parameter-free formulas defining every parameter-tuple
    orbit.  "yes" comes with one witness formula per tuple; exhausting
    the depth bound gives "unknown", never a definitive "no"."""
    eng = g.engine(budget)
    witnesses = []
    unknown = []
    for ptuple in g.param_tuples(tuple_cap, with_replacement=True):
        if not ptuple:
            continue
        sorts_of = tuple(g.params[p] for p in ptuple)
        orbit = parameter_orbit(g, ptuple)
        found = eng.lookup(sorts_of, depth, orbit)
        if found is None:
            unknown.append({"tuple": list(ptuple)})
        else:
            witnesses.append(
                (("tuple", tuple(ptuple)), ("formula", print_formula(found)))
            )
    provenance = f"depth={depth},tuple-cap={tuple_cap}"
    if unknown:
        return Verdict(
            "unknown",
            tuple(tuple(sorted(u.items())) for u in unknown),
            provenance,
            details=(("witnesses_found", len(witnesses)),),
        )
    return Verdict("yes", tuple(witnesses), provenance)


def is_ultrahomogeneous(m: FinModel, depth: int,
                        tuple_cap: int = DEFAULT_TUPLE_CAP,
                        budget: int = DEFAULT_FORMULA_BUDGET) -> Verdict:
    """Are tuples of equal bounded-depth type automorphism-conjugate?

    Bounded types make this approximate in both directions; the verdict
    records the depth it was computed at."""
    eng = DefinableSets(m.signature, [m], budget)
    autos = automorphisms(m)
    provenance = f"depth={depth},tuple-cap={tuple_cap}"
    for k in range(1, tuple_cap + 1):
        for sorts_of in combinations_with_replacement(sorted(m.signature.sorts), k):
            level = eng.level(sorts_of, depth)
            fingerprints = {}
            pools = [fintop.sorted_points(m.carriers[s]) for s in sorts_of]
            for tup in product(*pools):
                fp = frozenset(
                    i for i, ext in enumerate(level) if (m.name, tup) in ext
                )
                fingerprints.setdefault(fp, []).append(tup)
            for group in fingerprints.values():
                for t1, t2 in combinations(group, 2):
                    if not any(
                        tuple(a.apply(s, e) for s, e in zip(sorts_of, t1)) == t2
                        for a in autos
                    ):
                        return Verdict(
                            "no",
                            ((("pair", (t1, t2)), ("sorts", tuple(sorts_of))),),
                            provenance,
                            details=(("approximate", "bounded-depth types"),),
                        )
    return Verdict("yes", (), provenance,
                   details=(("approximate", "bounded-depth types"),))


# -- etale completion ----------------------------------------------------------


def all_isos_between_members(g: ModelGroupoid) -> frozenset:
    out = set()
    models = [im.model for im in g.members]
    for m in models:
        for n in models:
            out.update(model_isomorphisms(m, n))
    return frozenset(out)


def etale_completion(g: ModelGroupoid, depth: int,
                     tuple_cap: int = DEFAULT_TUPLE_CAP,
                     budget: int = DEFAULT_FORMULA_BUDGET):
    """Same members and indexings, arrows enlarged to all isomorphisms,
    logical topologies recomputed.  Returns (completed groupoid, the
    inclusion of the original as a subgroupoid of the completion's
    derived groupoid)."""
    completed = ModelGroupoid(
        g.signature, g.params, g.members, all_isos_between_members(g)
    )
    derived = completed.derive(depth, tuple_cap, budget)
    inclusion = Subgroupoid(derived.groupoid, g.arrows)
    return completed, inclusion


def is_etale_complete(g: ModelGroupoid, depth: int,
                      tuple_cap: int = DEFAULT_TUPLE_CAP,
                      budget: int = DEFAULT_FORMULA_BUDGET) -> Verdict:
    """Three conjuncts: all isomorphisms between members present (exact),
    sober object space (exact; automatic for finite T0), and parameter
    elimination (bounded, may come back unknown)."""
    witnesses = []
    missing = all_isos_between_members(g) - g.arrows
    for a in sorted(missing, key=ckey):
        witnesses.append((("kind", "missing-isomorphism"), ("src", a.src), ("tgt", a.tgt)))
    derived = g.derive(depth, tuple_cap, budget)
    sober = fintop.is_sober(derived.objects)
    if not sober:
        witnesses.append((("kind", "object-space-not-sober"),))
    elim = eliminates_parameters(g, depth, tuple_cap, budget)
    details = (
        ("achieved_depth", derived.depth),
        ("stabilized", derived.stabilized),
        ("one_object_groupoid", len(g.members) == 1),
        ("eliminates_parameters", elim.answer),
    )
    provenance = f"depth={depth},tuple-cap={tuple_cap}"
    if witnesses:
        return Verdict("no", tuple(witnesses), provenance, details)
    if elim.answer == "unknown":
        return Verdict("unknown", elim.witnesses, provenance, details)
    return Verdict("yes", (), provenance, details)

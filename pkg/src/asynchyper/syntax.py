"""Formula ASTs shared by every logic, dialect checks and the printer.

One node family covers LTL, the quantifier-free hyper logics and the
first-order logics; a dialect tag says which constructors a formula may use.
Sugar nodes (Or, Implies, Iff, Eventually, Globally and their relativized
variants, Forall) are kept for printing and removed by :func:`desugar`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator


class DialectError(ValueError):
    pass


class Formula:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def __str__(self) -> str:
        return to_text(self)

    # convenience builders
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


def _cached_hash(self) -> int:
    # formulas are deep immutable trees used as memo keys; hash each node once
    h = self._h
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, n) for n in self._fields))
        object.__setattr__(self, "_h", h)
    return h


def _node(cls):
    names = tuple(cls.__dict__.get("__annotations__", {}))
    cls.__annotations__ = {**cls.__dict__.get("__annotations__", {}), "_h": "int | None"}
    cls._h = field(default=None, init=False, compare=False, repr=False)
    cls.__hash__ = _cached_hash
    cls = dataclass(frozen=True, slots=True)(cls)
    cls._fields = names
    return cls


@_node
class TrueF(Formula):
    pass


@_node
class Prop(Formula):
    name: str


@_node
class RelProp(Formula):
    prop: str
    var: str


@_node
class Not(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@_node
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@_node
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@_node
class Iff(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@_node
class Next(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@_node
class Eventually(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class Globally(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


def canonical_gamma(gamma: Iterable[Formula]) -> tuple:
    """Sorted, duplicate-free tuple of LTL formulas."""
    return tuple(sorted(set(gamma), key=to_text))


@_node
class NextRel(Formula):
    gamma: tuple
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "gamma", canonical_gamma(self.gamma))

    def children(self):
        return (self.sub,)


@_node
class UntilRel(Formula):
    gamma: tuple
    left: Formula
    right: Formula

    def __post_init__(self):
        object.__setattr__(self, "gamma", canonical_gamma(self.gamma))

    def children(self):
        return (self.left, self.right)


@_node
class EventuallyRel(Formula):
    gamma: tuple
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "gamma", canonical_gamma(self.gamma))

    def children(self):
        return (self.sub,)


@_node
class GloballyRel(Formula):
    gamma: tuple
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "gamma", canonical_gamma(self.gamma))

    def children(self):
        return (self.sub,)


@_node
class Context(Formula):
    vars: tuple
    sub: Formula

    def __post_init__(self):
        vs = tuple(sorted(set(self.vars)))
        if not vs:
            raise DialectError("context must be nonempty")
        object.__setattr__(self, "vars", vs)

    def children(self):
        return (self.sub,)


@_node
class Prev(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class Since(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@_node
class Trajectory(Formula):
    mode: str
    body: Formula

    def __post_init__(self):
        if self.mode not in ("E", "A"):
            raise DialectError(f"trajectory mode must be E or A, not {self.mode!r}")

    def children(self):
        return (self.body,)


# first-order ------------------------------------------------------------------

@_node
class PropAt(Formula):
    prop: str
    var: str


@_node
class Eq(Formula):
    left: str
    right: str


@_node
class Lt(Formula):
    left: str
    right: str


@_node
class Add(Formula):
    """z = x + y"""
    z: str
    x: str
    y: str


@_node
class EqLevel(Formula):
    left: str
    right: str


@_node
class In(Formula):
    var: str
    setvar: str


@_node
class Exists(Formula):
    var: str
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class Forall(Formula):
    var: str
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class Exists2(Formula):
    var: str
    sub: Formula

    def children(self):
        return (self.sub,)


@_node
class Forall2(Formula):
    var: str
    sub: Formula

    def children(self):
        return (self.sub,)


FALSE = Not(TrueF())
TRUE = TrueF()


@dataclass(frozen=True)
class HyperSentence:
    prefix: tuple  # ((quantifier, var), ...)
    body: Formula

    def __post_init__(self):
        pre = tuple((q, v) for q, v in self.prefix)
        object.__setattr__(self, "prefix", pre)
        if not pre:
            raise DialectError("a hyper sentence needs at least one quantifier")
        names = [v for _, v in pre]
        if len(set(names)) != len(names):
            raise DialectError("quantified variables must be pairwise distinct")
        for q, _ in pre:
            if q not in ("exists", "forall"):
                raise DialectError(f"unknown quantifier {q!r}")
        free = free_vars(self.body) - set(names)
        if free:
            raise DialectError(f"unbound variables {sorted(free)}")

    @property
    def variables(self) -> tuple:
        return tuple(v for _, v in self.prefix)

    @property
    def alternation_depth(self) -> int:
        qs = [q for q, _ in self.prefix]
        return sum(1 for a, b in zip(qs, qs[1:]) if a != b)

    def __str__(self) -> str:
        return to_text(self)


# traversal ---------------------------------------------------------------------

def subformulas(f: Formula) -> Iterator[Formula]:
    """All subformulas, children before parents, without repeats."""
    seen = set()
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            if g not in seen:
                seen.add(g)
                yield g
            continue
        if g in seen:
            continue
        stack.append((g, True))
        for c in reversed(g.children()):
            stack.append((c, False))


def size(f: Formula) -> int:
    """Number of AST nodes (tree size, not DAG size)."""
    return 1 + sum(size(c) for c in f.children())


def free_vars(f) -> frozenset:
    if isinstance(f, HyperSentence):
        return free_vars(f.body) - set(f.variables)
    if isinstance(f, RelProp):
        return frozenset({f.var})
    if isinstance(f, PropAt):
        return frozenset({f.var})
    if isinstance(f, (Eq, Lt, EqLevel)):
        return frozenset({f.left, f.right})
    if isinstance(f, Add):
        return frozenset({f.z, f.x, f.y})
    if isinstance(f, In):
        return frozenset({f.var, f.setvar})
    if isinstance(f, (Exists, Forall, Exists2, Forall2)):
        return free_vars(f.sub) - {f.var}
    out = frozenset()
    if isinstance(f, Context):
        out = frozenset(f.vars)
    for c in f.children():
        out |= free_vars(c)
    return out


def props(f: Formula) -> frozenset:
    """Proposition names occurring in ``f`` (including inside Gamma sets)."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, Prop):
            out.add(g.name)
        elif isinstance(g, (RelProp, PropAt)):
            out.add(g.prop)
        elif isinstance(g, (NextRel, UntilRel, EventuallyRel, GloballyRel)):
            for th in g.gamma:
                out |= props(th)
    return frozenset(out)


def relativize(f: Formula, var: str) -> Formula:
    """Turn an LTL formula over plain propositions into one over ``p[var]``."""
    return transform(f, lambda g: RelProp(g.name, var) if isinstance(g, Prop) else None)


def rename_vars(f: Formula, mapping: dict) -> Formula:
    def leaf(g):
        if isinstance(g, RelProp):
            return RelProp(g.prop, mapping.get(g.var, g.var))
        if isinstance(g, Context):
            return Context(tuple(mapping.get(v, v) for v in g.vars), rename_vars(g.sub, mapping))
        return None
    return transform(f, leaf)


def transform(f: Formula, leaf) -> Formula:
    """Rebuild ``f`` bottom-up; ``leaf(g)`` may return a replacement for node g."""
    r = leaf(f)
    if r is not None:
        return r
    kids = f.children()
    if not kids:
        return f
    new = tuple(transform(c, leaf) for c in kids)
    if new == kids:
        return f
    return _rebuild(f, new)


def _rebuild(f: Formula, kids: tuple) -> Formula:
    if isinstance(f, (NextRel, EventuallyRel, GloballyRel)):
        return type(f)(f.gamma, kids[0])
    if isinstance(f, UntilRel):
        return UntilRel(f.gamma, kids[0], kids[1])
    if isinstance(f, Context):
        return Context(f.vars, kids[0])
    if isinstance(f, Trajectory):
        return Trajectory(f.mode, kids[0])
    if isinstance(f, (Exists, Forall, Exists2, Forall2)):
        return type(f)(f.var, kids[0])
    return type(f)(*kids)


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = And(g, out)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return FALSE
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = Or(g, out)
    return out


def neg(f: Formula) -> Formula:
    """Negation that cancels a double negation."""
    return f.sub if isinstance(f, Not) else Not(f)


# desugaring ----------------------------------------------------------------------

_DESUGARED: dict = {}


def desugar(f):
    """Rewrite sugar into the core constructors."""
    if isinstance(f, HyperSentence):
        return HyperSentence(f.prefix, desugar(f.body))
    out = _DESUGARED.get(f)
    if out is None:
        if len(_DESUGARED) > 50000:
            _DESUGARED.clear()
        out = _DESUGARED[f] = _desugar(f)
    return out


def _desugar(f: Formula) -> Formula:
    kids = tuple(_desugar(c) for c in f.children())
    if isinstance(f, Or):
        return Not(And(Not(kids[0]), Not(kids[1])))
    if isinstance(f, Implies):
        return Not(And(kids[0], Not(kids[1])))
    if isinstance(f, Iff):
        a, b = kids
        return And(Not(And(a, Not(b))), Not(And(b, Not(a))))
    if isinstance(f, Eventually):
        return Until(TRUE, kids[0])
    if isinstance(f, Globally):
        return Not(Until(TRUE, Not(kids[0])))
    if isinstance(f, (NextRel, UntilRel, EventuallyRel, GloballyRel)):
        gamma = tuple(_desugar(t) for t in f.gamma)
        # an empty Gamma is the local successor
        nxt = (lambda a: NextRel(gamma, a)) if gamma else Next
        unt = (lambda a, b: UntilRel(gamma, a, b)) if gamma else Until
        if isinstance(f, NextRel):
            return nxt(kids[0])
        if isinstance(f, UntilRel):
            return unt(kids[0], kids[1])
        if isinstance(f, EventuallyRel):
            return unt(TRUE, kids[0])
        return Not(unt(TRUE, Not(kids[0])))
    if isinstance(f, Forall):
        return Not(Exists(f.var, Not(kids[0])))
    if isinstance(f, Forall2):
        return Not(Exists2(f.var, Not(kids[0])))
    if not kids:
        return f
    return _rebuild(f, kids)


# dialects --------------------------------------------------------------------------

_BOOL = {TrueF, Not, And, Or, Implies, Iff}
_TEMP = {Next, Until, Eventually, Globally}
_REL = {NextRel, UntilRel, EventuallyRel, GloballyRel}
_FO = _BOOL | {PropAt, Eq, Lt, Exists, Forall}

ALLOWED = {
    "ltl": _BOOL | _TEMP | {Prop},
    "hyperltl": _BOOL | _TEMP | {RelProp, Prop},
    "hyperltl_s": _BOOL | _TEMP | _REL | {RelProp, Prop},
    "hyperltl_c": _BOOL | _TEMP | {RelProp, Context, Prev, Since},
    "ahyperltl": _BOOL | _TEMP | {RelProp},
    "foplus": _FO | {Add},
    "foe": _FO | {EqLevel},
    "s1se": _FO | {EqLevel, In, Exists2, Forall2},
    "s1s": _FO | {In, Exists2, Forall2},
}
LOGICS = tuple(ALLOWED)
HYPER_LOGICS = ("hyperltl", "hyperltl_s", "hyperltl_c", "ahyperltl")


def check_dialect(f, logic: str):
    """Raise DialectError if ``f`` uses a constructor outside ``logic``."""
    if logic not in ALLOWED:
        raise DialectError(f"unknown logic {logic!r}")
    if isinstance(f, HyperSentence):
        if logic not in HYPER_LOGICS:
            raise DialectError(f"{logic} has no hyper quantifier prefix")
        check_dialect(f.body, logic)
        return f
    if logic == "ahyperltl":
        if not isinstance(f, Trajectory):
            raise DialectError("an A-HyperLTL body must start with E or A")
        _check_nodes(f.body, ALLOWED["ahyperltl"], logic)
        return f
    _check_nodes(f, ALLOWED[logic], logic)
    return f


def _check_nodes(f: Formula, allowed: set, logic: str) -> None:
    for g in subformulas(f):
        if type(g) not in allowed:
            raise DialectError(f"{type(g).__name__} is not allowed in {logic}: {to_text(g)}")
        if type(g) in _REL:
            for th in g.gamma:
                _check_nodes(th, ALLOWED["ltl"], "a Gamma set")


def infer_logic(f) -> str:
    """Smallest hyper dialect containing ``f``."""
    body = f.body if isinstance(f, HyperSentence) else f
    if isinstance(body, Trajectory):
        return "ahyperltl"
    kinds = {type(g) for g in subformulas(body)}
    if kinds & {Context, Prev, Since}:
        return "hyperltl_c"
    if kinds & _REL:
        return "hyperltl_s"
    return "hyperltl"


def closure(theta: Formula, variables: Iterable[str] | None = None) -> frozenset:
    """cl(theta): subformulas, relativized propositions and their negations.

    Double negations are identified, so every member is ``b`` or ``Not(b)``
    for a non-negated ``b``.
    """
    theta = desugar(theta)
    vs = list(variables) if variables is not None else sorted(free_vars(theta))
    bases = set()
    for g in subformulas(theta):
        b = g
        while isinstance(b, Not):
            b = b.sub
        bases.add(b)
    for p in props(theta):
        for v in vs:
            bases.add(RelProp(p, v))
    out = set(bases)
    out |= {Not(b) for b in bases}
    return frozenset(out)


def closure_size(theta: Formula, variables: Iterable[str] | None = None) -> int:
    return len(closure(theta, variables))


# printing ----------------------------------------------------------------------------

_PREC_BINDER = 0
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Until: 5, UntilRel: 5, Since: 5}
_RIGHT_ASSOC = {Implies, Until, UntilRel, Since}
_PREC_UNARY = 6
_PREC_ATOM = 7
_OPS = {Iff: "<->", Implies: "->", Or: "|", And: "&", Until: "U", Since: "S"}


def _prec(f) -> int:
    if isinstance(f, (Exists, Forall, Exists2, Forall2, Trajectory, HyperSentence)):
        return _PREC_BINDER
    if type(f) in _PREC:
        return _PREC[type(f)]
    if isinstance(f, (Not, Next, Eventually, Globally, NextRel, EventuallyRel,
                      GloballyRel, Context, Prev)):
        return _PREC_UNARY
    return _PREC_ATOM


def _gamma_text(gamma: tuple) -> str:
    return "[" + "; ".join(to_text(t) for t in gamma) + "]"


def to_text(f) -> str:
    return _show(f, 0)


def _wrap(f, need: int) -> str:
    s = _show(f, need)
    return f"({s})" if _prec(f) < need else s


def _show(f, need: int) -> str:
    if isinstance(f, HyperSentence):
        pre = " ".join(f"{q} {v}." for q, v in f.prefix)
        return f"{pre} {_wrap(f.body, 0)}"
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, RelProp):
        return f"{f.prop}[{f.var}]"
    if isinstance(f, PropAt):
        return f"P_{f.prop}({f.var})"
    if isinstance(f, Eq):
        return f"{f.left}={f.right}"
    if isinstance(f, Lt):
        return f"{f.left}<{f.right}"
    if isinstance(f, Add):
        return f"{f.z}={f.x}+{f.y}"
    if isinstance(f, EqLevel):
        return f"E({f.left},{f.right})"
    if isinstance(f, In):
        return f"{f.var} in {f.setvar}"
    if isinstance(f, Not):
        if f.sub == TRUE:
            return "false"
        return "!" + _wrap(f.sub, _PREC_UNARY)
    if isinstance(f, (Next, Eventually, Globally, Prev)):
        op = {Next: "X", Eventually: "F", Globally: "G", Prev: "Y"}[type(f)]
        return f"{op} {_wrap(f.sub, _PREC_UNARY)}"
    if isinstance(f, (NextRel, EventuallyRel, GloballyRel)):
        op = {NextRel: "X_", EventuallyRel: "F_", GloballyRel: "G_"}[type(f)]
        return f"{op}{_gamma_text(f.gamma)} {_wrap(f.sub, _PREC_UNARY)}"
    if isinstance(f, Context):
        return f"<{','.join(f.vars)}> {_wrap(f.sub, _PREC_UNARY)}"
    if isinstance(f, Trajectory):
        return f"{f.mode} {_wrap(f.body, 0)}"
    if isinstance(f, (Exists, Forall, Exists2, Forall2)):
        kw = {Exists: "exists", Forall: "forall", Exists2: "exists2", Forall2: "forall2"}[type(f)]
        return f"{kw} {f.var}. {_wrap(f.sub, 0)}"
    p = _prec(f)
    if isinstance(f, UntilRel):
        op = "U_" + _gamma_text(f.gamma)
    else:
        op = _OPS[type(f)]
    if type(f) in _RIGHT_ASSOC:
        l, r = p + 1, p
    else:
        l, r = p, p + 1
    return f"{_wrap(f.left, l)} {op} {_wrap(f.right, r)}"

"""Logic-to-logic translations as AST transforms."""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterable, Sequence

from .syntax import (
    Add, And, Context, Eq, EqLevel, Eventually, Exists, Exists2, Forall, Forall2, Formula,
    HyperSentence, Iff, Implies, In, Lt, Next, Not, Or, Prev, PropAt, RelProp, Since, TrueF,
    TRUE, FALSE, Trajectory, Until, conj, desugar, disj, free_vars, props, subformulas, to_text,
)
from .traces import SHARP, TraceAssignment, enc_finite, kcode_prop
from .fixtures import psi_eq, theta_sharp

MAX_CONTEXT = 6


class TranslationError(ValueError):
    pass


class AlphabetClash(TranslationError):
    pass


class PastConstructorError(TranslationError):
    pass


class NotSimpleError(TranslationError):
    def __init__(self, message: str, path: tuple):
        super().__init__(f"{message} (context path: {' > '.join(path)})")
        self.path = path


class ResourceError(TranslationError):
    pass


class FreshVarPool:
    """Deterministic fresh names ``base@tag`` that avoid every reserved name."""

    def __init__(self, reserved: Iterable[str] = ()):
        self.taken = set(reserved)
        self.counters: dict = {}

    def reserve(self, names: Iterable[str]) -> None:
        self.taken.update(names)

    def name(self, text: str) -> str:
        out = text
        while out in self.taken:
            out = out + "'"
        self.taken.add(out)
        return out

    def next(self, base: str, kind: str) -> str:
        key = (base, kind)
        k = self.counters.get(key, 0) + 1
        self.counters[key] = k
        return self.name(f"{base}@{kind}.{k}")


def _all_names(f: Formula) -> set:
    out = set()
    for g in subformulas(f):
        out |= free_vars(g)
        if isinstance(g, (Exists, Forall, Exists2, Forall2)):
            out.add(g.var)
    return out


# HyperLTL -> A-HyperLTL -----------------------------------------------------------------

def hyperltl_to_ahyperltl(phi: HyperSentence) -> HyperSentence:
    """Wrap the body in E together with the #-encoding constraint on every variable."""
    if SHARP in props(phi.body):
        raise AlphabetClash("'#' already occurs in the formula")
    body = conj([phi.body] + [theta_sharp(x) for x in phi.variables])
    return HyperSentence(phi.prefix, Trajectory("E", body))


# FO_f[<,+] -> HyperLTL_C ---------------------------------------------------------------

def rename_apart(phi: Formula, pool: FreshVarPool | None = None) -> Formula:
    """Give every quantifier its own variable."""
    pool = pool or FreshVarPool(_all_names(phi))
    seen: set = set()

    def go(f: Formula, env: dict) -> Formula:
        if isinstance(f, PropAt):
            return PropAt(f.prop, env.get(f.var, f.var))
        if isinstance(f, (Eq, Lt, EqLevel)):
            return type(f)(env.get(f.left, f.left), env.get(f.right, f.right))
        if isinstance(f, Add):
            return Add(env.get(f.z, f.z), env.get(f.x, f.x), env.get(f.y, f.y))
        if isinstance(f, In):
            return In(env.get(f.var, f.var), env.get(f.setvar, f.setvar))
        if isinstance(f, (Exists, Forall, Exists2, Forall2)):
            v = f.var
            if v in seen:
                new = pool.next(v, "R")
            else:
                new = v
            seen.add(new)
            return type(f)(new, go(f.sub, {**env, v: new}))
        kids = f.children()
        if not kids:
            return f
        return type(f)(*(go(c, env) for c in kids))

    return go(phi, {})


def _sharp(x: str) -> Formula:
    return RelProp(SHARP, x)


def psi_eq_past(x: str, y: str, alphabet: Sequence[str]) -> Formula:
    both = And(init_past(x, alphabet), init_past(y, alphabet))
    return Or(both, Context((x, y), Prev(Since(TRUE, both))))


def init_past(z: str, alphabet: Sequence[str]) -> Formula:
    """Holds exactly when ``z`` is at position 0."""
    if alphabet:
        anything = disj([Or(RelProp(p, z), Not(RelProp(p, z))) for p in alphabet])
    else:
        anything = TRUE
    return Context((z,), Not(Prev(anything)))


class ChltlTranslation(tuple):
    """Pair (formula, variables); ``variables`` must all be bound to enc(w) at 0."""

    @property
    def formula(self) -> Formula:
        return self[0]

    @property
    def variables(self) -> tuple:
        return self[1]


def _fo_to_chltl(phi: Formula, equal) -> ChltlTranslation:
    free = free_vars(phi)
    if free:
        raise TranslationError(f"free variables {sorted(free)}")
    pool = FreshVarPool(_all_names(phi))
    phi = rename_apart(phi, pool)
    sync: dict = {}
    inventory: list = []

    def S(x: str) -> str:
        c = pool.next(x, "S")
        sync.setdefault(x, []).append(c)
        inventory.append(c)
        return c

    def I(x: str) -> str:
        c = pool.next(x, "I")
        inventory.append(c)
        return c

    def tr(f: Formula) -> Formula:
        if isinstance(f, TrueF):
            return TRUE
        if isinstance(f, PropAt):
            return RelProp(f.prop, f.var)
        if isinstance(f, Eq):
            return equal(S(f.left), S(f.right))
        if isinstance(f, Lt):
            xs, ys = S(f.left), S(f.right)
            return Context((xs, ys), Eventually(And(Not(_sharp(xs)), _sharp(ys))))
        if isinstance(f, Add):
            xs, ys, zs = S(f.x), S(f.y), S(f.z)
            xi, yi = I(f.x), I(f.y)
            a = Context((xi, xs), Eventually(And(equal(xi, ys), equal(xs, zs))))
            b = Context((yi, ys), Eventually(And(equal(yi, xs), equal(ys, zs))))
            return Or(a, b)
        if isinstance(f, Not):
            return Not(tr(f.sub))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(tr(f.left), tr(f.right))
        if isinstance(f, (Exists, Forall)):
            x = f.var
            inventory.append(x)
            body = tr(f.sub)
            if isinstance(f, Forall):
                body = Not(body)
            ctx = Context((x,) + tuple(sync.get(x, ())), Eventually(And(Not(_sharp(x)), body)))
            return Not(ctx) if isinstance(f, Forall) else ctx
        raise TranslationError(f"{type(f).__name__} is not FO[<,+]")

    out = tr(phi)
    return ChltlTranslation((out, tuple(inventory)))


def foplus_to_hyperltlc(phi: Formula) -> ChltlTranslation:
    """FO_f[<,+] sentence -> quantifier-free HyperLTL_C formula plus its variables."""
    return _fo_to_chltl(phi, psi_eq)


def foplus_to_past_hyperltlc(phi: Formula) -> ChltlTranslation:
    """Same skeleton, with position equality expressed through past operators."""
    alphabet = sorted(props(phi))
    return _fo_to_chltl(phi, lambda x, y: psi_eq_past(x, y, alphabet))


def eval_on_word(w, translation: ChltlTranslation) -> bool:
    """Evaluate a translated formula with every variable at (enc(w), 0)."""
    from .hyper import eval_qf_hyperltl_c
    psi, variables = translation
    t = enc_finite(w)
    Pi = TraceAssignment.of(**{v: t for v in variables}) if variables else None
    if Pi is None:
        # no variables at all: the sentence is quantifier-free and atom-free
        from .ltl import eval_ltl
        return eval_ltl(t, 0, psi)
    return eval_qf_hyperltl_c(Pi, psi, mode="finite")


# HyperLTL_C -> FO_f[<,+] ---------------------------------------------------------------

def _block_sequences(items: tuple):
    yield ()
    for r in range(1, len(items) + 1):
        for first in combinations(items, r):
            rest = tuple(i for i in items if i not in first)
            for tail in _block_sequences(rest):
                yield (frozenset(first),) + tail


def part(V: Iterable) -> list:
    """Part(V): tuples (P1..Pk), a partition of V with P1..P(k-1) nonempty."""
    items = tuple(sorted(V))
    out = []
    for head in _block_sequences(items):
        used = frozenset().union(*head)
        out.append(head + (frozenset(items) - used,))
    return out


class _ChltlToFo:
    def __init__(self, variables: Sequence[str], allow_past: bool):
        self.vars = tuple(variables)
        self.n = len(self.vars)
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.pool = FreshVarPool(self.vars)
        self.ynames: dict = {}
        self.allow_past = allow_past
        self.all = frozenset(range(self.n))

    def y(self, i: int, ell: int) -> str:
        key = (i, ell)
        if key not in self.ynames:
            self.ynames[key] = self.pool.name(f"y@L.{ell}.{i + 1}")
        return self.ynames[key]

    def tmp(self, base: str) -> str:
        return self.pool.next(base, "T")

    # small FO gadgets
    def lt_eq(self, a: str, b: str) -> Formula:
        return Or(Lt(a, b), Eq(a, b))

    def is_last(self, a: str) -> Formula:
        u = self.tmp("u")
        return Not(Exists(u, Lt(a, u)))

    def is_zero(self, a: str) -> Formula:
        u = self.tmp("u")
        return Not(Exists(u, Lt(u, a)))

    def succ(self, a: str, b: str) -> Formula:
        u = self.tmp("u")
        return And(Lt(a, b), Not(Exists(u, And(Lt(a, u), Lt(u, b)))))

    def exists(self, names: Sequence[str], body: Formula) -> Formula:
        for v in reversed(names):
            body = Exists(v, body)
        return body

    def forall(self, names: Sequence[str], body: Formula) -> Formula:
        for v in reversed(names):
            body = Forall(v, body)
        return body

    def level(self, ell: int) -> list:
        return [self.y(i, ell) for i in range(self.n)]

    def f(self, th: Formula, C: frozenset, ell: int, Ex: frozenset) -> Formula:
        if isinstance(th, TrueF):
            return TRUE
        if isinstance(th, RelProp):
            i = self.index[th.var]
            if th.prop != SHARP:
                return PropAt(th.prop, self.y(i, ell)) if i not in Ex else FALSE
            return TRUE if i in Ex else FALSE
        if isinstance(th, Not):
            return Not(self.f(th.sub, C, ell, Ex))
        if isinstance(th, And):
            return And(self.f(th.left, C, ell, Ex), self.f(th.right, C, ell, Ex))
        if isinstance(th, Context):
            return self.f(th.sub, frozenset(self.index[v] for v in th.vars), ell, Ex)
        if isinstance(th, Next):
            return self.next(th.sub, C, ell, Ex)
        if isinstance(th, Until):
            return self.until(th.left, th.right, C, ell, Ex)
        if isinstance(th, (Prev, Since)):
            if not self.allow_past:
                raise PastConstructorError("past operators need the experimental past mode")
            if isinstance(th, Prev):
                return self.prev(th.sub, C, ell, Ex)
            return self.since(th.left, th.right, C, ell, Ex)
        raise TranslationError(f"{type(th).__name__} is not HyperLTL_C")

    def next(self, sub, C, ell, Ex):
        movable = sorted(C - Ex)
        out = []
        for r in range(len(movable) + 1):
            for V in map(frozenset, combinations(movable, r)):
                parts = []
                for i in movable:
                    last = self.is_last(self.y(i, ell))
                    parts.append(last if i in V else Not(last))
                for i in sorted((self.all - C) | Ex | V):
                    parts.append(Eq(self.y(i, ell + 1), self.y(i, ell)))
                for i in sorted(C - (Ex | V)):
                    parts.append(self.succ(self.y(i, ell), self.y(i, ell + 1)))
                parts.append(self.f(sub, C, ell + 1, Ex | V))
                out.append(self.exists(self.level(ell + 1), conj(parts)))
        return disj(out)

    def shift(self, C, ell, Ex, target: int, offset: str) -> list:
        """Copies at level ``target`` = level ``ell`` shifted by ``offset`` on C minus Ex."""
        parts = [Eq(self.y(i, target), self.y(i, ell)) for i in sorted((self.all - C) | Ex)]
        parts += [Add(self.y(i, target), self.y(i, ell), offset) for i in sorted(C - Ex)]
        return parts

    def g(self, lo, hi, V, psi1, C, ell, Ex):
        parts = self.shift(C, ell, Ex, ell + 1, hi)
        for i in sorted(C - Ex):
            last = self.is_last(self.y(i, ell + 1))
            parts.append(last if i in V else Not(last))
        z0 = self.tmp("z")
        guard = conj([Lt(lo, z0), self.lt_eq(z0, hi)] + self.shift(C, ell, Ex, ell + 2, z0))
        parts.append(self.forall([z0] + self.level(ell + 2),
                                 Implies(guard, self.f(psi1, C, ell + 2, Ex))))
        return self.exists(self.level(ell + 1), conj(parts))

    def h(self, lo, hi, psi1, psi2, C, ell, Ex):
        parts = self.shift(C, ell, Ex, ell + 1, hi)
        parts.append(self.f(psi2, C, ell + 1, Ex))
        z0 = self.tmp("z")
        guard = conj([Lt(lo, z0), Lt(z0, hi)] + self.shift(C, ell, Ex, ell + 2, z0))
        parts.append(self.forall([z0] + self.level(ell + 2),
                                 Implies(guard, self.f(psi1, C, ell + 2, Ex))))
        return self.exists(self.level(ell + 1), conj(parts))

    def until(self, psi1, psi2, C, ell, Ex):
        movable = C - Ex
        if len(movable) > MAX_CONTEXT:
            raise ResourceError(f"context of size {len(movable)} exceeds the cap {MAX_CONTEXT}")
        out = []
        for blocks in part(movable):
            k = len(blocks)
            zs = [self.tmp("z") for _ in range(k + 1)]
            virtual = k >= 2 and not blocks[-1]
            parts = [self.is_zero(zs[0])]
            top = k - 1 if virtual else k
            parts += [Lt(zs[i], zs[i + 1]) for i in range(1, top)]
            if virtual:
                parts.append(self.f(psi1, C, ell, Ex))
            else:
                parts.append(Implies(Lt(zs[0], zs[k]), self.f(psi1, C, ell, Ex)))
            ex = Ex
            for i in range(1, k):
                parts.append(self.g(zs[i - 1], zs[i], blocks[i - 1], psi1, C, ell, ex))
                ex = ex | blocks[i - 1]
            if virtual:
                # every context variable has left w one step after z_(k-1): the values
                # of copies in Ex are never consulted, so no new level is needed
                parts.append(self.f(psi2, C, ell, ex))
            else:
                parts.append(self.h(zs[k - 1], zs[k], psi1, psi2, C, ell, ex))
            used = zs[:top + 1]
            out.append(self.exists(used, conj(parts)))
        return disj(out)

    # experimental past direction. A variable beyond w sits at |w| in the finite-trace
    # semantics, so one step back puts it on the last position of w.
    def prev(self, sub, C, ell, Ex):
        parts = [Eq(self.y(i, ell + 1), self.y(i, ell)) for i in sorted((self.all - C) | (Ex - C))]
        parts += [self.is_last(self.y(i, ell + 1)) for i in sorted(C & Ex)]
        parts += [self.succ(self.y(i, ell + 1), self.y(i, ell)) for i in sorted(C - Ex)]
        parts.append(self.f(sub, C, ell + 1, Ex - C))
        return self.exists(self.level(ell + 1), conj(parts))

    def since(self, psi1, psi2, C, ell, Ex):
        if C & Ex:
            # unroll once: after one step back every context variable is inside w
            return Or(self.f(psi2, C, ell, Ex),
                      And(self.f(psi1, C, ell, Ex), self.f(Prev(Since(psi1, psi2)), C, ell, Ex)))
        z, z0 = self.tmp("z"), self.tmp("z")
        stay = sorted(self.all - C)
        parts = [Add(self.y(i, ell), self.y(i, ell + 1), z) for i in sorted(C)]
        parts += [Eq(self.y(i, ell + 1), self.y(i, ell)) for i in stay]
        parts.append(self.f(psi2, C, ell + 1, Ex))
        guard = conj([Lt(z0, z)] + [Add(self.y(i, ell), self.y(i, ell + 2), z0) for i in sorted(C)]
                     + [Eq(self.y(i, ell + 2), self.y(i, ell)) for i in stay])
        parts.append(self.forall([z0] + self.level(ell + 2),
                                 Implies(guard, self.f(psi1, C, ell + 2, Ex))))
        return self.exists([z] + self.level(ell + 1), conj(parts))


def hyperltlc_to_foplus(psi: Formula, variables: Sequence[str], experimental_past: bool = False
                        ) -> Formula:
    """Quantifier-free HyperLTL_C formula -> FO_f[<,+] sentence (exponential size)."""
    variables = tuple(variables)
    missing = free_vars(psi) - set(variables)
    if missing:
        raise TranslationError(f"variables {sorted(missing)} are not listed")
    if not variables:
        raise TranslationError("at least one variable is needed")
    if len(variables) > MAX_CONTEXT:
        raise ResourceError(f"{len(variables)} variables exceed the cap {MAX_CONTEXT}")
    core = desugar(psi)
    has_past = any(isinstance(g, (Prev, Since)) for g in subformulas(core))
    if has_past and not experimental_past:
        raise PastConstructorError("past operators are only translated in experimental mode")
    t = _ChltlToFo(variables, experimental_past)
    body = t.f(core, t.all, 1, frozenset())
    ties = [And(Eq(t.y(i, 1), x), t.is_zero(x)) for i, x in enumerate(variables)]
    return t.exists(list(variables) + t.level(1), conj(ties + [body]))


# simple HyperLTL_C -> FO[<,E] ------------------------------------------------------------

def check_simple(f: Formula) -> None:
    """Raise NotSimpleError if a non-singleton context sits inside a different context."""
    def go(g: Formula, outer: tuple | None, path: tuple):
        if isinstance(g, Context):
            here = "<" + ",".join(g.vars) + ">"
            if outer is not None and g.vars != outer and len(g.vars) > 1:
                raise NotSimpleError(f"context {here} occurs inside a different context",
                                     path + (here,))
            for c in g.children():
                go(c, g.vars, path + (here,))
            return
        for c in g.children():
            go(c, outer, path)
    go(f.body if isinstance(f, HyperSentence) else f, None, ())


def is_simple(f) -> bool:
    try:
        check_simple(f)
    except NotSimpleError:
        return False
    return True


_BOOLEAN = (TrueF, Not, And, Or, Implies, Iff)


def to_fragment_F(body: Formula, variables: Sequence[str]) -> Formula:
    """Rewrite into a Boolean combination of formulas C psi (C a context)."""
    allv = tuple(variables)

    def go(g: Formula) -> Formula:
        if isinstance(g, Context):
            return g
        if isinstance(g, _BOOLEAN):
            kids = g.children()
            return g if not kids else type(g)(*(go(c) for c in kids))
        return Context(allv, g)
    return go(body)


class _SimpleToFoe:
    def __init__(self, variables: Sequence[str]):
        self.vars = tuple(variables)
        self.n = len(self.vars)
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.pool = FreshVarPool(self.vars)
        self.ynames: dict = {}

    def y(self, i, ell):
        key = (i, ell)
        if key not in self.ynames:
            self.ynames[key] = self.pool.name(f"y@L.{ell}.{i + 1}")
        return self.ynames[key]

    def level(self, ell):
        return [self.y(i, ell) for i in range(self.n)]

    def succ(self, a, b):
        u = self.pool.next("u", "T")
        return And(Lt(a, b), Not(Exists(u, And(Lt(a, u), Lt(u, b)))))

    def theta_E(self, C, ell):
        idx = sorted(C)
        return conj([EqLevel(self.y(i, ell), self.y(j, ell)) for i, j in combinations(idx, 2)])

    def f(self, th, C, ell):
        if isinstance(th, TrueF):
            return TRUE
        if isinstance(th, RelProp):
            return PropAt(th.prop, self.y(self.index[th.var], ell))
        if isinstance(th, Not):
            return Not(self.f(th.sub, C, ell))
        if isinstance(th, And):
            return And(self.f(th.left, C, ell), self.f(th.right, C, ell))
        if isinstance(th, Context):
            return self.f(th.sub, frozenset(self.index[v] for v in th.vars), ell)
        other = sorted(frozenset(range(self.n)) - C)
        if isinstance(th, Next):
            parts = [self.succ(self.y(i, ell), self.y(i, ell + 1)) for i in sorted(C)]
            parts += [Eq(self.y(i, ell + 1), self.y(i, ell)) for i in other]
            parts.append(self.f(th.sub, C, ell + 1))
            return _exists(self.level(ell + 1), conj(parts))
        if isinstance(th, Until):
            parts = [Or(Lt(self.y(i, ell), self.y(i, ell + 1)), Eq(self.y(i, ell), self.y(i, ell + 1)))
                     for i in sorted(C)]
            parts += [Eq(self.y(i, ell + 1), self.y(i, ell)) for i in other]
            parts.append(self.theta_E(C, ell + 1))
            parts.append(self.f(th.right, C, ell + 1))
            guard = [And(Or(Lt(self.y(i, ell), self.y(i, ell + 2)),
                            Eq(self.y(i, ell), self.y(i, ell + 2))),
                         Lt(self.y(i, ell + 2), self.y(i, ell + 1))) for i in sorted(C)]
            guard += [Eq(self.y(i, ell + 2), self.y(i, ell)) for i in other]
            guard.append(self.theta_E(C, ell + 2))
            parts.append(_forall(self.level(ell + 2),
                                 Implies(conj(guard), self.f(th.left, C, ell + 2))))
            return _exists(self.level(ell + 1), conj(parts))
        raise TranslationError(f"{type(th).__name__} cannot be translated to FO[<,E]")


def _exists(names, body):
    for v in reversed(names):
        body = Exists(v, body)
    return body


def _forall(names, body):
    for v in reversed(names):
        body = Forall(v, body)
    return body


def simple_hyperltlc_to_foe(phi: HyperSentence, check: bool = True) -> Formula:
    """Simple HyperLTL_C sentence -> FO[<,E] sentence with the same quantifier prefix.

    Trace quantifiers become first-order quantifiers restricted to position 0.
    """
    if check:
        check_simple(phi)
    core = desugar(phi.body)
    if any(isinstance(g, (Prev, Since)) for g in subformulas(core)):
        raise PastConstructorError("past operators are not part of simple HyperLTL_C")
    variables = phi.variables
    t = _SimpleToFoe(variables)
    body = to_fragment_F(core, variables)
    n = t.n

    def tr(g):
        if isinstance(g, Context):
            C = frozenset(t.index[v] for v in g.vars)
            inner = t.f(g.sub, C, 1)
            ties = [Eq(t.y(i, 1), variables[i]) for i in range(n)]
            return _exists(t.level(1), conj(ties + [inner]))
        if isinstance(g, TrueF):
            return TRUE
        return type(g)(*(tr(c) for c in g.children()))

    out = tr(desugar(body))
    for q, x in reversed(phi.prefix):
        u = t.pool.next("u", "T")
        start = Not(Exists(u, Lt(u, x)))
        out = Exists(x, And(start, out)) if q == "exists" else Forall(x, Implies(start, out))
    return out


# S1S[E] -> S1S over k-codes --------------------------------------------------------------

def s1se_to_s1s_kcode(phi: Formula, k: int, alphabet: Iterable[str] | None = None) -> Formula:
    """Sentence whose models (over AP x [1,k]) are the well-formed k-codes of models of phi."""
    if k < 1:
        raise TranslationError("k must be >= 1")
    free = free_vars(phi)
    if free:
        raise TranslationError(f"free variables {sorted(free)}")
    AP = sorted(props(phi) if alphabet is None else set(alphabet))
    pool = FreshVarPool(_all_names(phi))
    phi = rename_apart(phi, pool)
    names: dict = {}

    def yv(x, ell):
        key = (x, ell)
        if key not in names:
            names[key] = pool.name(f"{x}@K.{ell}")
        return names[key]

    def f(g: Formula, choice: dict) -> Formula:
        if isinstance(g, TrueF):
            return TRUE
        if isinstance(g, PropAt):
            ell = choice[g.var]
            return PropAt(kcode_prop(g.prop, ell), yv(g.var, ell))
        if isinstance(g, In):
            ell = choice[g.var]
            return In(yv(g.var, ell), yv(g.setvar, ell))
        if isinstance(g, (Lt, Eq)):
            a, b = choice[g.left], choice[g.right]
            if a != b:
                return FALSE
            return type(g)(yv(g.left, a), yv(g.right, b))
        if isinstance(g, EqLevel):
            return Eq(yv(g.left, choice[g.left]), yv(g.right, choice[g.right]))
        if isinstance(g, Not):
            return Not(f(g.sub, choice))
        if isinstance(g, (And, Or, Implies, Iff)):
            return type(g)(f(g.left, choice), f(g.right, choice))
        if isinstance(g, Exists):
            return disj([Exists(yv(g.var, ell), f(g.sub, {**choice, g.var: ell}))
                         for ell in range(1, k + 1)])
        if isinstance(g, Forall):
            return conj([Forall(yv(g.var, ell), f(g.sub, {**choice, g.var: ell}))
                         for ell in range(1, k + 1)])
        if isinstance(g, (Exists2, Forall2)):
            body = f(g.sub, choice)
            for ell in range(k, 0, -1):
                body = type(g)(yv(g.var, ell), body)
            return body
        raise TranslationError(f"{type(g).__name__} is not S1S[E]")

    main = f(phi, {})
    wf = []
    for l1, l2 in combinations(range(1, k + 1), 2):
        z = pool.next("z", "T")
        wf.append(Exists(z, disj([Iff(PropAt(kcode_prop(a, l1), z), Not(PropAt(kcode_prop(a, l2), z)))
                                  for a in AP])))
    return conj([main] + wf)

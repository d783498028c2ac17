"""First-order evaluators: FO_f[<,+] on finite words, bounded FO[<,+] on lassos,
bounded FO[<,E] / S1S[E] on lasso trace sets."""

from __future__ import annotations

from itertools import chain, combinations
from typing import Sequence

from .syntax import (
    Add, And, Eq, EqLevel, Exists, Exists2, Formula, In, Lt, Not, PropAt, TrueF, desugar,
    free_vars, subformulas, to_text,
)
from .traces import FiniteTrace, LassoTrace


class FoError(ValueError):
    pass


class FreeVariableError(FoError):
    pass


class UnsupportedFeature(FoError):
    pass


def _require_sentence(phi: Formula) -> Formula:
    free = free_vars(phi)
    if free:
        raise FreeVariableError(f"free variables {sorted(free)} in {to_text(phi)}")
    return desugar(phi)


class _Model:
    """Domain plus atom semantics; subclasses fix what a position is."""

    def domain(self):
        raise NotImplementedError

    def sets(self):
        raise UnsupportedFeature("second-order quantification is not available here")

    def prop(self, p, a) -> bool:
        raise NotImplementedError

    def lt(self, a, b) -> bool:
        return a < b

    def add(self, z, x, y) -> bool:
        return z == x + y

    def level(self, a, b) -> bool:
        raise FoError("E(x,y) needs a trace-set model")


class _Word(_Model):
    def __init__(self, letters_at, n: int):
        self.letters_at = letters_at
        self.n = n

    def domain(self):
        return range(self.n)

    def contains(self, a) -> bool:
        return 0 <= a < self.n

    def prop(self, p, a):
        return p in self.letters_at(a)


class _TraceSet(_Model):
    def __init__(self, traces: Sequence[LassoTrace], bound: int, so_bound: int):
        self.traces = list(traces)
        self.bound = bound
        self.points = [(t, i) for t in range(len(self.traces)) for i in range(bound)]
        self.so_bound = so_bound

    def domain(self):
        return self.points

    def contains(self, a) -> bool:
        return a[1] < self.bound

    def sets(self):
        if self.so_bound <= 0:
            raise UnsupportedFeature("second-order quantifier with so_bound = 0")
        base = [(t, i) for t in range(len(self.traces)) for i in range(self.so_bound)]
        subsets = chain.from_iterable(combinations(base, r) for r in range(len(base) + 1))
        return (frozenset(s) for s in subsets)

    def prop(self, p, a):
        t, i = a
        return p in self.traces[t].letter_at(i)

    def lt(self, a, b):
        return a[0] == b[0] and a[1] < b[1]

    def add(self, z, x, y):
        raise FoError("addition is not part of FO[<,E]")

    def level(self, a, b):
        return a[1] == b[1]


def _peel(f: Formula) -> Formula:
    while isinstance(f, Not) and isinstance(f.sub, Not):
        f = f.sub.sub
    return f


def _conjuncts(f: Formula) -> list:
    f = _peel(f)
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _solver(model: _Model, c: Formula, v: str, free: set):
    """Return a function computing the only possible value of ``v`` from ``c``,
    when the other variables of the atom are all in ``free``-complement."""
    if isinstance(c, Eq) and c.left != c.right:
        other = c.right if c.left == v else c.left if c.right == v else None
        if other is not None and other not in free:
            return lambda g: g[other]
    if isinstance(c, Add) and isinstance(model, _Word):
        z, x, y = c.z, c.x, c.y
        if [z, x, y].count(v) != 1:
            return None
        if v == z and x not in free and y not in free:
            return lambda g: g[x] + g[y]
        if v == x and z not in free and y not in free:
            return lambda g: g[z] - g[y]
        if v == y and z not in free and x not in free:
            return lambda g: g[z] - g[x]
    return None


def _compile(model: _Model, f: Formula):
    f = _peel(f)
    if isinstance(f, TrueF):
        return lambda g: True
    if isinstance(f, PropAt):
        p, x = f.prop, f.var
        return lambda g: model.prop(p, g[x])
    if isinstance(f, Eq):
        a, b = f.left, f.right
        return lambda g: g[a] == g[b]
    if isinstance(f, Lt):
        a, b = f.left, f.right
        return lambda g: model.lt(g[a], g[b])
    if isinstance(f, Add):
        z, x, y = f.z, f.x, f.y
        return lambda g: model.add(g[z], g[x], g[y])
    if isinstance(f, EqLevel):
        a, b = f.left, f.right
        return lambda g: model.level(g[a], g[b])
    if isinstance(f, In):
        x, s = f.var, f.setvar
        return lambda g: g[x] in g[s]
    if isinstance(f, Not):
        sub = _compile(model, f.sub)
        return lambda g: not sub(g)
    if isinstance(f, And):
        parts = [_compile(model, c) for c in _conjuncts(f)]
        return lambda g: all(p(g) for p in parts)
    if isinstance(f, Exists):
        return _compile_block(model, f)
    if isinstance(f, Exists2):
        v = f.var
        sub = _compile(model, f.sub)

        def ex2(g):
            saved = g.get(v, _MISSING)
            try:
                for s in model.sets():
                    g[v] = s
                    if sub(g):
                        return True
                return False
            finally:
                _restore(g, v, saved)
        return ex2
    raise FoError(f"{type(f).__name__} is not a first-order constructor")


def _compile_block(model: _Model, f: Exists):
    """A run of first-order existentials over a conjunction, evaluated by
    binding determined variables directly and checking each conjunct as soon
    as its variables are bound."""
    block = []
    body = f
    while isinstance(body, Exists) and body.var not in block:
        block.append(body.var)
        body = _peel(body.sub)
    conjs = _conjuncts(body)
    need = [set(free_vars(c)) & set(block) for c in conjs]
    unbound = set(block)
    done = [False] * len(conjs)
    plan = []

    def flush():
        ready = [k for k in range(len(conjs)) if not done[k] and not (need[k] & unbound)]
        ready.sort(key=lambda k: size_of(conjs[k]))
        for k in ready:
            done[k] = True
            plan.append(("check", _compile(model, conjs[k])))

    flush()
    while unbound:
        choice = None
        for v in block:
            if v not in unbound:
                continue
            for k, c in enumerate(conjs):
                s = _solver(model, c, v, unbound - {v})
                if s is not None:
                    choice = (v, s)
                    break
            if choice:
                break
        if choice is None:
            v = next(v for v in block if v in unbound)
            plan.append(("each", v))
        else:
            plan.append(("solve", choice[0], choice[1]))
            v = choice[0]
        unbound.discard(v)
        flush()
    plan = tuple(plan)
    block = tuple(block)

    def run(g, k):
        if k == len(plan):
            return True
        step = plan[k]
        if step[0] == "check":
            return step[1](g) and run(g, k + 1)
        if step[0] == "solve":
            val = step[2](g)
            if not model.contains(val):
                return False
            g[step[1]] = val
            return run(g, k + 1)
        v = step[1]
        for a in model.domain():
            g[v] = a
            if run(g, k + 1):
                return True
        return False

    def ex(g):
        saved = [(v, g.get(v, _MISSING)) for v in block]
        try:
            return run(g, 0)
        finally:
            for v, s in reversed(saved):
                _restore(g, v, s)
    return ex


def size_of(f: Formula) -> int:
    return 1 + sum(size_of(c) for c in f.children())


_MISSING = object()


def _restore(g: dict, var: str, saved) -> None:
    if saved is _MISSING:
        g.pop(var, None)
    else:
        g[var] = saved


def _eval(model: _Model, f: Formula, g: dict) -> bool:
    return _compile(model, f)(g)


def _check_so(phi: Formula, so_bound: int) -> None:
    if so_bound <= 0 and any(isinstance(h, Exists2) for h in subformulas(phi)):
        raise UnsupportedFeature("second-order quantifier with so_bound = 0")


def eval_foplus_finite(w: FiniteTrace, phi: Formula) -> bool:
    """w |= phi with quantifiers over 0..|w|-1."""
    core = _require_sentence(phi)
    _check_so(core, 0)
    letters = w.letters
    return _eval(_Word(lambda i: letters[i], len(letters)), core, {})


def eval_foplus_finite_open(w: FiniteTrace, phi: Formula, valuation: dict) -> bool:
    """Like eval_foplus_finite for a formula whose free variables ``valuation`` fixes."""
    missing = free_vars(phi) - set(valuation)
    if missing:
        raise FreeVariableError(f"free variables {sorted(missing)} have no value")
    letters = w.letters
    return _eval(_Word(lambda i: letters[i], len(letters)), desugar(phi), dict(valuation))


def eval_foplus_lasso(pi: LassoTrace, phi: Formula, position_bound: int) -> bool:
    """Bounded approximation: quantifiers range over 0..position_bound-1."""
    if position_bound < 1:
        raise FoError("position_bound must be >= 1")
    core = _require_sentence(phi)
    _check_so(core, 0)
    return _eval(_Word(pi.letter_at, position_bound), core, {})


def eval_foe_bounded(L: Sequence[LassoTrace], phi: Formula, position_bound: int,
                     so_bound: int = 0) -> bool:
    """Bounded FO[<,E] / S1S[E]: first-order values range over L x [0, position_bound)."""
    if position_bound < 1:
        raise FoError("position_bound must be >= 1")
    traces = list(dict.fromkeys(L))
    if not traces:
        raise FoError("the trace set must be nonempty")
    core = _require_sentence(phi)
    _check_so(core, so_bound)
    return _eval(_TraceSet(traces, position_bound, so_bound), core, {})


def eval_foe_open(L: Sequence[LassoTrace], phi: Formula, valuation: dict,
                  position_bound: int, so_bound: int = 0) -> bool:
    """Open-formula variant; values are (trace index, position) pairs or sets of them."""
    missing = free_vars(phi) - set(valuation)
    if missing:
        raise FreeVariableError(f"free variables {sorted(missing)} have no value")
    core = desugar(phi)
    _check_so(core, so_bound)
    return _eval(_TraceSet(list(L), position_bound, so_bound), core, dict(valuation))

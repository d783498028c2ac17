"""Random generators and independent reference implementations shared by the tests.

Everything here is deliberately naive: the oracles work on explicit positions
and never reuse the package's evaluators.
"""

from __future__ import annotations

import random
from itertools import product

from asynchyper.syntax import (
    Add, And, Context, Eq, EqLevel, Eventually, Exists, Forall, Globally, Iff, Implies, Lt,
    Next, NextRel, Not, Or, Prev, Prop, PropAt, RelProp, Since, TRUE, TrueF, Until, UntilRel,
)
from asynchyper.traces import FiniteTrace, LassoTrace

# random objects ----------------------------------------------------------------------


def rand_letter(r: random.Random, props=("p", "q"), bias=0.4) -> frozenset:
    return frozenset(p for p in props if r.random() < bias)


def rand_lasso(r: random.Random, props=("p", "q"), max_prefix=2, max_period=2) -> LassoTrace:
    pre = [rand_letter(r, props) for _ in range(r.randint(0, max_prefix))]
    per = [rand_letter(r, props) for _ in range(r.randint(1, max_period))]
    return LassoTrace(pre, per)


def rand_word(r: random.Random, n: int, props=("p", "q")) -> FiniteTrace:
    return FiniteTrace([rand_letter(r, props, 0.5) for _ in range(n)])


def rand_ltl(r: random.Random, size: int, props=("p", "q"), leaf=None):
    """Random formula with about ``size`` nodes; ``leaf()`` builds atoms."""
    leaf = leaf or (lambda: Prop(r.choice(props)))
    if size <= 1:
        return TRUE if r.random() < 0.1 else leaf()
    op = r.choice(["not", "and", "or", "X", "U", "F", "G", "imp"])
    if op in ("and", "or", "U", "imp"):
        k = r.randint(1, max(1, size - 2))
        a = rand_ltl(r, k, props, leaf)
        b = rand_ltl(r, max(1, size - 1 - k), props, leaf)
        return {"and": And, "or": Or, "U": Until, "imp": Implies}[op](a, b)
    sub = rand_ltl(r, size - 1, props, leaf)
    return {"not": Not, "X": Next, "F": Eventually, "G": Globally}[op](sub)


def rand_hyper(r: random.Random, size: int, variables, props=("p", "q")):
    return rand_ltl(r, size, props, lambda: RelProp(r.choice(props), r.choice(variables)))


def rand_hyper_s(r: random.Random, size: int, variables, props=("p",), gamma_size=2,
                 empty_gamma=False):
    """HyperLTL_S body; Gamma sets hold small plain LTL formulas (or nothing)."""
    def gamma():
        if empty_gamma:
            return ()
        return tuple(rand_ltl(r, r.randint(1, gamma_size), props)
                     for _ in range(r.randint(0, 2)))

    def go(n):
        if n <= 1:
            return TRUE if r.random() < 0.1 else RelProp(r.choice(props), r.choice(variables))
        op = r.choice(["not", "and", "Xg", "Ug"])
        if op == "not":
            return Not(go(n - 1))
        if op == "Xg":
            return NextRel(gamma(), go(n - 1))
        k = r.randint(1, max(1, n - 2))
        a, b = go(k), go(max(1, n - 1 - k))
        return And(a, b) if op == "and" else UntilRel(gamma(), a, b)
    return go(size)


def rand_hyper_c(r: random.Random, size: int, variables, props=("p", "q"), past=False,
                 contexts=None):
    """HyperLTL_C body; ``contexts`` restricts the context sets used."""
    ctxs = contexts or [tuple(c) for k in range(1, len(variables) + 1)
                        for c in _subsets(variables, k)]

    def go(n):
        if n <= 1:
            return TRUE if r.random() < 0.1 else RelProp(r.choice(props), r.choice(variables))
        ops = ["not", "and", "X", "U", "ctx", "F", "G"]
        if past:
            ops += ["Y", "S"]
        op = r.choice(ops)
        if op in ("and", "U", "S"):
            k = r.randint(1, max(1, n - 2))
            return {"and": And, "U": Until, "S": Since}[op](go(k), go(max(1, n - 1 - k)))
        sub = go(n - 1)
        if op == "ctx":
            return Context(r.choice(ctxs), sub)
        return {"not": Not, "X": Next, "F": Eventually, "G": Globally, "Y": Prev}[op](sub)
    return go(size)


def _subsets(xs, k):
    from itertools import combinations
    return combinations(xs, k)


def rand_fo(r: random.Random, depth: int, bound=(), qdepth=2, props=("p", "q"),
            names=("x", "y", "z")):
    """Random FO[<,+] formula; atoms only mention variables in ``bound``."""
    choices = []
    if bound:
        choices += ["atom"] * 3
    if qdepth > 0:
        choices += ["ex", "all"] * 2
    if depth > 0:
        choices += ["not", "and", "or"]
    c = r.choice(choices) if choices else "atom"
    if c == "atom":
        if not bound:
            return TRUE
        v = lambda: r.choice(bound)
        k = r.choice(["P", "Eq", "Lt", "Add"])
        if k == "P":
            return PropAt(r.choice(props), v())
        if k == "Eq":
            return Eq(v(), v())
        if k == "Lt":
            return Lt(v(), v())
        return Add(v(), v(), v())
    if c in ("ex", "all"):
        x = r.choice(names)
        sub = rand_fo(r, depth, tuple(bound) + (x,), qdepth - 1, props, names)
        return (Exists if c == "ex" else Forall)(x, sub)
    if c == "not":
        return Not(rand_fo(r, depth - 1, bound, qdepth, props, names))
    a = rand_fo(r, depth - 1, bound, qdepth, props, names)
    b = rand_fo(r, depth - 1, bound, qdepth, props, names)
    return (And if c == "and" else Or)(a, b)


# brute-force first-order interpreter ---------------------------------------------------------

def brute_fo(letters, f, g=None) -> bool:
    """Naive recursive FO_f[<,+] semantics over positions 0..len(letters)-1."""
    g = {} if g is None else g
    n = len(letters)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, PropAt):
        return f.prop in letters[g[f.var]]
    if isinstance(f, Eq):
        return g[f.left] == g[f.right]
    if isinstance(f, Lt):
        return g[f.left] < g[f.right]
    if isinstance(f, Add):
        return g[f.z] == g[f.x] + g[f.y]
    if isinstance(f, Not):
        return not brute_fo(letters, f.sub, g)
    if isinstance(f, And):
        return brute_fo(letters, f.left, g) and brute_fo(letters, f.right, g)
    if isinstance(f, Or):
        return brute_fo(letters, f.left, g) or brute_fo(letters, f.right, g)
    if isinstance(f, Implies):
        return (not brute_fo(letters, f.left, g)) or brute_fo(letters, f.right, g)
    if isinstance(f, Iff):
        return brute_fo(letters, f.left, g) == brute_fo(letters, f.right, g)
    if isinstance(f, Exists):
        return any(brute_fo(letters, f.sub, {**g, f.var: i}) for i in range(n))
    if isinstance(f, Forall):
        return all(brute_fo(letters, f.sub, {**g, f.var: i}) for i in range(n))
    raise TypeError(type(f).__name__)


def brute_foe(traces, bound, f, g=None) -> bool:
    """Naive FO[<,E] over points (trace index, position < bound)."""
    g = {} if g is None else g
    pts = [(t, i) for t in range(len(traces)) for i in range(bound)]
    if isinstance(f, TrueF):
        return True
    if isinstance(f, PropAt):
        t, i = g[f.var]
        return f.prop in traces[t].letter_at(i)
    if isinstance(f, Eq):
        return g[f.left] == g[f.right]
    if isinstance(f, Lt):
        a, b = g[f.left], g[f.right]
        return a[0] == b[0] and a[1] < b[1]
    if isinstance(f, EqLevel):
        return g[f.left][1] == g[f.right][1]
    if isinstance(f, Not):
        return not brute_foe(traces, bound, f.sub, g)
    if isinstance(f, And):
        return brute_foe(traces, bound, f.left, g) and brute_foe(traces, bound, f.right, g)
    if isinstance(f, Or):
        return brute_foe(traces, bound, f.left, g) or brute_foe(traces, bound, f.right, g)
    if isinstance(f, Implies):
        return (not brute_foe(traces, bound, f.left, g)) or brute_foe(traces, bound, f.right, g)
    if isinstance(f, Exists):
        return any(brute_foe(traces, bound, f.sub, {**g, f.var: a}) for a in pts)
    if isinstance(f, Forall):
        return all(brute_foe(traces, bound, f.sub, {**g, f.var: a}) for a in pts)
    raise TypeError(type(f).__name__)


# exact recursive LTL / synchronous HyperLTL on lassos ---------------------------------------

def window_eval(f, lookup, P: int, Q: int, i: int = 0) -> bool:
    """Direct recursive semantics at absolute positions.

    Every atom is periodic from position ``P`` on with period ``Q``, hence so is
    every subformula, and an until is settled within one period after
    ``max(j, P)``.  ``lookup(atom, position)`` decides atoms.
    """
    memo = {}

    def norm(j):
        return j if j < P else P + (j - P) % Q

    def ev(g, j):
        j = norm(j)
        key = (g, j)
        if key in memo:
            return memo[key]
        if isinstance(g, TrueF):
            r = True
        elif isinstance(g, (Prop, RelProp)):
            r = lookup(g, j)
        elif isinstance(g, Not):
            r = not ev(g.sub, j)
        elif isinstance(g, And):
            r = ev(g.left, j) and ev(g.right, j)
        elif isinstance(g, Or):
            r = ev(g.left, j) or ev(g.right, j)
        elif isinstance(g, Implies):
            r = (not ev(g.left, j)) or ev(g.right, j)
        elif isinstance(g, Iff):
            r = ev(g.left, j) == ev(g.right, j)
        elif isinstance(g, Next):
            r = ev(g.sub, j + 1)
        elif isinstance(g, Eventually):
            r = any(ev(g.sub, k) for k in range(j, max(j, P) + Q))
        elif isinstance(g, Globally):
            r = all(ev(g.sub, k) for k in range(j, max(j, P) + Q))
        elif isinstance(g, Until):
            r = False
            for k in range(j, max(j, P) + Q):
                if ev(g.right, k):
                    r = True
                    break
                if not ev(g.left, k):
                    break
        else:
            raise TypeError(type(g).__name__)
        memo[key] = r
        return r

    return ev(f, i)


def ltl_oracle(trace: LassoTrace, f, i: int = 0) -> bool:
    return window_eval(f, lambda a, j: a.name in trace.letter_at(j),
                       len(trace.prefix), len(trace.period), i)


def hyper_oracle(assign: dict, f) -> bool:
    """Synchronous HyperLTL; ``assign`` maps variables to (trace, start position)."""
    from math import lcm
    P = max(len(t.prefix) + 1 for t, _ in assign.values())
    Q = lcm(*(len(t.period) for t, _ in assign.values()))

    def look(atom, j):
        t, p = assign[atom.var]
        return atom.prop in t.letter_at(p + j)
    return window_eval(f, look, P, Q)


# stuttering expansions ----------------------------------------------------------------------

def brute_stutter(candidate: LassoTrace, base: LassoTrace, block_bound: int, n: int) -> bool:
    """Is some block decomposition with blocks <= block_bound consistent with the
    first ``n`` letters of ``candidate``?  (Necessary condition, exhaustive.)"""
    cand = candidate.unroll(n)

    def go(i, j):
        if j >= n:
            return True
        a = base.letter_at(i)
        for m in range(1, block_bound + 1):
            if j + m > n:
                return all(cand[k] == a for k in range(j, n))
            if cand[j + m - 1] != a:
                return False
            if go(i + 1, j + m):
                return True
        return False
    return go(0, 0)


def all_letters(props):
    for bits in product((0, 1), repeat=len(props)):
        yield frozenset(p for p, b in zip(props, bits) if b)

"""Evaluators for quantifier-free HyperLTL, HyperLTL_S and HyperLTL_C, and the
quantifier layer over finite trace sets.

Assignments are turned into tuples of normalized positions, one per variable
(variables sorted by name).  Every temporal step maps such a tuple to another
one, so until-operators are decided by walking the orbit until it repeats.
"""

from __future__ import annotations

import math
import sys
from functools import lru_cache
from typing import Iterable, Sequence

from .ltl import LtlTable, prop_key
from .syntax import (
    And, Context, Formula, HyperSentence, Next, NextRel, Not, Prev, Prop, RelProp, Since,
    Trajectory, TrueF, Until, UntilRel, desugar, free_vars, infer_logic, subformulas,
    to_text, transform,
)
from .traces import SHARP, LassoTrace, PointedTrace, TraceAssignment, UnboundVariable


class EvalError(ValueError):
    pass


class PastInLassoMode(EvalError):
    pass


class EmptyContext(EvalError):
    pass


def _ensure_recursion(n: int) -> None:
    if sys.getrecursionlimit() < n:
        sys.setrecursionlimit(n)


def _bound(Pi: TraceAssignment, f: Formula, extra: Iterable[str] = ()) -> list:
    vs = sorted(set(free_vars(f)) | set(extra))
    for v in vs:
        if v not in Pi:
            raise UnboundVariable(v)
    return vs


def _reject_plain_props(f: Formula) -> None:
    for g in subformulas(f):
        if isinstance(g, Prop):
            raise EvalError(f"proposition {g.name} is not relativized to a trace variable")


# synchronous HyperLTL --------------------------------------------------------------

def product_lasso(Pi: TraceAssignment, variables: Sequence[str]) -> LassoTrace:
    """Synchronous product of the pointed traces as one lasso over ``p[x]`` letters."""
    sufs = [(v, Pi[v].trace.suffix(Pi[v].position)) for v in variables]
    if not sufs:
        return LassoTrace((), [frozenset()])
    P = max(len(t.prefix) for _, t in sufs)
    Q = math.lcm(*(len(t.period) for _, t in sufs))

    def at(i):
        return frozenset(f"{p}[{v}]" for v, t in sufs for p in t.letter_at(i))
    return LassoTrace([at(i) for i in range(P)], [at(i) for i in range(P, P + Q)])


def eval_qf_hyperltl(Pi: TraceAssignment, psi: Formula) -> bool:
    _reject_plain_props(psi)
    vs = _bound(Pi, psi)
    table = LtlTable(product_lasso(Pi, vs), psi)
    return table[psi, 0]


# Gamma successors ------------------------------------------------------------------

class _GammaInfo:
    """Truth rows of a Gamma set on one trace."""

    def __init__(self, trace: LassoTrace, gamma: tuple):
        self.trace = trace
        n = trace.window
        if gamma:
            rows = [LtlTable(trace, th).values() for th in gamma]
            self.sig = [tuple(r[i] for r in rows) for i in range(n)]
        else:
            self.sig = None
        p = len(trace.prefix)
        # constant_from[i]: signature constant on every position reachable from i
        self.constant_from = [True] * n
        if self.sig is not None:
            cyc = len(set(self.sig[p:])) == 1
            for i in range(n - 1, -1, -1):
                if i >= p:
                    self.constant_from[i] = cyc
                else:
                    nxt = self.constant_from[i + 1]
                    self.constant_from[i] = nxt and self.sig[i] == self.sig[i + 1]

    def successor(self, i: int) -> int:
        t = self.trace
        if self.sig is None:
            return i + 1
        j0 = t.normalize_position(i)
        if self.constant_from[j0]:
            return i + 1
        s = self.sig[j0]
        k = 1
        while self.sig[t.normalize_position(i + k)] == s:
            k += 1
        return i + k


@lru_cache(maxsize=4096)
def _gamma_info(trace: LassoTrace, gamma: tuple) -> _GammaInfo:
    return _GammaInfo(trace, gamma)


def _canon_gamma(gamma) -> tuple:
    return tuple(sorted({desugar(g) for g in gamma}, key=to_text))


def gamma_successor(trace: LassoTrace, i: int, gamma: Iterable[Formula]) -> int:
    return _GammaInfo(trace, _canon_gamma(gamma)).successor(i)


def stutter_trace(trace: LassoTrace, gamma: Iterable[Formula]) -> LassoTrace:
    info = _GammaInfo(trace, _canon_gamma(gamma))
    orbit, index = [], {}
    j = 0
    while j not in index:
        index[j] = len(orbit)
        orbit.append(j)
        j = trace.normalize_position(info.successor(j))
    r = index[j]
    letters = [trace.letter_at(k) for k in orbit]
    return LassoTrace(letters[:r], letters[r:])


# shared machinery for the position-tuple evaluators -----------------------------------

class _Frame:
    def __init__(self, Pi: TraceAssignment, variables: Sequence[str]):
        self.vars = list(variables)
        self.index = {v: k for k, v in enumerate(self.vars)}
        self.traces = [Pi[v].trace for v in self.vars]
        self.start = tuple(t.normalize_position(Pi[v].position)
                           for v, t in zip(self.vars, self.traces))

    def holds(self, prop: str, var: str, state: tuple) -> bool:
        k = self.index.get(var)
        if k is None:
            raise UnboundVariable(var)
        return prop in self.traces[k].letter_at(state[k])


def _until_orbit(state, step, left, right) -> bool:
    seen = set()
    while state not in seen:
        if right(state):
            return True
        if not left(state):
            return False
        seen.add(state)
        state = step(state)
    return False


# HyperLTL_S ---------------------------------------------------------------------------

def eval_qf_hyperltl_s(Pi: TraceAssignment, psi: Formula) -> bool:
    _reject_plain_props(psi)
    core = desugar(psi)
    fr = _Frame(Pi, _bound(Pi, core))
    memo: dict = {}
    succ_cache: dict = {}

    def succ(gamma: tuple, state: tuple) -> tuple:
        key = (gamma, state)
        r = succ_cache.get(key)
        if r is None:
            out = []
            for t, i in zip(fr.traces, state):
                info = _gamma_info(t, gamma)
                out.append(t.normalize_position(info.successor(i)))
            r = tuple(out)
            succ_cache[key] = r
        return r

    def ev(f: Formula, state: tuple) -> bool:
        key = (f, state)
        r = memo.get(key)
        if r is not None:
            return r
        if isinstance(f, TrueF):
            r = True
        elif isinstance(f, RelProp):
            r = fr.holds(f.prop, f.var, state)
        elif isinstance(f, Not):
            r = not ev(f.sub, state)
        elif isinstance(f, And):
            r = ev(f.left, state) and ev(f.right, state)
        elif isinstance(f, (Next, NextRel)):
            g = f.gamma if isinstance(f, NextRel) else ()
            r = ev(f.sub, succ(g, state))
        elif isinstance(f, (Until, UntilRel)):
            g = f.gamma if isinstance(f, UntilRel) else ()
            r = _until_orbit(state, lambda s: succ(g, s),
                             lambda s: ev(f.left, s), lambda s: ev(f.right, s))
        else:
            raise EvalError(f"{type(f).__name__} is not HyperLTL_S")
        memo[key] = r
        return r

    _ensure_recursion(20000)
    return ev(core, fr.start)


# HyperLTL_C ---------------------------------------------------------------------------

def _is_finite_encoding(t: LassoTrace) -> bool:
    return (t.period == (frozenset({SHARP}),)
            and all(SHARP not in a for a in t.prefix))


def context_step(state: tuple, traces: Sequence[LassoTrace], context: Iterable[int],
                 i: int = 1) -> tuple:
    """Advance the positions listed in ``context`` by ``i`` and renormalize.

    In the finite-trace encoding renormalization is saturation at |w|.
    """
    ctx = set(context)
    if not ctx:
        raise EmptyContext("context must be nonempty")
    return tuple(t.normalize_position(p + i) if k in ctx else p
                 for k, (t, p) in enumerate(zip(traces, state)))


_C_STATIC: dict = {}


def _c_static(psi: Formula):
    """Per-formula checks and facts, cached since sentences re-evaluate one body many times."""
    hit = _C_STATIC.get(psi)
    if hit is None:
        _reject_plain_props(psi)
        core = desugar(psi)
        subs = list(subformulas(core))
        has_past = any(isinstance(g, (Prev, Since)) for g in subs)
        ctx_vars = sorted({v for g in subs if isinstance(g, Context) for v in g.vars})
        if len(_C_STATIC) > 10000:
            _C_STATIC.clear()
        hit = _C_STATIC[psi] = (core, has_past, ctx_vars)
    return hit


def eval_qf_hyperltl_c(Pi: TraceAssignment, psi: Formula, mode: str = "lasso",
                       context: Iterable[str] | None = None) -> bool:
    """Evaluate with initial context ``context`` (default: every bound variable).

    ``mode`` is ``"lasso"`` (future operators only) or ``"finite"``; in finite
    mode each trace must be a finite-trace encoding w.{#}^omega and positions
    beyond |w| are identified with |w|.
    """
    core, has_past, ctx_vars = _c_static(psi)
    if mode not in ("lasso", "finite"):
        raise EvalError(f"unknown mode {mode!r}")
    if has_past and mode != "finite":
        raise PastInLassoMode("Y and S are only supported on finite-trace encodings")
    variables = sorted(Pi.domain)
    fr = _Frame(Pi, variables)
    if mode == "finite":
        for v, t in zip(fr.vars, fr.traces):
            if not _is_finite_encoding(t):
                raise EvalError(f"trace of {v} is not a finite-trace encoding")
    ctx0 = frozenset(fr.index[v] for v in (context if context is not None else variables))
    for v in ctx_vars:
        if v not in fr.index:
            raise UnboundVariable(v)
    memo: dict = {}
    traces = fr.traces

    def step(state, ctx):
        return tuple(traces[k].normalize_position(p + 1) if k in ctx else p
                     for k, p in enumerate(state))

    def back(state, ctx):
        if any(state[k] == 0 for k in ctx):
            return None
        return tuple(p - 1 if k in ctx else p for k, p in enumerate(state))

    def ev(f: Formula, state: tuple, ctx: frozenset) -> bool:
        key = (f, state, ctx)
        r = memo.get(key)
        if r is not None:
            return r
        if isinstance(f, TrueF):
            r = True
        elif isinstance(f, RelProp):
            r = fr.holds(f.prop, f.var, state)
        elif isinstance(f, Not):
            r = not ev(f.sub, state, ctx)
        elif isinstance(f, And):
            r = ev(f.left, state, ctx) and ev(f.right, state, ctx)
        elif isinstance(f, Next):
            r = ev(f.sub, step(state, ctx), ctx)
        elif isinstance(f, Until):
            r = _until_orbit(state, lambda s: step(s, ctx),
                             lambda s: ev(f.left, s, ctx), lambda s: ev(f.right, s, ctx))
        elif isinstance(f, Context):
            r = ev(f.sub, state, frozenset(fr.index[v] for v in f.vars))
        elif isinstance(f, Prev):
            b = back(state, ctx)
            r = b is not None and ev(f.sub, b, ctx)
        elif isinstance(f, Since):
            r = False
            cur = state
            while cur is not None:
                if ev(f.right, cur, ctx):
                    r = True
                    break
                if not ev(f.left, cur, ctx):
                    break
                cur = back(cur, ctx)
        else:
            raise EvalError(f"{type(f).__name__} is not HyperLTL_C")
        memo[key] = r
        return r

    _ensure_recursion(20000)
    return ev(core, fr.start, ctx0)


# sentences ------------------------------------------------------------------------------

def eval_qf(Pi: TraceAssignment, body: Formula, logic: str, **options) -> bool:
    """Dispatch to the quantifier-free evaluator for ``logic``."""
    if logic == "hyperltl":
        return eval_qf_hyperltl(Pi, body)
    if logic == "hyperltl_s":
        return eval_qf_hyperltl_s(Pi, body)
    if logic == "hyperltl_c":
        return eval_qf_hyperltl_c(Pi, body, mode=options.get("mode", "lasso"))
    if logic == "ahyperltl":
        from .automata import eval_ahyper, eval_ahyper_oracle
        if options.get("backend", "nawa") == "oracle":
            if body.mode != "E":
                raise EvalError("the stuttering oracle only handles E bodies")
            return eval_ahyper_oracle(Pi, body, options.get("block_bound", 3))
        return eval_ahyper(Pi, body)
    raise EvalError(f"no evaluator for {logic!r}")


def eval_sentence(traces: Iterable[LassoTrace], sentence: HyperSentence,
                  logic: str | None = None, **options) -> bool:
    """Decide ``traces |= sentence`` with every trace starting at position 0."""
    L = list(dict.fromkeys(traces))
    if not L:
        raise EvalError("the trace set must be nonempty")
    inferred = infer_logic(sentence)
    logic = logic or inferred
    if (inferred == "ahyperltl") != (logic == "ahyperltl"):
        raise EvalError(f"sentence of kind {inferred} cannot use the {logic} backend")
    if logic == "hyperltl" and inferred != "hyperltl":
        raise EvalError(f"sentence of kind {inferred} cannot use the hyperltl backend")
    prefix = sentence.prefix
    body = sentence.body

    def go(k: int, Pi: TraceAssignment) -> bool:
        if k == len(prefix):
            return eval_qf(Pi, body, logic, **options)
        q, v = prefix[k]
        results = (go(k + 1, Pi.bind(v, t, 0)) for t in L)
        return any(results) if q == "exists" else all(results)

    return go(0, TraceAssignment({}))

"""Nondeterministic asynchronous word automata for E-trajectory formulas.

The automaton for ``E theta`` over tapes x_1..x_n follows the atom (tableau)
construction: states are ``(A, d)`` (mid-phase) and ``(A, d, beg)`` (phase
start) for atoms ``A`` of the closure of ``theta``.  A phase moves a nonempty
set of tapes in increasing order; the last move enters the beg-state of a
successor atom.  Acceptance is generalized Büchi: one component per until
subformula and one per direction.

Atoms are bitmasks over the non-negated closure members ("bases").  The
product with lasso inputs is built on the fly, and successor atoms are
generated by backtracking over closure bits so that atoms which can never
move (inconsistent with the letters they will read, or without any successor
atom) are not materialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Iterable, Iterator, Sequence

from .syntax import (
    And, Formula, HyperSentence, Next, Not, RelProp, Trajectory, TrueF, Until, desugar,
    free_vars, props, subformulas, to_text,
)
from .traces import LassoTrace, TraceAssignment, UnboundVariable


class AutomatonError(ValueError):
    pass


# closure and atoms ------------------------------------------------------------------

class Closure:
    """Bases of cl(theta) in children-first order plus literal lookups."""

    def __init__(self, theta: Formula, variables: Sequence[str]):
        self.theta = desugar(theta)
        self.vars = list(variables)
        unknown = free_vars(self.theta) - set(self.vars)
        if unknown:
            raise AutomatonError(f"variables {sorted(unknown)} are not tapes")
        bases: list = []
        seen: dict = {}

        def add(b):
            if b not in seen:
                seen[b] = len(bases)
                bases.append(b)

        for p in sorted(props(self.theta)):
            for v in self.vars:
                add(RelProp(p, v))
        for g in subformulas(self.theta):
            add(_base(g))
        self.bases = bases
        self.index = seen
        self.tape = {v: k for k, v in enumerate(self.vars)}
        self.untils = [k for k, b in enumerate(bases) if isinstance(b, Until)]
        self.nexts = [k for k, b in enumerate(bases) if isinstance(b, Next)]
        self.free = [k for k, b in enumerate(bases) if isinstance(b, (RelProp, Next, Until))]

    def lit(self, f: Formula) -> tuple:
        """(base index, polarity) of a closure member."""
        pos = True
        while isinstance(f, Not):
            f = f.sub
            pos = not pos
        return self.index[f], pos

    def holds(self, f: Formula, mask: int) -> bool:
        k, pos = self.lit(f)
        return bool(mask >> k & 1) == pos

    def members(self, mask: int) -> list:
        out = []
        for k, b in enumerate(self.bases):
            out.append(b if mask >> k & 1 else Not(b))
        return out

    def __len__(self) -> int:
        return 2 * len(self.bases)


def _base(f: Formula) -> Formula:
    while isinstance(f, Not):
        f = f.sub
    return f


class _AtomGen:
    """Backtracking generator of atoms under letter and successor constraints."""

    def __init__(self, cl: Closure):
        self.cl = cl
        n = len(cl.bases)
        self.kind = []
        self.args = []
        # constraints checkable once base j is assigned: (next index, polarity)
        self.watch = [[] for _ in range(n)]
        for k, b in enumerate(cl.bases):
            if isinstance(b, TrueF):
                self.kind.append("T")
                self.args.append(None)
            elif isinstance(b, RelProp):
                self.kind.append("P")
                self.args.append((cl.tape[b.var], b.prop))
            elif isinstance(b, And):
                self.kind.append("A")
                self.args.append((cl.lit(b.left), cl.lit(b.right)))
            elif isinstance(b, Next):
                self.kind.append("X")
                self.args.append(None)
                j, pol = cl.lit(b.sub)
                self.watch[j].append((k, pol))
            elif isinstance(b, Until):
                self.kind.append("U")
                self.args.append((cl.lit(b.left), cl.lit(b.right)))
            else:
                raise AutomatonError(f"unexpected closure member {to_text(b)}")
        self.n = n

    def atoms(self, letters: tuple | None, prev: int | None,
              require: tuple | None = None, local: bool = True) -> Iterator[int]:
        """Atoms consistent with ``letters`` (if given), successors of ``prev``
        (if given), containing literal ``require`` (if given) and, when
        ``local``, locally until-consistent."""
        kind, args, watch, n = self.kind, self.args, self.watch, self.n

        def bit(mask, lit):
            j, pol = lit
            return bool(mask >> j & 1) == pol

        def ok_watch(k, mask):
            if prev is None:
                return True
            v = bool(mask >> k & 1)
            for x, pol in watch[k]:
                if (v == pol) != bool(prev >> x & 1):
                    return False
            return True

        def rec(k, mask):
            if k == n:
                if require is None or bit(mask, require):
                    yield mask
                return
            kd = kind[k]
            if kd == "T":
                opts = (1,)
            elif kd == "P":
                if letters is None:
                    opts = (0, 1)
                else:
                    tape, p = args[k]
                    opts = (1,) if p in letters[tape] else (0,)
            elif kd == "A":
                l, r = args[k]
                opts = (1,) if bit(mask, l) and bit(mask, r) else (0,)
            elif kd == "X":
                opts = (0, 1)
            else:
                l, r = args[k]
                a, b = bit(mask, l), bit(mask, r)
                if local:
                    opts = (1,) if b else ((0,) if not a else (0, 1))
                else:
                    opts = (0, 1)
                if prev is not None:
                    pa, pb = bit(prev, l), bit(prev, r)
                    if not pb and pa:
                        want = prev >> k & 1
                        opts = tuple(o for o in opts if o == want)
            for o in opts:
                m = mask | (o << k)
                if ok_watch(k, m):
                    yield from rec(k + 1, m)

        yield from rec(0, 0)

    def has_successor_shape(self, mask: int) -> bool:
        """Local until-consistency (a necessary condition for any successor)."""
        cl = self.cl
        for k in cl.untils:
            (l, r) = self.args[k]
            a = bool(mask >> l[0] & 1) == l[1]
            b = bool(mask >> r[0] & 1) == r[1]
            u = bool(mask >> k & 1)
            if b and not u:
                return False
            if not a and not b and u:
                return False
        return True

    def is_successor(self, A: int, B: int) -> bool:
        for x in self.cl.nexts:
            j, pol = self.cl.lit(self.cl.bases[x].sub)
            if (bool(B >> j & 1) == pol) != bool(A >> x & 1):
                return False
        for k in self.cl.untils:
            (l, r) = self.args[k]
            a = bool(A >> l[0] & 1) == l[1]
            b = bool(A >> r[0] & 1) == r[1]
            if bool(A >> k & 1) != (b or (a and bool(B >> k & 1))):
                return False
        return True

    def consistent(self, mask: int, letters: tuple) -> bool:
        for k in range(self.n):
            if self.kind[k] == "P":
                tape, p = self.args[k]
                if bool(mask >> k & 1) != (p in letters[tape]):
                    return False
        return True


# automata ------------------------------------------------------------------------------

@dataclass
class Nawa:
    """An n-tape NAWA given by functions (states may be enumerated lazily).

    ``initial(letters)`` yields initial states that can read ``letters``;
    ``step(state, letters, after)`` yields ``(state', d)`` pairs, where
    ``after(d)`` gives the letter tuple once tape ``d`` has moved (used only to
    skip targets that cannot move).  ``acceptance`` is one of
    ``("gbuchi", [pred, ...])``, ``("buchi", pred)`` or ``("parity", colour)``.
    """

    tapes: int
    initial: Callable
    step: Callable
    acceptance: tuple
    describe: Callable = field(default=lambda s: repr(s))
    all_states: Callable | None = None
    explicit_edges: Callable | None = None

    @property
    def kind(self) -> str:
        return self.acceptance[0]


def build_nawa_E(theta: Formula, variables: Sequence[str]) -> Nawa:
    """The generalized Büchi NAWA for ``E theta`` with tapes ``variables``."""
    if isinstance(theta, Trajectory):
        if theta.mode != "E":
            raise AutomatonError("build_nawa_E needs an E body")
        theta = theta.body
    cl = Closure(theta, variables)
    missing = set(cl.vars) - free_vars(cl.theta)
    gen = _AtomGen(cl)
    n = len(cl.vars)
    root = cl.lit(cl.theta)

    # states: (mask, d, beg) with d in 1..n
    def initial(letters):
        for A in gen.atoms(letters, None, require=root):
            yield (A, 1, True)

    def step(state, letters, after):
        A, i, beg = state
        lo = 1 if beg else i + 1
        for d in range(lo, n + 1):
            if d < n:
                yield (A, d, False), d
            nxt = after(d) if after is not None else None
            for B in gen.atoms(nxt, A):
                yield (B, d, True), d

    acc = []
    for k in cl.untils:
        l, r = gen.args[k]
        acc.append(_until_pred(k, r))
    for d in range(1, n + 1):
        acc.append(_dir_pred(d))

    def describe(state):
        A, d, beg = state
        body = "{" + ", ".join(to_text(f) for f in cl.members(A)) + "}"
        return f"({body}, {d}{', beg' if beg else ''})"

    def all_states():
        atoms = list(gen.atoms(None, None, local=False))
        return [(A, d, b) for A in atoms for d in range(1, n + 1) for b in (True, False)]

    def explicit_edges():
        atoms = list(gen.atoms(None, None, local=False))
        for A in atoms:
            for i in range(1, n + 1):
                for beg in (True, False):
                    lo = 1 if beg else i + 1
                    for d in range(lo, n + 1):
                        yield (A, i, beg), (A, d, False), d
                        for B in atoms:
                            if gen.is_successor(A, B):
                                yield (A, i, beg), (B, d, True), d

    def beg_guard(state, letters):
        return not state[2] or gen.consistent(state[0], letters)

    a = Nawa(n, initial, step, ("gbuchi", acc), describe, all_states, explicit_edges)
    a.closure = cl
    a.generator = gen
    a.unused_tapes = missing
    a.guard = beg_guard
    return a


def _until_pred(k, r):
    j, pol = r
    return lambda s: (bool(s[0] >> j & 1) == pol) or not (s[0] >> k & 1)


def _dir_pred(d):
    return lambda s: s[1] == d


def degeneralize(a: Nawa) -> Nawa:
    """Counter construction: generalized Büchi with k sets to plain Büchi."""
    if a.kind != "gbuchi":
        raise AutomatonError("degeneralize needs generalized Büchi acceptance")
    family = a.acceptance[1] or [lambda s: True]
    k = len(family)

    def initial(letters):
        for q in a.initial(letters):
            yield (q, 0)

    def step(state, letters, after):
        q, c = state
        c2 = (c + 1) % k if family[c](q) else c
        for q2, d in a.step(q, letters, after):
            yield (q2, c2), d

    out = Nawa(a.tapes, initial, step, ("buchi", lambda s: s[1] == 0 and family[0](s[0])),
               lambda s: f"{a.describe(s[0])}#{s[1]}")
    _inherit(out, a, lambda s: s[0])
    return out


def buchi_to_parity(a: Nawa) -> Nawa:
    """Accepting states get colour 0, the others colour 1."""
    if a.kind != "buchi":
        raise AutomatonError("buchi_to_parity needs Büchi acceptance")
    acc = a.acceptance[1]
    out = Nawa(a.tapes, a.initial, a.step, ("parity", lambda s: 0 if acc(s) else 1),
               a.describe)
    _inherit(out, a, lambda s: s)
    return out


def _inherit(out: Nawa, a: Nawa, project) -> None:
    g = getattr(a, "guard", None)
    if g is not None:
        out.guard = lambda s, letters: g(project(s), letters)


# obligation-cube tableau --------------------------------------------------------------

class _Nnf:
    """Negation normal form of a core formula, hash-consed to integer ids.

    Node shapes: ("T",), ("F",), ("lit", tape, prop, positive), ("and", a, b),
    ("or", a, b), ("X", a), ("U", a, b), ("R", a, b).
    """

    def __init__(self, tape: dict):
        self.tape = tape
        self.nodes: list = []
        self.ids: dict = {}

    def mk(self, *node) -> int:
        k = self.ids.get(node)
        if k is None:
            k = self.ids[node] = len(self.nodes)
            self.nodes.append(node)
        return k

    def build(self, f: Formula, positive: bool = True) -> int:
        if isinstance(f, TrueF):
            return self.mk("T") if positive else self.mk("F")
        if isinstance(f, RelProp):
            return self.mk("lit", self.tape[f.var], f.prop, positive)
        if isinstance(f, Not):
            return self.build(f.sub, not positive)
        if isinstance(f, And):
            op = "and" if positive else "or"
            return self.mk(op, self.build(f.left, positive), self.build(f.right, positive))
        if isinstance(f, Next):
            return self.mk("X", self.build(f.sub, positive))
        if isinstance(f, Until):
            if positive:
                return self.mk("U", self.build(f.left), self.build(f.right))
            return self.mk("R", self.build(f.left, False), self.build(f.right, False))
        raise AutomatonError(f"unexpected subformula {to_text(f)}")

    def text(self, k: int) -> str:
        nd = self.nodes[k]
        tag = nd[0]
        if tag in ("T", "F"):
            return "true" if tag == "T" else "false"
        if tag == "lit":
            return ("" if nd[3] else "!") + f"{nd[2]}[{nd[1] + 1}]"
        if tag == "X":
            return f"X {self.text(nd[1])}"
        sym = {"and": "&", "or": "|", "U": "U", "R": "R"}[tag]
        return f"({self.text(nd[1])} {sym} {self.text(nd[2])})"


class _Expander:
    """Tableau expansion of an obligation set into (next obligations, pending untils).

    Obligation sets are interned to integers.  Among the cubes produced by one
    expansion only the minimal ones (fewer next obligations and fewer pending
    untils) are kept: a cube with more obligations accepts a subset of the
    continuations of a smaller one.
    """

    def __init__(self, nnf: _Nnf):
        self.nnf = nnf
        self.memo: dict = {}
        self.sets: list = []
        self.set_ids: dict = {}

    def intern(self, fs: frozenset) -> int:
        k = self.set_ids.get(fs)
        if k is None:
            k = self.set_ids[fs] = len(self.sets)
            self.sets.append(fs)
        return k

    def expand(self, todo: int, letters: tuple) -> list:
        key = (todo, letters)
        r = self.memo.get(key)
        if r is None:
            out = set()
            self._run(list(self.sets[todo]), set(), set(), set(), letters, out)
            cubes = sorted(out, key=lambda c: (len(c[0]) + len(c[1]), sorted(c[0]), sorted(c[1])))
            kept = []
            for nx, pend in cubes:
                if not any(n2 <= nx and p2 <= pend for n2, p2 in kept):
                    kept.append((nx, pend))
            r = self.memo[key] = [(self.intern(nx), self.intern(pend)) for nx, pend in kept]
        return r

    def _run(self, stack, done, nexts, pending, letters, out):
        nodes = self.nnf.nodes
        while stack:
            k = stack.pop()
            if k in done:
                continue
            done.add(k)
            nd = nodes[k]
            tag = nd[0]
            if tag == "T":
                continue
            if tag == "F":
                return
            if tag == "lit":
                if (nd[2] in letters[nd[1]]) != nd[3]:
                    return
                continue
            if tag == "and":
                stack.append(nd[1])
                stack.append(nd[2])
                continue
            if tag == "X":
                nexts.add(nd[1])
                continue
            if tag == "or":
                alts = [([nd[1]], (), ()), ([nd[2]], (), ())]
            elif tag == "U":
                alts = [([nd[2]], (), ()), ([nd[1]], (k,), (k,))]
            else:  # R
                alts = [([nd[1], nd[2]], (), ()), ([nd[2]], (k,), ())]
            for push, nx, pend in alts:
                self._run(stack + push, set(done), nexts | set(nx), pending | set(pend),
                          letters, out)
            return
        out.add((frozenset(nexts), frozenset(pending)))


def build_nawa_E_tableau(theta: Formula, variables: Sequence[str]) -> Nawa:
    """Phase automaton for ``E theta`` whose atoms are tableau obligation cubes.

    It has the same phase structure and fairness components as
    :func:`build_nawa_E`, but a beg-state stores only what the future must
    satisfy (next obligations) plus the untils still pending, so formulas that
    are not needed are never guessed.
    """
    if isinstance(theta, Trajectory):
        if theta.mode != "E":
            raise AutomatonError("build_nawa_E_tableau needs an E body")
        theta = theta.body
    core = desugar(theta)
    vs = list(variables)
    unknown = free_vars(core) - set(vs)
    if unknown:
        raise AutomatonError(f"variables {sorted(unknown)} are not tapes")
    nnf = _Nnf({v: k for k, v in enumerate(vs)})
    root = nnf.build(core)
    untils = [k for k, nd in enumerate(nnf.nodes) if nd[0] == "U"]
    ex = _Expander(nnf)
    n = len(vs)

    root_set = ex.intern(frozenset({root}))

    def initial(letters):
        for nx, pend in ex.expand(root_set, letters):
            yield (nx, pend, 1, True)

    def step(state, letters, after):
        nx, pend, i, beg = state
        lo = 1 if beg else i + 1
        for d in range(lo, n + 1):
            if d < n:
                yield (nx, pend, d, False), d
            for nx2, pend2 in ex.expand(nx, after(d)):
                yield (nx2, pend2, d, True), d

    acc = [(lambda s, k=k: k not in ex.sets[s[1]]) for k in untils]
    acc += [(lambda s, d=d: s[2] == d) for d in range(1, n + 1)]

    def describe(state):
        nx, pend, d, beg = state
        obl = ", ".join(sorted(nnf.text(k) for k in ex.sets[nx]))
        return f"({{{obl}}}, {d}{', beg' if beg else ''})"

    a = Nawa(n, initial, step, ("gbuchi", acc), describe)
    a.nnf = nnf
    return a


# product with lassos --------------------------------------------------------------------

@dataclass
class LassoProductGraph:
    nodes: list
    succ: dict
    initial: list
    automaton: Nawa
    inputs: tuple

    def __len__(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return sum(len(v) for v in self.succ.values())


def _letters(inputs, pos):
    return tuple(t.letter_at(p) for t, p in zip(inputs, pos))


def product_with_lassos(a: Nawa, inputs: Sequence[LassoTrace]) -> LassoProductGraph:
    """Reachable part of the product of ``a`` with the input lassos.

    Nodes are ``(state, positions)``; a transition in direction d reads the
    current letter tuple and advances (and normalizes) position d.
    """
    inputs = tuple(inputs)
    if len(inputs) != a.tapes:
        raise AutomatonError(f"automaton has {a.tapes} tapes, got {len(inputs)} inputs")
    guard = getattr(a, "guard", None)
    pos0 = tuple(0 for _ in inputs)
    init = [(q, pos0) for q in a.initial(_letters(inputs, pos0))]
    succ: dict = {}
    order = []
    stack = list(init)
    for v in init:
        succ.setdefault(v, None)
    while stack:
        node = stack.pop()
        if succ.get(node) is not None:
            continue
        q, pos = node
        order.append(node)
        letters = _letters(inputs, pos)
        out = []
        if guard is None or guard(q, letters):
            moved = {}

            def after(d, pos=pos):
                p = moved.get(d)
                if p is None:
                    p = list(pos)
                    p[d - 1] = inputs[d - 1].next_position(p[d - 1])
                    p = moved[d] = tuple(p)
                return _letters(inputs, p)

            for q2, d in a.step(q, letters, after):
                after(d)
                tgt = (q2, moved[d])
                out.append(tgt)
                if tgt not in succ:
                    succ[tgt] = None
                    stack.append(tgt)
        succ[node] = out
    return LassoProductGraph(order, succ, init, a, inputs)


# emptiness -------------------------------------------------------------------------------

def _tarjan(roots: Iterable, succ: Callable, on_scc: Callable) -> bool:
    """Iterative Tarjan; ``on_scc(component, is_nontrivial)`` may return True
    to stop early, in which case True is returned."""
    index: dict = {}
    low: dict = {}
    on: set = set()
    st: list = []
    counter = 0
    for root in roots:
        if root in index:
            continue
        kids = succ(root)
        work = [(root, iter(kids), kids)]
        index[root] = low[root] = counter
        counter += 1
        st.append(root)
        on.add(root)
        while work:
            v, it, vk = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    st.append(w)
                    on.add(w)
                    wk = succ(w)
                    work.append((w, iter(wk), wk))
                    advanced = True
                    break
                if w in on and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = st.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if on_scc(comp, len(comp) > 1 or v in vk):
                    return True
    return False


def _sccs(nodes: Iterable, succ: dict, keep: Callable | None = None) -> list:
    """Nontrivial SCCs of an explicit graph, optionally restricted by ``keep``."""
    out = []

    def nb(v):
        ws = succ.get(v) or ()
        return [w for w in ws if keep(w)] if keep is not None else ws

    def collect(comp, nontrivial):
        if nontrivial:
            out.append(comp)
        return False

    roots = [v for v in nodes if keep is None or keep(v)]
    _tarjan(roots, nb, collect)
    return out


def lazy_nonempty(a: Nawa, inputs: Sequence[LassoTrace]) -> bool:
    """Generalized Büchi emptiness of the lasso product, built on the fly and
    stopped at the first accepting component."""
    inputs = tuple(inputs)
    if len(inputs) != a.tapes:
        raise AutomatonError(f"automaton has {a.tapes} tapes, got {len(inputs)} inputs")
    if a.kind != "gbuchi":
        return gbuchi_nonempty(product_with_lassos(a, inputs))
    family = a.acceptance[1]
    guard = getattr(a, "guard", None)
    pos0 = tuple(0 for _ in inputs)
    roots = [(q, pos0) for q in a.initial(_letters(inputs, pos0))]
    letter_cache: dict = {}

    def letters_at(pos):
        r = letter_cache.get(pos)
        if r is None:
            r = letter_cache[pos] = _letters(inputs, pos)
        return r

    def succ(node):
        q, pos = node
        letters = letters_at(pos)
        if guard is not None and not guard(q, letters):
            return ()
        moved = {}

        def after(d):
            p = moved.get(d)
            if p is None:
                p = list(pos)
                p[d - 1] = inputs[d - 1].next_position(p[d - 1])
                p = moved[d] = tuple(p)
            return letters_at(p)

        out = []
        for q2, d in a.step(q, letters, after):
            after(d)
            out.append((q2, moved[d]))
        return out

    def check(comp, nontrivial):
        return nontrivial and all(any(F(q) for q, _ in comp) for F in family)

    return _tarjan(roots, succ, check)


def accepting_component(g: LassoProductGraph, family=None):
    """A reachable nontrivial SCC meeting every acceptance set, or None."""
    a = g.automaton
    kind = a.acceptance[0]
    if kind == "parity":
        colour = a.acceptance[1]
        cols = sorted({colour(q) for q, _ in g.nodes})
        for c in cols:
            if c % 2:
                continue
            for comp in _sccs(g.nodes, g.succ, keep=lambda v, c=c: colour(v[0]) >= c):
                if any(colour(q) == c for q, _ in comp):
                    return comp, [lambda s, c=c: colour(s) == c]
        return None
    if family is None:
        family = a.acceptance[1] if kind == "gbuchi" else [a.acceptance[1]]
    for comp in _sccs(g.nodes, g.succ):
        if all(any(F(q) for q, _ in comp) for F in family):
            return comp, family
    return None


def gbuchi_nonempty(g: LassoProductGraph, family=None) -> bool:
    return accepting_component(g, family) is not None


def nawa_accepts(a: Nawa, inputs: Sequence[LassoTrace]) -> bool:
    """Does ``a`` accept the tuple of lassos (any acceptance kind)?"""
    return gbuchi_nonempty(product_with_lassos(a, inputs))


def _bfs_path(succ, sources, target_pred, allowed=None):
    from collections import deque
    prev = {s: None for s in sources}
    dq = deque(sources)
    while dq:
        v = dq.popleft()
        if target_pred(v) and (len(sources) > 1 or v not in sources or prev[v] is not None):
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for w in succ.get(v) or ():
            if allowed is not None and w not in allowed:
                continue
            if w not in prev:
                prev[w] = v
                dq.append(w)
    return None


def witness(g: LassoProductGraph, family=None):
    """An accepting product lasso ``(stem, cycle)`` of nodes, or None."""
    found = accepting_component(g, family)
    if found is None:
        return None
    comp, fam = found
    inside = set(comp)
    stem = _bfs_path(g.succ, list(g.initial), lambda v: v in inside)
    start = stem[-1]
    cycle = [start]
    for F in fam:
        seg = _bfs_path(g.succ, [cycle[-1]], lambda v, F=F: F(v[0]), inside)
        cycle.extend(seg[1:])
    back = _bfs_path(g.succ, [cycle[-1]], lambda v: v == start, inside)
    if back is None or len(back) == 1:
        # cycle[-1] == start with no step taken; loop through any successor
        nxt = next(w for w in g.succ[start] if w in inside)
        back = [start] + _bfs_path(g.succ, [nxt], lambda v: v == start, inside)
    cycle.extend(back[1:])
    return stem[:-1], cycle[:-1]


# evaluation --------------------------------------------------------------------------------

def _inputs(Pi: TraceAssignment, variables: Sequence[str]) -> list:
    out = []
    for v in variables:
        pt = Pi[v]
        out.append(pt.trace.suffix(pt.position))
    return out


def eval_ahyper(Pi: TraceAssignment, phi: Trajectory, variables: Sequence[str] | None = None,
                construction: str = "tableau") -> bool:
    """Exact E/A semantics at assignment ``Pi`` (A via E of the negated body).

    ``construction`` picks the automaton: ``"tableau"`` (obligation cubes, the
    default) or ``"atoms"`` (full closure atoms).
    """
    if not isinstance(phi, Trajectory):
        raise AutomatonError("expected an E or A formula")
    vs = list(variables) if variables is not None else sorted(Pi.domain)
    for v in free_vars(phi.body):
        if v not in Pi:
            raise UnboundVariable(v)
    body = phi.body if phi.mode == "E" else Not(phi.body)
    builder = {"tableau": build_nawa_E_tableau, "atoms": build_nawa_E}[construction]
    a = builder(body, vs)
    res = lazy_nonempty(a, _inputs(Pi, vs))
    return res if phi.mode == "E" else not res


def expansions(trace: LassoTrace, block_bound: int) -> Iterator[tuple]:
    """Stuttering expansions with every letter repeated 1..block_bound times
    (period letters uniformly); yields ``(largest multiplicity, trace, starts)``
    where ``starts`` marks the positions that begin a new block."""
    letters = trace.prefix + trace.period
    p = len(trace.prefix)
    for mult in iproduct(range(1, block_bound + 1), repeat=len(letters)):
        pre = [a for a, m in zip(letters[:p], mult[:p]) for _ in range(m)]
        per = [a for a, m in zip(letters[p:], mult[p:]) for _ in range(m)]
        mark = [_START if k == 0 else _STAY for m in mult for k in range(m)]
        cut = len(pre)
        yield max(mult), LassoTrace(pre, per), LassoTrace(mark[:cut], mark[cut:])


_START, _STAY = frozenset({"start"}), frozenset()


def _jointly_moving(starts: Sequence[LassoTrace]) -> bool:
    """Some trace starts a block at every position >= 1, i.e. the expansions
    come from one trajectory (a trajectory never leaves every trace in place)."""
    from math import lcm
    horizon = max(len(s.prefix) for s in starts) + lcm(*(len(s.period) for s in starts))
    return all(any(s.letter_at(j) for s in starts) for j in range(1, horizon + 1))


def oracle_min_bound(Pi: TraceAssignment, phi: Trajectory, block_bound: int) -> int | None:
    """Least bound b <= block_bound at which the expansion oracle succeeds."""
    from .hyper import eval_qf_hyperltl
    if phi.mode != "E":
        raise AutomatonError("the oracle handles E bodies only")
    vs = sorted(Pi.domain)
    pools = []
    for base in _inputs(Pi, vs):
        # many multiplicity vectors give the same lasso; keep the cheapest
        least: dict = {}
        for m, t, starts in expansions(base, block_bound):
            key = (t, starts)
            if m < least.get(key, block_bound + 1):
                least[key] = m
        pools.append([(m, t, starts) for (t, starts), m in least.items()])
    buckets: dict = {}
    for combo in iproduct(*pools):
        buckets.setdefault(max(c[0] for c in combo), []).append(combo)
    for b in sorted(buckets):
        for combo in buckets[b]:
            if not _jointly_moving([c[2] for c in combo]):
                continue
            Pj = TraceAssignment.of(**{v: c[1] for v, c in zip(vs, combo)})
            if eval_qf_hyperltl(Pj, phi.body):
                return b
    return None


def eval_ahyper_oracle(Pi: TraceAssignment, phi: Trajectory, block_bound: int) -> bool:
    """Sound under-approximation of E-semantics by bounded stuttering expansions."""
    return oracle_min_bound(Pi, phi, block_bound) is not None


# reporting ----------------------------------------------------------------------------------

def nawa_stats(a: Nawa) -> dict:
    states = a.all_states() if a.all_states else []
    edges = list(a.explicit_edges()) if a.explicit_edges else []
    cl = getattr(a, "closure", None)
    return {
        "tapes": a.tapes,
        "closure": len(cl) if cl else 0,
        "atoms": len(states) // (2 * a.tapes) if states else 0,
        "states": len(states),
        "transitions": len(edges),
        "acceptance_sets": len(a.acceptance[1]) if a.kind == "gbuchi" else 1,
    }


def nawa_dot(a: Nawa) -> str:
    states = a.all_states()
    ids = {s: f"s{k}" for k, s in enumerate(states)}
    lines = ["digraph nawa {", "  rankdir=LR;"]
    for s in states:
        label = a.describe(s).replace('"', '\\"')
        shape = "box" if s[2] else "ellipse"
        lines.append(f'  {ids[s]} [label="{label}", shape={shape}];')
    for src, dst, d in a.explicit_edges():
        lines.append(f'  {ids[src]} -> {ids[dst]} [label="{d}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

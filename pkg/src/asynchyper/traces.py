"""Traces, pointed traces, assignments and Kripke structures.

Letters are frozensets of proposition names.  A :class:`LassoTrace` is the
ultimately periodic word ``prefix . period^omega``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

Letter = frozenset

SHARP = "#"
_PROP_RE = re.compile(r"^(#|[A-Za-z0-9_]+(@[A-Za-z0-9_.]+)?)$")


class TraceError(ValueError):
    """Malformed trace, structure or encoding request."""


class AlphabetClash(TraceError):
    pass


class FormatError(TraceError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def letter(*props: str) -> frozenset:
    for p in props:
        if not _PROP_RE.match(p):
            raise TraceError(f"bad proposition name {p!r}")
    return frozenset(props)


def _letter_of(x) -> frozenset:
    if isinstance(x, frozenset):
        return x
    if isinstance(x, str):
        return letter(*x.split()) if x.strip() else frozenset()
    return letter(*x)


def format_letter(a: frozenset) -> str:
    return "{" + " ".join(sorted(a)) + "}"


@dataclass(frozen=True, eq=False)
class LassoTrace:
    prefix: tuple
    period: tuple

    def __init__(self, prefix: Iterable = (), period: Iterable = ((),)):
        pre = tuple(_letter_of(a) for a in prefix)
        per = tuple(_letter_of(a) for a in period)
        if not per:
            raise TraceError("period must be nonempty")
        object.__setattr__(self, "prefix", pre)
        object.__setattr__(self, "period", per)

    @property
    def window(self) -> int:
        """Number of distinct normalized positions."""
        return len(self.prefix) + len(self.period)

    def letter_at(self, i: int) -> frozenset:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def normalize_position(self, i: int) -> int:
        p, q = len(self.prefix), len(self.period)
        if i < p + q:
            return i
        return p + (i - p) % q

    def next_position(self, i: int) -> int:
        """Normalized successor of a normalized position."""
        return self.normalize_position(i + 1)

    def unroll(self, n: int) -> tuple:
        return tuple(self.letter_at(i) for i in range(n))

    def suffix(self, i: int) -> "LassoTrace":
        p = len(self.prefix)
        if i <= p:
            return LassoTrace(self.prefix[i:], self.period)
        k = (i - p) % len(self.period)
        return LassoTrace((), self.period[k:] + self.period[:k])

    def alphabet(self) -> frozenset:
        out = set()
        for a in self.prefix + self.period:
            out |= a
        return frozenset(out)

    def semantic_key_length(self, other: "LassoTrace") -> int:
        l = math.lcm(len(self.period), len(other.period))
        return len(self.prefix) + len(other.prefix) + 2 * l

    def same_as(self, other: "LassoTrace") -> bool:
        n = self.semantic_key_length(other)
        return self.unroll(n) == other.unroll(n)

    def canonical(self) -> "LassoTrace":
        """Shortest-period, shortest-prefix representative."""
        per = self.period
        q = len(per)
        for d in range(1, q + 1):
            if q % d == 0 and per == per[:d] * (q // d):
                per = per[:d]
                break
        pre = list(self.prefix)
        while pre and pre[-1] == per[-1]:
            pre.pop()
            per = per[-1:] + per[:-1]
        return LassoTrace(pre, per)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LassoTrace):
            return NotImplemented
        return self.same_as(other)

    def __hash__(self) -> int:
        c = self.canonical()
        return hash((c.prefix, c.period))

    def __str__(self) -> str:
        return format_trace(self)

    def __repr__(self) -> str:
        return f"LassoTrace({format_trace(self)!r})"


@dataclass(frozen=True)
class FiniteTrace:
    letters: tuple

    def __init__(self, letters: Iterable):
        ls = tuple(_letter_of(a) for a in letters)
        if not ls:
            raise TraceError("finite trace must be nonempty")
        object.__setattr__(self, "letters", ls)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return " ".join(format_letter(a) for a in self.letters)


@dataclass(frozen=True)
class PointedTrace:
    trace: LassoTrace
    position: int = 0

    def __post_init__(self):
        if self.position < 0:
            raise TraceError("position must be >= 0")


class UnboundVariable(KeyError):
    pass


@dataclass(frozen=True)
class TraceAssignment:
    bindings: Mapping[str, PointedTrace] = field(default_factory=dict)

    def __getitem__(self, var: str) -> PointedTrace:
        try:
            return self.bindings[var]
        except KeyError:
            raise UnboundVariable(var) from None

    def __contains__(self, var: str) -> bool:
        return var in self.bindings

    @property
    def domain(self) -> frozenset:
        return frozenset(self.bindings)

    def bind(self, var: str, trace: LassoTrace, position: int = 0) -> "TraceAssignment":
        b = dict(self.bindings)
        b[var] = PointedTrace(trace, position)
        return TraceAssignment(b)

    @classmethod
    def of(cls, **traces) -> "TraceAssignment":
        b = {}
        for v, t in traces.items():
            b[v] = t if isinstance(t, PointedTrace) else PointedTrace(t, 0)
        return cls(b)


class KripkeStructure:
    """Finite Kripke structure with a total edge relation."""

    def __init__(self, states: Iterable, initial: Iterable, edges: Iterable,
                 valuation: Mapping):
        self.states = tuple(dict.fromkeys(states))
        sset = set(self.states)
        self.initial = tuple(dict.fromkeys(initial))
        if not self.initial:
            raise TraceError("no initial state")
        succ: dict = {s: [] for s in self.states}
        for a, b in edges:
            if a not in sset or b not in sset:
                raise TraceError(f"edge ({a}, {b}) mentions unknown state")
            if b not in succ[a]:
                succ[a].append(b)
        for s in self.initial:
            if s not in sset:
                raise TraceError(f"unknown initial state {s}")
        dead = [s for s in self.states if not succ[s]]
        if dead:
            raise TraceError(f"states without successors: {dead}")
        self.succ = {s: tuple(v) for s, v in succ.items()}
        self.valuation = {s: _letter_of(valuation.get(s, ())) for s in self.states}

    @property
    def edges(self) -> tuple:
        return tuple((a, b) for a in self.states for b in self.succ[a])

    def alphabet(self) -> frozenset:
        out = set()
        for a in self.valuation.values():
            out |= a
        return frozenset(out)

    def __repr__(self) -> str:
        return f"KripkeStructure({len(self.states)} states, {len(self.edges)} edges)"


def kripke_has_trace(K: KripkeStructure, trace: LassoTrace) -> bool:
    """Is ``trace`` the labelling of some infinite path of K from an initial state?"""
    def ok(s, i):
        return K.valuation[s] == trace.letter_at(i)

    start = [(s, 0) for s in K.initial if ok(s, 0)]
    succ = {}
    seen = set(start)
    stack = list(start)
    while stack:
        s, i = stack.pop()
        j = trace.next_position(i)
        nxt = [(t, j) for t in K.succ[s] if ok(t, j)]
        succ[(s, i)] = nxt
        for v in nxt:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    # an infinite path exists iff some reachable node is not eventually stuck:
    # repeatedly drop nodes without live successors
    live = set(seen)
    changed = True
    while changed:
        changed = False
        for v in list(live):
            if not any(u in live for u in succ[v]):
                live.discard(v)
                changed = True
    return any(v in live for v in start)


def lasso_paths(K: KripkeStructure, max_prefix: int, max_period: int) -> set:
    """Traces of state lassos with bounded stem and cycle (an under-approximation)."""
    if max_period < 1:
        raise TraceError("max_period must be >= 1")
    found: set = set()
    V = K.valuation

    def cycles_from(s):
        # closed walks s -> ... -> s of length <= max_period
        stack = [(s, (s,))]
        while stack:
            t, path = stack.pop()
            for u in K.succ[t]:
                if u == s:
                    yield path
                if len(path) < max_period:
                    stack.append((u, path + (u,)))

    stems = [(s,) for s in K.initial]
    frontier = stems
    all_stems = list(stems)
    for _ in range(max_prefix):
        frontier = [p + (u,) for p in frontier for u in K.succ[p[-1]]]
        all_stems.extend(frontier)
    cyc_cache: dict = {}
    for stem in all_stems:
        last = stem[-1]
        if last not in cyc_cache:
            cyc_cache[last] = list(cycles_from(last))
        for cyc in cyc_cache[last]:
            pre = [V[s] for s in stem[:-1]]
            found.add(LassoTrace(pre, [V[s] for s in cyc]))
    return found


# encodings -----------------------------------------------------------------

def _check_no_sharp(alpha: frozenset) -> None:
    if SHARP in alpha:
        raise AlphabetClash("'#' already occurs in the alphabet")


def enc_sharp_trace(trace: LassoTrace) -> LassoTrace:
    _check_no_sharp(trace.alphabet())
    p, q = len(trace.prefix), len(trace.period)
    if q % 2:
        q *= 2
    mark = lambda i, a: a | {SHARP} if i % 2 == 0 else a
    pre = [mark(i, trace.letter_at(i)) for i in range(p)]
    per = [mark(i, trace.letter_at(i)) for i in range(p, p + q)]
    return LassoTrace(pre, per)


def enc_sharp_kripke(K: KripkeStructure) -> KripkeStructure:
    _check_no_sharp(K.alphabet())
    states = [(s, b) for s in K.states for b in (0, 1)]
    edges = [((s, b), (t, 1 - b)) for s, t in K.edges for b in (0, 1)]
    val = {}
    for s in K.states:
        val[(s, 0)] = K.valuation[s]
        val[(s, 1)] = K.valuation[s] | {SHARP}
    return KripkeStructure(states, [(s, 1) for s in K.initial], edges, val)


def enc_finite(w: FiniteTrace) -> LassoTrace:
    for a in w.letters:
        _check_no_sharp(a)
    return LassoTrace(w.letters, [frozenset({SHARP})])


def decode_finite(trace: LassoTrace) -> FiniteTrace:
    """Inverse of :func:`enc_finite`."""
    letters = []
    i = 0
    while SHARP not in trace.letter_at(i):
        letters.append(trace.letter_at(i))
        i += 1
        if i > trace.window:
            raise TraceError("not a finite-trace encoding")
    return FiniteTrace(letters)


def kcode_prop(p: str, ell: int) -> str:
    return f"{p}@{ell}"


def split_kcode_prop(name: str) -> tuple:
    p, _, ell = name.rpartition("@")
    return p, int(ell)


def kcode_encode(traces: Sequence[LassoTrace], k: int) -> LassoTrace:
    if len(traces) != k:
        raise TraceError(f"expected {k} traces, got {len(traces)}")
    for i in range(k):
        for j in range(i):
            if traces[i].same_as(traces[j]):
                raise TraceError(f"traces {j + 1} and {i + 1} coincide")
    if k == 0:
        raise TraceError("k must be >= 1")
    P = max(len(t.prefix) for t in traces)
    Q = math.lcm(*(len(t.period) for t in traces))

    def at(i):
        return frozenset(kcode_prop(p, ell + 1)
                         for ell, t in enumerate(traces) for p in t.letter_at(i))
    return LassoTrace([at(i) for i in range(P)], [at(i) for i in range(P, P + Q)])


def kcode_project(nu: LassoTrace, ell: int) -> LassoTrace:
    def proj(a):
        return frozenset(p for p, l in map(split_kcode_prop, a) if l == ell)
    return LassoTrace([proj(a) for a in nu.prefix], [proj(a) for a in nu.period])


def kcode_is_wellformed(nu: LassoTrace, k: int) -> bool:
    projs = [kcode_project(nu, ell) for ell in range(1, k + 1)]
    n = nu.window
    rows = [p.unroll(n) for p in projs]
    return len(set(rows)) == k


def is_stuttering_expansion(candidate: LassoTrace, base: LassoTrace, block_bound: int) -> bool:
    """Decide whether ``candidate`` arises from ``base`` by repeating each letter
    between 1 and ``block_bound`` times.

    Search state is (normalized base index, normalized candidate index); a
    cycle through states means the decomposition can continue forever.
    """
    if block_bound < 1:
        raise TraceError("block_bound must be >= 1")
    seen_ok: set = set()
    on_path: set = set()
    failed: set = set()

    def ok(i: int, j: int) -> bool:
        # base block i starts at candidate position j
        key = (i, j)
        if key in seen_ok or key in on_path:
            return True
        if key in failed:
            return False
        on_path.add(key)
        a = base.letter_at(i)
        res = False
        for m in range(1, block_bound + 1):
            if candidate.letter_at(j + m - 1) != a:
                break
            if ok(base.next_position(i), candidate.normalize_position(j + m)):
                res = True
                break
        on_path.discard(key)
        (seen_ok if res else failed).add(key)
        return res

    import sys
    limit = sys.getrecursionlimit()
    need = 4 * base.window * candidate.window + 100
    if need > limit:
        sys.setrecursionlimit(need)
    return ok(0, 0)


# text formats ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\{)|(\})|(\|)|([^\s{}|]+))")


def _letters_from(text: str, line: int = 1, col0: int = 0):
    """Yield ('letter', frozenset) or ('bar', None) items."""
    pos = 0
    cur = None
    items = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        start = m.start(m.lastindex)
        col = col0 + start + 1
        if m.group(1):
            if cur is not None:
                raise FormatError("nested '{'", line, col)
            cur = []
        elif m.group(2):
            if cur is None:
                raise FormatError("unmatched '}'", line, col)
            items.append(("letter", frozenset(cur)))
            cur = None
        elif m.group(3):
            if cur is not None:
                raise FormatError("'|' inside a letter", line, col)
            items.append(("bar", None))
        else:
            tok = m.group(4)
            if cur is None or not _PROP_RE.match(tok):
                raise FormatError(f"unexpected token {tok!r}", line, col)
            cur.append(tok)
        pos = m.end()
    if cur is not None:
        raise FormatError("unterminated letter", line, col0 + len(text) + 1)
    return items


def parse_trace(text: str, line: int = 1):
    """Parse ``{p} {} | {q}`` into a LassoTrace, or a FiniteTrace if no bar."""
    items = _letters_from(text, line)
    bars = [i for i, (k, _) in enumerate(items) if k == "bar"]
    letters = [a for k, a in items if k == "letter"]
    if not bars:
        if not letters:
            raise FormatError("empty trace", line, 1)
        return FiniteTrace(letters)
    if len(bars) > 1:
        raise FormatError("more than one '|'", line, 1)
    b = bars[0]
    pre = [a for _, a in items[:b]]
    per = [a for _, a in items[b + 1:]]
    if not per:
        raise FormatError("empty period", line, len(text) + 1)
    return LassoTrace(pre, per)


def format_trace(t) -> str:
    if isinstance(t, FiniteTrace):
        return str(t)
    pre = " ".join(format_letter(a) for a in t.prefix)
    per = " ".join(format_letter(a) for a in t.period)
    return f"{pre} | {per}" if pre else f"| {per}"


def parse_trace_file(text: str) -> list:
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.split("//")[0]
        if s.strip() and not s.strip().startswith("#!"):
            out.append(parse_trace(s, n))
    return out


def parse_kripke(text: str) -> KripkeStructure:
    states, initial, edges, val = [], [], [], {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//")[0]
        toks = line.split()
        if not toks:
            continue
        col = line.index(toks[0]) + 1
        if toks[0] == "state":
            if len(toks) < 2:
                raise FormatError("state needs a name", n, col)
            name = toks[1]
            rest = line[line.index(name, col + 4) + len(name):]
            is_init = False
            r = rest.lstrip()
            if r.startswith("init"):
                is_init = True
                r = r[4:]
            off = len(line) - len(r)
            items = _letters_from(r, n, off)
            if len(items) != 1 or items[0][0] != "letter":
                raise FormatError("expected exactly one letter {..}", n, off + 1)
            states.append(name)
            val[name] = items[0][1]
            if is_init:
                initial.append(name)
        elif toks[0] == "edge":
            if len(toks) != 3:
                raise FormatError("edge needs two states", n, col)
            edges.append((toks[1], toks[2]))
        else:
            raise FormatError(f"unknown keyword {toks[0]!r}", n, col)
    try:
        return KripkeStructure(states, initial, edges, val)
    except TraceError as e:
        raise FormatError(str(e), 0, 0) from None


def format_kripke(K: KripkeStructure) -> str:
    init = set(K.initial)
    lines = []
    for s in K.states:
        name = state_name(s)
        tag = " init" if s in init else ""
        lines.append(f"state {name}{tag} {format_letter(K.valuation[s])}")
    for a, b in K.edges:
        lines.append(f"edge {state_name(a)} {state_name(b)}")
    return "\n".join(lines) + "\n"


def state_name(s) -> str:
    if isinstance(s, tuple):
        return "_".join(state_name(x) for x in s)
    return str(s)


def all_letters(props: Sequence[str]):
    """Every subset of ``props`` as a letter."""
    for bits in product((0, 1), repeat=len(props)):
        yield frozenset(p for p, b in zip(props, bits) if b)

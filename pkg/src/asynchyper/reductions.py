"""Two-counter machines and the two undecidability reductions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .syntax import (
    And, Context, Eventually, Formula, Globally, HyperSentence, Iff, Implies, Next, Not, Or,
    RelProp, Trajectory, Until, FALSE, conj, disj,
)
from .traces import SHARP, KripkeStructure, LassoTrace

OPS = ("inc", "dec", "if_zero")
BEG, PAD, BOT, C1, C2 = "beg", "pad", "bot", "c1", "c2"


class MachineError(ValueError):
    pass


class MachineFormatError(MachineError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class GuardViolation(MachineError):
    pass


class AssumptionViolation(MachineError):
    pass


@dataclass(frozen=True)
class Transition:
    source: str
    op: str
    counter: int
    target: str

    def __post_init__(self):
        if self.op not in OPS:
            raise MachineError(f"unknown instruction {self.op!r}")
        if self.counter not in (1, 2):
            raise MachineError("counters are numbered 1 and 2")


@dataclass(frozen=True)
class CounterMachine:
    locations: tuple
    transitions: tuple
    init: int
    special: int

    def __post_init__(self):
        for t in self.transitions:
            if t.source not in self.locations or t.target not in self.locations:
                raise MachineError(f"transition {t} uses an undeclared location")
        for k in (self.init, self.special):
            if not 0 <= k < len(self.transitions):
                raise MachineError(f"transition index {k} out of range")

    def prop(self, k: int) -> str:
        """Proposition naming transition ``k``."""
        return f"d{k}"

    @property
    def props(self) -> tuple:
        return tuple(self.prop(k) for k in range(len(self.transitions)))


def parse_machine(text: str) -> CounterMachine:
    locs, trans, init, special = [], [], None, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//")[0].strip()
        if not line or line.startswith("%"):
            continue
        words = line.split()
        key = words[0]
        if key == "loc":
            locs.extend(words[1:])
        elif key == "trans":
            if len(words) != 5:
                raise MachineFormatError("expected: trans <src> <op> <counter> <dst>", n)
            try:
                trans.append(Transition(words[1], words[2], int(words[3]), words[4]))
            except (ValueError, MachineError) as e:
                raise MachineFormatError(str(e), n) from None
        elif key in ("init", "special"):
            if len(words) != 2 or not words[1].isdigit():
                raise MachineFormatError(f"expected: {key} <transition index>", n)
            if key == "init":
                init = int(words[1])
            else:
                special = int(words[1])
        else:
            raise MachineFormatError(f"unknown directive {key!r}", n)
    if init is None or special is None:
        raise MachineFormatError("both init and special must be given", 0)
    try:
        return CounterMachine(tuple(locs), tuple(trans), init, special)
    except MachineError as e:
        raise MachineFormatError(str(e), 0) from None


def format_machine(M: CounterMachine) -> str:
    lines = ["loc " + " ".join(M.locations)]
    lines += [f"trans {t.source} {t.op} {t.counter} {t.target}" for t in M.transitions]
    lines += [f"init {M.init}", f"special {M.special}"]
    return "\n".join(lines) + "\n"


# semantics ----------------------------------------------------------------------------

def apply_op(nu: tuple, t: Transition) -> tuple:
    """Counter valuation after executing ``t`` from ``nu``."""
    c = t.counter - 1
    v = list(nu)
    if t.op == "inc":
        v[c] += 1
    elif t.op == "dec":
        if v[c] == 0:
            raise GuardViolation(f"dec on counter {t.counter} with value 0")
        v[c] -= 1
    elif v[c] != 0:
        raise GuardViolation(f"if_zero on counter {t.counter} with value {v[c]}")
    return tuple(v)


def machine_step(config: tuple, t: Transition) -> tuple:
    """Apply ``t`` to a location configuration (q, n1, n2)."""
    q, n1, n2 = config
    if t.source != q:
        raise GuardViolation(f"transition starts at {t.source}, machine is at {q}")
    return (t.target,) + apply_op((n1, n2), t)


def config_step(M: CounterMachine, config: tuple, k: int) -> tuple:
    """Successor of a transition configuration (current transition index, valuation)
    that continues with transition ``k``."""
    cur, nu = config
    t, nxt = M.transitions[cur], M.transitions[k]
    if nxt.source != t.target:
        raise GuardViolation(f"transition {k} does not start at {t.target}")
    return (k, apply_op(nu, t))


def successors(M: CounterMachine, config: tuple) -> list:
    out = []
    for k in range(len(M.transitions)):
        try:
            out.append(config_step(M, config, k))
        except GuardViolation:
            pass
    return out


@dataclass(frozen=True)
class MachineRun:
    """A finite run, optionally closing into a loop at index ``loop``."""
    configs: tuple
    loop: int | None = None

    def max_counter(self) -> int:
        return max((max(nu) for _, nu in self.configs), default=0)


def initial_config(M: CounterMachine) -> tuple:
    return (M.init, (0, 0))


def find_halting_run(M: CounterMachine, max_length: int, counter_bound: int | None = None
                     ) -> MachineRun | None:
    """Shortest run from the initial configuration reaching the special transition."""
    start = initial_config(M)
    if start[0] == M.special:
        return MachineRun((start,))
    parent = {start: None}
    depth = {start: 1}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        if depth[c] >= max_length:
            continue
        for d in successors(M, c):
            if counter_bound is not None and max(d[1]) > counter_bound:
                continue
            if d in parent:
                continue
            parent[d] = c
            depth[d] = depth[c] + 1
            if d[0] == M.special:
                path = [d]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return MachineRun(tuple(reversed(path)))
            queue.append(d)
    return None


def find_recurrent_run(M: CounterMachine, counter_bound: int) -> MachineRun | None:
    """A lasso-shaped run whose loop contains the special transition (counters bounded)."""
    start = initial_config(M)
    graph: dict = {}
    stack = [start]
    while stack:
        c = stack.pop()
        if c in graph:
            continue
        graph[c] = [d for d in successors(M, c) if max(d[1]) <= counter_bound]
        stack.extend(graph[c])
    for target in [c for c in graph if c[0] == M.special]:
        back = _bfs(graph, graph[target], lambda c, t=target: c == t)
        head = _bfs(graph, [start], lambda c, t=target: c == t)
        if back is not None and head is not None:
            loop = head + back[:-1]
            return MachineRun(tuple(loop), loop=len(head) - 1)
    return None


def _bfs(graph, sources, goal):
    parent = {}
    queue = deque()
    for s in sources:
        if s not in parent:
            parent[s] = None
            queue.append(s)
    while queue:
        c = queue.popleft()
        if goal(c):
            out = [c]
            while parent[out[-1]] is not None:
                out.append(parent[out[-1]])
            return list(reversed(out))
        for d in graph.get(c, ()):
            if d not in parent:
                parent[d] = c
                queue.append(d)
    return None


# shared formula pieces ------------------------------------------------------------------

def _p(name: str, x: str) -> Formula:
    return RelProp(name, x)


def _successor_block(M: CounterMachine, x1: str, x2: str, beg1: Formula, beg2: Formula) -> list:
    """Per-transition update conjuncts (without the outer G / X G)."""
    out = []
    for k, t in enumerate(M.transitions):
        ell, other = t.counter, 3 - t.counter
        cl, co = f"c{ell}", f"c{other}"
        nexts = [_p(M.prop(j), x2) for j, u in enumerate(M.transitions) if u.source == t.target]
        keep = Next(Until(And(_p(co, x1), _p(co, x2)), And(Not(_p(co, x1)), Not(_p(co, x2)))))
        parts = [disj(nexts), keep]
        if t.op == "inc":
            parts.append(Next(Until(And(_p(cl, x1), _p(cl, x2)),
                                    conj([Not(_p(cl, x1)), _p(cl, x2), Not(Next(_p(cl, x2)))]))))
        elif t.op == "dec":
            parts.append(Next(Until(And(_p(cl, x1), _p(cl, x2)),
                                    conj([_p(cl, x1), Not(_p(cl, x2)), Not(Next(_p(cl, x1)))]))))
        else:
            parts.append(Next(And(Not(_p(cl, x1)), Not(_p(cl, x2)))))
        out.append(Implies(conj([beg1, beg2, _p(M.prop(k), x1)]), conj(parts)))
    return out


# A-HyperLTL reduction -------------------------------------------------------------------

def _only(x: str, keep: Sequence[str], AP: Sequence[str]) -> list:
    return [Not(_p(p, x)) for p in AP if p not in keep]


def theta_beg(M: CounterMachine, x: str, AP: Sequence[str]) -> Formula:
    return And(_p(BEG, x), disj([conj([_p(d, x)] + _only(x, (BEG, d), AP)) for d in M.props]))


def theta_c(x: str, AP: Sequence[str]) -> Formula:
    return conj([Or(_p(C1, x), _p(C2, x))] + _only(x, (C1, C2, SHARP), AP))


def theta_pad(x: str, AP: Sequence[str]) -> Formula:
    return conj([_p(PAD, x)] + _only(x, (PAD,), AP))


def ahyperltl_alphabet(M: CounterMachine) -> tuple:
    return M.props + (C1, C2, SHARP, BEG, PAD)


def ahyperltl_reduction(M: CounterMachine) -> HyperSentence:
    """phi_M = exists x1 exists x2. E psi; single-trace satisfiable iff M has a run from
    the initial configuration using the special transition infinitely often."""
    AP = ahyperltl_alphabet(M)
    x1, x2 = "x1", "x2"
    parts = []
    for x in (x1, x2):
        b, c, pd = theta_beg(M, x, AP), theta_c(x, AP), theta_pad(x, AP)
        s = _p(SHARP, x)
        rules = [
            Implies(b, Next(Or(And(c, s), pd))),
            Implies(pd, Next(Or(pd, b))),
            Implies(And(c, s), Next(Or(And(c, Not(s)), pd))),
            Implies(And(c, Not(s)), Next(Or(And(c, s), pd))),
        ] + [Implies(And(c, Not(_p(f"c{l}", x))), Not(Next(_p(f"c{l}", x)))) for l in (1, 2)]
        parts += [b, Globally(Eventually(b)), Globally(conj(rules))]
    # first segment is the initial configuration, the second its successor
    t0 = M.transitions[M.init]
    if t0.op == "inc":
        first = conj([_p(f"c{t0.counter}", x1), Not(_p(f"c{3 - t0.counter}", x1)),
                      Next(_p(PAD, x1))])
        second = Next(first)
    elif t0.op == "if_zero":
        second = Next(_p(PAD, x1))
    else:
        second = FALSE  # dec on a zero counter has no successor
    b1, b2 = theta_beg(M, x1, AP), theta_beg(M, x2, AP)
    parts.append(And(_p(M.prop(M.init), x1),
                     Next(And(_p(PAD, x1), Until(Not(b1), And(b1, second))))))
    parts.append(Globally(Eventually(_p(M.prop(M.special), x1))))
    parts.append(Next(Until(And(Not(b1), Not(b2)),
                            conj([Not(b1), b2, Next(Globally(Iff(b1, b2)))]))))
    parts += [Next(Globally(f)) for f in _successor_block(M, x1, x2, b1, b2)]
    return HyperSentence((("exists", x1), ("exists", x2)), Trajectory("E", conj(parts)))


def _segment(M: CounterMachine, k: int, nu: tuple, length: int, sharp_counters: bool,
             mark: bool = False) -> list:
    m = max(nu)
    if length < m + 2:
        raise MachineError("segment length too small for the counter values")
    head = {BEG, M.prop(k)} | ({SHARP} if mark else set())
    seg = [frozenset(head)]
    for i in range(1, m + 1):
        a = {f"c{l}" for l in (1, 2) if i <= nu[l - 1]}
        if sharp_counters and i % 2 == 1:
            a.add(SHARP)
        seg.append(frozenset(a))
    seg += [frozenset({PAD})] * (length - 1 - m)
    return seg


def ahyperltl_witness(M: CounterMachine, run: MachineRun) -> tuple:
    """(pi, pi1, pi2): a trace and two stuttering expansions of it meeting the alignment."""
    if run.loop is None:
        raise MachineError("a recurrent witness needs a looping run")
    L = run.max_counter() + 2
    segs = [_segment(M, k, nu, L, True) for k, nu in run.configs]
    head = [a for s in segs[:run.loop] for a in s]
    cycle = [a for s in segs[run.loop:] for a in s]
    if not head:
        head = list(cycle)
    pi = LassoTrace(head, cycle)
    stretched = head[:L] + [head[L - 1]] * L + head[L:]
    pi1 = LassoTrace(stretched, cycle)
    return pi, pi1, pi


# fragment-U reduction -------------------------------------------------------------------

def fragmentU_alphabet(M: CounterMachine) -> tuple:
    return M.props + (C1, C2, SHARP, BEG, PAD, BOT)


def fragmentU_formula(M: CounterMachine, literal_length_check: bool = False) -> HyperSentence:
    """exists x1 exists x2. psi0 & <x2> F <x1,x2> (#[x2] & F bot[x2] & psi_f).

    The equal-length conjunct is checked until x2 reaches the bot tail; the
    unrestricted G(beg[x2] <-> beg[x1]) fails where x1 enters the last segment
    and x2 already sits on bot. ``literal_length_check`` emits that G form.
    """
    if M.init == M.special:
        raise AssumptionViolation("the initial and the halting transition must differ")
    AP = fragmentU_alphabet(M)
    x1, x2 = "x1", "x2"
    same = conj([Globally(Iff(_p(p, x1), _p(p, x2))) for p in AP])
    eq_len = Iff(_p(BEG, x2), _p(BEG, x1))
    length = Globally(eq_len) if literal_length_check else Until(eq_len, _p(BOT, x2))
    succ = Globally(conj(_successor_block(M, x1, x2, _p(BEG, x1), _p(BEG, x2))))
    inner = conj([_p(SHARP, x2), Eventually(_p(BOT, x2)), length, succ])
    body = And(same, Context((x2,), Eventually(Context((x1, x2), inner))))
    return HyperSentence((("exists", x1), ("exists", x2)), body)


def fragmentU_kripke(M: CounterMachine) -> KripkeStructure:
    """Segment-shape structure whose bot-visiting traces are exactly the well-formed ones."""
    if M.init == M.special:
        raise AssumptionViolation("the initial and the halting transition must differ")
    ds = range(len(M.transitions))
    kinds = {"both": {C1, C2}, "only1": {C1}, "only2": {C2}, "pad": {PAD}}
    follow = {"both": ("both", "only1", "only2", "pad"), "only1": ("only1", "pad"),
              "only2": ("only2", "pad"), "pad": ("pad",)}
    val = {("init",): {BEG, M.prop(M.init)}, ("pad1",): {PAD}, ("bot",): {BOT}}
    edges = [(("init",), ("pad1",)), (("pad1",), ("pad1",)), (("bot",), ("bot",))]
    for phase in (2, 3):
        for k in ds:
            b = ("beg", phase, k)
            val[b] = {BEG, M.prop(k)} | ({SHARP} if phase == 2 else set())
            for kind in kinds:
                edges.append((b, ("seg", kind, k == M.special)))
    for k in ds:
        edges.append((("pad1",), ("beg", 2, k)))
    for kind, labels in kinds.items():
        for h in (False, True):
            s = ("seg", kind, h)
            val[s] = labels
            edges += [(s, ("seg", nk, h)) for nk in follow[kind]]
    for h in (False, True):
        pad = ("seg", "pad", h)
        edges += [(pad, ("beg", 3, k)) for k in ds]
        if h:
            edges.append((pad, ("bot",)))
    return KripkeStructure(list(val), [("init",)], edges, val)


def fragmentU_reduction(M: CounterMachine, literal_length_check: bool = False) -> tuple:
    return fragmentU_kripke(M), fragmentU_formula(M, literal_length_check)


def fragmentU_witness(M: CounterMachine, run: MachineRun) -> LassoTrace:
    """Well-formed trace s1 ... sn bot^omega for a halting run, segments of equal length."""
    if run.configs[-1][0] != M.special:
        raise MachineError("the run does not end with the halting transition")
    if len(run.configs) < 2:
        raise MachineError("a well-formed trace needs at least two segments")
    L = run.max_counter() + 2
    letters = []
    for i, (k, nu) in enumerate(run.configs):
        letters += _segment(M, k, nu, L, False, mark=(i == 1))
    return LassoTrace(letters, [frozenset({BOT})])

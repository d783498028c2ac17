"""Exact LTL evaluation on lasso traces."""

from __future__ import annotations

from .syntax import (
    And, Formula, Next, Not, Prop, RelProp, TrueF, Until, desugar, subformulas, to_text,
)
from .traces import LassoTrace


class LtlError(ValueError):
    pass


def prop_key(f: Formula) -> str:
    """Name used for ``f`` in a letter: plain props as-is, ``p[x]`` as text."""
    if isinstance(f, Prop):
        return f.name
    return f"{f.prop}[{f.var}]"


class LtlTable:
    """Truth of every subformula of ``formula`` at positions 0..window-1."""

    def __init__(self, trace: LassoTrace, formula: Formula):
        self.trace = trace
        self.formula = formula
        self._core = desugar(formula)
        self.rows: dict = {}
        for g in subformulas(self._core):
            self.rows[g] = self._row(g)

    def _row(self, g: Formula) -> tuple:
        t = self.trace
        n = t.window
        p = len(t.prefix)
        if isinstance(g, TrueF):
            return (True,) * n
        if isinstance(g, (Prop, RelProp)):
            key = prop_key(g)
            return tuple(key in t.letter_at(i) for i in range(n))
        if isinstance(g, Not):
            return tuple(not v for v in self.rows[g.sub])
        if isinstance(g, And):
            a, b = self.rows[g.left], self.rows[g.right]
            return tuple(x and y for x, y in zip(a, b))
        if isinstance(g, Next):
            a = self.rows[g.sub]
            return tuple(a[t.next_position(i)] for i in range(n))
        if isinstance(g, Until):
            a, b = self.rows[g.left], self.rows[g.right]
            out = [False] * n
            # period: two backward sweeps reach the least fixpoint
            nxt = False
            for _ in range(2):
                for i in range(n - 1, p - 1, -1):
                    nxt = b[i] or (a[i] and nxt)
                    out[i] = nxt
            nxt = out[p] if p < n else False
            for i in range(p - 1, -1, -1):
                nxt = b[i] or (a[i] and nxt)
                out[i] = nxt
            return tuple(out)
        raise LtlError(f"not an LTL formula: {to_text(g)}")

    def __getitem__(self, key) -> bool:
        g, i = key
        if g not in self.rows:
            g = desugar(g)
        return self.rows[g][self.trace.normalize_position(i)]

    def row(self, g: Formula) -> tuple:
        if g not in self.rows:
            g = desugar(g)
        return self.rows[g]

    def values(self) -> list:
        return list(self.rows[self._core])


def build_table(trace: LassoTrace, formula: Formula) -> LtlTable:
    return LtlTable(trace, formula)


def eval_ltl(trace: LassoTrace, pos: int, formula: Formula) -> bool:
    return LtlTable(trace, formula)[formula, pos]

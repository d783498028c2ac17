"""Recursive-descent parser for the formula grammar.

Precedence, loosest first: binders (``exists x.``, ``E``, ``A``), ``<->``,
``->``, ``|``, ``&``, ``U``/``S``/``U_[..]``, unary operators, atoms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    Add, And, Context, DialectError, Eq, EqLevel, Eventually, EventuallyRel, Exists,
    Exists2, FALSE, Forall, Forall2, Formula, Globally, GloballyRel, HyperSentence, Iff,
    Implies, In, Lt, Next, NextRel, Not, Or, Prev, Prop, PropAt, RelProp, Since, TRUE,
    Trajectory, Until, UntilRel, HYPER_LOGICS, check_dialect,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_TOKENS = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<op><->|->|<|>|\[|\]|\(|\)|!|&|\||;|,|=|\+|\.)
  | (?P<name>P_\#|\#|[A-Za-z_][A-Za-z0-9_]*(?:@[A-Za-z0-9_]+(?:\.[A-Za-z0-9_]+)*)?)
""", re.VERBOSE)

KEYWORDS = {"true", "false", "X", "F", "G", "U", "Y", "S", "E", "A",
            "exists", "forall", "exists2", "forall2", "in", "X_", "U_", "F_", "G_"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'op', 'name', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str, logic: str):
        self.toks = tokenize(text)
        self.i = 0
        self.logic = logic
        self.fo = logic in ("foplus", "foe", "s1se", "s1s")
        self.hyper = logic in HYPER_LOGICS

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind != "eof" and t.text == text

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            self.fail(f"expected {text!r}", t)
        return self.take()

    def fail(self, msg: str, t: Token | None = None):
        t = t or self.peek()
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.line, t.col)

    def ident(self, allow_keywords: bool = False) -> str:
        t = self.peek()
        if t.kind != "name" or (t.text in KEYWORDS and not allow_keywords):
            self.fail("expected an identifier")
        return self.take().text

    # grammar
    def top(self):
        if self.hyper:
            prefix = []
            while self.peek().text in ("exists", "forall") and self.peek().kind == "name":
                q = self.take().text
                v = self.ident()
                self.expect(".")
                prefix.append((q, v))
            body = self.formula()
            self.end()
            if prefix:
                try:
                    return HyperSentence(tuple(prefix), body)
                except DialectError as e:
                    t = self.toks[0]
                    raise ParseError(str(e), t.line, t.col) from None
            return body
        f = self.formula()
        self.end()
        return f

    def end(self):
        if self.peek().kind != "eof":
            self.fail("unexpected trailing input")

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        left = self.implies()
        while self.at("<->"):
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disj()
        if self.at("->"):
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.at("|"):
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.until()
        while self.at("&"):
            self.take()
            left = And(left, self.until())
        return left

    def until(self) -> Formula:
        left = self.unary()
        t = self.peek()
        if t.kind == "name" and t.text == "U":
            self.take()
            return Until(left, self.until())
        if t.kind == "name" and t.text == "S":
            self.take()
            return Since(left, self.until())
        if t.kind == "name" and t.text == "U_" and self.at("[", 1):
            self.take()
            gamma = self.gamma()
            return UntilRel(gamma, left, self.until())
        return left

    def gamma(self) -> tuple:
        self.expect("[")
        items = []
        if not self.at("]"):
            items.append(self.sub_ltl())
            while self.at(";"):
                self.take()
                items.append(self.sub_ltl())
        self.expect("]")
        return tuple(items)

    def sub_ltl(self) -> Formula:
        saved = (self.hyper, self.fo)
        self.hyper, self.fo = False, False
        f = self.formula()
        self.hyper, self.fo = saved
        return f

    def unary(self) -> Formula:
        t = self.peek()
        if t.kind == "op":
            if t.text == "!":
                self.take()
                return Not(self.unary())
            if t.text == "(":
                self.take()
                f = self.formula()
                self.expect(")")
                return f
            if t.text == "<":
                self.take()
                vs = [self.ident()]
                while self.at(","):
                    self.take()
                    vs.append(self.ident())
                self.expect(">")
                return Context(tuple(vs), self.unary())
            self.fail("expected a formula")
        if t.kind != "name":
            self.fail("expected a formula")
        w = t.text
        if w in ("X", "F", "G", "Y"):
            self.take()
            sub = self.unary()
            return {"X": Next, "F": Eventually, "G": Globally, "Y": Prev}[w](sub)
        if w in ("X_", "F_", "G_") and self.at("[", 1):
            self.take()
            gamma = self.gamma()
            sub = self.unary()
            return {"X_": NextRel, "F_": EventuallyRel, "G_": GloballyRel}[w](gamma, sub)
        if w in ("exists", "forall", "exists2", "forall2"):
            self.take()
            v = self.ident(allow_keywords=w.endswith("2"))
            self.expect(".")
            body = self.formula()
            return {"exists": Exists, "forall": Forall,
                    "exists2": Exists2, "forall2": Forall2}[w](v, body)
        if w == "E" and self.at("(", 1) and self.peek(2).kind == "name" and self.at(",", 3):
            self.take()
            self.take()
            x = self.ident()
            self.expect(",")
            y = self.ident()
            self.expect(")")
            return EqLevel(x, y)
        if w in ("E", "A"):
            self.take()
            return Trajectory(w, self.formula())
        if w == "true":
            self.take()
            return TRUE
        if w == "false":
            self.take()
            return FALSE
        if w in KEYWORDS:
            self.fail("unexpected keyword")
        return self.atom()

    def atom(self) -> Formula:
        t = self.take()
        w = t.text
        if w.startswith("P_") and self.at("("):
            self.take()
            v = self.ident()
            self.expect(")")
            return PropAt(w[2:], v)
        if self.at("["):
            self.take()
            v = self.ident()
            self.expect("]")
            return RelProp(w, v)
        if self.at("="):
            self.take()
            y = self.ident()
            if self.at("+"):
                self.take()
                return Add(w, y, self.ident())
            return Eq(w, y)
        if self.at("<") and self.peek(1).kind == "name" and not self.at(">", 2) and self.fo:
            self.take()
            return Lt(w, self.ident())
        if self.at("in") and self.peek().kind == "name":
            self.take()
            return In(w, self.ident(allow_keywords=True))
        return Prop(w)


def parse(text: str, logic: str = "hyperltl"):
    """Parse ``text`` as a formula of ``logic`` and enforce the dialect."""
    p = _Parser(text, logic)
    f = p.top()
    try:
        check_dialect(f, logic)
    except DialectError as e:
        t = p.toks[0]
        raise ParseError(f"dialect violation: {e}", t.line, t.col) from None
    return f

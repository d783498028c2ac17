import random

import pytest

from asynchyper.ltl import eval_ltl
from asynchyper.parser import ParseError, parse
from asynchyper.syntax import (
    Add, And, Context, DialectError, Eq, EqLevel, Eventually, Exists, Exists2, Globally,
    GloballyRel, HyperSentence, In, Lt, Next, NextRel, Not, Prev, Prop, PropAt, RelProp, Since,
    TRUE, Trajectory, Until, UntilRel, check_dialect, closure, closure_size, desugar, free_vars,
    infer_logic, props, size, to_text,
)

from helpers import (
    ltl_oracle, rand_fo, rand_hyper, rand_hyper_c, rand_hyper_s, rand_lasso, rand_ltl,
)


def roundtrip(f, logic):
    text = to_text(f)
    g = parse(text, logic)
    assert desugar(g) == desugar(f), text
    assert to_text(g) == text
    return g


class TestParse:
    def test_psync_sentence(self):
        s = parse("forall x1. forall x2. G (p[x1] <-> p[x2])", "hyperltl")
        assert isinstance(s, HyperSentence)
        assert s.prefix == (("forall", "x1"), ("forall", "x2"))
        assert s.alternation_depth == 0

    def test_trajectory_body(self):
        f = parse("E (X p[x])", "ahyperltl")
        assert f == Trajectory("E", Next(RelProp("p", "x")))

    def test_gamma_until(self):
        f = parse("p U_[G p; F q] r", "hyperltl_s")
        assert isinstance(f, UntilRel) and len(f.gamma) == 2
        assert parse(to_text(f), "hyperltl_s") == f

    def test_gamma_canonical(self):
        a = parse("X_[q; p; q] p[x]", "hyperltl_s")
        b = parse("X_[p; q] p[x]", "hyperltl_s")
        assert a == b
        assert parse("X_[] p[x]", "hyperltl_s").gamma == ()

    def test_context_print(self):
        f = Context(("x2", "x1"), Globally(RelProp("p", "x1")))
        assert to_text(f) == "<x1,x2> G p[x1]"
        assert to_text(TRUE) == "true"

    def test_precedence(self):
        f = parse("a & b | c -> d <-> e", "ltl")
        g = parse("(((a & b) | c) -> d) <-> e", "ltl")
        assert f == g
        assert parse("a U b U c", "ltl") == parse("a U (b U c)", "ltl")
        assert parse("!a U b", "ltl") == parse("(!a) U b", "ltl")
        assert parse("X a & b", "ltl") == parse("(X a) & b", "ltl")

    def test_fo_atoms(self):
        g = parse("exists x. exists y. exists z. z=x+y & x=y & P_p(z)", "foplus")
        assert isinstance(g, Exists)
        assert any(isinstance(h, Add) for h in _walk(g))
        h = parse("exists x. exists y. E(x,y) & !(x=y)", "foe")
        assert any(isinstance(k, EqLevel) for k in _walk(h))
        s = parse("exists2 X. exists x. x in X & P_a(x)", "s1se")
        assert isinstance(s, Exists2)
        assert any(isinstance(k, In) for k in _walk(s))

    def test_syntax_errors_have_positions(self):
        with pytest.raises(ParseError) as e:
            parse("p[x] &\n  & q[x]", "hyperltl")
        assert e.value.line == 2
        with pytest.raises(ParseError):
            parse("(p[x]", "hyperltl")
        with pytest.raises(ParseError):
            parse("forall x. p[y]", "hyperltl")

    def test_dialect_violations(self):
        with pytest.raises(ParseError):
            parse("<x> F p[x]", "hyperltl_s")
        with pytest.raises(ParseError):
            parse("X_[p] p[x]", "hyperltl_c")
        with pytest.raises(ParseError):
            parse("Y p[x]", "hyperltl")
        with pytest.raises(ParseError):
            parse("E <x> p[x]", "ahyperltl")
        with pytest.raises(DialectError):
            check_dialect(Context(("x",), Prev(RelProp("p", "x"))), "hyperltl_s")

    def test_empty_context_rejected(self):
        with pytest.raises(DialectError):
            Context((), TRUE)

    def test_sentence_checks(self):
        with pytest.raises(DialectError):
            HyperSentence((("forall", "x"), ("exists", "x")), RelProp("p", "x"))
        with pytest.raises(DialectError):
            HyperSentence((("forall", "x"),), RelProp("p", "y"))
        with pytest.raises(DialectError):
            HyperSentence((), TRUE)

    def test_infer_logic(self):
        assert infer_logic(parse("forall x. G p[x]", "hyperltl")) == "hyperltl"
        assert infer_logic(parse("forall x. G_[p] p[x]", "hyperltl_s")) == "hyperltl_s"
        assert infer_logic(parse("forall x. <x> F p[x]", "hyperltl_c")) == "hyperltl_c"
        assert infer_logic(parse("forall x. E F p[x]", "ahyperltl")) == "ahyperltl"


def _walk(f):
    from asynchyper.syntax import subformulas
    return list(subformulas(f))


class TestRoundTrip:
    def test_fuzz_ltl(self):
        r = random.Random(1)
        for _ in range(100):
            roundtrip(rand_ltl(r, r.randint(1, 8)), "ltl")

    def test_fuzz_hyper(self):
        r = random.Random(2)
        for _ in range(100):
            roundtrip(rand_hyper(r, r.randint(1, 8), ("x1", "x2")), "hyperltl")

    def test_fuzz_hyper_s(self):
        r = random.Random(3)
        for _ in range(100):
            roundtrip(rand_hyper_s(r, r.randint(1, 7), ("x1", "x2")), "hyperltl_s")

    def test_fuzz_hyper_c(self):
        r = random.Random(4)
        for _ in range(100):
            roundtrip(rand_hyper_c(r, r.randint(1, 8), ("x1", "x2"), past=True), "hyperltl_c")

    def test_fuzz_fo(self):
        r = random.Random(5)
        for _ in range(100):
            roundtrip(rand_fo(r, 2, (), 3), "foplus")

    def test_sentences(self):
        for text, logic in [
            ("forall x1. exists x2. E G (p[x1] <-> p[x2])", "ahyperltl"),
            ("exists x. forall y. A X p[x]", "ahyperltl"),
            ("forall x1. forall x2. (p[x1] <-> p[x2]) & <x2> F X <x1,x2> G p[x1]", "hyperltl_c"),
            ("exists x1. forall x2. X p[x1] & G_[p] (p[x1] <-> p[x2])", "hyperltl_s"),
        ]:
            s = parse(text, logic)
            assert parse(to_text(s), logic) == s


class TestAnalysis:
    def test_free_vars(self):
        assert free_vars(parse("forall x. p[x]", "hyperltl")) == frozenset()
        assert free_vars(parse("p[x] U q[y]", "hyperltl")) == {"x", "y"}
        assert free_vars(parse("exists x. x < y", "foplus")) == {"y"}

    def test_closure_sizes(self):
        assert closure_size(RelProp("p", "x1"), ["x1"]) == 2
        assert closure_size(Next(RelProp("p", "x1")), ["x1"]) == 4
        cl = closure(RelProp("p", "x1"), ["x1", "x2"])
        assert RelProp("p", "x2") in cl and Not(RelProp("p", "x2")) in cl

    def test_closure_identifies_double_negation(self):
        cl = closure(Not(Not(RelProp("p", "x"))), ["x"])
        assert Not(Not(Not(RelProp("p", "x")))) not in cl

    def test_props(self):
        assert props(parse("p[x] U_[G q] r[x]", "hyperltl_s")) == {"p", "q", "r"}

    def test_desugar_core(self):
        f = desugar(parse("F p -> G (q | r) <-> X p", "ltl"))
        core = {"TrueF", "Prop", "Not", "And", "Next", "Until"}
        assert {type(g).__name__ for g in _walk(f)} <= core

    def test_desugar_preserves_ltl(self):
        r = random.Random(7)
        for _ in range(50):
            t = rand_lasso(r)
            f = rand_ltl(r, r.randint(2, 7))
            assert ltl_oracle(t, f) == ltl_oracle(t, desugar(f))
            assert eval_ltl(t, 0, f) == eval_ltl(t, 0, desugar(f))

    def test_gamma_globally_desugaring(self):
        f = parse("G_[p] q[x]", "hyperltl_s")
        assert isinstance(f, GloballyRel)
        g = desugar(f)
        assert g == Not(UntilRel((Prop("p"),), TRUE, Not(RelProp("q", "x"))))

    def test_hash_consistent_with_equality(self):
        a = parse("p[x] U (q[y] & X p[x])", "hyperltl")
        b = parse("p[x] U (q[y] & X p[x])", "hyperltl")
        assert a == b and hash(a) == hash(b)
        assert len({a, b}) == 1

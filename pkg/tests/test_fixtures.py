import re
from itertools import product

import pytest

from asynchyper.fixtures import (
    FAMILIES, NAMED_FORMULAS, FixtureError, family, named_formula, phi_A, phi_suff, psi1, psi2,
    psi_A, psi_S, psync, theta_kreg, theta_sharp,
)
from asynchyper.hyper import eval_qf_hyperltl, eval_sentence
from asynchyper.syntax import to_text
from asynchyper.traces import SHARP, LassoTrace, TraceAssignment, enc_sharp_trace

P, E = frozenset({"p"}), frozenset()


def all_lassos(max_prefix, max_period):
    for m in range(max_prefix + 1):
        for pre in product((E, P), repeat=m):
            for q in range(1, max_period + 1):
                for per in product((E, P), repeat=q):
                    yield LassoTrace(pre, per)


def shape(t):
    """The word before an all-empty tail, or None if p recurs."""
    if any(t.period):
        return None
    s = "".join("p" if a else "0" for a in t.prefix)
    return s.rstrip("0")


SHAPES = [
    (psi1, r"(0p)+"),
    (psi2, r"(00pp)+"),
    (theta_kreg, r"0+(p0)*p"),
]


class TestShapeFormulas:
    @pytest.mark.parametrize("make,pattern", SHAPES)
    def test_exact_language(self, make, pattern):
        # every lasso with prefix <= 9 and period <= 2 over {p}
        f = make("x")
        pos = neg = 0
        for t in all_lassos(9, 2):
            s = shape(t)
            expected = s is not None and re.fullmatch(pattern, s) is not None
            assert eval_qf_hyperltl(TraceAssignment.of(x=t), f) == expected, t
            pos += expected
            neg += not expected
        assert pos >= 3 and neg >= 20

    def test_theta_sharp(self):
        f = theta_sharp("x")
        for t in all_lassos(3, 2):
            enc = enc_sharp_trace(t)
            assert eval_qf_hyperltl(TraceAssignment.of(x=enc), f)
            # doubling the first letter breaks the alternation
            bad = LassoTrace([enc.letter_at(0)] + list(enc.prefix), enc.period)
            assert not eval_qf_hyperltl(TraceAssignment.of(x=bad), f)
            plain = LassoTrace([a | {SHARP} for a in t.prefix], [a | {SHARP} for a in t.period])
            assert not eval_qf_hyperltl(TraceAssignment.of(x=plain), f)


class TestFamilies:
    def test_traces(self):
        f = family("counting", 2)
        assert f.sets["L"][0] == LassoTrace([E, P, E, P], [E])
        assert len(f.sets["L"][1].prefix) == 8
        assert len(f.sets["L'"][1].prefix) == 10
        s = family("suffix", 2)
        assert s.sets["L"][0] == LassoTrace([], [P, P, E])
        assert s.sets["L'"][0] == LassoTrace([P, P, P, E], [P, P, E])
        k = family("kregular", 1, k=3)
        assert k.sets["L"][1] == LassoTrace([E, E, E, P, E], [E])

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_closed_forms(self, n):
        def alt(m):  # (0 p)^m 0^omega
            return lambda i: P if i < 2 * m and i % 2 else E
        closed = {
            ("counting", "L"): [alt(n), alt(2 * n)],
            ("counting", "L'"): [alt(n), alt(2 * n + 1)],
            ("suffix", "L"): [lambda i: E if i % (n + 1) == n else P],
            ("suffix", "L'"): [lambda i: E if i == n + 1 or (i > n + 1 and (i - n - 2) % (n + 1) == n)
                               else P],
            ("psync", "L"): [lambda i: P if i < n else E],
            ("psync", "L'"): [lambda i: P if i < n else E, lambda i: P if i < n + 1 else E],
            ("kregular", "L"): [lambda i: P if 1 <= i < 1 + 2 * n and (i - 1) % 2 == 0 else E,
                                lambda i: P if 2 <= i < 2 + 2 * n and (i - 2) % 2 == 0 else E],
        }
        for (name, label), defs in closed.items():
            traces = family(name, n).sets[label]
            assert len(traces) == len(defs)
            for t, d in zip(traces, defs):
                horizon = len(t.prefix) + 2 * len(t.period)
                assert [t.letter_at(i) for i in range(horizon)] == [d(i) for i in range(horizon)]

    def test_bad_parameters(self):
        with pytest.raises(FixtureError):
            family("nope")
        with pytest.raises(FixtureError):
            family("counting", 0)
        with pytest.raises(FixtureError):
            named_formula("nope")

    @pytest.mark.parametrize("name,n", [("suffix", 1), ("suffix", 2), ("psync", 1),
                                        ("psync", 3), ("counting", 1)])
    def test_verdict_tables(self, name, n):
        fam = family(name, n)
        for (label, fname), v in fam.verdicts.items():
            assert eval_sentence(fam.sets[label], named_formula(fname)) == v

    def test_kregular_verdicts(self):
        fam = family("kregular", 1, k=2)
        assert eval_sentence(fam.sets["L"], psi_S())
        assert eval_sentence(fam.sets["L"], psi_A())

    def test_all_families_build(self):
        for name in FAMILIES:
            assert family(name, 1).sets["L"]


class TestNamedFormulas:
    def test_stable_printing(self):
        for name in NAMED_FORMULAS:
            assert to_text(named_formula(name)) == to_text(named_formula(name))

    def test_named_match_constructors(self):
        assert named_formula("phi_A") == phi_A()
        assert named_formula("phi_suff") == phi_suff()
        assert named_formula("psync") == psync()

    def test_quantifier_shapes(self):
        assert [q for q, _ in psi_A().prefix] == ["exists", "forall", "forall"]
        assert [q for q, _ in phi_A().prefix] == ["forall", "forall"]
        assert phi_A().body.mode == "E"

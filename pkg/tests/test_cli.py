import io
import subprocess
import sys

import pytest

from asynchyper.cli import run
from asynchyper.parser import parse
from asynchyper.translations import hyperltl_to_ahyperltl

P_LOOP = "state a init {p}\nedge a a\n"
TWO_CYCLE = "state a init {p}\nstate b {}\nedge a b\nedge b a\n"
HALT = "loc q0 q1 q2 q3\ntrans q0 inc 1 q1\ntrans q1 dec 1 q2\ntrans q2 if_zero 1 q3\ninit 0\nspecial 2\n"
LOOP = "loc q0 q1 q2\ntrans q0 inc 1 q1\ntrans q1 inc 1 q1\ntrans q2 if_zero 1 q2\ninit 0\nspecial 2\n"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


class TestExitCodes:
    def test_tautology(self, files):
        t = files("t.traces", "{p} | {}\n")
        code, out, _ = cli("eval", "-e", "forall x. p[x] | !p[x]", "-t", t)
        assert code == 0
        assert "verdict=true" in out

    def test_false_verdict(self, files):
        t = files("t.traces", "{p} | {}\n{} | {}\n")
        code, out, _ = cli("eval", "-e", "forall x. p[x]", "-t", t)
        assert code == 1 and "verdict=false" in out

    def test_bad_flag(self):
        code, _, err = cli("eval", "--nonsense")
        assert code == 2 and err.startswith("asynchyper: error:")

    def test_parse_error(self, files):
        t = files("t.traces", "{p}\n")
        code, _, err = cli("eval", "-e", "forall x. p[x] &", "-t", t)
        assert code == 2 and "parse error" in err

    def test_nonpositive_bound(self, files):
        k = files("k.txt", P_LOOP)
        code, _, _ = cli("mc", "-k", k, "-e", "forall x. p[x]", "--max-prefix", "0")
        assert code == 2

    def test_exclusive_inputs(self, files):
        t = files("t.traces", "{p}\n")
        code, _, _ = cli("eval", "-e", "exists x. P_p(x)", "-t", t, "--finite-trace", t)
        assert code == 2

    def test_version_and_help(self):
        assert cli("--version")[0] == 0
        assert cli("--help")[0] == 0

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "asynchyper", "fixtures"],
                           capture_output=True, text=True)
        assert r.returncode == 0
        assert r.stdout.startswith("families=")


class TestCommands:
    def test_parse_roundtrip(self):
        code, out, _ = cli("parse", "-e", "forall x1. forall x2. G (p[x1] <-> p[x2])")
        assert code == 0
        assert "logic=hyperltl" in out

    def test_mc_caveat_and_report(self, files):
        k = files("k.txt", P_LOOP)
        code, out, _ = cli("mc", "-k", k, "--named", "psync")
        assert code == 0
        lines = out.splitlines()
        assert any(line.startswith("note=bounded search") for line in lines)
        assert "traces=1" in lines

    def test_mc_sharp_pipeline(self, files):
        k = files("k.txt", TWO_CYCLE)
        for text in ("forall x1. forall x2. G (p[x1] <-> p[x2])",
                     "exists x1. exists x2. F (p[x1] & !p[x2])"):
            plain = cli("mc", "-k", k, "-e", text, "--max-prefix", "2", "--max-period", "3")
            sharp = cli("mc", "-k", k, "-e", text, "--sharp", "--max-prefix", "4",
                        "--max-period", "6")
            assert plain[0] == sharp[0]

    def test_mc_fragmentU_nonhalting(self, files, tmp_path):
        m = files("m.txt", LOOP)
        d = tmp_path / "red"
        code, out, _ = cli("reduce", "-m", m, "--target", "fragmentU", "--out", str(d))
        assert code == 0 and "witness=none" in out
        code, out, _ = cli("mc", "-k", str(d / "kripke.txt"), "-f", str(d / "formula.txt"),
                           "--max-prefix", "3", "--max-period", "1")
        assert code == 1

    def test_reduce_witness(self, files):
        m = files("m.txt", HALT)
        code, out, _ = cli("reduce", "-m", m, "--target", "fragmentU", "--emit", "witness")
        assert code == 0
        assert out.strip() == "{beg d0} {pad} {pad} {# beg d1} {c1} {pad} {beg d2} {pad} {pad} | {bot}"
        code, out, _ = cli("reduce", "-m", m, "--target", "ahyperltl", "--emit", "kripke")
        assert code == 2

    def test_reduce_kripke_dot(self, files):
        m = files("m.txt", HALT)
        code, out, _ = cli("--format", "dot", "reduce", "-m", m, "--target", "fragmentU",
                           "--emit", "kripke")
        assert code == 0 and out.startswith("digraph kripke {")

    def test_automaton(self):
        code, out, _ = cli("automaton", "-e", "p[x1] U q[x2]")
        assert code == 0
        assert "variables=x1,x2" in out
        code, out, _ = cli("--format", "dot", "automaton", "-e", "X p[x1]")
        assert code == 0 and out.startswith("digraph nawa {")

    def test_translate(self):
        code, out, _ = cli("translate", "--from", "foplus", "--to", "chltl",
                           "-e", "exists x. P_p(x)")
        assert code == 0
        assert out.splitlines()[-1].startswith("formula=")
        code, _, err = cli("translate", "--from", "s1se", "--to", "chltl", "-e", "x")
        assert code == 2

    def test_fixtures_out(self, tmp_path):
        code, out, _ = cli("fixtures", "--family", "counting", "--n", "2", "--out", str(tmp_path))
        assert code == 0
        assert "expect[L,phi_A]=true" in out
        assert (tmp_path / "L_prime.traces").read_text().count("\n") == 2
        code, out, _ = cli("eval", "-t", str(tmp_path / "L.traces"),
                           "-f", str(tmp_path / "phi_A.formula"))
        assert code == 0

    def test_fixtures_unknown(self):
        assert cli("fixtures", "--family", "nope")[0] == 2
        assert cli("fixtures", "--formula", "nope")[0] == 2

    def test_foe_needs_bound(self, files):
        t = files("t.traces", "{p} | {}\n")
        assert cli("eval", "--logic", "foe", "-e", "exists x. P_p(x)", "-t", t)[0] == 2
        code, out, _ = cli("eval", "--logic", "foe", "-e", "exists x. P_p(x)", "-t", t,
                           "--bound", "2")
        assert code == 0 and "bounded=true" in out

    def test_finite_word(self, files):
        w = files("w.txt", "{p} {} {p}\n")
        code, _, _ = cli("eval", "--logic", "foplus", "--finite-trace", w,
                         "-e", "exists x. exists y. x<y & P_p(x) & P_p(y)")
        assert code == 0


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ("translate", "--from", "foplus", "--to", "chltl",
         "-e", "forall x. exists y. x<y & (P_p(x) <-> !P_p(y))"),
        ("translate", "--from", "hyperltl", "--to", "ahyperltl",
         "-e", "forall x1. forall x2. G (p[x1] <-> p[x2])"),
        ("translate", "--from", "chltl", "--to", "foplus", "-e", "<x1> F p[x1]"),
        ("fixtures", "--family", "kregular", "--n", "2"),
        ("automaton", "-e", "F p[x1] & G q[x2]"),
    ])
    def test_identical_output(self, argv):
        runs = [cli(*argv) for _ in range(3)]
        assert runs[0][0] == 0
        assert runs[0] == runs[1] == runs[2]

    def test_translate_golden(self):
        src = "forall x1. forall x2. G (p[x1] <-> p[x2])"
        code, out, _ = cli("translate", "--from", "hyperltl", "--to", "ahyperltl", "-e", src)
        assert code == 0
        golden = ("forall x1. forall x2. E G (p[x1] <-> p[x2]) & "
                  "(#[x1] & G (#[x1] <-> !X #[x1]) & (#[x2] & G (#[x2] <-> !X #[x2])))")
        assert out == f"size=23\nformula={golden}\n"
        assert parse(golden, "ahyperltl") == hyperltl_to_ahyperltl(parse(src, "hyperltl"))

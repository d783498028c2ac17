"""Separating trace families and named formulas."""

from __future__ import annotations

from dataclasses import dataclass, field

from .parser import parse
from .syntax import (
    And, Context, Eventually, Formula, Globally, HyperSentence, Iff, Next, Not, RelProp,
    Trajectory, conj, disj, relativize,
)
from .traces import LassoTrace

E = frozenset()
P = frozenset({"p"})


class FixtureError(KeyError):
    pass


def _lasso(prefix, period=(E,)) -> LassoTrace:
    return LassoTrace(prefix, period)


def counting_pi(n: int) -> LassoTrace:
    """(0 p)^n 0^omega"""
    return _lasso([E, P] * n)


def counting_rho(n: int) -> LassoTrace:
    return _lasso([E, P] * (2 * n))


def counting_rho_prime(n: int) -> LassoTrace:
    return _lasso([E, P] * (2 * n + 1))


def suffix_pi(n: int) -> LassoTrace:
    """(p^n 0)^omega"""
    return _lasso([], [P] * n + [E])


def suffix_pi_prime(n: int) -> LassoTrace:
    """p^(n+1) 0 (p^n 0)^omega"""
    return _lasso([P] * (n + 1) + [E], [P] * n + [E])


def psync_pi(n: int) -> LassoTrace:
    """p^n 0^omega"""
    return _lasso([P] * n)


def kreg_pi(k: int, n: int) -> LassoTrace:
    """0^k (p 0)^n 0^omega"""
    return _lasso([E] * k + [P, E] * n)


@dataclass
class Family:
    name: str
    params: dict
    sets: dict  # label -> tuple of LassoTrace
    verdicts: dict = field(default_factory=dict)  # (label, formula name) -> bool


def family(name: str, n: int = 1, k: int | None = None) -> Family:
    if n < 1 or (k is not None and k < 1):
        raise FixtureError("parameters must be >= 1")
    if name == "counting":
        L = (counting_pi(n), counting_rho(n))
        L2 = (counting_pi(n), counting_rho_prime(n))
        return Family(name, {"n": n}, {"L": L, "L'": L2},
                      {("L", "phi_A"): True, ("L'", "phi_A"): False})
    if name == "suffix":
        return Family(name, {"n": n}, {"L": (suffix_pi(n),), "L'": (suffix_pi_prime(n),)},
                      {("L", "phi_suff"): True, ("L'", "phi_suff"): False})
    if name == "psync":
        return Family(name, {"n": n}, {"L": (psync_pi(n),),
                                        "L'": (psync_pi(n), psync_pi(n + 1))},
                      {("L", "psync"): True, ("L'", "psync"): False})
    if name == "kregular":
        kk = 2 if k is None else k
        L = (kreg_pi(1, n), kreg_pi(kk, n))
        return Family(name, {"n": n, "k": kk}, {"L": L},
                      {("L", "psi_S"): True, ("L", "psi_A"): True})
    raise FixtureError(f"unknown family {name!r}")


FAMILIES = ("counting", "suffix", "psync", "kregular")


# one-variable shape formulas (over the plain proposition p) -------------------------

PSI1_TEXT = "!p & X p & G (p -> !X p) & G (!p & !X p -> G !p) & F G !p"
PSI2_TEXT = ("!p & !X p & X X p & G (!p & X p -> X X p & !X X X p) & "
             "G (p & !X p -> !X X p & (X X X p | X G !p)) & F G !p")
THETA_TEXT = "!p & F p & G (p -> !X p & (X X p | X G !p)) & F G !p"


def psi1(var: str) -> Formula:
    """Holds exactly on traces (0 p)^k 0^omega with k >= 1."""
    return relativize(parse(PSI1_TEXT, "ltl"), var)


def psi2(var: str) -> Formula:
    """Holds exactly on traces (0 0 p p)^k 0^omega with k >= 1."""
    return relativize(parse(PSI2_TEXT, "ltl"), var)


def theta_kreg(var: str) -> Formula:
    """Holds exactly on traces 0^k (p 0)^n 0^omega with k, n >= 1."""
    return relativize(parse(THETA_TEXT, "ltl"), var)


def theta_sharp(var: str) -> Formula:
    s = RelProp("#", var)
    return And(s, Globally(Iff(s, Not(Next(s)))))


def psi_last_p(x: str, y: str) -> Formula:
    """The last p occurs at the same time on both traces."""
    px, py = RelProp("p", x), RelProp("p", y)
    return Eventually(conj([px, py, Next(Globally(And(Not(px), Not(py))))]))


def phi_A() -> HyperSentence:
    psi = psi_last_p("x1", "x2")
    same = conj([psi, psi1("x1"), psi1("x2")])
    mixed = And(psi, disj([And(psi1("x1"), psi2("x2")), And(psi1("x2"), psi2("x1"))]))
    return HyperSentence((("forall", "x1"), ("forall", "x2")), Trajectory("E", disj([same, mixed])))


def phi_suff(props=("p",)) -> HyperSentence:
    def agree():
        return conj([Globally(Iff(RelProp(p, "x1"), RelProp(p, "x2"))) for p in props])
    body = And(agree(), Context(("x2",), Eventually(Next(Context(("x1", "x2"), agree())))))
    return HyperSentence((("forall", "x1"), ("forall", "x2")), body)


def psync() -> HyperSentence:
    return parse("forall x1. forall x2. G (p[x1] <-> p[x2])", "hyperltl")


def psi_S() -> HyperSentence:
    body = conj([Next(RelProp("p", "x1")), theta_kreg("x1"), theta_kreg("x2"),
                 parse("G_[p] (p[x1] <-> p[x2])", "hyperltl_s")])
    return HyperSentence((("exists", "x1"), ("forall", "x2")), body)


def psi_A() -> HyperSentence:
    body = conj([Next(RelProp("p", "x1")), theta_kreg("x2"), theta_kreg("x3"),
                 Globally(Iff(RelProp("p", "x2"), RelProp("p", "x3")))])
    return HyperSentence((("exists", "x1"), ("forall", "x2"), ("forall", "x3")),
                         Trajectory("E", body))


def psi_eq(x: str, y: str) -> Formula:
    """Both positions are the same position of a finite-trace encoding."""
    sx, sy = RelProp("#", x), RelProp("#", y)
    return Context((x, y), Eventually(conj([Not(sx), Not(sy), Next(And(sx, sy))])))


_NAMED = {
    "phi_A": phi_A,
    "phi_suff": phi_suff,
    "psync": psync,
    "psi_S": psi_S,
    "psi_A": psi_A,
    "psi1_counting": lambda: psi1("x"),
    "psi2_counting": lambda: psi2("x"),
    "theta_kregular": lambda: theta_kreg("x"),
    "theta_sharp": lambda: theta_sharp("x"),
    "psi_last_p": lambda: psi_last_p("x", "y"),
    "psi_eq": lambda: psi_eq("x", "y"),
}
NAMED_FORMULAS = tuple(_NAMED)


def named_formula(name: str):
    try:
        return _NAMED[name]()
    except KeyError:
        raise FixtureError(f"unknown formula {name!r}") from None

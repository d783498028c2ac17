"""Command-line entry point.

Exit codes: 0 verdict true or success, 1 verdict false, 2 usage/parse/bound error.
Output is line-oriented ``key=value`` (``--format kv``, the default) or a
lightly formatted ``key: value`` view (``--format text``); automata and
Kripke structures can also be printed as DOT.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .parser import ParseError, parse
from .syntax import HYPER_LOGICS, LOGICS, DialectError, HyperSentence, infer_logic, size, to_text
from .traces import (
    FiniteTrace, LassoTrace, TraceError, enc_finite, enc_sharp_kripke, format_kripke, format_trace,
    lasso_paths, parse_kripke, parse_trace_file, state_name,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# output -------------------------------------------------------------------------------

class Out:
    def __init__(self, fmt: str, stream):
        self.fmt = fmt
        self.stream = stream

    def kv(self, key: str, value) -> None:
        if isinstance(value, bool):
            value = "true" if value else "false"
        sep = "=" if self.fmt == "kv" else ": "
        print(f"{key}{sep}{value}", file=self.stream)

    def raw(self, text: str) -> None:
        self.stream.write(text if text.endswith("\n") else text + "\n")


def _verdict(out: Out, v: bool) -> int:
    out.kv("verdict", v)
    return 0 if v else 1


# inputs -------------------------------------------------------------------------------

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _formula_text(args) -> str:
    if args.expr is not None:
        return args.expr
    if args.formula is not None:
        return _read(args.formula)
    if getattr(args, "named", None):
        return None
    raise UsageError("give a formula with -e TEXT or -f PATH")


def _auto_parse(text: str):
    """Parse in the smallest hyper dialect that accepts ``text``."""
    last = None
    for logic in HYPER_LOGICS:
        try:
            return parse(text, logic), logic
        except ParseError as e:
            last = e
    raise last


def _load_formula(args, default_logic: str | None = None):
    if getattr(args, "named", None):
        from .fixtures import named_formula
        f = named_formula(args.named)
        logic = args.logic or (infer_logic(f) if isinstance(f, HyperSentence) else "hyperltl_c")
        return f, logic
    text = _formula_text(args)
    logic = args.logic or default_logic
    if logic is None:
        return _auto_parse(text)
    return parse(text, logic), logic


def _positive(name: str, v: int | None, allow_zero: bool = False) -> None:
    if v is None:
        return
    if v < (0 if allow_zero else 1):
        raise UsageError(f"{name} must be {'>= 0' if allow_zero else 'positive'}")


def _add_formula_args(p, named: bool = False) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("-e", "--expr", help="formula text")
    g.add_argument("-f", "--formula", "--sentence", dest="formula",
                   help="file holding the formula ('-' for stdin)")
    if named:
        g.add_argument("--named", help="a built-in formula from the fixtures")
    p.add_argument("--logic", choices=LOGICS, help="dialect (default: inferred for hyper logics)")


# subcommands --------------------------------------------------------------------------

def cmd_parse(args, out: Out) -> int:
    f, logic = _load_formula(args)
    out.kv("logic", logic)
    if isinstance(f, HyperSentence):
        out.kv("kind", infer_logic(f))
        out.kv("quantifiers", len(f.prefix))
        out.kv("size", size(f.body))
    else:
        out.kv("size", size(f))
    out.kv("formula", to_text(f))
    return 0


def _load_traces(path: str) -> list:
    items = parse_trace_file(_read(path))
    if not items:
        raise UsageError(f"{path} holds no traces")
    return items


def cmd_eval(args, out: Out) -> int:
    f, logic = _load_formula(args, None)
    if args.finite_trace:
        if args.traces:
            raise UsageError("--traces and --finite-trace are mutually exclusive")
        args.traces = args.finite_trace
    if not args.traces:
        raise UsageError("eval needs --traces or --finite-trace")
    items = _load_traces(args.traces)
    if logic in ("foplus",):
        from .fo import eval_foplus_finite, eval_foplus_lasso
        if len(items) != 1:
            raise UsageError("FO_f[<,+] is evaluated on exactly one word")
        w = items[0]
        if isinstance(w, FiniteTrace):
            return _verdict(out, eval_foplus_finite(w, f))
        if args.position_bound is None:
            raise UsageError("a lasso word needs --position-bound")
        out.kv("bounded", True)
        out.kv("position_bound", args.position_bound)
        return _verdict(out, eval_foplus_lasso(w, f, args.position_bound))
    if logic in ("foe", "s1se"):
        from .fo import eval_foe_bounded
        if args.position_bound is None:
            raise UsageError(f"{logic} evaluation needs --position-bound")
        L = [_as_lasso(t) for t in items]
        out.kv("bounded", True)
        out.kv("position_bound", args.position_bound)
        out.kv("so_bound", args.so_bound)
        return _verdict(out, eval_foe_bounded(L, f, args.position_bound, args.so_bound))
    if logic not in HYPER_LOGICS or not isinstance(f, HyperSentence):
        raise UsageError(f"eval needs a hyper sentence or an FO sentence, got {logic}")
    from .hyper import eval_sentence
    L = [_as_lasso(t) for t in items]
    opts = {"mode": args.mode}
    if args.backend == "oracle":
        opts["backend"] = "oracle"
        opts["block_bound"] = args.block_bound
        out.kv("backend", f"oracle(block_bound={args.block_bound})")
    out.kv("traces", len(dict.fromkeys(L)))
    return _verdict(out, eval_sentence(L, f, logic, **opts))


def _as_lasso(t) -> LassoTrace:
    return enc_finite(t) if isinstance(t, FiniteTrace) else t


def cmd_mc(args, out: Out) -> int:
    from .hyper import eval_sentence
    K = parse_kripke(_read(args.kripke))
    f, logic = _load_formula(args)
    if not isinstance(f, HyperSentence):
        raise UsageError("mc needs a sentence with a quantifier prefix")
    if args.sharp:
        from .translations import hyperltl_to_ahyperltl
        if logic != "hyperltl":
            raise UsageError("--sharp applies to plain HyperLTL sentences")
        K = enc_sharp_kripke(K)
        f, logic = hyperltl_to_ahyperltl(f), "ahyperltl"
    L = sorted(lasso_paths(K, args.max_prefix, args.max_period), key=format_trace)
    out.kv("note", "bounded search over lasso paths; a verdict is exact only for this trace set")
    out.kv("max_prefix", args.max_prefix)
    out.kv("max_period", args.max_period)
    out.kv("traces", len(L))
    if not L:
        raise UsageError("the bounds admit no lasso path")
    return _verdict(out, eval_sentence(L, f, logic))


def cmd_automaton(args, out: Out) -> int:
    from .automata import build_nawa_E, build_nawa_E_tableau, nawa_dot, nawa_stats
    f, _ = _load_formula(args, "hyperltl")
    if isinstance(f, HyperSentence):
        raise UsageError("automaton takes a quantifier-free body")
    variables = [v for v in args.vars.split(",") if v] if args.vars else None
    if not variables:
        from .syntax import free_vars
        variables = sorted(free_vars(f))
    builder = build_nawa_E_tableau if args.construction == "tableau" else build_nawa_E
    a = builder(f, variables)
    if args.emit == "dot" or args.format == "dot":
        if args.construction == "tableau":
            raise UsageError("DOT output needs --construction atoms (the tableau is built lazily)")
        out.raw(nawa_dot(a))
        return 0
    out.kv("construction", args.construction)
    out.kv("variables", ",".join(variables))
    for k, v in nawa_stats(a).items():
        out.kv(k, v)
    return 0


# (source logic, target) -> how to run it
_ROUTES = {
    ("hyperltl", "ahyperltl"): "hyperltl",
    ("foplus", "chltl"): "foplus",
    ("foplus", "past-chltl"): "foplus",
    ("chltl", "foplus"): "hyperltl_c",
    ("simple-chltl", "foe"): "hyperltl_c",
    ("s1se", "s1s"): "s1se",
}
_FROM = sorted({a for a, _ in _ROUTES})
_TO = sorted({b for _, b in _ROUTES})


def cmd_translate(args, out: Out) -> int:
    from . import translations as tr
    from .syntax import free_vars
    route = (args.source, args.target)
    if route not in _ROUTES:
        pairs = ", ".join(f"{a}->{b}" for a, b in _ROUTES)
        raise UsageError(f"no translation {args.source}->{args.target} (available: {pairs})")
    f, _ = _load_formula(args, _ROUTES[route])
    if route == ("hyperltl", "ahyperltl"):
        if not isinstance(f, HyperSentence):
            raise UsageError("expected a HyperLTL sentence")
        res = tr.hyperltl_to_ahyperltl(f)
    elif route[0] == "foplus":
        t = tr.foplus_to_hyperltlc(f) if args.target == "chltl" else tr.foplus_to_past_hyperltlc(f)
        out.kv("variables", ",".join(t.variables))
        res = t.formula
    elif route[0] == "chltl":
        if isinstance(f, HyperSentence):
            raise UsageError("chltl->foplus takes a quantifier-free formula")
        variables = [v for v in args.vars.split(",") if v] if args.vars else sorted(free_vars(f))
        res = tr.hyperltlc_to_foplus(f, variables, experimental_past=args.experimental_past)
    elif route[0] == "simple-chltl":
        if not isinstance(f, HyperSentence):
            raise UsageError("expected a HyperLTL_C sentence")
        res = tr.simple_hyperltlc_to_foe(f)
    else:
        if args.k is None:
            raise UsageError("s1se->s1s needs --k")
        res = tr.s1se_to_s1s_kcode(f, args.k)
    out.kv("size", size(res.body) if isinstance(res, HyperSentence) else size(res))
    out.kv("formula", to_text(res))
    return 0


def _write(directory: str, name: str, text: str) -> str:
    import os
    try:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    except OSError as e:
        raise UsageError(f"cannot write to {directory}: {e.strerror}") from None
    return path


def cmd_reduce(args, out: Out) -> int:
    from . import reductions as rd
    M = rd.parse_machine(_read(args.machine))
    files = {}
    witness = None
    if args.target == "ahyperltl":
        files["formula.txt"] = to_text(rd.ahyperltl_reduction(M))
        if args.emit == "kripke":
            raise UsageError("the A-HyperLTL reduction has no Kripke structure")
        if args.emit == "witness" or args.out:
            run = rd.find_recurrent_run(M, args.counter_bound or 4)
            if run is not None:
                witness = "\n".join(format_trace(t) + f" // {lab}" for lab, t in
                                    zip(("pi", "pi1", "pi2"), rd.ahyperltl_witness(M, run)))
    else:
        K, phi = rd.fragmentU_reduction(M, literal_length_check=args.literal)
        files["formula.txt"] = to_text(phi)
        files["kripke.txt"] = format_kripke(K)
        files["kripke.dot"] = _kripke_dot(K)
        if args.emit == "witness" or args.out:
            run = rd.find_halting_run(M, args.max_length, args.counter_bound)
            if run is not None:
                witness = format_trace(rd.fragmentU_witness(M, run))
    if args.out:
        if witness is not None:
            files["witness.txt"] = witness
        for name in sorted(files):
            out.kv("wrote", _write(args.out, name, files[name]))
        out.kv("witness", "found" if witness is not None else "none")
        return 0
    if args.emit == "formula":
        out.raw(files["formula.txt"])
    elif args.emit == "kripke":
        out.raw(files["kripke.dot" if args.format == "dot" else "kripke.txt"])
    else:
        if witness is None:
            out.kv("witness", "none")
            return 1
        out.raw(witness)
    return 0


def _kripke_dot(K) -> str:
    from .traces import format_letter
    init = set(K.initial)
    lines = ["digraph kripke {"]
    for s in K.states:
        shape = "doublecircle" if s in init else "circle"
        lines.append(f'  "{state_name(s)}" [label="{state_name(s)}\\n'
                     f'{format_letter(K.valuation[s])}", shape={shape}];')
    for a, b in K.edges:
        lines.append(f'  "{state_name(a)}" -> "{state_name(b)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_fixtures(args, out: Out) -> int:
    from . import fixtures as fx
    if args.formula_name:
        out.raw(to_text(fx.named_formula(args.formula_name)))
        return 0
    if not args.family:
        out.kv("families", ",".join(fx.FAMILIES))
        out.kv("formulas", ",".join(fx.NAMED_FORMULAS))
        return 0
    fam = fx.family(args.family, args.n, args.k)
    files = {}
    for label in sorted(fam.sets):
        body = "\n".join(format_trace(t) for t in fam.sets[label])
        files[label.replace("'", "_prime") + ".traces"] = body
    for name in sorted({f for _, f in fam.verdicts}):
        files[name + ".formula"] = to_text(fx.named_formula(name))
    if args.out:
        for name in sorted(files):
            out.kv("wrote", _write(args.out, name, files[name]))
        for (label, name), v in sorted(fam.verdicts.items()):
            out.kv(f"expect[{label},{name}]", v)
        return 0
    for label in sorted(fam.sets):
        for t in fam.sets[label]:
            out.raw(f"{format_trace(t)} // {label}")
    for (label, name), v in sorted(fam.verdicts.items()):
        out.kv(f"expect[{label},{name}]", v)
    return 0


# wiring -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="asynchyper", description="Asynchronous hyperproperty workbench.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--format", choices=("kv", "text", "dot"), default="kv")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", help="parse and pretty-print a formula")
    _add_formula_args(s, named=True)
    s.set_defaults(run=cmd_parse)

    s = sub.add_parser("eval", help="evaluate a sentence on a trace file")
    _add_formula_args(s, named=True)
    s.add_argument("-t", "--traces", help="trace file")
    s.add_argument("--finite-trace", help="file with one finite word (FO_f[<,+])")
    s.add_argument("--mode", choices=("lasso", "finite"), default="lasso")
    s.add_argument("--finite", dest="mode", action="store_const", const="finite",
                   help="same as --mode finite")
    s.add_argument("--backend", choices=("nawa", "oracle"), default="nawa")
    s.add_argument("--block-bound", type=int, default=3)
    s.add_argument("--position-bound", "--bound", dest="position_bound", type=int)
    s.add_argument("--so-bound", type=int, default=0)
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("mc", help="bounded model checking of a Kripke structure")
    _add_formula_args(s, named=True)
    s.add_argument("-k", "--kripke", required=True, help="Kripke file")
    s.add_argument("--max-prefix", type=int, default=2)
    s.add_argument("--max-period", type=int, default=3)
    s.add_argument("--sharp", action="store_true",
                   help="check K_# against the A-HyperLTL embedding of the sentence")
    s.set_defaults(run=cmd_mc)

    s = sub.add_parser("automaton", help="build the NAWA of an E body")
    _add_formula_args(s)
    s.add_argument("--vars", help="comma-separated tape order")
    s.add_argument("--construction", choices=("atoms", "tableau"), default="atoms")
    s.add_argument("--emit", choices=("stats", "dot"), default="stats")
    s.set_defaults(run=cmd_automaton)

    s = sub.add_parser("translate", help="run a logic translation")
    s.add_argument("--from", dest="source", required=True, choices=_FROM)
    s.add_argument("--to", dest="target", required=True, choices=_TO)
    _add_formula_args(s)
    s.add_argument("--vars", help="variable order for chltl->foplus")
    s.add_argument("--k", "-k", dest="k", type=int, help="code width for s1se->s1s")
    s.add_argument("--experimental-past", action="store_true")
    s.set_defaults(run=cmd_translate)

    s = sub.add_parser("reduce", help="counter-machine reductions")
    s.add_argument("-m", "--machine", required=True, help="machine file")
    s.add_argument("--target", choices=("ahyperltl", "fragmentU"), required=True)
    s.add_argument("--emit", choices=("formula", "kripke", "witness"), default="formula")
    s.add_argument("--out", help="write formula, Kripke structure and witness files here")
    s.add_argument("--max-length", type=int, default=8)
    s.add_argument("--counter-bound", type=int)
    s.add_argument("--literal", action="store_true", help="literal length conjunct (fragmentU)")
    s.set_defaults(run=cmd_reduce)

    s = sub.add_parser("fixtures", help="witness families and named formulas")
    s.add_argument("--family", help="family name; omit to list what is available")
    s.add_argument("--formula", dest="formula_name", help="print a named formula")
    s.add_argument("--n", "-n", dest="n", type=int, default=1)
    s.add_argument("--k", "-k", dest="k", type=int)
    s.add_argument("--out", help="write trace and formula files here")
    s.set_defaults(run=cmd_fixtures)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        for name in ("max_prefix", "max_period", "block_bound", "position_bound", "max_length",
                     "n", "k", "counter_bound"):
            _positive(name.replace("_", "-"), getattr(args, name, None))
        _positive("so-bound", getattr(args, "so_bound", None), allow_zero=True)
        if args.format == "dot" and args.command not in ("automaton", "reduce"):
            raise UsageError("--format dot applies to automaton and reduce only")
        return args.run(args, Out("kv" if args.format == "dot" else args.format, stdout))
    except UsageError as e:
        print(f"asynchyper: error: {e}", file=stderr)
        return 2
    except ParseError as e:
        print(f"asynchyper: parse error: {e}", file=stderr)
        return 2
    except (TraceError, DialectError, ValueError) as e:
        print(f"asynchyper: error: {e}", file=stderr)
        return 2
    except KeyError as e:
        print(f"asynchyper: error: {e.args[0] if e.args else e}", file=stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return 0 if e.code in (0, None) else 2


def main() -> None:
    sys.exit(run())

"""Command line entry point.

Subcommands: check, eval, estimate, falsify, smoke, simulate. Every random
quantity is derived from ``--seed`` (or ``SDL_SEED``), so equal flags give
byte-identical output.

Exit codes: 0 success, 1 parse, usage or name errors, 2 rejected proof or
falsified claim, 3 accepted proof with open obligations (without
``--allow-obligations``).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import syntax as S
from .analysis import sig
from .parser import Declaration, ParseError, load_sdl
from .printer import fmt_number, print_node
from .probability import estimate, parse_initial
from .semantics import (
    ChoiceSequence,
    FormulaPredicate,
    Interpretation,
    ProgramDef,
    TermFunction,
    Valuation,
    eval_formula,
    eval_term,
    param_names,
    run_program,
    simulate,
)

EXIT_OK, EXIT_PARSE, EXIT_REJECTED, EXIT_OBLIGATIONS = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    step: float = 1e-2
    choice_bound: int = 8
    star_bound: int = 3
    samples: int = 10_000
    times: tuple[float, ...] = (1.0,)
    level: float = 0.95
    eps: float = 0.01
    allow_obligations: bool = False
    csv: Optional[str] = None

    def __post_init__(self):
        if self.step <= 0 or not math.isfinite(self.step):
            raise UsageError("--step must be a positive real")
        for flag, v in (("--choice-bound", self.choice_bound), ("--star-bound", self.star_bound), ("--samples", self.samples)):
            if v < 1:
                raise UsageError(f"{flag} must be positive")
        if not self.times or any(t < 0 or not math.isfinite(t) for t in self.times):
            raise UsageError("--times must list finite non-negative reals")
        if not 0 < self.level < 1:
            raise UsageError("--level must lie strictly between 0 and 1")
        if self.eps < 0:
            raise UsageError("--eps must be non-negative")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad stop-time list {text!r}") from None


def _common(p: argparse.ArgumentParser, samples: int = 10_000):
    p.add_argument("--seed", type=int, default=None, help="master seed (default: $SDL_SEED or 0)")
    p.add_argument("--step", type=float, default=1e-2, help="Euler-Maruyama step")
    p.add_argument("--choice-bound", type=int, default=8)
    p.add_argument("--star-bound", type=int, default=3)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--times", type=_times, default=(1.0,), help="stop times, e.g. 1.0,1.41,2.0")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--eps", type=float, default=0.01)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="stochdl", description=__doc__.split("\n\n")[0])
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="check a .sdlp proof script")
    p.add_argument("proof")
    p.add_argument("--lemmas", help="directory of NAME.sdlp lemma scripts (default: the script's directory)")
    p.add_argument("--allow-obligations", action="store_true")

    p = sub.add_parser("eval", help="evaluate a declaration from a .sdl file")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--v", default="", help="valuation, e.g. x=1,y=-2")
    p.add_argument("--choices", default="", help="choice bits for programs, e.g. 0110")
    _common(p)

    p = sub.add_parser("estimate", help="estimate P(formula) with a Wilson interval")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--init", default="", help="initial distribution, e.g. x=0,y=U(0,1)")
    _common(p)

    p = sub.add_parser("falsify", help="search for a counterexample to pathwise validity")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--groups", type=int, default=20, help="number of generated interpretations")
    p.add_argument("--superset", action="store_true", help="also test each stop-time set with two extra points")
    _common(p, samples=1000)

    p = sub.add_parser("smoke", help="run the axiom smoke suite and print TSV")
    p.add_argument("--mutants", action="store_true", help="also run the mutation control")
    p.add_argument("--out", help="write the TSV here as well")
    _common(p, samples=1000)

    p = sub.add_parser("simulate", help="run a program and record SDE grid points")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--v", default="")
    p.add_argument("--choices", default="")
    p.add_argument("--csv", help="CSV output path (default: stdout)")
    _common(p)
    return top


def _seed(args) -> int:
    seed = getattr(args, "seed", None)
    if seed is not None:
        return seed
    env = os.environ.get("SDL_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"SDL_SEED must be an integer, got {env!r}") from None


def config_from(args) -> RunConfig:
    return RunConfig(
        seed=_seed(args),
        step=getattr(args, "step", 1e-2),
        choice_bound=getattr(args, "choice_bound", 8),
        star_bound=getattr(args, "star_bound", 3),
        samples=getattr(args, "samples", 10_000),
        times=tuple(getattr(args, "times", (1.0,))),
        level=getattr(args, "level", 0.95),
        eps=getattr(args, "eps", 0.01),
        allow_obligations=getattr(args, "allow_obligations", False),
        csv=getattr(args, "csv", None),
    )


# ------------------------------------------------------------ helpers


def _valuation_checked(text: str) -> Valuation:
    try:
        spec = parse_initial(text)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if any(not isinstance(v, float) for v in spec.entries.values()):
        raise UsageError("--v takes point values only; use estimate --init for distributions")
    return Valuation(dict(spec.entries))


def _choices(text: str) -> ChoiceSequence:
    if any(c not in "01" for c in text):
        raise UsageError("--choices must be a string of 0 and 1")
    return ChoiceSequence(tuple(int(c) for c in text))


def _declaration(path: str, name: str) -> tuple[Declaration, dict[str, Declaration]]:
    decls = load_sdl(path)
    if name not in decls:
        raise UsageError(f"no declaration named {name!r} in {path}")
    return decls[name], decls


def interpretation(decls: dict[str, Declaration], node: S.Node, cfg: RunConfig) -> Interpretation:
    """Interpret the symbols of ``node`` by same-named declarations.

    ``term f = ...`` gives f@d the body with parameters q1..qd, ``form p``
    likewise for predicates and ``prog a`` gives G@a. Symbols without a
    declaration stay uninterpreted (⊥, ⊘, crash)."""
    functions, predicates, programs = {}, {}, {}
    for s in sig(node):
        d = decls.get(s[1])
        if d is None:
            continue
        if s[0] == "f" and d.kind == "term":
            functions[(s[1], s[2])] = TermFunction(param_names(s[2]), d.node)
        elif s[0] == "p" and d.kind == "form":
            predicates[(s[1], s[2])] = FormulaPredicate(param_names(s[2]), d.node)
        elif s[0] == "g" and d.kind == "prog":
            programs[s[1]] = ProgramDef(d.node)
    return Interpretation(
        functions,
        predicates,
        programs,
        times=cfg.times,
        step=cfg.step,
        choice_bound=cfg.choice_bound,
        star_bound=cfg.star_bound,
    )


def show_real(v: float) -> str:
    return "BOT_R (undefined)" if math.isnan(v) else fmt_number(v)


# ----------------------------------------------------------- commands


def cmd_check(args, cfg: RunConfig, out) -> int:
    from .kernel import ScriptError, check_file

    try:
        verdict = check_file(args.proof, args.lemmas)
    except (ScriptError, ParseError) as e:
        out.write(f"PARSE ERROR {e}\n")
        return EXIT_PARSE
    out.write(verdict.report())
    if not verdict.accepted:
        if verdict.clash is not None:
            out.write(f"clash witness: {verdict.clash}\n")
        return EXIT_REJECTED
    if verdict.obligations and not cfg.allow_obligations:
        out.write("open obligations remain; pass --allow-obligations to accept them\n")
        return EXIT_OBLIGATIONS
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig, out) -> int:
    decl, decls = _declaration(args.file, args.name)
    I = interpretation(decls, decl.node, cfg)
    v = _valuation_checked(args.v)
    if decl.kind == "term":
        out.write(show_real(eval_term(I, v, cfg.seed, decl.node)) + "\n")
    elif decl.kind == "form":
        res = eval_formula(I, v, cfg.seed, decl.node, cfg.choice_bound, cfg.star_bound)
        out.write(res.value.name + (" (truncated)" if res.truncated else "") + "\n")
    else:
        final, rest = run_program(I, v, cfg.seed, _choices(args.choices), decl.node)
        out.write(f"{final} (consumed {rest.pos} choice bits)\n")
    return EXIT_OK


def cmd_estimate(args, cfg: RunConfig, out) -> int:
    decl, decls = _declaration(args.file, args.name)
    if decl.kind != "form":
        raise UsageError(f"{args.name} is a {decl.kind}, estimate needs a formula")
    try:
        initial = parse_initial(args.init)
    except ValueError as e:
        raise UsageError(str(e)) from None
    I = interpretation(decls, decl.node, cfg)
    est = estimate(I, initial, decl.node, cfg.samples, cfg.seed, cfg.level, cfg.choice_bound, cfg.star_bound)
    out.write(f"{est}\n")
    return EXIT_OK


def cmd_falsify(args, cfg: RunConfig, out) -> int:
    from .harness import InterpGenerator, falsify

    decl, _ = _declaration(args.file, args.name)
    if decl.kind != "form":
        raise UsageError(f"{args.name} is a {decl.kind}, falsify needs a formula")
    gen = InterpGenerator(sig(decl.node), step=cfg.step, choice_bound=cfg.choice_bound, star_bound=cfg.star_bound)
    rep = falsify(
        decl.node,
        cfg.samples,
        max(1, args.groups),
        cfg.seed,
        cfg.choice_bound,
        cfg.star_bound,
        generator=gen,
        superset=args.superset,
    )
    out.write(str(rep) + "\n")
    return EXIT_REJECTED if rep.falsified else EXIT_OK


def cmd_smoke(args, cfg: RunConfig, out) -> int:
    from .harness import mutation_check, smoke_axioms

    summary = smoke_axioms(trials=cfg.samples, seed=cfg.seed, choice_bound=cfg.choice_bound)
    text = summary.tsv()
    out.write(text)
    if args.out:
        Path(args.out).write_text(text)
    status = EXIT_OK
    for row in summary.failed():
        out.write(f"# FAIL {row.id}: {row.counterexample}\n")
        status = EXIT_REJECTED
    if args.mutants:
        for name, row in mutation_check(seed=cfg.seed).items():
            out.write(f"mutant\t{name}\t{'detected' if row.failures else 'MISSED'}\n")
            if not row.failures:
                status = EXIT_REJECTED
    return status


def cmd_simulate(args, cfg: RunConfig, out) -> int:
    decl, decls = _declaration(args.file, args.name)
    if decl.kind != "prog":
        raise UsageError(f"{args.name} is a {decl.kind}, simulate needs a program")
    I = interpretation(decls, decl.node, cfg)
    rows, final = simulate(I, _valuation_checked(args.v), cfg.seed, decl.node, _choices(args.choices))
    names = sorted({k for _, state, _ in rows for k in state})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *names, "status"])
    for t, state, status in rows:
        w.writerow([repr(float(t)), *(repr(state[k]) if k in state and not math.isnan(state[k]) else "" for k in names), status.name.lower()])
    if cfg.csv:
        Path(cfg.csv).write_text(buf.getvalue())
        out.write(f"wrote {len(rows)} rows to {cfg.csv}\n")
    else:
        out.write(buf.getvalue())
    out.write(f"final {final}\n")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "eval": cmd_eval,
    "estimate": cmd_estimate,
    "falsify": cmd_falsify,
    "smoke": cmd_smoke,
    "simulate": cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_PARSE
    try:
        cfg = config_from(args)
        return COMMANDS[args.command](args, cfg, out)
    except (UsageError, ParseError, OSError) as e:
        sys.stderr.write(f"stochdl: {e}\n")
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Randomized falsification and the axiom smoke suite.

A trial draws an interpretation (from a seed), a valuation and a path
seed, and evaluates the formula with the modal supremum searched over all
choice prefixes up to the bound. Any result other than TOP is a
counterexample; finding none is evidence, not proof.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import syntax as S
from .kernel.axioms import PATHWISE, AxiomSchema, _defined, _equal, axiom_catalog, lookup
from .kernel.rules import rename_schema
from .parser import parse_formula
from .printer import print_node
from .probability import InitialSpec, check_randomization
from .semantics import (
    FormulaPredicate,
    Interpretation,
    ProgramDef,
    PyPredicate,
    TermFunction,
    Valuation,
    eval_formula_batch,
    param_names,
)
from .spade import PAnd, PAtom, PCmp, PConst, PImplies, PNot, POr, PPlus, PTimes, atoms
from .substitution import apply, apply_prob, parse_substitution, symbol_kinds
from .syntax import TruthValue

POOL = ("x", "y", "z", "w")


# ---------------------------------------------------------- generation


def _dyadic(rng, lo=-2.0, hi=2.0, denom=4) -> float:
    return float(rng.integers(int(lo * denom), int(hi * denom) + 1)) / denom


def _poly(rng, params: Sequence[str], degree: int = 3) -> S.Term:
    """Sum of up to three monomials with dyadic coefficients."""
    out: Optional[S.Term] = None
    for _ in range(int(rng.integers(1, 4))):
        t: S.Term = S.Const(_dyadic(rng))
        for _ in range(int(rng.integers(0, degree + 1)) if params else 0):
            t = S.Times(t, S.Var(params[int(rng.integers(len(params)))]))
        out = t if out is None else S.Plus(out, t)
    return out


@dataclass
class InterpGenerator:
    """Seeded interpretations for a signature.

    Function symbols get polynomials of degree at most 3, predicate symbols
    threshold predicates (arity 0: a constant truth value), program symbols
    straight-line programs over ``variables`` whose only nondeterminism is
    binary choices between assignments, so each consumes a fixed number of
    choice bits. ``times`` holds at most ``max_times`` points of [0, 10].
    """

    signature: frozenset = frozenset()
    variables: tuple[str, ...] = POOL[:3]
    max_times: int = 6
    times_size: Optional[int] = None
    horizon: float = 10.0
    step: float = 1e-2
    choice_bound: int = 8
    star_bound: int = 3

    def generate(self, seed: int) -> tuple[Interpretation, str]:
        rng = np.random.default_rng([seed, 7])
        functions, predicates, programs, notes = {}, {}, {}, []
        for sym in sorted(self.signature, key=repr):
            if sym[0] == "f":
                _, name, d = sym
                body = _poly(rng, param_names(d))
                functions[(name, d)] = TermFunction(param_names(d), body)
                notes.append(f"{name}@{d} = {print_node(body)}")
            elif sym[0] == "p":
                _, name, d = sym
                if d == 0:
                    code = int(rng.integers(0, 3))
                    predicates[(name, 0)] = PyPredicate(lambda c=code: np.int8(c), 0)
                    notes.append(f"{name}@0 = {TruthValue(code).name}")
                else:
                    body = S.Geq(_poly(rng, param_names(d)), S.Const(_dyadic(rng)))
                    predicates[(name, d)] = FormulaPredicate(param_names(d), body)
                    notes.append(f"{name}@{d} = {print_node(body)}")
            else:
                prog, bits = self.straight_line(rng)
                programs[sym[1]] = ProgramDef(prog)
                notes.append(f"G@{sym[1]} = {print_node(prog)} ({bits} bits)")
        k = self.times_size if self.times_size is not None else int(rng.integers(1, self.max_times + 1))
        times = tuple(sorted(float(t) for t in np.round(rng.uniform(0.0, self.horizon, k), 3)))
        notes.append("times = " + ",".join(repr(t) for t in times))
        interp = Interpretation(
            functions,
            predicates,
            programs,
            times=times,
            step=self.step,
            choice_bound=self.choice_bound,
            star_bound=self.star_bound,
        )
        return interp, "; ".join(notes)

    def straight_line(self, rng) -> tuple[S.Program, int]:
        vs = self.variables

        def assign():
            return S.Assign(vs[int(rng.integers(len(vs)))], _poly(rng, vs, 2))

        prog: Optional[S.Program] = None
        bits = 0
        for _ in range(int(rng.integers(1, 4))):
            if rng.random() < 0.3:
                stmt: S.Program = S.Choice(assign(), assign())
                bits += 1
            else:
                stmt = assign()
            prog = stmt if prog is None else S.Seq(prog, stmt)
        return prog, bits


def _variables(f) -> tuple[list[str], list[str]]:
    """Base variables and all variable keys mentioned by ``f``."""
    keys: set[str] = set()
    nodes = [f] if isinstance(f, S.Node) else list(atoms(f))
    for n in nodes:
        for x in S.walk(n):
            if isinstance(x, S.Var):
                keys.add(x.name)
            elif isinstance(x, (S.Assign, S.Random)):
                keys.add(x.var)
            elif isinstance(x, S.SDE):
                keys.update(x.vars)
            elif isinstance(x, S.DB):
                keys.add(x.index)
    bases = sorted({k.split("_")[0] for k in keys if not k.startswith("•")})
    return bases, sorted(keys)


def sample_valuations(rng, f, n: int, mode: str = "default") -> list[Valuation]:
    """Random valuations for ``f``.

    ``default`` leaves variables undefined with probability 0.15 and mixes
    dyadic and Gaussian values; ``dyadic`` only uses multiples of 1/8;
    ``full`` defines every base variable together with its time and
    Brownian differentials (indices over the formula's own variables)."""
    bases, keys = _variables(f)
    bases = sorted(set(bases) | set(POOL))
    own = sorted({k.split("_")[0] for k in keys}) or ["x"]
    out = []
    for _ in range(n):
        vals: dict[str, float] = {}
        for b in bases:
            names = [b, S.time_var(b)] + [S.brown_var(b, j) for j in own]
            for i, name in enumerate(names):
                if mode == "full":
                    vals[name] = float(rng.normal(0.0, 1.5))
                    continue
                p_def = 0.9 if mode == "dyadic" else (0.85 if i == 0 else 0.5)
                if rng.random() >= p_def:
                    continue
                if mode == "dyadic" or rng.random() < 0.5:
                    vals[name] = _dyadic(rng, -2.0, 2.0, 8)
                else:
                    vals[name] = float(rng.normal(0.0, 1.5))
        for k in keys:
            if k not in vals and S.is_variable_name(k) and rng.random() < (1.0 if mode == "full" else 0.5):
                vals[k] = _dyadic(rng, -2.0, 2.0, 8) if mode == "dyadic" else float(rng.normal(0.0, 1.5))
        out.append(Valuation(vals))
    return out


# --------------------------------------------------------- falsification


@dataclass(frozen=True)
class Counterexample:
    group: int
    interp_seed: int
    interpretation: str
    times: tuple[float, ...]
    valuation: Valuation
    path_seed: int
    value: TruthValue
    truncated: bool

    def __str__(self) -> str:
        flag = " (truncated)" if self.truncated else ""
        return (
            f"value {self.value.name}{flag} at v = {self.valuation}, path seed {self.path_seed}, "
            f"I = [{self.interpretation}]"
        )


@dataclass
class FalsificationReport:
    formula: S.Formula
    samples: int
    counterexample: Optional[Counterexample]
    truncation_rate: float
    times_used: list[tuple[float, ...]] = field(default_factory=list)
    failures: int = 0
    generator: Optional[InterpGenerator] = field(default=None, repr=False)
    choice_bound: int = 8
    star_bound: int = 3
    eq_tol: float = 0.0

    @property
    def falsified(self) -> bool:
        return self.counterexample is not None

    def __str__(self) -> str:
        head = f"{print_node(self.formula)}: {self.samples} samples, {self.failures} non-TOP"
        head += f", truncation rate {self.truncation_rate:.4f}"
        if self.counterexample is None:
            return head + ", no counterexample"
        return head + f"\n  counterexample: {self.counterexample}"


def _seeds(seed: int, count: int, stream: int) -> np.ndarray:
    return np.random.default_rng([seed, stream]).integers(0, 2**62, count, dtype=np.int64)


def falsify(
    phi: S.Formula,
    trials: int = 1000,
    groups: int = 20,
    seed: int = 0,
    choice_bound: int = 8,
    star_bound: int = 3,
    generator: Optional[InterpGenerator] = None,
    mode: str = "default",
    eq_tol: float = 0.0,
    superset: bool = False,
    stop_at_first: bool = False,
) -> FalsificationReport:
    """Search for a non-TOP evaluation of ``phi``.

    ``trials`` samples are split over ``groups`` generated interpretations.
    With ``superset`` each group is evaluated again under its stop times
    plus two extra points, since validity is claimed for all supersets."""
    from .analysis import sig

    phi = S.desugar(phi)
    gen = generator or InterpGenerator(sig(phi))
    if not gen.signature and sig(phi):
        gen = dataclasses.replace(gen, signature=sig(phi))
    per = max(1, trials // groups)
    interp_seeds = _seeds(seed, groups, 1)
    samples = failures = truncated = 0
    first: Optional[Counterexample] = None
    used: list[tuple[float, ...]] = []
    for g in range(groups):
        interp, desc = gen.generate(int(interp_seeds[g]))
        rng = np.random.default_rng([seed, 2, g])
        vals = sample_valuations(rng, phi, per, mode)
        paths = [int(s) for s in rng.integers(0, 2**62, per, dtype=np.int64)]
        variants = [interp]
        if superset:
            extra = tuple(sorted(set(interp.times) | {float(t) for t in np.round(rng.uniform(0, gen.horizon, 2), 3)}))
            variants.append(interp.replace(times=extra))
        for I in variants:
            used.append(I.times)
            codes, trunc = eval_formula_batch(I, vals, paths, phi, choice_bound, star_bound, eq_tol)
            samples += per
            truncated += int(trunc.sum())
            bad = np.flatnonzero(codes != TruthValue.TOP)
            failures += bad.size
            if bad.size and first is None:
                i = int(bad[0])
                note = desc if I is interp else desc + " (superset times " + ",".join(map(repr, I.times)) + ")"
                first = Counterexample(
                    g, int(interp_seeds[g]), note, I.times, vals[i], paths[i], TruthValue(int(codes[i])), bool(trunc[i])
                )
        if first is not None and stop_at_first:
            break
    return FalsificationReport(
        phi,
        samples,
        first,
        truncated / samples if samples else 0.0,
        used,
        failures,
        gen,
        choice_bound,
        star_bound,
        eq_tol,
    )


def replay(report: FalsificationReport) -> Optional[TruthValue]:
    """Re-evaluate the recorded counterexample from its seeds."""
    c = report.counterexample
    if c is None:
        return None
    interp, _ = report.generator.generate(c.interp_seed)
    interp = interp.replace(times=c.times)
    codes, _ = eval_formula_batch(
        interp, [c.valuation], [c.path_seed], report.formula, report.choice_bound, report.star_bound, report.eq_tol
    )
    return TruthValue(int(codes[0]))


# --------------------------------------------------------- smoke suite

# Substitutions per axiom. Program replacements only write y and z while
# formula replacements read x and w, so every instance is admissible; w is
# often undefined, which exercises indeterminate values.
_F3 = [
    "phi1@0 -> x >= 0 ; phi2@0 -> w >= x ; phi3@0 -> <fail> x >= 0",
    "phi1@0 -> sure(x * x >= 2) ; phi2@0 -> <y := 1 ++ fail> x >= 0 ; phi3@0 -> !(w >= 1)",
    "phi1@0 -> [y := 2 ++ fail] x * x >= 1 ; phi2@0 -> x >= 0 & w >= 0 ; phi3@0 -> x * w >= 1",
]
_F1 = [s.replace("phi1@0", "phi@0").split(" ; ")[0] for s in _F3]
_PROGS = [
    "G@a -> y := x * x ; G@b -> fail ; phi@0 -> x >= 0",
    "G@a -> (y := 1 ++ fail) ; G@b -> z := * ; phi@0 -> w >= x",
    "G@a -> (if x >= 0 then y := 1 else fail) ; G@b -> (y := 2 ++ z := 3) ; phi@0 -> sure(x >= 1)",
]
_SAT = [
    "G@a -> y := 1 ; phi@0 -> x >= 0",
    "G@a -> (y := 1 ++ fail) ; phi@0 -> w >= x",
    "G@a -> z := * ; phi@0 -> <fail> x >= 0",
    "G@a -> fail ; phi@0 -> x * x >= 1",
]
_FG = [
    "f@2 -> o1 * o2 ; g@2 -> o1 + 3 * o2",
    "f@2 -> o1 * o1 * o2 ; g@2 -> 2",
    "f@2 -> 0.5 * o1 ; g@2 -> o2 * o2 * o2 + -1 * o1",
]
_FGH = [
    "f@0 -> x ; g@0 -> y ; h@0 -> z",
    "f@0 -> x * y ; g@0 -> 0.5 ; h@0 -> y + w",
    "f@0 -> x * x * x ; g@0 -> -1 * y ; h@0 -> 3",
]
_SDE_FG = [
    "f@1 -> 1 ; g@1 -> 0 ; p@1 -> o1 <= 3",
    "f@1 -> -0.5 * o1 ; g@1 -> 0.2 ; p@1 -> o1 * o1 <= 9",
    "f@1 -> 0.3 ; g@1 -> 0.1 * o1 ; p@1 -> o1 >= -2",
]
_PROB1 = ["phi@0 -> x >= 0", "phi@0 -> <y := 1 ++ fail> w >= x", "phi@0 -> [y := 2 ++ fail] x * x >= 1"]

Instance = tuple[str, Mapping[str, str]]  # substitution text, renaming


def _plain(texts: Iterable[str]) -> list[Instance]:
    return [(t, {}) for t in texts]


def default_suites() -> dict[str, list[Instance]]:
    s: dict[str, list[Instance]] = {}
    for ident in ("id", "dne", "sure-em", "sure-idem", "sure-t", "and-idem"):
        s[ident] = _plain(_F1)
    for ident in ("hoe-sym", "hoe-neg", "and-comm", "and-elim", "sure-intro", "sure-and"):
        s[ident] = _plain(";".join(t.split(";")[:2]) for t in _F3)
    s["and-assoc"] = _plain(_F3)
    s["sure-neg"] = _plain(_F1)
    s["dt-const"] = _plain(["c@0 -> 3", "c@0 -> 0.5 * 4", "c@0 -> -2 + 1"])
    s["dB-const"] = [("c@0 -> 3", {}), ("c@0 -> 0.5 * 4", {"i": "x"}), ("c@0 -> -2 + 1", {"i": "y"})]
    s["dt-var"] = [("", {}), ("", {"x": "y"}), ("", {"x": "z"})]
    s["dB-var"] = [("", {"i": "y"}), ("", {"i": "z"}), ("", {"x": "y", "i": "z"})]
    for ident in ("dt-plus", "dB-plus", "dt-times", "dB-times"):
        s[ident] = _plain(_FG)
    s["term-eq"] = _plain(
        [
            "f@0 -> x * x ; g@0 -> x * x + 0 * y ; p@1 -> o1 >= 1",
            "f@0 -> x ; g@0 -> 1 ; p@1 -> o1 * o1 >= o1",
            "f@0 -> x + y ; g@0 -> y + x ; p@1 -> <fail> o1 >= 0",
        ]
    )
    for ident in (
        "rcf-plus-comm",
        "rcf-plus-assoc",
        "rcf-plus-zero",
        "rcf-plus-inv",
        "rcf-times-comm",
        "rcf-times-assoc",
        "rcf-times-one",
        "rcf-distrib",
        "rcf-refl",
        "rcf-trans",
        "rcf-total",
        "rcf-plus-mono",
        "rcf-times-pos",
    ):
        s[ident] = _plain(_FGH)
    s["rcf-one-pos"] = _plain(["", "", ""])
    pg = _plain(_PROGS)
    for ident in ("skip-left", "skip-right", "fail-seq", "choice", "compose"):
        s[ident] = pg
    s["skip"] = _plain(_F1)
    s["fail"] = _plain(_F1)
    s["distrib"] = _plain(
        [
            "G@a -> y := x * x ; phi1@0 -> x >= 0 ; phi2@0 -> w >= x",
            "G@a -> (y := 1 ++ fail) ; phi1@0 -> sure(x >= 1) ; phi2@0 -> x < 0",
            "G@a -> z := * ; phi1@0 -> <fail> x >= 0 ; phi2@0 -> w >= 0",
        ]
    )
    s["cond"] = _plain(
        [
            "G@a -> y := x * x ; G@b -> fail ; phi1@0 -> x >= 0 ; phi@0 -> w >= x",
            "G@a -> (y := 1 ++ fail) ; G@b -> z := * ; phi1@0 -> w >= 0 ; phi@0 -> x >= 0",
            "G@a -> fail ; G@b -> y := 2 ; phi1@0 -> x * x >= 2 ; phi@0 -> sure(x >= 1)",
        ]
    )
    s["iter-unfold"] = _plain(_SAT)
    s["iter-induct"] = _plain(_SAT)
    s["assign"] = [
        ("f@0 -> y * y ; p@1 -> o1 >= 1", {}),
        ("f@0 -> y + w ; p@1 -> o1 * o1 <= 2", {"x": "z"}),
        ("f@0 -> 3 ; p@1 -> <fail> o1 >= 0", {}),
    ]
    sde = _plain(_SDE_FG)
    for ident in ("dw", "de-t", "de-B"):
        s[ident] = sde
    s["dc"] = _plain(
        [
            "f@1 -> 1 ; g@1 -> 0 ; p1@1 -> o1 <= 3 ; p2@1 -> o1 >= 0 ; p3@1 -> o1 <= 2",
            "f@1 -> -0.5 * o1 ; g@1 -> 0.2 ; p1@1 -> o1 * o1 <= 9 ; p2@1 -> o1 <= 1 ; p3@1 -> o1 >= 0",
            "f@1 -> 0.3 ; g@1 -> 0.1 * o1 ; p1@1 -> o1 >= -2 ; p2@1 -> o1 >= -1 ; p3@1 -> o1 <= 1",
        ]
    )
    s["di"] = _plain(
        [
            "f@1 -> 1 ; g@1 -> 0 ; p@1 -> o1 <= 3 ; h1@1 -> o1 ; h2@1 -> 0",
            "f@1 -> -0.5 * o1 ; g@1 -> 0 ; p@1 -> o1 >= 0 ; h1@1 -> o1 ; h2@1 -> 0",
            "f@1 -> 0.3 ; g@1 -> 0 ; p@1 -> o1 <= 5 ; h1@1 -> o1 * o1 ; h2@1 -> 0",
        ]
    )
    s["prob-nonneg"] = _plain(_PROB1)
    s["prob-sure"] = _plain(_PROB1)
    s["prob-neg"] = _plain(_PROB1)
    s["prob-mono"] = _plain(
        [
            "phi1@0 -> x >= 0 ; phi2@0 -> w >= x",
            "phi1@0 -> <y := 1 ++ fail> x >= 1 ; phi2@0 -> x < 0",
            "phi1@0 -> [y := 2 ++ fail] x * x >= 1 ; phi2@0 -> <fail> x >= 0",
        ]
    )
    s["rand-int"] = _plain(
        [
            "p@1 -> o1 >= 0.5 ; c@0 -> 0.5",
            "p@1 -> o1 * o1 <= 0.25 ; c@0 -> 0.5",
            "p@1 -> o1 >= 0.9 | o1 <= 0.1 ; c@0 -> 0.2",
        ]
    )
    return s


# Mutants: schema texts with one operator changed, checked with the suite
# of the axiom they come from.
MUTANTS: list[tuple[str, str, str]] = [
    ("and-elim-or", "and-elim", "phi1@0 | phi2@0 -> phi1@0"),
    ("sure-t-converse", "sure-t", "phi@0 -> sure(phi@0)"),
    ("choice-and", "choice", "<G@a ++ G@b> phi@0 <-> <G@a> phi@0 & <G@b> phi@0"),
    ("dne-single", "dne", "!phi@0 <-> phi@0"),
    ("sure-neg-no-ind", "sure-neg", "!sure(phi@0) <-> !phi@0"),
    (
        "cond-swapped",
        "cond",
        "<if phi1@0 then G@b else G@a> phi@0 <->"
        " (phi1@0 & (ind(phi1@0) | <G@a> phi@0)) | (!phi1@0 & (ind(phi1@0) | <G@b> phi@0))",
    ),
    ("sure-and-dropped", "sure-and", "sure(phi1@0 & phi2@0) <-> phi1@0 & sure(phi2@0)"),
    ("iter-unfold-no-base", "iter-unfold", "<G@a*> phi@0 <-> <G@a; G@a*> phi@0"),
    (
        "dt-times-no-covariation",
        "dt-times",
        _equal("d/dt(f@2(x, y) * g@2(x, y)) = g@2(x, y) * d/dt(f@2(x, y)) + f@2(x, y) * d/dt(g@2(x, y))"),
    ),
    (
        "rcf-plus-mono-flipped",
        "rcf-plus-mono",
        _defined("f@0 >= g@0 -> f@0 + h@0 <= g@0 + h@0", "f@0", "g@0", "h@0"),
    ),
]


@dataclass
class SmokeRow:
    id: str
    trials: int
    failures: int
    quarantined: bool
    instances: int
    counterexample: Optional[str] = None

    def tsv(self) -> str:
        return f"{self.id}\t{self.trials}\t{self.failures}\t{'yes' if self.quarantined else 'no'}"


@dataclass
class SmokeSummary:
    rows: list[SmokeRow]

    def tsv(self) -> str:
        lines = ["axiom\ttrials\tfailures\tquarantine"] + [r.tsv() for r in self.rows]
        return "\n".join(lines) + "\n"

    def failed(self, include_quarantined: bool = False) -> list[SmokeRow]:
        return [r for r in self.rows if r.failures and (include_quarantined or not r.quarantined)]


def _concrete(schema_kind: str, formula, text: str, rename: Mapping[str, str]):
    """Instantiate a schema formula with a suite entry."""
    kind = schema_kind
    f = S.desugar(formula) if kind == PATHWISE else formula
    f = rename_schema(f, rename)
    if not text.strip():
        return f
    if kind == PATHWISE:
        kinds = symbol_kinds(f)
    else:
        kinds = {}
        for a in atoms(f):
            kinds.update(symbol_kinds(a))
    sigma = parse_substitution("subst { " + text + " }", kinds)
    from .analysis import admissible

    for part in [f] if kind == PATHWISE else list(atoms(f)):
        verdict = admissible(sigma, part)
        if not verdict:
            raise ValueError(f"suite entry {text!r} is inadmissible: {verdict}")
    return S.desugar(apply(sigma, f)) if kind == PATHWISE else apply_prob(sigma, f)


def _mode(schema: AxiomSchema) -> str:
    return {"dyadic": "dyadic", "full": "full"}.get(schema.sampling, "default")


def _eq_tol(schema: AxiomSchema) -> float:
    differential = any(isinstance(n, (S.Dt, S.DB)) for n in _nodes(schema.formula))
    return 1e-9 if differential else 0.0


def _nodes(f):
    if isinstance(f, S.Node):
        yield from S.walk(f)
    else:
        for a in atoms(f):
            yield from S.walk(a)


def _exact_spade(f, values: Mapping) -> bool:
    """Two-valued truth of ``f`` with every ``P(phi)`` replaced by an
    exact rational from ``values``."""

    def term(t) -> Fraction:
        match t:
            case PConst(v):
                return Fraction(repr(v))
            case PAtom(g):
                return values[g]
            case PPlus(a, b):
                return term(a) + term(b)
            case PTimes(a, b):
                return term(a) * term(b)
        raise TypeError(t)

    match f:
        case PCmp(op, a, b):
            x, y = term(a), term(b)
            return {">=": x >= y, "<=": x <= y, "=": x == y, "<": x < y, ">": x > y}[op]
        case PNot(a):
            return not _exact_spade(a, values)
        case PAnd(a, b):
            return _exact_spade(a, values) and _exact_spade(b, values)
        case POr(a, b):
            return _exact_spade(a, values) or _exact_spade(b, values)
        case PImplies(a, b):
            return (not _exact_spade(a, values)) or _exact_spade(b, values)
    raise TypeError(f)


def _check_prob(inst, trials, groups, seed, choice_bound, times_size, step) -> tuple[int, int, Optional[str]]:
    """Matched-sample check of a probability law.

    Each group gives every atom its TOP indicator per sample; the law must
    hold for each sample taken alone and for the group's empirical
    frequencies, so any probability measure argument applies exactly."""
    gen = InterpGenerator(times_size=times_size, choice_bound=choice_bound, step=step)
    per = max(1, trials // groups)
    forms = list(dict.fromkeys(atoms(inst)))
    failures = 0
    note = None
    for g in range(groups):
        interp, desc = gen.generate(int(_seeds(seed, groups, 1)[g]))
        rng = np.random.default_rng([seed, 2, g])
        vals = sample_valuations(rng, inst, per)
        paths = [int(s) for s in rng.integers(0, 2**62, per, dtype=np.int64)]
        tops = {}
        for f in forms:
            codes, _ = eval_formula_batch(interp, vals, paths, f, choice_bound)
            tops[f] = codes == TruthValue.TOP
        for i in range(per):
            if not _exact_spade(inst, {f: Fraction(int(tops[f][i])) for f in forms}):
                failures += 1
                if note is None:
                    note = f"sample v = {vals[i]}, path seed {paths[i]}"
        freq = {f: Fraction(int(tops[f].sum()), per) for f in forms}
        if not _exact_spade(inst, freq):
            failures += 1
            note = note or f"empirical frequencies of group {g}"
    return groups * per, failures, note


def _check_rand_int(inst, trials, seed) -> tuple[int, int, Optional[str]]:
    lhs_atom = inst.left.formula
    x = lhs_atom.program.var
    body = lhs_atom.body
    c = inst.right.value
    m = 20 if trials < 10_000 else 100
    res = check_randomization(Interpretation(), InitialSpec(), body, x, m=m, n=trials, eps=0.01, seed=seed)
    eps = 0.01
    ok = res.verdict.kind == "consistent" and res.lhs.lo - eps <= c <= res.lhs.hi + eps and res.rhs.lo - eps <= c <= res.rhs.hi + eps
    return trials, 0 if ok else 1, None if ok else str(res)


def _mutant_schema(base: AxiomSchema, text: str) -> AxiomSchema:
    return dataclasses.replace(base, text=text, formula=parse_formula(text), quarantined=False)


def smoke_axioms(
    catalog: Optional[Sequence[AxiomSchema]] = None,
    suites: Optional[Mapping[str, list[Instance]]] = None,
    trials: int = 1000,
    groups: int = 20,
    seed: int = 0,
    choice_bound: int = 8,
    times_size: int = 4,
    step: float = 0.05,
) -> SmokeSummary:
    """Falsify every axiom instance; failures of quarantined axioms are
    reported but expected. The SDE axioms hold for any Euler step, so a
    coarse ``step`` keeps the suite fast."""
    catalog = axiom_catalog() if catalog is None else catalog
    suites = default_suites() if suites is None else suites
    rows = []
    for k, schema in enumerate(catalog):
        entries = suites.get(schema.id)
        if not entries:
            raise ValueError(f"no substitution suite for axiom {schema.id}")
        total = fails = 0
        note = None
        for j, (text, rename) in enumerate(entries):
            inst = _concrete(schema.kind, schema.formula, text, rename)
            iseed = seed * 1_000_003 + k * 101 + j
            if schema.kind != PATHWISE:
                if schema.id == "rand-int":
                    n, bad, why = _check_rand_int(inst, max(trials, 1000), iseed)
                else:
                    n, bad, why = _check_prob(inst, trials, groups, iseed, choice_bound, times_size, step)
                total += n
                fails += bad
                note = note or why
                continue
            gen = InterpGenerator(times_size=times_size, choice_bound=choice_bound, step=step)
            rep = falsify(inst, trials, groups, iseed, choice_bound, generator=gen, mode=_mode(schema), eq_tol=_eq_tol(schema))
            total += rep.samples
            fails += rep.failures
            if rep.counterexample is not None and note is None:
                note = f"{print_node(inst)}: {rep.counterexample}"
        rows.append(SmokeRow(schema.id, total, fails, schema.quarantined, len(entries), note))
    return SmokeSummary(rows)


def mutation_check(trials: int = 200, groups: int = 10, seed: int = 0) -> dict[str, SmokeRow]:
    """Run the smoke suite on each mutant; a mutant is detected when it
    has at least one failure."""
    suites = default_suites()
    out = {}
    for name, base_id, text in MUTANTS:
        base = lookup(base_id)
        schema = dataclasses.replace(_mutant_schema(base, text), id=name)
        summary = smoke_axioms([schema], {name: suites[base_id]}, trials, groups, seed)
        out[name] = summary.rows[0]
    return out

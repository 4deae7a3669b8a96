"""Executable semantics: scalar entry points over the batched engine."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .. import syntax as S
from ..syntax import TruthValue
from . import engine
from .engine import Batch, ChoiceSource, Runtime
from .interpretation import (
    AdjointFunction,
    AdjointPredicate,
    FormulaPredicate,
    FunctionMeaning,
    Interpretation,
    PredicateMeaning,
    ProgramDef,
    ProgramMeaning,
    PyFunction,
    PyPredicate,
    TermFunction,
    param_names,
)
from .iota import solve_batch
from .paths import PathPool, SamplePath
from .values import ChoiceSequence, Status, TruthOutcome, Valuation, nat, tail

__all__ = [
    "AdjointFunction",
    "AdjointPredicate",
    "Batch",
    "ChoiceSequence",
    "FormulaPredicate",
    "FunctionMeaning",
    "Interpretation",
    "PathPool",
    "PredicateMeaning",
    "ProgramDef",
    "ProgramMeaning",
    "PyFunction",
    "PyPredicate",
    "Runtime",
    "SamplePath",
    "Status",
    "TermFunction",
    "TruthOutcome",
    "Valuation",
    "eval_formula",
    "eval_formula_batch",
    "eval_term",
    "eval_term_batch",
    "nat",
    "param_names",
    "run_program",
    "simulate",
    "solve_iota",
    "tail",
]


def _path(omega) -> SamplePath:
    return omega if isinstance(omega, SamplePath) else SamplePath(int(omega))


def _runtime(I: Interpretation, pool, bounded=True, choice_bound=None, star_bound=None, **kw) -> Runtime:
    return Runtime(
        I,
        pool,
        bounded=bounded,
        choice_bound=I.choice_bound if choice_bound is None else choice_bound,
        star_bound=I.star_bound if star_bound is None else star_bound,
        **kw,
    )


def _single(v: Valuation, draws: int = 0) -> Batch:
    b = Batch.from_valuations([v])
    b.draws[:] = draws
    return b


def eval_term(I: Interpretation, v: Valuation, omega, theta: S.Term) -> float:
    """Value of ``theta``; NaN stands for ⊥."""
    rt = _runtime(I, PathPool([_path(omega)]))
    return float(engine.term(rt, _single(v), S.desugar(theta))[0])


def solve_iota(I: Interpretation, body: S.Formula, d: int, i: int, v: Valuation, omega=0) -> float:
    """Coordinate ``i`` of the unique solution of ``body`` in its ``d``
    diamonds, or NaN. The diamonds are those of ``body``'s free tag."""
    tags = {n.tag for n in S.walk(body) if isinstance(n, S.Diamond)}
    tag = tags.pop() if len(tags) == 1 else 0
    node = S.Iota(i, d, body, tag)
    rt = _runtime(I, PathPool([_path(omega)]))
    return float(solve_batch(rt, _single(v), node)[0])


def run_program(
    I: Interpretation,
    v: Valuation,
    omega,
    C: ChoiceSequence,
    alpha: S.Program,
    draws: int = 0,
) -> tuple[Valuation, ChoiceSequence]:
    """Run ``alpha`` without enumeration caps. Returns the final valuation
    and the choice sequence advanced past the consumed bits."""
    rt = _runtime(I, PathPool([_path(omega)]), bounded=False)
    src = ChoiceSource(C.bits)
    out, cur, _ = engine.program(rt, _single(v, draws), np.array([C.pos], np.int64), src, S.desugar(alpha))
    return out.valuation(0), ChoiceSequence(C.bits, int(cur[0]))


def eval_formula(
    I: Interpretation,
    v: Valuation,
    omega,
    phi: S.Formula,
    choice_bound: Optional[int] = None,
    star_bound: Optional[int] = None,
) -> TruthOutcome:
    rt = _runtime(I, PathPool([_path(omega)]), choice_bound=choice_bound, star_bound=star_bound)
    codes, trunc = engine.formula(rt, _single(v), S.desugar(phi))
    return TruthOutcome(TruthValue(int(codes[0])), bool(trunc[0]))


def eval_formula_batch(
    I: Interpretation,
    valuations: Sequence[Valuation],
    seeds: Iterable[int],
    phi: S.Formula,
    choice_bound: Optional[int] = None,
    star_bound: Optional[int] = None,
    eq_tol: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Truth codes and truncation flags, one per (valuation, seed) pair."""
    pool = PathPool([SamplePath(s) for s in seeds])
    rt = _runtime(I, pool, choice_bound=choice_bound, star_bound=star_bound, eq_tol=eq_tol)
    return engine.formula(rt, Batch.from_valuations(list(valuations)), S.desugar(phi))


def eval_term_batch(I: Interpretation, valuations: Sequence[Valuation], seeds: Iterable[int], theta: S.Term):
    pool = PathPool([SamplePath(s) for s in seeds])
    rt = _runtime(I, pool)
    return engine.term(rt, Batch.from_valuations(list(valuations)), S.desugar(theta))


def simulate(
    I: Interpretation,
    v: Valuation,
    omega,
    alpha: S.Program,
    C: ChoiceSequence = ChoiceSequence(),
) -> tuple[list[tuple[float, dict, Status]], Valuation]:
    """Run ``alpha`` recording every SDE grid point visited.

    Rows are (time since the SDE started, state, status)."""
    rows: list[tuple[float, dict, Status]] = []

    def record(t, state, status):
        rows.append((t, state, Status(status)))

    rt = _runtime(I, PathPool([_path(omega)]), bounded=False, recorder=record)
    src = ChoiceSource(C.bits)
    out, _, _ = engine.program(rt, _single(v), np.array([C.pos], np.int64), src, S.desugar(alpha))
    return rows, out.valuation(0)

"""Interpretations: meanings for symbols plus numerical configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .. import syntax as S


class FunctionMeaning:
    """Vectorised meaning of a function symbol."""

    def evaluate(self, rt, batch, args: list[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def inline(self, rt, args: list[S.Term]) -> Optional[S.Term]:
        """A term over plain arithmetic equal to the application, or None
        when the meaning is not symbolically differentiable."""
        return None


class PyFunction(FunctionMeaning):
    """Wraps a NumPy-vectorised callable. Arity-0 callables are constants
    and so have zero derivatives."""

    def __init__(self, fn: Callable[..., np.ndarray], arity: int):
        self.fn = fn
        self.arity = arity

    def evaluate(self, rt, batch, args):
        with np.errstate(all="ignore"):
            out = np.asarray(self.fn(*args), dtype=float)
        return np.broadcast_to(out, (batch.n,)).copy()

    def inline(self, rt, args):
        if self.arity == 0:
            return S.Const(float(self.fn()))
        return None


class TermFunction(FunctionMeaning):
    """f(q1..qd) := body with parameters bound to ``params``."""

    def __init__(self, params: tuple[str, ...], body: S.Term, base=None):
        self.params = tuple(params)
        self.body = body
        self.base = base

    def evaluate(self, rt, batch, args):
        from . import engine

        sub = engine.Batch(dict(zip(self.params, args)), np.zeros(batch.n, np.int8), batch.draws, batch.sid)
        inner = rt if self.base is None else rt.with_interp(self.base)
        return engine.term(inner, sub, self.body)

    def inline(self, rt, args):
        from .differential import inline

        body = _subst_vars(self.body, dict(zip(self.params, args)))
        interp = rt.interp if self.base is None else self.base
        return inline(rt.with_interp(interp), body)

    def __repr__(self):
        from ..printer import print_node

        return f"λ{','.join(self.params)}. {print_node(self.body)}"


class AdjointFunction(FunctionMeaning):
    """q ↦ (I with markers set to q) v ⟦σf⟧."""

    def __init__(self, body: S.Term, markers: tuple, base, v):
        self.body = body
        self.markers = markers
        self.base = base
        self.v = v

    def evaluate(self, rt, batch, args):
        from . import engine

        interp = self.base.with_markers(dict(zip(self.markers, args)))
        sub = engine.Batch.broadcast(self.v, batch)
        return engine.term(rt.with_interp(interp), sub, self.body)

    def inline(self, rt, args):
        from . import engine
        from .differential import inline

        if not self.markers:
            single = engine.Batch.broadcast(self.v, engine.Batch.empty(1))
            value = engine.term(rt.with_interp(self.base), single, self.body)[0]
            return S.Const(value)
        body = _subst_markers(self.body, dict(zip(self.markers, args)))
        return inline(rt.with_interp(self.base), body)


class PredicateMeaning:
    def evaluate(self, rt, batch, args: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        """Truth codes (int8, 0/1/2) and truncation flags."""
        raise NotImplementedError


class PyPredicate(PredicateMeaning):
    """Wraps a callable returning truth codes; ``path_aware`` callables
    also receive the batch's sample paths."""

    def __init__(self, fn: Callable[..., np.ndarray], arity: int, path_aware: bool = False):
        self.fn = fn
        self.arity = arity
        self.path_aware = path_aware

    def evaluate(self, rt, batch, args):
        extra = ([rt.pool.paths[s] for s in batch.sid],) if self.path_aware else ()
        out = np.asarray(self.fn(*args, *extra), dtype=np.int8)
        return np.broadcast_to(out, (batch.n,)).copy(), np.zeros(batch.n, bool)


class FormulaPredicate(PredicateMeaning):
    def __init__(self, params: tuple[str, ...], body: S.Formula, base=None):
        self.params = tuple(params)
        self.body = body
        self.base = base

    def evaluate(self, rt, batch, args):
        from . import engine

        sub = engine.Batch(dict(zip(self.params, args)), np.zeros(batch.n, np.int8), batch.draws, batch.sid)
        inner = rt if self.base is None else rt.with_interp(self.base)
        return engine.formula(inner, sub, self.body)

    def __repr__(self):
        from ..printer import print_node

        return f"λ{','.join(self.params)}. {print_node(self.body)}"


class AdjointPredicate(PredicateMeaning):
    def __init__(self, body: S.Formula, markers: tuple, base, v):
        self.body = body
        self.markers = markers
        self.base = base
        self.v = v

    def evaluate(self, rt, batch, args):
        from . import engine

        interp = self.base.with_markers(dict(zip(self.markers, args)))
        sub = engine.Batch.broadcast(self.v, batch)
        return engine.formula(rt.with_interp(interp), sub, self.body)


class ProgramMeaning:
    def run(self, rt, batch, cur, src):
        raise NotImplementedError


class ProgramDef(ProgramMeaning):
    """γ interpreted as a concrete program, run under ``base``."""

    def __init__(self, program: S.Program, base=None):
        self.program = program
        self.base = base

    def run(self, rt, batch, cur, src):
        from . import engine

        inner = rt if self.base is None else rt.with_interp(self.base)
        return engine.program(inner, batch, cur, src, self.program)

    def __repr__(self):
        from ..printer import print_node

        return print_node(self.program)


@dataclass(frozen=True)
class Interpretation:
    """Symbol meanings plus the finite stop-time set and numerics.

    ``times`` is the countable stop-time set (finite here); an SDE stops at
    ``times[nat(C)]``, clamped to the last element. ``step`` is the
    Euler–Maruyama grid width.
    """

    functions: Mapping = field(default_factory=dict)
    predicates: Mapping = field(default_factory=dict)
    programs: Mapping = field(default_factory=dict)
    times: tuple[float, ...] = (1.0,)
    step: float = 1e-2
    choice_bound: int = 8
    star_bound: int = 3
    iota_cells: int = 2**16
    iota_radius: float = 1e6
    markers: Mapping = field(default_factory=dict)

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times or any(t < 0 or not np.isfinite(t) for t in times):
            raise ValueError("stop times must be a non-empty list of finite non-negative reals")
        if self.step <= 0:
            raise ValueError("step must be positive")
        object.__setattr__(self, "times", times)

    def replace(self, **changes) -> "Interpretation":
        return dataclasses.replace(self, **changes)

    def with_markers(self, bindings: Mapping) -> "Interpretation":
        merged = dict(self.markers)
        merged.update(bindings)
        return dataclasses.replace(self, markers=merged)

    def function(self, name: str, arity: int) -> Optional[FunctionMeaning]:
        return self.functions.get((name, arity))

    def predicate(self, name: str, arity: int) -> Optional[PredicateMeaning]:
        return self.predicates.get((name, arity))

    def program(self, name: str) -> Optional[ProgramMeaning]:
        return self.programs.get(name)

    def __hash__(self):
        return id(self)


def _subst_vars(t: S.Node, mapping: dict) -> S.Node:
    def go(n):
        if isinstance(n, S.Var) and n.name in mapping:
            return mapping[n.name]
        return S.map_children(n, go)

    return go(t)


def _subst_markers(t: S.Node, mapping: dict) -> S.Node:
    def go(n):
        if isinstance(n, S.Marker) and n in mapping:
            return mapping[n]
        return S.map_children(n, go)

    return go(t)


def param_names(d: int) -> tuple[str, ...]:
    """Reserved parameter variables for definable meanings."""
    return tuple(f"q{i}" for i in range(1, d + 1))

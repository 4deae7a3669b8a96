"""Uniform substitutions: construction, validation, application, adjoints."""

from __future__ import annotations

import itertools
from types import MappingProxyType
from typing import Mapping, Optional

from . import syntax as S
from .analysis import sig
from .parser import ParseError, Parser, _span

_instances = itertools.count(1)


class Substitution:
    """Finite partial maps from symbols to replacements.

    ``functions`` and ``predicates`` are keyed by ``(name, arity)``;
    ``programs`` by name. Markers in replacements carry this instance's
    ``tag``.
    """

    def __init__(
        self,
        functions: Optional[Mapping[tuple[str, int], S.Term]] = None,
        predicates: Optional[Mapping[tuple[str, int], S.Formula]] = None,
        programs: Optional[Mapping[str, S.Program]] = None,
        tag: Optional[int] = None,
    ):
        self.tag = next(_instances) if tag is None else tag
        self.functions = MappingProxyType(dict(functions or {}))
        self.predicates = MappingProxyType(dict(predicates or {}))
        self.programs = MappingProxyType(dict(programs or {}))

    def marker(self, kind: str, name: str, arity: int, i: int) -> S.Marker:
        return S.Marker(self.tag, kind, name, arity, i)

    @property
    def symbols(self) -> frozenset:
        return frozenset(
            [("f", n, d) for n, d in self.functions]
            + [("p", n, d) for n, d in self.predicates]
            + [("g", n) for n in self.programs]
        )

    def is_identity(self) -> bool:
        return not (self.functions or self.predicates or self.programs)

    def __repr__(self) -> str:
        return f"Substitution({format_substitution(self)})"


IDENTITY = Substitution(tag=0)


# ------------------------------------------------------------ validation


def validate(sigma: Substitution) -> list[str]:
    """Violations of the replacement restrictions; empty means valid.

    Replacements for symbols of arity d >= 1 may only use their own d
    markers: no variables and no 0-ary function symbols. Arity-0
    replacements are unrestricted; admissibility guards their use.
    """
    out: list[str] = []
    for (name, d), r in sigma.functions.items():
        if not isinstance(r, S.Term):
            out.append(f"replacement for {name}@{d} is not a term")
            continue
        out += _check_replacement(sigma, "f", name, d, r)
    for (name, d), r in sigma.predicates.items():
        if not isinstance(r, S.Formula):
            out.append(f"replacement for {name}@{d} is not a formula")
            continue
        out += _check_replacement(sigma, "p", name, d, r)
    for name, r in sigma.programs.items():
        if not isinstance(r, S.Program):
            out.append(f"replacement for G@{name} is not a program")
            continue
        if any(isinstance(n, S.Marker) for n in S.walk(r)):
            out.append(f"marker in program replacement for G@{name}")
        out += [f"G@{name}: {v}" for v in S.well_formed(r)]
    return out


def _check_replacement(sigma, kind, name, d, r) -> list[str]:
    out = [f"{name}@{d}: {v}" for v in S.well_formed(r)]
    label = f"{name}@{d}"
    for n in S.walk(r):
        if isinstance(n, S.Marker):
            if (n.owner, n.kind, n.symbol, n.arity) != (sigma.tag, kind, name, d) or not 1 <= n.index <= d:
                out.append(f"foreign marker in replacement for {label}")
        if d == 0:
            continue
        if isinstance(n, (S.Var, S.Assign, S.Random, S.SDE)) or isinstance(n, S.DB):
            out.append(f"variable in replacement for {label}")
        elif isinstance(n, S.Func) and n.arity == 0:
            out.append(f"0-ary function symbol {n.name}@0 in replacement for {label}")
    return sorted(set(out), key=out.index)


# ----------------------------------------------------------- application


def _fill_markers(r: S.Node, sigma: Substitution, kind, name, d, args) -> S.Node:
    def go(n):
        if (
            isinstance(n, S.Marker)
            and n.owner == sigma.tag
            and (n.kind, n.symbol, n.arity) == (kind, name, d)
        ):
            return args[n.index - 1]
        return S.map_children(n, go)

    return go(r)


def apply(sigma: Substitution, e: S.Node) -> S.Node:
    """Simultaneous uniform substitution of ``e`` (total; no admissibility)."""
    if sigma.is_identity():
        return e

    def go(n: S.Node) -> S.Node:
        if isinstance(n, S.Func):
            r = sigma.functions.get((n.name, n.arity))
            if r is not None:
                args = [go(a) for a in n.args]
                return S.retag(_fill_markers(r, sigma, "f", n.name, n.arity, args))
        elif isinstance(n, S.Pred):
            r = sigma.predicates.get((n.name, n.arity))
            if r is not None:
                args = [go(a) for a in n.args]
                return S.retag(_fill_markers(r, sigma, "p", n.name, n.arity, args))
        elif isinstance(n, S.ProgSym):
            r = sigma.programs.get(n.name)
            if r is not None:
                return S.retag(r)
        return S.map_children(n, go)

    return go(e)


def apply_prob(sigma: Substitution, spade):
    """Substitute inside every ``P(phi)`` atom; constant symbols ``c@0``
    of the arithmetic skeleton are replaced by ground numerals."""
    from . import spade as P

    out = P.map_atoms(spade, lambda f: apply(sigma, f))

    def const(name):
        r = sigma.functions.get((name, 0))
        if r is None:
            return P.PSym(name)
        value = ground_value(r)
        if value is None:
            raise ValueError(f"{name}@0 must map to a ground numeral in a probability formula")
        return P.PConst(value)

    return P.map_syms(out, const)


def ground_value(t: S.Term) -> Optional[float]:
    match t:
        case S.Const(v):
            return v
        case S.Plus(a, b):
            x, y = ground_value(a), ground_value(b)
            return None if x is None or y is None else x + y
        case S.Times(a, b):
            x, y = ground_value(a), ground_value(b)
            return None if x is None or y is None else x * y
    return None


# --------------------------------------------------------------- adjoint


def adjoint(sigma: Substitution, interp, v):
    """The adjoint interpretation σ(I, v)."""
    from .semantics.interpretation import AdjointFunction, AdjointPredicate, ProgramDef

    functions = dict(interp.functions)
    predicates = dict(interp.predicates)
    programs = dict(interp.programs)
    for (name, d), r in sigma.functions.items():
        markers = tuple(sigma.marker("f", name, d, i) for i in range(1, d + 1))
        functions[(name, d)] = AdjointFunction(r, markers, interp, v)
    for (name, d), r in sigma.predicates.items():
        markers = tuple(sigma.marker("p", name, d, i) for i in range(1, d + 1))
        predicates[(name, d)] = AdjointPredicate(r, markers, interp, v)
    for name, r in sigma.programs.items():
        programs[name] = ProgramDef(r, interp)
    return interp.replace(functions=functions, predicates=predicates, programs=programs)


# ------------------------------------------------------------ literals


def parse_substitution(text: str, kinds: Optional[Mapping] = None) -> Substitution:
    """Parse ``subst { f@1 -> o1 + o1 ; p@0 -> x >= 0 ; G@a -> x := 1 }``.

    ``kinds`` maps ``(name, arity)`` to ``"f"`` or ``"p"`` when known from
    context; otherwise a replacement that parses as a term is a term.
    Program replacements containing ``;`` must be parenthesized.
    """
    p = Parser(text)
    sigma = _parse_subst(p, kinds or {})
    p.finish()
    return sigma


def _parse_subst(p: Parser, kinds) -> Substitution:
    sigma = Substitution()
    functions, predicates, programs = {}, {}, {}
    if p.tok.kind == "ident" and p.tok.text == "subst":
        p.pos += 1
    p.expect("{")
    while p.tok.kind != "}":
        head = p.expect("sym")
        p.expect("->")
        name, tail = head.text.split("@")
        if not tail.isdigit():
            if name != "G":
                raise p.error("program symbols are written G@name", head)
            if tail in programs:
                raise p.error(f"duplicate entry for {head.text}", head)
            programs[tail] = S.desugar(p.program(allow_seq=False))
        else:
            d = int(tail)
            key = (name, d)
            if key in functions or key in predicates:
                raise p.error(f"duplicate entry for {head.text}", head)
            kind = kinds.get(key)
            start = p.pos
            node = None
            if kind in (None, "f"):
                p.marker_scope = (sigma.tag, "f", name, d)
                try:
                    node = p.term()
                    if p.tok.kind not in (";", "}"):
                        raise p.error("not a term")
                    kind = "f"
                except ParseError:
                    if kind == "f":
                        raise
                    p.pos = start
                    node = None
            if node is None:
                p.marker_scope = (sigma.tag, "p", name, d)
                node = p.formula()
                kind = "p"
            p.marker_scope = None
            node = S.desugar(node)
            (functions if kind == "f" else predicates)[key] = node
        if not p.accept(";"):
            break
    p.expect("}")
    return Substitution(functions, predicates, programs, tag=sigma.tag)


def format_substitution(sigma: Substitution) -> str:
    from .printer import print_node

    parts = []
    for (name, d), r in sigma.functions.items():
        parts.append(f"{name}@{d} -> {print_node(r)}")
    for (name, d), r in sigma.predicates.items():
        parts.append(f"{name}@{d} -> {print_node(r)}")
    for name, r in sigma.programs.items():
        text = print_node(r)
        if isinstance(r, (S.Seq, S.Choice, S.If)):
            text = f"({text})"
        parts.append(f"G@{name} -> {text}")
    return "subst { " + " ; ".join(parts) + " }" if parts else "subst { }"


def symbol_kinds(e: S.Node) -> dict:
    """``(name, arity) -> "f" | "p"`` for the symbols of ``e``."""
    return {(s[1], s[2]): s[0] for s in sig(e) if s[0] != "g"}

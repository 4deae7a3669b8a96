"""Arithmetic formulas over probability atoms ``P(phi)``.

These are ordinary two-valued statements of real arithmetic whose atoms
are probabilities of pathwise formulas holding (evaluating to TOP).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from . import syntax as S
from .parser import ParseError, Parser
from .printer import fmt_number, print_node


class PTerm:
    __slots__ = ()


class ProbFormula:
    __slots__ = ()


@dataclass(frozen=True)
class PConst(PTerm):
    value: float


@dataclass(frozen=True)
class PAtom(PTerm):
    formula: S.Formula


@dataclass(frozen=True)
class PSym(PTerm):
    """0-ary constant symbol, instantiated by substitution."""

    name: str


@dataclass(frozen=True)
class PPlus(PTerm):
    left: PTerm
    right: PTerm


@dataclass(frozen=True)
class PTimes(PTerm):
    left: PTerm
    right: PTerm


@dataclass(frozen=True)
class PCmp(ProbFormula):
    op: str
    left: PTerm
    right: PTerm


@dataclass(frozen=True)
class PNot(ProbFormula):
    arg: ProbFormula


@dataclass(frozen=True)
class PAnd(ProbFormula):
    left: ProbFormula
    right: ProbFormula


@dataclass(frozen=True)
class POr(ProbFormula):
    left: ProbFormula
    right: ProbFormula


@dataclass(frozen=True)
class PImplies(ProbFormula):
    left: ProbFormula
    right: ProbFormula


OPS = (">=", "<=", "=", "<", ">")


def atoms(node) -> Iterator[S.Formula]:
    """Pathwise formulas under ``P(.)``, in left-to-right order."""
    match node:
        case PAtom(f):
            yield f
        case PConst() | PSym():
            return
        case PPlus(a, b) | PTimes(a, b) | PCmp(_, a, b) | PAnd(a, b) | POr(a, b) | PImplies(a, b):
            yield from atoms(a)
            yield from atoms(b)
        case PNot(a):
            yield from atoms(a)


def map_atoms(node, fn):
    match node:
        case PAtom(f):
            return PAtom(fn(f))
        case PConst() | PSym():
            return node
        case PCmp(op, a, b):
            return PCmp(op, map_atoms(a, fn), map_atoms(b, fn))
        case PNot(a):
            return PNot(map_atoms(a, fn))
        case PPlus(a, b) | PTimes(a, b) | PAnd(a, b) | POr(a, b) | PImplies(a, b):
            return type(node)(map_atoms(a, fn), map_atoms(b, fn))
    raise TypeError(node)


def map_syms(node, fn):
    match node:
        case PSym(name):
            return fn(name)
        case PAtom() | PConst():
            return node
        case PCmp(op, a, b):
            return PCmp(op, map_syms(a, fn), map_syms(b, fn))
        case PNot(a):
            return PNot(map_syms(a, fn))
        case PPlus(a, b) | PTimes(a, b) | PAnd(a, b) | POr(a, b) | PImplies(a, b):
            return type(node)(map_syms(a, fn), map_syms(b, fn))
    raise TypeError(node)


# ---------------------------------------------------------------- parser


class _SpadeParser(Parser):
    def spade(self) -> ProbFormula:
        left = self.sdisj()
        if self.accept("->"):
            return PImplies(left, self.spade())
        return left

    def sdisj(self):
        left = self.sconj()
        while self.accept("|"):
            left = POr(left, self.sconj())
        return left

    def sconj(self):
        left = self.sprefix()
        while self.accept("&"):
            left = PAnd(left, self.sprefix())
        return left

    def sprefix(self):
        if self.accept("!"):
            return PNot(self.sprefix())
        if self.tok.kind == "(":
            saved = self.pos
            try:
                return self.scmp()
            except ParseError:
                self.pos = saved
            self.pos += 1
            inner = self.spade()
            self.expect(")")
            return inner
        return self.scmp()

    def scmp(self):
        left = self.psum()
        op = self.tok.kind
        if op not in OPS:
            raise self.error("expected a comparison")
        self.pos += 1
        return PCmp(op, left, self.psum())

    def psum(self):
        left = self.pprod()
        while True:
            if self.accept("+"):
                left = PPlus(left, self.pprod())
            elif self.accept("-"):
                right = self.pprod()
                neg = PConst(-right.value) if isinstance(right, PConst) else PTimes(PConst(-1.0), right)
                left = PPlus(left, neg)
            elif self.tok.kind == "num" and self.tok.text.startswith("-"):
                left = PPlus(left, self.pprod())
            else:
                return left

    def pprod(self):
        left = self.patom_()
        while self.accept("*"):
            left = PTimes(left, self.patom_())
        return left

    def patom_(self):
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            from .parser import parse_number

            return PConst(parse_number(t.text))
        if t.kind == "ident" and t.text == "P" and self.peek().kind == "(":
            self.pos += 2
            f = self.formula()
            self.expect(")")
            return PAtom(S.desugar(f))
        if t.kind == "sym" and t.text.endswith("@0"):
            self.pos += 1
            return PSym(t.text[:-2])
        if t.kind == "(":
            self.pos += 1
            inner = self.psum()
            self.expect(")")
            return inner
        raise self.error(f"expected a probability term, found {t.text or 'end of input'!r}")


def parse_spade(text: str) -> ProbFormula:
    p = _SpadeParser(text)
    out = p.spade()
    p.finish()
    for f in atoms(out):
        problems = S.well_formed(f)
        if problems:
            raise ParseError(f"ill-formed: {problems[0]}")
    return out


# --------------------------------------------------------------- printer


def print_spade(node) -> str:
    return _p(node, 0)


def _p(node, need: int) -> str:
    # levels: 0 implies, 1 or, 2 and, 3 prefix/cmp, 4 sum, 5 product, 6 atom
    def par(text, level):
        return f"({text})" if level < need else text

    match node:
        case PImplies(a, b):
            return par(f"{_p(a, 1)} -> {_p(b, 0)}", 0)
        case POr(a, b):
            return par(f"{_p(a, 1)} | {_p(b, 2)}", 1)
        case PAnd(a, b):
            return par(f"{_p(a, 2)} & {_p(b, 3)}", 2)
        case PNot(a):
            return par(f"!{_p(a, 3)}", 3)
        case PCmp(op, a, b):
            return par(f"{_p(a, 4)} {op} {_p(b, 4)}", 3)
        case PPlus(a, b):
            return par(f"{_p(a, 4)} + {_p(b, 5)}", 4)
        case PTimes(a, b):
            return par(f"{_p(a, 5)} * {_p(b, 6)}", 5)
        case PConst(v):
            return fmt_number(v)
        case PSym(name):
            return f"{name}@0"
        case PAtom(f):
            return f"P({print_node(f)})"
    raise TypeError(node)

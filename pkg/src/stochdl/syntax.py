"""Abstract syntax for stochastic differential dynamic logic.

Three syntactic categories share one node hierarchy: terms, programs and
formulas. All nodes are frozen dataclasses, so structural equality and
hashing come for free. Source spans are carried but ignored by comparison.

Surface connectives (disjunction, box, implication, ...) exist as sugar
nodes that :func:`desugar` rewrites into the core grammar. The printer
recognises the desugared shapes again, which keeps round trips exact.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field, fields, replace
from enum import IntEnum
from typing import Callable, Iterable, Iterator, Optional


class TruthValue(IntEnum):
    """Three-valued truth, ordered BOT < IND < TOP."""

    BOT = 0
    IND = 1
    TOP = 2

    @property
    def symbol(self) -> str:
        return "⊖⊘⊕"[self.value]

    def __str__(self) -> str:
        return self.name


def tv_not(a: TruthValue) -> TruthValue:
    return TruthValue(2 - a)


def tv_and(a: TruthValue, b: TruthValue) -> TruthValue:
    return TruthValue(min(a, b))


def tv_or(a: TruthValue, b: TruthValue) -> TruthValue:
    return TruthValue(max(a, b))


def tv_sure(a: TruthValue) -> TruthValue:
    return TruthValue.TOP if a == TruthValue.TOP else TruthValue.BOT


def tv_ind(a: TruthValue) -> TruthValue:
    return tv_and(tv_not(tv_sure(a)), tv_not(tv_sure(tv_not(a))))


def tv_implies(a: TruthValue, b: TruthValue) -> TruthValue:
    return tv_or(tv_or(tv_not(a), b), tv_and(tv_ind(a), tv_ind(b)))


def tv_iff(a: TruthValue, b: TruthValue) -> TruthValue:
    return tv_and(tv_implies(a, b), tv_implies(b, a))


def tv_sup(values: Iterable[TruthValue]) -> TruthValue:
    """Supremum of a non-empty collection; raises ValueError when empty."""
    values = list(values)
    if not values:
        raise ValueError("supremum of an empty set of truth values")
    return TruthValue(max(values))


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int = 1
    column: int = 1

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


_SPAN = dict(default=None, compare=False, repr=False)


class Node:
    """Common base for all syntax nodes."""

    __slots__ = ()


class Term(Node):
    __slots__ = ()


class Program(Node):
    __slots__ = ()


class Formula(Node):
    __slots__ = ()


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Const(Term):
    value: float
    span: Optional[SourceSpan] = field(**_SPAN)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Plus(Term):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Times(Term):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Func(Term):
    """Application of a function symbol; arity is ``len(args)``."""

    name: str
    args: tuple[Term, ...] = ()
    span: Optional[SourceSpan] = field(**_SPAN)

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Dt(Term):
    """Time differential d_t of a term."""

    arg: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class DB(Term):
    """Brownian differential d_B,index of a term."""

    index: str
    arg: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Diamond(Term):
    """Reserved variable bound by the description with the same tag."""

    tag: int
    n: int
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Marker(Term):
    """Argument placeholder inside a substitution replacement.

    ``owner`` identifies the substitution instance, ``kind`` is ``"f"`` or
    ``"p"``, and ``symbol``/``arity`` name the replaced symbol.
    """

    owner: int
    kind: str
    symbol: str
    arity: int
    index: int
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True, eq=False)
class Iota(Term):
    """Definite description: the ``index``-th coordinate of the unique
    solution of ``body`` in the diamonds ``1..arity``."""

    index: int
    arity: int
    body: Formula
    tag: int = 0
    span: Optional[SourceSpan] = field(**_SPAN)

    def _key(self):
        return (self.index, self.arity, canonical(self.body, {self.tag: 0}, 1))

    def __eq__(self, other):
        if not isinstance(other, Iota):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


# ------------------------------------------------------------- programs


@dataclass(frozen=True)
class Assign(Program):
    var: str
    term: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Random(Program):
    var: str
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class SDE(Program):
    """dx = b dt + sigma dW & H over the variables ``vars``."""

    vars: tuple[str, ...]
    drift: tuple[Term, ...]
    diffusion: tuple[tuple[Term, ...], ...]
    boundary: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class If(Program):
    cond: Formula
    then: Program
    orelse: Program
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Choice(Program):
    left: Program
    right: Program
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Seq(Program):
    left: Program
    right: Program
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Star(Program):
    body: Program
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Skip(Program):
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Fail(Program):
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class ProgSym(Program):
    name: str
    span: Optional[SourceSpan] = field(**_SPAN)


# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Geq(Formula):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: tuple[Term, ...] = ()
    span: Optional[SourceSpan] = field(**_SPAN)

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Modal(Formula):
    """The possibility modality <program> body."""

    program: Program
    body: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Sure(Formula):
    arg: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


# ---------------------------------------------------------- sugar nodes


class Sugar(Formula):
    """Surface connective; removed by :func:`desugar`."""

    __slots__ = ()


@dataclass(frozen=True)
class Or(Sugar):
    left: Formula
    right: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Box(Sugar):
    program: Program
    body: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Implies(Sugar):
    left: Formula
    right: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Iff(Sugar):
    left: Formula
    right: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Ind(Sugar):
    arg: Formula
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Crash(Sugar):
    program: Program
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Defined(Sugar):
    term: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Eq(Sugar):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Leq(Sugar):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Lt(Sugar):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


@dataclass(frozen=True)
class Gt(Sugar):
    left: Term
    right: Term
    span: Optional[SourceSpan] = field(**_SPAN)


# ------------------------------------------------------- core builders

TRUE = Geq(Const(0), Const(0))


def or_(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def box(p: Program, f: Formula) -> Formula:
    return Not(Modal(p, Not(f)))


def ind(f: Formula) -> Formula:
    return And(Not(Sure(f)), Not(Sure(Not(f))))


def implies(a: Formula, b: Formula) -> Formula:
    return or_(or_(Not(a), b), And(ind(a), ind(b)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def eq(a: Term, b: Term) -> Formula:
    return And(Geq(a, b), Geq(b, a))


def leq(a: Term, b: Term) -> Formula:
    return Geq(b, a)


def lt(a: Term, b: Term) -> Formula:
    return Not(Geq(a, b))


def gt(a: Term, b: Term) -> Formula:
    return Not(Geq(b, a))


def crash(p: Program) -> Formula:
    return ind(box(p, TRUE))


def defined(t: Term) -> Formula:
    return Sure(Geq(t, t))


# ----------------------------------------------------------- traversal


def _is_child(value) -> bool:
    return isinstance(value, Node)


def children(node: Node) -> Iterator[Node]:
    """Direct sub-nodes, in field order."""
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item
                elif isinstance(item, tuple):
                    yield from (x for x in item if isinstance(x, Node))


def map_children(node: Node, fn: Callable[[Node], Node]) -> Node:
    """Rebuild ``node`` with ``fn`` applied to each direct sub-node."""
    changes = {}
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            new = fn(value)
        elif isinstance(value, tuple) and value and isinstance(value[0], (Node, tuple)):
            new = tuple(
                tuple(fn(x) for x in item) if isinstance(item, tuple) else fn(item)
                for item in value
            )
        else:
            continue
        if new is not value:
            changes[f.name] = new
    if not changes:
        return node
    return replace(node, **changes)


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def canonical(node, env: dict, depth: int):
    """Structure key with description tags replaced by binding depth."""
    if isinstance(node, Diamond):
        return ("◇", node.n, env.get(node.tag, ("free", node.tag)))
    if isinstance(node, Iota):
        inner = dict(env)
        inner[node.tag] = depth
        return ("ι", node.index, node.arity, canonical(node.body, inner, depth + 1))
    if not isinstance(node, Node):
        return node
    parts = [type(node).__name__]
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        parts.append(_canon_value(value, env, depth))
    return tuple(parts)


def _canon_value(value, env, depth):
    if isinstance(value, Node):
        return canonical(value, env, depth)
    if isinstance(value, tuple):
        return tuple(_canon_value(v, env, depth) for v in value)
    return value


_tags = itertools.count(1)


def fresh_tag() -> int:
    return next(_tags)


def retag(node: Node) -> Node:
    """Give every description inside ``node`` a fresh tag."""

    def go(n: Node, mapping: dict) -> Node:
        if isinstance(n, Iota):
            inner = dict(mapping)
            inner[n.tag] = fresh_tag()
            return Iota(n.index, n.arity, go(n.body, inner), inner[n.tag], span=n.span)
        if isinstance(n, Diamond):
            if n.tag in mapping:
                return Diamond(mapping[n.tag], n.n, span=n.span)
            return n
        return map_children(n, lambda c: go(c, mapping))

    return go(node, {})


# -------------------------------------------------------------- desugar


def desugar(node: Node) -> Node:
    """Rewrite sugar nodes into the core grammar, recursively.

    Identity on core syntax, and idempotent.
    """
    node = map_children(node, desugar)
    if not isinstance(node, Sugar):
        return node
    match node:
        case Or(a, b):
            return or_(a, b)
        case Box(p, f):
            return box(p, f)
        case Implies(a, b):
            return implies(a, b)
        case Iff(a, b):
            return iff(a, b)
        case Ind(f):
            return ind(f)
        case Crash(p):
            return crash(p)
        case Defined(t):
            return defined(t)
        case Eq(a, b):
            return eq(a, b)
        case Leq(a, b):
            return leq(a, b)
        case Lt(a, b):
            return lt(a, b)
        case Gt(a, b):
            return gt(a, b)
    raise TypeError(f"unknown sugar node {type(node).__name__}")


# ------------------------------------------------------ variable names

_BASE = re.compile(r"[A-Za-z][A-Za-z0-9]*")


def time_var(x: str) -> str:
    return f"{x}_t"


def brown_var(x: str, j: str) -> str:
    return f"{x}_B[{j}]"


def diamond_key(tag: int, n: int) -> str:
    return f"◇{tag}.{n}"


def is_variable_name(name: str) -> bool:
    """Base identifier followed by ``_t`` / ``_B[name]`` subscripts."""
    m = _BASE.match(name)
    if not m:
        return False
    i = m.end()
    while i < len(name):
        if name.startswith("_t", i):
            i += 2
        elif name.startswith("_B[", i):
            depth, j = 1, i + 3
            while j < len(name) and depth:
                depth += {"[": 1, "]": -1}.get(name[j], 0)
                j += 1
            if depth or not is_variable_name(name[i + 3 : j - 1]):
                return False
            i = j
        else:
            return False
    return True


def rename_variable(name: str, mapping: dict[str, str]) -> str:
    """Apply a renaming of base names through all subscripts."""
    m = _BASE.match(name)
    if not m:
        return name
    out = [mapping.get(m.group(0), m.group(0))]
    i = m.end()
    while i < len(name):
        if name.startswith("_t", i):
            out.append("_t")
            i += 2
        elif name.startswith("_B[", i):
            depth, j = 1, i + 3
            while j < len(name) and depth:
                depth += {"[": 1, "]": -1}.get(name[j], 0)
                j += 1
            out.append("_B[" + rename_variable(name[i + 3 : j - 1], mapping) + "]")
            i = j
        else:
            out.append(name[i:])
            break
    return "".join(out)


def rename(node: Node, mapping: dict[str, str]) -> Node:
    """Uniformly rename variables (and their subscripted forms)."""
    if not mapping:
        return node

    def go(n: Node) -> Node:
        n = map_children(n, go)
        match n:
            case Var(name):
                return Var(rename_variable(name, mapping), span=n.span)
            case DB(index, arg):
                return DB(rename_variable(index, mapping), arg, span=n.span)
            case Assign(v, t):
                return Assign(rename_variable(v, mapping), t, span=n.span)
            case Random(v):
                return Random(rename_variable(v, mapping), span=n.span)
            case SDE(vs, b, s, h):
                return SDE(tuple(rename_variable(v, mapping) for v in vs), b, s, h, span=n.span)
        return n

    return go(node)


# ----------------------------------------------------- well-formedness


@dataclass(frozen=True)
class Violation:
    path: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        where = ".".join(map(str, self.path)) or "root"
        return f"{self.message} (at {where})"


def contains_program(node: Node) -> bool:
    return any(isinstance(n, (Modal, Box, Crash)) or isinstance(n, Program) for n in walk(node))


def well_formed(node: Node) -> list[Violation]:
    """Structural constraints; an empty list means well-formed."""
    out: list[Violation] = []

    def go(n: Node, path: tuple[int, ...], owners: tuple[tuple[int, int], ...]):
        match n:
            case Const(v) if not math.isfinite(v):
                out.append(Violation(path, "non-finite numeral"))
            case Var(name) | Assign(name, _) | Random(name) if not is_variable_name(name):
                out.append(Violation(path, f"malformed variable name {name!r}"))
            case Diamond(tag, k):
                if not owners or owners[-1][0] != tag:
                    if any(t == tag for t, _ in owners):
                        out.append(Violation(path, "diamond crosses a nested ι"))
                    else:
                        out.append(Violation(path, "diamond outside its ι"))
                elif not 1 <= k <= owners[-1][1]:
                    out.append(Violation(path, f"diamond {k} exceeds ι arity"))
            case Iota(i, d, body, tag):
                if d < 1 or not 1 <= i <= d:
                    out.append(Violation(path, "ι index out of range"))
                if contains_program(body):
                    out.append(Violation(path, "program inside ι body"))
                if any(isinstance(x, Pred) for x in walk(body)):
                    out.append(Violation(path, "predicate symbol inside ι body"))
                used = {x.n for x in walk(body) if isinstance(x, Diamond) and x.tag == tag}
                if used != set(range(1, d + 1)):
                    out.append(Violation(path, "ι body must mention each of its diamonds"))
                go(body, path + (0,), owners + ((tag, d),))
                return
            case SDE(vs, b, s, h):
                k = len(vs)
                if k == 0 or len(set(vs)) != k:
                    out.append(Violation(path, "SDE variables must be distinct and non-empty"))
                if len(b) != k or len(s) != k or any(len(row) != k for row in s):
                    out.append(Violation(path, "SDE drift/diffusion shape mismatch"))
                if contains_program(h):
                    out.append(Violation(path, "program inside H"))
            case If(c, _, _):
                if contains_program(c):
                    out.append(Violation(path, "program inside H"))
        for i, c in enumerate(children(n)):
            go(c, path + (i,), owners)

    go(node, (), ())
    return out

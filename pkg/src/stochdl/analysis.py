"""Signatures, syntactic read/write variable sets and admissibility."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import syntax as S

Symbol = tuple  # ("f", name, arity) | ("p", name, arity) | ("g", name)


def symbol_of(node: S.Node) -> Optional[Symbol]:
    if isinstance(node, S.Func):
        return ("f", node.name, node.arity)
    if isinstance(node, S.Pred):
        return ("p", node.name, node.arity)
    if isinstance(node, S.ProgSym):
        return ("g", node.name)
    return None


def sig(e: S.Node) -> frozenset:
    """Function, predicate and program symbols occurring in ``e``."""
    return frozenset(s for n in S.walk(e) if (s := symbol_of(n)) is not None)


def format_symbol(s: Symbol) -> str:
    return f"G@{s[1]}" if s[0] == "g" else f"{s[1]}@{s[2]}"


@dataclass(frozen=True)
class VarSet:
    """Finite names, plus prefix families (every name with that prefix),
    or ALL."""

    names: frozenset = frozenset()
    prefixes: frozenset = frozenset()
    all: bool = False

    @staticmethod
    def of(*names: str) -> "VarSet":
        return VarSet(frozenset(names))

    def __or__(self, other: "VarSet") -> "VarSet":
        if self.all or other.all:
            return ALL
        return VarSet(self.names | other.names, self.prefixes | other.prefixes)

    def __bool__(self) -> bool:
        return self.all or bool(self.names) or bool(self.prefixes)

    def __contains__(self, name: str) -> bool:
        return self.all or name in self.names or any(name.startswith(p) for p in self.prefixes)

    def without(self, pred) -> "VarSet":
        if self.all:
            return self
        return VarSet(frozenset(n for n in self.names if not pred(n)), self.prefixes)

    def witness(self, other: "VarSet") -> Optional[str]:
        """Some variable in both sets, or None if they are disjoint."""
        if not self or not other:
            return None
        if self.all:
            return other._example()
        if other.all:
            return self._example()
        for n in sorted(self.names):
            if n in other:
                return n
        for n in sorted(other.names):
            if n in self:
                return n
        for p in sorted(self.prefixes):
            for q in sorted(other.prefixes):
                if p.startswith(q) or q.startswith(p):
                    return max(p, q, key=len) + "…"
        return None

    def _example(self) -> str:
        if self.all:
            return "*"
        if self.names:
            return min(self.names)
        return min(self.prefixes) + "…"

    def __str__(self) -> str:
        if self.all:
            return "ALL"
        items = sorted(self.names) + sorted(p + "*" for p in self.prefixes)
        return "{" + ", ".join(items) + "}"


EMPTY = VarSet()
ALL = VarSet(all=True)


def _subscripts(vs: VarSet, index: Optional[str] = None) -> VarSet:
    """Variables a differential may additionally read."""
    if vs.all:
        return ALL
    names = set(vs.names)
    prefixes = set(vs.prefixes)
    for y in vs.names:
        if index is None:
            names.add(S.time_var(y))
            prefixes.add(f"{y}_B[")
        else:
            names.add(S.brown_var(y, index))
    return VarSet(frozenset(names), frozenset(prefixes))


def rv(e: S.Node) -> VarSet:
    """Syntactic over-approximation of the variables ``e`` reads."""
    match e:
        case S.Var(name):
            return VarSet.of(name)
        case S.Const() | S.Marker() | S.Diamond() | S.Random() | S.Skip() | S.Fail():
            return EMPTY
        case S.ProgSym():
            return ALL
        case S.Dt(arg):
            return _subscripts(rv(arg))
        case S.DB(index, arg):
            return _subscripts(rv(arg), index)
        case S.SDE(vs, _, _, _):
            return _union(rv(c) for c in S.children(e)) | VarSet.of(*vs)
    return _union(rv(c) for c in S.children(e))


def wv(e: S.Node) -> VarSet:
    """Syntactic over-approximation of the variables ``e`` may write."""
    match e:
        case S.Assign(x, _) | S.Random(x):
            return VarSet.of(x)
        case S.SDE(vs, _, _, _):
            names = set(vs)
            for x in vs:
                names.add(S.time_var(x))
                names.update(S.brown_var(x, j) for j in vs)
            return VarSet(frozenset(names))
        case S.ProgSym():
            return ALL
        case S.Term():
            return EMPTY
    return _union(wv(c) for c in S.children(e))


def _union(sets) -> VarSet:
    out = EMPTY
    for s in sets:
        out = out | s
        if out.all:
            return out
    return out


# --------------------------------------------------------- admissibility


@dataclass(frozen=True)
class Admissible:
    def __bool__(self) -> bool:
        return True

    def __str__(self) -> str:
        return "ok"


@dataclass(frozen=True)
class Clash:
    subexpression: S.Node
    variable: str
    reason: str = ""

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        from .printer import print_node

        return f"clash on {self.variable} in {print_node(self.subexpression)}" + (
            f" ({self.reason})" if self.reason else ""
        )


def replacement_of(sigma, symbol: Symbol):
    """Replacement σs for a symbol, or None if σ leaves it fixed."""
    if symbol[0] == "f":
        return sigma.functions.get((symbol[1], symbol[2]))
    if symbol[0] == "p":
        return sigma.predicates.get((symbol[1], symbol[2]))
    return sigma.programs.get(symbol[1])


def introduced_reads(sigma, e: S.Node) -> VarSet:
    """RV(σ, e): variables read by the replacements of symbols of ``e``."""
    out = EMPTY
    for s in sig(e):
        r = replacement_of(sigma, s)
        if r is not None:
            out = out | rv(r)
    return out


def admissible(sigma, e: S.Node) -> Union[Admissible, Clash]:
    """Decide whether σ may be applied to ``e`` soundly.

    Checks RV(σ,e) ∩ WV([σe']) = ∅ for every subexpression e', and that no
    state-reading replacement lands inside a differential.
    """
    reads = introduced_reads(sigma, e)
    if reads:
        found = _write_clash(sigma, e, reads)
        if found is not None:
            return found
    found = _differential_clash(sigma, e, False)
    return found if found is not None else Admissible()


def _write_clash(sigma, e: S.Node, reads: VarSet) -> Optional[Clash]:
    result: list[Clash] = []

    def go(n: S.Node) -> VarSet:
        if isinstance(n, S.Term):
            return EMPTY
        if isinstance(n, S.ProgSym):
            r = sigma.programs.get(n.name)
            w = wv(r) if r is not None else ALL
        else:
            w = EMPTY
            for c in S.children(n):
                w = w | go(c)
                if result:
                    return w
            if isinstance(n, (S.Assign, S.Random, S.SDE)):
                w = w | wv(n)
            elif isinstance(n, S.Pred):
                r = sigma.predicates.get((n.name, n.arity))
                if r is not None:
                    w = w | wv(r)
        if not result:
            hit = reads.witness(w)
            if hit is not None:
                result.append(Clash(n, hit, "read by a replacement, written by the substituted expression"))
        return w

    go(e)
    return result[0] if result else None


def _differential_clash(sigma, e: S.Node, in_diff: bool) -> Optional[Clash]:
    if isinstance(e, (S.Dt, S.DB)):
        in_diff = True
    sym = symbol_of(e)
    if sym is not None and sym[0] in ("f", "p"):
        r = replacement_of(sigma, sym)
        if r is not None:
            if sym[2] == 0 and in_diff:
                w = rv(r)
                if w:
                    return Clash(e, w._example(), "state-dependent replacement inside a differential")
            if sym[2] > 0:
                for i in _markers_under_differential(r):
                    w = rv(e.args[i - 1])
                    if w:
                        return Clash(e, w._example(), "argument substituted into a differential")
    for c in S.children(e):
        found = _differential_clash(sigma, c, in_diff)
        if found is not None:
            return found
    return None


def _markers_under_differential(r: S.Node) -> set[int]:
    out = set()
    for n in S.walk(r):
        if isinstance(n, (S.Dt, S.DB)):
            out.update(m.index for m in S.walk(n.arg) if isinstance(m, S.Marker))
    return out

"""Definite descriptions by certified root search.

A one-dimensional body can only have an isolated solution where one of its
comparison atoms a >= b switches, so candidates are the sign changes and
exact zeros of a - b on a sinh-spaced grid over [-R, R], refined by
bisection. A candidate counts when the body is ⊕ there (equalities checked
with a small relative tolerance). The description denotes only if exactly
one candidate survives and no grid point away from it satisfies the body;
⊥ itself is a possible assignment and wins whenever it satisfies the body.

Several diamonds are solved one at a time: a diamond is determined by the
top-level conjuncts that mention it and no other unsolved diamond. The
combined assignment is then checked against the whole body.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np

from .. import syntax as S

_BISECT = 80
_TOL = 1e-9
_SCALE = 1e-3


@lru_cache(maxsize=8)
def grid(cells: int, radius: float) -> np.ndarray:
    """Grid points, dense near 0, exactly symmetric and containing 0."""
    half = cells // 2
    u = np.linspace(0.0, np.arcsinh(radius / _SCALE), half + 1)
    pos = _SCALE * np.sinh(u)
    pos[-1] = radius
    return np.concatenate([-pos[:0:-1], pos])


def _conjuncts(f: S.Formula) -> list[S.Formula]:
    if isinstance(f, S.And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _diamonds(f: S.Node, tag: int) -> set[int]:
    return {n.n for n in S.walk(f) if isinstance(n, S.Diamond) and n.tag == tag}


class _Sample:
    """Evaluates a body over many candidate diamond values for one sample."""

    def __init__(self, rt, b, i: int, tag: int):
        self.rt = rt
        self.vals = {k: float(v[i]) for k, v in b.vals.items()}
        self.draw = int(b.draws[i])
        self.sid = int(b.sid[i])
        self.tag = tag
        self.fixed: dict[int, float] = {}

    def batch(self, n: int, coord: int, xs: np.ndarray):
        from .engine import Batch

        vals = {k: np.full(n, v) for k, v in self.vals.items()}
        for m, x in self.fixed.items():
            vals[S.diamond_key(self.tag, m)] = np.full(n, x)
        vals[S.diamond_key(self.tag, coord)] = np.asarray(xs, dtype=float)
        return Batch(vals, np.zeros(n, np.int8), np.full(n, self.draw), np.full(n, self.sid))

    def truth(self, body, coord, xs, tol=0.0):
        from . import engine

        rt = dataclasses.replace(self.rt, eq_tol=tol) if tol else self.rt
        codes, _ = engine._formula(rt, self.batch(len(xs), coord, xs), body)
        return codes

    def gap(self, atom: S.Geq, coord, xs):
        from . import engine

        b = self.batch(len(xs), coord, xs)
        with np.errstate(all="ignore"):
            return engine._term(self.rt, b, atom.left) - engine._term(self.rt, b, atom.right)

    def solve(self, body: S.Formula, coord: int) -> float:
        """Unique value of diamond ``coord`` satisfying ``body`` or NaN."""
        from .engine import TOP

        if self.truth(body, coord, np.array([np.nan]))[0] == TOP:
            return np.nan
        interp = self.rt.interp
        xs = grid(interp.iota_cells, interp.iota_radius)
        atoms = [a for a in S.walk(body) if isinstance(a, S.Geq) and coord in _diamonds(a, self.tag)]
        candidates = []
        for atom in atoms:
            g = self.gap(atom, coord, xs)
            candidates.extend(xs[g == 0.0])
            s = np.sign(g)
            cells = np.flatnonzero((s[:-1] * s[1:]) < 0)
            if cells.size:
                candidates.extend(self._bisect(atom, coord, xs[cells], xs[cells + 1], s[cells]))
        if not candidates:
            return np.nan
        cand = np.unique(np.asarray(candidates, dtype=float))
        ok = self.truth(body, coord, cand, _TOL) == TOP
        sols = _dedupe(cand[ok])
        if len(sols) != 1:
            return np.nan
        root = sols[0]
        on_grid = self.truth(body, coord, xs) == TOP
        near = np.abs(xs - root) <= _TOL * max(1.0, abs(root))
        if (on_grid & ~near).any():
            return np.nan
        return float(root)

    def _bisect(self, atom, coord, lo, hi, s_lo):
        lo, hi = lo.copy(), hi.copy()
        for _ in range(_BISECT):
            mid = 0.5 * (lo + hi)
            g = self.gap(atom, coord, mid)
            same = np.sign(g) == s_lo
            zero = g == 0.0
            lo = np.where(same & ~zero, mid, lo)
            hi = np.where(same & ~zero, hi, mid)
            lo = np.where(zero, mid, lo)
        g_lo = np.abs(self.gap(atom, coord, lo))
        g_hi = np.abs(self.gap(atom, coord, hi))
        return np.where(g_hi < g_lo, hi, lo)


def _dedupe(xs: np.ndarray) -> list[float]:
    out: list[float] = []
    for x in sorted(xs):
        if out and abs(x - out[-1]) <= _TOL * max(1.0, abs(x)):
            continue
        out.append(float(x))
    return out


def _solve_sample(rt, b, i: int, node: S.Iota) -> float:
    from .engine import TOP

    body = S.desugar(node.body)
    sample = _Sample(rt, b, i, node.tag)
    parts = _conjuncts(body)
    pending = set(range(1, node.arity + 1))
    while pending:
        progress = False
        for coord in sorted(pending):
            others = pending - {coord}
            relevant = [
                c for c in parts if coord in _diamonds(c, node.tag) and not (_diamonds(c, node.tag) & others)
            ]
            if not relevant:
                continue
            sub = relevant[0]
            for c in relevant[1:]:
                sub = S.And(sub, c)
            value = sample.solve(sub, coord)
            if np.isnan(value):
                return np.nan
            sample.fixed[coord] = value
            pending.discard(coord)
            progress = True
            break
        if not progress:
            return np.nan
    last = max(sample.fixed)
    value = sample.fixed.pop(last)
    ok = sample.truth(body, last, np.array([value]), _TOL)[0] == TOP
    sample.fixed[last] = value
    return sample.fixed[node.index] if ok else np.nan


def solve_batch(rt, b, node: S.Iota) -> np.ndarray:
    out = np.full(b.n, np.nan)
    if any(isinstance(n, S.Iota) for n in S.walk(node.body)):
        return out
    for i in range(b.n):
        if b.status[i] == 0:
            out[i] = _solve_sample(rt, b, i, node)
    return out

"""Batched evaluator for terms, programs and formulas.

A :class:`Batch` holds one valuation per sample as column arrays (NaN is
⊥), a status column, a random-draw counter column and the index of each
sample's path in the shared :class:`PathPool`. The choice sequence is
shared by the batch; each sample has its own read cursor.

Evaluation routines mirror the denotational clauses case by case. Branching
constructs split the batch by sample index and merge the results back.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import syntax as S
from .paths import PathPool

OK, CRASH, OUT = 0, 1, 2
BOT, IND, TOP = 0, 1, 2


class Batch:
    __slots__ = ("vals", "status", "draws", "sid")

    def __init__(self, vals: dict, status: np.ndarray, draws: np.ndarray, sid: np.ndarray):
        self.vals = vals
        self.status = status
        self.draws = draws
        self.sid = sid

    @property
    def n(self) -> int:
        return len(self.sid)

    @staticmethod
    def empty(n: int) -> "Batch":
        return Batch({}, np.zeros(n, np.int8), np.zeros(n, np.int64), np.arange(n))

    @staticmethod
    def from_valuations(valuations, sid=None) -> "Batch":
        n = len(valuations)
        keys = sorted({k for v in valuations for k in v.values})
        vals = {k: np.array([v.get(k) for v in valuations], dtype=float) for k in keys}
        status = np.array([int(v.status) for v in valuations], dtype=np.int8)
        sid = np.arange(n) if sid is None else np.asarray(sid)
        return Batch(vals, status, np.zeros(n, np.int64), sid)

    @staticmethod
    def broadcast(v, like: "Batch") -> "Batch":
        """Valuation ``v`` repeated over ``like``'s samples, keeping their
        draw counters and paths."""
        n = like.n
        vals = {k: np.full(n, x) for k, x in v.values.items()}
        status = np.full(n, int(v.status), np.int8)
        return Batch(vals, status, like.draws, like.sid)

    def get(self, key: str) -> np.ndarray:
        arr = self.vals.get(key)
        if arr is None:
            return np.full(self.n, np.nan)
        return arr

    def take(self, idx: np.ndarray) -> "Batch":
        return Batch(
            {k: v[idx] for k, v in self.vals.items()},
            self.status[idx],
            self.draws[idx],
            self.sid[idx],
        )

    def copy(self) -> "Batch":
        return Batch(dict(self.vals), self.status.copy(), self.draws.copy(), self.sid)

    def valuation(self, i: int):
        from .values import Status, Valuation

        st = Status(int(self.status[i]))
        if st != Status.OK:
            return Valuation({}, st)
        return Valuation({k: float(v[i]) for k, v in self.vals.items() if np.isfinite(v[i])})


def merge(base: Batch, parts: list[tuple[np.ndarray, Batch]]) -> Batch:
    """Write sub-batch results back into a copy of ``base``."""
    out = base.copy()
    keys = set(out.vals)
    for _, part in parts:
        keys.update(part.vals)
    n = base.n
    vals = {k: (out.vals[k].copy() if k in out.vals else np.full(n, np.nan)) for k in keys}
    for idx, part in parts:
        for k in keys:
            vals[k][idx] = part.vals[k] if k in part.vals else np.nan
        out.status[idx] = part.status
        out.draws[idx] = part.draws
    out.vals = vals
    return out


class ChoiceSource:
    """Shared, co-finitely-zero choice bits."""

    def __init__(self, bits=()):
        self.bits = np.asarray(tuple(bits), dtype=np.int8)

    def read(self, pos: np.ndarray) -> np.ndarray:
        out = np.zeros(len(pos), np.int8)
        inside = pos < len(self.bits)
        out[inside] = self.bits[pos[inside]]
        return out


@dataclass(frozen=True)
class Runtime:
    """Evaluation context. ``bounded`` enables the enumeration caps used
    for modal formulas; pure program runs leave it off."""

    interp: object
    pool: PathPool
    bounded: bool = True
    choice_bound: int = 8
    star_bound: Optional[int] = 3
    eq_tol: float = 0.0
    recorder: Optional[object] = None

    def with_interp(self, interp) -> "Runtime":
        if interp is self.interp:
            return self
        return dataclasses.replace(self, interp=interp)


# ----------------------------------------------------------------- terms


def _clean(a: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(a)
    if bad.any():
        a = a.copy()
        a[bad] = np.nan
    return a


def term(rt: Runtime, b: Batch, t: S.Term) -> np.ndarray:
    """Values of ``t`` per sample; NaN where ⊥. Non-OK rows are ⊥."""
    out = _term(rt, b, t)
    if (b.status != OK).any():
        out = np.where(b.status == OK, out, np.nan)
    return out


def _term(rt: Runtime, b: Batch, t: S.Term) -> np.ndarray:
    match t:
        case S.Const(v):
            return np.full(b.n, v)
        case S.Var(name):
            return b.get(name)
        case S.Plus(x, y):
            with np.errstate(all="ignore"):
                return _clean(_term(rt, b, x) + _term(rt, b, y))
        case S.Times(x, y):
            with np.errstate(all="ignore"):
                return _clean(_term(rt, b, x) * _term(rt, b, y))
        case S.Func(name, args):
            meaning = rt.interp.function(name, len(args))
            if meaning is None:
                return np.full(b.n, np.nan)
            vals = [_term(rt, b, a) for a in args]
            return _clean(meaning.evaluate(rt, b, vals))
        case S.Marker():
            bound = rt.interp.markers.get(t)
            if bound is None:
                return np.full(b.n, np.nan)
            return np.broadcast_to(np.asarray(bound, dtype=float), (b.n,)).copy()
        case S.Diamond(tag, k):
            return b.get(S.diamond_key(tag, k))
        case S.Dt() | S.DB():
            from .differential import evaluate

            return evaluate(rt, b, t)
        case S.Iota():
            from .iota import solve_batch

            return solve_batch(rt, b, t)
    raise TypeError(f"not a term: {t!r}")


# -------------------------------------------------------------- formulas


def formula(rt: Runtime, b: Batch, f: S.Formula) -> tuple[np.ndarray, np.ndarray]:
    """Truth codes (0 ⊖, 1 ⊘, 2 ⊕) and truncation flags per sample."""
    codes, trunc = _formula(rt, b, f)
    if (b.status != OK).any():
        codes = np.where(b.status == OK, codes, IND).astype(np.int8)
    return codes, trunc


def _formula(rt: Runtime, b: Batch, f: S.Formula):
    n = b.n
    match f:
        case S.Geq(x, y):
            with np.errstate(all="ignore"):
                d = _term(rt, b, x) - _term(rt, b, y)
            codes = np.where(d >= -rt.eq_tol, TOP, BOT).astype(np.int8)
            codes[np.isnan(d)] = IND
            return codes, np.zeros(n, bool)
        case S.Not(g):
            c, tr = _formula(rt, b, g)
            return (2 - c).astype(np.int8), tr
        case S.And(g, h):
            c1, t1 = _formula(rt, b, g)
            c2, t2 = _formula(rt, b, h)
            return np.minimum(c1, c2), t1 | t2
        case S.Sure(g):
            c, tr = _formula(rt, b, g)
            return np.where(c == TOP, TOP, BOT).astype(np.int8), tr
        case S.Pred(name, args):
            meaning = rt.interp.predicate(name, len(args))
            if meaning is None:
                return np.full(n, IND, np.int8), np.zeros(n, bool)
            vals = [_term(rt, b, a) for a in args]
            c, tr = meaning.evaluate(rt, b, vals)
            return np.asarray(c, np.int8), np.asarray(tr, bool)
        case S.Modal(p, g):
            return modal(rt, b, p, g)
    if isinstance(f, S.Sugar):
        return _formula(rt, b, S.desugar(f))
    raise TypeError(f"not a formula: {f!r}")


def modal(rt: Runtime, b: Batch, p: S.Program, g: S.Formula):
    """Supremum over choice sequences of the post-condition value.

    Runs the program once per distinct choice prefix, a depth-first search
    over the positions each sample actually read. Positions at or beyond
    the choice bound are read as 0 and flag the sample as truncated.
    """
    n = b.n
    best = np.full(n, -1, np.int8)
    trunc = np.zeros(n, bool)
    bound = rt.choice_bound
    stack: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.arange(n))]
    while stack:
        prefix, idx = stack.pop()
        sub = b.take(idx)
        src = ChoiceSource(prefix)
        out, cur, tr = program(rt, sub, np.zeros(len(idx), np.int64), src, p)
        codes, tr2 = formula(rt, out, g)
        codes = np.where(out.status == OUT, -1, codes).astype(np.int8)
        best[idx] = np.maximum(best[idx], codes)
        trunc[idx] |= tr | tr2 | (cur > bound)
        for j in range(len(prefix), bound):
            sel = cur > j
            if not sel.any():
                break
            stack.append((prefix + (0,) * (j - len(prefix)) + (1,), idx[sel]))
    best[best < 0] = BOT
    return best, trunc


# -------------------------------------------------------------- programs


def program(rt: Runtime, b: Batch, cur: np.ndarray, src: ChoiceSource, p: S.Program):
    """Run ``p``; returns the output batch, cursors and truncation flags.

    Samples whose status is not OK pass through unchanged.
    """
    n = b.n
    active = b.status == OK
    none = np.zeros(n, bool)
    match p:
        case S.Skip():
            return b, cur, none
        case S.Fail():
            out = b.copy()
            out.status[active] = CRASH
            return out, cur, none
        case S.Assign(x, t):
            val = _term(rt, b, t)
            out = b.copy()
            bad = active & np.isnan(val)
            out.status[bad] = CRASH
            good = active & ~bad
            out.vals[x] = np.where(good, val, b.get(x))
            return out, cur, none
        case S.Random(x):
            out = b.copy()
            idx = np.flatnonzero(active)
            new = b.get(x).copy()
            new[idx] = rt.pool.uniforms(b.sid[idx], b.draws[idx])
            out.vals[x] = new
            out.draws[idx] += 1
            return out, cur, none
        case S.Seq(x, y):
            b1, c1, t1 = program(rt, b, cur, src, x)
            b2, c2, t2 = program(rt, b1, c1, src, y)
            return b2, c2, t1 | t2
        case S.Choice(x, y):
            cur = cur.copy()
            bits = src.read(cur)
            cur[active] += 1
            return _split(rt, b, cur, src, [(active & (bits == 0), x), (active & (bits == 1), y)])
        case S.If(h, x, y):
            codes, _ = formula(rt, b, h)
            out = b.copy()
            out.status[active & (codes == IND)] = CRASH
            return _split(rt, out, cur, src, [(active & (codes == TOP), x), (active & (codes == BOT), y)])
        case S.Star(body):
            count, cur, trunc = _read_nat(rt, cur, src, active, rt.star_bound if rt.bounded else None, True)
            out = b
            for k in range(int(count.max()) if n else 0):
                sel = np.flatnonzero((count > k) & (out.status == OK))
                if sel.size == 0:
                    break
                sub, c2, t2 = program(rt, out.take(sel), cur[sel], src, body)
                out = merge(out, [(sel, sub)])
                cur = cur.copy()
                cur[sel] = c2
                trunc[sel] |= t2
            return out, cur, trunc
        case S.SDE():
            from .sde import integrate

            times = rt.interp.times
            cap = len(times) - 1 if rt.bounded else None
            count, cur, _ = _read_nat(rt, cur, src, active, cap, False)
            t_stop = np.asarray(times)[np.minimum(count, len(times) - 1)]
            idx = np.flatnonzero(active)
            if idx.size == 0:
                return b, cur, none
            sub = integrate(rt, b.take(idx), p, t_stop[idx], rt.recorder)
            return merge(b, [(idx, sub)]), cur, none
        case S.ProgSym(name):
            meaning = rt.interp.program(name)
            if meaning is None:
                out = b.copy()
                out.status[active] = CRASH
                return out, cur, none
            return meaning.run(rt, b, cur, src)
    raise TypeError(f"not a program: {p!r}")


def _split(rt, b, cur, src, branches):
    parts = []
    newcur = cur.copy()
    trunc = np.zeros(b.n, bool)
    for mask, prog in branches:
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            continue
        sub, c2, t2 = program(rt, b.take(idx), cur[idx], src, prog)
        parts.append((idx, sub))
        newcur[idx] = c2
        trunc[idx] = t2
    return (merge(b, parts) if parts else b), newcur, trunc


def _read_nat(rt, cur, src, active, cap, flag_cap):
    """Read ``nat(C)`` per active sample and advance past the terminating
    zero. ``cap`` stops reading early (no terminator consumed); reaching it
    flags truncation when ``flag_cap`` is set."""
    cur = cur.copy()
    count = np.zeros(len(cur), np.int64)
    trunc = np.zeros(len(cur), bool)
    reading = active.copy()
    if cap is not None and cap <= 0:
        if flag_cap:
            trunc[reading] = True
        return count, cur, trunc
    while reading.any():
        idx = np.flatnonzero(reading)
        bits = src.read(cur[idx])
        cur[idx] += 1
        ones = idx[bits == 1]
        zeros = idx[bits == 0]
        count[ones] += 1
        reading[zeros] = False
        if cap is not None:
            hit = ones[count[ones] >= cap]
            reading[hit] = False
            if flag_cap:
                trunc[hit] = True
    return count, cur, trunc

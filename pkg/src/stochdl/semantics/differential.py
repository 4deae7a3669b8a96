"""Differential terms by symbolic expansion.

For a term θ built from arithmetic, constants and symbols with definable
meanings, the time differential is the Itô expansion

    d_t θ = Σ_y y_t ∂θ/∂y + ½ Σ_{y,z} ∂²θ/∂y∂z Σ_{j∈J} y_B[j] z_B[j]

and the Brownian differential is d_B,x θ = Σ_y ∂θ/∂y y_B[x].

Sums run over the variables y with a non-zero symbolic partial. J is the
set of indices j for which some y_B[j] is defined in the valuation, which
keeps the sums finite on finite-support valuations. Anything outside this
closure (descriptions, opaque callables) evaluates to ⊥.
"""

from __future__ import annotations

import re
from typing import Optional

import numpy as np

from .. import syntax as S

ZERO = S.Const(0.0)
ONE = S.Const(1.0)
HALF = S.Const(0.5)
_NAN = S.Const(float("nan"))


def marker_key(m: S.Marker) -> str:
    return f"•{m.owner}.{m.kind}.{m.symbol}.{m.arity}.{m.index}"


def inline(rt, t: S.Term, extra: Optional[dict] = None) -> Optional[S.Term]:
    """Rewrite ``t`` into plain arithmetic over variables, expanding
    definable symbols. Returns None outside the differentiable closure."""
    if extra is None:
        extra = {}
    match t:
        case S.Const() | S.Var():
            return t
        case S.Marker():
            bound = rt.interp.markers.get(t)
            if bound is None:
                return _NAN
            key = marker_key(t)
            extra[key] = bound
            return S.Var(key)
        case S.Plus(a, b) | S.Times(a, b):
            x, y = inline(rt, a, extra), inline(rt, b, extra)
            if x is None or y is None:
                return None
            return type(t)(x, y)
        case S.Func(name, args):
            meaning = rt.interp.function(name, len(args))
            if meaning is None:
                return _NAN
            inner = [inline(rt, a, extra) for a in args]
            if any(a is None for a in inner):
                return None
            return meaning.inline(rt, inner)
        case S.Dt(a):
            x = inline(rt, a, extra)
            return None if x is None else S.Dt(x)
        case S.DB(i, a):
            x = inline(rt, a, extra)
            return None if x is None else S.DB(i, x)
    return None


def add(a: S.Term, b: S.Term) -> S.Term:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(a, S.Const) and isinstance(b, S.Const):
        return S.Const(a.value + b.value)
    return S.Plus(a, b)


def mul(a: S.Term, b: S.Term) -> S.Term:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, S.Const) and isinstance(b, S.Const):
        return S.Const(a.value * b.value)
    return S.Times(a, b)


def partial(t: S.Term, y: str) -> S.Term:
    match t:
        case S.Const():
            return ZERO
        case S.Var(name):
            return ONE if name == y else ZERO
        case S.Plus(a, b):
            return add(partial(a, y), partial(b, y))
        case S.Times(a, b):
            return add(mul(partial(a, y), b), mul(a, partial(b, y)))
    raise TypeError(f"cannot differentiate {t!r}")


def _variables(t: S.Term) -> list[str]:
    names = {n.name for n in S.walk(t) if isinstance(n, S.Var) and not n.name.startswith("•")}
    return sorted(names)


def dependencies(t: S.Term) -> list[tuple[str, S.Term]]:
    """Variables with a symbolically non-zero partial, with the partial."""
    out = []
    for y in _variables(t):
        d = partial(t, y)
        if d != ZERO:
            out.append((y, d))
    return out


_BROWN = re.compile(r"^(.*)_B\[(.*)\]$")


def _noise_indices(keys, ys: set[str]) -> list[str]:
    out = set()
    for k in keys:
        for y in ys:
            prefix = f"{y}_B["
            if k.startswith(prefix) and k.endswith("]"):
                j = k[len(prefix) : -1]
                if S.brown_var(y, j) == k and S.is_variable_name(j):
                    out.add(j)
    return sorted(out)


def _expand(kind, index, theta: S.Term, vals: dict, idx: np.ndarray):
    """Differential of a differential-free term, split into sample groups
    sharing the same noise index set."""
    deps = dependencies(theta)
    if kind == "B":
        total = ZERO
        for y, d in deps:
            total = add(total, mul(d, S.Var(S.brown_var(y, index))))
        return [(idx, total)]
    first = ZERO
    for y, d in deps:
        first = add(first, mul(S.Var(S.time_var(y)), d))
    ys = [y for y, _ in deps]
    js = _noise_indices(vals.keys(), set(ys))
    if not js or not ys:
        return [(idx, first)]
    defined = np.zeros((len(idx), len(js)), bool)
    for c, j in enumerate(js):
        for y in ys:
            arr = vals.get(S.brown_var(y, j))
            if arr is not None:
                defined[:, c] |= np.isfinite(arr[idx])
    second = [(y, z, partial(dy, z)) for i, (y, dy) in enumerate(deps) for z, _ in deps[i:]]
    second = [(y, z, c) for y, z, c in second if c != ZERO]
    groups = []
    patterns, inverse = np.unique(defined, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    for g, pattern in enumerate(patterns):
        members = idx[inverse == g]
        J = [j for j, on in zip(js, pattern) if on]
        qv = ZERO
        for y, z, c in second:
            q = ZERO
            for j in J:
                q = add(q, mul(S.Var(S.brown_var(y, j)), S.Var(S.brown_var(z, j))))
            if q == ZERO:
                continue
            coeff = mul(HALF, c) if y == z else c
            qv = add(qv, mul(coeff, q))
        groups.append((members, add(first, qv)))
    return groups


def _resolve(t: S.Term, vals: dict, idx: np.ndarray):
    """Partition samples and give each part a differential-free term."""
    if not any(isinstance(n, (S.Dt, S.DB)) for n in S.walk(t)):
        return [(idx, t)]
    match t:
        case S.Dt(a) | S.DB(_, a):
            kind = "t" if isinstance(t, S.Dt) else "B"
            index = getattr(t, "index", None)
            out = []
            for sub, inner in _resolve(a, vals, idx):
                out.extend(_expand(kind, index, inner, vals, sub))
            return out
        case S.Plus(a, b) | S.Times(a, b):
            out = []
            for ia, ta in _resolve(a, vals, idx):
                for ib, tb in _resolve(b, vals, ia):
                    out.append((ib, type(t)(ta, tb)))
            return out
    return [(idx, t)]


def evaluate(rt, b, node: S.Term) -> np.ndarray:
    """Values of a Dt/DB node on a batch."""
    from . import engine

    extra: dict = {}
    ir = inline(rt, node, extra)
    n = b.n
    if ir is None:
        return np.full(n, np.nan)
    vals = dict(b.vals)
    for k, v in extra.items():
        vals[k] = np.broadcast_to(np.asarray(v, dtype=float), (n,))
    view = engine.Batch(vals, b.status, b.draws, b.sid)
    out = np.full(n, np.nan)
    for idx, t in _resolve(ir, vals, np.arange(n)):
        if idx.size:
            out[idx] = engine._term(rt, view.take(idx), t)
    return out

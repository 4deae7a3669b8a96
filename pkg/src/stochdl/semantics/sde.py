"""Euler–Maruyama integration of SDE programs on a batch.

The grid is 0, h, 2h, ... with a final partial step landing exactly on
each sample's stop time; the partial Brownian increment is drawn from the
bridge between grid points. Updates use compensated summation so that
constant drift integrates without rounding drift.

At every grid point (and at the stop time) drift and diffusion must be
defined, otherwise the run crashes; the boundary formula is evaluated on
the stopped valuation (state, x_t := b, x_B[y] := sigma) and anything but
TOP makes the run leave the domain.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .. import syntax as S
from . import engine
from .engine import CRASH, OK, OUT, TOP, Batch

Recorder = Callable[[float, dict, int], None]


def _stopped(b: Batch, prog: S.SDE, state, drift, diff) -> Batch:
    vals = dict(b.vals)
    for i, x in enumerate(prog.vars):
        vals[x] = state[i]
        vals[S.time_var(x)] = drift[i]
        for j, y in enumerate(prog.vars):
            vals[S.brown_var(x, y)] = diff[i][j]
    return Batch(vals, b.status, b.draws, b.sid)


def _is_zero(t: S.Term) -> bool:
    return isinstance(t, S.Const) and t.value == 0.0


def integrate(
    rt,
    b: Batch,
    prog: S.SDE,
    t_stop: np.ndarray,
    recorder: Optional[Recorder] = None,
) -> Batch:
    """Run ``prog`` from ``b`` up to ``t_stop`` (per sample)."""
    n = b.n
    h = rt.interp.step
    m = len(prog.vars)
    status = b.status.copy()
    k_full = np.floor(t_stop / h).astype(np.int64)
    rem = t_stop - k_full * h
    snap = rem > h * (1 - 1e-9)
    k_full[snap] += 1
    rem[snap] = 0.0
    rem[rem < h * 1e-9] = 0.0

    # compensated state: value = hi + lo
    hi = [b.get(x).copy() for x in prog.vars]
    lo = [np.zeros(n) for _ in prog.vars]
    undefined_start = np.zeros(n, bool)
    for arr in hi:
        undefined_start |= np.isnan(arr)
    status[(status == OK) & undefined_start] = CRASH

    noisy = [j for j in range(m) if not all(_is_zero(prog.diffusion[i][j]) for i in range(m))]
    result = {k: v.copy() for k, v in b.vals.items()}
    keys = list(prog.vars) + [S.time_var(x) for x in prog.vars] + [
        S.brown_var(x, y) for x in prog.vars for y in prog.vars
    ]
    for k in keys:
        result.setdefault(k, np.full(n, np.nan))
    done = status != OK
    sqrt_h = math.sqrt(h)

    def check(t_now: float, alive: np.ndarray, finishing: np.ndarray):
        state = [hi[i] + lo[i] for i in range(m)]
        view = Batch(dict(b.vals), status, b.draws, b.sid)
        for i, x in enumerate(prog.vars):
            view.vals[x] = state[i]
        drift = [engine._term(rt, view, e) for e in prog.drift]
        diff = [[engine._term(rt, view, e) for e in row] for row in prog.diffusion]
        bad = np.zeros(n, bool)
        for arr in state + drift + [a for row in diff for a in row]:
            bad |= ~np.isfinite(arr)
        crash = alive & bad
        status[crash] = CRASH
        alive = alive & ~crash
        stopped = _stopped(view, prog, state, drift, diff)
        codes, _ = engine._formula(rt, stopped, prog.boundary)
        out = alive & (codes != TOP)
        status[out] = OUT
        alive = alive & ~out
        fin = alive & finishing
        for key in keys:
            result[key][fin] = stopped.vals[key][fin]
        if recorder is not None and n == 1:
            recorder(t_now, {x: float(state[i][0]) for i, x in enumerate(prog.vars)}, int(status[0]))
        return alive, drift, diff, fin

    def add(i, incr, mask):
        if not mask.any():
            return
        with np.errstate(all="ignore"):
            s = hi[i] + incr
            big = np.abs(hi[i]) >= np.abs(incr)
            corr = np.where(big, (hi[i] - s) + incr, (incr - s) + hi[i])
        hi[i] = np.where(mask, s, hi[i])
        lo[i] = np.where(mask, lo[i] + corr, lo[i])

    k_max = int(k_full.max()) if n else 0
    for k in range(k_max + 1):
        alive = ~done & (k <= k_full)
        if not alive.any():
            break
        at_end = (k == k_full) & (rem == 0.0)
        alive, drift, diff, fin = check(k * h, alive, at_end)
        done |= fin | (status != OK)
        full = alive & (k < k_full)
        part = alive & (k == k_full) & (rem > 0.0)
        if not (full.any() or part.any()):
            continue
        dw = {}
        for j in noisy:
            z = engine_normals(rt, prog.vars[j], k, b.sid)
            dw_full = sqrt_h * z
            if part.any():
                zb = rt.pool.bridges(prog.vars[j], k, b.sid)
                dw_part = (rem / h) * dw_full + np.sqrt(rem * (h - rem) / h) * zb
                dw[j] = np.where(part, dw_part, dw_full)
            else:
                dw[j] = dw_full
        dt = np.where(part, rem, h)
        moving = full | part
        for i in range(m):
            with np.errstate(all="ignore"):
                incr = drift[i] * dt
                for j in noisy:
                    incr = incr + diff[i][j] * dw[j]
            add(i, incr, moving)
        if part.any():
            t_end = float(t_stop[part][0]) if n == 1 else k * h
            alive2, _, _, fin2 = check(t_end, part & (status == OK), part)
            done |= fin2 | (status != OK)

    out = Batch(result, status, b.draws.copy(), b.sid)
    bad = status != OK
    if bad.any():
        for key in out.vals:
            out.vals[key] = np.where(bad, np.nan, out.vals[key])
    return out


def engine_normals(rt, coord: str, k: int, sid: np.ndarray) -> np.ndarray:
    return rt.pool.normals(coord, k, sid)

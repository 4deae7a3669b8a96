"""Monte-Carlo estimation of P(phi) and statistical checks of
probabilistic claims.

P(phi) is the probability that phi evaluates to TOP. Each sample draws an
initial valuation from an :class:`InitialSpec` and a sample path from its
own seed; seeds derive from a master seed, so estimates are reproducible
and estimates of different formulas under the same master seed are
matched sample by sample.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.stats import binomtest

from . import syntax as S
from .semantics import Interpretation, Valuation, eval_formula_batch
from .spade import (
    PAnd,
    PAtom,
    PCmp,
    PConst,
    PImplies,
    PNot,
    POr,
    PPlus,
    PSym,
    PTimes,
    ProbFormula,
)

BATCH = 512


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo <= self.hi):
            raise ValueError(f"bad uniform range U({self.lo}, {self.hi})")


@dataclass(frozen=True)
class InitialSpec:
    """Distribution of the starting valuation: each variable is a point
    value or an independent uniform. Never produces a crash or out state."""

    entries: Mapping[str, Union[float, Uniform]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.entries).items():
            if not S.is_variable_name(k):
                raise ValueError(f"bad variable name {k!r}")
            if isinstance(v, Uniform):
                clean[k] = v
            else:
                v = float(v)
                if not math.isfinite(v):
                    raise ValueError(f"initial value of {k} must be a finite real")
                clean[k] = v
        object.__setattr__(self, "entries", clean)

    def sample(self, n: int, seed: int) -> list[Valuation]:
        rng = np.random.default_rng([seed, 1])
        cols = {}
        for k in sorted(self.entries):
            v = self.entries[k]
            cols[k] = rng.uniform(v.lo, v.hi, n) if isinstance(v, Uniform) else np.full(n, v)
        return [Valuation({k: float(c[i]) for k, c in cols.items()}) for i in range(n)]


_ITEM = re.compile(r"\s*([^=,\s]+)\s*=\s*(?:U\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)|([^,\s]+))\s*(,|$)")


def parse_initial(text: str) -> InitialSpec:
    """``x=0.5, y=U(0,1)``."""
    entries: dict = {}
    pos, text = 0, text.strip()
    while pos < len(text):
        m = _ITEM.match(text, pos)
        if m is None:
            raise ValueError(f"bad initial assignment near {text[pos:]!r}")
        name, lo, hi, point, _ = m.groups()
        entries[name] = Uniform(float(lo), float(hi)) if point is None else float(point)
        pos = m.end()
    return InitialSpec(entries)


def path_seeds(seed: int, n: int) -> np.ndarray:
    return np.random.default_rng([seed, 0]).integers(0, 2**63 - 1, n, dtype=np.int64)


def wilson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class ProbEstimate:
    p: float
    lo: float
    hi: float
    n: int
    truncated: float
    level: float = 0.95
    # per-sample TOP indicators and the master seed they came from
    outcomes: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    seed: Optional[int] = field(default=None, compare=False, repr=False)

    @property
    def k(self) -> int:
        return int(round(self.p * self.n))

    def __str__(self) -> str:
        return f"p={self.p!r} ci=[{self.lo!r},{self.hi!r}] n={self.n} truncated={self.truncated!r}"

    @classmethod
    def from_outcomes(cls, top: np.ndarray, trunc: np.ndarray, level=0.95, seed=None) -> "ProbEstimate":
        n = len(top)
        k = int(np.count_nonzero(top))
        lo, hi = wilson(k, n, level)
        p = k / n
        return cls(p, min(lo, p), max(hi, p), n, float(np.mean(trunc)), level, np.asarray(top, bool), seed)


def outcomes(
    I: Interpretation,
    initial: InitialSpec,
    phi: S.Formula,
    n: int,
    seed: int = 0,
    choice_bound: Optional[int] = None,
    star_bound: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Truth codes and truncation flags of ``phi`` on ``n`` matched samples."""
    if n < 1:
        raise ValueError("sample count must be positive")
    vals = initial.sample(n, seed)
    seeds = path_seeds(seed, n)
    codes = np.empty(n, np.int8)
    trunc = np.empty(n, bool)
    for lo in range(0, n, BATCH):
        hi = min(n, lo + BATCH)
        c, t = eval_formula_batch(I, vals[lo:hi], seeds[lo:hi], phi, choice_bound, star_bound)
        codes[lo:hi] = c
        trunc[lo:hi] = t
    return codes, trunc


def estimate(
    I: Interpretation,
    initial: InitialSpec,
    phi: S.Formula,
    n: int = 10_000,
    seed: int = 0,
    level: float = 0.95,
    choice_bound: Optional[int] = None,
    star_bound: Optional[int] = None,
) -> ProbEstimate:
    codes, trunc = outcomes(I, initial, phi, n, seed, choice_bound, star_bound)
    return ProbEstimate.from_outcomes(codes == S.TruthValue.TOP, trunc, level, seed)


# ----------------------------------------------------------- ♠ checking


@dataclass(frozen=True)
class Verdict:
    kind: str  # consistent | violated | inconclusive
    margin: Optional[float] = None
    detail: str = ""

    def __str__(self) -> str:
        if self.kind == "violated" and self.margin is not None:
            return f"violated (margin {self.margin:.6g})"
        return self.kind


class UnboundAtom(KeyError):
    pass


def _coupled_boxes(atoms, bindings):
    """Interval per atom; atoms with identical matched-seed outcome
    vectors share one variable."""
    var_of, boxes, seen = {}, [], {}
    for f in atoms:
        if f in var_of:
            continue
        est = bindings.get(f)
        if est is None:
            from .printer import print_node

            raise UnboundAtom(f"no estimate bound for P({print_node(f)})")
        key = None
        if est.outcomes is not None and est.seed is not None:
            key = (est.seed, est.outcomes.tobytes(), est.n)
        if key is not None and key in seen:
            var_of[f] = seen[key]
            continue
        var_of[f] = len(boxes)
        boxes.append((est.lo, est.hi))
        if key is not None:
            seen[key] = var_of[f]
    return var_of, boxes


def _degrees(t, var_of) -> Optional[dict]:
    """Per-variable degree of a term, or None for symbols."""
    match t:
        case PConst():
            return {}
        case PAtom(f):
            return {var_of[f]: 1}
        case PPlus(a, b):
            da, db = _degrees(a, var_of), _degrees(b, var_of)
            return {k: max(da.get(k, 0), db.get(k, 0)) for k in da.keys() | db.keys()}
        case PTimes(a, b):
            da, db = _degrees(a, var_of), _degrees(b, var_of)
            return {k: da.get(k, 0) + db.get(k, 0) for k in da.keys() | db.keys()}
    raise TypeError(f"unbound constant symbol in {t!r}")


def _value(t, var_of, point) -> float:
    match t:
        case PConst(v):
            return v
        case PAtom(f):
            return point[var_of[f]]
        case PPlus(a, b):
            return _value(a, var_of, point) + _value(b, var_of, point)
        case PTimes(a, b):
            return _value(a, var_of, point) * _value(b, var_of, point)
    raise TypeError(t)


def _interval(t, var_of, boxes) -> tuple[float, float]:
    match t:
        case PConst(v):
            return v, v
        case PAtom(f):
            return boxes[var_of[f]]
        case PPlus(a, b):
            (a0, a1), (b0, b1) = _interval(a, var_of, boxes), _interval(b, var_of, boxes)
            return a0 + b0, a1 + b1
        case PTimes(a, b):
            (a0, a1), (b0, b1) = _interval(a, var_of, boxes), _interval(b, var_of, boxes)
            ps = (a0 * b0, a0 * b1, a1 * b0, a1 * b1)
            return min(ps), max(ps)
    raise TypeError(t)


_VERTEX_LIMIT = 12


def _range(diff, var_of, boxes) -> tuple[float, float]:
    """Range of ``diff`` over the box: exact at the vertices when the
    expression is multilinear, interval arithmetic otherwise."""
    deg = _degrees(diff, var_of)
    used = sorted(deg)
    if all(d <= 1 for d in deg.values()) and len(used) <= _VERTEX_LIMIT:
        point = [0.5 * (lo + hi) for lo, hi in boxes]
        vals = []
        for corner in itertools.product(*[boxes[v] for v in used]):
            for v, x in zip(used, corner):
                point[v] = x
            vals.append(_value(diff, var_of, point))
        return min(vals), max(vals)
    return _interval(diff, var_of, boxes)


_TRUE, _UNKNOWN, _FALSE = 2, 1, 0


def _cmp(op, lo, hi, eps) -> tuple[int, float]:
    """Three-way verdict of ``d op 0`` for d ranging over [lo, hi]."""
    if op == ">=":
        return (_TRUE if lo >= 0 else _FALSE if hi <= -eps else _UNKNOWN), -hi
    if op == ">":
        return (_TRUE if lo > 0 else _FALSE if hi <= -eps else _UNKNOWN), -hi
    if op == "<=":
        return (_TRUE if hi <= 0 else _FALSE if lo >= eps else _UNKNOWN), lo
    if op == "<":
        return (_TRUE if hi < 0 else _FALSE if lo >= eps else _UNKNOWN), lo
    if op == "=":
        if lo == 0 and hi == 0:
            return _TRUE, 0.0
        margin = max(lo, -hi)
        return (_FALSE if margin >= eps else _UNKNOWN), margin
    raise ValueError(f"unknown comparison {op!r}")


def check_spade(spade: ProbFormula, bindings: Mapping[S.Formula, ProbEstimate], eps: float = 0.01) -> Verdict:
    from .spade import atoms

    var_of, boxes = _coupled_boxes(list(atoms(spade)), bindings)
    margins: list[float] = []

    def go(f) -> int:
        match f:
            case PCmp(op, a, b):
                lo, hi = _range(PPlus(a, PTimes(PConst(-1.0), b)), var_of, boxes)
                v, m = _cmp(op, lo, hi, eps)
                if v == _FALSE:
                    margins.append(m)
                return v
            case PNot(a):
                return 2 - go(a)
            case PAnd(a, b):
                return min(go(a), go(b))
            case POr(a, b):
                return max(go(a), go(b))
            case PImplies(a, b):
                return max(2 - go(a), go(b))
        raise TypeError(f)

    v = go(spade)
    if v == _TRUE:
        return Verdict("consistent")
    if v == _FALSE:
        return Verdict("violated", min(margins) if margins else None)
    return Verdict("inconclusive")


def check_spade_sampled(
    I: Interpretation,
    initial: InitialSpec,
    spade: ProbFormula,
    n: int = 10_000,
    seed: int = 0,
    eps: float = 0.01,
    level: float = 0.95,
) -> tuple[Verdict, dict]:
    """Estimate every atom on matched seeds, then check."""
    from .spade import atoms

    if any(isinstance(t, PSym) for t in _terms(spade)):
        raise UnboundAtom("constant symbols must be instantiated before checking")
    bindings = {}
    for f in atoms(spade):
        if f not in bindings:
            bindings[f] = estimate(I, initial, f, n, seed, level)
    return check_spade(spade, bindings, eps), bindings


def _terms(f):
    match f:
        case PCmp(_, a, b) | PPlus(a, b) | PTimes(a, b) | PAnd(a, b) | POr(a, b) | PImplies(a, b):
            yield f
            yield from _terms(a)
            yield from _terms(b)
        case PNot(a):
            yield from _terms(a)
        case _:
            yield f


# ------------------------------------------------ randomization integral


@dataclass(frozen=True)
class IntegralCheck:
    verdict: Verdict
    lhs: ProbEstimate
    rhs: ProbEstimate

    def __str__(self) -> str:
        return f"{self.verdict} lhs=[{self.lhs.lo:.6g},{self.lhs.hi:.6g}] rhs=[{self.rhs.lo:.6g},{self.rhs.hi:.6g}]"


def _overlap(a: ProbEstimate, b: ProbEstimate, eps: float) -> bool:
    return a.lo - eps <= b.hi and b.lo - eps <= a.hi


def check_randomization(
    I: Interpretation,
    initial: InitialSpec,
    phi: S.Formula,
    x: str,
    m: int = 100,
    n: int = 10_000,
    eps: float = 0.01,
    seed: int = 0,
    level: float = 0.95,
) -> IntegralCheck:
    """P(<x:=*>phi) against the midpoint sum (1/m) Σ P(<x:=s_k>phi).

    The right side pools n // m samples per node, so its Wilson interval
    covers the stratified estimate of the integral."""
    lhs = estimate(I, initial, S.Modal(S.Random(x), phi), n, seed, level)
    per = max(1, n // m)
    tops, truncs = [], []
    for k in range(m):
        s = (k + 0.5) / m
        codes, trunc = outcomes(I, initial, S.Modal(S.Assign(x, S.Const(s)), phi), per, seed + 1 + k)
        tops.append(codes == S.TruthValue.TOP)
        truncs.append(trunc)
    rhs = ProbEstimate.from_outcomes(np.concatenate(tops), np.concatenate(truncs), level)
    verdict = Verdict("consistent") if _overlap(lhs, rhs, eps) else Verdict(
        "violated", max(lhs.lo - rhs.hi, rhs.lo - lhs.hi)
    )
    return IntegralCheck(verdict, lhs, rhs)


def check_mixture(
    I: Interpretation,
    initial: InitialSpec,
    x: str,
    c: float,
    alpha: S.Program,
    beta: S.Program,
    phi: S.Formula,
    n: int = 10_000,
    eps: float = 0.01,
    seed: int = 0,
    level: float = 0.95,
) -> IntegralCheck:
    """P(<x:=*; if x<c then alpha else beta>phi) >= c P(<alpha>phi) + (1-c) P(<beta>phi)."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    prog = S.Seq(S.Random(x), S.If(S.desugar(S.lt(S.Var(x), S.Const(c))), alpha, beta))
    lhs = estimate(I, initial, S.Modal(prog, phi), n, seed, level)
    a = estimate(I, initial, S.Modal(alpha, phi), n, seed + 1, level)
    b = estimate(I, initial, S.Modal(beta, phi), n, seed + 2, level)
    p = c * a.p + (1 - c) * b.p
    rhs = ProbEstimate(p, c * a.lo + (1 - c) * b.lo, c * a.hi + (1 - c) * b.hi, 2 * n, max(a.truncated, b.truncated), level)
    if lhs.hi + eps >= rhs.lo:
        verdict = Verdict("consistent")
    else:
        verdict = Verdict("violated", rhs.lo - lhs.hi)
    return IntegralCheck(verdict, lhs, rhs)

"""Judgments, axiom instantiation and the inference rules.

Formulas inside judgments are kept in core syntax; comparisons between
formulas ignore source spans and description tags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .. import syntax as S
from ..analysis import Clash, admissible
from ..printer import _as_implies, print_node
from ..spade import PAtom, PCmp, PConst, PPlus, ProbFormula, atoms, print_spade
from ..substitution import Substitution, apply, apply_prob, ground_value, validate
from .axioms import PATHWISE, lookup

PROB = "prob"

SDE_OBLIGATIONS = (
    "the meaning of {theta} has compact real support for every interpretation and path",
    "drift and diffusion of {sde} are real and Lipschitz on the states where {h} is true",
)


class RuleError(Exception):
    """A rule or instantiation that does not apply; ``clash`` carries the
    admissibility witness when that is the reason."""

    def __init__(self, message: str, clash: Optional[Clash] = None):
        super().__init__(message)
        self.clash = clash


@dataclass(frozen=True)
class Judgment:
    kind: str
    formula: Union[S.Formula, ProbFormula]
    obligations: tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        return render(self.formula) if self.kind == PATHWISE else print_spade(self.formula)

    def same(self, other: "Judgment") -> bool:
        return self.kind == other.kind and key(self.formula) == key(other.formula)


def render(f: S.Formula) -> str:
    return print_node(f)


def key(node):
    """Structural identity up to spans and description tags."""
    if isinstance(node, S.Node):
        return S.canonical(node, {}, 0)
    if isinstance(node, PAtom):
        return ("P", key(node.formula))
    fields = getattr(node, "__dataclass_fields__", None)
    if fields is None:
        return node
    return (type(node).__name__,) + tuple(key(getattr(node, f)) for f in fields)


def _merge(*groups: Iterable[str]) -> tuple[str, ...]:
    out: list[str] = []
    for g in groups:
        for o in g:
            if o not in out:
                out.append(o)
    return tuple(out)


def _pathwise(j: Judgment, what: str) -> S.Formula:
    if j.kind != PATHWISE:
        raise RuleError(f"{what} must be a pathwise judgment")
    return j.formula


# ------------------------------------------------------- instantiation


def rename_schema(f, mapping: Mapping[str, str]):
    """Rename literal variables of a schema, refusing non-injective or
    capturing maps."""
    if not mapping:
        return f
    targets = list(mapping.values())
    if len(set(targets)) != len(targets):
        raise RuleError("renaming is not injective")
    for a, b in mapping.items():
        if not (S.is_variable_name(a) and S.is_variable_name(b)) or "_" in a or "_" in b:
            raise RuleError(f"renaming {a} -> {b} must map base variable names")
    nodes = list(atoms(f)) if not isinstance(f, S.Node) else [f]
    present = set()
    for n in nodes:
        for x in S.walk(n):
            if isinstance(x, S.Var):
                present.add(x.name.split("_")[0])
            elif isinstance(x, (S.Assign, S.Random)):
                present.add(x.var)
            elif isinstance(x, S.SDE):
                present.update(x.vars)
            elif isinstance(x, S.DB):
                present.add(x.index.split("_")[0])
    for b in targets:
        if b in present and b not in mapping:
            raise RuleError(f"renaming captures variable {b}")
    if isinstance(f, S.Node):
        return S.rename(f, dict(mapping))
    from ..spade import map_atoms

    return map_atoms(f, lambda g: S.rename(g, dict(mapping)))


def _substitute(sigma: Substitution, f, kind: str):
    problems = validate(sigma)
    if problems:
        raise RuleError(f"invalid substitution: {problems[0]}")
    if kind == PATHWISE:
        verdict = admissible(sigma, f)
        if not verdict:
            raise RuleError(f"inadmissible substitution: {verdict}", verdict)
        out = S.desugar(apply(sigma, f))
        bad = S.well_formed(out)
        if bad:
            raise RuleError(f"substitution result is ill-formed: {bad[0]}")
        return out
    for a in atoms(f):
        verdict = admissible(sigma, a)
        if not verdict:
            raise RuleError(f"inadmissible substitution: {verdict}", verdict)
    try:
        out = apply_prob(sigma, f)
    except ValueError as e:
        raise RuleError(str(e)) from None
    for a in atoms(out):
        bad = S.well_formed(a)
        if bad:
            raise RuleError(f"substitution result is ill-formed: {bad[0]}")
    return out


def instantiate(
    axiom_id: str,
    sigma: Optional[Substitution] = None,
    rename: Optional[Mapping[str, str]] = None,
    allow_quarantined: bool = False,
) -> Judgment:
    try:
        schema = lookup(axiom_id)
    except KeyError:
        raise RuleError(f"unknown axiom {axiom_id!r}") from None
    if schema.quarantined and not allow_quarantined:
        raise RuleError(f"axiom {axiom_id} is quarantined")
    kind = PATHWISE if schema.kind == PATHWISE else PROB
    f = schema.formula
    f = S.desugar(f) if kind == PATHWISE else f
    f = rename_schema(f, rename or {})
    if sigma is not None:
        f = _substitute(sigma, f, kind)
    obligations: tuple[str, ...] = ()
    if schema.side_condition is not None:
        obligations = (schema.side_condition(f),)
    return Judgment(kind, f, obligations)


# ---------------------------------------------------------------- rules


def _as_iff(f: S.Formula):
    if isinstance(f, S.And):
        a, b = _as_implies(f.left), _as_implies(f.right)
        if a and b and key(a[0]) == key(b[1]) and key(a[1]) == key(b[0]):
            return a
    return None


def replace_occurrences(f: S.Formula, old: S.Formula, new: S.Formula, at=None):
    """Replace pre-order occurrences of ``old`` (numbered from 1) in ``f``.
    Returns the result and the number of occurrences found."""
    target = key(old)
    count = 0

    def go(n):
        nonlocal count
        if isinstance(n, S.Formula) and key(n) == target:
            count += 1
            if at is None or count in at:
                return new
            return n
        return S.map_children(n, go)

    out = go(f)
    return out, count


def _rule_and(premises, params):
    a, b = _premises(premises, 2, "and-elim")
    return Judgment(PATHWISE, S.And(_pathwise(a, "premise 1"), _pathwise(b, "premise 2")), _merge(a.obligations, b.obligations))


def _rule_mp(premises, params):
    a, b = _premises(premises, 2, "mp")
    imp = _as_implies(_pathwise(b, "premise 2"))
    if imp is None:
        raise RuleError("premise 2 is not an implication")
    if key(imp[0]) != key(_pathwise(a, "premise 1")):
        raise RuleError(f"premise 1 does not match the antecedent {render(imp[0])}")
    return Judgment(PATHWISE, imp[1], _merge(a.obligations, b.obligations))


def _rule_iff_sub(premises, params):
    (p,) = _premises(premises, 1, "iff-sub")
    pair = _as_iff(_pathwise(p, "premise"))
    if pair is None:
        raise RuleError("premise is not an equivalence")
    target = _param(params, "form", "iff-sub")
    if not isinstance(target, S.Formula):
        raise RuleError("iff-sub needs a formula parameter")
    target = S.desugar(target)
    at = params.get("at")
    out, count = replace_occurrences(target, pair[0], pair[1], set(at) if at else None)
    if count == 0:
        raise RuleError(f"{render(pair[0])} does not occur in the formula")
    if at and max(at) > count:
        raise RuleError(f"occurrence {max(at)} requested, only {count} found")
    return Judgment(PATHWISE, S.iff(target, out), p.obligations)


def _rule_g(premises, params):
    (p,) = _premises(premises, 1, "g")
    alpha = _param(params, "prog", "g")
    alpha = S.desugar(alpha)
    return Judgment(PATHWISE, S.or_(S.crash(alpha), S.box(alpha, _pathwise(p, "premise"))), p.obligations)


def _rule_us(premises, params):
    (p,) = _premises(premises, 1, "us")
    if p.kind != PATHWISE:
        raise RuleError("us applies to pathwise judgments; use usp")
    sigma = _param(params, "subst", "us")
    return Judgment(PATHWISE, _substitute(sigma, p.formula, PATHWISE), p.obligations)


def _rule_usp(premises, params):
    (p,) = _premises(premises, 1, "usp")
    if p.kind != PROB:
        raise RuleError("usp applies to probability judgments")
    sigma = _param(params, "subst", "usp")
    return Judgment(PROB, _substitute(sigma, p.formula, PROB), p.obligations)


def _rule_valid_prob(premises, params):
    (p,) = _premises(premises, 1, "valid-prob")
    return Judgment(PROB, PCmp("=", PAtom(_pathwise(p, "premise")), PConst(1.0)), p.obligations)


def _rule_disjoint_prob(premises, params):
    (p,) = _premises(premises, 1, "disjoint-prob")
    f = _pathwise(p, "premise")
    shape = "premise must be (sure(a) -> !sure(b)) & (sure(b) -> !sure(a))"
    if not isinstance(f, S.And):
        raise RuleError(shape)
    left, right = _as_implies(f.left), _as_implies(f.right)
    if not left or not right:
        raise RuleError(shape)
    ok = (
        isinstance(left[0], S.Sure)
        and isinstance(left[1], S.Not)
        and isinstance(left[1].arg, S.Sure)
        and isinstance(right[0], S.Sure)
        and key(right[0]) == key(left[1].arg)
        and key(right[1]) == key(S.Not(left[0]))
    )
    if not ok:
        raise RuleError(shape)
    a, b = left[0].arg, right[0].arg
    out = PCmp("=", PAtom(S.or_(a, b)), PPlus(PAtom(a), PAtom(b)))
    return Judgment(PROB, out, p.obligations)


def _split_bound(t: S.Term):
    """Read ``lambda * p`` with a ground right factor p."""
    if isinstance(t, S.Times):
        p = ground_value(t.right)
        if p is not None:
            return t.left, p
    p = ground_value(t)
    if p is not None:
        return S.Const(1.0), p
    return None


def _rule_sde_ineq(premises, params):
    a, b, c = _premises(premises, 3, "sde-ineq")
    sde = S.desugar(_param(params, "prog", "sde-ineq"))
    if not isinstance(sde, S.SDE):
        raise RuleError("sde-ineq needs an SDE program parameter")
    h = sde.boundary
    f1, f2, f3 = (_pathwise(j, f"premise {i}") for i, j in enumerate((a, b, c), 1))
    imp1, imp2, imp3 = _as_implies(f1), _as_implies(f2), _as_implies(f3)
    if not imp1 or not isinstance(imp1[0], S.Modal) or key(imp1[0].body) != key(h):
        raise RuleError("premise 1 must be <alpha> H -> theta <= lambda * p")
    alpha = imp1[0].program
    if not isinstance(imp1[1], S.Geq):
        raise RuleError("premise 1 must be <alpha> H -> theta <= lambda * p")
    theta = imp1[1].right
    bound = _split_bound(imp1[1].left)
    if bound is None:
        raise RuleError("the bound in premise 1 must be lambda * p with p a numeral")
    lam, p = bound
    if not imp2 or key(imp2[0]) != key(h) or key(imp2[1]) != key(S.Geq(theta, S.Const(0.0))):
        raise RuleError("premise 2 must be H -> theta >= 0")
    if not imp3 or key(imp3[0]) != key(h) or key(imp3[1]) != key(S.leq(S.Dt(theta), S.Const(0.0))):
        raise RuleError("premise 3 must be H -> d/dt(theta) <= 0")
    event = S.Modal(alpha, S.Modal(sde, S.Geq(theta, lam)))
    names = dict(theta=render_term(theta), sde=_render_program(sde), h=render(h))
    new = tuple(o.format(**names) for o in SDE_OBLIGATIONS)
    return Judgment(PROB, PCmp("<=", PAtom(event), PConst(p)), _merge(a.obligations, b.obligations, c.obligations, new))


def render_term(t: S.Term) -> str:
    return print_node(t)


def _render_program(p: S.Program) -> str:
    return print_node(p)


def _exact(t: S.Term) -> Fraction:
    match t:
        case S.Const(v):
            # shortest decimal spelling, so 0.1 means 1/10
            return Fraction(repr(v))
        case S.Plus(a, b):
            return _exact(a) + _exact(b)
        case S.Times(a, b):
            return _exact(a) * _exact(b)
    raise RuleError(f"not a ground arithmetic term: {render_term(t)}")


def _decide(f: S.Formula) -> bool:
    match f:
        case S.Geq(a, b):
            return _exact(a) >= _exact(b)
        case S.Not(a):
            return not _decide(a)
        case S.And(a, b):
            return _decide(a) and _decide(b)
        case S.Sure(a):
            return _decide(a)
    raise RuleError(f"not a ground arithmetic formula: {render(f)}")


def _rule_rcf_eval(premises, params):
    _premises(premises, 0, "rcf-eval")
    f = S.desugar(_param(params, "form", "rcf-eval"))
    if not _decide(f):
        raise RuleError(f"{render(f)} is false")
    return Judgment(PATHWISE, f)


def _premises(premises, n: int, rule: str):
    if len(premises) != n:
        raise RuleError(f"{rule} takes {n} premise{'s' if n != 1 else ''}, got {len(premises)}")
    return list(premises)


def _param(params, name: str, rule: str):
    value = params.get(name)
    if value is None:
        raise RuleError(f"{rule} needs a {name}{{...}} parameter")
    return value


RULES = {
    "and-elim": _rule_and,
    "mp": _rule_mp,
    "iff-sub": _rule_iff_sub,
    "g": _rule_g,
    "us": _rule_us,
    "usp": _rule_usp,
    "valid-prob": _rule_valid_prob,
    "disjoint-prob": _rule_disjoint_prob,
    "sde-ineq": _rule_sde_ineq,
    "rcf-eval": _rule_rcf_eval,
}


def apply_rule(rule_id: str, premises: list[Judgment], params: Optional[dict] = None) -> Judgment:
    rule = RULES.get(rule_id)
    if rule is None:
        raise RuleError(f"unknown rule {rule_id!r}")
    return rule(premises, dict(params or {}))

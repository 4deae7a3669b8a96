"""The axiom catalog.

Schemas are stored in concrete syntax and parsed once. Schematic symbols
are arity-0 unless a variable dependency has to survive substitution (for
example the body of an SDE), in which case a unary symbol is applied to a
literal variable; such literals may be renamed on instantiation.

``sampling`` tells the smoke suite how to draw valuations: ``dyadic`` keeps
field identities exact in floating point, ``full`` defines every variable
the instance reads (term equalities are indeterminate at ⊥), ``saturate``
marks star schemas whose instances must reach a fixpoint within the star
bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

from .. import syntax as S
from ..parser import parse_formula
from ..spade import ProbFormula, parse_spade

PATHWISE, PROBABILISTIC = "pathwise", "probabilistic"


@dataclass(frozen=True)
class AxiomSchema:
    id: str
    kind: str
    text: str
    formula: Union[S.Formula, ProbFormula]
    group: str
    side_condition: Optional[Callable] = None
    sampling: str = "default"
    quarantined: bool = False
    note: str = ""

    def __str__(self) -> str:
        return f"{self.id}: {self.text}"


_SDE = "dx = f@1(x) dt + g@1(x) dW & p@1(x)"


def _rand_int(inst) -> str:
    from ..printer import fmt_number, print_node
    from ..spade import PAtom, PConst, print_spade

    lhs, rhs = inst.left, inst.right
    body = lhs.formula.body
    x = lhs.formula.program.var
    c = fmt_number(rhs.value) if isinstance(rhs, PConst) else print_spade(rhs)
    s = "s" if x != "s" else "u"
    at = S.Modal(S.Assign(x, S.Var(s)), body)
    return f"{c} = integral over {s} in [0,1] of {print_spade(PAtom(at))} d{s}"


def _defined(text: str, *terms: str) -> str:
    """Guard a schema by definedness: comparisons of ⊥ are ⊘, so the
    unguarded real-arithmetic forms are not valid at undefined terms."""
    return " & ".join(f"def({t})" for t in terms) + f" -> ({text})"


def _equal(text: str) -> str:
    left, right = text.split(" = ")
    return _defined(text, left, right)


# id, group, schema text, options
_PATHWISE = [
    # formulas
    ("id", "formulas", "phi@0 <-> phi@0", {}),
    ("hoe-sym", "formulas", "(phi1@0 <-> phi2@0) <-> (phi2@0 <-> phi1@0)", {}),
    ("hoe-neg", "formulas", "(phi1@0 <-> phi2@0) <-> (!phi1@0 <-> !phi2@0)", {}),
    ("and-comm", "formulas", "phi1@0 & phi2@0 <-> phi2@0 & phi1@0", {}),
    ("and-idem", "formulas", "phi@0 <-> phi@0 & phi@0", {}),
    ("and-assoc", "formulas", "(phi1@0 & phi2@0) & phi3@0 <-> phi1@0 & (phi2@0 & phi3@0)", {}),
    ("and-elim", "formulas", "phi1@0 & phi2@0 -> phi1@0", {}),
    ("dne", "formulas", "!!phi@0 <-> phi@0", {}),
    ("sure-em", "formulas", "sure(phi@0) | !sure(phi@0)", {}),
    ("sure-idem", "formulas", "sure(phi@0) <-> sure(sure(phi@0))", {}),
    ("sure-t", "formulas", "sure(phi@0) -> phi@0", {}),
    ("sure-intro", "formulas", "sure(phi1@0) -> (phi2@0 -> phi1@0 & phi2@0)", {}),
    ("sure-neg", "formulas", "!sure(phi@0) <-> !phi@0 | ind(phi@0)", {}),
    ("sure-and", "formulas", "sure(phi1@0 & phi2@0) <-> sure(phi1@0) & sure(phi2@0)", {}),
    # differential terms
    ("dt-const", "terms", "d/dt(c@0) = 0", {"sampling": "full"}),
    ("dB-const", "terms", "dB[i](c@0) = 0", {"sampling": "full"}),
    ("dt-var", "terms", "def(x_t) -> d/dt(x) = x_t", {"sampling": "full"}),
    ("dB-var", "terms", "def(x_B[i]) -> dB[i](x) = x_B[i]", {"sampling": "full"}),
    (
        "dt-plus",
        "terms",
        _equal("d/dt(f@2(x, y) + g@2(x, y)) = d/dt(f@2(x, y)) + d/dt(g@2(x, y))"),
        {"sampling": "full"},
    ),
    (
        "dB-plus",
        "terms",
        _equal("dB[x](f@2(x, y) + g@2(x, y)) = dB[x](f@2(x, y)) + dB[x](g@2(x, y))"),
        {"sampling": "full"},
    ),
    (
        "dt-times",
        "terms",
        _equal(
            "d/dt(f@2(x, y) * g@2(x, y)) = g@2(x, y) * d/dt(f@2(x, y)) + f@2(x, y) * d/dt(g@2(x, y))"
            " + dB[x](f@2(x, y)) * dB[x](g@2(x, y)) + dB[y](f@2(x, y)) * dB[y](g@2(x, y))"
        ),
        {"sampling": "full", "note": "quadratic covariation without the factor 1/2"},
    ),
    (
        "dB-times",
        "terms",
        _equal("dB[x](f@2(x, y) * g@2(x, y)) = g@2(x, y) * dB[x](f@2(x, y)) + f@2(x, y) * dB[x](g@2(x, y))"),
        {"sampling": "full"},
    ),
    ("term-eq", "terms", "def(f@0) & def(g@0) -> (f@0 = g@0 -> (p@1(f@0) <-> p@1(g@0)))", {"sampling": "full"}),
    # ordered field
    ("rcf-plus-comm", "rcf", _defined("f@0 + g@0 = g@0 + f@0", "f@0", "g@0"), {"sampling": "dyadic"}),
    ("rcf-plus-assoc", "rcf", _defined("(f@0 + g@0) + h@0 = f@0 + (g@0 + h@0)", "f@0", "g@0", "h@0"), {"sampling": "dyadic"}),
    ("rcf-plus-zero", "rcf", _defined("f@0 + 0 = f@0", "f@0"), {"sampling": "dyadic"}),
    ("rcf-plus-inv", "rcf", _defined("f@0 + -1 * f@0 = 0", "f@0"), {"sampling": "dyadic"}),
    ("rcf-times-comm", "rcf", _defined("f@0 * g@0 = g@0 * f@0", "f@0", "g@0"), {"sampling": "dyadic"}),
    ("rcf-times-assoc", "rcf", _defined("(f@0 * g@0) * h@0 = f@0 * (g@0 * h@0)", "f@0", "g@0", "h@0"), {"sampling": "dyadic"}),
    ("rcf-times-one", "rcf", _defined("f@0 * 1 = f@0", "f@0"), {"sampling": "dyadic"}),
    ("rcf-distrib", "rcf", _defined("f@0 * (g@0 + h@0) = f@0 * g@0 + f@0 * h@0", "f@0", "g@0", "h@0"), {"sampling": "dyadic"}),
    ("rcf-refl", "rcf", _defined("f@0 >= f@0", "f@0"), {"sampling": "dyadic"}),
    ("rcf-trans", "rcf", _defined("f@0 >= g@0 & g@0 >= h@0 -> f@0 >= h@0", "f@0", "g@0", "h@0"), {"sampling": "dyadic"}),
    ("rcf-total", "rcf", _defined("f@0 >= g@0 | g@0 >= f@0", "f@0", "g@0"), {"sampling": "dyadic"}),
    ("rcf-plus-mono", "rcf", _defined("f@0 >= g@0 -> f@0 + h@0 >= g@0 + h@0", "f@0", "g@0", "h@0"), {"sampling": "dyadic"}),
    ("rcf-times-pos", "rcf", _defined("f@0 >= 0 & g@0 >= 0 -> f@0 * g@0 >= 0", "f@0", "g@0"), {"sampling": "dyadic"}),
    ("rcf-one-pos", "rcf", "1 >= 0 & !(0 >= 1)", {"sampling": "dyadic"}),
    # programs
    ("skip-left", "programs", "<skip; G@a> phi@0 <-> <G@a> phi@0", {}),
    ("skip-right", "programs", "<G@a> phi@0 <-> <G@a; skip> phi@0", {}),
    ("skip", "programs", "<skip> phi@0 <-> phi@0", {}),
    ("fail-seq", "programs", "ind(<fail; G@a> phi@0)", {}),
    ("fail", "programs", "ind(<fail> phi@0)", {}),
    ("distrib", "programs", "<G@a> (phi1@0 | phi2@0) <-> <G@a> phi1@0 | <G@a> phi2@0", {}),
    ("choice", "programs", "<G@a ++ G@b> phi@0 <-> <G@a> phi@0 | <G@b> phi@0", {}),
    (
        "cond",
        "programs",
        "<if phi1@0 then G@a else G@b> phi@0 <->"
        " (phi1@0 & (ind(phi1@0) | <G@a> phi@0)) | (!phi1@0 & (ind(phi1@0) | <G@b> phi@0))",
        {},
    ),
    ("iter-unfold", "programs", "<G@a*> phi@0 <-> phi@0 | <G@a; G@a*> phi@0", {"sampling": "saturate"}),
    (
        "iter-induct",
        "programs",
        "[G@a*] sure(phi@0 -> [G@a] phi@0) -> sure(phi@0 -> [G@a*] phi@0)",
        {"sampling": "saturate"},
    ),
    ("compose", "programs", "<G@a; G@b> phi@0 <-> <G@a> <G@b> phi@0", {}),
    ("assign", "programs", "def(f@0) -> ([x := f@0] p@1(x) <-> p@1(f@0))", {}),
    # differential axioms, one-dimensional form
    ("dw", "differential", f"crash({_SDE}) | [{_SDE}] p@1(x)", {"sampling": "full"}),
    (
        "dc",
        "differential",
        "sure([dx = f@1(x) dt + g@1(x) dW & p1@1(x)] p2@1(x)) ->"
        " ([dx = f@1(x) dt + g@1(x) dW & p1@1(x) & p2@1(x)] p3@1(x)"
        " <-> [dx = f@1(x) dt + g@1(x) dW & p1@1(x)] p3@1(x))",
        {
            "sampling": "full",
            "quarantined": True,
            "note": "the domain is checked along the whole path, the postcondition only at stop times",
        },
    ),
    ("de-t", "differential", f"[{_SDE}] d/dt(x) = f@1(x)", {"sampling": "full"}),
    ("de-B", "differential", f"[{_SDE}] dB[x](x) = g@1(x)", {"sampling": "full"}),
    (
        "di",
        "differential",
        f"[{_SDE}] g@1(x) = 0 & d/dt(h1@1(x)) >= d/dt(h2@1(x)) ->"
        f" ([{_SDE}] h1@1(x) >= h2@1(x) <-> (p@1(x) -> h1@1(x) >= h2@1(x)))",
        {
            "sampling": "full",
            "quarantined": True,
            "note": "the derivative premise is evaluated in the initial state only",
        },
    ),
]

_PROBABILISTIC = [
    ("prob-nonneg", "probability", "P(phi@0) >= 0", {}),
    ("prob-neg", "probability", "P(!phi@0) <= 1 - P(phi@0)", {}),
    ("prob-mono", "probability", "P(phi1@0 | phi2@0) >= P(phi1@0)", {}),
    ("prob-sure", "probability", "P(sure(phi@0)) = P(phi@0)", {}),
    ("rand-int", "probability", "P(<x := *> p@1(x)) = c@0", {"side_condition": _rand_int}),
]


@lru_cache(maxsize=2)
def axiom_catalog(include_quarantined: bool = True) -> tuple[AxiomSchema, ...]:
    out = []
    for kind, table in ((PATHWISE, _PATHWISE), (PROBABILISTIC, _PROBABILISTIC)):
        for ident, group, text, opts in table:
            formula = parse_formula(text) if kind == PATHWISE else parse_spade(text)
            schema = AxiomSchema(ident, kind, text, formula, group, **opts)
            if include_quarantined or not schema.quarantined:
                out.append(schema)
    ids = [a.id for a in out]
    assert len(ids) == len(set(ids)), "duplicate axiom identifiers"
    return tuple(out)


def lookup(ident: str) -> AxiomSchema:
    for a in axiom_catalog():
        if a.id == ident:
            return a
    raise KeyError(f"unknown axiom {ident!r}")


def default_catalog() -> tuple[AxiomSchema, ...]:
    """Axioms usable in proofs: the catalog minus quarantined entries."""
    return tuple(a for a in axiom_catalog() if not a.quarantined)

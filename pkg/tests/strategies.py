"""Hypothesis strategies for random syntax trees."""

from __future__ import annotations

from hypothesis import strategies as st

from stochdl import syntax as S

VARS = ("x", "y", "z")
SUBSCRIPTED = ("x_t", "y_B[x]", "z_t_B[y]")
CONSTS = (0.0, 1.0, 2.0, -1.0, 0.5, -0.25, 3.0, 0.1, 1e-3, 12.5)


def consts():
    return st.sampled_from(CONSTS).map(S.Const)


def variables(names=VARS):
    return st.sampled_from(names).map(S.Var)


@st.composite
def terms(draw, depth=3, names=VARS, symbols=True, differentials=True, iota=True):
    """Core terms; with ``symbols`` they may contain f@d applications."""
    leaves = [consts(), variables(names)]
    if symbols:
        leaves.append(st.sampled_from(("c", "k")).map(lambda n: S.Func(n, ())))
    if depth <= 0:
        return draw(st.one_of(*leaves))
    sub = terms(depth - 1, names, symbols, differentials, iota)
    options = ["leaf", "plus", "times"]
    if symbols:
        options.append("func")
    if differentials:
        options += ["dt", "dB"]
    if iota:
        options.append("iota")
    kind = draw(st.sampled_from(options))
    if kind == "leaf":
        return draw(st.one_of(*leaves))
    if kind == "plus":
        return S.Plus(draw(sub), draw(sub))
    if kind == "times":
        return S.Times(draw(sub), draw(sub))
    if kind == "func":
        d = draw(st.integers(1, 2))
        return S.Func(draw(st.sampled_from(("f", "g"))), tuple(draw(sub) for _ in range(d)))
    if kind == "dt":
        return S.Dt(draw(terms(depth - 1, names, symbols, False, False)))
    if kind == "dB":
        return S.DB(draw(st.sampled_from(names)), draw(terms(depth - 1, names, symbols, False, False)))
    tag = S.fresh_tag()
    d1 = S.Diamond(tag, 1)
    rhs = draw(terms(depth - 1, names, False, False, False))
    body = S.And(S.Geq(S.Times(d1, d1), rhs), S.Geq(rhs, S.Times(d1, d1)))
    body = S.And(body, S.Geq(d1, S.Const(0)))
    return S.Iota(1, 1, body, tag)


@st.composite
def comparisons(draw, depth=2, names=VARS, symbols=True):
    t = terms(depth, names, symbols, iota=False)
    return S.Geq(draw(t), draw(t))


@st.composite
def programs(draw, depth=3, names=VARS, symbols=True, sde=True, random=True):
    leaves = ["assign", "skip", "fail"]
    if random:
        leaves.append("random")
    if symbols:
        leaves.append("sym")
    if sde:
        leaves.append("sde")
    kind = draw(st.sampled_from(leaves if depth <= 0 else leaves + ["if", "choice", "seq", "seq", "star"]))
    sub = programs(depth - 1, names, symbols, sde, random)
    if kind == "assign":
        return S.Assign(draw(st.sampled_from(names)), draw(terms(1, names, symbols, False, False)))
    if kind == "random":
        return S.Random(draw(st.sampled_from(names)))
    if kind == "skip":
        return S.Skip()
    if kind == "fail":
        return S.Fail()
    if kind == "sym":
        return S.ProgSym(draw(st.sampled_from(("a", "b"))))
    if kind == "sde":
        x = draw(st.sampled_from(names))
        b = draw(terms(1, (x,), False, False, False))
        s = draw(st.sampled_from((0.0, 0.5, 1.0)))
        bound = draw(st.sampled_from((5.0, 10.0, 100.0)))
        h = S.Geq(S.Const(bound), S.Var(x))
        return S.SDE((x,), (b,), ((S.Const(s),),), h)
    if kind == "if":
        return S.If(draw(comparisons(1, names, symbols)), draw(sub), draw(sub))
    if kind == "choice":
        return S.Choice(draw(sub), draw(sub))
    if kind == "seq":
        return S.Seq(draw(sub), draw(sub))
    return S.Star(draw(sub))


@st.composite
def formulas(draw, depth=3, names=VARS, symbols=True, modal=True, sde=True):
    leaves = [comparisons(1, names, symbols)]
    if symbols:
        leaves.append(st.sampled_from(("p", "q")).map(lambda n: S.Pred(n, ())))
    if depth <= 0:
        return draw(st.one_of(*leaves))
    sub = formulas(depth - 1, names, symbols, modal, sde)
    options = ["leaf", "not", "and", "sure"] + (["modal", "modal"] if modal else [])
    if symbols:
        options.append("pred")
    kind = draw(st.sampled_from(options))
    if kind == "leaf":
        return draw(st.one_of(*leaves))
    if kind == "not":
        return S.Not(draw(sub))
    if kind == "and":
        return S.And(draw(sub), draw(sub))
    if kind == "sure":
        return S.Sure(draw(sub))
    if kind == "pred":
        return S.Pred("r", (draw(terms(1, names, symbols, False, False)),))
    return S.Modal(draw(programs(min(depth - 1, 2), names, symbols, sde)), draw(sub))


# Symbols used by ``terms``/``formulas``/``programs`` with ``symbols=True``.
FUNCS = (("c", 0), ("k", 0), ("f", 1), ("g", 1), ("f", 2), ("g", 2))
PREDS = (("p", 0), ("q", 0), ("r", 1))
PROGS = ("a", "b")
MARKERS = ("o1", "o2")


@st.composite
def substitution_texts(draw, names=VARS):
    """Text of a valid substitution over the symbols above; replacements
    of arity >= 1 use only markers and constants."""
    from stochdl.printer import print_node

    parts = []
    for name, d in FUNCS:
        if not draw(st.booleans()):
            continue
        if d == 0:
            body = draw(terms(2, names, symbols=False, differentials=False, iota=False))
        else:
            body = draw(terms(2, MARKERS[:d], symbols=False, differentials=False, iota=False))
        parts.append(f"{name}@{d} -> {print_node(body)}")
    for name, d in PREDS:
        if not draw(st.booleans()):
            continue
        if d == 0:
            body = draw(formulas(2, names, symbols=False, sde=False))
        else:
            t = terms(2, MARKERS[:1], symbols=False, differentials=False, iota=False)
            body = S.Geq(draw(t), draw(t))
        parts.append(f"{name}@{d} -> {print_node(body)}")
    for name in PROGS:
        if draw(st.booleans()):
            body = draw(programs(2, names, symbols=False))
            parts.append(f"G@{name} -> ({print_node(body)})")
    return "subst { " + " ; ".join(parts) + " }"


def signature_kinds():
    out = {key: "f" for key in FUNCS}
    out.update({key: "p" for key in PREDS})
    return out

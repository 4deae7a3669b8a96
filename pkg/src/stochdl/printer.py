"""Pretty printer producing the ASCII concrete syntax.

Output uses minimal parentheses and re-sugars the core shapes produced by
``desugar`` so that ``parse(print(e)) == e``.
"""

from __future__ import annotations

import math

from . import syntax as S


def fmt_number(v: float) -> str:
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


# term levels
_SUM, _PROD, _TATOM = 0, 1, 2
# program levels
_CHOICE, _SEQ, _STAR, _PATOM = 0, 1, 2, 3
# formula levels
_IMP, _OR, _AND, _PREFIX, _FATOM = 0, 1, 2, 3, 4


def print_node(node: S.Node) -> str:
    if isinstance(node, S.Term):
        return _term(node, _SUM)
    if isinstance(node, S.Program):
        return _program(node, _CHOICE)
    if isinstance(node, S.Formula):
        return _formula(S.desugar(node), _IMP)
    raise TypeError(f"cannot print {type(node).__name__}")


def _paren(text: str, level: int, need: int) -> str:
    return f"({text})" if level < need else text


# ---------------------------------------------------------------- terms


def _term(t: S.Term, need: int) -> str:
    match t:
        case S.Const(v):
            return fmt_number(v)
        case S.Var(name):
            return name
        case S.Diamond(_, n):
            return f"d{n}"
        case S.Marker(index=i):
            return f"o{i}"
        case S.Plus(a, b):
            return _paren(f"{_term(a, _SUM)} + {_term(b, _PROD)}", _SUM, need)
        case S.Times(a, b):
            return _paren(f"{_term(a, _PROD)} * {_term(b, _TATOM)}", _PROD, need)
        case S.Func(name, args):
            return _app(name, args)
        case S.Dt(arg):
            return f"d/dt({_term(arg, _SUM)})"
        case S.DB(idx, arg):
            return f"dB[{idx}]({_term(arg, _SUM)})"
        case S.Iota(i, d, body):
            return f"iota {i} of {d} {{ {_formula(body, _IMP)} }}"
    raise TypeError(f"not a term: {t!r}")


def _app(name: str, args) -> str:
    head = f"{name}@{len(args)}"
    if not args:
        return head
    return head + "(" + ", ".join(_term(a, _SUM) for a in args) + ")"


# ------------------------------------------------------------- programs


def _program(p: S.Program, need: int) -> str:
    match p:
        case S.Skip():
            return "skip"
        case S.Fail():
            return "fail"
        case S.ProgSym(name):
            return f"G@{name}"
        case S.Assign(x, t):
            text = f"{x} := {_term(t, _SUM)}"
            return f"({text})" if need >= _PATOM else text
        case S.Random(x):
            text = f"{x} := *"
            return f"({text})" if need >= _PATOM else text
        case S.SDE():
            text = _sde(p)
            return f"({text})" if need >= _PATOM else text
        case S.If(c, a, b):
            text = f"if {_formula(c, _IMP)} then {_program(a, _CHOICE)} else {_program(b, _CHOICE)}"
            return f"({text})" if need > _CHOICE or need < 0 else text
        case S.Choice(a, b):
            return _paren(f"{_program(a, -1)} ++ {_program(b, _SEQ)}", _CHOICE, need)
        case S.Seq(a, b):
            return _paren(f"{_program(a, _SEQ)}; {_program(b, _STAR)}", _SEQ, need)
        case S.Star(body):
            return f"{_program(body, _PATOM)}*"
    raise TypeError(f"not a program: {p!r}")


def _sde(p: S.SDE) -> str:
    parts = []
    one = len(p.vars) == 1
    for x, b, row in zip(p.vars, p.drift, p.diffusion):
        eq = f"d{x} = {_term(b, _SUM)} dt"
        for coord, s in zip(p.vars, row):
            eq += f" + {_term(s, _SUM)} dW" + ("" if one else f"[{coord}]")
        parts.append(eq)
    return ", ".join(parts) + f" & {_formula(p.boundary, _IMP)}"


# ------------------------------------------------------------- formulas


def _as_or(f):
    if isinstance(f, S.Not) and isinstance(f.arg, S.And):
        a, b = f.arg.left, f.arg.right
        if isinstance(a, S.Not) and isinstance(b, S.Not):
            return a.arg, b.arg
    return None


def _as_ind(f):
    if isinstance(f, S.And) and isinstance(f.left, S.Not) and isinstance(f.right, S.Not):
        a, b = f.left.arg, f.right.arg
        if isinstance(a, S.Sure) and isinstance(b, S.Sure) and b.arg == S.Not(a.arg):
            return a.arg
    return None


def _as_implies(f):
    parts = _as_or(f)
    if parts is None:
        return None
    head, tail = parts
    inner = _as_or(head)
    if inner is None or not isinstance(inner[0], S.Not):
        return None
    a, b = inner[0].arg, inner[1]
    if isinstance(tail, S.And) and _as_ind(tail.left) == a and _as_ind(tail.right) == b:
        if _as_ind(tail.left) is not None and _as_ind(tail.right) is not None:
            return a, b
    return None


def _as_box(f):
    if isinstance(f, S.Not) and isinstance(f.arg, S.Modal) and isinstance(f.arg.body, S.Not):
        return f.arg.program, f.arg.body.arg
    return None


def _formula(f: S.Formula, need: int) -> str:
    if isinstance(f, S.And):
        left_imp, right_imp = _as_implies(f.left), _as_implies(f.right)
        if left_imp and right_imp and right_imp == (left_imp[1], left_imp[0]):
            a, b = left_imp
            return _paren(f"{_formula(a, _OR)} <-> {_formula(b, _IMP)}", _IMP, need)
        arg = _as_ind(f)
        if arg is not None:
            bx = _as_box(arg)
            if bx is not None and bx[1] == S.TRUE:
                return f"crash({_program(bx[0], _CHOICE)})"
            return f"ind({_formula(arg, _IMP)})"
        if isinstance(f.left, S.Geq) and isinstance(f.right, S.Geq):
            if f.left.left == f.right.right and f.left.right == f.right.left:
                return f"{_term(f.left.left, _SUM)} = {_term(f.left.right, _SUM)}"
        return _paren(f"{_formula(f.left, _AND)} & {_formula(f.right, _PREFIX)}", _AND, need)
    if isinstance(f, S.Not):
        imp = _as_implies(f)
        if imp is not None:
            a, b = imp
            return _paren(f"{_formula(a, _OR)} -> {_formula(b, _IMP)}", _IMP, need)
        bx = _as_box(f)
        if bx is not None:
            return _paren(f"[{_program(bx[0], _CHOICE)}] {_formula(bx[1], _PREFIX)}", _PREFIX, need)
        parts = _as_or(f)
        if parts is not None:
            return _paren(f"{_formula(parts[0], _OR)} | {_formula(parts[1], _AND)}", _OR, need)
        if isinstance(f.arg, S.Geq):
            return f"{_term(f.arg.left, _SUM)} < {_term(f.arg.right, _SUM)}"
        return _paren(f"!{_formula(f.arg, _PREFIX)}", _PREFIX, need)
    match f:
        case S.Geq(a, b):
            return f"{_term(a, _SUM)} >= {_term(b, _SUM)}"
        case S.Pred(name, args):
            return _app(name, args)
        case S.Sure(S.Geq(a, b)) if a == b:
            return f"def({_term(a, _SUM)})"
        case S.Sure(arg):
            return f"sure({_formula(arg, _IMP)})"
        case S.Modal(p, body):
            return _paren(f"< {_program(p, _CHOICE)} > {_formula(body, _PREFIX)}", _PREFIX, need)
    raise TypeError(f"not a formula: {f!r}")


def print_declarations(decls) -> str:
    """Canonical rendering of parsed .sdl declarations."""
    return "".join(f"{d.kind} {d.name} = {print_node(d.node)}\n" for d in decls)

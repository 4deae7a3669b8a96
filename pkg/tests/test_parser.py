from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from stochdl import syntax as S
from stochdl.parser import ParseError, parse, parse_formula, parse_program, parse_sdl, parse_term
from stochdl.printer import print_node

from conftest import CORPUS
from strategies import SUBSCRIPTED, VARS, formulas, programs, terms

x = S.Var("x")


def kind_of(e):
    return "term" if isinstance(e, S.Term) else "prog" if isinstance(e, S.Program) else "form"


def test_choice_of_assignment_and_fail():
    assert parse_program("x := 1 ++ fail") == S.Choice(S.Assign("x", S.Const(1)), S.Fail())


def test_square_root_description():
    t = parse_term("iota 1 of 1 { d1*d1 = y & d1 >= 0 }")
    d1 = S.Diamond(t.tag, 1)
    body = S.And(S.desugar(S.Eq(S.Times(d1, d1), S.Var("y"))), S.Geq(d1, S.Const(0)))
    assert isinstance(t, S.Iota) and (t.index, t.arity) == (1, 1)
    assert t.body == body


def test_one_dimensional_sde():
    p = parse_program("dx = 1 dt + 0 dW & x <= 3")
    assert p == S.SDE(("x",), (S.Const(1),), ((S.Const(0),),), S.Geq(S.Const(3), x))


def test_vector_sde():
    p = parse_program("dx = y dt + 0 dW[x] + 1 dW[y], dy = 0 dt + 0 dW[x] + 0 dW[y] & x <= 1")
    assert p.vars == ("x", "y") and p.diffusion[0][1] == S.Const(1)


def test_choice_binds_looser_than_sequence():
    p = S.Choice(S.Seq(S.ProgSym("a"), S.ProgSym("b")), S.ProgSym("c"))
    assert print_node(p) == "G@a; G@b ++ G@c"
    assert parse_program("G@a; G@b ++ G@c") == p


def test_diamond_printing():
    assert print_node(S.Modal(S.ProgSym("a"), S.Pred("phi", ()))) == "< G@a > phi@0"


def test_ratios_and_decimals():
    assert parse_term("1/2") == S.Const(0.5)
    assert parse_term("1e-3") == S.Const(0.001)
    assert parse_term("-x") == S.Times(S.Const(-1), x)


def test_precedence_of_connectives():
    f = parse_formula("x >= 0 & y >= 0 | z >= 0")
    assert f == S.desugar(S.Or(S.And(S.Geq(x, S.Const(0)), S.Geq(S.Var("y"), S.Const(0))), S.Geq(S.Var("z"), S.Const(0))))
    assert parse_formula("!x >= 0") == S.Not(S.Geq(x, S.Const(0)))


def test_star_is_tightest():
    assert parse_program("G@a; G@b*") == S.Seq(S.ProgSym("a"), S.Star(S.ProgSym("b")))


@pytest.mark.parametrize(
    "text",
    ["x >= ", "x := ", "<x := 1 x >= 0", "iota 2 of 1 { d1 = 0 }", "f@2(x)", "x >= 0 &", "dx = 1 dt & x <= 1 extra"],
)
def test_errors_carry_position(text):
    with pytest.raises(ParseError) as err:
        parse(text, "prog" if ":=" in text and "<" not in text else "form")
    span = err.value.span
    assert span is not None and 0 <= span.start <= span.end <= len(text) + 1


def test_program_inside_boundary_rejected_at_parse_time():
    with pytest.raises(ParseError, match="program inside H"):
        parse_program("dx = 1 dt + 0 dW & <skip> x >= 0")


def test_program_inside_iota_rejected():
    with pytest.raises(ParseError, match="program inside"):
        parse_term("iota 1 of 1 { <skip> d1 >= 0 }")


def test_sdl_rejects_duplicates_and_junk():
    with pytest.raises(ParseError, match="duplicate"):
        parse_sdl("term a = 1\nterm a = 2\n")
    with pytest.raises(ParseError) as err:
        parse_sdl("term a = 1\nbogus\n")
    assert err.value.span.line == 2


@settings(max_examples=400)
@given(st.one_of(terms(4, VARS + SUBSCRIPTED), programs(3, VARS + SUBSCRIPTED), formulas(4, VARS + SUBSCRIPTED)))
def test_round_trip(e):
    assert parse(print_node(e), kind_of(e)) == S.desugar(e)


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.sdl")), ids=lambda p: p.stem)
def test_corpus_goldens(path: Path):
    decls = parse_sdl(path.read_text())
    got = "".join(f"{d.line}\t{d.kind} {d.name} = {print_node(d.node)}\n" for d in decls)
    assert got == path.with_suffix(".golden").read_text()
    for d in decls:
        assert parse(print_node(d.node), d.kind) == d.node


def test_corpus_size():
    assert len(list(CORPUS.glob("*.sdl"))) == 20

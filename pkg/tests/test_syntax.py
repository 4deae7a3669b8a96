from hypothesis import given

from stochdl import syntax as S
from stochdl.parser import parse_formula, parse_program, parse_term

from strategies import formulas, programs, terms

x, y = S.Var("x"), S.Var("y")
ZERO = S.Const(0)


def test_box_desugars_to_negated_diamond():
    a, phi = S.ProgSym("a"), S.Geq(x, ZERO)
    assert S.desugar(S.Box(a, phi)) == S.Not(S.Modal(a, S.Not(phi)))


def test_or_and_comparisons():
    p, q = S.Geq(x, ZERO), S.Geq(y, ZERO)
    assert S.desugar(S.Or(p, q)) == S.Not(S.And(S.Not(p), S.Not(q)))
    assert S.desugar(S.Eq(x, y)) == S.And(S.Geq(x, y), S.Geq(y, x))
    assert S.desugar(S.Leq(x, y)) == S.Geq(y, x)
    assert S.desugar(S.Lt(x, y)) == S.Not(S.Geq(x, y))


def test_ind_and_implication():
    p, q = S.Geq(x, ZERO), S.Geq(y, ZERO)
    ind_p = S.And(S.Not(S.Sure(p)), S.Not(S.Sure(S.Not(p))))
    assert S.desugar(S.Ind(p)) == ind_p
    ind_q = S.desugar(S.Ind(q))
    expected = S.or_(S.or_(S.Not(p), q), S.And(ind_p, ind_q))
    assert S.desugar(S.Implies(p, q)) == expected


def test_iff_is_both_implications():
    p, q = S.Geq(x, ZERO), S.Geq(y, ZERO)
    assert S.desugar(S.Iff(p, q)) == S.And(S.desugar(S.Implies(p, q)), S.desugar(S.Implies(q, p)))


def test_crash_desugars_through_box():
    a = S.ProgSym("a")
    assert S.desugar(S.Crash(a)) == S.desugar(S.Ind(S.Box(a, S.Geq(ZERO, ZERO))))


def test_defined_is_sure_self_comparison():
    assert S.desugar(S.Defined(x)) == S.Sure(S.Geq(x, x))


def test_core_formula_unchanged():
    f = S.And(S.Not(S.Geq(x, y)), S.Sure(S.Modal(S.Skip(), S.Geq(x, ZERO))))
    assert S.desugar(f) == f


@given(formulas(3))
def test_desugar_idempotent(f):
    once = S.desugar(f)
    assert S.desugar(once) == once


def test_program_inside_iota_is_rejected():
    tag = S.fresh_tag()
    body = S.Modal(S.Skip(), S.Geq(S.Diamond(tag, 1), ZERO))
    msgs = [v.message for v in S.well_formed(S.Iota(1, 1, body, tag))]
    assert "program inside ι body" in msgs


def test_program_inside_boundary_is_rejected():
    h = S.Modal(S.Skip(), S.Geq(x, ZERO))
    sde = S.SDE(("x",), (S.Const(1),), ((ZERO,),), h)
    assert [v.message for v in S.well_formed(sde)] == ["program inside H"]


def test_well_formed_assignment():
    assert S.well_formed(S.Assign("x", S.Plus(x, S.Const(1)))) == []


def test_diamond_outside_iota():
    assert [v.message for v in S.well_formed(S.Geq(S.Diamond(99, 1), ZERO))] == ["diamond outside its ι"]


def test_sde_shape_and_distinct_variables():
    bad = S.SDE(("x", "x"), (ZERO, ZERO), ((ZERO, ZERO), (ZERO, ZERO)), S.TRUE)
    assert any("distinct" in v.message for v in S.well_formed(bad))
    bad = S.SDE(("x",), (ZERO, ZERO), ((ZERO,),), S.TRUE)
    assert any("shape" in v.message for v in S.well_formed(bad))


def test_iota_equality_ignores_tags():
    a = parse_term("iota 1 of 1 { d1 * d1 = y & d1 >= 0 }")
    b = parse_term("iota 1 of 1 { d1 * d1 = y & d1 >= 0 }")
    assert a.tag != b.tag and a == b and hash(a) == hash(b)
    c = parse_term("iota 1 of 1 { d1 * d1 = z & d1 >= 0 }")
    assert a != c


def test_rename_follows_subscripts():
    f = parse_formula("[x := *] d/dt(x) = x_t & dB[x](y) >= x_B[x]")
    g = S.rename(f, {"x": "w"})
    assert g == parse_formula("[w := *] d/dt(w) = w_t & dB[w](y) >= w_B[w]")


def test_variable_names():
    for good in ("x", "x_t", "x_B[y]", "x_t_B[y_t]"):
        assert S.is_variable_name(good)
    for bad in ("", "_x", "x_q", "x_B[", "1x"):
        assert not S.is_variable_name(bad)


def test_walk_visits_every_node():
    p = parse_program("x := 1; (y := x ++ fail)*")
    kinds = {type(n).__name__ for n in S.walk(p)}
    assert {"Seq", "Assign", "Star", "Choice", "Fail", "Const", "Var"} <= kinds


@given(terms(3))
def test_generated_terms_well_formed(t):
    assert S.well_formed(t) == []


@given(programs(3))
def test_generated_programs_well_formed(p):
    assert S.well_formed(p) == []

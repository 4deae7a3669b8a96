"""Signatures, read/write sets and admissibility."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochdl import syntax as S
from stochdl.analysis import ALL, EMPTY, VarSet, admissible, introduced_reads, rv, sig, wv
from stochdl.parser import parse_formula, parse_program, parse_term
from stochdl.semantics import ChoiceSequence, Valuation, eval_formula, eval_term, run_program
from stochdl.substitution import IDENTITY, apply, parse_substitution
from strategies import VARS, formulas, programs, terms


# ------------------------------------------------------------ signatures


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x >= 0", set()),
        ("f@1(x) >= c@0", {("f", "f", 1), ("f", "c", 0)}),
        ("p@0 & q@2(x, y)", {("p", "p", 0), ("p", "q", 2)}),
        ("[G@a ; x := g@1(x)] r@1(x)", {("g", "a"), ("f", "g", 1), ("p", "r", 1)}),
    ],
)
def test_sig_examples(text, expected):
    assert sig(parse_formula(text)) == expected


# ------------------------------------------------------- read/write sets


def test_rv_of_sum():
    assert rv(parse_term("x + y")) == VarSet.of("x", "y")


def test_rv_constant_is_empty():
    assert not rv(parse_term("2 * 3"))


def test_rv_time_differential_reads_subscripts():
    r = rv(parse_term("d/dt(x)"))
    assert "x" in r and "x_t" in r and "x_B[z]" in r
    assert "y" not in r


def test_rv_brownian_differential_reads_indexed_subscript():
    r = rv(parse_term("dB[y](x)"))
    assert {"x", "x_B[y]"} <= set(r.names)
    assert "x_t" not in r


def test_wv_skip_is_empty():
    assert wv(parse_program("skip")) == EMPTY


def test_wv_program_symbol_is_everything():
    assert wv(parse_program("G@a")) == ALL
    assert rv(parse_program("G@a")) == ALL


def test_wv_assignments_and_random():
    assert wv(parse_program("x := 1 ; y := *")) == VarSet.of("x", "y")


def test_wv_sde_covers_its_subscripts():
    w = wv(parse_program("dx = 1 dt + 1 dW & x <= 5"))
    assert {"x", "x_t", "x_B[x]"} <= set(w.names)


def test_rv_sde_includes_own_variables():
    assert "x" in rv(parse_program("dx = 1 dt + 1 dW & 5 >= 0"))


def test_varset_witness():
    assert VarSet.of("a", "b").witness(VarSet.of("b")) == "b"
    assert VarSet.of("a").witness(VarSet.of("b")) is None
    assert ALL.witness(VarSet.of("q")) == "q"


# --------------------------------------------------------- admissibility


def _subst(text, node):
    from stochdl.substitution import symbol_kinds

    return parse_substitution(text, symbol_kinds(node))


def test_clash_assign_then_state_predicate():
    phi = parse_formula("<x := 1> p@0")
    sigma = _subst("subst { p@0 -> x >= 0 }", phi)
    result = admissible(sigma, phi)
    assert not result
    assert result.variable == "x"
    # the clash is real: the two sides disagree at x = -1
    from stochdl.semantics import Interpretation

    v = Valuation({"x": -1.0})
    interp = Interpretation()
    from stochdl.substitution import adjoint

    left = eval_formula(interp, v, 0, apply(sigma, phi))
    right = eval_formula(adjoint(sigma, interp, v), v, 0, phi)
    assert left.value != right.value


def test_admissible_when_replacement_reads_other_variable():
    phi = parse_formula("<x := 1> p@0")
    assert admissible(_subst("subst { p@0 -> y >= 0 }", phi), phi)


def test_identity_is_admissible():
    phi = parse_formula("[G@a] p@0 & <x := *> f@1(x) >= 0")
    assert admissible(IDENTITY, phi)


def test_program_replacement_reading_written_variable_clashes():
    phi = parse_formula("[G@a] c@0 >= 0")
    sigma = _subst("subst { G@a -> y := 1 ; c@0 -> y }", phi)
    assert not admissible(sigma, phi)


def test_marker_only_replacements_are_admissible_anywhere():
    phi = parse_formula("[x := *] f@1(x) >= 0")
    assert admissible(_subst("subst { f@1 -> o1 * o1 }", phi), phi)


def test_state_dependent_constant_inside_differential_clashes():
    phi = parse_formula("d/dt(c@0) >= 0")
    result = admissible(_subst("subst { c@0 -> x }", phi), phi)
    assert not result
    assert "differential" in result.reason


def test_introduced_reads_only_counts_symbols_present():
    phi = parse_formula("p@0")
    sigma = _subst("subst { p@0 -> y >= 0 ; c@0 -> z }", phi)
    assert set(introduced_reads(sigma, phi).names) == {"y"}


# ------------------------------------------------------------ properties


def _perturb(rng, v: Valuation, keep) -> Valuation:
    """Change every defined or undefined variable outside ``keep``."""
    out = {k: val for k, val in v.values.items() if k in keep}
    for name in VARS + ("w", "x_t", "y_t", "x_B[x]", "z_B[y]"):
        if name not in keep and rng.random() < 0.7:
            out[name] = float(rng.normal())
    return Valuation(out)


def _valuation(rng) -> Valuation:
    return Valuation({n: float(rng.integers(-8, 9)) / 4 for n in VARS if rng.random() < 0.9})


@settings(max_examples=300)
@given(terms(3, symbols=False), st.integers(0, 2**31))
def test_rv_soundness_terms(t, seed):
    rng = np.random.default_rng(seed)
    r = rv(t)
    v = _valuation(rng)
    u = _perturb(rng, v, r)
    a, b = eval_term_pair(t, v, u, seed)
    assert (math.isnan(a) and math.isnan(b)) or a == b


def eval_term_pair(t, v, u, seed):
    from stochdl.semantics import Interpretation

    interp = Interpretation()
    return eval_term(interp, v, seed, t), eval_term(interp, u, seed, t)


@settings(max_examples=200)
@given(formulas(3, symbols=False), st.integers(0, 2**31))
def test_rv_soundness_formulas(phi, seed):
    from stochdl.semantics import Interpretation

    rng = np.random.default_rng(seed)
    interp = Interpretation(step=0.05)
    v = _valuation(rng)
    u = _perturb(rng, v, rv(phi))
    a = eval_formula(interp, v, seed, phi, 4, 2)
    b = eval_formula(interp, u, seed, phi, 4, 2)
    assert a == b


@settings(max_examples=300)
@given(programs(3, symbols=False), st.integers(0, 2**31), st.lists(st.integers(0, 1), max_size=6))
def test_wv_soundness(alpha, seed, bits):
    from stochdl.semantics import Interpretation

    rng = np.random.default_rng(seed)
    interp = Interpretation(step=0.05)
    v = _valuation(rng)
    out, _ = run_program(interp, v, seed, ChoiceSequence(tuple(bits)), alpha)
    if not out.ok:
        return
    w = wv(alpha)
    for name in set(v.values) | set(out.values):
        if name not in w:
            assert v.get(name) == out.get(name) or (math.isnan(v.get(name)) and math.isnan(out.get(name)))


@settings(max_examples=300)
@given(formulas(3))
def test_read_and_write_sets_grow_with_the_expression(phi):
    for sub in S.walk(phi):
        for f in (rv, wv):
            whole, part = f(phi), f(sub)
            if whole.all:
                continue
            assert not part.all
            assert part.names <= whole.names | {n for n in part.names if any(n.startswith(p) for p in whole.prefixes)}
            assert part.prefixes <= whole.prefixes

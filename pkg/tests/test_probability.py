"""Monte Carlo estimation and probability-formula checking."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from stochdl import syntax as S
from stochdl.parser import parse_formula, parse_program
from stochdl.probability import (
    InitialSpec,
    ProbEstimate,
    Uniform,
    UnboundAtom,
    check_mixture,
    check_randomization,
    check_spade,
    check_spade_sampled,
    estimate,
    outcomes,
    parse_initial,
    wilson,
)
from stochdl.semantics import Interpretation
from stochdl.spade import parse_spade
from strategies import formulas

TV = S.TruthValue
I0 = Interpretation()


def _wilson_by_hand(k, n, z=norm.ppf(0.975)):
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    return centre - half, centre + half


@pytest.mark.parametrize("k, n", [(0, 10), (5, 10), (160, 1000), (9999, 10000)])
def test_wilson_matches_closed_form(k, n):
    lo, hi = wilson(k, n)
    elo, ehi = _wilson_by_hand(k, n)
    assert lo == pytest.approx(max(0.0, elo), abs=1e-12)
    assert hi == pytest.approx(min(1.0, ehi), abs=1e-12)


# ------------------------------------------------------------- initials


def test_parse_initial():
    spec = parse_initial("x=0.5, y=U(0,2)")
    assert spec.entries == {"x": 0.5, "y": Uniform(0.0, 2.0)}


def test_parse_initial_rejects_garbage():
    with pytest.raises(ValueError):
        parse_initial("x=")
    with pytest.raises(ValueError):
        parse_initial("x=U(1,0)")


def test_initial_sampling_is_seeded():
    spec = parse_initial("y=U(0,1)")
    assert spec.sample(5, 3) == spec.sample(5, 3)
    assert spec.sample(5, 3) != spec.sample(5, 4)
    assert all(0 <= v.get("y") <= 1 for v in spec.sample(100, 0))


# ------------------------------------------------------------ estimates


def test_tautology_has_probability_one():
    est = estimate(I0, InitialSpec({"x": 1.0}), parse_formula("x >= 0"), n=200)
    assert est.p == 1.0 and est.hi == 1.0


def test_undefined_atom_has_probability_zero():
    est = estimate(I0, InitialSpec(), parse_formula("y >= 0"), n=200)
    assert est.p == 0.0


def test_uniform_half():
    est = estimate(I0, InitialSpec(), parse_formula("<x := *> sure(x >= 1/2)"), n=10_000)
    assert est.lo <= 0.5 <= est.hi
    assert abs(est.p - 0.5) < 0.02


def test_brownian_tail():
    phi = parse_formula("<x := 0; dx = 0 dt + 1 dW & 0 <= 0> sure(x >= 1)")
    est = estimate(Interpretation(step=1e-2), InitialSpec(), phi, n=4000)
    assert abs(est.p - norm.sf(1.0)) < 0.02


def test_estimate_is_reproducible():
    phi = parse_formula("<x := *> x >= 0.3")
    a = estimate(I0, InitialSpec(), phi, n=500, seed=11)
    b = estimate(I0, InitialSpec(), phi, n=500, seed=11)
    assert a == b and np.array_equal(a.outcomes, b.outcomes)


def test_estimate_reports_truncation():
    phi = parse_formula("<(x := x + 1)*> x >= 100")
    est = estimate(I0, InitialSpec({"x": 0.0}), phi, n=20, choice_bound=6)
    assert est.truncated == 1.0


def test_estimate_string():
    est = ProbEstimate.from_outcomes(np.array([1, 0, 0, 0], bool), np.zeros(4, bool))
    assert str(est).startswith("p=0.25 ci=[")
    assert str(est).endswith("n=4 truncated=0.0")


def test_zero_samples_rejected():
    with pytest.raises(ValueError):
        outcomes(I0, InitialSpec(), parse_formula("0 >= 0"), 0)


# ---------------------------------------------------------- ♠ checking


def _est(p, half, n=10_000):
    return ProbEstimate(p, p - half, p + half, n, 0.0)


def test_far_apart_estimate_violates():
    phi = parse_formula("x >= 0")
    spade = parse_spade("P(x >= 0) = 0.9")
    verdict = check_spade(spade, {phi: _est(0.10, 0.02)}, eps=0.05)
    assert verdict.kind == "violated"
    assert verdict.margin == pytest.approx(0.9 - 0.12)


def test_close_estimate_is_consistent():
    phi = parse_formula("x >= 0")
    assert check_spade(parse_spade("P(x >= 0) >= 0.5"), {phi: _est(0.6, 0.02)}).kind == "consistent"


def test_straddling_estimate_is_inconclusive():
    phi = parse_formula("x >= 0")
    assert check_spade(parse_spade("P(x >= 0) >= 0.5"), {phi: _est(0.5, 0.05)}, eps=0.01).kind == "inconclusive"


def test_identical_atoms_are_coupled():
    # the same estimate used twice cannot disagree with itself
    phi = parse_formula("x >= 0")
    spade = parse_spade("P(x >= 0) - P(x >= 0) = 0")
    assert check_spade(spade, {phi: _est(0.5, 0.05)}, eps=0.0).kind == "consistent"


def test_sampled_check():
    spade = parse_spade("P(<x := *> x >= 0.25) >= 0.7")
    verdict, bindings = check_spade_sampled(I0, InitialSpec(), spade, n=4000)
    assert verdict.kind == "consistent" and len(bindings) == 1


def test_sampled_check_needs_ground_constants():
    with pytest.raises(UnboundAtom):
        check_spade_sampled(I0, InitialSpec(), parse_spade("P(x >= 0) >= c@0"), n=10)


# ------------------------------------------------------- integral checks


def test_randomization_integral():
    phi = parse_formula("x * x >= 0.36")
    result = check_randomization(I0, InitialSpec(), phi, "x", m=100, n=10_000)
    assert result.verdict.kind == "consistent"
    assert result.lhs.lo - 0.01 <= 0.4 <= result.lhs.hi + 0.01


def test_randomization_integral_of_threshold():
    phi = parse_formula("x >= 0.5")
    good = check_randomization(I0, InitialSpec(), phi, "x", m=20, n=4000)
    assert good.verdict.kind == "consistent"
    assert abs(good.rhs.p - 0.5) < 0.03


def test_mixture():
    alpha, beta = parse_program("y := 1"), parse_program("y := 0")
    phi = parse_formula("y >= 1")
    result = check_mixture(I0, InitialSpec(), "x", 0.3, alpha, beta, phi, n=10_000)
    assert result.verdict.kind == "consistent"
    assert abs(result.lhs.p - 0.3) < 0.02
    assert result.rhs.p == pytest.approx(0.3)


def test_mixture_weight_range():
    with pytest.raises(ValueError):
        check_mixture(I0, InitialSpec(), "x", 1.5, parse_program("skip"), parse_program("skip"), parse_formula("0 >= 0"))


# ------------------------------------------------------------ properties


def _tops(phi, n=64, seed=0):
    codes, _ = outcomes(Interpretation(step=0.05), InitialSpec({"x": 0.25, "y": -0.5}), phi, n, seed, 6, 2)
    return codes


@settings(max_examples=60)
@given(formulas(2, symbols=False), formulas(2, symbols=False), st.integers(0, 1000))
def test_disjunction_dominates_per_sample(f1, f2, seed):
    a = _tops(f1, seed=seed)
    both = _tops(S.desugar(S.Or(f1, f2)), seed=seed)
    assert np.all(both[a == TV.TOP] == TV.TOP)


@settings(max_examples=60)
@given(formulas(2, symbols=False), st.integers(0, 1000))
def test_sure_has_the_same_probability_per_sample(phi, seed):
    a = _tops(phi, seed=seed) == TV.TOP
    b = _tops(S.Sure(phi), seed=seed) == TV.TOP
    assert np.array_equal(a, b)


@settings(max_examples=60)
@given(formulas(2, symbols=False), st.integers(0, 1000))
def test_negation_bound(phi, seed):
    codes = _tops(phi, seed=seed)
    neg = _tops(S.Not(phi), seed=seed)
    p, q = np.mean(codes == TV.TOP), np.mean(neg == TV.TOP)
    ind = np.mean(codes == TV.IND)
    assert p + q <= 1.0
    assert p + q + ind == pytest.approx(1.0)

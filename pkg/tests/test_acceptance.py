"""Acceptance suite: ten end-to-end criteria, one status line each.

Run with ``pytest tests/test_acceptance.py -v``; every criterion prints
``criterion N (...): PASS|FAIL ...`` even when output capture is on.
"""

import io
import itertools
import math
import time

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from stochdl import syntax as S
from stochdl.analysis import admissible, sig
from stochdl.cli import main
from stochdl.harness import InterpGenerator, mutation_check, smoke_axioms
from stochdl.kernel.axioms import axiom_catalog
from stochdl.parser import parse, parse_formula, parse_program, parse_sdl
from stochdl.printer import print_node
from stochdl.probability import InitialSpec, check_randomization, estimate, outcomes
from stochdl.semantics import ChoiceSequence, Interpretation, Valuation, eval_formula, eval_term, run_program
from stochdl.substitution import adjoint, apply, parse_substitution, symbol_kinds
from stochdl.syntax import TruthValue as T, tv_and, tv_not, tv_or
from conftest import CORPUS, PROOFS
from strategies import SUBSCRIPTED, VARS, formulas, programs, signature_kinds, substitution_texts, terms
from test_substitution import CLASHES

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    """Yield a recorder; the status line is printed on exit, pass or fail."""
    state = {}

    def record(n, title):
        state.update(n=n, title=title, start=time.perf_counter(), detail="")
        return state

    yield record
    ok = state.get("ok", False)
    took = time.perf_counter() - state["start"]
    detail = f" {state['detail']}" if state["detail"] else ""
    with capsys.disabled():
        print(f"\ncriterion {state['n']} ({state['title']}): {'PASS' if ok else 'FAIL'}{detail} [{took:.1f}s]")


def _valuation(rng):
    return Valuation({n: float(rng.integers(-8, 9)) / 4 for n in VARS if rng.random() < 0.9})


def _interp(node, seed, choice_bound=6, star_bound=2):
    gen = InterpGenerator(sig(node), step=0.05, choice_bound=choice_bound, star_bound=star_bound)
    return gen.generate(seed)[0]


# ------------------------------------------------------- 1. truth lattice


AND = {(a, b): T(min(a, b)) for a, b in itertools.product(T, T)}


def test_truth_lattice(report):
    r = report(1, "truth lattice")
    for (a, b), want in AND.items():
        assert tv_and(a, b) == want
        assert tv_or(a, b) == T(max(a, b))
        assert tv_not(tv_and(a, b)) == tv_or(tv_not(a), tv_not(b))
        assert tv_not(tv_or(a, b)) == tv_and(tv_not(a), tv_not(b))
    for a in T:
        assert tv_not(tv_not(a)) == a
    assert [tv_not(a) for a in (T.BOT, T.IND, T.TOP)] == [T.TOP, T.IND, T.BOT]
    took = time.perf_counter() - r["start"]
    assert took < 1.0
    r.update(ok=True, detail="9 pairs exact")


# -------------------------------------------------------- 2. axiom smoke


def test_axiom_smoke(report):
    r = report(2, "axiom smoke and mutants")
    catalog = axiom_catalog()
    summary = smoke_axioms(catalog, trials=1000, choice_bound=8, times_size=4)
    assert [row.id for row in summary.rows] == [a.id for a in catalog]
    failed = [row.id for row in summary.failed()]
    quarantined = {row.id: row.failures for row in summary.rows if row.quarantined}
    assert failed == [], failed
    assert all(row.instances >= 3 for row in summary.rows)
    mutants = mutation_check(trials=200, groups=10)
    missed = [name for name, row in mutants.items() if not row.failures]
    assert len(mutants) == 10 and missed == [], missed
    assert time.perf_counter() - r["start"] < 300
    r.update(ok=True, detail=f"{len(catalog)} axioms, 0 failures, 10/10 mutants, quarantined {quarantined}")


# ----------------------------------------------------- 3. no look-ahead


def test_no_look_ahead(report):
    r = report(3, "no look-ahead")
    count = [0]

    @settings(max_examples=500, derandomize=True)
    @given(st.data(), programs(3), st.integers(0, 2**31), st.lists(st.integers(0, 1), max_size=10))
    def check(data, alpha, seed, bits):
        interp = _interp(alpha, seed)
        v = _valuation(np.random.default_rng(seed))
        out, cur = run_program(interp, v, seed, ChoiceSequence(tuple(bits)), alpha)
        n = cur.pos
        suffix = data.draw(st.lists(st.integers(0, 1), min_size=1, max_size=6))
        prefix = tuple(bits[:n]) + (0,) * max(0, n - len(bits))
        altered = prefix + tuple(1 - b for b in (bits[n:] or [0])) + tuple(suffix)
        out2, cur2 = run_program(interp, v, seed, ChoiceSequence(altered), alpha)
        assert (out2, cur2.pos) == (out, n)
        count[0] += 1

    check()
    assert count[0] >= 500
    r.update(ok=True, detail=f"{count[0]} programs")


# ------------------------------------------------------- 4. composition


def test_composition(report):
    r = report(4, "composition")
    count = [0]

    @settings(max_examples=100, derandomize=True)
    @given(programs(2), programs(2), formulas(1), st.integers(0, 2**31))
    def check(alpha, beta, phi, seed):
        lhs = S.Modal(S.Seq(alpha, beta), phi)
        rhs = S.Modal(alpha, S.Modal(beta, phi))
        interp = _interp(S.And(lhs, rhs), seed)
        v = _valuation(np.random.default_rng(seed))
        a = eval_formula(interp, v, seed, lhs, 6, 2)
        b = eval_formula(interp, v, seed, rhs, 6, 2)
        assume(not (a.truncated or b.truncated))
        assert a.value == b.value
        count[0] += 1

    check()
    assert count[0] >= 100
    r.update(ok=True, detail=f"{count[0]} untruncated cases")


# ------------------------------------------- 5. substitution soundness


CB, SB = 4, 2


def test_substitution_soundness(report):
    r = report(5, "uniform substitution")
    count = [0]

    @settings(max_examples=300, derandomize=True)
    @given(substitution_texts(), st.one_of(terms(3), programs(3), formulas(3)), st.integers(0, 2**31))
    def check(text, e, seed):
        sigma = parse_substitution(text, signature_kinds())
        assume(admissible(sigma, e))
        out = apply(sigma, e)
        interp = InterpGenerator(sig(e) | sig(out), step=0.05, choice_bound=CB, star_bound=SB).generate(seed)[0]
        v = _valuation(np.random.default_rng(seed))
        adj = adjoint(sigma, interp, v)
        if isinstance(e, S.Term):
            a, b = eval_term(interp, v, seed, out), eval_term(adj, v, seed, e)
            assert (math.isnan(a) and math.isnan(b)) or a == b
        elif isinstance(e, S.Program):
            C = ChoiceSequence((1, 0, 1, 1))
            assert run_program(interp, v, seed, C, out)[0] == run_program(adj, v, seed, C, e)[0]
        else:
            assert eval_formula(interp, v, seed, out, CB, SB) == eval_formula(adj, v, seed, e, CB, SB)
        count[0] += 1

    check()
    assert count[0] >= 300
    differ = 0
    for text, subst, vals in CLASHES:
        phi = parse_formula(text)
        sigma = parse_substitution(subst, symbol_kinds(phi))
        assert not admissible(sigma, phi), text
        interp = InterpGenerator(sig(phi) | sig(apply(sigma, phi)), step=0.05).generate(0)[0]
        v = Valuation(vals)
        a = eval_formula(interp, v, 0, apply(sigma, phi))
        b = eval_formula(adjoint(sigma, interp, v), v, 0, phi)
        differ += a.value != b.value
    assert len(CLASHES) == 20 and differ >= 5
    r.update(ok=True, detail=f"{count[0]} admissible exact, 20 clashes rejected, {differ} disagree")


# ------------------------------------------------------ 6. stop times


GOAL = "<x := 0; dx = 1 dt + 0 dW & x <= 3> (x * x - 2) * (x * x - 2) <= 0.000000000000000001"


def test_stop_time_counterexample(report):
    r = report(6, "stop times")
    phi = parse_formula(GOAL)
    hit = eval_formula(Interpretation(times=(math.sqrt(2),)), Valuation({}), 0, phi).value
    miss = eval_formula(Interpretation(times=(1.0, 1.41, 1.414)), Valuation({}), 0, phi).value
    assert (hit, miss) == (T.TOP, T.BOT)
    assert time.perf_counter() - r["start"] < 1.0
    r.update(ok=True, detail="sqrt 2 gives TOP, {1, 1.41, 1.414} gives BOT")


# ------------------------------------------------------ 7. SDE numerics


def test_sde_numerics(report):
    r = report(7, "SDE numerics")
    tail = parse_formula("<x := 0; dx = 0 dt + 1 dW & 0 <= 0> sure(x >= 1)")
    est = estimate(Interpretation(step=1e-3), InitialSpec(), tail, n=10_000)
    took = time.perf_counter() - r["start"]
    assert abs(est.p - norm.sf(1.0)) <= 0.02 and took < 60
    gbm = parse_formula("<x := 1; dx = 0 * x dt + 1 * x dW & 0 <= 0> sure(x >= 1)")
    est2 = estimate(Interpretation(step=1e-3), InitialSpec(), gbm, n=10_000, seed=1)
    assert abs(est2.p - norm.cdf(-0.5)) <= 0.02
    hs = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    errs = []
    for h in hs:
        v, _ = run_program(
            Interpretation(times=(1.0,), step=h),
            Valuation({}),
            0,
            ChoiceSequence(()),
            parse_program("x := 1; dx = x dt + 0 dW & x <= 100"),
        )
        errs.append(abs(v.get("x") - math.e))
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    assert abs(slope - 1.0) <= 0.2
    r.update(ok=True, detail=f"tail {est.p:.4f} in {took:.1f}s, gbm {est2.p:.4f}, Euler slope {slope:.2f}")


# ------------------------------------------------- 8. probability axioms


def _codes(phi, seed):
    init = InitialSpec({"x": 0.25, "y": -0.5})
    return outcomes(Interpretation(step=0.05), init, phi, 64, seed, 6, 2)[0]


def test_probability_axioms(report):
    r = report(8, "probability axioms")
    count = [0]

    @settings(max_examples=100, derandomize=True)
    @given(formulas(2, symbols=False), formulas(2, symbols=False), st.integers(0, 1000))
    def check(f1, f2, seed):
        a = _codes(f1, seed) == T.TOP
        both = _codes(S.desugar(S.Or(f1, f2)), seed) == T.TOP
        assert np.all(both[a])
        assert np.array_equal(_codes(S.Sure(f1), seed) == T.TOP, a)
        count[0] += 1

    check()
    res = check_randomization(Interpretation(), InitialSpec(), parse_formula("x * x >= 0.36"), "x", m=100, n=10_000, eps=0.01)
    assert res.verdict.kind == "consistent"
    r.update(ok=True, detail=f"{count[0]} per-sample pairs, randomization {res.verdict.kind}")


# ------------------------------------------------------- 9. round trips


def test_round_trip(report):
    r = report(9, "parser round trip")
    names = VARS + SUBSCRIPTED
    count = [0]

    @settings(max_examples=10_000, derandomize=True)
    @given(st.one_of(terms(4, names), programs(3, names), formulas(4, names)))
    def check(e):
        kind = "term" if isinstance(e, S.Term) else "program" if isinstance(e, S.Program) else "formula"
        assert parse(print_node(e), kind) == S.desugar(e)
        count[0] += 1

    check()
    assert count[0] >= 10_000
    files = sorted(CORPUS.glob("*.sdl"))
    assert len(files) == 20
    for path in files:
        decls = parse_sdl(path.read_text())
        got = "".join(f"{d.line}\t{d.kind} {d.name} = {print_node(d.node)}\n" for d in decls)
        assert got == path.with_suffix(".golden").read_text(), path.name
    r.update(ok=True, detail=f"{count[0]} ASTs, 20 corpus goldens")


# ------------------------------------------------------ 10. proof goldens


ACCEPTED = ["skip_equivalence", "choice_distribution", "mp_chain", "g_application", "us_instantiation"]
REJECTED = {"rejected_choice_clash": 1, "rejected_mp_mismatch": 3, "rejected_us_clash": 2}


def _check(name):
    buf = io.StringIO()
    code = main(["check", str(PROOFS / f"{name}.sdlp")], out=buf)
    return code, buf.getvalue()


def test_proof_goldens(report):
    r = report(10, "proof goldens")
    for name in ACCEPTED:
        code, text = _check(name)
        assert code == 0, name
        assert text == (PROOFS / f"{name}.report").read_text() == _check(name)[1]
    for name, step in REJECTED.items():
        code, text = _check(name)
        assert code == 2, name
        assert f"REJECTED at step {step}" in text, (name, text)
        assert text == (PROOFS / f"{name}.report").read_text() == _check(name)[1]
    r.update(ok=True, detail=f"{len(ACCEPTED)} accepted, {len(REJECTED)} rejected, reports byte-stable")

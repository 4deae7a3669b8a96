"""Random interpretations, falsification and the axiom smoke suite."""

import numpy as np
import pytest

from stochdl import syntax as S
from stochdl.analysis import sig
from stochdl.harness import (
    MUTANTS,
    InterpGenerator,
    default_suites,
    falsify,
    mutation_check,
    replay,
    sample_valuations,
    smoke_axioms,
)
from stochdl.kernel.axioms import axiom_catalog, lookup
from stochdl.parser import parse_formula
from stochdl.semantics import ChoiceSequence, Valuation, run_program

TV = S.TruthValue


# ------------------------------------------------------------ generator


def test_generator_is_seeded():
    gen = InterpGenerator(sig(parse_formula("[G@a] f@1(x) >= c@0 & p@1(x)")))
    a, da = gen.generate(5)
    b, db = gen.generate(5)
    assert da == db and a.times == b.times
    assert gen.generate(6)[1] != da


def test_generator_times():
    gen = InterpGenerator(max_times=6)
    for s in range(30):
        times = gen.generate(s)[0].times
        assert 1 <= len(times) <= 6 and all(0 <= t <= 10 for t in times)
    fixed = InterpGenerator(times_size=4)
    assert all(len(fixed.generate(s)[0].times) == 4 for s in range(10))


def test_generated_programs_consume_a_fixed_bit_count():
    gen = InterpGenerator(frozenset({("g", "a")}))
    rng = np.random.default_rng(0)
    for _ in range(30):
        prog, bits = gen.straight_line(rng)
        for pattern in ((), (1,) * 8, (0, 1) * 4):
            v = Valuation({"x": 0.5, "y": -1.0, "z": 2.0})
            _, rest = run_program(gen.generate(0)[0], v, 0, ChoiceSequence(pattern), prog)
            assert rest.pos == bits


def test_sample_valuation_modes():
    rng = np.random.default_rng(0)
    phi = parse_formula("d/dt(x) >= y")
    full = sample_valuations(rng, phi, 20, "full")
    assert all({"x", "x_t", "x_B[x]", "y"} <= set(v.values) for v in full)
    dyadic = sample_valuations(rng, phi, 50, "dyadic")
    assert all(float(val * 8).is_integer() for v in dyadic for val in v.values.values())
    default = sample_valuations(rng, phi, 200)
    assert any("x" not in v.values for v in default)


# ------------------------------------------------------------ falsify


def test_id_axiom_instance_has_no_counterexample():
    rep = falsify(parse_formula("x >= 0 <-> x >= 0"), trials=1000)
    assert not rep.falsified and rep.samples == 1000 and rep.failures == 0


def test_non_valid_formula_is_falsified():
    rep = falsify(parse_formula("x >= 0"), trials=200)
    assert rep.falsified
    assert rep.counterexample.value in (TV.BOT, TV.IND)


def test_failing_choice_is_indeterminate_at_every_sample():
    rep = falsify(parse_formula("[x := 1 ++ fail] x = 1"), trials=500)
    assert rep.failures == rep.samples == 500
    assert rep.counterexample.value == TV.IND


def test_replay_reproduces_the_counterexample():
    rep = falsify(parse_formula("[G@a] x >= 0"), trials=300, seed=4)
    assert rep.falsified
    assert replay(rep) == rep.counterexample.value


def test_replay_without_counterexample():
    assert replay(falsify(parse_formula("0 >= 0"), trials=10, groups=2)) is None


def test_report_text():
    rep = falsify(parse_formula("1 >= 0"), trials=40, groups=4)
    assert str(rep) == "1 >= 0: 40 samples, 0 non-TOP, truncation rate 0.0000, no counterexample"
    bad = falsify(parse_formula("x >= 0"), trials=40, groups=4)
    assert "\n  counterexample: value " in str(bad)


def test_superset_doubles_the_evaluations():
    rep = falsify(parse_formula("<x := 0; dx = 1 dt + 0 dW & x <= 20> x >= 0"), trials=40, groups=4, superset=True)
    assert len(rep.times_used) == 8
    for small, big in zip(rep.times_used[::2], rep.times_used[1::2]):
        assert set(small) <= set(big)


def test_falsify_is_deterministic():
    phi = parse_formula("[G@a] f@1(x) >= 0")
    a, b = falsify(phi, trials=100, seed=9), falsify(phi, trials=100, seed=9)
    assert str(a) == str(b)


# --------------------------------------------------------------- smoke


def test_every_axiom_has_three_instances():
    suites = default_suites()
    for a in axiom_catalog():
        assert len(suites[a.id]) >= 3, a.id


def test_smoke_choice_and_dt_times():
    cat = [lookup("choice"), lookup("dt-times"), lookup("prob-mono"), lookup("rand-int")]
    summary = smoke_axioms(cat, trials=200, groups=10)
    assert [r.id for r in summary.rows] == ["choice", "dt-times", "prob-mono", "rand-int"]
    assert summary.failed() == []
    assert summary.tsv().splitlines()[0] == "axiom\ttrials\tfailures\tquarantine"
    assert summary.tsv().splitlines()[1] == "choice\t600\t0\tno"


def test_quarantined_failures_are_reported_separately():
    summary = smoke_axioms([lookup("di")], trials=60, groups=3)
    row = summary.rows[0]
    assert row.quarantined and row.failures > 0
    assert summary.failed() == [] and summary.failed(include_quarantined=True) == [row]


def test_missing_suite_is_an_error():
    with pytest.raises(ValueError, match="no substitution suite"):
        smoke_axioms([lookup("id")], suites={})


def test_mutants_are_distinct_and_based_on_catalog_axioms():
    assert len(MUTANTS) == 10
    assert len({name for name, _, _ in MUTANTS}) == 10
    for _, base, text in MUTANTS:
        assert lookup(base).text != text


def test_mutants_are_detected():
    rows = mutation_check(trials=100, groups=5)
    missed = [name for name, row in rows.items() if not row.failures]
    assert missed == []

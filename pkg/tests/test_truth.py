import itertools

import pytest
from hypothesis import given, strategies as st

from stochdl.syntax import TruthValue as T, tv_and, tv_iff, tv_implies, tv_ind, tv_not, tv_or, tv_sup, tv_sure

ALL = list(T)
tvs = st.sampled_from(ALL)

# conjunction is TOP only when both are TOP, BOT when either is BOT, IND otherwise
AND_TABLE = {
    (T.TOP, T.TOP): T.TOP,
    (T.TOP, T.IND): T.IND,
    (T.TOP, T.BOT): T.BOT,
    (T.IND, T.TOP): T.IND,
    (T.IND, T.IND): T.IND,
    (T.IND, T.BOT): T.BOT,
    (T.BOT, T.TOP): T.BOT,
    (T.BOT, T.IND): T.BOT,
    (T.BOT, T.BOT): T.BOT,
}


def test_order():
    assert T.BOT < T.IND < T.TOP


def test_negation_table():
    assert tv_not(T.TOP) == T.BOT
    assert tv_not(T.IND) == T.IND
    assert tv_not(T.BOT) == T.TOP


@pytest.mark.parametrize("a,b", list(AND_TABLE))
def test_and_table(a, b):
    assert tv_and(a, b) == AND_TABLE[(a, b)]


@pytest.mark.parametrize("a,b", list(AND_TABLE))
def test_or_is_max(a, b):
    assert tv_or(a, b) == max(a, b)


def test_sup():
    assert tv_sup([T.BOT, T.IND]) == T.IND
    assert tv_sup([T.TOP]) == T.TOP
    with pytest.raises(ValueError):
        tv_sup([])


def test_sure_and_ind():
    assert [tv_sure(a) for a in (T.BOT, T.IND, T.TOP)] == [T.BOT, T.BOT, T.TOP]
    assert [tv_ind(a) for a in (T.BOT, T.IND, T.TOP)] == [T.BOT, T.TOP, T.BOT]


def test_implication_truth_table():
    # not a, or b, or both indeterminate
    for a, b in itertools.product(ALL, ALL):
        expected = max(tv_not(a), b, min(tv_ind(a), tv_ind(b)))
        assert tv_implies(a, b) == expected
    assert tv_implies(T.IND, T.IND) == T.TOP
    assert tv_iff(T.IND, T.IND) == T.TOP
    assert tv_iff(T.IND, T.TOP) == T.IND


@given(tvs)
def test_double_negation(a):
    assert tv_not(tv_not(a)) == a


@given(tvs, tvs)
def test_de_morgan(a, b):
    assert tv_not(tv_and(a, b)) == tv_or(tv_not(a), tv_not(b))
    assert tv_not(tv_or(a, b)) == tv_and(tv_not(a), tv_not(b))


@given(tvs, tvs, tvs)
def test_lattice_laws(a, b, c):
    assert tv_and(a, b) == tv_and(b, a)
    assert tv_or(a, b) == tv_or(b, a)
    assert tv_and(a, tv_and(b, c)) == tv_and(tv_and(a, b), c)
    assert tv_or(a, tv_or(b, c)) == tv_or(tv_or(a, b), c)
    assert tv_and(a, a) == a and tv_or(a, a) == a

import itertools

import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from cfcheck import (
    Atom,
    AttrItem,
    Attribution,
    CausalGraph,
    Complement,
    DataPoint,
    EdgeItem,
    GraphCycle,
    InvalidModel,
    Judgment,
    Sum,
    value_matches,
    variables_of,
)
from cfcheck.model import check_probability, check_token


def test_token_validation():
    for ok in ("Gender", "65K", "1100", "a_b.c", "5y"):
        assert check_token(ok) == ok
    for bad in ("", "a b", "a-b", "a+b", None):
        with pytest.raises(InvalidModel):
            check_token(bad)


def test_variables_of():
    dp = DataPoint(
        tuple(
            Attribution(v, Atom(x))
            for v, x in [
                ("Gender", "m"),
                ("MS", "mar"),
                ("SAT", "1100"),
                ("GAI", "65K"),
                ("Degree", "PhD"),
                ("Experience", "5y"),
            ]
        )
    )
    assert variables_of(dp) == {"Gender", "MS", "SAT", "GAI", "Degree", "Experience"}
    assert variables_of(DataPoint(())) == frozenset()
    dp2 = DataPoint(
        (Attribution("A", Atom("x")), Attribution("B", Sum((Atom("y"), Atom("z")))))
    )
    assert variables_of(dp2) == {"A", "B"}


def test_duplicate_variable_rejected():
    with pytest.raises(InvalidModel):
        DataPoint((Attribution("A", Atom("x")), Attribution("A", Atom("y"))))


def test_sum_invariants():
    with pytest.raises(InvalidModel):
        Sum((Atom("a"),))
    with pytest.raises(InvalidModel):
        Sum((Atom("a"), Atom("a")))
    # double complement is stored as-is, no simplification
    t = Complement(Complement(Atom("a")))
    assert t.inner == Complement(Atom("a"))


def test_value_matches_examples():
    married_or_divorced = Sum((Atom("married"), Atom("divorced")))
    assert value_matches(married_or_divorced, "divorced")
    assert not value_matches(Complement(Atom("white")), "white")
    assert value_matches(Complement(Sum((Atom("a"), Atom("b")))), "c")


def test_value_matches_complement_of_sum_truth_table():
    # brute-force truth table over {a, b, c}: !(a+b) matches exactly what a+b rejects
    term = Sum((Atom("a"), Atom("b")))
    for tok in ("a", "b", "c"):
        assert value_matches(Complement(term), tok) == (tok not in ("a", "b"))


@st.composite
def value_terms(draw, depth=3):
    if depth == 0:
        return Atom(draw(st.sampled_from("abcde")))
    kind = draw(st.integers(0, 2))
    if kind == 0:
        return Atom(draw(st.sampled_from("abcde")))
    if kind == 1:
        return Complement(draw(value_terms(depth=depth - 1)))
    members = draw(
        st.lists(value_terms(depth=depth - 1), min_size=2, max_size=3, unique=True)
    )
    return Sum(tuple(members))


@given(value_terms(), st.sampled_from("abcdef"))
def test_value_matches_total_and_complementary(term, tok):
    a = value_matches(term, tok)
    b = value_matches(Complement(term), tok)
    assert isinstance(a, bool) and a != b


def test_graph_invariants():
    with pytest.raises(InvalidModel):
        CausalGraph({"A"}, {("A", "B")})
    with pytest.raises(InvalidModel):
        CausalGraph({"A"}, {("A", "A")})
    with pytest.raises(GraphCycle) as exc:
        CausalGraph({"A", "B"}, {("A", "B"), ("B", "A")})
    cycle = exc.value.cycle
    assert cycle[0] == cycle[-1] and set(cycle) == {"A", "B"} and len(cycle) == 3


def test_probability_validation():
    assert check_probability(Fraction(3, 5)) == Fraction(3, 5)
    with pytest.raises(InvalidModel):
        check_probability(Fraction(6, 5))
    with pytest.raises(InvalidModel):
        check_probability(Fraction(-1, 5))
    with pytest.raises(InvalidModel):
        check_probability(0.6)  # floats are banned from the kernel


def test_judgment_multiset_equality():
    items = (
        EdgeItem("A", "B"),
        AttrItem(Attribution("A", Atom("x"))),
        AttrItem(Attribution("B", Atom("y"))),
    )
    j1 = Judgment(items, "T", Atom("yes"), Fraction(1, 2))
    j2 = Judgment(items[::-1], "T", Atom("yes"), Fraction(1, 2))
    assert j1 == j2 and hash(j1) == hash(j2)
    # multiset, not set: multiplicities matter
    j3 = Judgment(items + (EdgeItem("A", "B"),), "T", Atom("yes"), Fraction(1, 2))
    assert j1 != j3
    assert j1 != Judgment(items, "T", Atom("yes"), Fraction(1, 3))


def test_judgment_target_not_in_context():
    with pytest.raises(InvalidModel):
        Judgment(
            (AttrItem(Attribution("T", Atom("x"))),), "T", Atom("yes"), Fraction(1)
        )

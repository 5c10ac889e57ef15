import random
from fractions import Fraction

import pytest

from cfcheck import (
    Atom,
    AttrItem,
    Attribution,
    CausalGraph,
    Complement,
    DataPoint,
    EdgeItem,
    Intervention,
    InterventionExpr,
    InterventionItem,
    Judgment,
    Sum,
)
from cfcheck.dsl import (
    ParseError,
    parse_case,
    parse_case_or_graph,
    parse_context_item,
    parse_judgment,
    parse_probability_literal,
    parse_valueterm,
    render_context_item,
    render_judgment,
    render_probability,
    render_valueterm,
)

CASE_TEXT = """
# comment lines are ignored
graph {
  Gender -> MS; Gender -> Degree; Gender -> Experience; Degree -> Experience;
  Degree -> GAI; Experience -> GAI; MS -> Loan; GAI -> Loan; SAT -> Degree;
  MS -> Experience;
}
factual {
  Gender = m; MS = mar; SAT = 1100; GAI = 65K; Degree = PhD; Experience = 5y;
}
intervene MS = div;
target Loan = yes;
factual_prob 0.60;
"""


def test_parse_case_paper_example():
    case = parse_case(CASE_TEXT)
    assert len(case.graph.edges) == 10
    assert len(case.factual.attributions) == 6
    assert case.intervention == Intervention("MS", Atom("div"))
    assert (case.target, case.target_value) == ("Loan", Atom("yes"))
    assert case.factual_prob == Fraction(3, 5)
    assert case.candidate_override is None


def test_parse_case_sum_and_complement():
    case = parse_case(
        """
        graph { MS -> Loan; Etn -> Loan; }
        factual { MS = married + divorced; Etn = !white; }
        intervene Etn = white;
        target Loan = yes;
        """
    )
    assert case.factual.value_of("MS") == Sum((Atom("married"), Atom("divorced")))
    assert case.factual.value_of("Etn") == Complement(Atom("white"))


def test_parse_case_candidate_block():
    case = parse_case(
        """
        graph { A -> T; B -> T; }
        factual { A = x; B = y; }
        intervene A = z;
        target T = yes;
        candidate { A = z; B = y; }
        factual_prob 0.5;
        """
    )
    assert case.candidate_override == DataPoint(
        (Attribution("A", Atom("z")), Attribution("B", Atom("y")))
    )


def test_parse_case_cycle_error_has_second_edge_span():
    text = "graph { A -> B;\nB -> A; }\nfactual { }\nintervene A = x;\ntarget B = y;\n"
    with pytest.raises(ParseError) as exc:
        parse_case(text)
    assert "cycle" in exc.value.found
    assert exc.value.span.line == 2 and exc.value.span.column == 1


def test_parse_case_semantic_errors_have_spans():
    bad = [
        # duplicate factual variable
        "graph { A -> B; }\nfactual { A = x; A = y; }\nintervene A = z;\ntarget B = w;",
        # unknown intervention variable
        "graph { A -> B; }\nfactual { A = x; }\nintervene C = z;\ntarget B = w;",
        # target inside the factual data point
        "graph { A -> B; }\nfactual { A = x; B = w; }\nintervene A = z;\ntarget B = w;",
        # target equals intervention variable
        "graph { A -> B; }\nfactual { }\nintervene B = z;\ntarget B = w;",
    ]
    for text in bad:
        with pytest.raises(ParseError) as exc:
            parse_case(text)
        assert exc.value.span.line >= 1 and exc.value.span.column >= 1


def test_parse_error_spans_in_bounds():
    bad_inputs = [
        "graph { A -> ; }",
        "graph { A -> B }",
        "graph A -> B;",
        "|- T = @ 0.5",
        "A = x |- T = y @ 1.5",
        "A = x |- T = y @ 0.1234567",
        "A = $ |- T = y @ 0.5",
        "[A -> B] J(A=x) |- T = y @ 0.5",
        "A = x, |- T = y",
    ]
    for text in bad_inputs:
        with pytest.raises(ParseError) as exc:
            parse_judgment(text) if "|-" in text else parse_case(text)
        span = exc.value.span
        lines = text.split("\n")
        assert 1 <= span.line <= len(lines) + 1
        assert 1 <= span.column <= len(lines[min(span.line, len(lines)) - 1]) + 2


def test_probability_literals():
    assert parse_probability_literal("0.60") == Fraction(3, 5)
    assert parse_probability_literal("1") == 1
    assert parse_probability_literal("0") == 0
    assert parse_probability_literal("3/5") == Fraction(3, 5)
    with pytest.raises(ParseError):
        parse_probability_literal("0.1234567")  # more than 6 fractional digits
    with pytest.raises(ParseError):
        parse_probability_literal("1.5")
    with pytest.raises(ParseError):
        parse_probability_literal("7/5")


def test_render_probability():
    assert render_probability(Fraction(3, 5)) == "0.6"
    assert render_probability(Fraction(1)) == "1"
    assert render_probability(Fraction(0)) == "0"
    assert render_probability(Fraction(1, 3)) == "1/3"
    assert render_probability(Fraction(1, 8)) == "0.125"


def test_valueterm_round_trip():
    for text in ["a", "a + b", "!white", "!(a + b)", "(a + b) + c", "!!a", "a + !b + c"]:
        term = parse_valueterm(text)
        assert parse_valueterm(render_valueterm(term)) == term


def test_judgment_round_trip_example():
    text = (
        "[Gender -> MS, MS -> Loan, Gender = m, MS = mar] I(MS=div) "
        "|- Loan = yes @ 0.6"
    )
    j = parse_judgment(text)
    assert render_judgment(j) == text
    assert parse_judgment(render_judgment(j)) == j


def test_empty_context_judgment_round_trip():
    j = parse_judgment("|- t = b @ 1")
    assert j.context == ()
    assert render_judgment(j) == "|- t = b @ 1"


def test_duplicate_sum_member_rejected():
    with pytest.raises(ParseError):
        parse_valueterm("a + a")


def test_parse_case_or_graph():
    g = parse_case_or_graph("graph { A -> B; C; }")
    assert isinstance(g, CausalGraph)
    assert g.nodes == {"A", "B", "C"} and g.edges == {("A", "B")}
    case = parse_case_or_graph(CASE_TEXT)
    assert not isinstance(case, CausalGraph)


# ---------------------------------------------------------------------------
# Randomized round trips.


def random_valueterm(rng, depth=2):
    if depth == 0 or rng.random() < 0.5:
        return Atom(rng.choice(["a", "b", "c", "65K", "PhD"]))
    if rng.random() < 0.5:
        return Complement(random_valueterm(rng, depth - 1))
    members, seen = [], set()
    while len(members) < rng.randint(2, 3):
        m = random_valueterm(rng, depth - 1)
        if m not in seen:
            seen.add(m)
            members.append(m)
    return Sum(tuple(members))


def random_judgment(rng):
    names = [f"v{i}" for i in range(rng.randint(2, 6))]
    edges = {
        (names[i], names[j])
        for i in range(len(names))
        for j in range(i + 1, len(names))
        if rng.random() < 0.4
    }
    graph = CausalGraph(frozenset(names), frozenset(edges))
    dp_vars = [n for n in names if rng.random() < 0.5]
    datapoint = DataPoint(
        tuple(Attribution(v, random_valueterm(rng)) for v in dp_vars)
    )
    items = []
    if rng.random() < 0.7:
        expr = InterventionExpr(
            graph, datapoint, Intervention(rng.choice(names), Atom("z"))
        )
        items.append(InterventionItem(expr))
    for e in sorted(edges):
        if rng.random() < 0.5:
            items.append(EdgeItem(*e))
    for v in dp_vars:
        if rng.random() < 0.5:
            items.append(AttrItem(Attribution(v, random_valueterm(rng))))
    prob = Fraction(rng.randint(0, 997), 997)
    return Judgment(tuple(items), "T", random_valueterm(rng), prob)


def test_randomized_judgment_round_trips():
    rng = random.Random(424242)
    for _ in range(500):
        j = random_judgment(rng)
        text = render_judgment(j)
        assert parse_judgment(text) == j
        # rendering is canonical: a second round trip is byte-identical
        assert render_judgment(parse_judgment(text)) == text


def test_context_item_round_trips():
    rng = random.Random(5)
    for _ in range(100):
        j = random_judgment(rng)
        for item in j.context:
            assert parse_context_item(render_context_item(item)) == item

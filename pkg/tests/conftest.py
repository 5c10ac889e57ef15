import random
from pathlib import Path

import pytest

from cfcheck import (
    Atom,
    Attribution,
    CausalGraph,
    DataPoint,
    Intervention,
)
from cfcheck.engine import Case

DATA = Path(__file__).parent / "data"

LOAN_EDGES = frozenset(
    {
        ("Gender", "MS"),
        ("Gender", "Degree"),
        ("Gender", "Experience"),
        ("Degree", "Experience"),
        ("Degree", "GAI"),
        ("Experience", "GAI"),
        ("MS", "Loan"),
        ("GAI", "Loan"),
        ("SAT", "Degree"),
        ("MS", "Experience"),
    }
)
LOAN_NODES = frozenset({"Gender", "MS", "Degree", "Experience", "GAI", "Loan", "SAT"})


@pytest.fixture
def loan_graph():
    return CausalGraph(LOAN_NODES, LOAN_EDGES)


@pytest.fixture
def loan_factual():
    return DataPoint(
        (
            Attribution("Gender", Atom("m")),
            Attribution("MS", Atom("mar")),
            Attribution("SAT", Atom("1100")),
            Attribution("GAI", Atom("65K")),
            Attribution("Degree", Atom("PhD")),
            Attribution("Experience", Atom("5y")),
        )
    )


@pytest.fixture
def loan_case(loan_graph, loan_factual):
    from fractions import Fraction

    return Case(
        graph=loan_graph,
        factual=loan_factual,
        intervention=Intervention("MS", Atom("div")),
        target="Loan",
        target_value=Atom("yes"),
        factual_prob=Fraction(3, 5),
    )


@pytest.fixture
def data_dir():
    return DATA


def random_dag(rng: random.Random, max_nodes: int = 10, density: float = 0.5) -> CausalGraph:
    """A random DAG: edges only go from lower to higher node index."""
    n = rng.randint(1, max_nodes)
    nodes = [f"v{i}" for i in range(n)]
    edges = {
        (nodes[i], nodes[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < rng.uniform(0.0, density)
    }
    return CausalGraph(frozenset(nodes), frozenset(edges))


def brute_force_closure(g: CausalGraph) -> dict[tuple[str, str], frozenset[str]]:
    """Independent oracle: enumerate every simple path and union its nodes
    (source excluded); add reflexive entries."""

    def paths(a, b, seen):
        if a == b:
            yield [a]
            return
        for src, dst in g.edges:
            if src == a and dst not in seen:
                for tail in paths(dst, b, seen | {dst}):
                    yield [a] + tail

    entries = {}
    for a in g.nodes:
        for b in g.nodes:
            if a == b:
                entries[(a, b)] = frozenset({a})
                continue
            found = list(paths(a, b, {a}))
            if found:
                entries[(a, b)] = frozenset().union(*(set(p[1:]) for p in found))
    return entries

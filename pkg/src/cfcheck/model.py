"""Core vocabulary of the calculus: variables, value terms, attributions,
data points, causal graphs, interventions, judgments and probabilities.

Everything here is immutable after construction and validated eagerly, so
any value of these types that exists is structurally well-formed.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

_TOKEN_RE = re.compile(r"[A-Za-z0-9_.]+\Z")


class InvalidModel(ValueError):
    """A structural invariant was violated at construction time."""


class GraphCycle(InvalidModel):
    """A candidate causal graph contains a directed cycle."""

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("cycle: " + " -> ".join(self.cycle))


def check_token(name: str) -> str:
    """Validate a variable or atomic value token (letters, digits, _, .)."""
    if not isinstance(name, str) or not _TOKEN_RE.match(name):
        raise InvalidModel(f"invalid token: {name!r}")
    return name


# ---------------------------------------------------------------------------
# Value terms: atoms, sums of alternatives, complements.


@dataclass(frozen=True)
class Atom:
    token: str

    def __post_init__(self):
        check_token(self.token)


@dataclass(frozen=True)
class Sum:
    members: tuple["ValueTerm", ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 2:
            raise InvalidModel("sum value needs at least two members")
        seen = set()
        for m in self.members:
            if m in seen:
                raise InvalidModel(f"duplicate member in sum value: {m}")
            seen.add(m)


@dataclass(frozen=True)
class Complement:
    inner: "ValueTerm"


ValueTerm = Union[Atom, Sum, Complement]


def value_matches(term: ValueTerm, observed: str) -> bool:
    """Decide whether an observed atomic token satisfies a value term.

    An atom matches itself, a sum matches if any member does, and a
    complement matches if its inner term does not.
    """
    check_token(observed)
    if isinstance(term, Atom):
        return term.token == observed
    if isinstance(term, Sum):
        return any(value_matches(m, observed) for m in term.members)
    if isinstance(term, Complement):
        return not value_matches(term.inner, observed)
    raise TypeError(f"not a value term: {term!r}")


# ---------------------------------------------------------------------------
# Attributions and data points.


@dataclass(frozen=True)
class Attribution:
    var: str
    value: ValueTerm

    def __post_init__(self):
        check_token(self.var)


@dataclass(frozen=True)
class DataPoint:
    """Ordered list of attributions; each variable occurs at most once."""

    attributions: tuple[Attribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributions", tuple(self.attributions))
        seen = set()
        for a in self.attributions:
            if a.var in seen:
                raise InvalidModel(f"duplicate variable in data point: {a.var}")
            seen.add(a.var)

    def value_of(self, var: str) -> Optional[ValueTerm]:
        for a in self.attributions:
            if a.var == var:
                return a.value
        return None

    def __iter__(self):
        return iter(self.attributions)


def variables_of(dp: DataPoint) -> frozenset[str]:
    """The set of variables attributed by a data point."""
    return frozenset(a.var for a in dp.attributions)


# ---------------------------------------------------------------------------
# Causal graphs.


def find_cycle(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> Optional[list[str]]:
    """Return one directed cycle as a node sequence [v0, ..., v0], or None."""
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for src, dst in edges:
        succ.setdefault(src, []).append(dst)
        succ.setdefault(dst, [])
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in succ}
    stack: list[str] = []

    def visit(n: str) -> Optional[list[str]]:
        color[n] = GREY
        stack.append(n)
        for m in succ[n]:
            if color[m] == GREY:
                i = stack.index(m)
                return stack[i:] + [m]
            if color[m] == WHITE:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for n in sorted(succ):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return None


@dataclass(frozen=True)
class CausalGraph:
    """Acyclic directed graph of immediate causal relations."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for n in self.nodes:
            check_token(n)
        for src, dst in self.edges:
            if src not in self.nodes or dst not in self.nodes:
                raise InvalidModel(f"edge endpoint not a node: {src} -> {dst}")
            if src == dst:
                raise InvalidModel(f"self-edge not allowed: {src} -> {dst}")
        cycle = find_cycle(self.nodes, self.edges)
        if cycle:
            raise GraphCycle(cycle)

    def parents(self, node: str) -> frozenset[str]:
        return frozenset(s for s, d in self.edges if d == node)

    def children(self, node: str) -> frozenset[str]:
        return frozenset(d for s, d in self.edges if s == node)


# ---------------------------------------------------------------------------
# Interventions.


@dataclass(frozen=True)
class Intervention:
    """Imposition of an atomic value on one variable."""

    var: str
    value: Atom

    def __post_init__(self):
        check_token(self.var)
        if not isinstance(self.value, Atom):
            raise InvalidModel("intervention values must be atomic")


@dataclass(frozen=True)
class InterventionExpr:
    """A factual graph and data point bracketed with an imposed attribution."""

    graph: CausalGraph
    datapoint: DataPoint
    intervention: Intervention

    def __post_init__(self):
        if self.intervention.var not in self.graph.nodes:
            raise InvalidModel(f"intervention variable {self.intervention.var} not in graph")
        extra = variables_of(self.datapoint) - self.graph.nodes
        if extra:
            raise InvalidModel(f"data point variables not in graph: {sorted(extra)}")


# ---------------------------------------------------------------------------
# Probabilities: exact rationals in [0, 1], no floats anywhere.


def check_probability(p) -> Fraction:
    if isinstance(p, float):
        raise InvalidModel("probabilities must be exact rationals, not floats")
    p = Fraction(p)
    if p < 0 or p > 1:
        raise InvalidModel(f"probability out of range: {p}")
    return p


# ---------------------------------------------------------------------------
# Judgment contexts and judgments.


@dataclass(frozen=True)
class EdgeItem:
    src: str
    dst: str

    def __post_init__(self):
        check_token(self.src)
        check_token(self.dst)


@dataclass(frozen=True)
class AttrItem:
    attribution: Attribution


@dataclass(frozen=True)
class InterventionItem:
    expr: InterventionExpr


ContextItem = Union[EdgeItem, AttrItem, InterventionItem]


@dataclass(frozen=True, eq=False)
class Judgment:
    """Context multiset entailing `target = value` with an exact probability.

    Contexts are stored as tuples for reproducible rendering, but equality
    is multiset equality: two judgments with permuted contexts are equal.
    """

    context: tuple[ContextItem, ...]
    target: str
    value: ValueTerm
    prob: Fraction

    def __post_init__(self):
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "prob", check_probability(self.prob))
        check_token(self.target)
        interventions = [i for i in self.context if isinstance(i, InterventionItem)]
        if len(interventions) > 1:
            raise InvalidModel("a context may hold at most one intervention expression")
        for item in self.context:
            if isinstance(item, AttrItem) and item.attribution.var == self.target:
                raise InvalidModel(f"target {self.target} attributed in its own context")

    def intervention_item(self) -> Optional[InterventionItem]:
        for item in self.context:
            if isinstance(item, InterventionItem):
                return item
        return None

    def edge_items(self) -> list[EdgeItem]:
        return [i for i in self.context if isinstance(i, EdgeItem)]

    def attr_items(self) -> list[AttrItem]:
        return [i for i in self.context if isinstance(i, AttrItem)]

    def __eq__(self, other):
        if not isinstance(other, Judgment):
            return NotImplemented
        return (
            Counter(self.context) == Counter(other.context)
            and self.target == other.target
            and self.value == other.value
            and self.prob == other.prob
        )

    def __hash__(self):
        return hash(
            (frozenset(Counter(self.context).items()), self.target, self.value, self.prob)
        )


def remove_one(context: tuple[ContextItem, ...], item: ContextItem) -> tuple[ContextItem, ...]:
    """Remove exactly one occurrence of an item from a context tuple."""
    out = list(context)
    out.remove(item)  # ValueError if absent; callers check first
    return tuple(out)

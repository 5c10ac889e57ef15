"""Graph algorithms over causal graphs: acyclicity, the reflexive-transitive
causal closure with intermediate-cause witnesses, descendant sets, and the
edge-erasing graph intervention.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .model import CausalGraph, InvalidModel, find_cycle


def check_acyclic(
    nodes: Iterable[str], edges: Iterable[tuple[str, str]]
) -> Optional[list[str]]:
    """Return None if the candidate graph is acyclic, else one cycle as a
    node sequence [v0, ..., v0]."""
    return find_cycle(nodes, edges)


class MediateRelation:
    """Reflexive-transitive closure of a causal graph.

    Each entry (a, b, M) records that a is a (possibly mediate) cause of b
    with witness set M: the union, over all a-to-b paths, of the path nodes
    excluding a. Every node carries the reflexive entry (v, v, {v}).
    """

    def __init__(self, entries: dict[tuple[str, str], frozenset[str]]):
        self._by_pair = dict(entries)

    @property
    def entries(self) -> frozenset[tuple[str, str, frozenset[str]]]:
        return frozenset((a, b, m) for (a, b), m in self._by_pair.items())

    def pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset(self._by_pair)

    def witnesses(self, a: str, b: str) -> Optional[frozenset[str]]:
        return self._by_pair.get((a, b))

    def reaches(self, a: str, b: str) -> bool:
        return (a, b) in self._by_pair

    def __len__(self):
        return len(self._by_pair)

    def __eq__(self, other):
        if not isinstance(other, MediateRelation):
            return NotImplemented
        return self._by_pair == other._by_pair


def _topological_order(g: CausalGraph) -> list[str]:
    indeg = {n: 0 for n in g.nodes}
    for _, dst in g.edges:
        indeg[dst] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for m in sorted(g.children(n)):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return order


def mediate_closure(g: CausalGraph) -> MediateRelation:
    """Compute all mediate-cause entries with their witness sets.

    Witness sets are accumulated along a topological order: the witnesses of
    (a, b) are the union of the witnesses of (a, x) over reached parents x
    of b, plus b itself.
    """
    order = _topological_order(g)
    entries: dict[tuple[str, str], frozenset[str]] = {}
    for a in g.nodes:
        reached: dict[str, set[str]] = {}
        for b in order:
            witnesses: set[str] = set()
            hit = False
            for x in g.parents(b):
                if x == a:
                    hit = True
                elif x in reached:
                    hit = True
                    witnesses |= reached[x]
            if hit:
                witnesses.add(b)
                reached[b] = witnesses
        for b, m in reached.items():
            entries[(a, b)] = frozenset(m)
    for v in g.nodes:
        entries[(v, v)] = frozenset({v})
    return MediateRelation(entries)


def descendants(g: CausalGraph, a: str) -> frozenset[str]:
    """All direct or indirect effects of a variable, plus the variable
    itself (reflexive closure)."""
    if a not in g.nodes:
        raise InvalidModel(f"unknown variable: {a}")
    seen = {a}
    frontier = [a]
    while frontier:
        n = frontier.pop()
        for m in g.children(n):
            if m not in seen:
                seen.add(m)
                frontier.append(m)
    return frozenset(seen)


def intervene_graph(g: CausalGraph, a: str) -> CausalGraph:
    """Erase every edge entering the intervened variable; nodes unchanged."""
    if a not in g.nodes:
        raise InvalidModel(f"unknown variable: {a}")
    return CausalGraph(g.nodes, frozenset(e for e in g.edges if e[1] != a))

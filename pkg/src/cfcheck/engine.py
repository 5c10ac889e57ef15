"""Verification engine: builds the counterfactual candidate for a case,
queries the classifier oracle, derives the counterfactual judgment with a
replayable proof, and renders the fairness verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .closure import descendants, intervene_graph
from .kernel import (
    Proof,
    ProofStep,
    RuleError,
    RuleId,
    apply_c_weakening,
    apply_i_cut,
    apply_tri_cut,
    apply_v_cut,
)
from .model import (
    AttrItem,
    Attribution,
    CausalGraph,
    ContextItem,
    DataPoint,
    EdgeItem,
    Intervention,
    InterventionExpr,
    InterventionItem,
    InvalidModel,
    Judgment,
    ValueTerm,
    check_probability,
    variables_of,
)
from .oracle import ClassifierOracle, OracleError, OracleQuery


class ConsistencyError(Exception):
    """The case's assumed factual probability disagrees with the oracle."""


class CandidateRejected(Exception):
    """A supplied counterfactual candidate could not be fully erased."""

    def __init__(self, failure: "CandidateFailure"):
        self.failure = failure
        super().__init__(str(failure))


@dataclass(frozen=True)
class Case:
    """One counterfactual fairness question about one individual."""

    graph: CausalGraph
    factual: DataPoint
    intervention: Intervention
    target: str
    target_value: ValueTerm
    factual_prob: Optional[Fraction] = None
    candidate_override: Optional[DataPoint] = None

    def __post_init__(self):
        if self.target not in self.graph.nodes:
            raise InvalidModel(f"target {self.target} not in graph")
        if self.intervention.var not in self.graph.nodes:
            raise InvalidModel(f"intervention variable {self.intervention.var} not in graph")
        if self.intervention.var == self.target:
            raise InvalidModel("intervention variable must differ from the target")
        extra = variables_of(self.factual) - self.graph.nodes
        if extra:
            raise InvalidModel(f"factual variables not in graph: {sorted(extra)}")
        if self.target in variables_of(self.factual):
            raise InvalidModel(f"target {self.target} attributed in the factual data point")
        if self.factual_prob is not None:
            object.__setattr__(self, "factual_prob", check_probability(self.factual_prob))

    def intervention_expr(self) -> InterventionExpr:
        return InterventionExpr(self.graph, self.factual, self.intervention)


@dataclass(frozen=True)
class Verdict:
    fair: bool
    p: Fraction
    q: Fraction
    difference: Fraction
    epsilon: Fraction
    counterfactual_judgment: Judgment
    proof: Proof


@dataclass(frozen=True)
class CandidateFailure:
    """Context items no cut rule can erase, with the violated conditions."""

    items: tuple[tuple[ContextItem, str, str], ...]  # (item, code, reason)

    def __str__(self):
        lines = [f"{code}: {reason}" for _, code, reason in self.items]
        return "candidate is not a counterfactual: " + "; ".join(lines)


def build_candidate(case: Case) -> tuple[CausalGraph, DataPoint]:
    """Intervened graph plus the reduced data point: the imposed attribution
    followed by every factual attribution outside the intervention variable's
    effects, in factual order."""
    a_j = case.intervention.var
    graph_i = intervene_graph(case.graph, a_j)
    blocked = descendants(case.graph, a_j)
    attrs = [Attribution(a_j, case.intervention.value)]
    attrs += [a for a in case.factual if a.var not in blocked]
    return graph_i, DataPoint(tuple(attrs))


def candidate_judgment(case: Case, sigma: DataPoint, prob: Fraction) -> Judgment:
    """Assemble the counterfactual-candidate judgment over the intervened
    graph: its edges and the reduced attributions, entailing the target."""
    graph_i = intervene_graph(case.graph, case.intervention.var)
    context: list[ContextItem] = [EdgeItem(s, d) for s, d in sorted(graph_i.edges)]
    context += [AttrItem(a) for a in sigma]
    return Judgment(tuple(context), case.target, case.target_value, prob)


def verify_candidate(
    case: Case, candidate: Judgment, strict: bool = True
) -> Union[Proof, CandidateFailure]:
    """Check that a candidate really is the counterfactual of the case.

    Applies weakening with the case's intervention expression, then erases
    exhaustively: the imposed attribution first, then edges in lexicographic
    order, then remaining attributions in stored order. Succeeds iff only
    the intervention expression remains.
    """
    if candidate.intervention_item() is not None:
        raise InvalidModel("candidate must not carry an intervention expression")
    expr = case.intervention_expr()
    steps: list[ProofStep] = []
    failures: list[tuple[ContextItem, str, str]] = []

    j = apply_c_weakening(candidate, expr)
    steps.append(ProofStep(RuleId.WEAKENING, InterventionItem(expr), 0, j))

    def record(rule: RuleId, item: ContextItem, result: Judgment):
        nonlocal j
        j = result
        steps.append(ProofStep(rule, item, len(steps), j))

    imposed = AttrItem(Attribution(case.intervention.var, case.intervention.value))
    if imposed in j.context:
        record(RuleId.INTERVENTION_CUT, imposed, apply_i_cut(j))

    for edge in sorted(j.edge_items(), key=lambda e: (e.src, e.dst)):
        try:
            record(RuleId.EDGE_CUT, edge, apply_tri_cut(j, (edge.src, edge.dst), strict))
        except RuleError as e:
            failures.append((edge, e.code, str(e)))

    for attr_item in j.attr_items():
        try:
            record(RuleId.VALUE_CUT, attr_item, apply_v_cut(j, attr_item.attribution))
        except RuleError as e:
            failures.append((attr_item, e.code, str(e)))

    if failures:
        return CandidateFailure(tuple(failures))
    return Proof((candidate,), tuple(steps))


def derive_counterfactual(
    case: Case, oracle: ClassifierOracle, strict: bool = True
) -> tuple[Judgment, Proof]:
    """Construct (or verify, if the case overrides the candidate) the
    counterfactual judgment and its proof."""
    if case.candidate_override is not None:
        sigma = case.candidate_override
    else:
        _, sigma = build_candidate(case)
    q = oracle.query(OracleQuery(sigma, case.target, case.target_value))
    candidate = candidate_judgment(case, sigma, q)
    result = verify_candidate(case, candidate, strict)
    if isinstance(result, CandidateFailure):
        raise CandidateRejected(result)
    return result.conclusion(), result


def cf_verdict(
    p: Fraction,
    q: Fraction,
    epsilon: Fraction,
    cf_judgment: Judgment,
    proof: Proof,
) -> Verdict:
    """Fair iff |p - q| <= epsilon, in exact rational arithmetic."""
    p = check_probability(p)
    q = check_probability(q)
    epsilon = Fraction(epsilon)
    difference = abs(p - q)
    return Verdict(difference <= epsilon, p, q, difference, epsilon, cf_judgment, proof)


def check_case(
    case: Case,
    oracle: ClassifierOracle,
    epsilon: Fraction = Fraction(0),
    strict: bool = True,
) -> Verdict:
    """Full pipeline: resolve the factual probability, derive the
    counterfactual, and compare."""
    factual_query = OracleQuery(case.factual, case.target, case.target_value)
    if case.factual_prob is None:
        p = oracle.query(factual_query)
    else:
        p = case.factual_prob
        try:
            oracle_p = oracle.query(factual_query)
        except OracleError:
            oracle_p = None
        if oracle_p is not None and oracle_p != p:
            raise ConsistencyError(
                f"case assumes factual probability {p} but the oracle answers {oracle_p}"
            )
    cf_j, proof = derive_counterfactual(case, oracle, strict)
    return cf_verdict(p, cf_j.prob, epsilon, cf_j, proof)

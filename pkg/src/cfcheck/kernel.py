"""The proof kernel: the four structural rules plus the generic cut they
contract, and an independent replay checker for proof objects.

Every rule is a pure function from judgments to judgments; a Proof is an
append-only record of rule applications that the checker can re-execute.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from .closure import descendants
from .model import (
    AttrItem,
    Attribution,
    ContextItem,
    EdgeItem,
    InterventionExpr,
    InterventionItem,
    Judgment,
    remove_one,
)


class RuleId(Enum):
    WEAKENING = "weakening"
    INTERVENTION_CUT = "intervention-cut"
    EDGE_CUT = "edge-cut"
    VALUE_CUT = "value-cut"
    GENERIC_CUT = "cut"
    INTERVENTION_AXIOM = "intervention-axiom"


class RuleError(Exception):
    """A rule precondition or side condition failed.

    `code` is a stable machine-readable label for the violated condition.
    """

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


def _require_intervention(j: Judgment) -> InterventionItem:
    item = j.intervention_item()
    if item is None:
        raise RuleError("no-intervention", "context carries no intervention expression")
    return item


def apply_c_weakening(j: Judgment, e: InterventionExpr) -> Judgment:
    """Add an intervention expression to a context that has none."""
    if j.intervention_item() is not None:
        raise RuleError(
            "intervention-present", "context already carries an intervention expression"
        )
    return Judgment((InterventionItem(e),) + j.context, j.target, j.value, j.prob)


def apply_i_cut(j: Judgment) -> Judgment:
    """Erase the loose attribution imposed by the intervention."""
    item = _require_intervention(j)
    iv = item.expr.intervention
    imposed = AttrItem(Attribution(iv.var, iv.value))
    if imposed not in j.context:
        others = [
            a.attribution.value
            for a in j.attr_items()
            if a.attribution.var == iv.var
        ]
        detail = f" (found {iv.var} with value {others[0]})" if others else ""
        raise RuleError(
            "imposed-attribution-missing",
            f"no loose attribution {iv.var}={iv.value.token} in context{detail}",
        )
    return Judgment(remove_one(j.context, imposed), j.target, j.value, j.prob)


def apply_tri_cut(j: Judgment, edge: tuple[str, str], strict: bool = True) -> Judgment:
    """Erase one causal edge that does not enter the intervention variable.

    In strict mode the edge must also belong to the bracketed factual graph.
    """
    item = _require_intervention(j)
    src, dst = edge
    if dst == item.expr.intervention.var:
        raise RuleError(
            "edge-enters-intervention",
            f"edge {src} -> {dst} enters the intervention variable",
        )
    if strict and (src, dst) not in item.expr.graph.edges:
        raise RuleError(
            "edge-not-in-factual-graph",
            f"edge {src} -> {dst} is not in the factual graph",
        )
    edge_item = EdgeItem(src, dst)
    if edge_item not in j.context:
        raise RuleError("edge-not-in-context", f"edge {src} -> {dst} not in context")
    return Judgment(remove_one(j.context, edge_item), j.target, j.value, j.prob)


def apply_v_cut(j: Judgment, attr: Attribution) -> Judgment:
    """Erase a loose attribution that the factual data point assigns verbatim
    and whose variable is not an effect of the intervention variable."""
    item = _require_intervention(j)
    expr = item.expr
    if attr not in expr.datapoint.attributions:
        raise RuleError(
            "attribution-not-factual",
            f"{attr.var} with this value is not in the factual data point",
        )
    if attr.var in descendants(expr.graph, expr.intervention.var):
        raise RuleError(
            "descendant-of-intervention",
            f"{attr.var} is an effect of {expr.intervention.var} in the factual graph",
        )
    attr_item = AttrItem(attr)
    if attr_item not in j.context:
        raise RuleError("attribution-not-in-context", f"{attr.var} not loose in context")
    return Judgment(remove_one(j.context, attr_item), j.target, j.value, j.prob)


def intervention_axiom(e: InterventionExpr) -> Judgment:
    """The intervened variable receives the imposed value with certainty."""
    return Judgment(
        (InterventionItem(e),), e.intervention.var, e.intervention.value, Fraction(1)
    )


def generic_cut(left: Judgment, right: Judgment) -> Judgment:
    """Cut a certainty premise against a matching loose attribution."""
    if left.prob != 1:
        raise RuleError("cut-premise-not-certain", f"left premise has probability {left.prob}")
    needed = AttrItem(Attribution(left.target, left.value))
    if needed not in right.context:
        raise RuleError(
            "cut-attribution-missing",
            f"right context lacks {left.target}={left.value}",
        )
    if left.intervention_item() is not None and right.intervention_item() is not None:
        raise RuleError(
            "two-interventions", "both premises carry an intervention expression"
        )
    merged = left.context + remove_one(right.context, needed)
    return Judgment(merged, right.target, right.value, right.prob)


# ---------------------------------------------------------------------------
# Proof objects and replay.


@dataclass(frozen=True)
class ProofStep:
    rule: RuleId
    item: Optional[ContextItem]
    premise: Optional[int]
    conclusion: Judgment
    premise2: Optional[int] = None


@dataclass(frozen=True)
class Proof:
    assumptions: tuple[Judgment, ...]
    steps: tuple[ProofStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "assumptions", tuple(self.assumptions))
        object.__setattr__(self, "steps", tuple(self.steps))

    def conclusion(self) -> Judgment:
        if self.steps:
            return self.steps[-1].conclusion
        return self.assumptions[-1]

    def rule_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.steps:
            counts[s.rule.value] = counts.get(s.rule.value, 0) + 1
        return counts


@dataclass(frozen=True)
class ProofCheck:
    ok: bool
    step: Optional[int] = None
    code: Optional[str] = None
    reason: Optional[str] = None


def _fail(step: int, code: str, reason: str) -> ProofCheck:
    return ProofCheck(False, step, code, reason)


def check_proof(p: Proof, strict: bool = True) -> ProofCheck:
    """Replay every step of a proof from its assumptions.

    A proof passes iff each step's premise references only earlier
    judgments, the rule's preconditions hold, and re-applying the rule
    reproduces the recorded conclusion exactly.
    """
    base = len(p.assumptions)

    def resolve(idx: Optional[int], k: int) -> tuple[Optional[Judgment], Optional[ProofCheck]]:
        if idx is None:
            return None, _fail(k, "premise-missing", "step requires a premise index")
        if idx < 0 or idx >= base + len(p.steps):
            return None, _fail(k, "premise-out-of-range", f"premise index {idx} out of range")
        if idx >= base + k:
            return None, _fail(
                k, "premise-order", f"premise index {idx} does not precede step {k}"
            )
        if idx < base:
            return p.assumptions[idx], None
        return p.steps[idx - base].conclusion, None

    for k, step in enumerate(p.steps):
        try:
            if step.rule is RuleId.INTERVENTION_AXIOM:
                if not isinstance(step.item, InterventionItem):
                    return _fail(k, "bad-item", "axiom step needs an intervention item")
                got = intervention_axiom(step.item.expr)
            elif step.rule is RuleId.GENERIC_CUT:
                left, err = resolve(step.premise, k)
                if err:
                    return err
                right, err = resolve(step.premise2, k)
                if err:
                    return err
                got = generic_cut(left, right)
            else:
                prem, err = resolve(step.premise, k)
                if err:
                    return err
                if step.rule is RuleId.WEAKENING:
                    if not isinstance(step.item, InterventionItem):
                        return _fail(k, "bad-item", "weakening needs an intervention item")
                    got = apply_c_weakening(prem, step.item.expr)
                elif step.rule is RuleId.INTERVENTION_CUT:
                    got = apply_i_cut(prem)
                    iv = prem.intervention_item().expr.intervention
                    expected_item = AttrItem(Attribution(iv.var, iv.value))
                    if step.item is not None and step.item != expected_item:
                        return _fail(k, "bad-item", "recorded item is not the imposed attribution")
                elif step.rule is RuleId.EDGE_CUT:
                    if not isinstance(step.item, EdgeItem):
                        return _fail(k, "bad-item", "edge cut needs an edge item")
                    got = apply_tri_cut(prem, (step.item.src, step.item.dst), strict)
                elif step.rule is RuleId.VALUE_CUT:
                    if not isinstance(step.item, AttrItem):
                        return _fail(k, "bad-item", "value cut needs an attribution item")
                    got = apply_v_cut(prem, step.item.attribution)
                else:  # pragma: no cover - RuleId is a closed enumeration
                    return _fail(k, "unknown-rule", f"unknown rule {step.rule}")
        except RuleError as e:
            return _fail(k, e.code, str(e))
        if got != step.conclusion:
            return _fail(
                k, "conclusion-mismatch", "recorded conclusion differs from replayed one"
            )
    return ProofCheck(True)

"""Surface syntax: parsing and pretty-printing of case files, graphs,
judgments, judgment databases and serialized proofs.

Parsing tracks source spans so every error points at the offending text.
Rendering is canonical (intervention item first, edges sorted, attributions
in stored order), and parse(render(x)) == x for every well-formed value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .engine import Case
from .kernel import Proof, ProofStep, RuleId
from .model import (
    Atom,
    AttrItem,
    Attribution,
    CausalGraph,
    Complement,
    ContextItem,
    DataPoint,
    EdgeItem,
    Intervention,
    InterventionExpr,
    InterventionItem,
    InvalidModel,
    Judgment,
    Sum,
    ValueTerm,
    check_probability,
    find_cycle,
    variables_of,
)

MAX_FRACTION_DIGITS = 6


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


class ParseError(Exception):
    def __init__(self, span: SourceSpan, expected: str, found: str):
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(f"{span.line}:{span.column}: expected {expected}, found {found}")


# ---------------------------------------------------------------------------
# Tokenizer.

_PUNCT2 = ("->", "|-")
_PUNCT1 = "{}()[];,=+!@/"


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "eof", or the punctuation text itself
    text: str
    line: int
    col: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, max(len(self.text), 1))


def _is_word_char(c: str) -> bool:
    return c.isalnum() or c in "_."


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        two = text[i : i + 2]
        if two in _PUNCT2:
            toks.append(Token(two, two, line, col))
            i += 2
            col += 2
            continue
        if c in _PUNCT1:
            toks.append(Token(c, c, line, col))
            i += 1
            col += 1
            continue
        if _is_word_char(c):
            j = i
            while j < n and _is_word_char(text[j]):
                j += 1
            toks.append(Token("word", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(SourceSpan(line, col, 1), "a token", repr(c))
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Probability literals.


def render_probability(p: Fraction) -> str:
    if p.denominator == 1:
        return str(p.numerator)
    for k in range(1, MAX_FRACTION_DIGITS + 1):
        scaled = p * 10**k
        if scaled.denominator == 1:
            whole, frac = divmod(scaled.numerator, 10**k)
            return f"{whole}.{frac:0{k}d}"
    return f"{p.numerator}/{p.denominator}"


def _decimal_to_fraction(text: str, span: SourceSpan) -> Fraction:
    whole, dot, frac = text.partition(".")
    if not whole.isdigit() or (dot and not frac.isdigit()):
        raise ParseError(span, "a decimal probability", repr(text))
    if len(frac) > MAX_FRACTION_DIGITS:
        raise ParseError(
            span, f"at most {MAX_FRACTION_DIGITS} fractional digits", repr(text)
        )
    value = Fraction(int(whole))
    if frac:
        value += Fraction(int(frac), 10 ** len(frac))
    if value > 1:
        raise ParseError(span, "a probability in [0, 1]", repr(text))
    return value


def parse_probability_literal(text: str) -> Fraction:
    """Parse a standalone probability: a decimal or a `num/den` rational."""
    toks = tokenize(text)
    p = _Parser(toks)
    value = p.probability()
    p.expect("eof")
    return value


# ---------------------------------------------------------------------------
# Recursive-descent parser.


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def error(self, expected: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        found = repr(tok.text) if tok.kind != "eof" else "end of input"
        raise ParseError(tok.span, expected, found)

    def expect(self, kind: str, expected: Optional[str] = None) -> Token:
        if not self.at(kind):
            self.error(expected or f"'{kind}'")
        return self.advance()

    def word(self, expected: str = "an identifier") -> Token:
        if not self.at("word"):
            self.error(expected)
        return self.advance()

    # -- value terms ------------------------------------------------------

    def valueterm(self) -> ValueTerm:
        start = self.peek()
        members = [self.term()]
        while self.at("+"):
            self.advance()
            members.append(self.term())
        if len(members) == 1:
            return members[0]
        seen = set()
        for m in members:
            if m in seen:
                raise ParseError(start.span, "distinct sum members", "a duplicate member")
            seen.add(m)
        return Sum(tuple(members))

    def term(self) -> ValueTerm:
        if self.at("!"):
            self.advance()
            return Complement(self.term())
        if self.at("("):
            self.advance()
            t = self.valueterm()
            self.expect(")")
            return t
        tok = self.word("a value term")
        return Atom(tok.text)

    # -- probabilities ----------------------------------------------------

    def probability(self) -> Fraction:
        tok = self.word("a probability")
        if self.at("/"):
            self.advance()
            den = self.word("a denominator")
            if not tok.text.isdigit() or not den.text.isdigit():
                self.error("an integer rational", tok)
            try:
                return check_probability(Fraction(int(tok.text), int(den.text)))
            except (ZeroDivisionError, InvalidModel):
                raise ParseError(tok.span, "a probability in [0, 1]", f"{tok.text}/{den.text}")
        return _decimal_to_fraction(tok.text, tok.span)

    def decimal_probability(self) -> Fraction:
        tok = self.word("a decimal probability")
        return _decimal_to_fraction(tok.text, tok.span)

    # -- attributions and context items ------------------------------------

    def attribution(self) -> Attribution:
        var = self.word("a variable name")
        self.expect("=")
        return Attribution(var.text, self.valueterm())

    def bracket_expr(self) -> InterventionExpr:
        """`[` edges, bare nodes and attributions `] I(var=value)`."""
        open_tok = self.expect("[")
        edges: list[tuple[str, str]] = []
        nodes: set[str] = set()
        attrs: list[Attribution] = []
        attr_spans: dict[str, SourceSpan] = {}
        if not self.at("]"):
            while True:
                name = self.word("an edge, node or attribution")
                if self.at("->"):
                    self.advance()
                    dst = self.word("an edge target")
                    edges.append((name.text, dst.text))
                    nodes.update((name.text, dst.text))
                elif self.at("="):
                    self.advance()
                    if name.text in attr_spans:
                        raise ParseError(
                            name.span, "a fresh variable", f"duplicate {name.text!r}"
                        )
                    attr_spans[name.text] = name.span
                    attrs.append(Attribution(name.text, self.valueterm()))
                    nodes.add(name.text)
                else:
                    nodes.add(name.text)
                if self.at(","):
                    self.advance()
                else:
                    break
        self.expect("]")
        i_tok = self.word("'I'")
        if i_tok.text != "I":
            self.error("'I'", i_tok)
        self.expect("(")
        var = self.word("the intervention variable")
        self.expect("=")
        val = self.word("an atomic value")
        self.expect(")")
        nodes.add(var.text)
        cycle = find_cycle(nodes, edges)
        if cycle:
            raise ParseError(open_tok.span, "an acyclic graph", "cycle: " + " -> ".join(cycle))
        try:
            return InterventionExpr(
                CausalGraph(frozenset(nodes), frozenset(edges)),
                DataPoint(tuple(attrs)),
                Intervention(var.text, Atom(val.text)),
            )
        except InvalidModel as e:
            raise ParseError(open_tok.span, "a well-formed intervention expression", str(e))

    def context_item(self) -> ContextItem:
        if self.at("["):
            return InterventionItem(self.bracket_expr())
        name = self.word("a context item")
        if self.at("->"):
            self.advance()
            dst = self.word("an edge target")
            return EdgeItem(name.text, dst.text)
        self.expect("=")
        return AttrItem(Attribution(name.text, self.valueterm()))

    # -- judgments ----------------------------------------------------------

    def judgment(self) -> Judgment:
        start = self.peek()
        items: list[ContextItem] = []
        if not self.at("|-"):
            items.append(self.context_item())
            while self.at(","):
                self.advance()
                items.append(self.context_item())
        self.expect("|-")
        target = self.word("a target variable")
        self.expect("=")
        value = self.valueterm()
        self.expect("@")
        prob = self.probability()
        try:
            return Judgment(tuple(items), target.text, value, prob)
        except InvalidModel as e:
            raise ParseError(start.span, "a well-formed judgment", str(e))

    # -- case files -----------------------------------------------------------

    def graph_block(self) -> tuple[CausalGraph, list[tuple[tuple[str, str], SourceSpan]]]:
        self.keyword("graph")
        self.expect("{")
        nodes: set[str] = set()
        edges: list[tuple[tuple[str, str], SourceSpan]] = []
        while not self.at("}"):
            src = self.word("a node or edge")
            if self.at("->"):
                self.advance()
                dst = self.word("an edge target")
                edges.append(((src.text, dst.text), src.span))
                nodes.update((src.text, dst.text))
            else:
                nodes.add(src.text)
            self.expect(";")
        self.expect("}")
        edge_set = [e for e, _ in edges]
        cycle = find_cycle(nodes, edge_set)
        if cycle:
            cycle_edges = {(cycle[i], cycle[i + 1]) for i in range(len(cycle) - 1)}
            span = max(
                (sp for e, sp in edges if e in cycle_edges),
                key=lambda sp: (sp.line, sp.column),
            )
            raise ParseError(span, "an acyclic graph", "cycle: " + " -> ".join(cycle))
        try:
            g = CausalGraph(frozenset(nodes), frozenset(edge_set))
        except InvalidModel as e:
            raise ParseError(edges[0][1] if edges else self.peek().span, "a valid graph", str(e))
        return g, edges

    def keyword(self, name: str) -> Token:
        tok = self.word(f"'{name}'")
        if tok.text != name:
            self.error(f"'{name}'", tok)
        return tok

    def attr_block(self, name: str) -> tuple[DataPoint, dict[str, SourceSpan]]:
        self.keyword(name)
        self.expect("{")
        attrs: list[Attribution] = []
        spans: dict[str, SourceSpan] = {}
        while not self.at("}"):
            var = self.word("a variable name")
            if var.text in spans:
                raise ParseError(var.span, "a fresh variable", f"duplicate {var.text!r}")
            self.expect("=")
            attrs.append(Attribution(var.text, self.valueterm()))
            spans[var.text] = var.span
            self.expect(";")
        self.expect("}")
        return DataPoint(tuple(attrs)), spans

    def case(self) -> Case:
        graph, _ = self.graph_block()
        factual, factual_spans = self.attr_block("factual")
        for var, span in factual_spans.items():
            if var not in graph.nodes:
                raise ParseError(span, "a graph node", f"unknown variable {var!r}")

        self.keyword("intervene")
        ivar = self.word("the intervention variable")
        if ivar.text not in graph.nodes:
            raise ParseError(ivar.span, "a graph node", f"unknown variable {ivar.text!r}")
        self.expect("=")
        ival = self.word("an atomic value")
        self.expect(";")

        self.keyword("target")
        tvar = self.word("the target variable")
        if tvar.text not in graph.nodes:
            raise ParseError(tvar.span, "a graph node", f"unknown variable {tvar.text!r}")
        if tvar.text in factual_spans:
            raise ParseError(tvar.span, "a target outside the factual data point", tvar.text)
        if tvar.text == ivar.text:
            raise ParseError(tvar.span, "a target distinct from the intervention variable", tvar.text)
        self.expect("=")
        tval = self.valueterm()
        self.expect(";")

        candidate = None
        if self.at("word") and self.peek().text == "candidate":
            cand_dp, cand_spans = self.attr_block("candidate")
            for var, span in cand_spans.items():
                if var not in graph.nodes:
                    raise ParseError(span, "a graph node", f"unknown variable {var!r}")
            candidate = cand_dp

        prob = None
        if self.at("word") and self.peek().text == "factual_prob":
            self.advance()
            prob = self.decimal_probability()
            self.expect(";")

        self.expect("eof", "end of case file")
        return Case(
            graph=graph,
            factual=factual,
            intervention=Intervention(ivar.text, Atom(ival.text)),
            target=tvar.text,
            target_value=tval,
            factual_prob=prob,
            candidate_override=candidate,
        )


# ---------------------------------------------------------------------------
# Public parse entry points.


def parse_case(text: str) -> Case:
    return _Parser(tokenize(text)).case()


def parse_graph(text: str) -> CausalGraph:
    p = _Parser(tokenize(text))
    g, _ = p.graph_block()
    p.expect("eof", "end of graph file")
    return g


def parse_case_or_graph(text: str) -> Union[Case, CausalGraph]:
    """Parse either a full case file or a bare graph block."""
    p = _Parser(tokenize(text))
    g, _ = p.graph_block()
    if p.at("eof"):
        return g
    return _Parser(tokenize(text)).case()


def parse_judgment(text: str) -> Judgment:
    p = _Parser(tokenize(text))
    j = p.judgment()
    p.expect("eof", "end of judgment")
    return j


def parse_valueterm(text: str) -> ValueTerm:
    p = _Parser(tokenize(text))
    t = p.valueterm()
    p.expect("eof", "end of value term")
    return t


def parse_judgment_db(text: str) -> list[Judgment]:
    """Parse a judgment database: judgments separated by `;`."""
    p = _Parser(tokenize(text))
    out: list[Judgment] = []
    while not p.at("eof"):
        out.append(p.judgment())
        p.expect(";")
    return out


# ---------------------------------------------------------------------------
# Rendering.


def render_valueterm(t: ValueTerm) -> str:
    if isinstance(t, Atom):
        return t.token
    if isinstance(t, Sum):
        return " + ".join(
            f"({render_valueterm(m)})" if isinstance(m, Sum) else render_valueterm(m)
            for m in t.members
        )
    if isinstance(t, Complement):
        inner = render_valueterm(t.inner)
        if isinstance(t.inner, Sum):
            inner = f"({inner})"
        return "!" + inner
    raise TypeError(f"not a value term: {t!r}")


def render_attribution(a: Attribution) -> str:
    return f"{a.var} = {render_valueterm(a.value)}"


def render_intervention_expr(e: InterventionExpr) -> str:
    inside: list[str] = [f"{s} -> {d}" for s, d in sorted(e.graph.edges)]
    covered = {n for edge in e.graph.edges for n in edge}
    covered |= variables_of(e.datapoint) | {e.intervention.var}
    inside += sorted(e.graph.nodes - covered)
    inside += [render_attribution(a) for a in e.datapoint.attributions]
    iv = e.intervention
    return f"[{', '.join(inside)}] I({iv.var}={iv.value.token})"


def render_context_item(item: ContextItem) -> str:
    if isinstance(item, InterventionItem):
        return render_intervention_expr(item.expr)
    if isinstance(item, EdgeItem):
        return f"{item.src} -> {item.dst}"
    if isinstance(item, AttrItem):
        return render_attribution(item.attribution)
    raise TypeError(f"not a context item: {item!r}")


def parse_context_item(text: str) -> ContextItem:
    p = _Parser(tokenize(text))
    item = p.context_item()
    p.expect("eof", "end of context item")
    return item


def render_judgment(j: Judgment) -> str:
    """Canonical rendering: intervention item, edges sorted, then loose
    attributions in stored order."""
    parts: list[str] = []
    item = j.intervention_item()
    if item is not None:
        parts.append(render_intervention_expr(item.expr))
    parts += [f"{e.src} -> {e.dst}" for e in sorted(j.edge_items(), key=lambda e: (e.src, e.dst))]
    parts += [render_attribution(a.attribution) for a in j.attr_items()]
    lhs = ", ".join(parts)
    rhs = f"|- {j.target} = {render_valueterm(j.value)} @ {render_probability(j.prob)}"
    return f"{lhs} {rhs}" if lhs else rhs


def render_judgment_db(judgments: list[Judgment]) -> str:
    return "".join(render_judgment(j) + ";\n" for j in judgments)


# ---------------------------------------------------------------------------
# Proof serialization (JSON with DSL-syntax judgment and item strings).


def proof_to_dict(p: Proof) -> dict:
    return {
        "assumptions": [render_judgment(a) for a in p.assumptions],
        "steps": [
            {
                "rule": s.rule.value,
                "item": None if s.item is None else render_context_item(s.item),
                "premise": s.premise,
                **({"premise2": s.premise2} if s.premise2 is not None else {}),
                "conclusion": render_judgment(s.conclusion),
            }
            for s in p.steps
        ],
    }


def render_proof(p: Proof) -> str:
    return json.dumps(proof_to_dict(p), indent=2) + "\n"


class ProofFormatError(ValueError):
    """A serialized proof document is malformed."""


def proof_from_dict(doc: dict) -> Proof:
    try:
        assumptions = tuple(parse_judgment(s) for s in doc["assumptions"])
        steps = []
        for raw in doc["steps"]:
            rule = RuleId(raw["rule"])
            item = None if raw.get("item") is None else parse_context_item(raw["item"])
            steps.append(
                ProofStep(
                    rule=rule,
                    item=item,
                    premise=raw.get("premise"),
                    premise2=raw.get("premise2"),
                    conclusion=parse_judgment(raw["conclusion"]),
                )
            )
        return Proof(assumptions, tuple(steps))
    except (KeyError, TypeError, ValueError, ParseError) as e:
        raise ProofFormatError(f"malformed proof document: {e}")


def parse_proof(text: str) -> Proof:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProofFormatError(f"malformed proof document: {e}")
    return proof_from_dict(doc)

"""Classifier oracles: anything that can answer "with what probability does
the target take this value, given these attributions".

Three backends: empirical frequency over a CSV table, a database of assumed
judgments, and an external command speaking a line-delimited JSON protocol.
"""

from __future__ import annotations

import csv
import io
import json
import os
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

from .model import (
    DataPoint,
    InvalidModel,
    check_token,
    InterventionItem,
    Judgment,
    ValueTerm,
    check_probability,
    value_matches,
    variables_of,
)

DEFAULT_TIMEOUT_S = 10.0


class OracleError(Exception):
    """The oracle could not answer a query."""


class UndefinedProbability(OracleError):
    """No rows satisfy the conditioning attributions."""


class NoMatchingJudgment(OracleError):
    """No judgment in the database covers the queried data point."""


class ConflictingJudgments(OracleError):
    """The database holds contradictory probabilities for one query."""


@dataclass(frozen=True)
class OracleQuery:
    attributions: DataPoint
    target: str
    target_value: ValueTerm

    def __post_init__(self):
        if self.target in variables_of(self.attributions):
            raise OracleError(f"target {self.target} occurs among the query attributions")


class ClassifierOracle(Protocol):
    def query(self, q: OracleQuery) -> Fraction: ...


# ---------------------------------------------------------------------------
# Empirical frequency over a CSV table.


class CsvFrequencyOracle:
    """Answers queries by exact conditional frequency over a loaded table.

    Cells are opaque tokens; rows with empty cells are rejected at load.
    """

    def __init__(self, columns: list[str], rows: list[dict[str, str]]):
        self.columns = list(columns)
        self.rows = [dict(r) for r in rows]

    @classmethod
    def from_text(cls, text: str) -> "CsvFrequencyOracle":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise OracleError("empty CSV: missing header")
        if len(set(header)) != len(header) or any(not c for c in header):
            raise OracleError(f"invalid CSV header: {header}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(header):
                raise OracleError(f"CSV line {lineno}: expected {len(header)} cells, got {len(raw)}")
            for cell in raw:
                if cell == "":
                    raise OracleError(f"CSV line {lineno}: empty cell")
                try:
                    check_token(cell)
                except InvalidModel:
                    raise OracleError(f"CSV line {lineno}: cell {cell!r} is not a plain token")
            rows.append(dict(zip(header, raw)))
        return cls(header, rows)

    @classmethod
    def from_path(cls, path: str) -> "CsvFrequencyOracle":
        with open(path, encoding="utf-8") as f:
            return cls.from_text(f.read())

    def query(self, q: OracleQuery) -> Fraction:
        known = set(self.columns)
        for var in sorted(variables_of(q.attributions) | {q.target}):
            if var not in known:
                raise OracleError(f"unknown column: {var}")
        denominator = 0
        numerator = 0
        for row in self.rows:
            if all(value_matches(a.value, row[a.var]) for a in q.attributions):
                denominator += 1
                if value_matches(q.target_value, row[q.target]):
                    numerator += 1
        if denominator == 0:
            raise UndefinedProbability("no rows match the query attributions")
        return Fraction(numerator, denominator)


# ---------------------------------------------------------------------------
# Judgment database.


class JudgmentDbOracle:
    """Answers from assumed judgments with attribution-only contexts.

    A query matches a judgment whose context equals the queried data point
    as a set of attributions (order-insensitive, value terms verbatim) and
    whose conclusion is the queried target and value.
    """

    def __init__(self, judgments: list[Judgment]):
        for j in judgments:
            if j.edge_items() or any(isinstance(i, InterventionItem) for i in j.context):
                raise OracleError(
                    "judgment-db entries must have attribution-only contexts"
                )
        self.judgments = list(judgments)

    def query(self, q: OracleQuery) -> Fraction:
        wanted = frozenset(q.attributions.attributions)
        probs = {
            j.prob
            for j in self.judgments
            if frozenset(a.attribution for a in j.attr_items()) == wanted
            and j.target == q.target
            and j.value == q.target_value
        }
        if not probs:
            raise NoMatchingJudgment(f"no judgment for {q.target} over the queried data point")
        if len(probs) > 1:
            raise ConflictingJudgments(
                f"conflicting probabilities {sorted(probs)} for one query"
            )
        return probs.pop()


# ---------------------------------------------------------------------------
# External command.


class ExternalCommandOracle:
    """Bridges to an opaque classifier via a one-shot subprocess.

    Each query spawns the command, writes one JSON request line to stdin and
    reads one JSON response line `{"probability": "<decimal or n/m>"}`.
    """

    def __init__(self, argv: list[str], timeout: float | None = None):
        if not argv:
            raise OracleError("empty oracle command")
        self.argv = list(argv)
        if timeout is None:
            env_ms = os.environ.get("CF_ORACLE_TIMEOUT_MS")
            timeout = float(env_ms) / 1000.0 if env_ms else DEFAULT_TIMEOUT_S
        self.timeout = timeout

    def query(self, q: OracleQuery) -> Fraction:
        from .dsl import ParseError, parse_probability_literal, render_valueterm

        request = json.dumps(
            {
                "attributions": [
                    {"var": a.var, "value": render_valueterm(a.value)}
                    for a in q.attributions
                ],
                "target": q.target,
                "value": render_valueterm(q.target_value),
            }
        )
        try:
            proc = subprocess.run(
                self.argv,
                input=request + "\n",
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as e:
            raise OracleError(f"oracle command failed: {e}")
        if proc.returncode != 0:
            raise OracleError(
                f"oracle command exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        line = proc.stdout.strip().splitlines()
        if not line:
            raise OracleError("oracle command produced no response")
        try:
            doc = json.loads(line[0])
            raw = doc["probability"]
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise OracleError(f"malformed oracle response: {e}")
        try:
            return check_probability(parse_probability_literal(str(raw)))
        except (ParseError, ValueError) as e:
            raise OracleError(f"bad probability in oracle response: {e}")

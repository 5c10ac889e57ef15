"""Command-line front door.

Exit codes: 0 fair (or success for non-verdict commands), 1 unfair or
failed proof check, 2 candidate rejected as a counterfactual, 3 parse or
configuration error, 4 oracle error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import dsl
from .closure import mediate_closure, descendants
from .engine import (
    CandidateRejected,
    Case,
    ConsistencyError,
    check_case,
    derive_counterfactual,
)
from .kernel import check_proof
from .model import CausalGraph, InterventionItem, InvalidModel
from .oracle import (
    ClassifierOracle,
    CsvFrequencyOracle,
    ExternalCommandOracle,
    JudgmentDbOracle,
    OracleError,
)

EXIT_FAIR = 0
EXIT_UNFAIR = 1
EXIT_NOT_COUNTERFACTUAL = 2
EXIT_CONFIG = 3
EXIT_ORACLE = 4


class ConfigError(Exception):
    pass


def load_oracle(spec: str) -> ClassifierOracle:
    """`csv:PATH`, `db:PATH`, or `cmd:PROGRAM ARGS`."""
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise ConfigError(f"bad oracle spec: {spec!r} (want csv:PATH, db:PATH or cmd:COMMAND)")
    try:
        if kind == "csv":
            return CsvFrequencyOracle.from_path(rest)
        if kind == "db":
            with open(rest, encoding="utf-8") as f:
                return JudgmentDbOracle(dsl.parse_judgment_db(f.read()))
        if kind == "cmd":
            return ExternalCommandOracle(shlex.split(rest))
    except OSError as e:
        raise ConfigError(f"cannot load oracle: {e}")
    except (dsl.ParseError, OracleError) as e:
        raise ConfigError(f"cannot load oracle {spec!r}: {e}")
    raise ConfigError(f"unknown oracle kind: {kind!r}")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ConfigError(str(e))


def _load_case(path: str) -> Case:
    return dsl.parse_case(_read(path))


def _epsilon(text: str) -> Fraction:
    try:
        return dsl.parse_probability_literal(text)
    except dsl.ParseError as e:
        raise ConfigError(f"bad epsilon: {e}")


def _verdict_report(verdict, fmt: str, prefix: str = "") -> str:
    r = dsl.render_probability
    if fmt == "json":
        return json.dumps(
            {
                "fair": verdict.fair,
                "p": r(verdict.p),
                "q": r(verdict.q),
                "difference": r(verdict.difference),
                "epsilon": r(verdict.epsilon),
                "counterfactual": dsl.render_judgment(verdict.counterfactual_judgment),
                "proof": dsl.proof_to_dict(verdict.proof),
                "rule_counts": verdict.proof.rule_counts(),
            },
            indent=2,
        )
    word = "FAIR" if verdict.fair else "UNFAIR"
    counts = verdict.proof.rule_counts()
    summary = ", ".join(f"{n} {rule}" for rule, n in sorted(counts.items()))
    return (
        f"{prefix}{word} p={r(verdict.p)} q={r(verdict.q)} "
        f"|p-q|={r(verdict.difference)} epsilon={r(verdict.epsilon)}\n"
        f"{prefix}counterfactual: {dsl.render_judgment(verdict.counterfactual_judgment)}\n"
        f"{prefix}proof: {len(verdict.proof.steps)} steps ({summary})"
    )


def _check_one(path: str, oracle, epsilon, strict, fmt, prefix="") -> int:
    try:
        verdict = check_case(_load_case(path), oracle, epsilon, strict)
    except dsl.ParseError as e:
        print(f"{prefix}{path}: parse error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidModel, ConsistencyError) as e:
        print(f"{prefix}{path}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CandidateRejected as e:
        print(f"{prefix}{path}: {e}", file=sys.stderr)
        return EXIT_NOT_COUNTERFACTUAL
    except OracleError as e:
        print(f"{prefix}{path}: oracle error: {e}", file=sys.stderr)
        return EXIT_ORACLE
    print(_verdict_report(verdict, fmt, prefix))
    return EXIT_FAIR if verdict.fair else EXIT_UNFAIR


def cmd_check(args) -> int:
    oracle = load_oracle(args.oracle)
    epsilon = _epsilon(args.epsilon)
    strict = not args.lenient_edges
    if len(args.casefile) == 1:
        return _check_one(args.casefile[0], oracle, epsilon, strict, args.format)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        codes = list(
            pool.map(
                lambda path: _check_one(
                    path, oracle, epsilon, strict, args.format, prefix=f"{path}: "
                ),
                args.casefile,
            )
        )
    return max(codes)


def cmd_derive(args) -> int:
    oracle = load_oracle(args.oracle)
    try:
        case = _load_case(args.casefile)
        judgment, proof = derive_counterfactual(case, oracle, not args.lenient_edges)
    except dsl.ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidModel as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    except CandidateRejected as e:
        print(str(e), file=sys.stderr)
        return EXIT_NOT_COUNTERFACTUAL
    except OracleError as e:
        print(f"oracle error: {e}", file=sys.stderr)
        return EXIT_ORACLE
    print(dsl.render_judgment(judgment))
    if args.emit_proof:
        try:
            with open(args.emit_proof, "w", encoding="utf-8") as f:
                f.write(dsl.render_proof(proof))
        except OSError as e:
            print(f"cannot write proof: {e}", file=sys.stderr)
            return EXIT_CONFIG
    return 0


def cmd_closure(args) -> int:
    try:
        parsed = dsl.parse_case_or_graph(_read(args.file))
    except dsl.ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    graph = parsed if isinstance(parsed, CausalGraph) else parsed.graph
    if args.of:
        if args.of not in graph.nodes:
            print(f"unknown variable: {args.of}", file=sys.stderr)
            return EXIT_CONFIG
        print(", ".join(sorted(descendants(graph, args.of))))
        return 0
    relation = mediate_closure(graph)
    for src, dst, witnesses in sorted(relation.entries):
        print(f"{src} -> {dst} via {{{', '.join(sorted(witnesses))}}}")
    return 0


def cmd_verify_proof(args) -> int:
    try:
        proof = dsl.parse_proof(_read(args.prooffile))
        case = _load_case(args.casefile)
    except (dsl.ParseError, dsl.ProofFormatError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    expected = InterventionItem(case.intervention_expr())
    for k, step in enumerate(proof.steps):
        if isinstance(step.item, InterventionItem) and step.item != expected:
            print(
                f"FAIL at step {k}: intervention expression does not match the case",
                file=sys.stderr,
            )
            return 1
    result = check_proof(proof, strict=not args.lenient_edges)
    if not result.ok:
        print(f"FAIL at step {result.step}: {result.code}: {result.reason}", file=sys.stderr)
        return 1
    final = proof.conclusion()
    if tuple(final.context) != (expected,):
        print("FAIL: proof does not conclude with this case's counterfactual", file=sys.stderr)
        return 1
    print(f"OK: {len(proof.steps)} steps replayed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfcheck",
        description="Counterfactual fairness verification for probabilistic classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, oracle=True):
        if oracle:
            p.add_argument("--oracle", required=True, help="csv:PATH, db:PATH or cmd:COMMAND")
        p.add_argument(
            "--lenient-edges",
            action="store_true",
            help="allow edge cuts on edges absent from the factual graph",
        )

    p = sub.add_parser("check", help="decide counterfactual fairness of case files")
    p.add_argument("casefile", nargs="+")
    add_common(p)
    p.add_argument("--epsilon", default="0", help="fairness threshold (default 0: identity)")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--jobs", type=int, default=1, help="verify multiple case files concurrently")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("derive", help="derive the counterfactual judgment and its proof")
    p.add_argument("casefile")
    add_common(p)
    p.add_argument("--emit-proof", metavar="PATH", help="write the replayable proof file")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("closure", help="print the mediate-cause closure or a descendant set")
    p.add_argument("file", help="case file or bare graph file")
    p.add_argument("--of", metavar="VAR", help="print only the descendants of VAR")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("verify-proof", help="replay a proof file against a case")
    p.add_argument("prooffile")
    p.add_argument("casefile")
    add_common(p, oracle=False)
    p.set_defaults(func=cmd_verify_proof)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    raise SystemExit(main())

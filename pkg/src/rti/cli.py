"""``rti`` command line: infer, check and corpus."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, TextIO

from . import setexpr as sx
from .callgraph import build_call_graph, condense_and_level, plan_to_json
from .frontend import (
    Atom,
    Clause,
    ParseError,
    Program,
    UnknownPredicateError,
    Variable,
    parse_atom,
    parse_program,
    prepare,
    term_vars,
)
from .report import classify
from .solver import Analysis, SCCResult, SolveConfig, SolverError, analyze

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_SOLVER = 0, 1, 2, 3

GOAL = "__goal__"

log = logging.getLogger("rti")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rti", description="Infer regular types for pure logic programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_opts(sp):
        sp.add_argument("--bind", type=_on_off, default=True, metavar="on|off")
        sp.add_argument("--max-iterations", type=_positive, default=None)
        sp.add_argument("--bind-dnf-limit", type=_positive, default=4096)
        sp.add_argument("--allow-unknown", action="store_true")
        sp.add_argument("--trace", action="store_true", help="one line per solver step on stderr")

    inf = sub.add_parser("infer", help="print inferred types")
    inf.add_argument("file")
    inf.add_argument("--format", choices=("text", "json"), default="text")
    inf.add_argument("--dump-equations", choices=("initial", "toplevel", "solved"))
    inf.add_argument("--dump-callgraph", action="store_true")
    solver_opts(inf)

    chk = sub.add_parser("check", help="try to prove a call fails")
    chk.add_argument("file")
    chk.add_argument("--query", help="call to check; defaults to the file's entry directives")
    chk.add_argument("--format", choices=("text", "json"), default="text")
    solver_opts(chk)

    cor = sub.add_parser("corpus", help="check every .pl file of a directory")
    cor.add_argument("dir")
    cor.add_argument("--format", choices=("text", "json"), default="text")
    solver_opts(cor)
    return p


def config_from(args, trace_out: Optional[TextIO] = None) -> SolveConfig:
    kwargs = dict(bind=args.bind, bind_dnf_limit=args.bind_dnf_limit, allow_unknown=args.allow_unknown)
    if args.max_iterations is not None:
        kwargs["max_iterations"] = args.max_iterations
    if args.trace:
        out = trace_out or sys.stderr
        kwargs["trace"] = lambda msg: print(msg, file=out)
    return SolveConfig(**kwargs)


# --------------------------------------------------------------------------
# Check mode


def add_goal(prog: Program, query: Atom) -> Program:
    """Append ``__goal__(V1,...,Vn) :- query.`` over the query's variables."""
    if query.key not in prog.predicates:
        raise UsageError(f"query predicate {query.predicate}/{len(query.args)} is not defined")
    names: List[str] = []
    for t in query.args:
        for v in term_vars(t):
            if v not in names:
                names.append(v)
    head = Atom(GOAL, tuple(Variable(v) for v in names))
    goal = Clause(head, (query,), index=len(prog.clauses) + 1)
    return Program(prog.clauses + [goal], list(prog.entries))


@dataclass
class Verdict:
    query: str
    detected: bool
    seconds: float
    analysis: Analysis

    @property
    def label(self) -> str:
        return "FAIL-DETECTED" if self.detected else "NOT-DETECTED"


def check_query(prog: Program, query: Atom, config: Optional[SolveConfig] = None) -> Verdict:
    start = time.perf_counter()
    full = prepare(add_goal(prog, query))
    goal_index = full.clauses[-1].index
    analysis = analyze(full, config)
    detected = goal_index in analysis.failed_clauses
    for scc in analysis.sccs:
        if (GOAL, len(full.clauses[-1].head.args)) not in scc.predicates:
            continue
        solved = scc.result.solved
        watched = set(scc.generated.clause_vars.get(goal_index, ())) | set(scc.generated.sig_vars)
        for v in watched:
            if v in solved and isinstance(solved[v], sx.Empty):
                detected = True
    return Verdict(str(query), detected, time.perf_counter() - start, analysis)


# --------------------------------------------------------------------------
# Commands


def _read_program(path: str) -> Program:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_program(text)


def _dump(analysis: Analysis, phase: str, out: TextIO) -> None:
    for item in analysis.sccs:
        names = ", ".join(f"{n}/{a}" for n, a in item.predicates)
        print(f"% SCC {{{names}}} ({phase})", file=out)
        if phase == "initial":
            sys_ = item.generated.initial
        elif phase == "toplevel":
            sys_ = item.generated.equations
        else:
            sys_ = item.result.solved
        text = sx.render_system(sys_)
        if text:
            print(text, file=out)


def run_infer(args, out: TextIO) -> int:
    prog = _read_program(args.file)
    config = config_from(args)
    if args.dump_callgraph:
        g = build_call_graph(prog)
        print(json.dumps(plan_to_json(g, condense_and_level(g)), indent=2), file=out)
    analysis = analyze(prepare(prog), config)
    if args.dump_equations:
        _dump(analysis, args.dump_equations, out)
    report = classify(analysis)
    for item in analysis.sccs:
        r = item.result
        log.info("memo %d entries for %d base variables", len(r.memo.table), r.base_vars)
    if args.format == "json":
        print(json.dumps(report.to_json(), indent=2), file=out)
    elif report.predicates:
        print(report.to_text(), file=out)
    return EXIT_OK


def _queries(prog: Program, query: Optional[str]) -> List[Atom]:
    if query:
        return [parse_atom(query)]
    if not prog.entries:
        raise UsageError("check needs --query or an ':- entry' directive")
    return list(prog.entries)


def run_check(args, out: TextIO) -> int:
    prog = _read_program(args.file)
    config = config_from(args)
    verdicts = [check_query(prog, q, config) for q in _queries(prog, args.query)]
    if args.format == "json":
        data = [{"query": v.query, "verdict": v.label, "seconds": round(v.seconds, 4)} for v in verdicts]
        print(json.dumps(data, indent=2), file=out)
    else:
        for v in verdicts:
            print(f"{v.label} {v.query}", file=out)
    return EXIT_OK


def corpus_rows(directory: str, config: SolveConfig) -> List[dict]:
    """One summary row per ``.pl`` file with entry directives."""
    rows = []
    paths = sorted(Path(directory).glob("*.pl"))
    if not paths:
        raise UsageError(f"no .pl files in {directory}")
    for path in paths:
        prog = _read_program(str(path))
        start = time.perf_counter()
        # like the table, only the entry predicates' positions are counted
        mains = list(dict.fromkeys(q.key for q in prog.entries)) or None
        report = classify(analyze(prepare(prog), config), mains)
        stats = report.stats
        verdicts = [check_query(prog, q, config) for q in prog.entries]
        rows.append(
            {
                "benchmark": path.stem,
                "desc": stats["descriptors"],
                "prec": stats["nonAny"],
                "empty": stats["emptyDetected"],
                "error": "y" if verdicts and all(v.detected for v in verdicts) else "n",
                "queries": [{"query": v.query, "verdict": v.label} for v in verdicts],
                "seconds": round(time.perf_counter() - start, 4),
            }
        )
    return rows


def run_corpus(args, out: TextIO) -> int:
    rows = corpus_rows(args.dir, config_from(args))
    if args.format == "json":
        print(json.dumps(rows, indent=2), file=out)
        return EXIT_OK
    print(f"{'Benchmark':<14}{'Desc.':>6}{'Prec.':>6}  Error", file=out)
    for r in rows:
        print(f"{r['benchmark']:<14}{r['desc']:>6}{r['prec']:>6}  {r['error']}", file=out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    logging.basicConfig(level=os.environ.get("RTI_LOG", "WARNING").upper(), format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {"infer": run_infer, "check": run_check, "corpus": run_corpus}
    try:
        return handlers[args.command](args, out)
    except UsageError as exc:
        print(f"rti: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, UnknownPredicateError) as exc:
        print(f"rti: {getattr(args, 'file', None) or args.dir}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SolverError as exc:
        print(f"rti: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"rti: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

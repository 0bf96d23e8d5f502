"""Acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py`` (or execute this file); the
terminal summary prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import logging
import random
import sys
import time
from pathlib import Path

import pytest

import rti
from rti import setexpr as sx
from rti.cli import check_query, corpus_rows
from rti.frontend import parse_program, prepare
from rti.report import project
from rti.setexpr import Cons, EquationSystem, Memo, NameSupply, Var, inter, union
from rti.solver import SolveConfig, analyze, bind, is_empty

import oracles
from helpers import APPEND, NREV, matches_golden, run, solution

BENCHMARKS = Path(rti.__file__).parent / "benchmarks"

A, B, NIL = sx.const("a"), sx.const("b"), sx.nil()

log = logging.getLogger("rti.acceptance")


def test_append_golden(criterion):
    criterion(1, "append/3 golden types, under 1 s")
    start = time.perf_counter()
    analysis = run(APPEND)
    elapsed = time.perf_counter() - start
    golden = """
    :- type A1 -> [] | [X|A1].
    :- type A2 -> A2.
    :- type A3 -> A2 | [X|A3].
    """
    assert matches_golden(analysis, "append", 3, golden)
    assert elapsed < 1.0


def test_nrev_golden(criterion):
    criterion(2, "nrev/2 golden types")
    golden = """
    :- type N1 -> [] | [X|N1].
    :- type N2 -> [] | [X|N2].
    """
    assert matches_golden(run(NREV), "nrev", 2, golden)


def test_appself_golden(criterion):
    criterion(3, "appself/2 golden types, BIND binds A2 = []")
    analysis = run(APPEND + "appself(A,B) :- append(A,[],B).\n")
    golden = """
    :- type A -> [] | [X|A].
    :- type B -> [] | [X|B].
    """
    assert matches_golden(analysis, "appself", 2, golden)
    scc = next(s for s in analysis.sccs if s.predicates == [("appself", 2)])
    # the copy of append's free second argument at the call site
    assert [(v.split("_s")[0], e) for v, e in scc.result.bindings] == [("A2", NIL)]


def test_alternate_bind(criterion):
    criterion(4, "alternate(a,b): BIND gives A1 = a|b, B1 = a|b")
    # the formula as BIND builds it from the two call-site constraints
    S = {"W1": union(inter(Var("A1"), A), inter(Var("B1"), A)),
         "W2": union(inter(Var("A1"), B), inter(Var("B1"), B))}
    out = bind(S, {}, set(), NameSupply())
    assert out.formula == [[frozenset({("A1", A)}), frozenset({("B1", A)})],
                           [frozenset({("A1", B)}), frozenset({("B1", B)})]]
    assert out.equations == [("A1", union(A, B)), ("B1", union(A, B))]
    # end to end: the copy of alternate's fact variables is bound the same way
    analysis = run("alternate(A1,B1).\nalternate(A2,B2) :- alternate(B2,A2).\ng :- alternate(a,b).\n")
    scc = next(s for s in analysis.sccs if s.predicates == [("g", 0)])
    got = sorted((v.split("_")[0], e) for v, e in scc.result.bindings)
    assert got == [("A1", union(A, B)), ("B1", union(A, B))]


def test_recurrence_example(criterion):
    criterion(5, "p(X):-p(X). q/1, r/1 recurrences: P = 0, Q = a, R = b")
    analysis = run("p(X) :- p(X).\nq(a).\nq(Y) :- q(Y).\nr(b).\nr(Z) :- q(Z), r(Z).\n")
    (p1,), P = solution(analysis, "p", 1)
    (q1,), Q = solution(analysis, "q", 1)
    (r1,), R = solution(analysis, "r", 1)
    assert P[p1] == sx.EMPTY
    assert Q[q1] == A
    assert R[r1] == B


def test_failure_propagation(criterion):
    criterion(6, "p(X):-q(b,X). q(a,a): P = 0 only with failure propagation")
    text = "p(X) :- q(b,X).\nq(a,a).\n"
    (p1,), with_loop = solution(run(text), "p", 1)
    (p1_off,), without = solution(run(text, propagate_failure=False), "p", 1)
    assert with_loop[p1] == sx.EMPTY
    assert is_empty(p1, with_loop)
    assert not is_empty(p1_off, without)


EXPECTED_ERRORS = {
    "append": True, "fib": True, "revapp": True, "mv": True, "mmatrix": True,
    "grammar": True, "pvqueen": True, "serialize": True,
    "dnf": False, "hanoi": False,
}


def test_corpus_error_verdicts(criterion):
    criterion(7, "benchmark corpus error verdicts, under 30 s")
    start = time.perf_counter()
    rows = corpus_rows(str(BENCHMARKS), SolveConfig())
    elapsed = time.perf_counter() - start
    got = {r["benchmark"]: r["error"] == "y" for r in rows}
    disagree = sorted(name for name, want in EXPECTED_ERRORS.items() if got.get(name) != want)
    assert elapsed < 30.0
    assert not disagree, f"verdicts differ from the expected ones on {disagree}"


def _violations(seed: int, universe3) -> list:
    rules = oracles.random_program(random.Random(seed))
    analysis = analyze(prepare(parse_program(oracles.show_program(rules))))
    out, meanings = [], {}
    for pred, args in oracles.bottom_up(rules, oracles.FUNCTORS, iterations=4):
        sol = analysis.solutions[(pred, len(args))]
        if pred not in meanings:
            open_ = (sol.system.free_vars() | set(sol.signature.vars)) - set(sol.system)
            meanings[pred] = sx.solve_meanings(sol.system, {v: universe3 for v in open_}, 3)
        for v, t in zip(sol.signature.vars, args):
            if t not in meanings[pred][v]:
                out.append((seed, pred, args))
    return out


def test_soundness_random_programs(criterion):
    criterion(8, "500 random programs: derived atoms lie within inferred types")
    universe3 = oracles.universe(oracles.FUNCTORS, 3)
    bad = [v for seed in range(500) for v in _violations(seed, universe3)]
    assert bad == []


# --------------------------------------------------------------------------
# Criterion 9: rewrites preserve bounded-depth meaning

SIG = {"a": 0, "b": 0, "[]": 0, "f": 1, ".": 2}
UNIVERSE3 = sorted(sx.herbrand_universe(SIG, 3))
DEFINED = ["X0", "X1", "X2"]
FREE = ["P0", "P1"]


def random_expr(rng: random.Random, depth: int) -> sx.SetExpr:
    r = rng.random()
    if depth <= 0 or r < 0.35:
        choice = rng.randrange(7)
        if choice == 0:
            return sx.EMPTY
        if choice < 4:
            return Var(rng.choice(DEFINED + FREE))
        return sx.const(rng.choice(["a", "b", "[]"]))
    if r < 0.55:
        return Cons("f", (random_expr(rng, depth - 1),))
    if r < 0.7:
        return Cons(".", (random_expr(rng, depth - 1), random_expr(rng, depth - 1)))
    ops = [random_expr(rng, depth - 1) for _ in range(rng.randint(2, 3))]
    return union(*ops) if r < 0.85 else inter(*ops)


def random_system(rng: random.Random) -> EquationSystem:
    return EquationSystem({v: random_expr(rng, 3) for v in DEFINED})


def random_assignment(rng: random.Random):
    # parameters range over non-empty sets
    return {v: frozenset(rng.sample(UNIVERSE3, rng.randint(1, 40))) for v in FREE}


def meanings(system, sigma):
    env = sx.solve_meanings(system, sigma, 3)
    return {v: env[v] for v in DEFINED}


def _rewrite_check(seed: int) -> list:
    rng = random.Random(seed)
    system = random_system(rng)
    supply = NameSupply()
    rewritten = {}
    rewritten["dnf"] = EquationSystem({v: sx.dnf(e) for v, e in system.items()})
    memo = Memo(supply)
    simped = EquationSystem()
    for v, e in system.items():
        res = sx.simp(v, e, memo, lambda u: is_empty(u, system))
        simped.add(v, res.rhs)
        for w, f in res.new_equations:
            simped.add(w, f)
    rewritten["simp"] = simped
    rewritten["to_top_level_form"] = sx.to_top_level_form(system, supply)
    roots = DEFINED[: rng.randint(1, len(DEFINED))]
    projected = project(system, roots, supply)
    bad = []
    for _ in range(10):
        sigma = random_assignment(rng)
        want = meanings(system, sigma)
        for name, other in rewritten.items():
            if meanings(other, sigma) != want:
                bad.append((seed, name))
        # a root that projection leaves free stands for its original value
        sigma_p = dict(sigma, **{r: want[r] for r in roots if r not in projected})
        got = sx.solve_meanings(projected, sigma_p, 3)
        if any(got[r] != want[r] for r in roots):
            bad.append((seed, "project"))
    return bad


def test_rewrites_preserve_meaning(criterion):
    criterion(9, "1000 random systems: dnf, simp, top-level form, project keep meaning")
    bad = [b for seed in range(1000) for b in _rewrite_check(seed)]
    assert bad == []


def test_termination_and_memo(criterion):
    criterion(10, "corpus: SOLVE within the cap, one memo variable per key, memo <= 4x base vars")
    cap = SolveConfig().max_iterations
    problems = []
    for path in sorted(BENCHMARKS.glob("*.pl")):
        prog = parse_program(path.read_text())
        analyses = [analyze(prepare(prog))] + [check_query(prog, q).analysis for q in prog.entries]
        for analysis in analyses:
            for scc in analysis.sccs:
                res = scc.result
                memo = res.memo
                log.info("%s %s: memo %d entries, %d base variables", path.stem,
                         scc.predicates, len(memo.table), res.base_vars)
                if res.iterations > cap:
                    problems.append((path.stem, "iterations", res.iterations))
                if len(set(memo.table.values())) != len(memo.table):
                    problems.append((path.stem, "two keys share a variable"))
                if any(u in memo.members for key in memo.table for u in key):
                    problems.append((path.stem, "key not over base variables"))
                if len(memo.table) > 4 * res.base_vars:
                    problems.append((path.stem, "memo", len(memo.table), res.base_vars))
    assert problems == []


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

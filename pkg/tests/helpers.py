"""Shared test utilities: running the analysis and comparing systems up to renaming."""

from __future__ import annotations

import itertools
from typing import Dict, Iterator, Sequence

from rti import SolveConfig, analyze, parse_program, prepare
from rti import setexpr as sx
from rti.report import parse_types

APPEND = """
append([],L,L).
append([X|Xs],L,[X|Ys]) :- append(Xs,L,Ys).
"""

NREV = APPEND + """
nrev([],[]).
nrev([X|Xs],R) :- nrev(Xs,T), append(T,[X],R).
"""


def run(text: str, **config):
    return analyze(prepare(parse_program(text)), SolveConfig(**config))


def solution(analysis, name: str, arity: int):
    sol = analysis.solutions[(name, arity)]
    return sol.signature.vars, sol.system


def _match(a: sx.SetExpr, b: sx.SetExpr, m: Dict[str, str], sa, sb) -> Iterator[Dict[str, str]]:
    """Every extension of the variable bijection ``m`` under which ``a`` and ``b`` agree."""
    if type(a) is not type(b):
        return
    if isinstance(a, sx.Empty):
        yield m
    elif isinstance(a, sx.Var):
        yield from _bind(a.name, b.name, m, sa, sb)
    elif isinstance(a, sx.Cons):
        if a.functor == b.functor and a.arity == b.arity:
            yield from _match_all(list(zip(a.args, b.args)), m, sa, sb)
    elif len(a.ops) == len(b.ops):
        for perm in itertools.permutations(b.ops):
            yield from _match_all(list(zip(a.ops, perm)), m, sa, sb)


def _match_all(pairs, m, sa, sb) -> Iterator[Dict[str, str]]:
    if not pairs:
        yield m
        return
    (x, y), rest = pairs[0], pairs[1:]
    for m1 in _match(x, y, m, sa, sb):
        yield from _match_all(rest, m1, sa, sb)


def _bind(u: str, v: str, m: Dict[str, str], sa, sb) -> Iterator[Dict[str, str]]:
    if u in m:
        if m[u] == v:
            yield m
        return
    if v in m.values() or (u in sa) != (v in sb):
        return
    m = dict(m, **{u: v})
    if u in sa:
        yield from _match(sa[u], sb[v], m, sa, sb)
    else:
        yield m


def isomorphic(sa: sx.EquationSystem, roots_a: Sequence[str], sb: sx.EquationSystem, roots_b: Sequence[str]) -> bool:
    """Structural equality of two systems seen from corresponding roots."""
    pairs = [(sx.Var(u), sx.Var(v)) for u, v in zip(roots_a, roots_b)]
    return next(_match_all(pairs, {}, sa.equations, sb.equations), None) is not None


def matches_golden(analysis, name: str, arity: int, golden: str) -> bool:
    roots, system = solution(analysis, name, arity)
    expected = parse_types(golden)
    golden_roots = [line.split()[2] for line in golden.strip().splitlines()][:arity]
    return isomorphic(system, roots, expected, golden_roots)

"""Set-equation generation and solving for logic programs.

The pipeline per strongly connected component of the call graph is

    generate_equations -> solve -> project (see :mod:`rti.report`)

``solve`` keeps three systems: ``E`` (pending, FIFO), ``C`` (equations
introduced by argument-wise intersection) and ``S`` (solved).  Once ``E`` and
``C`` are exhausted, :func:`bind` may guess values for free variables that
occur in intersections, which feeds new equations back into ``E``.
"""

from __future__ import annotations

import logging
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from . import setexpr as sx
from .callgraph import LevelPlan, build_call_graph, condense_and_level
from .frontend import (
    Clause,
    Compound,
    PredKey,
    Program,
    Signature,
    Term,
    Variable,
    make_signatures,
)
from .setexpr import (
    EMPTY,
    Cons,
    EquationSystem,
    Inter,
    Memo,
    NameSupply,
    Origin,
    Provenance,
    SetExpr,
    Var,
    inter,
    union,
)

log = logging.getLogger(__name__)


class SolverError(Exception):
    pass


class IterationLimitError(SolverError):
    def __init__(self, limit: int, state: str):
        super().__init__(f"SOLVE did not terminate within {limit} outer iterations\n{state}")
        self.limit = limit
        self.state = state


class RecurrenceError(SolverError):
    """Raised for a recurrence whose right-hand side is not a union of conjuncts."""


class MissingSolutionError(SolverError):
    pass


def _default_max_iter() -> int:
    raw = os.environ.get("RTI_MAX_ITER")
    return int(raw) if raw else 100


@dataclass
class SolveConfig:
    max_iterations: int = field(default_factory=_default_max_iter)
    bind: bool = True
    bind_dnf_limit: int = 4096
    propagate_failure: bool = True
    allow_unknown: bool = False
    trace: Optional[Callable[[str], None]] = None

    def __post_init__(self):
        if self.max_iterations <= 0 or self.bind_dnf_limit <= 0:
            raise ValueError("limits must be positive")


# --------------------------------------------------------------------------
# Equation generation


def term_to_expr(t: Term) -> SetExpr:
    if isinstance(t, Variable):
        return Var(t.name)
    return Cons(t.functor, tuple(term_to_expr(a) for a in t.args))


@dataclass
class PredicateSolution:
    """Projected solution of one predicate, ready to be copied into callers."""

    signature: Signature
    system: EquationSystem

    @property
    def parameters(self) -> List[str]:
        return sorted(self.system.free_vars() - set(self.signature.vars))


def instantiate_solution(sol: PredicateSolution, site: int) -> Tuple[List[str], EquationSystem]:
    """Copy ``sol`` with every variable (parameters included) suffixed by the site."""
    names = set(sol.signature.vars) | sol.system.all_vars()
    mapping = {v: f"{v}_s{site}" for v in names}
    out = EquationSystem()
    for v, e in sol.system.items():
        out.add(mapping[v], sx.rename(e, mapping))
    return [mapping[v] for v in sol.signature.vars], out


@dataclass
class GeneratedSystem:
    """Eq(P) for one SCC plus the bookkeeping needed to drop failed clauses."""

    predicates: List[PredKey]
    signatures: Dict[PredKey, Signature]
    initial: EquationSystem
    equations: EquationSystem
    head_disjuncts: Dict[str, List[Tuple[int, SetExpr]]]
    clause_vars: Dict[int, Set[str]]
    head_vars: Dict[int, List[str]]
    intersections: List[Tuple[str, Tuple[str, ...]]]
    # signature and clause variables of this SCC; BIND never gives them a constructor value
    local_vars: Set[str] = field(default_factory=set)
    # whether some clause body calls a predicate of this SCC
    recursive: bool = False
    # variables written directly in an original body intersection
    direct_vars: Set[str] = field(default_factory=set)

    @property
    def sig_vars(self) -> List[str]:
        return [v for p in self.predicates for v in self.signatures[p].vars]

    def without(self, failed: Iterable[int]) -> EquationSystem:
        """Eq(P) with the given clauses removed from heads and bodies."""
        failed = set(failed)
        out = EquationSystem()
        for v, e in self.equations.items():
            prov = self.equations.provenance.get(v)
            if v in self.head_disjuncts:
                e = union(*(d for c, d in self.head_disjuncts[v] if c not in failed))
            elif prov is not None and prov.clause in failed:
                continue
            out.add(v, e, prov)
        return out


def generate_equations(
    scc: Iterable[PredKey],
    prog: Program,
    sigs: Mapping[PredKey, Signature],
    lower: Mapping[PredKey, PredicateSolution],
    supply: NameSupply,
    sites: Optional[List[int]] = None,
) -> GeneratedSystem:
    """Build the head and body equations of every clause of the SCC.

    Callees outside the SCC contribute a fresh copy of their solution per
    body atom; callees inside use their signature directly.
    """
    preds = sorted(scc)
    scc_set = set(preds)
    sites = sites if sites is not None else [0]
    initial = EquationSystem()
    eqp = EquationSystem()
    copies: List[Tuple[str, SetExpr, int]] = []
    head_disjuncts: Dict[str, List[Tuple[int, SetExpr]]] = {}
    head_initial: Dict[str, List[SetExpr]] = {}
    clause_vars: Dict[int, Set[str]] = {}
    head_vars: Dict[int, List[str]] = {}
    intersections: List[Tuple[str, Tuple[str, ...]]] = []
    # (lhs, rhs as written, rhs in top-level form, clause, part of the initial system)
    body_eqs: List[Tuple[str, SetExpr, SetExpr, int, bool]] = []

    def flatten(e: SetExpr, clause: int, detect: Set[str], under: bool = False) -> SetExpr:
        if isinstance(e, Var):
            return e
        if under:
            y = supply.fresh("Y")
            body_eqs.append((y, e, flatten(e, clause, detect), clause, False))
            detect.add(y)
            return Var(y)
        if isinstance(e, Cons):
            return Cons(e.functor, tuple(flatten(a, clause, detect, True) for a in e.args))
        if isinstance(e, sx.Union):
            return union(*(flatten(o, clause, detect) for o in e.ops))
        if isinstance(e, Inter):
            return inter(*(flatten(o, clause, detect) for o in e.ops))
        return e

    for p in preds:
        sig = sigs[p]
        for x in sig.vars:
            head_disjuncts[x] = []
            head_initial[x] = []
        for c in prog.clauses_for(p):
            detect = set(c.variables())
            clause_vars[c.index] = detect
            head_vars[c.index] = c.head_variables()
            for x, arg in zip(sig.vars, c.head.args):
                expr = term_to_expr(arg)
                head_initial[x].append(expr)
                head_disjuncts[x].append((c.index, flatten(expr, c.index, detect)))
            for v, t in c.bindings:
                expr = term_to_expr(t)
                body_eqs.append((v, expr, flatten(expr, c.index, detect), c.index, True))
            occurrences: Dict[str, List[str]] = {}
            for atom in c.body:
                if atom.key in scc_set:
                    callee_vars = list(sigs[atom.key].vars)
                else:
                    sol = lower.get(atom.key)
                    if sol is None:
                        raise MissingSolutionError(f"no solution for {atom.key[0]}/{atom.key[1]}")
                    sites[0] += 1
                    callee_vars, copy = instantiate_solution(sol, sites[0])
                    detect.update(callee_vars)
                    for v, e in copy.items():
                        copies.append((v, e, c.index))
                for i, t in enumerate(atom.args):
                    if isinstance(t, Variable):
                        occurrences.setdefault(t.name, []).append(callee_vars[i])
                    else:
                        w = supply.fresh("W")
                        detect.add(w)
                        expr = term_to_expr(t)
                        body_eqs.append(
                            (
                                w,
                                inter(Var(callee_vars[i]), expr),
                                inter(Var(callee_vars[i]), flatten(expr, c.index, detect)),
                                c.index,
                                True,
                            )
                        )
            for y, positions in occurrences.items():
                rhs = inter(*(Var(v) for v in positions))
                body_eqs.append((y, rhs, rhs, c.index, True))
                if len(set(positions)) > 1:
                    intersections.append((y, tuple(positions)))

    for p in preds:
        for x in sigs[p].vars:
            prov = Provenance(Origin.ORIGINAL)
            initial.add(x, union(*head_initial[x]), prov)
            eqp.add(x, union(*(d for _, d in head_disjuncts[x])), prov)
    direct_vars: Set[str] = set()
    for y, raw, flat, clause, written in body_eqs:
        prov = Provenance(Origin.ORIGINAL, clause)
        if written and isinstance(raw, Inter):
            direct_vars |= sx.top_level_vars(raw)
        if written:
            initial.add(y, raw, prov)
        eqp.add(y, flat, prov)
    for v, e, clause in copies:
        prov = Provenance(Origin.ORIGINAL, clause)
        initial.add(v, e, prov)
        eqp.add(v, e, prov)
    local_vars = {v for p in preds for v in sigs[p].vars}
    for p in preds:
        for c in prog.clauses_for(p):
            local_vars.update(c.variables())
    recursive = any(b.key in scc_set for p in preds for c in prog.clauses_for(p) for b in c.body)
    return GeneratedSystem(
        preds, dict(sigs), initial, eqp, head_disjuncts, clause_vars, head_vars, intersections,
        local_vars, recursive, direct_vars,
    )


# --------------------------------------------------------------------------
# CASE, emptiness, failure propagation


def case_reduce(x: str, rhs: SetExpr) -> Tuple[SetExpr, Optional[str]]:
    """Least solution of a recurrence ``x = rhs`` where ``x`` is top-level.

    Every disjunct having ``x`` as a conjunct is dropped; the remaining
    disjuncts form the answer.  Returns the rule applied (``None`` if ``x``
    was not top-level).
    """
    if x not in sx.top_level_vars(rhs):
        return rhs, None
    conjs = sx.dnf_conjuncts(rhs)
    xv = Var(x)
    for c in conjs:
        if xv not in c and x in sx.top_level_vars(sx.inter(*c)):
            raise RecurrenceError(f"{x} occurs nested in a disjunct of {sx.render(rhs)}")
    with_x = [c for c in conjs if xv in c]
    rest = [c for c in conjs if xv not in c]
    if len(conjs) == 1:
        rule = "1" if conjs == frozenset({frozenset({xv})}) else "2"
    elif all(c == frozenset({xv}) for c in with_x):
        rule = "3"
    elif rest:
        rule = "4"
    else:
        rule = "4*"  # only recursive disjuncts: least solution is empty
    return sx.from_conjuncts(rest), rule


def nonempty_vars(S: Mapping[str, SetExpr]) -> Set[str]:
    """Least-fixpoint marking of defined variables that may be non-empty.

    Variables without an equation in ``S`` are assumed non-empty.
    """
    eqs = S.equations if isinstance(S, EquationSystem) else S
    marked: Set[str] = set()

    def ok(e: SetExpr) -> bool:
        if isinstance(e, sx.Empty):
            return False
        if isinstance(e, Var):
            return e.name not in eqs or e.name in marked
        if isinstance(e, Cons):
            return all(ok(a) for a in e.args)
        if isinstance(e, sx.Union):
            return any(ok(o) for o in e.ops)
        if isinstance(e, Inter):
            return all(ok(o) for o in e.ops)
        raise TypeError(e)

    changed = True
    while changed:
        changed = False
        for v, e in eqs.items():
            if v not in marked and ok(e):
                marked.add(v)
                changed = True
    return marked


def is_empty(x: str, S: Mapping[str, SetExpr]) -> bool:
    """True when ``x`` denotes ∅ whatever non-empty sets the free variables take."""
    eqs = S.equations if isinstance(S, EquationSystem) else S
    return x in eqs and x not in nonempty_vars(eqs)


def propagate_failure(
    S: Dict[str, SetExpr],
    clause_vars: Mapping[int, Set[str]],
    head_vars: Mapping[int, Sequence[str]],
    known: Iterable[int] = (),
) -> Tuple[Dict[str, SetExpr], Set[int]]:
    """Empty the head variables of every clause owning an empty variable.

    Returns the updated system and the clauses newly found to fail.
    """
    known = set(known)
    failed = set()
    for c, vs in clause_vars.items():
        if c in known:
            continue
        if any(isinstance(S.get(v), sx.Empty) for v in vs):
            failed.add(c)
    out = dict(S)
    for c in failed:
        for y in head_vars.get(c, ()):
            if y in out:
                out[y] = EMPTY
    return out, failed


# --------------------------------------------------------------------------
# BIND


Binding = Tuple[str, SetExpr]
CandidateSet = FrozenSet[Binding]


def _find(parent: Dict[str, str], v: str) -> str:
    while parent[v] != v:
        parent[v] = parent[parent[v]]
        v = parent[v]
    return v


def candidate_sets(
    S: Mapping[str, SetExpr],
    bound_free: Set[str],
    supply: NameSupply,
    local: Optional[Set[str]] = None,
) -> Dict[str, List[CandidateSet]]:
    """Candidate sets per equation for every conjunct mentioning a free variable.

    Free variables linked by constructor-less conjuncts share one fresh
    parameter per connected component.  Variables in ``local`` are only ever
    aliased: giving one of them a constructor value would specialise a
    predicate's own success set to a single call.  A fresh parameter that
    aliases a local variable is added to ``local``.
    """
    local = local if local is not None else set()
    defined = set(S)
    raw: List[Tuple[str, List[str], Optional[Cons]]] = []
    for x, e in S.items():
        for conj in sorted(sx.dnf_conjuncts(e), key=lambda c: sorted(o.key for o in c)):
            if len(conj) < 2:
                continue
            vs = [l.name for l in conj if isinstance(l, Var)]
            if not vs or any(v in defined for v in vs):
                continue
            fvs = sorted(v for v in vs if v not in bound_free)
            if not fvs:
                continue
            conses = [l for l in conj if isinstance(l, Cons)]
            if len(conses) > 1:
                continue
            if conses:
                fvs = [v for v in fvs if v not in local]
                if not fvs:
                    continue
            raw.append((x, fvs, conses[0] if conses else None))
    parent: Dict[str, str] = {}
    for _, fvs, cons in raw:
        if cons is None:
            for v in fvs:
                parent.setdefault(v, v)
            root = _find(parent, fvs[0])
            for v in fvs[1:]:
                parent[_find(parent, v)] = root
    fresh: Dict[str, Var] = {}
    out: Dict[str, List[CandidateSet]] = {}
    for x, fvs, cons in raw:
        if cons is None:
            root = _find(parent, fvs[0])
            if root not in fresh:
                fresh[root] = Var(supply.fresh("T"))
                if any(_find(parent, v) == root and v in local for v in parent):
                    local.add(fresh[root].name)
            e: SetExpr = fresh[root]
        else:
            e = cons
        cs = frozenset((v, e) for v in fvs)
        lst = out.setdefault(x, [])
        if cs not in lst:
            lst.append(cs)
    return out


@dataclass
class BindOutcome:
    equations: List[Binding]
    formula: List[List[CandidateSet]]
    overflow: bool = False


def bind(
    S: Mapping[str, SetExpr],
    parents: Mapping[str, str],
    bound_free: Set[str],
    supply: NameSupply,
    dnf_limit: int = 4096,
    local: Optional[Set[str]] = None,
) -> BindOutcome:
    """Guess minimal values for free variables occurring in intersections.

    For each root equation (one not introduced by argument-wise intersection)
    the candidate sets of it and its descendants form a disjunction; the
    conjunction over roots is expanded to DNF.  Each bound variable gets the
    union of every value any disjunct assigns it, so the bindings cover all
    solutions of the formula.  ``bound_free`` is updated in place.
    """
    cands = candidate_sets(S, bound_free, supply, local)
    if not cands:
        return BindOutcome([], [])
    children: Dict[str, List[str]] = {}
    for child, par in parents.items():
        children.setdefault(par, []).append(child)
    roots = [x for x in S if x not in parents or parents[x] not in S]
    formula: List[List[CandidateSet]] = []
    for r in roots:
        seen = {r}
        order = [r]
        i = 0
        while i < len(order):
            for ch in sorted(children.get(order[i], ())):
                if ch not in seen and ch in S:
                    seen.add(ch)
                    order.append(ch)
            i += 1
        alts: List[CandidateSet] = []
        for q in order:
            for cs in cands.get(q, ()):
                if cs not in alts:
                    alts.append(cs)
        if alts:
            formula.append(alts)
    # descendants reachable from several roots may repeat a conjunct of the formula
    unique: List[List[CandidateSet]] = []
    for alts in formula:
        if alts not in unique:
            unique.append(alts)
    formula = unique

    disjuncts: Set[FrozenSet[Binding]] = {frozenset()}
    overflow = False
    for alts in formula:
        nxt = {d | cs for d in disjuncts for cs in alts}
        if len(nxt) > dnf_limit:
            overflow = True
            break
        disjuncts = nxt
    if overflow:
        # fewer bindings only make types larger, so giving up is safe
        log.warning("BIND formula exceeds %d disjuncts; no bindings made", dnf_limit)
        return BindOutcome([], formula, True)

    per_var: Dict[str, List[SetExpr]] = {}
    for d in disjuncts:
        for v, e in d:
            per_var.setdefault(v, []).append(e)
    eqs = [(v, union(*es)) for v, es in sorted(per_var.items())]
    bound_free.update(v for v, _ in eqs)
    return BindOutcome(eqs, formula, overflow)


# --------------------------------------------------------------------------
# SOLVE


@dataclass
class SolveResult:
    solved: EquationSystem
    failed_clauses: Set[int]
    bindings: List[Binding]
    memo: Memo
    iterations: int
    restarts: int
    base_vars: int


class _Restart(Exception):
    def __init__(self, failed: Set[int]):
        self.failed = failed


class _Run:
    def __init__(self, eqs: EquationSystem, gen: Optional[GeneratedSystem], supply: NameSupply,
                 config: SolveConfig, failed: Set[int]):
        self.config = config
        self.supply = supply
        self.gen = gen
        self.failed = failed
        self.memo = Memo(supply)
        if gen is not None:
            for y, ops in gen.intersections:
                if y in eqs:
                    self.memo.register(y, ops)
        self.E: Deque[Tuple[str, SetExpr]] = deque(eqs.items())
        self.S: Dict[str, SetExpr] = {}
        self.C: Dict[str, SetExpr] = {}
        self.bound_free: Set[str] = set()
        self.local: Set[str] = set(gen.local_vars) if gen is not None else set()
        self.bindings: List[Binding] = []
        self.iterations = 0
        self.base_vars = len(eqs.all_vars())
        self._marks: Optional[Set[str]] = None

    def trace(self, msg: str) -> None:
        if self.config.trace is not None:
            self.config.trace(msg)

    def _empty(self, v: str) -> bool:
        if v not in self.S:
            return False
        if self._marks is None:
            self._marks = nonempty_vars(self.S)
        return v not in self._marks

    def _set(self, x: str, e: SetExpr) -> None:
        self.S[x] = e
        self._marks = None

    def normalize(self, x: str, e: SetExpr) -> SetExpr:
        res = sx.simp(x, sx.dnf(e), self.memo, self._empty)
        for y, rhs in res.new_equations:
            self.C[y] = rhs
        return res.rhs

    def replace(self, x: str, e: SetExpr) -> None:
        m = {x: e}
        self.E = deque(
            (v, sx.substitute_top(r, m) if x in sx.top_level_vars(r) else r) for v, r in self.E
        )
        for v in list(self.S):
            r = self.S[v]
            if x in sx.top_level_vars(r):
                r = self.normalize(v, sx.substitute_top(r, m))
                r, _ = case_reduce(v, r)
                self._set(v, r)

    def run(self) -> None:
        cfg = self.config
        while True:
            self.iterations += 1
            if self.iterations > cfg.max_iterations:
                raise IterationLimitError(cfg.max_iterations, self.dump())
            self.C = {}
            while self.E:
                x, e = self.E.popleft()
                q1 = self.normalize(x, e)
                q2, rule = case_reduce(x, q1)
                self.trace(
                    f"solve {x} = {sx.render(e)} | simp: {sx.render(q1)}"
                    + (f" | case {rule}: {sx.render(q2)}" if rule else "")
                )
                self.replace(x, q2)
                self._set(x, q2)

            changed = True
            while changed:
                changed = False
                for x in list(self.S):
                    e = self.normalize(x, self.S[x])
                    e, _ = case_reduce(x, e)
                    self._set(x, e)
                    if not isinstance(e, sx.Empty) and self._empty(x):
                        self.trace(f"empty {x}")
                        self._set(x, EMPTY)
                        changed = True

            if cfg.propagate_failure and self.gen is not None:
                self.S, newly = propagate_failure(
                    self.S, self.gen.clause_vars, self.gen.head_vars, self.failed
                )
                if newly:
                    self.trace(f"failed clauses {sorted(newly)}")
                    raise _Restart(newly)

            for y in list(self.C):
                self.C[y] = sx.substitute_top(self.C[y], self.S)
            self.E.extend(self.C.items())
            self.C = {}

            if not self.E and cfg.bind:
                pinned = self.pinned()
                before = set(pinned)
                outcome = bind(
                    self.S, self.memo.parents, self.bound_free, self.supply,
                    cfg.bind_dnf_limit, pinned,
                )
                self.local |= pinned - before
                for v, e in outcome.equations:
                    self.trace(f"bind {v} = {sx.render(e)}")
                self.bindings.extend(outcome.equations)
                self.E.extend(outcome.equations)
            if not self.E:
                return

    def pinned(self) -> Set[str]:
        """Variables BIND must not give a constructor value.

        Besides the SCC's own variables, in a recursive SCC this covers the
        parameters of the SCC's current result types: there the signature
        stands for every instance at once, so a constraint reaching such a
        parameter through a recursive call need not hold for the instance that
        introduced it.  Parameters written directly in an original body
        intersection are constrained at their own call site and stay bindable.
        """
        out = set(self.local)
        if self.gen is None or not self.gen.recursive:
            return out
        seen: Set[str] = set()
        stack = [v for v in self.gen.sig_vars]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            if v in self.S:
                stack.extend(sx.variables(self.S[v]))
        out |= {v for v in seen if v not in self.S and v not in self.gen.direct_vars}
        return out

    def dump(self) -> str:
        lines = ["S:"] + [f"  {v} = {sx.render(e)}" for v, e in self.S.items()]
        lines += ["E:"] + [f"  {v} = {sx.render(e)}" for v, e in self.E]
        lines += ["C:"] + [f"  {v} = {sx.render(e)}" for v, e in self.C.items()]
        return "\n".join(lines)


def solve(
    system,
    config: Optional[SolveConfig] = None,
    supply: Optional[NameSupply] = None,
) -> SolveResult:
    """Solve a generated system (or a bare standard-form system).

    When failure propagation finds clauses whose variables are empty, those
    clauses are removed from Eq(P) and solving restarts; the set of failed
    clauses only grows, so this terminates.
    """
    config = config or SolveConfig()
    supply = supply or NameSupply(10_000)
    gen = system if isinstance(system, GeneratedSystem) else None
    failed: Set[int] = set()
    restarts = 0
    while True:
        eqs = gen.without(failed) if gen is not None else system
        run = _Run(eqs, gen, supply, config, failed)
        try:
            run.run()
        except _Restart as r:
            failed |= r.failed
            restarts += 1
            continue
        solved = EquationSystem(dict(run.S), memo=run.memo)
        for v in run.S:
            if v in eqs.provenance:
                solved.provenance[v] = eqs.provenance[v]
            elif v in run.memo.parents:
                solved.provenance[v] = Provenance(Origin.SIMP_CHILD, parent=run.memo.parents[v])
            else:
                solved.provenance[v] = Provenance(Origin.BIND)
        return SolveResult(
            solved, failed, run.bindings, run.memo, run.iterations, restarts, run.base_vars
        )


# --------------------------------------------------------------------------
# Whole-program driver


@dataclass
class SCCResult:
    predicates: List[PredKey]
    generated: GeneratedSystem
    result: SolveResult


@dataclass
class Analysis:
    program: Program
    signatures: Dict[PredKey, Signature]
    plan: LevelPlan
    solutions: Dict[PredKey, PredicateSolution]
    sccs: List[SCCResult]

    @property
    def failed_clauses(self) -> Set[int]:
        out: Set[int] = set()
        for r in self.sccs:
            out |= r.result.failed_clauses
        return out


def analyze(
    prog: Program,
    config: Optional[SolveConfig] = None,
    on_scc: Optional[Callable[[SCCResult], None]] = None,
) -> Analysis:
    """Solve SCCs bottom-up, publishing each predicate's projected solution."""
    from .report import project

    config = config or SolveConfig()
    unknown = prog.undefined_callees()
    if unknown and not config.allow_unknown:
        from .frontend import UnknownPredicateError

        raise UnknownPredicateError(unknown)
    sigs = make_signatures(prog, unknown)
    plan = condense_and_level(build_call_graph(prog))
    supply = NameSupply()
    sites = [0]
    solutions: Dict[PredKey, PredicateSolution] = {
        key: PredicateSolution(sigs[key], EquationSystem()) for key in unknown
    }
    sccs: List[SCCResult] = []
    for level in plan.levels:
        for scc in level:
            gen = generate_equations(scc, prog, sigs, solutions, supply, sites)
            try:
                res = solve(gen, config, supply)
            except SolverError as exc:
                names = ", ".join(f"{n}/{a}" for n, a in sorted(scc))
                exc.args = (f"in SCC {{{names}}}: {exc.args[0]}",) + exc.args[1:]
                raise
            for p in gen.predicates:
                proj = project(res.solved, sigs[p].vars, supply)
                solutions[p] = PredicateSolution(sigs[p], proj)
            item = SCCResult(gen.predicates, gen, res)
            sccs.append(item)
            if on_scc is not None:
                on_scc(item)
    return Analysis(prog, sigs, plan, solutions, sccs)

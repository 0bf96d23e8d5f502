"""Set expressions over finite ground terms and the rewrites that normalize them.

Expressions are immutable and hashable.  Unions and intersections are built
through :func:`union` and :func:`inter`, which flatten, drop ``Empty`` where
the algebra allows it, merge duplicates and sort operands, so two expressions
that differ only by associativity/commutativity/idempotence compare equal.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

LIST_CONS = "."
LIST_NIL = "[]"


class SetExpr:
    """Base class.  Subclasses carry a precomputed ``key`` used for ordering."""

    __slots__ = ()
    key: tuple

    def __lt__(self, other: "SetExpr") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, eq=True)
class Empty(SetExpr):
    key: tuple = field(default=(0,), init=False, repr=False, compare=False)

    def __repr__(self) -> str:
        return "Empty()"


@dataclass(frozen=True, eq=True)
class Var(SetExpr):
    name: str
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (1, self.name))


@dataclass(frozen=True, eq=True)
class Cons(SetExpr):
    functor: str
    args: Tuple[SetExpr, ...] = ()
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(
            self, "key", (2, self.functor, len(self.args), tuple(a.key for a in self.args))
        )

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True, eq=True)
class Inter(SetExpr):
    ops: Tuple[SetExpr, ...]
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (3, tuple(o.key for o in self.ops)))


@dataclass(frozen=True, eq=True)
class Union(SetExpr):
    ops: Tuple[SetExpr, ...]
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (4, tuple(o.key for o in self.ops)))


EMPTY = Empty()


def nil() -> Cons:
    return Cons(LIST_NIL, ())


def const(name: str) -> Cons:
    return Cons(name, ())


def union(*operands: SetExpr) -> SetExpr:
    seen: Dict[SetExpr, None] = {}
    for op in operands:
        if isinstance(op, Union):
            for sub in op.ops:
                seen[sub] = None
        elif not isinstance(op, Empty):
            seen[op] = None
    ops = sorted(seen)
    if not ops:
        return EMPTY
    if len(ops) == 1:
        return ops[0]
    return Union(tuple(ops))


def inter(*operands: SetExpr) -> SetExpr:
    if not operands:
        raise ValueError("empty intersection has no finite-term meaning")
    seen: Dict[SetExpr, None] = {}
    for op in operands:
        if isinstance(op, Empty):
            return EMPTY
        if isinstance(op, Inter):
            for sub in op.ops:
                seen[sub] = None
        else:
            seen[op] = None
    ops = sorted(seen)
    if len(ops) == 1:
        return ops[0]
    return Inter(tuple(ops))


# --------------------------------------------------------------------------
# Traversals


def variables(e: SetExpr) -> Set[str]:
    out: Set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Cons):
            stack.extend(x.args)
        elif isinstance(x, (Union, Inter)):
            stack.extend(x.ops)
    return out


def top_level_vars(e: SetExpr) -> Set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Union, Inter)):
        out: Set[str] = set()
        for op in e.ops:
            out |= top_level_vars(op)
        return out
    return set()


def substitute_top(e: SetExpr, mapping: Mapping[str, SetExpr]) -> SetExpr:
    """Replace variables occurring outside any constructor."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Union):
        return union(*(substitute_top(op, mapping) for op in e.ops))
    if isinstance(e, Inter):
        return inter(*(substitute_top(op, mapping) for op in e.ops))
    return e


def rename(e: SetExpr, mapping: Mapping[str, str]) -> SetExpr:
    """Rename variables everywhere, including under constructors."""
    if isinstance(e, Var):
        new = mapping.get(e.name)
        return e if new is None else Var(new)
    if isinstance(e, Cons):
        if not e.args:
            return e
        return Cons(e.functor, tuple(rename(a, mapping) for a in e.args))
    if isinstance(e, Union):
        return union(*(rename(op, mapping) for op in e.ops))
    if isinstance(e, Inter):
        return inter(*(rename(op, mapping) for op in e.ops))
    return e


# --------------------------------------------------------------------------
# Equation systems


class Origin(enum.Enum):
    ORIGINAL = "original"
    SIMP_CHILD = "simp-child"
    BIND = "bind"


@dataclass
class Provenance:
    origin: Origin
    clause: Optional[int] = None
    parent: Optional[str] = None


class NameSupply:
    """Fresh set-variable names.  Prefixed with ``_`` so they never clash with
    signature names (capitalized predicate prefixes) or renamed clause
    variables (``Name_cK``)."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start + 1)

    def fresh(self, prefix: str = "Y") -> str:
        return f"_{prefix}{next(self._counter)}"


class Memo:
    """Intersection table shared by a whole solve.

    Keys are frozensets of *base* variables: an argument that is itself a
    memoized intersection is replaced by its own key, so the number of keys is
    bounded by the powerset of the base variables.
    """

    def __init__(self, supply: NameSupply):
        self.supply = supply
        self.table: Dict[FrozenSet[str], str] = {}
        self.members: Dict[str, FrozenSet[str]] = {}
        self.parents: Dict[str, str] = {}
        self.allocations = 0

    def register(self, var: str, operands: Iterable[str]) -> None:
        key = self._flatten(operands)
        if len(key) > 1 and key not in self.table:
            self.table[key] = var
            self.members[var] = key

    def _flatten(self, operands: Iterable[str]) -> FrozenSet[str]:
        out: Set[str] = set()
        for v in operands:
            out |= self.members.get(v, {v})
        return frozenset(out)

    def intersection(self, operands: Iterable[str], owner: Optional[str]):
        """Return ``(var, new_equation_or_None)`` for the intersection of ``operands``."""
        ops = frozenset(operands)
        if len(ops) == 1:
            return next(iter(ops)), None
        key = self._flatten(ops)
        if len(key) == 1:
            return next(iter(key)), None
        hit = self.table.get(key)
        if hit is not None:
            return hit, None
        var = self.supply.fresh("M")
        self.table[key] = var
        self.members[var] = key
        if owner is not None:
            self.parents[var] = owner
        self.allocations += 1
        return var, (var, inter(*(Var(v) for v in sorted(key))))


@dataclass
class EquationSystem:
    """Standard-form system: at most one equation per left-hand side."""

    equations: Dict[str, SetExpr] = field(default_factory=dict)
    provenance: Dict[str, Provenance] = field(default_factory=dict)
    memo: Optional[Memo] = None

    def __contains__(self, var: str) -> bool:
        return var in self.equations

    def __getitem__(self, var: str) -> SetExpr:
        return self.equations[var]

    def __iter__(self):
        return iter(self.equations)

    def __len__(self) -> int:
        return len(self.equations)

    def items(self):
        return self.equations.items()

    def add(self, var: str, rhs: SetExpr, provenance: Optional[Provenance] = None) -> None:
        if var in self.equations:
            raise ValueError(f"duplicate equation for {var}")
        self.equations[var] = rhs
        if provenance is not None:
            self.provenance[var] = provenance

    def all_vars(self) -> Set[str]:
        out = set(self.equations)
        for rhs in self.equations.values():
            out |= variables(rhs)
        return out

    def free_vars(self) -> Set[str]:
        return self.all_vars() - set(self.equations)

    def copy(self) -> "EquationSystem":
        return EquationSystem(dict(self.equations), dict(self.provenance), self.memo)


# --------------------------------------------------------------------------
# Bounded-depth semantics


class UnboundVariableError(KeyError):
    """A free variable reachable from the queried expression has no assignment."""


GroundTerm = Tuple  # (functor, arg, arg, ...)


def term_depth(t: GroundTerm) -> int:
    if len(t) == 1:
        return 1
    return 1 + max(term_depth(a) for a in t[1:])


def _eval(e: SetExpr, env: Mapping[str, FrozenSet], depth: int) -> FrozenSet:
    if isinstance(e, Empty):
        return frozenset()
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Cons):
        if depth < 1:
            return frozenset()
        if not e.args:
            return frozenset({(e.functor,)})
        if depth < 2:
            return frozenset()
        argsets = [
            frozenset(t for t in _eval(a, env, depth) if term_depth(t) <= depth - 1)
            for a in e.args
        ]
        return frozenset((e.functor,) + combo for combo in itertools.product(*argsets))
    if isinstance(e, Union):
        out: Set = set()
        for op in e.ops:
            out |= _eval(op, env, depth)
        return frozenset(out)
    if isinstance(e, Inter):
        sets = [_eval(op, env, depth) for op in e.ops]
        return frozenset.intersection(*sets)
    raise TypeError(e)


def solve_meanings(
    sys: Mapping[str, SetExpr], sigma: Mapping[str, Iterable], depth: int
) -> Dict[str, FrozenSet]:
    """Least solution of ``sys`` restricted to terms of depth <= ``depth``.

    Kleene iteration from the empty assignment; the truncated operator is
    monotone over a finite lattice so it terminates.
    """
    env: Dict[str, FrozenSet] = {
        k: frozenset(t for t in v if term_depth(t) <= depth) for k, v in sigma.items()
    }
    eqs = dict(sys.equations) if isinstance(sys, EquationSystem) else dict(sys)
    for var in eqs:
        env[var] = frozenset()
    changed = True
    while changed:
        changed = False
        for var, rhs in eqs.items():
            val = _eval(rhs, env, depth)
            if val != env[var]:
                env[var] = val
                changed = True
    return env


def meaning(
    e: SetExpr,
    sigma: Mapping[str, Iterable],
    sys: Optional[Mapping[str, SetExpr]] = None,
    depth: int = 3,
) -> FrozenSet:
    """Terms of depth <= ``depth`` denoted by ``e``.

    Variables defined in ``sys`` take their least-solution value; every other
    variable must be bound in ``sigma``.
    """
    env = solve_meanings(sys or {}, sigma, depth)
    return frozenset(t for t in _eval(e, env, depth) if term_depth(t) <= depth)


def herbrand_universe(signature: Mapping[str, int], depth: int) -> FrozenSet:
    """All ground terms over ``signature`` (functor -> arity) up to ``depth``."""
    level: Set = {(f,) for f, n in signature.items() if n == 0}
    for _ in range(depth - 1):
        new = set(level)
        for f, n in signature.items():
            if n:
                for combo in itertools.product(sorted(level), repeat=n):
                    new.add((f,) + combo)
        level = new
    return frozenset(level)


# --------------------------------------------------------------------------
# Top-level form


def to_top_level_form(
    sys: EquationSystem, supply: NameSupply
) -> EquationSystem:
    """Name every non-variable constructor argument with a fresh equation."""
    out = EquationSystem(memo=sys.memo)
    pending: List[Tuple[str, SetExpr, Optional[Provenance]]] = [
        (v, e, sys.provenance.get(v)) for v, e in sys.items()
    ]
    for var, rhs, prov in pending:
        pending_new: List[Tuple[str, SetExpr]] = []

        def flatten(e: SetExpr, under_cons: bool) -> SetExpr:
            if isinstance(e, Var):
                return e
            if under_cons:
                y = supply.fresh("Y")
                pending_new.append((y, e))
                return Var(y)
            if isinstance(e, Cons):
                return Cons(e.functor, tuple(flatten(a, True) for a in e.args))
            if isinstance(e, Union):
                return union(*(flatten(op, False) for op in e.ops))
            if isinstance(e, Inter):
                return inter(*(flatten(op, False) for op in e.ops))
            return e

        out.add(var, flatten(rhs, False), prov)
        child_prov = Provenance(Origin.ORIGINAL, prov.clause if prov else None)
        for y, e in pending_new:
            pending.append((y, e, child_prov))
    return out


def is_top_level(e: SetExpr) -> bool:
    if isinstance(e, Cons):
        return all(isinstance(a, Var) for a in e.args)
    if isinstance(e, (Union, Inter)):
        return all(is_top_level(op) for op in e.ops)
    return True


# --------------------------------------------------------------------------
# DNF

Conjunct = FrozenSet[SetExpr]
Dnf = FrozenSet[Conjunct]


def dnf_conjuncts(e: SetExpr) -> Dnf:
    """Union-of-intersections as a set of leaf sets.  ``frozenset()`` is ∅."""
    if isinstance(e, Empty):
        return frozenset()
    if isinstance(e, (Var, Cons)):
        if isinstance(e, Cons) and not is_top_level(e):
            e = Cons(e.functor, tuple(dnf(a) for a in e.args))
        return frozenset({frozenset({e})})
    if isinstance(e, Union):
        out: Set[Conjunct] = set()
        for op in e.ops:
            out |= dnf_conjuncts(op)
        return frozenset(out)
    if isinstance(e, Inter):
        acc: Set[Conjunct] = {frozenset()}
        for op in e.ops:
            parts = dnf_conjuncts(op)
            acc = {a | b for a in acc for b in parts}
            if not acc:
                break
        return frozenset(acc)
    raise TypeError(e)


def from_conjuncts(conjs: Iterable[Conjunct]) -> SetExpr:
    return union(*(inter(*c) if c else EMPTY for c in conjs))


def dnf(e: SetExpr) -> SetExpr:
    """Distribute intersections over unions."""
    return from_conjuncts(dnf_conjuncts(e))


# --------------------------------------------------------------------------
# SIMP


@dataclass
class SimpResult:
    rhs: SetExpr
    new_equations: List[Tuple[str, SetExpr]]


def _simp_conjunct(
    conj: Conjunct,
    memo: Optional[Memo],
    is_empty: Callable[[str], bool],
    owner: Optional[str],
    new_eqs: List[Tuple[str, SetExpr]],
) -> Optional[Conjunct]:
    if EMPTY in conj:
        return None
    conses = [l for l in conj if isinstance(l, Cons)]
    rest = [l for l in conj if not isinstance(l, Cons)]
    if conses:
        f, n = conses[0].functor, conses[0].arity
        if any(c.functor != f or c.arity != n for c in conses[1:]):
            return None
        if len(conses) > 1:
            args = []
            for j in range(n):
                column = {c.args[j] for c in conses}
                if len(column) == 1:
                    args.append(next(iter(column)))
                elif memo is not None and all(isinstance(a, Var) for a in column):
                    var, eq = memo.intersection((a.name for a in column), owner)
                    if eq is not None:
                        new_eqs.append(eq)
                    args.append(Var(var))
                else:
                    args.append(dnf(inter(*column)))
            merged = Cons(f, tuple(args))
        else:
            merged = conses[0]
        if any(isinstance(a, Var) and is_empty(a.name) for a in merged.args):
            return None
        if any(isinstance(a, Empty) for a in merged.args):
            return None
        rest.append(merged)
    return frozenset(rest)


def simp_conjuncts(
    conjs: Dnf,
    memo: Optional[Memo] = None,
    is_empty: Callable[[str], bool] = lambda v: False,
    owner: Optional[str] = None,
    new_eqs: Optional[List[Tuple[str, SetExpr]]] = None,
) -> Dnf:
    if new_eqs is None:
        new_eqs = []
    kept: Set[Conjunct] = set()
    for c in conjs:
        s = _simp_conjunct(c, memo, is_empty, owner, new_eqs)
        if s is not None:
            kept.add(s)
    # subsumption: e1 ∪ (e1 ∩ e2) ⇝ e1
    ordered = sorted(kept, key=len)
    survivors: List[Conjunct] = []
    for c in ordered:
        if not any(s < c for s in survivors):
            survivors.append(c)
    return frozenset(survivors)


def simp(
    lhs: Optional[str],
    rhs: SetExpr,
    memo: Optional[Memo] = None,
    is_empty: Callable[[str], bool] = lambda v: False,
) -> SimpResult:
    """Apply the simplification rules to a DNF right-hand side until stable.

    Intersections of same-functor constructors introduce (or reuse, via
    ``memo``) variables for the argument-wise intersections; those equations
    are returned for the caller to schedule.
    """
    new_eqs: List[Tuple[str, SetExpr]] = []
    conjs = dnf_conjuncts(rhs)
    while True:
        nxt = simp_conjuncts(conjs, memo, is_empty, lhs, new_eqs)
        if nxt == conjs:
            break
        conjs = nxt
    return SimpResult(from_conjuncts(conjs), new_eqs)


# --------------------------------------------------------------------------
# Form classification


class FormClass(enum.IntEnum):
    GENERAL = 0
    TOP_LEVEL = 1
    PARAMETERIZED = 2
    REGULAR = 3
    LEAF_LINEAR = 4


def _is_flat_cons(e: SetExpr) -> bool:
    return isinstance(e, Cons) and all(isinstance(a, Var) for a in e.args)


def _is_param_conjunct(e: SetExpr) -> bool:
    if isinstance(e, Var) or _is_flat_cons(e):
        return True
    if isinstance(e, Inter):
        conses = [o for o in e.ops if not isinstance(o, Var)]
        return len(conses) <= 1 and all(_is_flat_cons(c) for c in conses)
    return False


def classify_expr(e: SetExpr) -> FormClass:
    """Most specific grammar class of a single expression."""
    if isinstance(e, Empty):
        return FormClass.REGULAR
    ops = e.ops if isinstance(e, Union) else (e,)
    if all(isinstance(o, Var) or _is_flat_cons(o) for o in ops):
        return FormClass.REGULAR
    if all(_is_param_conjunct(o) for o in ops):
        return FormClass.PARAMETERIZED
    if is_top_level(e):
        return FormClass.TOP_LEVEL
    return FormClass.GENERAL


def classify_system(sys: Mapping[str, SetExpr]) -> FormClass:
    eqs = sys.equations if isinstance(sys, EquationSystem) else sys
    classes = [classify_expr(e) for e in eqs.values()]
    if not classes:
        return FormClass.LEAF_LINEAR
    worst = min(classes)
    if worst >= FormClass.PARAMETERIZED:
        defined = set(eqs)
        if all(not (top_level_vars(e) & defined) for e in eqs.values()):
            free = set()
            for e in eqs.values():
                free |= variables(e)
            free -= defined
            if worst == FormClass.REGULAR and not free:
                return FormClass.REGULAR
            return FormClass.LEAF_LINEAR
        return worst
    return worst


def classify(obj) -> FormClass:
    if isinstance(obj, SetExpr):
        return classify_expr(obj)
    return classify_system(obj)


# --------------------------------------------------------------------------
# Rendering


def _atom(name: str) -> str:
    if name == LIST_NIL:
        return name
    if name and (name[0].islower()) and all(ch.isalnum() or ch == "_" for ch in name):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def display_key(e: SetExpr) -> tuple:
    # parameters first, then constants, then compound alternatives
    if isinstance(e, Var):
        return (0, e.key)
    if isinstance(e, Cons):
        return (1 if not e.args else 2, e.functor != LIST_NIL, e.key)
    return (3, e.key)


def render(e: SetExpr, names: Optional[Mapping[str, str]] = None, union_sym: str = " \\/ ") -> str:
    names = names or {}

    def go(x: SetExpr, prec: int) -> str:
        if isinstance(x, Empty):
            return "0"
        if isinstance(x, Var):
            return names.get(x.name, x.name)
        if isinstance(x, Cons):
            if x.functor == LIST_CONS and x.arity == 2:
                items = []
                while isinstance(x, Cons) and x.functor == LIST_CONS and x.arity == 2:
                    items.append(go(x.args[0], 1))
                    x = x.args[1]
                if x == Cons(LIST_NIL, ()):
                    return "[" + ",".join(items) + "]"
                return "[" + ",".join(items) + "|" + go(x, 1) + "]"
            if not x.args:
                return _atom(x.functor)
            return f"{_atom(x.functor)}({','.join(go(a, 0) for a in x.args)})"
        if isinstance(x, Inter):
            s = " /\\ ".join(go(o, 2) for o in x.ops)
            return f"({s})" if prec > 1 else s
        if isinstance(x, Union):
            s = union_sym.join(go(o, 1) for o in sorted(x.ops, key=display_key))
            return f"({s})" if prec > 0 else s
        raise TypeError(x)

    return go(e, 0)


def render_system(sys: Mapping[str, SetExpr], names: Optional[Mapping[str, str]] = None) -> str:
    eqs = sys.equations if isinstance(sys, EquationSystem) else sys
    names = names or {}
    return "\n".join(f"{names.get(v, v)} = {render(e, names)}." for v, e in eqs.items())

"""Projection of solved systems onto signatures and type reports."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from . import setexpr as sx
from .frontend import PredKey, Signature
from .setexpr import EMPTY, Cons, EquationSystem, NameSupply, SetExpr, Var, inter, union


def _reachable(eqs: Mapping[str, SetExpr], roots: Iterable[str]) -> List[str]:
    order: List[str] = []
    seen: Set[str] = set()
    stack = list(roots)[::-1]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        order.append(v)
        if v in eqs:
            for u in sorted(sx.variables(eqs[v]), reverse=True):
                if u not in seen:
                    stack.append(u)
    return order


def _chase_aliases(eqs: Dict[str, SetExpr], roots: Sequence[str]) -> Dict[str, SetExpr]:
    root_set = set(roots)
    changed = True
    while changed:
        changed = False
        for v in list(eqs):
            rhs = eqs.get(v)
            if not isinstance(rhs, Var):
                continue
            u = rhs.name
            if u == v:
                eqs[v] = EMPTY
            elif v not in root_set:
                del eqs[v]
                eqs = {k: sx.rename(e, {v: u}) for k, e in eqs.items()}
            elif u in eqs:
                eqs[v] = eqs[u]
            elif u not in root_set:
                # root aliased to a parameter: the root itself becomes the parameter
                del eqs[v]
                eqs = {k: sx.rename(e, {u: v}) for k, e in eqs.items()}
            else:
                continue
            changed = True
    return eqs


def _factor(eqs: Dict[str, SetExpr], supply: NameSupply) -> Dict[str, SetExpr]:
    """f(..,a,..) ∪ f(..,b,..) ⇝ f(..,u,..) with u = a ∪ b, when only one argument differs."""
    unions: Dict[FrozenSet[str], str] = {}
    members: Dict[str, FrozenSet[str]] = {}

    def union_var(a: str, b: str) -> str:
        key = frozenset(members.get(a, {a}) | members.get(b, {b}))
        if len(key) == 1:
            return next(iter(key))
        hit = unions.get(key)
        if hit is not None:
            return hit
        u = supply.fresh("U")
        unions[key] = u
        members[u] = key
        eqs[u] = union(*(eqs.get(m, Var(m)) for m in sorted(key)))
        return u

    changed = True
    while changed:
        changed = False
        for v in list(eqs):
            conjs = set(sx.dnf_conjuncts(eqs[v]))
            merged = True
            while merged:
                merged = False
                pure = sorted(
                    (c for c in conjs if len(c) == 1 and isinstance(next(iter(c)), Cons)),
                    key=lambda c: next(iter(c)).key,
                )
                for i, ci in enumerate(pure):
                    a = next(iter(ci))
                    for cj in pure[i + 1:]:
                        b = next(iter(cj))
                        if a.functor != b.functor or a.arity != b.arity:
                            continue
                        diff = [k for k in range(a.arity) if a.args[k] != b.args[k]]
                        if len(diff) != 1:
                            continue
                        k = diff[0]
                        if not (isinstance(a.args[k], Var) and isinstance(b.args[k], Var)):
                            continue
                        u = union_var(a.args[k].name, b.args[k].name)
                        args = list(a.args)
                        args[k] = Var(u)
                        conjs -= {ci, cj}
                        conjs.add(frozenset({Cons(a.functor, tuple(args))}))
                        merged = changed = True
                        break
                    if merged:
                        break
            new = sx.from_conjuncts(conjs)
            if new != eqs[v]:
                eqs[v] = new
    return eqs


def _bisimulation(eqs: Mapping[str, SetExpr]) -> Dict[str, int]:
    cls = {v: 0 for v in eqs}
    n_classes = 1

    def leaf(e: SetExpr):
        if isinstance(e, Var):
            return ("c", cls[e.name]) if e.name in cls else ("f", e.name)
        if isinstance(e, Cons):
            return ("k", e.functor, tuple(leaf(a) for a in e.args))
        if isinstance(e, sx.Empty):
            return ("0",)
        return ("x", sx.render(e))

    while True:
        sigs = {}
        for v, e in eqs.items():
            conjs = frozenset(frozenset(leaf(l) for l in c) for c in sx.dnf_conjuncts(e))
            sigs[v] = (cls[v], conjs)
        ids: Dict[object, int] = {}
        new = {v: ids.setdefault(sigs[v], len(ids)) for v in sorted(eqs)}
        if len(ids) == n_classes:
            return new
        cls, n_classes = new, len(ids)


def project(S, roots: Sequence[str], supply: Optional[NameSupply] = None) -> EquationSystem:
    """Restrict a solved system to what the roots depend on, in readable form.

    Aliases are chased, single-argument differences between constructor
    alternatives are factored out, and bisimilar variables are merged.  The
    least-solution meaning of every root is unchanged.
    """
    supply = supply or NameSupply(90_000)
    base = S.equations if isinstance(S, EquationSystem) else S
    roots = list(roots)
    eqs = {v: base[v] for v in _reachable(base, roots) if v in base}
    eqs = _chase_aliases(eqs, roots)
    eqs = {v: eqs[v] for v in _reachable(eqs, roots) if v in eqs}
    eqs = _factor(eqs, supply)
    cls = _bisimulation(eqs)
    reps: Dict[int, str] = {}
    for r in roots:
        if r in cls:
            reps.setdefault(cls[r], r)
    for v in sorted(eqs):
        reps.setdefault(cls[v], v)
    out: Dict[str, SetExpr] = {}
    for v, e in eqs.items():
        mapping = {u: reps[cls[u]] for u in sx.variables(e) if u in cls}
        for u in list(mapping):
            if v in cls and cls[u] == cls[v] and v in roots:
                mapping[u] = v
        out[v] = sx.rename(e, mapping)
    keep = [v for v in _reachable(out, roots) if v in out]
    return EquationSystem({v: out[v] for v in keep})


# --------------------------------------------------------------------------
# Naming and printing

_PARAM_LETTERS = ("X", "Y", "Z", "W", "V", "U")


def _param_name(i: int) -> str:
    letter = _PARAM_LETTERS[i % len(_PARAM_LETTERS)]
    n = i // len(_PARAM_LETTERS)
    return letter if n == 0 else f"{letter}{n}"


class Namer:
    """Display names shared by the predicates of one SCC."""

    def __init__(self, reserved: Iterable[str] = ()):
        self.names: Dict[str, str] = {}
        self.taken: Set[str] = set(reserved)
        self._params = 0
        self._internal = 0

    def param(self, v: str) -> str:
        if v not in self.names:
            while True:
                cand = _param_name(self._params)
                self._params += 1
                if cand not in self.taken:
                    break
            self.names[v] = cand
            self.taken.add(cand)
        return self.names[v]

    def internal(self, v: str) -> str:
        if v not in self.names:
            while True:
                self._internal += 1
                cand = f"T{self._internal}"
                if cand not in self.taken:
                    break
            self.names[v] = cand
            self.taken.add(cand)
        return self.names[v]

    def assign(self, sys: EquationSystem, roots: Sequence[str]) -> Dict[str, str]:
        for r in roots:
            self.names.setdefault(r, r)
            self.taken.add(r)
        for v in _reachable(sys.equations, roots):
            if v in roots:
                continue
            if v in sys:
                self.internal(v)
            else:
                self.param(v)
        return self.names


def render_type(e: SetExpr, names: Mapping[str, str]) -> str:
    return sx.render(e, names, union_sym=" | ")


def type_lines(sys: EquationSystem, roots: Sequence[str], names: Mapping[str, str]) -> List[str]:
    lines = []
    for v in _reachable(sys.equations, roots):
        if v in sys:
            lines.append(f":- type {names.get(v, v)} -> {render_type(sys[v], names)}.")
        elif v in roots:
            lines.append(f":- type {names.get(v, v)} -> {names.get(v, v)}.")
    return lines


def prettify(sys: EquationSystem, sig: Signature, namer: Optional[Namer] = None) -> str:
    namer = namer or Namer(sig.vars)
    names = namer.assign(sys, sig.vars)
    return "\n".join(type_lines(sys, sig.vars, names))


# --------------------------------------------------------------------------
# Type-syntax parser (inverse of prettify)

_TYPE_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<neck>:-)|(?P<and>/\\)|(?P<var>[A-Z_][A-Za-z0-9_]*)"
    r"|(?P<atom>[a-z][A-Za-z0-9_]*)|(?P<zero>0)|(?P<qatom>'(?:[^'\\]|\\.)*')"
    r"|(?P<nil>\[\s*\])|(?P<p>[()\[\],|.]))"
)


class TypeSyntaxError(ValueError):
    pass


def parse_types(text: str) -> EquationSystem:
    """Parse ``:- type N -> alt | alt.`` lines back into a system.

    A line ``:- type A -> A.`` declares ``A`` as a free parameter.
    """
    toks: List[Tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TYPE_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TypeSyntaxError(f"bad type syntax at {text[pos:pos + 20]!r}")
        toks.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    toks.append(("eof", ""))
    i = 0

    def peek():
        return toks[i]

    def take(kind=None, text=None):
        nonlocal i
        tok = toks[i]
        if (kind and tok[0] != kind) or (text and tok[1] != text):
            raise TypeSyntaxError(f"expected {text or kind}, got {tok[1]!r}")
        i += 1
        return tok

    def leaf() -> SetExpr:
        kind, val = peek()
        if kind == "var":
            take()
            return Var(val)
        if kind == "zero":
            take()
            return EMPTY
        if kind == "nil":
            take()
            return sx.nil()
        if kind in ("atom", "qatom"):
            take()
            name = val if kind == "atom" else re.sub(r"\\(.)", r"\1", val[1:-1])
            if peek() == ("p", "("):
                take()
                args = [alt()]
                while peek() == ("p", ","):
                    take()
                    args.append(alt())
                take("p", ")")
                return Cons(name, tuple(args))
            return Cons(name, ())
        if (kind, val) == ("p", "["):
            take()
            items = [conj()]
            while peek() == ("p", ","):
                take()
                items.append(conj())
            tail: SetExpr = sx.nil()
            if peek() == ("p", "|"):
                take()
                tail = conj()
            take("p", "]")
            for item in reversed(items):
                tail = Cons(sx.LIST_CONS, (item, tail))
            return tail
        if (kind, val) == ("p", "("):
            take()
            e = alt()
            take("p", ")")
            return e
        raise TypeSyntaxError(f"unexpected {val!r}")

    def conj() -> SetExpr:
        ops = [leaf()]
        while peek()[0] == "and":
            take()
            ops.append(leaf())
        return inter(*ops)

    def alt() -> SetExpr:
        ops = [conj()]
        while peek() == ("p", "|"):
            take()
            ops.append(conj())
        return union(*ops)

    out = EquationSystem()
    while peek()[0] != "eof":
        take("neck")
        take("atom", "type")
        name = take("var")[1]
        take("arrow")
        e = alt()
        take("p", ".")
        if e != Var(name):
            out.add(name, e)
    return out


# --------------------------------------------------------------------------
# Reports


@dataclass
class ArgReport:
    position: int
    symbol: str
    any: bool
    empty: bool


@dataclass
class PredicateReport:
    predicate: PredKey
    args: List[ArgReport]
    types: List[Tuple[str, List[str]]]
    parameters: List[str]
    text: str

    @property
    def stats(self) -> Dict[str, int]:
        return {
            "descriptors": len(self.args),
            "nonAny": sum(not a.any for a in self.args),
            "emptyDetected": sum(a.empty for a in self.args),
        }

    def to_json(self) -> dict:
        name, arity = self.predicate
        return {
            "predicate": name,
            "arity": arity,
            "args": [
                {"position": a.position, "typeSymbol": a.symbol, "any": a.any, "empty": a.empty}
                for a in self.args
            ],
            "types": [{"symbol": s, "alternatives": alts} for s, alts in self.types],
            "parameters": self.parameters,
            "stats": self.stats,
        }


@dataclass
class TypeReport:
    predicates: List[PredicateReport] = field(default_factory=list)

    def get(self, key: PredKey) -> PredicateReport:
        for p in self.predicates:
            if p.predicate == key:
                return p
        raise KeyError(key)

    @property
    def stats(self) -> Dict[str, int]:
        out = {"descriptors": 0, "nonAny": 0, "emptyDetected": 0}
        for p in self.predicates:
            for k, v in p.stats.items():
                out[k] += v
        return out

    def to_json(self) -> list:
        return [p.to_json() for p in self.predicates]

    def to_text(self) -> str:
        blocks = []
        for p in self.predicates:
            name, arity = p.predicate
            blocks.append(f"% {name}/{arity}\n{p.text}" if p.text else f"% {name}/{arity}")
        return "\n".join(blocks)


def classify_predicate(
    sig: Signature, sys: EquationSystem, namer: Optional[Namer] = None
) -> PredicateReport:
    from .solver import is_empty

    namer = namer or Namer(sig.vars)
    names = namer.assign(sys, sig.vars)
    args = []
    for i, v in enumerate(sig.vars, start=1):
        args.append(
            ArgReport(i, names.get(v, v), any=v not in sys, empty=is_empty(v, sys))
        )
    types = []
    params = []
    for v in _reachable(sys.equations, sig.vars):
        if v in sys:
            e = sys[v]
            ops = e.ops if isinstance(e, sx.Union) else (e,)
            alts = [render_type(o, names) for o in sorted(ops, key=sx.display_key)]
            types.append((names.get(v, v), alts))
        else:
            params.append(names.get(v, v))
    return PredicateReport(sig.predicate, args, types, params, "\n".join(type_lines(sys, sig.vars, names)))


def classify(analysis, predicates: Optional[Iterable[PredKey]] = None) -> TypeReport:
    """Type report over ``analysis`` (all predicates by default, program order)."""
    wanted = list(predicates) if predicates is not None else list(analysis.program.predicates)
    namers: Dict[PredKey, Namer] = {}
    for scc in analysis.sccs:
        reserved = [v for p in scc.predicates for v in analysis.signatures[p].vars]
        shared = Namer(reserved)
        for p in scc.predicates:
            namers[p] = shared
    report = TypeReport()
    for key in wanted:
        sol = analysis.solutions[key]
        report.predicates.append(classify_predicate(sol.signature, sol.system, namers.get(key)))
    return report

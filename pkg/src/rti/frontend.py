"""Pure Edinburgh-style clause syntax: parsing and program preparation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .setexpr import LIST_CONS, LIST_NIL


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnknownPredicateError(Exception):
    def __init__(self, missing: Sequence[Tuple[str, int]]):
        names = ", ".join(f"{n}/{a}" for n, a in missing)
        super().__init__(f"unknown predicate(s): {names}")
        self.missing = list(missing)


# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Variable, Compound]
PredKey = Tuple[str, int]


def term_vars(t: Term) -> List[str]:
    """Variables of ``t`` in left-to-right order of first occurrence."""
    out: Dict[str, None] = {}

    def go(x: Term) -> None:
        if isinstance(x, Variable):
            out[x.name] = None
        else:
            for a in x.args:
                go(a)

    go(t)
    return list(out)


def make_list(items: Sequence[Term], tail: Optional[Term] = None) -> Term:
    out: Term = tail if tail is not None else Compound(LIST_NIL)
    for item in reversed(items):
        out = Compound(LIST_CONS, (item, out))
    return out


_PLAIN_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def format_atom_name(name: str) -> str:
    if name == LIST_NIL or _PLAIN_ATOM.match(name) or name.isdigit():
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t: Term) -> str:
    if isinstance(t, Variable):
        return t.name
    if t.functor == LIST_CONS and t.arity == 2:
        items = []
        cur: Term = t
        while isinstance(cur, Compound) and cur.functor == LIST_CONS and cur.arity == 2:
            items.append(format_term(cur.args[0]))
            cur = cur.args[1]
        if isinstance(cur, Compound) and cur.functor == LIST_NIL and not cur.args:
            return "[" + ",".join(items) + "]"
        return "[" + ",".join(items) + "|" + format_term(cur) + "]"
    if not t.args:
        return format_atom_name(t.functor)
    return f"{format_atom_name(t.functor)}({','.join(format_term(a) for a in t.args)})"


# --------------------------------------------------------------------------
# Clauses and programs


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: Tuple[Term, ...] = ()

    @property
    def key(self) -> PredKey:
        return (self.predicate, len(self.args))

    def __str__(self) -> str:
        if not self.args:
            return format_atom_name(self.predicate)
        return f"{format_atom_name(self.predicate)}({','.join(format_term(a) for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: Tuple[Atom, ...] = ()
    index: int = 0
    # (fresh head variable, ground term) pairs introduced by normalize_heads
    bindings: Tuple[Tuple[str, Term], ...] = ()
    line: int = 0

    def variables(self) -> List[str]:
        out: Dict[str, None] = {}
        for a in (self.head,) + self.body:
            for t in a.args:
                for v in term_vars(t):
                    out[v] = None
        for v, _ in self.bindings:
            out[v] = None
        return list(out)

    def head_variables(self) -> List[str]:
        out: Dict[str, None] = {}
        for t in self.head.args:
            for v in term_vars(t):
                out[v] = None
        return list(out)

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(b) for b in self.body)}."


@dataclass
class Program:
    clauses: List[Clause] = field(default_factory=list)
    entries: List[Atom] = field(default_factory=list)

    @property
    def predicates(self) -> List[PredKey]:
        seen: Dict[PredKey, None] = {}
        for c in self.clauses:
            seen[c.head.key] = None
        return list(seen)

    def clauses_for(self, key: PredKey) -> List[Clause]:
        return [c for c in self.clauses if c.head.key == key]

    def undefined_callees(self) -> List[PredKey]:
        defined = set(self.predicates)
        out: Dict[PredKey, None] = {}
        for c in self.clauses:
            for b in c.body:
                if b.key not in defined:
                    out[b.key] = None
        return list(out)

    def __str__(self) -> str:
        lines = [f":- entry {e}." for e in self.entries]
        lines += [str(c) for c in self.clauses]
        return "\n".join(lines) + ("\n" if lines else "")


# --------------------------------------------------------------------------
# Lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<neck>:-)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<number>\d+)
  | (?P<qatom>'(?:[^'\\]|\\.)*')
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<nil>\[\s*\])
  | (?P<punct>[()\[\],|])
  | (?P<end>\.(?=\s|%|$))
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> List[_Tok]:
    toks: List[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment", "block"):
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.anon = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Tok:
        tok = self.take()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def program(self) -> Program:
        prog = Program()
        while not self.at("eof"):
            if self.at("neck"):
                start = self.take()
                name = self.peek()
                if name.kind == "atom" and name.text == "entry":
                    self.take()
                    prog.entries.append(self.atom())
                    self.expect("end")
                else:
                    raise ParseError(f"unsupported directive {name.text!r}", start.line, start.col)
                continue
            line = self.peek().line
            head = self.atom()
            body: List[Atom] = []
            if self.at("neck"):
                self.take()
                body.append(self.atom())
                while self.at("punct", ","):
                    self.take()
                    body.append(self.atom())
            self.expect("end")
            prog.clauses.append(
                Clause(head, tuple(body), index=len(prog.clauses) + 1, line=line)
            )
        return prog

    def atom(self) -> Atom:
        tok = self.take()
        if tok.kind == "atom":
            name = tok.text
        elif tok.kind == "qatom":
            name = _unquote(tok.text)
        else:
            raise ParseError(f"expected predicate name, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        args: Tuple[Term, ...] = ()
        if self.at("punct", "("):
            args = self.args()
        return Atom(name, args)

    def args(self) -> Tuple[Term, ...]:
        self.expect("punct", "(")
        out = [self.term()]
        while self.at("punct", ","):
            self.take()
            out.append(self.term())
        self.expect("punct", ")")
        return tuple(out)

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "var":
            self.take()
            if tok.text == "_":
                self.anon += 1
                return Variable(f"_G{self.anon}")
            return Variable(tok.text)
        if tok.kind in ("atom", "qatom"):
            self.take()
            name = tok.text if tok.kind == "atom" else _unquote(tok.text)
            if self.at("punct", "("):
                return Compound(name, self.args())
            return Compound(name)
        if tok.kind == "number":
            self.take()
            return Compound(str(int(tok.text)))
        if tok.kind == "string":
            self.take()
            return make_list([Compound(ch) for ch in _unquote(tok.text)])
        if tok.kind == "nil":
            self.take()
            return Compound(LIST_NIL)
        if tok.kind == "punct" and tok.text == "[":
            self.take()
            items = [self.term()]
            while self.at("punct", ","):
                self.take()
                items.append(self.term())
            tail = None
            if self.at("punct", "|"):
                self.take()
                tail = self.term()
            self.expect("punct", "]")
            return make_list(items, tail)
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col)


def parse_program(text: str) -> Program:
    """Parse clauses and ``:- entry`` directives."""
    return _Parser(text).program()


def parse_atom(text: str) -> Atom:
    p = _Parser(text.strip().rstrip(".") + " .")
    atom = p.atom()
    p.expect("end")
    p.expect("eof")
    return atom


def check_program(prog: Program, allow_unknown: bool = False) -> List[PredKey]:
    """Return undefined callees; raise unless ``allow_unknown``."""
    missing = prog.undefined_callees()
    if missing and not allow_unknown:
        raise UnknownPredicateError(missing)
    return missing


# --------------------------------------------------------------------------
# Program preparation


def _rename_term(t: Term, mapping: Dict[str, str]) -> Term:
    if isinstance(t, Variable):
        return Variable(mapping[t.name])
    if not t.args:
        return t
    return Compound(t.functor, tuple(_rename_term(a, mapping) for a in t.args))


def _rename_atom(a: Atom, mapping: Dict[str, str]) -> Atom:
    return Atom(a.predicate, tuple(_rename_term(t, mapping) for t in a.args))


def rename_apart(prog: Program) -> Program:
    """Suffix every clause variable with ``_c<clause index>``."""
    clauses = []
    for c in prog.clauses:
        mapping = {v: f"{v}_c{c.index}" for v in c.variables()}
        clauses.append(
            replace(
                c,
                head=_rename_atom(c.head, mapping),
                body=tuple(_rename_atom(b, mapping) for b in c.body),
                bindings=tuple((mapping[v], t) for v, t in c.bindings),
            )
        )
    return Program(clauses, list(prog.entries))


def normalize_heads(prog: Program) -> Program:
    """Replace ground head arguments by fresh variables bound in the body.

    A clause whose head has no variables gives failure propagation nothing to
    attach to; after this pass each formerly ground argument is a variable
    ``H<k>_c<i>`` with the binding recorded on the clause.
    """
    clauses = []
    for c in prog.clauses:
        args = []
        bindings = list(c.bindings)
        suffix = f"_c{c.index}"
        taken = set(c.variables())
        k = 0
        for t in c.head.args:
            if term_vars(t):
                args.append(t)
                continue
            k += 1
            name = f"H{k}{suffix}"
            while name in taken:
                k += 1
                name = f"H{k}{suffix}"
            taken.add(name)
            args.append(Variable(name))
            bindings.append((name, t))
        clauses.append(replace(c, head=Atom(c.head.predicate, tuple(args)), bindings=tuple(bindings)))
    return Program(clauses, list(prog.entries))


@dataclass(frozen=True)
class Signature:
    predicate: PredKey
    vars: Tuple[str, ...]

    def __str__(self) -> str:
        name, _ = self.predicate
        if not self.vars:
            return format_atom_name(name)
        return f"{format_atom_name(name)}({','.join(self.vars)})"


def _sig_prefix(name: str) -> str:
    cleaned = "".join(ch for ch in name if ch.isalnum())
    return (cleaned[:1].upper() + cleaned[1:]) or "P"


def make_signatures(
    prog: Program, extra: Sequence[PredKey] = ()
) -> Dict[PredKey, Signature]:
    """One signature per predicate: the shortest capitalized prefix of the
    predicate name not already taken, followed by the argument position."""
    preds = list(dict.fromkeys(list(prog.predicates) + list(extra)))
    prefixes: Set[str] = set()
    names: Set[str] = set()
    sigs: Dict[PredKey, Signature] = {}
    for key in preds:
        name, arity = key
        full = "Goal" if name.startswith("__") else _sig_prefix(name)
        candidates = [full[:k] for k in range(1, len(full) + 1)]
        candidates += [f"{full}_{n}" for n in range(2, len(preds) + 3)]
        for cand in candidates:
            vars_ = tuple(f"{cand}{i + 1}" for i in range(arity))
            if cand not in prefixes and not names.intersection(vars_):
                break
        prefixes.add(cand)
        names.update(vars_)
        sigs[key] = Signature(key, vars_)
    return sigs


def prepare(prog: Program) -> Program:
    return normalize_heads(rename_apart(prog))

import random

import pytest
from hypothesis import given, settings, strategies as st

from rti import setexpr as sx
from rti.setexpr import (
    EMPTY,
    Cons,
    EquationSystem,
    FormClass,
    Memo,
    NameSupply,
    Var,
    classify,
    dnf,
    inter,
    meaning,
    render,
    render_system,
    simp,
    solve_meanings,
    to_top_level_form,
    union,
)

import oracles
from test_acceptance import random_assignment, random_expr, random_system

a, b, c, NIL = sx.const("a"), sx.const("b"), sx.const("c"), sx.nil()
X, Y, Z, L = Var("X"), Var("Y"), Var("Z"), Var("L")


def lst(head, tail):
    return Cons(".", (head, tail))


def f(*args):
    return Cons("f", tuple(args))


def g(*args):
    return Cons("g", tuple(args))


# --------------------------------------------------------------------------
# Canonical construction


def test_union_and_intersection_are_canonical():
    assert union(a, EMPTY) == a
    assert union(a, a) == a
    assert union(a, b) == union(b, a)
    assert union(union(a, b), c) == union(a, union(b, c))
    assert inter(X, EMPTY) == EMPTY
    assert inter(X, X) == X
    assert inter(X, Y) == inter(Y, X)
    assert union() == EMPTY


def test_structural_order():
    ordered = [EMPTY, X, a, inter(X, Y), union(X, a)]
    assert sorted(reversed(ordered)) == ordered


# --------------------------------------------------------------------------
# Meaning


def test_meaning_examples():
    assert meaning(EMPTY, {}) == frozenset()
    assert meaning(union(f(X), X), {"X": {("a",)}}) == {("f", ("a",)), ("a",)}


def test_list_meaning_matches_enumeration():
    system = {"L": union(NIL, lst(X, L))}
    got = meaning(L, {"X": {("a",)}}, system, depth=3)
    # brute force: lists of a whose term depth is at most 3
    universe = oracles.universe({"a": 0, "[]": 0, ".": 2}, 3)

    def is_list_of_a(t):
        while t[0] == ".":
            if t[1] != ("a",):
                return False
            t = t[2]
        return t == ("[]",)

    assert got == {t for t in universe if is_list_of_a(t)}
    assert got == {("[]",), (".", ("a",), ("[]",)), (".", ("a",), (".", ("a",), ("[]",)))}


def test_meaning_is_monotone_in_depth():
    system = {"L": union(NIL, lst(X, L))}
    sigma = {"X": {("a",), ("b",)}}
    previous = frozenset()
    for d in range(1, 5):
        cur = meaning(L, sigma, system, depth=d)
        assert previous <= cur
        previous = cur


def test_unbound_variable_is_named():
    with pytest.raises(sx.UnboundVariableError) as exc:
        meaning(f(Var("Q")), {})
    assert "Q" in str(exc.value)


def test_herbrand_universe_matches_oracle():
    sig = {"a": 0, "b": 0, "f": 1, ".": 2}
    for d in (1, 2, 3):
        assert sx.herbrand_universe(sig, d) == oracles.universe(sig, d)


# --------------------------------------------------------------------------
# Top-level form and DNF


def test_top_level_form_examples():
    sys1 = EquationSystem({"W": lst(X, NIL)})
    out = to_top_level_form(sys1, NameSupply())
    (y,) = [v for v in out if v != "W"]
    assert out["W"] == lst(X, Var(y)) and out[y] == NIL

    nested = EquationSystem({"Z": f(g(a))})
    out = to_top_level_form(nested, NameSupply())
    assert len(out) == 3 and all(sx.is_top_level(e) for _, e in out.items())
    assert meaning(Var("Z"), {}, out) == {("f", ("g", ("a",)))}

    flat = EquationSystem({"L": union(NIL, lst(X, L))})
    assert to_top_level_form(flat, NameSupply()).equations == flat.equations


def test_dnf_examples():
    assert dnf(inter(union(a, b), c)) == union(inter(a, c), inter(b, c))
    assert dnf(X) == X
    A1, B1 = Var("A1"), Var("B1")
    assert dnf(inter(union(A1, B1), a)) == union(inter(A1, a), inter(B1, a))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_dnf_is_idempotent(seed):
    e = random_expr(random.Random(seed), 3)
    once = dnf(e)
    assert dnf(once) == once


# --------------------------------------------------------------------------
# SIMP


def test_simp_clash():
    assert simp("x", inter(f(a), g(a))).rhs == EMPTY


def test_simp_distributes_intersection_with_memo():
    X1, X2, N12, N21 = Var("X1"), Var("X2"), Var("N12"), Var("N21")
    memo = Memo(NameSupply())
    rhs = inter(union(NIL, lst(X1, N12)), union(NIL, lst(X2, N21)))
    res = simp("x", rhs, memo)
    (y1, e1), (y2, e2) = res.new_equations
    assert res.rhs == union(NIL, lst(Var(y1), Var(y2)))
    assert {e1, e2} == {inter(X1, X2), inter(N12, N21)}
    assert memo.parents == {y1: "x", y2: "x"}
    # the same intersection again reuses the variables
    again = simp("z", rhs, memo)
    assert again.rhs == res.rhs and again.new_equations == []


def test_simp_keeps_parameterized_conjunct():
    e = inter(Var("A2"), NIL)
    assert simp("x", e).rhs == e


def test_simp_subsumption_and_emptiness():
    assert simp("x", union(X, inter(X, Y))).rhs == X
    assert simp("x", union(a, f(Y)), is_empty=lambda v: v == "Y").rhs == a


def test_simp_identical_arguments_need_no_memo_variable():
    memo = Memo(NameSupply())
    res = simp("x", inter(f(X), f(X)), memo)
    assert res.rhs == f(X) and res.new_equations == [] and not memo.table


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_simp_is_a_fixpoint(seed):
    rng = random.Random(seed)
    memo = Memo(NameSupply())
    res = simp("x", random_expr(rng, 3), memo)
    again = simp("x", res.rhs, memo)
    assert again.rhs == res.rhs and again.new_equations == []


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_memo_entries_mean_their_intersection(seed):
    rng = random.Random(seed)
    system = random_system(rng)
    memo = Memo(NameSupply())
    out = EquationSystem()
    for v, e in system.items():
        res = simp(v, e, memo)
        out.add(v, res.rhs)
        for w, d in res.new_equations:
            out.add(w, d)
    sigma = random_assignment(rng)
    env = solve_meanings(out, sigma, 3)
    for key, var in memo.table.items():
        expected = frozenset.intersection(*(env[k] for k in key))
        assert env[var] == expected
    # one variable per key
    assert len(set(memo.table.values())) == len(memo.table)


def test_memo_flattens_keys_to_base_variables():
    memo = Memo(NameSupply())
    m1, _ = memo.intersection(["A", "B"], "x")
    m2, eq = memo.intersection([m1, "C"], "x")
    assert memo.members[m2] == {"A", "B", "C"}
    assert eq == (m2, inter(Var("A"), Var("B"), Var("C")))
    m3, eq3 = memo.intersection(["C", "B", "A"], "y")
    assert m3 == m2 and eq3 is None


# --------------------------------------------------------------------------
# Classification and rendering


def test_classify_examples():
    assert classify(EquationSystem({"x": union(NIL, lst(X, Var("x")))})) == FormClass.LEAF_LINEAR
    assert classify(f(g(a))) == FormClass.GENERAL
    assert classify(inter(Var("V1"), Var("V2"), f(Y))) == FormClass.PARAMETERIZED
    assert classify(union(a, f(X))) == FormClass.REGULAR
    assert classify(inter(f(X), g(Y))) == FormClass.TOP_LEVEL


def test_render():
    assert render(union(NIL, lst(Y, X))) == "[] \\/ [Y|X]"
    assert render(inter(Var("W"), Var("A"), f(Var("B")))) == "A /\\ W /\\ f(B)"
    assert render(EMPTY) == "0"
    assert render(lst(a, lst(b, NIL))) == "[a,b]"
    assert render(f(union(a, b))) == "f(a \\/ b)"
    assert render(lst(union(a, b), NIL)) == "[(a \\/ b)]"
    assert render(sx.const("0")) == "'0'"
    assert render_system({"X": EMPTY, "L": union(NIL, lst(X, L))}) == "X = 0.\nL = [] \\/ [X|L]."

import itertools
import json

from hypothesis import given, settings, strategies as st

from rti.callgraph import build_call_graph, condense_and_level, plan_to_json, strongly_connected_components
from rti.frontend import parse_program

from helpers import NREV


def reach(nodes, edges):
    """Reflexive-transitive closure by Floyd-Warshall, the brute-force oracle."""
    r = {(a, b): a == b or b in edges.get(a, ()) for a in nodes for b in nodes}
    for k, i, j in itertools.product(nodes, repeat=3):
        if r[i, k] and r[k, j]:
            r[i, j] = True
    return r


def test_nrev_levels():
    g = build_call_graph(parse_program(NREV))
    plan = condense_and_level(g)
    assert plan.levels == [[frozenset({("append", 3)})], [frozenset({("nrev", 2)})]]
    assert g.edge_list() == [(("append", 3), ("append", 3)), (("nrev", 2), ("append", 3)), (("nrev", 2), ("nrev", 2))]


def test_mutual_recursion_shares_an_scc():
    g = build_call_graph(parse_program("even(0).\neven(s(X)) :- odd(X).\nodd(s(X)) :- even(X).\nmain :- even(s(0)).\n"))
    plan = condense_and_level(g)
    assert plan.levels == [[frozenset({("even", 1), ("odd", 1)})], [frozenset({("main", 0)})]]
    assert plan.level_of()[("odd", 1)] == 1


def test_plan_json():
    g = build_call_graph(parse_program(NREV))
    data = plan_to_json(g, condense_and_level(g))
    assert json.loads(json.dumps(data)) == {
        "nodes": ["append/3", "nrev/2"],
        "edges": [["append/3", "append/3"], ["nrev/2", "append/3"], ["nrev/2", "nrev/2"]],
        "sccs": [["append/3"], ["nrev/2"]],
        "levels": [[["append/3"]], [["nrev/2"]]],
    }


graphs = st.integers(1, 8).flatmap(
    lambda n: st.tuples(
        st.just(list(range(n))),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n),
    )
)


@settings(max_examples=300, deadline=None)
@given(graphs)
def test_scc_matches_brute_force(graph):
    nodes, edge_pairs = graph
    edges = {}
    for a, b in edge_pairs:
        edges.setdefault(a, set()).add(b)
    comps = strongly_connected_components(nodes, lambda v: edges.get(v, set()))
    r = reach(nodes, edges)
    expected = {frozenset(b for b in nodes if r[a, b] and r[b, a]) for a in nodes}
    assert {frozenset(c) for c in comps} == expected
    # callees come out before callers
    position = {v: i for i, c in enumerate(comps) for v in c}
    for a, b in edge_pairs:
        assert position[b] <= position[a]


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_levels_respect_calls(graph):
    nodes, edge_pairs = graph
    text = "".join(f"p{a} :- p{b}.\n" for a, b in edge_pairs) + "".join(f"p{v}.\n" for v in nodes)
    g = build_call_graph(parse_program(text))
    plan = condense_and_level(g)
    level = plan.level_of()
    for a, b in g.edge_list():
        same = any(a in scc and b in scc for scc in plan.sccs())
        assert level[b] == level[a] if same else level[b] < level[a]
    # every SCC sits directly above its highest callee
    for scc in plan.sccs():
        callee_levels = [level[b] for a in scc for b in g.successors(a) if b not in scc]
        assert level[next(iter(scc))] == 1 + max(callee_levels, default=0)

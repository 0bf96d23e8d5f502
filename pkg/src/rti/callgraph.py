"""Predicate call graph, SCC condensation and bottom-up levels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

from .frontend import PredKey, Program


@dataclass
class CallGraph:
    nodes: List[PredKey] = field(default_factory=list)
    edges: Dict[PredKey, Set[PredKey]] = field(default_factory=dict)

    def successors(self, node: PredKey) -> Set[PredKey]:
        return self.edges.get(node, set())

    def edge_list(self) -> List[Tuple[PredKey, PredKey]]:
        return sorted((a, b) for a, succ in self.edges.items() for b in succ)


SCC = FrozenSet[PredKey]


@dataclass
class LevelPlan:
    levels: List[List[SCC]] = field(default_factory=list)

    def level_of(self) -> Dict[PredKey, int]:
        out = {}
        for k, level in enumerate(self.levels, start=1):
            for scc in level:
                for p in scc:
                    out[p] = k
        return out

    def sccs(self) -> List[SCC]:
        return [scc for level in self.levels for scc in level]


def build_call_graph(prog: Program) -> CallGraph:
    nodes = list(prog.predicates)
    edges: Dict[PredKey, Set[PredKey]] = {n: set() for n in nodes}
    for c in prog.clauses:
        for b in c.body:
            if b.key in edges:
                edges[c.head.key].add(b.key)
    return CallGraph(nodes, edges)


def strongly_connected_components(
    nodes: Iterable[PredKey], successors
) -> List[Set[PredKey]]:
    """Tarjan's algorithm, iterative.  Components come out in reverse
    topological order (callees before callers)."""
    index: Dict[PredKey, int] = {}
    lowlink: Dict[PredKey, int] = {}
    on_stack: Set[PredKey] = set()
    stack: List[PredKey] = []
    result: List[Set[PredKey]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(successors(root))))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(successors(w)))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                result.append(comp)
    return result


def condense_and_level(g: CallGraph) -> LevelPlan:
    """Level of an SCC is 1 + the highest level among the SCCs it calls."""
    comps = strongly_connected_components(sorted(g.nodes), g.successors)
    owner: Dict[PredKey, int] = {}
    for i, comp in enumerate(comps):
        for p in comp:
            owner[p] = i
    level: Dict[int, int] = {}
    # Tarjan emits callees first, so successors are already levelled
    for i, comp in enumerate(comps):
        succ = {owner[w] for p in comp for w in g.successors(p)} - {i}
        level[i] = 1 + max((level[j] for j in succ), default=0)
    depth = max(level.values(), default=0)
    levels: List[List[SCC]] = [[] for _ in range(depth)]
    for i, comp in enumerate(comps):
        levels[level[i] - 1].append(frozenset(comp))
    for lv in levels:
        lv.sort(key=lambda scc: sorted(scc))
    return LevelPlan(levels)


def plan_to_json(g: CallGraph, plan: LevelPlan) -> dict:
    def name(p: PredKey) -> str:
        return f"{p[0]}/{p[1]}"

    return {
        "nodes": [name(n) for n in sorted(g.nodes)],
        "edges": [[name(a), name(b)] for a, b in g.edge_list()],
        "sccs": [sorted(name(p) for p in scc) for scc in plan.sccs()],
        "levels": [[sorted(name(p) for p in scc) for scc in lv] for lv in plan.levels],
    }

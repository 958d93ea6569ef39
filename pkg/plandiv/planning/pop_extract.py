"""
Partial-Order Extraction
Deorder a total-order plan into layers (blocks) of mutually unordered actions
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, Sequence, Tuple

import networkx as nx

from plandiv.planning.ground_sim import GroundedAction, require_valid
from plandiv.planning.pddl_core import DomainModel, Plan, ProblemModel

Block = FrozenSet[str]


@dataclass(frozen=True, eq=False)
class PrecedenceGraph:
    """DAG over step indices; an edge (i, j), i < j, keeps step i before step j"""

    dag: nx.DiGraph

    @classmethod
    def from_edges(cls, size: int, edges: Iterable[Tuple[int, int]]) -> "PrecedenceGraph":
        dag = nx.DiGraph()
        dag.add_nodes_from(range(size))
        dag.add_edges_from(edges)
        return cls(dag)

    @property
    def size(self) -> int:
        return self.dag.number_of_nodes()

    @property
    def edges(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(self.dag.edges)

    def predecessors(self, node: int) -> List[int]:
        return sorted(self.dag.predecessors(node))

    def successors(self, node: int) -> List[int]:
        return sorted(self.dag.successors(node))

    def has_edge(self, i: int, j: int) -> bool:
        return self.dag.has_edge(i, j)


@dataclass(frozen=True)
class PartialOrderPlan:
    blocks: FrozenSet[Block]
    layer_of: Tuple[int, ...] = ()
    layers: Tuple[Block, ...] = ()

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[object]]) -> "PartialOrderPlan":
        """Build from explicit ordered blocks; members are compared as strings"""
        ordered = tuple(frozenset(str(member) for member in block) for block in blocks)
        layer_of = tuple(index for index, block in enumerate(ordered) for _ in block)
        return cls(frozenset(ordered), layer_of, ordered)

    def __len__(self) -> int:
        return len(self.blocks)


def _depends(a: GroundedAction, b: GroundedAction) -> bool:
    """Whether an earlier `a` must stay before a later `b`"""
    a_pre, b_pre = a.pre_pos, b.pre_pos
    return bool(
        a.add & b_pre          # producer
        or a.delete & b_pre    # a would threaten b
        or b.delete & a_pre    # b would threaten a
        or a.add & b.delete
        or a.delete & b.add
        # negative preconditions, checked by absence
        or a.delete & b.pre_neg
        or a.add & b.pre_neg
        or b.add & a.pre_neg
    )


def graph_of(actions: Sequence[GroundedAction]) -> PrecedenceGraph:
    edges = (
        (i, j)
        for j in range(len(actions))
        for i in range(j)
        if _depends(actions[i], actions[j])
    )
    return PrecedenceGraph.from_edges(len(actions), edges)


def precedence_graph(plan: Plan, dom: DomainModel, prob: ProblemModel) -> PrecedenceGraph:
    """Dependency and threat edges between the steps of a valid plan"""
    actions, _ = require_valid(plan, dom, prob)
    return graph_of(actions)


def layering(graph: PrecedenceGraph) -> Tuple[int, ...]:
    """Longest-path layer of every node"""
    layers = dict.fromkeys(graph.dag.nodes, 0)
    for node in nx.topological_sort(graph.dag):
        preds = list(graph.dag.predecessors(node))
        if preds:
            layers[node] = 1 + max(layers[i] for i in preds)
    return tuple(layers[node] for node in range(graph.size))


def pop_of(actions: Sequence[GroundedAction]) -> PartialOrderPlan:
    layer_of = layering(graph_of(actions))
    depth = max(layer_of) + 1 if layer_of else 0
    members: List[set] = [set() for _ in range(depth)]
    for action, layer in zip(actions, layer_of):
        members[layer].add(action.signature)
    layers = tuple(frozenset(block) for block in members)
    return PartialOrderPlan(frozenset(layers), layer_of, layers)


def extract_pop(plan: Plan, dom: DomainModel, prob: ProblemModel) -> PartialOrderPlan:
    """Group the steps of a valid plan into blocks by longest-path layer"""
    actions, _ = require_valid(plan, dom, prob)
    return pop_of(actions)


def linearizations(graph: PrecedenceGraph) -> Iterator[Tuple[int, ...]]:
    """Every topological order of the graph, in lexicographic order"""
    if graph.size == 0:
        yield ()
        return
    yield from sorted(tuple(order) for order in nx.all_topological_sorts(graph.dag))

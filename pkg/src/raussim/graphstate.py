"""Combinatorial graph states and the measurement rewrite rules.

A graph state is represented purely by its underlying undirected graph:
vertices are qubits, edges are entangling bonds.  Measuring a qubit in the
Z basis deletes its vertex and all incident edges; measuring in the Y basis
locally complements the neighborhood before deleting the vertex.  These two
rules are all the purification pipeline needs, and every higher-level
operation in this package is ultimately checked against them.

All operations have value semantics: the input graph is never modified.
Node keys only need to be hashable and totally ordered; the lattice modules
use :class:`NodeId`, unit tests may use plain integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping

from .errors import AddressingError, ContractViolation

Node = Hashable


@dataclass(frozen=True)
class NodeId:
    """Address of one qubit: owning box, index inside the box, fine position.

    ``pos`` determines ``(box, local)`` for lattice-born nodes (``box`` is the
    componentwise floor division of ``pos`` by the box size).  Ordering is
    lexicographic on ``(box, local)`` and is used for every tie-break in the
    package.
    """

    box: tuple[int, int, int]
    local: int
    pos: tuple[int, int, int]

    def sort_key(self) -> tuple[tuple[int, int, int], int]:
        return (self.box, self.local)

    def __lt__(self, other: NodeId) -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: NodeId) -> bool:
        return self.sort_key() <= other.sort_key()

    def __gt__(self, other: NodeId) -> bool:
        return self.sort_key() > other.sort_key()

    def __ge__(self, other: NodeId) -> bool:
        return self.sort_key() >= other.sort_key()

    def __str__(self) -> str:
        bx, by, bz = self.box
        return f"{bx},{by},{bz}:{self.local}"


class Basis(Enum):
    """Measurement assignment for one node of a plan."""

    Z = "Z"
    Y = "Y"
    KEEP = "K"


@dataclass(frozen=True)
class MeasurementPlan:
    """Total map node -> {Z, Y, Keep} emitted by the renormalizer."""

    assignment: Mapping[Node, Basis]

    def nodes_with(self, basis: Basis) -> list[Node]:
        return sorted(n for n, b in self.assignment.items() if b is basis)

    def keep_nodes(self) -> set[Node]:
        return {n for n, b in self.assignment.items() if b is Basis.KEEP}

    def check_total(self, graph: GraphState) -> None:
        """Raise unless the plan covers exactly the graph's node set."""
        plan_nodes = set(self.assignment)
        if plan_nodes != graph.nodes:
            missing = len(graph.nodes - plan_nodes)
            extra = len(plan_nodes - graph.nodes)
            raise ContractViolation(
                f"plan is not total on the graph: {missing} graph nodes "
                f"unassigned, {extra} assignments without a node"
            )


class GraphState:
    """Undirected, irreflexive graph with value-semantic rewrite operations."""

    __slots__ = ("_adj",)

    def __init__(self, adjacency: dict[Node, frozenset[Node]]):
        self._adj = adjacency

    @classmethod
    def from_edges(cls, nodes: Iterable[Node], edges: Iterable[tuple[Node, Node]]) -> GraphState:
        adj: dict[Node, set[Node]] = {n: set() for n in nodes}
        for u, v in edges:
            if u == v:
                raise ContractViolation(f"self-loop at {u}")
            if u not in adj or v not in adj:
                raise AddressingError(f"edge endpoint {u if u not in adj else v} is not a node")
            adj[u].add(v)
            adj[v].add(u)
        return cls({n: frozenset(s) for n, s in adj.items()})

    @property
    def nodes(self) -> set[Node]:
        return set(self._adj)

    def __contains__(self, node: Node) -> bool:
        return node in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def neighbors(self, node: Node) -> frozenset[Node]:
        try:
            return self._adj[node]
        except KeyError:
            raise AddressingError(f"unknown node {node}") from None

    def degree(self, node: Node) -> int:
        return len(self.neighbors(node))

    def has_edge(self, u: Node, v: Node) -> bool:
        return v in self.neighbors(u)

    def edges(self) -> Iterator[tuple[Node, Node]]:
        """Each edge once, endpoints ordered low-high."""
        for u, nbrs in self._adj.items():
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    def edge_set(self) -> set[tuple[Node, Node]]:
        return set(self.edges())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphState):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"GraphState(nodes={len(self)}, edges={self.edge_count()})"


def measure_z(g: GraphState, a: Node) -> GraphState:
    """Z-basis measurement: delete node ``a`` and every incident edge.

    Parameters
    ----------
    g
        Source graph state; left unmodified.
    a
        Node to measure; must exist in ``g``.
    """
    nbrs = g.neighbors(a)
    adj = dict(g._adj)
    del adj[a]
    for n in nbrs:
        adj[n] = adj[n] - {a}
    return GraphState(adj)


def measure_y(g: GraphState, a: Node) -> GraphState:
    """Y-basis measurement: locally complement at ``a``, then delete ``a``.

    Every pair of neighbors of ``a`` has its edge toggled.  On a degree-2
    node this is the familiar chain shortcut (connect the two neighbors);
    the full complementation keeps the rule correct when non-local edges
    give interior nodes degree three or more.
    """
    nbrs = g.neighbors(a)
    adj = dict(g._adj)
    del adj[a]
    for n in nbrs:
        adj[n] = adj[n] - {a}
    for u, v in combinations(sorted(nbrs), 2):
        if v in adj[u]:
            adj[u] = adj[u] - {v}
            adj[v] = adj[v] - {u}
        else:
            adj[u] = adj[u] | {v}
            adj[v] = adj[v] | {u}
    return GraphState(adj)


def contract_path(g: GraphState, path: list[Node]) -> GraphState:
    """Y-measure the interior of a simple path, fusing its endpoints.

    ``path`` must be a simple path in ``g`` whose interior nodes all have
    degree exactly 2 (the caller is responsible for isolating the chain
    first).  Equivalent to folding :func:`measure_y` over the interior in
    path order; the result contains a direct endpoint-endpoint edge.
    """
    if len(path) < 2:
        raise ContractViolation("path needs at least two nodes")
    if len(set(path)) != len(path):
        raise ContractViolation("path revisits a node")
    for u, v in zip(path, path[1:]):
        if not g.has_edge(u, v):
            raise ContractViolation(f"{u} and {v} are consecutive in the path but not adjacent")
    for n in path[1:-1]:
        if g.degree(n) != 2:
            raise ContractViolation(f"interior node {n} has degree {g.degree(n)}, expected 2")
    out = g
    for n in path[1:-1]:
        out = measure_y(out, n)
    return out


def reduce_by_plan(g: GraphState, plan: MeasurementPlan) -> GraphState:
    """Apply a total measurement plan; the verification oracle for purification.

    All Z measurements are applied first (their order is immaterial), then
    all Y measurements in ascending node order.  The returned graph lives on
    exactly the plan's Keep nodes.

    The Z sweep is performed as one induced-subgraph pass for speed; the
    result is identical to folding :func:`measure_z` node by node.
    """
    plan.check_total(g)
    survivors = {n for n, b in plan.assignment.items() if b is not Basis.Z}
    adj = {n: g.neighbors(n) & survivors for n in survivors}
    for a in plan.nodes_with(Basis.Y):
        nbrs = adj.pop(a)
        for n in nbrs:
            adj[n] = adj[n] - {a}
        for u, v in combinations(sorted(nbrs), 2):
            if v in adj[u]:
                adj[u] = adj[u] - {v}
                adj[v] = adj[v] - {u}
            else:
                adj[u] = adj[u] | {v}
                adj[v] = adj[v] | {u}
    return GraphState(adj)

"""Graph-state measurement rewrites, the foundation of the whole pipeline.

A graph state is just a graph here: vertices are qubits, edges are
entangling bonds.  Measuring a qubit in Z deletes it with its edges;
measuring in Y locally complements its neighborhood first.  Chains of Y
measurements therefore contract into single long-distance edges, which is
exactly how the purifier stitches distant structure centers together.
"""

from raussim import Basis, GraphState, MeasurementPlan, contract_path, measure_y, measure_z, reduce_by_plan


def show(tag, g):
    print(f"{tag:<28} nodes={sorted(g.nodes)} edges={sorted(g.edges())}")


# a 5-qubit path a-b-c-d-e
g = GraphState.from_edges("abcde", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")])
show("path a-b-c-d-e", g)

# Z removes a vertex and its bonds: the path splits
show("after Z on c", measure_z(g, "c"))

# Y removes a vertex but reconnects its neighbors: the path shortens
show("after Y on c", measure_y(g, "c"))

# a star becomes a clique under Y: local complementation at the center
star = GraphState.from_edges("wxyz", [("w", "x"), ("w", "y"), ("w", "z")])
show("star centered on w", star)
show("after Y on w", measure_y(star, "w"))

# contracting a whole chain leaves one edge between its endpoints
chain = GraphState.from_edges(range(8), [(i, i + 1) for i in range(7)])
show("8-node chain", chain)
show("contracted", contract_path(chain, list(range(8))))

# the same effect through a full measurement plan: keep the ends, Y the
# interior, Z everything else -- this is the oracle the renormalizer is
# checked against
plan = MeasurementPlan({
    0: Basis.KEEP, 7: Basis.KEEP,
    **{i: Basis.Y for i in range(1, 7)},
})
show("reduce_by_plan", reduce_by_plan(chain, plan))

from __future__ import annotations

import math
from collections import deque
from itertools import product

import numpy as np
import pytest

from raussim import (
    ConfigError,
    GenModel,
    LatticeGeometry,
    ModelKind,
    build_perfect_lattice,
    generate_faulty,
    spanning_check,
    translate_faults_to_loss,
)
from raussim.io import dump_lattice


def brute_force_qubits(dims):
    """Independent enumeration of qubit positions: one or two odd coordinates."""
    out = []
    for p in product(*(range(d) for d in dims)):
        if sum(c % 2 for c in p) in (1, 2):
            out.append(p)
    return out


def brute_force_edges(positions):
    pos_set = set(positions)
    edges = set()
    for p in positions:
        for axis in range(3):
            q = list(p)
            q[axis] += 1
            q = tuple(q)
            if q in pos_set:
                edges.add((p, q))
    return edges


class TestGeometry:
    def test_unit_cell_has_18_qubits(self):
        qubits = brute_force_qubits((3, 3, 3))
        one_odd = [p for p in qubits if sum(c % 2 for c in p) == 1]
        assert len(qubits) == 18
        assert len(one_odd) == 12
        inst = build_perfect_lattice((3, 3, 3))
        assert inst.num_nodes == 18
        assert sorted(map(tuple, inst.node_pos.tolist())) == sorted(qubits)
        assert inst.edge_count() == len(brute_force_edges(qubits))

    def test_interior_degree_is_four(self):
        inst = build_perfect_lattice((6, 6, 6))
        for n in range(inst.num_nodes):
            pos = inst.node_pos[n]
            if all(1 <= c <= 4 for c in pos):
                assert len(inst.neighbors_of(n)) == 4

    def test_bipartite_by_parity_class(self):
        inst = build_perfect_lattice((5, 5, 5))
        odd_count = (inst.node_pos % 2).sum(axis=1)
        for u, v in inst.edge_ordinals():
            assert {int(odd_count[u]), int(odd_count[v])} == {1, 2}

    def test_degenerate_dims_rejected(self):
        with pytest.raises(ConfigError):
            build_perfect_lattice((2, 2, 2))
        with pytest.raises(ConfigError):
            LatticeGeometry((3, 3))  # type: ignore[arg-type]

    def test_model_validation(self):
        with pytest.raises(ConfigError):
            GenModel(p_fail=1.5)
        with pytest.raises(ConfigError):
            GenModel(q_skip=-0.1)


def two_colorable(inst) -> bool:
    color = np.full(inst.num_nodes, -1, dtype=np.int8)
    for start in range(inst.num_nodes):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in inst.neighbors_of(u):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(int(v))
                elif color[v] == color[u]:
                    return False
    return True


class TestGeneration:
    def test_p_zero_equals_perfect(self):
        perfect = build_perfect_lattice((10, 10, 10))
        sampled = generate_faulty((10, 10, 10), GenModel(p_fail=0.0, seed=3))
        assert dump_lattice(sampled) == dump_lattice(perfect)
        assert sampled.failed_bonds == 0

    def test_p_one_is_edgeless(self):
        inst = generate_faulty((8, 8, 8), GenModel(p_fail=1.0, q_skip=0.0, seed=3))
        assert inst.edge_count() == 0
        assert inst.realized_bonds == 0
        assert inst.failed_bonds == inst.ideal_bonds

    def test_realized_fraction_within_4_sigma(self):
        inst = generate_faulty((40, 40, 40), GenModel(p_fail=0.25, seed=5))
        n = inst.ideal_bonds
        sigma = math.sqrt(n * 0.25 * 0.75)
        assert abs(inst.realized_bonds - 0.75 * n) < 4 * sigma

    def test_reproducible_and_seed_sensitive(self):
        a = generate_faulty((12, 12, 12), GenModel(p_fail=0.25, seed=9))
        b = generate_faulty((12, 12, 12), GenModel(p_fail=0.25, seed=9))
        c = generate_faulty((12, 12, 12), GenModel(p_fail=0.25, seed=10))
        assert dump_lattice(a) == dump_lattice(b)
        assert dump_lattice(a) != dump_lattice(c)

    def test_independent_bond_instances_are_two_colorable(self):
        for seed in range(5):
            inst = generate_faulty((10, 10, 10), GenModel(p_fail=0.3, seed=seed))
            assert two_colorable(inst)

    def test_generation_independent_of_box_size_context(self):
        a = generate_faulty((20, 20, 20), GenModel(p_fail=0.25, seed=2), box_size=1)
        b = generate_faulty((20, 20, 20), GenModel(p_fail=0.25, seed=2), box_size=10)
        assert np.array_equal(a.indptr, b.indptr)
        assert np.array_equal(a.indices, b.indices)

    def test_failure_pattern_shared_between_models(self):
        a = generate_faulty((16, 16, 16), GenModel(p_fail=0.25, seed=4))
        b = generate_faulty((16, 16, 16),
                            GenModel(kind=ModelKind.SKIP_BOND, p_fail=0.25, q_skip=0.2, seed=4))
        assert np.array_equal(a.failed_u, b.failed_u)
        assert np.array_equal(a.failed_v, b.failed_v)


class TestSkipModel:
    def test_skip_edges_are_collinear_distance_two(self):
        inst = generate_faulty((20, 20, 20),
                               GenModel(kind=ModelKind.SKIP_BOND, p_fail=0.3, q_skip=0.5, seed=1))
        assert inst.nonlocal_bonds > 0
        for u, v in zip(inst.skip_u, inst.skip_v):
            d = inst.node_pos[u] - inst.node_pos[v]
            assert sorted(np.abs(d)) == [0, 0, 2]
            # skip edges join equal parity classes
            assert (inst.node_pos[u] % 2 == inst.node_pos[v] % 2).all()

    def test_skip_rate_matches_q_skip(self):
        q = 0.1
        inst = generate_faulty((40, 40, 40),
                               GenModel(kind=ModelKind.SKIP_BOND, p_fail=0.25, q_skip=q, seed=8))
        # expected retention corrects for targets that fall outside the lattice
        dims = inst.geometry.dims
        retain = 0.0
        for u, v in zip(inst.failed_u, inst.failed_v):
            pu, pv = inst.node_pos[u], inst.node_pos[v]
            axis = int(np.flatnonzero(pu != pv)[0])
            keep = 0.0
            for e, o in ((pu, pv), (pv, pu)):
                t = 2 * int(o[axis]) - int(e[axis])
                keep += 0.5 if 0 <= t < dims[axis] else 0.0
            retain += keep
        expected = q * retain
        sigma = math.sqrt(expected * (1 - q))
        assert abs(inst.nonlocal_bonds - expected) < 4 * sigma + 1

    def test_zero_q_skip_adds_nothing(self):
        inst = generate_faulty((12, 12, 12),
                               GenModel(kind=ModelKind.SKIP_BOND, p_fail=0.25, q_skip=0.0, seed=8))
        assert inst.nonlocal_bonds == 0


class TestSpanning:
    def test_perfect_lattice_spans(self):
        inst = build_perfect_lattice((10, 10, 10))
        assert all(spanning_check(inst, axis) for axis in range(3))

    def test_edgeless_does_not_span(self):
        inst = generate_faulty((10, 10, 10), GenModel(p_fail=1.0, q_skip=0.0, seed=0))
        assert not spanning_check(inst, 0)

    def test_axis_validated(self):
        inst = build_perfect_lattice((6, 6, 6))
        with pytest.raises(ConfigError):
            spanning_check(inst, 3)


class TestLossTranslation:
    def test_perfect_lattice_has_no_losses(self):
        assert translate_faults_to_loss(build_perfect_lattice((6, 6, 6))) == set()

    def test_single_failed_bond_yields_smaller_endpoint(self):
        for seed in range(50):
            inst = generate_faulty((6, 6, 6), GenModel(p_fail=0.01, seed=seed))
            if inst.failed_bonds == 1:
                loss = translate_faults_to_loss(inst)
                u = inst.node_id(int(inst.failed_u[0]))
                v = inst.node_id(int(inst.failed_v[0]))
                assert loss == {min(u, v)}
                return
        pytest.fail("no seed produced exactly one failed bond")

    def test_set_size_bounded_by_failed_count(self):
        inst = generate_faulty((20, 20, 20), GenModel(p_fail=0.25, seed=6))
        loss = translate_faults_to_loss(inst)
        assert 0 < len(loss) <= inst.failed_bonds


class TestAddressing:
    def test_node_id_roundtrip(self):
        inst = generate_faulty((16, 16, 16), GenModel(p_fail=0.2, seed=3), box_size=8)
        for n in (0, 7, inst.num_nodes // 2, inst.num_nodes - 1):
            nid = inst.node_id(n)
            assert inst.ordinal_of_pos(nid.pos) == n
            assert nid.box == tuple(p // 8 for p in nid.pos)

    def test_rank_orders_like_node_ids(self):
        inst = generate_faulty((16, 16, 16), GenModel(p_fail=0.2, seed=3), box_size=8)
        ctx = inst.context()
        ids = [inst.node_id(n) for n in range(0, inst.num_nodes, 97)]
        ranked = sorted(ids, key=lambda i: ctx.rank[inst.ordinal_of_pos(i.pos)])
        assert ranked == sorted(ids)

    def test_locals_are_dense_per_box(self):
        inst = build_perfect_lattice((12, 12, 12), box_size=6)
        ctx = inst.context()
        per_box = {}
        for n in range(inst.num_nodes):
            box = tuple(int(p) // 6 for p in inst.node_pos[n])
            per_box.setdefault(box, []).append(int(ctx.local[n]))
        for locals_ in per_box.values():
            assert sorted(locals_) == list(range(len(locals_)))

    def test_with_box_size_shares_graph(self):
        inst = build_perfect_lattice((12, 12, 12), box_size=1)
        other = inst.with_box_size(6)
        assert other.indices is inst.indices
        assert other.box_size == 6
        assert inst.with_box_size(1) is inst

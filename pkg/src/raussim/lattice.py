"""Raussendorf lattice geometry and the probabilistic fusion bond model.

A fine position ``p`` in ``Z^3`` carries a qubit iff exactly one or exactly
two of its coordinates are odd; two qubits are bonded iff they sit at unit
Euclidean distance.  Every interior qubit then has exactly four neighbors
and the ideal bond graph is bipartite (one-odd versus two-odd positions,
i.e. cell edges versus cell faces).

Faulty instances delete each ideal bond independently with probability
``p_fail`` (the fusion failure rate).  The skip-bond variant additionally
lets a failed fusion leave a distance-2 collinear non-local edge behind
with probability ``q_skip``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from ._kernels import bfs_reaches
from .errors import ConfigError
from .graphstate import GraphState, NodeId

_STREAM_FAIL = 0
_STREAM_SKIP = 1
_STREAM_SIDE = 2


class ModelKind(Enum):
    INDEPENDENT_BOND = "independent"
    SKIP_BOND = "skip"


@dataclass(frozen=True)
class GenModel:
    """Parameters of the bond-failure sampler.

    ``p_fail`` is the probability that a fusion (= one ideal bond) fails;
    ``q_skip`` is the probability that a failed bond is replaced by a
    distance-2 collinear edge (skip-bond model only).  Identical
    ``(kind, p_fail, q_skip, seed, dims)`` always produce the identical
    instance.
    """

    kind: ModelKind = ModelKind.INDEPENDENT_BOND
    p_fail: float = 0.25
    q_skip: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_fail <= 1.0:
            raise ConfigError(f"p_fail must be in [0, 1], got {self.p_fail}")
        if not 0.0 <= self.q_skip <= 1.0:
            raise ConfigError(f"q_skip must be in [0, 1], got {self.q_skip}")


@dataclass(frozen=True)
class LatticeGeometry:
    """Fine extents of the lattice, one per axis, in lattice units."""

    dims: tuple[int, int, int]

    def __post_init__(self):
        if len(self.dims) != 3 or any(d < 3 for d in self.dims):
            raise ConfigError(f"each lattice dimension must be >= 3, got {self.dims}")

    def contains(self, pos) -> bool:
        return all(0 <= c < d for c, d in zip(pos, self.dims))

    @staticmethod
    def is_qubit_pos(pos) -> bool:
        return sum(c & 1 for c in pos) in (1, 2)

    def qubit_mask(self) -> np.ndarray:
        """Boolean array over the full position grid marking qubit sites."""
        dx, dy, dz = self.dims
        ox = (np.arange(dx) & 1)[:, None, None]
        oy = (np.arange(dy) & 1)[None, :, None]
        oz = (np.arange(dz) & 1)[None, None, :]
        odd = ox + oy + oz
        return (odd == 1) | (odd == 2)


@dataclass(frozen=True)
class _AddressContext:
    """Per-box-size node addressing: local indices and (box, local) ranks."""

    box_size: int
    local: np.ndarray  # local index of each node inside its box
    rank: np.ndarray   # position of each node in (box, local) lexicographic order
    order: np.ndarray  # inverse permutation: order[rank[n]] == n


class FaultyInstance:
    """One sampled lattice: geometry, bond graph, and failure bookkeeping.

    Nodes are stored as ordinals sorted lexicographically by fine position;
    the adjacency is kept in CSR form with neighbor lists sorted ascending.
    Instances are immutable once built and safe to share across threads.
    """

    def __init__(self, geometry, box_size, node_pos, node_of_pos, indptr, indices,
                 realized_bonds, failed_u, failed_v, skip_u, skip_v, model=None):
        self.geometry = geometry
        self.box_size = int(box_size)
        self.node_pos = node_pos
        self.node_of_pos = node_of_pos
        self.indptr = indptr
        self.indices = indices
        self.realized_bonds = int(realized_bonds)
        self.failed_u = failed_u
        self.failed_v = failed_v
        self.skip_u = skip_u
        self.skip_v = skip_v
        self.model = model
        self._contexts: dict[int, _AddressContext] = {}

    # -- counts ---------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self.node_pos)

    @property
    def failed_bonds(self) -> int:
        return len(self.failed_u)

    @property
    def ideal_bonds(self) -> int:
        return self.realized_bonds + self.failed_bonds

    @property
    def nonlocal_bonds(self) -> int:
        return len(self.skip_u)

    def edge_count(self) -> int:
        return len(self.indices) // 2

    # -- addressing -----------------------------------------------------

    def context(self, box_size: int | None = None) -> _AddressContext:
        b = self.box_size if box_size is None else int(box_size)
        if b < 1:
            raise ConfigError(f"box size must be >= 1, got {b}")
        ctx = self._contexts.get(b)
        if ctx is None:
            ctx = self._build_context(b)
            self._contexts[b] = ctx
        return ctx

    def _build_context(self, b: int) -> _AddressContext:
        pos = self.node_pos
        box = pos // b
        cdims = [int(-(-d // b)) for d in self.geometry.dims]
        box_flat = (box[:, 0].astype(np.int64) * cdims[1] + box[:, 1]) * cdims[2] + box[:, 2]
        # node ordinals are position-lexicographic, so a stable sort by box
        # keeps the in-box (= offset-lexicographic) order intact
        order = np.argsort(box_flat, kind="stable").astype(np.int32)
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order), dtype=np.int32)
        sorted_boxes = box_flat[order]
        group_start = np.zeros(len(order), dtype=np.int64)
        new_group = np.flatnonzero(sorted_boxes[1:] != sorted_boxes[:-1]) + 1
        group_start[new_group] = new_group
        np.maximum.accumulate(group_start, out=group_start)
        local_sorted = np.arange(len(order), dtype=np.int64) - group_start
        local = np.empty(len(order), dtype=np.int32)
        local[order] = local_sorted.astype(np.int32)
        return _AddressContext(box_size=b, local=local, rank=rank, order=order)

    def node_id(self, ordinal: int, box_size: int | None = None) -> NodeId:
        ctx = self.context(box_size)
        x, y, z = (int(c) for c in self.node_pos[ordinal])
        b = ctx.box_size
        return NodeId(box=(x // b, y // b, z // b), local=int(ctx.local[ordinal]), pos=(x, y, z))

    def ordinal_of_pos(self, pos) -> int:
        (dx, dy, dz) = self.geometry.dims
        x, y, z = pos
        if not self.geometry.contains(pos):
            raise ConfigError(f"position {pos} outside lattice {self.geometry.dims}")
        n = int(self.node_of_pos[(x * dy + y) * dz + z])
        if n < 0:
            raise ConfigError(f"position {pos} carries no qubit")
        return n

    def neighbors_of(self, ordinal: int) -> np.ndarray:
        return self.indices[self.indptr[ordinal]:self.indptr[ordinal + 1]]

    def with_box_size(self, box_size: int) -> FaultyInstance:
        """Same lattice re-addressed under a different box size (arrays shared)."""
        if box_size == self.box_size:
            return self
        inst = FaultyInstance(
            self.geometry, box_size, self.node_pos, self.node_of_pos,
            self.indptr, self.indices, self.realized_bonds,
            self.failed_u, self.failed_v, self.skip_u, self.skip_v, self.model,
        )
        inst._contexts = self._contexts
        return inst

    # -- views ------------------------------------------------------------

    @cached_property
    def graph(self) -> GraphState:
        """The instance as a value-semantic :class:`GraphState` over NodeIds."""
        ids = [self.node_id(n) for n in range(self.num_nodes)]
        adj = {
            ids[n]: frozenset(ids[m] for m in self.neighbors_of(n))
            for n in range(self.num_nodes)
        }
        return GraphState(adj)

    def edge_ordinals(self) -> np.ndarray:
        """All edges as an (E, 2) array with u < v, sorted."""
        u = np.repeat(np.arange(self.num_nodes, dtype=np.int32), np.diff(self.indptr))
        v = self.indices
        keep = u < v
        return np.stack([u[keep], v[keep]], axis=1)


def _enumerate_ideal_bonds(geometry: LatticeGeometry, node_of_pos, node_pos):
    """All ideal bonds in canonical order: sorted by (low endpoint, axis)."""
    dx, dy, dz = geometry.dims
    grid = node_of_pos.reshape(dx, dy, dz)
    us, vs, axes = [], [], []
    for axis, shift in ((0, (1, 0, 0)), (1, (0, 1, 0)), (2, (0, 0, 1))):
        a = grid[: dx - shift[0] or None, : dy - shift[1] or None, : dz - shift[2] or None]
        b = grid[shift[0]:, shift[1]:, shift[2]:]
        mask = (a >= 0) & (b >= 0)
        us.append(a[mask])
        vs.append(b[mask])
        axes.append(np.full(mask.sum(), axis, dtype=np.int8))
    u = np.concatenate(us)
    v = np.concatenate(vs)
    ax = np.concatenate(axes)
    order = np.lexsort((ax, u))
    return u[order], v[order], ax[order]


def _build_nodes(geometry: LatticeGeometry):
    dx, dy, dz = geometry.dims
    mask = geometry.qubit_mask()
    node_pos = np.argwhere(mask).astype(np.int32)  # C order == lexicographic
    node_of_pos = np.full(dx * dy * dz, -1, dtype=np.int32)
    flat = (node_pos[:, 0].astype(np.int64) * dy + node_pos[:, 1]) * dz + node_pos[:, 2]
    node_of_pos[flat] = np.arange(len(node_pos), dtype=np.int32)
    return node_pos, node_of_pos


def _build_csr(num_nodes, edge_u, edge_v):
    src = np.concatenate([edge_u, edge_v])
    dst = np.concatenate([edge_v, edge_u])
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int32)
    counts = np.bincount(src, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def build_perfect_lattice(dims, box_size: int = 1) -> FaultyInstance:
    """The ideal lattice: every fusion succeeded, no bond is missing."""
    geometry = LatticeGeometry(tuple(int(d) for d in dims))
    node_pos, node_of_pos = _build_nodes(geometry)
    u, v, _ = _enumerate_ideal_bonds(geometry, node_of_pos, node_pos)
    indptr, indices = _build_csr(len(node_pos), u, v)
    empty = np.empty(0, dtype=np.int32)
    return FaultyInstance(geometry, box_size, node_pos, node_of_pos, indptr, indices,
                          realized_bonds=len(u), failed_u=empty, failed_v=empty,
                          skip_u=empty, skip_v=empty, model=None)


def generate_faulty(dims, model: GenModel, box_size: int = 1) -> FaultyInstance:
    """Sample one faulty lattice instance under ``model``.

    Bond randomness is indexed by the canonical bond order, through three
    named substreams of one seeded PCG64 generator (failure, skip decision,
    skip side), so the outcome does not depend on evaluation order or on
    the box size used for addressing.
    """
    geometry = LatticeGeometry(tuple(int(d) for d in dims))
    node_pos, node_of_pos = _build_nodes(geometry)
    u, v, ax = _enumerate_ideal_bonds(geometry, node_of_pos, node_pos)
    n_bonds = len(u)
    seed = model.seed & (2**64 - 1)

    fails = np.random.default_rng([seed, _STREAM_FAIL]).random(n_bonds) < model.p_fail
    kept_u, kept_v = u[~fails], v[~fails]
    failed_u, failed_v = u[fails].astype(np.int32), v[fails].astype(np.int32)

    skip_u = skip_v = np.empty(0, dtype=np.int32)
    if model.kind is ModelKind.SKIP_BOND and model.q_skip > 0.0:
        spawns = np.random.default_rng([seed, _STREAM_SKIP]).random(n_bonds) < model.q_skip
        take_low = np.random.default_rng([seed, _STREAM_SIDE]).random(n_bonds) < 0.5
        chosen = fails & spawns
        e = np.where(take_low[chosen], u[chosen], v[chosen])
        o = np.where(take_low[chosen], v[chosen], u[chosen])
        # target sits one step beyond the far endpoint: e + 2 * (o - e)
        tgt_pos = 2 * node_pos[o].astype(np.int64) - node_pos[e]
        dx, dy, dz = geometry.dims
        inside = ((tgt_pos >= 0).all(axis=1)
                  & (tgt_pos[:, 0] < dx) & (tgt_pos[:, 1] < dy) & (tgt_pos[:, 2] < dz))
        e, tgt_pos = e[inside], tgt_pos[inside]
        tgt = node_of_pos[(tgt_pos[:, 0] * dy + tgt_pos[:, 1]) * dz + tgt_pos[:, 2]]
        lo = np.minimum(e, tgt)
        hi = np.maximum(e, tgt)
        key = np.unique(lo.astype(np.int64) * len(node_pos) + hi)
        skip_u = (key // len(node_pos)).astype(np.int32)
        skip_v = (key % len(node_pos)).astype(np.int32)

    all_u = np.concatenate([kept_u, skip_u])
    all_v = np.concatenate([kept_v, skip_v])
    indptr, indices = _build_csr(len(node_pos), all_u, all_v)
    return FaultyInstance(geometry, box_size, node_pos, node_of_pos, indptr, indices,
                          realized_bonds=len(kept_u), failed_u=failed_u, failed_v=failed_v,
                          skip_u=skip_u, skip_v=skip_v, model=model)


def spanning_check(instance: FaultyInstance, axis: int) -> bool:
    """True iff one connected component touches both faces orthogonal to ``axis``."""
    if axis not in (0, 1, 2):
        raise ConfigError(f"axis must be 0, 1 or 2, got {axis}")
    coords = instance.node_pos[:, axis]
    starts = np.flatnonzero(coords == 0).astype(np.int32)
    targets = coords == instance.geometry.dims[axis] - 1
    if len(starts) == 0 or not targets.any():
        return False
    return bool(bfs_reaches(instance.indptr, instance.indices, starts, targets))


def translate_faults_to_loss(instance: FaultyInstance) -> set[NodeId]:
    """Nodes a loss-based decoder would erase: the smaller endpoint per failed bond."""
    rank = instance.context().rank
    take_u = rank[instance.failed_u] < rank[instance.failed_v]
    chosen = np.where(take_u, instance.failed_u, instance.failed_v)
    return {instance.node_id(int(n)) for n in np.unique(chosen)}

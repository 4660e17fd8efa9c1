"""Box renormalization: purify a faulty lattice into a coarse one.

The faulty lattice is partitioned into cubic boxes of ``B`` fine sites per
edge.  Coarse box positions inherit the Raussendorf parity rule (exactly
one or two odd coordinates carry a purified qubit).  Inside every
qubit-carrying box one *structure* is chosen: a center plus its four intact
neighbors (the handles), oriented so that the handle plane matches the
plane of the box's coarse bonds; each handle thereby faces exactly one
bond direction.  Neighboring structures are then connected by A* paths
confined to their two boxes and bounded to twice the box size in length;
every realized path is later measured in the Y basis, everything else in
Z, so that the contracted graph is exactly the purified coarse lattice.

The defining property, checked in the tests: applying the emitted
measurement plan to the faulty graph via
:func:`raussim.graphstate.reduce_by_plan` reproduces the purified adjacency
node for node and edge for edge.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ConfigError, ContractViolation, StatsError
from .graphstate import Basis, MeasurementPlan, NodeId
from .lattice import FaultyInstance

Coarse = tuple[int, int, int]

_AXIS_UNIT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _carrying(c: Coarse) -> bool:
    return sum(v & 1 for v in c) in (1, 2)


@dataclass(frozen=True)
class BoxGrid:
    """Coarse partition of the fine lattice into B^3 boxes."""

    box_size: int
    coarse_dims: Coarse

    def __post_init__(self):
        if self.box_size < 6:
            raise ConfigError(f"box size must be >= 6, got {self.box_size}")
        if any(d < 1 for d in self.coarse_dims):
            raise ConfigError(f"coarse dims must be positive, got {self.coarse_dims}")

    @classmethod
    def for_instance(cls, instance: FaultyInstance, box_size: int) -> BoxGrid:
        dims = instance.geometry.dims
        if any(d % box_size for d in dims):
            raise ConfigError(
                f"fine dims {dims} not divisible by box size {box_size}"
            )
        return cls(box_size, tuple(d // box_size for d in dims))

    def contains(self, c: Coarse) -> bool:
        return all(0 <= v < d for v, d in zip(c, self.coarse_dims))

    def flat(self, c: Coarse) -> int:
        cx, cy, cz = self.coarse_dims
        return (c[0] * cy + c[1]) * cz + c[2]

    def carrying_positions(self) -> list[Coarse]:
        """Coarse positions that host a purified qubit, in lexicographic order."""
        cx, cy, cz = self.coarse_dims
        return [
            (x, y, z)
            for x in range(cx) for y in range(cy) for z in range(cz)
            if _carrying((x, y, z))
        ]

    def bonds(self) -> Iterator[tuple[Coarse, Coarse, int]]:
        """Interior coarse bonds in canonical order: by (low endpoint, axis)."""
        cx, cy, cz = self.coarse_dims
        for x in range(cx):
            for y in range(cy):
                for z in range(cz):
                    c = (x, y, z)
                    if not _carrying(c):
                        continue
                    for axis, unit in enumerate(_AXIS_UNIT):
                        d = (x + unit[0], y + unit[1], z + unit[2])
                        if self.contains(d) and _carrying(d):
                            yield (c, d, axis)


@dataclass(frozen=True)
class Structure:
    """A structure: one box's purified node plus its four path anchors."""

    center: NodeId
    handles: tuple[NodeId, NodeId, NodeId, NodeId]
    orientation: str  # plane spanned by the handles: "xy", "xz" or "yz"


class BondStatus(Enum):
    REALIZED = "realized"
    FAILED = "failed"


@dataclass(frozen=True)
class PathRecord:
    """Outcome of one coarse bond: the connecting chain, or a failure."""

    bond: tuple[Coarse, Coarse]
    status: BondStatus
    nodes: tuple[NodeId, ...]  # center to center inclusive; empty when failed

    @property
    def length(self) -> int:
        return max(len(self.nodes) - 1, 0)


@dataclass(frozen=True)
class PurifiedLattice:
    """The coarse Raussendorf graph produced by one renormalization run."""

    grid: BoxGrid
    structures: dict[Coarse, Structure]
    records: tuple[PathRecord, ...]

    def nodes(self) -> list[Coarse]:
        return sorted(self.structures)

    def adjacency(self) -> set[tuple[Coarse, Coarse]]:
        return {r.bond for r in self.records if r.status is BondStatus.REALIZED}

    @property
    def realized_count(self) -> int:
        return sum(r.status is BondStatus.REALIZED for r in self.records)

    @property
    def failed_count(self) -> int:
        return sum(r.status is BondStatus.FAILED for r in self.records)

    def realized_lengths(self) -> list[int]:
        return [r.length for r in self.records if r.status is BondStatus.REALIZED]


def output_error_rate(purified: PurifiedLattice) -> float:
    """Fraction of interior coarse bonds that could not be realized."""
    total = len(purified.records)
    if total == 0:
        raise StatsError("no interior coarse bonds: error rate undefined")
    return purified.failed_count / total


def _open_axes(pos) -> tuple[int, int]:
    par = [c & 1 for c in pos]
    want = 0 if sum(par) == 1 else 1
    a, b = (axis for axis in range(3) if par[axis] == want)
    return a, b


def _handle_ordinals(instance: FaultyInstance, center: int) -> list[int]:
    """The four ideal-geometry neighbor ordinals of a candidate center."""
    pos = tuple(int(v) for v in instance.node_pos[center])
    handles = []
    for axis in _open_axes(pos):
        for step in (-1, 1):
            p = list(pos)
            p[axis] += step
            handles.append(instance.ordinal_of_pos(tuple(p)))
    return handles


def _structure_from_center(instance: FaultyInstance, center: int) -> Structure:
    ctx = instance.context()
    handles = sorted(_handle_ordinals(instance, center), key=lambda n: ctx.rank[n])
    pos = tuple(int(v) for v in instance.node_pos[center])
    a, b = _open_axes(pos)
    return Structure(
        center=instance.node_id(center),
        handles=tuple(instance.node_id(h) for h in handles),
        orientation="xyz"[a] + "xyz"[b],
    )


def enumerate_structures(instance: FaultyInstance, box: Coarse) -> list[Structure]:
    """All candidate structures of one box, in ascending center order.

    A candidate center is a node whose four ideal-geometry neighbors lie in
    the same box with intact bonds and which carries no further edge (a
    center with a stray non-local edge would leak entanglement past the
    measurement plan).  For a qubit-carrying box the candidate's handle
    plane must additionally match the plane of the box's coarse bonds, so
    that every handle faces one of the four bond directions; boxes outside
    the coarse parity role have no bonds and take any orientation.
    """
    b = instance.box_size
    want_plane = _open_axes(box) if _carrying(box) else None
    cands = []
    for n in range(instance.num_nodes):
        pos = instance.node_pos[n]
        if tuple(pos // b) != tuple(box):
            continue
        if instance.indptr[n + 1] - instance.indptr[n] != 4:
            continue
        if want_plane is not None and _open_axes(pos) != want_plane:
            continue
        nbrs = set(instance.neighbors_of(n).tolist())
        try:
            handles = _handle_ordinals(instance, n)
        except ConfigError:
            continue
        if any(h not in nbrs for h in handles):
            continue
        if any(tuple(instance.node_pos[h] // b) != tuple(box) for h in handles):
            continue
        cands.append(n)
    return [_structure_from_center(instance, n) for n in cands]


def _score(instance: FaultyInstance, structure: Structure) -> int:
    total = 0
    for h in structure.handles:
        n = instance.ordinal_of_pos(h.pos)
        total += int(instance.indptr[n + 1] - instance.indptr[n])
    return total


def select_structure(instance: FaultyInstance, box: Coarse) -> Structure | None:
    """The candidate maximizing summed handle degree; ties to the lowest center.

    Returns None when the box holds no candidate.
    """
    best = None
    best_key = None
    for cand in enumerate_structures(instance, box):
        key = (-_score(instance, cand), cand.center.sort_key())
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best


# A bond whose best route would exceed twice the box size in edges is
# abandoned: the controller must answer within a bounded photon delay, and
# the per-node measurement error budget assumes paths on the scale of the
# box size.
def _length_cap(box_size: int) -> int:
    return 2 * box_size


class _Runtime:
    """Mutable state of one renormalization run over a fixed instance."""

    def __init__(self, instance: FaultyInstance, box_size: int):
        self.inst = instance.with_box_size(box_size)
        self.grid = BoxGrid.for_instance(self.inst, box_size)
        if self.inst.num_nodes >= _kernels.MAX_NODES:
            raise ConfigError("lattice too large for packed search priorities")
        ctx = self.inst.context()
        self.rank = ctx.rank
        self.inv_rank = ctx.order
        n = self.inst.num_nodes
        self.snode_kind = np.zeros(n, dtype=np.uint8)
        self.claimed = np.zeros(n, dtype=np.uint8)
        self.tainted = np.zeros(n, dtype=np.uint8)
        self.stamp = np.zeros(n, dtype=np.int32)
        self.gscore = np.zeros(n, dtype=np.int32)
        self.parent = np.zeros(n, dtype=np.int32)
        self.closed = np.zeros(n, dtype=np.uint8)
        self.hflag = np.zeros(n, dtype=np.uint8)
        self.run_id = 0
        self.centers: dict[Coarse, int] = {}
        self.handles: dict[Coarse, list[int]] = {}
        self.records: list[PathRecord] = []

    def select_slab(self, slab_axis: int, lo: int, hi: int) -> dict[Coarse, int]:
        """Best structure center per carrying box with slab layer in [lo, hi)."""
        grid = self.grid
        cdx, cdy, cdz = grid.coarse_dims
        n_boxes = cdx * cdy * cdz
        carrying = np.zeros(n_boxes, dtype=np.uint8)
        for c in grid.carrying_positions():
            carrying[grid.flat(c)] = 1
        best_center = np.full(n_boxes, -1, dtype=np.int32)
        best_score = np.full(n_boxes, -1, dtype=np.int64)
        dims = self.inst.geometry.dims
        _kernels.select_structures_batch(
            self.inst.indptr, self.inst.indices, self.inst.node_pos, self.rank,
            self.inst.node_of_pos, dims[1], dims[2], grid.box_size, cdy, cdz,
            carrying, slab_axis, lo, hi, 1, best_center, best_score,
        )
        found = {}
        for c in grid.carrying_positions():
            if lo <= c[slab_axis] < hi:
                n = int(best_center[grid.flat(c)])
                if n >= 0:
                    found[c] = n
        return found

    def register_structures(self, found: Mapping[Coarse, int]) -> None:
        for c, center in found.items():
            handles = sorted(_handle_ordinals(self.inst, center),
                             key=lambda n: self.rank[n])
            self.centers[c] = center
            self.handles[c] = handles
            self.snode_kind[center] = 1
            for h in handles:
                self.snode_kind[h] = 2

    def _usable(self, box: Coarse, toward: Coarse) -> np.ndarray:
        """The handle of ``box`` facing its neighbor ``toward``, if still free."""
        axis = next(a for a in range(3) if box[a] != toward[a])
        step = 1 if toward[axis] > box[axis] else -1
        pos = list(int(v) for v in self.inst.node_pos[self.centers[box]])
        pos[axis] += step
        try:
            h = self.inst.ordinal_of_pos(tuple(pos))
        except ConfigError:
            return np.empty(0, dtype=np.int32)
        if h not in self.handles[box] or self.claimed[h] or self.tainted[h]:
            return np.empty(0, dtype=np.int32)
        return np.asarray([h], dtype=np.int32)

    def process_bond(self, c1: Coarse, c2: Coarse) -> PathRecord:
        if c1 not in self.centers or c2 not in self.centers:
            rec = PathRecord((c1, c2), BondStatus.FAILED, ())
            self.records.append(rec)
            return rec
        self.run_id += 1
        grid = self.grid
        cdy, cdz = grid.coarse_dims[1], grid.coarse_dims[2]
        path = _kernels.astar_bond(
            self.inst.indptr, self.inst.indices, self.inst.node_pos,
            self.rank, self.inv_rank, grid.box_size, cdy, cdz,
            grid.flat(c1), grid.flat(c2),
            self.centers[c1], self.centers[c2],
            self._usable(c1, c2), self._usable(c2, c1),
            self.snode_kind, self.claimed, self.tainted,
            self.stamp, self.gscore, self.parent, self.closed, self.hflag,
            self.run_id, _length_cap(grid.box_size),
        )
        if len(path) == 0:
            rec = PathRecord((c1, c2), BondStatus.FAILED, ())
        else:
            _kernels.mark_claimed(self.inst.indptr, self.inst.indices,
                                  self.claimed, self.tainted, path)
            nodes = tuple(self.inst.node_id(int(n)) for n in path)
            rec = PathRecord((c1, c2), BondStatus.REALIZED, nodes)
        self.records.append(rec)
        return rec

    def assemble(self) -> tuple[PurifiedLattice, MeasurementPlan]:
        structures = {c: _structure_from_center(self.inst, n)
                      for c, n in sorted(self.centers.items())}
        purified = PurifiedLattice(self.grid, structures, tuple(self.records))
        codes = np.zeros(self.inst.num_nodes, dtype=np.uint8)
        codes[self.claimed == 1] = 1
        for n in self.centers.values():
            codes[n] = 2
        plan = MeasurementPlan(PlanAssignment(self.inst, codes))
        return purified, plan


_BASIS_OF_CODE = (Basis.Z, Basis.Y, Basis.KEEP)


class PlanAssignment(Mapping):
    """Array-backed total map NodeId -> basis over one instance's nodes.

    Materializing NodeId objects for every qubit of a large lattice is
    wasteful when only summary statistics are wanted, so the plan stores a
    per-ordinal code array and builds NodeIds lazily on access.
    """

    def __init__(self, instance: FaultyInstance, codes: np.ndarray):
        self.instance = instance
        self.codes = codes

    def __getitem__(self, node: NodeId) -> Basis:
        try:
            n = self.instance.ordinal_of_pos(node.pos)
        except ConfigError:
            raise KeyError(node) from None
        return _BASIS_OF_CODE[self.codes[n]]

    def __iter__(self):
        for n in range(len(self.codes)):
            yield self.instance.node_id(n)

    def __len__(self) -> int:
        return len(self.codes)


def find_path(instance: FaultyInstance, claimed: set[NodeId],
              src: Structure, dst: Structure) -> PathRecord:
    """Connect two structures in coarse-adjacent boxes with one A* path.

    The path leaves ``src`` through the handle facing ``dst`` and enters
    ``dst`` through the handle facing back; if either facing handle is
    missing or already consumed the bond fails outright.  ``claimed`` holds
    the interiors of previously realized paths; the search avoids them and
    everything adjacent to them, stays inside the two endpoint boxes, and
    gives up beyond twice the box size.  On success the new interior nodes
    are added to ``claimed`` (handles are retired simply by becoming
    claimed).
    """
    b = instance.box_size
    c1 = tuple(v // b for v in src.center.pos)
    c2 = tuple(v // b for v in dst.center.pos)
    if sum(abs(a - v) for a, v in zip(c1, c2)) != 1:
        raise ContractViolation(f"boxes {c1} and {c2} are not coarse-adjacent")
    rt = _Runtime(instance, b)
    for nid in claimed:
        n = instance.ordinal_of_pos(nid.pos)
        rt.claimed[n] = 1
        for m in instance.neighbors_of(n):
            rt.tainted[m] = 1
    rt.register_structures({
        c1: instance.ordinal_of_pos(src.center.pos),
        c2: instance.ordinal_of_pos(dst.center.pos),
    })
    rec = rt.process_bond(c1, c2)
    claimed.update(rec.nodes[1:-1])
    return rec


def renormalize(instance: FaultyInstance, box_size: int) -> tuple[PurifiedLattice, MeasurementPlan]:
    """Run the full purification pass over one faulty instance.

    Structures are selected for every qubit-carrying box, then all interior
    coarse bonds are processed in canonical order.  Returns the purified
    coarse lattice and the total measurement plan (Keep on structure
    centers, Y on realized path interiors, Z everywhere else).
    """
    rt = _Runtime(instance, box_size)
    rt.register_structures(rt.select_slab(0, 0, rt.grid.coarse_dims[0]))
    for c1, c2, _axis in rt.grid.bonds():
        rt.process_bond(c1, c2)
    return rt.assemble()

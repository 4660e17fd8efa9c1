"""Line-oriented dump formats: faulty lattice, purified lattice, plan.

All three formats are deterministic and round-trip byte-exactly through
their dump/parse pairs.  Node tokens render as ``bx,by,bz:local`` under the
instance's box-size context; coarse tokens as ``cx,cy,cz``.

    lattice <dx> <dy> <dz> <box_size>
    node <bx,by,bz> <local> <x> <y> <z>        (sorted by node id)
    edge <nodeA> <nodeB>                        (A < B, lines sorted)

    pnode <cx,cy,cz>                            (sorted)
    pbond <c1> <c2> <realized|failed> <length>  (sorted by (c1, c2))

    meas <node> <Y|Z|K>                         (sorted by node id)
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .graphstate import Basis, MeasurementPlan
from .lattice import (
    FaultyInstance,
    LatticeGeometry,
    _build_csr,
    _build_nodes,
    _enumerate_ideal_bonds,
)
from .renormalize import BondStatus, PlanAssignment, PurifiedLattice

_CODE_OF_BASIS = {Basis.Z: 0, Basis.Y: 1, Basis.KEEP: 2}
_LETTER_OF_CODE = ("Z", "Y", "K")
_CODE_OF_LETTER = {"Z": 0, "Y": 1, "K": 2}


def _node_tokens(instance: FaultyInstance) -> list[str]:
    ctx = instance.context()
    b = ctx.box_size
    pos = instance.node_pos
    return [
        f"{x // b},{y // b},{z // b}:{loc}"
        for (x, y, z), loc in zip(pos.tolist(), ctx.local.tolist())
    ]


def dump_lattice(instance: FaultyInstance) -> str:
    """Serialize a faulty instance, bit-exactly reproducible."""
    dx, dy, dz = instance.geometry.dims
    ctx = instance.context()
    tokens = _node_tokens(instance)
    lines = [f"lattice {dx} {dy} {dz} {ctx.box_size}"]
    pos = instance.node_pos
    for n in ctx.order.tolist():
        x, y, z = pos[n]
        lines.append(f"node {tokens[n].replace(':', ' ')} {x} {y} {z}")
    edges = instance.edge_ordinals()
    ru = ctx.rank[edges[:, 0]]
    rv = ctx.rank[edges[:, 1]]
    lo = np.minimum(ru, rv)
    hi = np.maximum(ru, rv)
    order = np.lexsort((hi, lo))
    inv = ctx.order
    for i in order.tolist():
        a = inv[lo[i]]
        b = inv[hi[i]]
        lines.append(f"edge {tokens[a]} {tokens[b]}")
    return "\n".join(lines) + "\n"


def _parse_coarse(token: str, lineno: int) -> tuple[int, int, int]:
    parts = token.split(",")
    if len(parts) != 3:
        raise ParseError(f"bad coarse coordinate {token!r}", lineno)
    try:
        return tuple(int(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise ParseError(f"bad coarse coordinate {token!r}", lineno) from None


def parse_lattice(text: str) -> FaultyInstance:
    """Rebuild a faulty instance from its dump.

    Failure bookkeeping is recovered from geometry: every ideal bond absent
    from the edge list counts as failed, every distance-2 edge as
    non-local.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("lattice "):
        raise ParseError("expected 'lattice <dx> <dy> <dz> <box_size>' header", 1)
    head = lines[0].split()
    if len(head) != 5:
        raise ParseError("malformed lattice header", 1)
    try:
        dx, dy, dz, box_size = (int(v) for v in head[1:])
    except ValueError:
        raise ParseError("malformed lattice header", 1) from None

    geometry = LatticeGeometry((dx, dy, dz))
    node_pos, node_of_pos = _build_nodes(geometry)
    inst = FaultyInstance(geometry, box_size, node_pos, node_of_pos,
                          np.zeros(len(node_pos) + 1, dtype=np.int64),
                          np.empty(0, dtype=np.int32), 0,
                          np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32),
                          np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32))
    ctx = inst.context()
    tokens = {}
    seen = np.zeros(len(node_pos), dtype=bool)

    edge_u: list[int] = []
    edge_v: list[int] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) != 6:
                raise ParseError("node line needs box, local and position", lineno)
            box = _parse_coarse(parts[1], lineno)
            try:
                local = int(parts[2])
                pos = (int(parts[3]), int(parts[4]), int(parts[5]))
            except ValueError:
                raise ParseError("bad integer in node line", lineno) from None
            if not geometry.contains(pos) or not geometry.is_qubit_pos(pos):
                raise ParseError(f"position {pos} carries no qubit", lineno)
            n = inst.ordinal_of_pos(pos)
            if seen[n]:
                raise ParseError(f"duplicate node at {pos}", lineno)
            if tuple(p // box_size for p in pos) != box or int(ctx.local[n]) != local:
                raise ParseError(
                    f"node address {parts[1]}:{local} does not match position {pos}",
                    lineno)
            seen[n] = True
            tokens[f"{parts[1]}:{local}"] = n
        elif parts[0] == "edge":
            if len(parts) != 3:
                raise ParseError("edge line needs two node tokens", lineno)
            try:
                u = tokens[parts[1]]
                v = tokens[parts[2]]
            except KeyError as exc:
                raise ParseError(f"edge references unknown node {exc.args[0]}", lineno) from None
            dist = int(np.abs(node_pos[u] - node_pos[v]).sum())
            straight = int((node_pos[u] != node_pos[v]).sum())
            if straight != 1 or dist not in (1, 2):
                raise ParseError("edge endpoints must be collinear at distance 1 or 2", lineno)
            edge_u.append(u)
            edge_v.append(v)
        else:
            raise ParseError(f"unknown record {parts[0]!r}", lineno)
    if not seen.all():
        raise ParseError(f"dump lists {int(seen.sum())} nodes, geometry has {len(seen)}")

    u = np.asarray(edge_u, dtype=np.int32)
    v = np.asarray(edge_v, dtype=np.int32)
    dist = np.abs(node_pos[u] - node_pos[v]).sum(axis=1) if len(u) else np.empty(0, dtype=int)
    skip_mask = dist == 2
    skip_u, skip_v = u[skip_mask], v[skip_mask]
    real_u, real_v = u[~skip_mask], v[~skip_mask]

    iu, iv, _ = _enumerate_ideal_bonds(geometry, node_of_pos, node_pos)
    n_nodes = len(node_pos)
    ideal_keys = set((iu.astype(np.int64) * n_nodes + iv).tolist())
    real_keys = set((np.minimum(real_u, real_v).astype(np.int64) * n_nodes
                     + np.maximum(real_u, real_v)).tolist())
    unknown = real_keys - ideal_keys
    if unknown:
        raise ParseError(f"{len(unknown)} edges are not ideal lattice bonds")
    failed_keys = sorted(ideal_keys - real_keys)
    failed = np.asarray(failed_keys, dtype=np.int64)
    failed_u = (failed // n_nodes).astype(np.int32)
    failed_v = (failed % n_nodes).astype(np.int32)

    indptr, indices = _build_csr(n_nodes, np.concatenate([real_u, skip_u]),
                                 np.concatenate([real_v, skip_v]))
    out = FaultyInstance(geometry, box_size, node_pos, node_of_pos, indptr, indices,
                         realized_bonds=len(real_u), failed_u=failed_u, failed_v=failed_v,
                         skip_u=skip_u.astype(np.int32), skip_v=skip_v.astype(np.int32))
    return out


def _coarse_token(c) -> str:
    return f"{c[0]},{c[1]},{c[2]}"


def dump_purified(purified: PurifiedLattice) -> str:
    lines = [f"pnode {_coarse_token(c)}" for c in purified.nodes()]
    for rec in sorted(purified.records, key=lambda r: r.bond):
        lines.append(f"pbond {_coarse_token(rec.bond[0])} {_coarse_token(rec.bond[1])} "
                     f"{rec.status.value} {rec.length}")
    return "\n".join(lines) + "\n"


def parse_purified(text: str):
    """Parse a purified dump into (node set, list of (c1, c2, status, length))."""
    nodes: set[tuple[int, int, int]] = set()
    bonds: list[tuple] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        parts = line.split()
        if parts[0] == "pnode" and len(parts) == 2:
            nodes.add(_parse_coarse(parts[1], lineno))
        elif parts[0] == "pbond" and len(parts) == 5:
            c1 = _parse_coarse(parts[1], lineno)
            c2 = _parse_coarse(parts[2], lineno)
            try:
                status = BondStatus(parts[3])
            except ValueError:
                raise ParseError(f"unknown bond status {parts[3]!r}", lineno) from None
            try:
                length = int(parts[4])
            except ValueError:
                raise ParseError(f"bad length {parts[4]!r}", lineno) from None
            bonds.append((c1, c2, status, length))
        else:
            raise ParseError(f"unknown record {parts[0]!r}", lineno)
    return nodes, bonds


def dump_plan(instance: FaultyInstance, plan: MeasurementPlan) -> str:
    """Serialize a measurement plan over the instance's nodes."""
    assignment = plan.assignment
    if isinstance(assignment, PlanAssignment) and assignment.instance is instance:
        codes = assignment.codes
    else:
        codes = np.full(instance.num_nodes, 255, dtype=np.uint8)
        for nid, basis in assignment.items():
            codes[instance.ordinal_of_pos(nid.pos)] = _CODE_OF_BASIS[basis]
        if (codes == 255).any():
            raise ParseError("plan does not cover the instance exactly")
    ctx = instance.context()
    tokens = _node_tokens(instance)
    lines = [
        f"meas {tokens[n]} {_LETTER_OF_CODE[codes[n]]}"
        for n in ctx.order.tolist()
    ]
    return "\n".join(lines) + "\n"


def parse_plan(text: str, instance: FaultyInstance) -> MeasurementPlan:
    """Parse a plan dump against the instance it was written for."""
    tokens = {t: n for n, t in enumerate(_node_tokens(instance))}
    codes = np.zeros(instance.num_nodes, dtype=np.uint8)
    seen = np.zeros(instance.num_nodes, dtype=bool)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        parts = line.split()
        if parts[0] != "meas" or len(parts) != 3:
            raise ParseError("expected 'meas <node> <Y|Z|K>'", lineno)
        n = tokens.get(parts[1])
        if n is None:
            raise ParseError(f"unknown node {parts[1]!r}", lineno)
        if seen[n]:
            raise ParseError(f"duplicate assignment for {parts[1]}", lineno)
        if parts[2] not in _CODE_OF_LETTER:
            raise ParseError(f"unknown basis {parts[2]!r}", lineno)
        seen[n] = True
        codes[n] = _CODE_OF_LETTER[parts[2]]
    if not seen.all():
        raise ParseError(f"plan covers {int(seen.sum())} of {len(seen)} nodes")
    return MeasurementPlan(PlanAssignment(instance, codes))

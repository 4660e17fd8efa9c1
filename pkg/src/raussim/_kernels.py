"""Numba kernels for the hot paths: A* search, structure scan, BFS.

Everything here works on the CSR arrays of a FaultyInstance.  All
tie-breaking is integer-exact: heap priorities pack (f, g, node rank) into
one int64, so the pop order is the lexicographic (f, g, rank) minimum and
results are bit-reproducible across platforms.

Per-node scratch arrays (g-score, parent, closed, handle flag) are reused
across searches through a stamp protocol: an entry is valid only if its
stamp equals the current run id, which makes per-search reset O(1).
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF32 = np.int32(2**30)

_RANK_BITS = 24
_G_SHIFT = _RANK_BITS
_F_SHIFT = _RANK_BITS + 19
_RANK_MASK = np.int64((1 << _RANK_BITS) - 1)
_G_MASK = np.int64((1 << 19) - 1)

MAX_NODES = 1 << _RANK_BITS


@njit(cache=True)
def bfs_reaches(indptr, indices, starts, target_mask):
    """True iff BFS from ``starts`` reaches any node with ``target_mask`` set."""
    n = len(indptr) - 1
    visited = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int32)
    tail = 0
    for s in starts:
        if visited[s] == 0:
            visited[s] = 1
            queue[tail] = s
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        if target_mask[u]:
            return True
        for idx in range(indptr[u], indptr[u + 1]):
            v = indices[idx]
            if visited[v] == 0:
                visited[v] = 1
                queue[tail] = v
                tail += 1
    return False


@njit(cache=True)
def select_structures_batch(indptr, indices, node_pos, rank, node_of_pos,
                            dims_y, dims_z, box_size, cdy, cdz, carrying,
                            slab_axis, layer_lo, layer_hi, aligned,
                            best_center, best_score):
    """Scan nodes for structure candidates; keep the best one per box.

    A candidate is a node whose four ideal-geometry neighbors lie in the
    same box with intact bonds and whose graph degree is exactly four (no
    stray non-local edge at the center).  With ``aligned`` set, the
    candidate's handle plane must additionally match the plane of the box's
    coarse bonds, so that each handle faces one bond direction.  Score is
    the summed graph degree of the four handles; ties go to the lower
    (box, local) rank.

    Only boxes whose coarse coordinate along ``slab_axis`` lies in
    ``[layer_lo, layer_hi)`` are considered, so slab workers can scan their
    own partition independently.
    """
    n_nodes = len(indptr) - 1
    for n in range(n_nodes):
        x = node_pos[n, 0]
        y = node_pos[n, 1]
        z = node_pos[n, 2]
        bx = x // box_size
        by = y // box_size
        bz = z // box_size
        if slab_axis == 0:
            layer = bx
        elif slab_axis == 1:
            layer = by
        else:
            layer = bz
        if layer < layer_lo or layer >= layer_hi:
            continue
        bf = (bx * cdy + by) * cdz + bz
        if carrying[bf] == 0:
            continue
        if indptr[n + 1] - indptr[n] != 4:
            continue
        px = x & 1
        py = y & 1
        pz = z & 1
        odd = px + py + pz
        # open axes: the even axes of a one-odd node, the odd axes of a two-odd node
        want = 0 if odd == 1 else 1
        if aligned == 1:
            # the box's bonds run along its coarse-open axes; the candidate's
            # handle plane must be the same pair of axes
            codd = (bx & 1) + (by & 1) + (bz & 1)
            cwant = 0 if codd == 1 else 1
            if (px == want) != ((bx & 1) == cwant):
                continue
            if (py == want) != ((by & 1) == cwant):
                continue
            if (pz == want) != ((bz & 1) == cwant):
                continue
        score = np.int64(0)
        ok = True
        for axis in range(3):
            p = px if axis == 0 else (py if axis == 1 else pz)
            if p != want:
                continue
            for step in range(-1, 2, 2):
                nx = x + (step if axis == 0 else 0)
                ny = y + (step if axis == 1 else 0)
                nz = z + (step if axis == 2 else 0)
                if nx // box_size != bx or ny // box_size != by or nz // box_size != bz:
                    ok = False
                    break
                m = node_of_pos[(nx * dims_y + ny) * dims_z + nz]
                if m < 0:
                    ok = False
                    break
                found = False
                for idx in range(indptr[n], indptr[n + 1]):
                    if indices[idx] == m:
                        found = True
                        break
                if not found:
                    ok = False
                    break
                score += indptr[m + 1] - indptr[m]
            if not ok:
                break
        if not ok:
            continue
        cur = best_center[bf]
        if score > best_score[bf] or (score == best_score[bf] and cur >= 0 and rank[n] < rank[cur]):
            best_center[bf] = n
            best_score[bf] = score


@njit(cache=True)
def _heap_swap_up(heap, i):
    while i > 0:
        p = (i - 1) >> 1
        if heap[i] < heap[p]:
            tmp = heap[i]
            heap[i] = heap[p]
            heap[p] = tmp
            i = p
        else:
            break


@njit(cache=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        small = left
        right = left + 1
        if right < size and heap[right] < heap[left]:
            small = right
        if heap[small] < heap[i]:
            tmp = heap[i]
            heap[i] = heap[small]
            heap[small] = tmp
            i = small
        else:
            break
    return top, size


@njit(cache=True)
def astar_bond(indptr, indices, node_pos, rank, inv_rank,
               box_size, cdy, cdz, b1_flat, b2_flat, c1, c2, h1s, h2s,
               snode_kind, claimed, tainted,
               stamp, gscore, parent, closed, hflag, run_id, max_len):
    """A* from center ``c1`` to center ``c2`` through their two boxes.

    Unit edge cost, Manhattan heuristic on fine positions (inadmissible in
    the presence of skip edges, so the result may be non-minimal).  The
    first and last steps must use the supplied handle ordinals: ``h1s`` are
    seeded as the only successors of the start, ``h2s`` are the only nodes
    allowed to step onto the goal.  Regular expansion rejects claimed
    nodes, nodes adjacent to earlier path interiors, every structure node,
    and anything outside the two endpoint boxes.  Closed nodes are never
    reopened, and candidates whose estimated total length exceeds
    ``max_len`` are never enqueued: a bond whose best route would be longer
    than that is treated as unreachable.

    Returns the path as node ordinals (c1 .. c2 inclusive), or an empty
    array when the search exhausts.
    """
    out_fail = np.empty(0, dtype=np.int32)
    if len(h1s) == 0 or len(h2s) == 0:
        return out_fail

    gx = node_pos[c2, 0]
    gy = node_pos[c2, 1]
    gz = node_pos[c2, 2]

    heap = np.empty(1024, dtype=np.int64)
    size = 0

    stamp[c1] = run_id
    gscore[c1] = 0
    parent[c1] = -1
    closed[c1] = 0
    hflag[c1] = 0
    stamp[c2] = run_id
    gscore[c2] = INF32
    parent[c2] = -1
    closed[c2] = 0
    hflag[c2] = 0
    for i in range(len(h2s)):
        h = h2s[i]
        stamp[h] = run_id
        gscore[h] = INF32
        parent[h] = -1
        closed[h] = 0
        hflag[h] = 1
    for i in range(len(h1s)):
        h = h1s[i]
        stamp[h] = run_id
        gscore[h] = 1
        parent[h] = c1
        closed[h] = 0
        hflag[h] = 0
        man = abs(node_pos[h, 0] - gx) + abs(node_pos[h, 1] - gy) + abs(node_pos[h, 2] - gz)
        if 1 + man > max_len:
            continue
        prio = (np.int64(1 + man) << _F_SHIFT) | (np.int64(1) << _G_SHIFT) | np.int64(rank[h])
        heap[size] = prio
        size += 1
        _heap_swap_up(heap, size - 1)

    while size > 0:
        prio, size = _heap_pop(heap, size)
        r = np.int32(prio & _RANK_MASK)
        gg = np.int32((prio >> _G_SHIFT) & _G_MASK)
        node = inv_rank[r]
        if closed[node] == 1 or gg != gscore[node]:
            continue
        closed[node] = 1

        if node == c2:
            length = gscore[c2]
            path = np.empty(length + 1, dtype=np.int32)
            k = length
            cur = c2
            while cur != -1:
                path[k] = cur
                cur = parent[cur]
                k -= 1
            return path

        base_g = gscore[node] + 1

        if hflag[node] == 1:
            # usable goal handle: its only successor is the goal itself
            if closed[c2] == 0 and base_g < gscore[c2] and base_g <= max_len:
                gscore[c2] = base_g
                parent[c2] = node
                prio = (np.int64(base_g) << _F_SHIFT) | (np.int64(base_g) << _G_SHIFT) | np.int64(rank[c2])
                if size == len(heap):
                    bigger = np.empty(2 * len(heap), dtype=np.int64)
                    bigger[:size] = heap[:size]
                    heap = bigger
                heap[size] = prio
                size += 1
                _heap_swap_up(heap, size - 1)
            continue

        for idx in range(indptr[node], indptr[node + 1]):
            y = indices[idx]
            if stamp[y] != run_id:
                stamp[y] = run_id
                gscore[y] = INF32
                parent[y] = -1
                closed[y] = 0
                hflag[y] = 0
                if snode_kind[y] != 0:
                    continue  # first touch of a structure node: never enterable
            else:
                if snode_kind[y] != 0 and hflag[y] == 0:
                    continue
            if snode_kind[y] == 0:
                if claimed[y] == 1 or tainted[y] == 1:
                    continue
                bfy = ((node_pos[y, 0] // box_size) * cdy + node_pos[y, 1] // box_size) * cdz \
                    + node_pos[y, 2] // box_size
                if bfy != b1_flat and bfy != b2_flat:
                    continue
            if closed[y] == 1:
                continue
            if base_g < gscore[y]:
                man = abs(node_pos[y, 0] - gx) + abs(node_pos[y, 1] - gy) + abs(node_pos[y, 2] - gz)
                if base_g + man > max_len:
                    continue
                gscore[y] = base_g
                parent[y] = node
                prio = (np.int64(base_g + man) << _F_SHIFT) | (np.int64(base_g) << _G_SHIFT) | np.int64(rank[y])
                if size == len(heap):
                    bigger = np.empty(2 * len(heap), dtype=np.int64)
                    bigger[:size] = heap[:size]
                    heap = bigger
                heap[size] = prio
                size += 1
                _heap_swap_up(heap, size - 1)
    return out_fail


@njit(cache=True)
def mark_claimed(indptr, indices, claimed, tainted, path):
    """Claim a realized path's interior and taint everything adjacent to it."""
    for i in range(1, len(path) - 1):
        n = path[i]
        claimed[n] = 1
        for idx in range(indptr[n], indptr[n + 1]):
            tainted[indices[idx]] = 1

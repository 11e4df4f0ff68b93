"""Counting the disconnected regions carved out of the torus by repulsive barriers.

Each acyclic orientation of the communication graph is a consistent circular
ordering label of a region before the torus seams are glued. Gluing the seam
of agent ``v`` reverses every edge at ``v``, which is only possible when ``v``
is a source or a sink. Regions of the glued torus are therefore the
equivalence classes of acyclic orientations under source/sink flips.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import BadArgs, BadFamilyArgs, NotConnected, NotSourceOrSink, TooLarge
from .graph import Orientation, UndirectedGraph, is_connected

ENUMERATION_MAX_EDGES = 22


@dataclass(frozen=True)
class RegionReport:
    r0: int
    n_acyclic: int
    n_cyclic: int
    class_representatives: tuple[Orientation, ...] = ()
    class_sizes: tuple[int, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {"r0": self.r0, "n_acyclic": self.n_acyclic, "n_cyclic": self.n_cyclic}


def _incident_masks(g: UndirectedGraph) -> list[int]:
    """``masks[v]`` has bit k set when edge k touches vertex v (index 0 unused)."""
    masks = [0] * (g.n + 1)
    for k, (i, j) in enumerate(g.edges):
        masks[i] |= 1 << k
        masks[j] |= 1 << k
    return masks


def enumerate_acyclic_orientations(g: UndirectedGraph, max_edges: int = ENUMERATION_MAX_EDGES) -> list[Orientation]:
    """All acyclic orientations of ``g`` in increasing bit order of the search.

    Backtracking over edges in canonical order; an arc ``u -> v`` is refused
    when ``v`` already reaches ``u`` through the arcs placed so far.
    """
    if g.m > max_edges:
        raise TooLarge(f"enumeration limited to {max_edges} edges, graph has {g.m}")
    n, edges = g.n, g.edges
    succ: list[list[int]] = [[] for _ in range(n + 1)]

    def reaches(src: int, dst: int) -> bool:
        if src == dst:
            return True
        seen = {src}
        stack = [src]
        while stack:
            x = stack.pop()
            for y in succ[x]:
                if y == dst:
                    return True
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    found: list[int] = []

    def place(k: int, bits: int) -> None:
        if k == len(edges):
            found.append(bits)
            return
        i, j = edges[k]
        for bit, (u, v) in ((0, (i, j)), (1, (j, i))):
            if reaches(v, u):
                continue
            succ[u].append(v)
            place(k + 1, bits | (bit << k))
            succ[u].pop()

    place(0, 0)
    return [Orientation(g, b) for b in found]


def _sources_and_sinks(g: UndirectedGraph, bits: int) -> list[int]:
    has_out = [False] * (g.n + 1)
    has_in = [False] * (g.n + 1)
    for k, (i, j) in enumerate(g.edges):
        u, v = (j, i) if (bits >> k) & 1 else (i, j)
        has_out[u] = True
        has_in[v] = True
    return [v for v in g.vertices if not (has_out[v] and has_in[v])]


def source_sink_flip(o: Orientation, v: int) -> Orientation:
    """Reverse every arc at ``v``; only legal when ``v`` is a source or a sink."""
    g = o.base
    if not 1 <= v <= g.n:
        raise BadArgs(f"vertex {v} not in 1..{g.n}")
    if v not in _sources_and_sinks(g, o.bits):
        raise NotSourceOrSink(f"vertex {v} has both incoming and outgoing arcs")
    return Orientation(g, o.bits ^ _incident_masks(g)[v])


def count_regions_repulsive(g: UndirectedGraph, max_edges: int = ENUMERATION_MAX_EDGES) -> RegionReport:
    """Number of regions of the repulsive-barrier torus for a connected graph.

    Classes are explored breadth-first from the smallest unvisited acyclic
    orientation, flipping every current source and sink.
    """
    if g.m > max_edges:
        raise TooLarge(f"enumeration limited to {max_edges} edges, graph has {g.m}")
    if not is_connected(g):
        raise NotConnected("region counting requires a connected graph")
    masks = _incident_masks(g)
    acyclic = [o.bits for o in enumerate_acyclic_orientations(g, max_edges)]
    visited: set[int] = set()
    reps, sizes = [], []
    for start in sorted(acyclic):
        if start in visited:
            continue
        visited.add(start)
        queue = deque([start])
        size = 0
        while queue:
            bits = queue.popleft()
            size += 1
            for v in _sources_and_sinks(g, bits):
                nxt = bits ^ masks[v]
                if nxt not in visited:
                    visited.add(nxt)
                    queue.append(nxt)
        reps.append(Orientation(g, start))
        sizes.append(size)
    n_acyclic = len(acyclic)
    return RegionReport(
        r0=len(reps),
        n_acyclic=n_acyclic,
        n_cyclic=2 ** g.m - n_acyclic,
        class_representatives=tuple(reps),
        class_sizes=tuple(sizes),
    )


def closed_form_regions(family: str, n: int) -> int:
    family = family.lower()
    if family == "tree":
        if n < 2:
            raise BadFamilyArgs("a tree needs n >= 2")
        return 1
    if family == "cycle":
        if n < 3:
            raise BadFamilyArgs("a cycle needs n >= 3")
        return n - 1
    if family == "complete":
        if n < 2:
            raise BadFamilyArgs("a complete graph needs n >= 2")
        return math.factorial(n - 1)
    raise BadFamilyArgs(f"unknown family {family!r}; expected tree, cycle or complete")


def cycle_class_size(n: int, p: int) -> int:
    """Orientations of C_n with exactly ``p`` clockwise edges."""
    if not (isinstance(n, int) and isinstance(p, int)) or n < 0 or not 0 <= p <= n:
        raise BadArgs(f"need 0 <= p <= n, got n={n}, p={p}")
    return math.comb(n, p)

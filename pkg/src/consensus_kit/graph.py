"""Graph model and the classic algorithms the rest of the toolkit leans on.

Vertex ids are 1-based in every public structure (they match agent labels);
arrays indexed by vertex use ``id - 1``.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .errors import BadArgs, NotConnected, TooLarge

CHROMATIC_MAX_VERTICES = 12


def _canon_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class UndirectedGraph:
    """Simple undirected graph on vertices ``1..n``.

    ``edges`` is normalised on construction: pairs are sorted, duplicates
    dropped, and the tuple is kept in lexicographic order. That order is the
    canonical edge order used by :class:`Orientation`.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise BadArgs(f"vertex count must be a positive integer, got {self.n!r}")
        canon = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise BadArgs(f"self-loop at vertex {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise BadArgs(f"edge {e} references a vertex outside 1..{self.n}")
            canon.add(_canon_pair(i, j))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    def has_edge(self, i: int, j: int) -> bool:
        return _canon_pair(i, j) in set(self.edges)

    def neighbours(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for v in adj:
            adj[v].sort()
        return adj

    def subgraph(self, edges: Iterable[tuple[int, int]]) -> "UndirectedGraph":
        return UndirectedGraph(self.n, tuple(edges))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "UndirectedGraph":
        try:
            return cls(int(data["n"]), tuple(tuple(e) for e in data["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise BadArgs(f"malformed graph document: {exc}") from exc

    @classmethod
    def load(cls, path) -> "UndirectedGraph":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    # Common families, handy in tests and on the command line.
    @classmethod
    def path(cls, n: int) -> "UndirectedGraph":
        return cls(n, tuple((i, i + 1) for i in range(1, n)))

    @classmethod
    def cycle(cls, n: int) -> "UndirectedGraph":
        if n < 3:
            raise BadArgs("a cycle needs at least 3 vertices")
        return cls(n, tuple((i, i % n + 1) for i in range(1, n + 1)))

    @classmethod
    def complete(cls, n: int) -> "UndirectedGraph":
        return cls(n, tuple(itertools.combinations(range(1, n + 1), 2)))


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    arcs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise BadArgs(f"vertex count must be a positive integer, got {self.n!r}")
        uniq = set()
        for a in self.arcs:
            i, j = (int(v) for v in a)
            if i == j:
                raise BadArgs(f"self-loop at vertex {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise BadArgs(f"arc {a} references a vertex outside 1..{self.n}")
            uniq.add((i, j))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "arcs", tuple(sorted(uniq)))

    def successors(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for i, j in self.arcs:
            out[i].append(j)
        return out

    def symmetrized(self) -> UndirectedGraph:
        return UndirectedGraph(self.n, self.arcs)


@dataclass(frozen=True)
class Orientation:
    """One direction per edge of ``base``.

    Bit ``k`` of ``bits`` describes ``base.edges[k]``: 0 means the arc runs
    from the lower id to the higher id, 1 means the reverse.
    """

    base: UndirectedGraph
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.base.m:
            raise BadArgs(f"direction bits {self.bits:#x} do not fit {self.base.m} edges")

    def direction(self, k: int) -> int:
        return (self.bits >> k) & 1

    def arcs(self) -> list[tuple[int, int]]:
        out = []
        for k, (i, j) in enumerate(self.base.edges):
            out.append((j, i) if (self.bits >> k) & 1 else (i, j))
        return out

    def to_digraph(self) -> DirectedGraph:
        return DirectedGraph(self.base.n, tuple(self.arcs()))

    @classmethod
    def from_arcs(cls, base: UndirectedGraph, arcs: Iterable[tuple[int, int]]) -> "Orientation":
        index = base.edge_index()
        bits = 0
        seen = set()
        for i, j in arcs:
            k = index.get(_canon_pair(i, j))
            if k is None:
                raise BadArgs(f"arc {(i, j)} is not an edge of the base graph")
            if k in seen:
                raise BadArgs(f"edge {base.edges[k]} oriented twice")
            seen.add(k)
            if i > j:
                bits |= 1 << k
        if len(seen) != base.m:
            raise BadArgs("orientation must assign a direction to every edge")
        return cls(base, bits)


def connected_components(g: UndirectedGraph) -> list[list[int]]:
    """Vertex blocks of ``g``, each sorted, ordered by their smallest id."""
    adj = g.neighbours()
    seen: set[int] = set()
    blocks = []
    for s in g.vertices:
        if s in seen:
            continue
        seen.add(s)
        block = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    block.append(w)
                    queue.append(w)
        blocks.append(sorted(block))
    return blocks


def is_connected(g: UndirectedGraph) -> bool:
    return len(connected_components(g)) == 1


def spanning_tree(g: UndirectedGraph) -> tuple[tuple[int, int], ...]:
    """BFS spanning tree rooted at vertex 1; neighbours visited in id order."""
    adj = g.neighbours()
    seen = {1}
    tree = []
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                tree.append(_canon_pair(u, w))
                queue.append(w)
    if len(seen) != g.n:
        raise NotConnected(f"graph has {len(connected_components(g))} components")
    return tuple(sorted(tree))


def strongly_connected_components(d: DirectedGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep chains do not hit the recursion limit.

    Blocks are sorted internally and listed by their smallest vertex.
    """
    succ = d.successors()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = itertools.count()
    out = []

    for root in range(1, d.n + 1):
        if root in index:
            continue
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(succ[root]))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                block = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    block.append(w)
                    if w == v:
                        break
                out.append(sorted(block))
    out.sort(key=lambda b: b[0])
    return out


def independent_sccs(d: DirectedGraph) -> list[list[int]]:
    """SCCs with no arc entering them from outside (sources of the condensation)."""
    sccs = strongly_connected_components(d)
    owner = {v: k for k, block in enumerate(sccs) for v in block}
    entered = set()
    for i, j in d.arcs:
        if owner[i] != owner[j]:
            entered.add(owner[j])
    return [block for k, block in enumerate(sccs) if k not in entered]


def _has_cycle(n: int, arcs: Iterable[tuple[int, int]]) -> bool:
    indeg = [0] * (n + 1)
    succ: list[list[int]] = [[] for _ in range(n + 1)]
    for i, j in arcs:
        succ[i].append(j)
        indeg[j] += 1
    queue = deque(v for v in range(1, n + 1) if indeg[v] == 0)
    removed = 0
    while queue:
        u = queue.popleft()
        removed += 1
        for w in succ[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return removed != n


def is_acyclic(o: Orientation) -> bool:
    return not _has_cycle(o.base.n, o.arcs())


# --- chromatic polynomial -------------------------------------------------

@lru_cache(maxsize=None)
def _chromatic_coeffs(n: int, edges: frozenset) -> tuple[int, ...]:
    """Coefficients (constant term first) of the chromatic polynomial.

    Vertices are ``0..n-1``; ``edges`` holds sorted pairs. Deletion-contraction
    with shortcuts for edgeless, forest and complete graphs.
    """
    m = len(edges)
    if m == 0:
        return tuple([0] * n + [1])
    if m == n * (n - 1) // 2:
        # falling factorial x(x-1)...(x-n+1)
        poly = [1]
        for k in range(n):
            poly = _poly_mul(poly, [-k, 1])
        return tuple(poly)
    comps = _count_components(n, edges)
    if m == n - comps:
        # forest: x^c (x-1)^m
        poly = [0] * comps + [1]
        for _ in range(m):
            poly = _poly_mul(poly, [-1, 1])
        return tuple(poly)

    # pick an edge at a vertex of maximum degree; keeps the recursion shallow
    deg = [0] * n
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    u, v = max(edges, key=lambda e: (deg[e[0]] + deg[e[1]], -e[0], -e[1]))
    deleted = edges - {(u, v)}

    # contract v into u, then shift ids above v down by one
    merged = set()
    for a, b in deleted:
        a = u if a == v else a
        b = u if b == v else b
        if a == b:
            continue
        a = a - 1 if a > v else a
        b = b - 1 if b > v else b
        merged.add((a, b) if a < b else (b, a))
    p_del = _chromatic_coeffs(n, frozenset(deleted))
    p_con = _chromatic_coeffs(n - 1, frozenset(merged))
    return tuple(_poly_sub(list(p_del), list(p_con)))


def _count_components(n: int, edges: Iterable[tuple[int, int]]) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return comps


def _poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_sub(p: list[int], q: list[int]) -> list[int]:
    size = max(len(p), len(q))
    p = p + [0] * (size - len(p))
    q = q + [0] * (size - len(q))
    out = [a - b for a, b in zip(p, q)]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def chromatic_polynomial(g: UndirectedGraph, max_vertices: int = CHROMATIC_MAX_VERTICES) -> tuple[int, ...]:
    if g.n > max_vertices:
        raise TooLarge(f"chromatic polynomial limited to {max_vertices} vertices, graph has {g.n}")
    edges = frozenset((i - 1, j - 1) for i, j in g.edges)
    return _chromatic_coeffs(g.n, edges)


def chromatic_polynomial_at(g: UndirectedGraph, x: int, max_vertices: int = CHROMATIC_MAX_VERTICES) -> int:
    """Exact value of the chromatic polynomial of ``g`` at integer ``x``.

    ``abs(chromatic_polynomial_at(g, -1))`` is the number of acyclic
    orientations of ``g``.
    """
    coeffs = chromatic_polynomial(g, max_vertices)
    value = 0
    for c in reversed(coeffs):
        value = value * x + c
    return value

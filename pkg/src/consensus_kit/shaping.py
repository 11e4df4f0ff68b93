"""Shaping consensus to a target formation.

Given a connected graph, intrinsic frequencies and a target phase difference
per edge, pick a common frequency, split the edges into attractive and
repulsive ones, and compute scaled prototype couplings whose limit cycle is
the target formation.

Conventions used throughout:

* ``delta(i, j)`` is the target ``theta_j - theta_i`` wrapped to (-pi, pi].
* A directed pair ``(i, j)`` names the coupling felt by agent ``i`` from
  agent ``j``: the term ``alpha_ij * f(theta_j - theta_i)`` in agent i's rate.
"""
from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .coupling import CouplingKind, eval_attractive, eval_repulsive, wrap_pi
from .errors import (
    BadArgs,
    DegenerateSign,
    EmptyPositiveSet,
    InfeasibleFrequency,
    InvalidFormation,
    NonpositiveEpsilon,
    NotConnected,
    NotSolvable,
)
from .graph import (
    DirectedGraph,
    UndirectedGraph,
    connected_components,
    independent_sccs,
    is_connected,
    spanning_tree,
    strongly_connected_components,
)

CYCLE_TOL = 1e-9
# |delta| below this (or within it of pi) counts as a degenerate 0 / pi target
DEGENERATE_TOL = 1e-12
DEFAULT_EPSILON = 0.01

Edge = tuple[int, int]


class Mode(str, enum.Enum):
    MIXED = "mixed"
    ATTRACTIVE_ONLY = "attractive_only"


def _canon(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Problem:
    """Design input: graph, intrinsic frequencies, target formation, mode.

    ``omega[i - 1]`` is agent i's frequency. ``deltas`` maps each canonical
    edge ``(i, j)``, ``i < j``, to the wrapped target ``theta_j - theta_i``.
    """

    graph: UndirectedGraph
    omega: tuple[float, ...]
    deltas: Mapping[Edge, float]
    mode: Mode = Mode.MIXED
    omega_bar: Optional[float] = None

    def __post_init__(self):
        g = self.graph
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        if len(self.omega) != g.n:
            raise BadArgs(f"expected {g.n} frequencies, got {len(self.omega)}")
        if not is_connected(g):
            raise NotConnected("the communication graph must be connected")
        deltas = {}
        for (i, j), d in dict(self.deltas).items():
            key = _canon(i, j)
            value = float(wrap_pi(d if i < j else -d))
            if key in deltas and abs(wrap_pi(deltas[key] - value)) > CYCLE_TOL:
                raise InvalidFormation(f"conflicting targets given for edge {key}")
            deltas[key] = value
        missing = [e for e in g.edges if e not in deltas]
        if missing:
            raise InvalidFormation(f"no target phase difference for edges {missing}")
        extra = [e for e in deltas if e not in set(g.edges)]
        if extra:
            raise InvalidFormation(f"targets given for non-edges {extra}")
        object.__setattr__(self, "deltas", deltas)
        self._check_cycles()

    def _check_cycles(self):
        phases = self.target_phases()
        for (i, j), d in self.deltas.items():
            gap = wrap_pi(phases[j - 1] - phases[i - 1] - d)
            if abs(gap) > CYCLE_TOL:
                raise InvalidFormation(
                    f"targets around a cycle through edge {(i, j)} do not sum to a multiple of 2pi "
                    f"(mismatch {gap:.3g} rad)"
                )

    @property
    def n(self) -> int:
        return self.graph.n

    def delta(self, i: int, j: int) -> float:
        d = self.deltas[_canon(i, j)]
        return d if i < j else float(wrap_pi(-d))

    def target_phases(self) -> np.ndarray:
        """A phase vector realising the formation, agent 1 at 0 (BFS over edges)."""
        adj = self.graph.neighbours()
        phases = np.zeros(self.n)
        seen = {1}
        queue = deque([1])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    d = self.deltas[_canon(u, w)]
                    phases[w - 1] = phases[u - 1] + (d if u < w else -d)
                    queue.append(w)
        return phases

    def restricted(self, edges: Iterable[Edge]) -> "Problem":
        """Same agents and targets on a spanning subgraph."""
        sub = UndirectedGraph(self.n, tuple(edges))
        return Problem(sub, self.omega, {e: self.deltas[e] for e in sub.edges}, self.mode, self.omega_bar)

    @classmethod
    def from_positions(cls, graph, omega, positions, mode=Mode.MIXED, omega_bar=None) -> "Problem":
        deltas = {(i, j): float(wrap_pi(positions[j - 1] - positions[i - 1])) for i, j in graph.edges}
        return cls(graph, tuple(omega), deltas, mode, omega_bar)

    def to_json(self) -> dict:
        doc = {
            "n": self.n,
            "omega": list(self.omega),
            "edges": [{"i": i, "j": j, "delta": d} for (i, j), d in sorted(self.deltas.items())],
            "mode": self.mode.value,
        }
        if self.omega_bar is not None:
            doc["omega_bar"] = self.omega_bar
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Problem":
        try:
            n = int(doc["n"])
            edges = [(int(e["i"]), int(e["j"])) for e in doc["edges"]]
            deltas = {(int(e["i"]), int(e["j"])): float(e["delta"]) for e in doc["edges"]}
            omega_bar = doc.get("omega_bar")
            return cls(
                UndirectedGraph(n, tuple(edges)),
                tuple(doc["omega"]),
                deltas,
                Mode(doc.get("mode", "mixed")),
                None if omega_bar is None else float(omega_bar),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadArgs(f"malformed problem document: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Problem":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class EdgePartition:
    attractive: frozenset
    repulsive: frozenset

    def kind(self, i: int, j: int) -> CouplingKind:
        e = _canon(i, j)
        if e in self.attractive:
            return CouplingKind.ATTRACTIVE
        if e in self.repulsive:
            return CouplingKind.REPULSIVE
        raise KeyError(e)


@dataclass(frozen=True)
class SolvabilityResult:
    feasible: bool
    omega_bar_intervals: tuple[tuple[float, float], ...]
    reason: str = ""


@dataclass(frozen=True)
class SignSets:
    """Per-agent split of neighbours by coupling kind and by sign agreement.

    ``degenerate`` lists agents whose frequency equals the common frequency;
    all of their neighbours are placed in the minus sets.
    """

    a_plus: Mapping[int, frozenset]
    a_minus: Mapping[int, frozenset]
    r_plus: Mapping[int, frozenset]
    r_minus: Mapping[int, frozenset]
    degenerate: frozenset = frozenset()

    def plus(self, i: int) -> frozenset:
        return self.a_plus[i] | self.r_plus[i]


@dataclass
class CouplingSolution:
    """Common frequency plus one coefficient per directed coupling.

    ``alpha[(i, j)]`` scales the attractive prototype felt by i from j,
    ``beta[(i, j)]`` the repulsive one.
    """

    omega_bar: float
    epsilon: float
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    compensated: bool = False
    degenerate_agents: tuple = ()

    @property
    def partition(self) -> EdgePartition:
        return EdgePartition(
            frozenset(_canon(i, j) for i, j in self.alpha),
            frozenset(_canon(i, j) for i, j in self.beta),
        )

    def arcs(self) -> list[tuple[int, int, CouplingKind, float]]:
        out = [(i, j, CouplingKind.ATTRACTIVE, v) for (i, j), v in self.alpha.items()]
        out += [(i, j, CouplingKind.REPULSIVE, v) for (i, j), v in self.beta.items()]
        return sorted(out, key=lambda a: (a[0], a[1]))

    def is_bidirectional(self) -> bool:
        return all((j, i) in self.alpha for i, j in self.alpha) and all(
            (j, i) in self.beta for i, j in self.beta
        )

    def check_against(self, p: Problem) -> None:
        """Raise BadArgs if the solution references agents or edges ``p`` lacks."""
        edges = set(p.graph.edges)
        for i, j, _, value in self.arcs():
            if not (1 <= i <= p.n and 1 <= j <= p.n):
                raise BadArgs(f"coupling {(i, j)} references an agent outside 1..{p.n}")
            if _canon(i, j) not in edges:
                raise BadArgs(f"coupling {(i, j)} is not along an edge of the problem graph")
            if not value > 0:
                raise BadArgs(f"coupling {(i, j)} has nonpositive coefficient {value}")
        if set(self.alpha) & set(self.beta):
            raise BadArgs("a directed pair cannot be both attractive and repulsive")

    def coefficient_matrix(self, n: int, kind: CouplingKind = CouplingKind.ATTRACTIVE) -> np.ndarray:
        table = self.alpha if CouplingKind(kind) is CouplingKind.ATTRACTIVE else self.beta
        out = np.zeros((n, n))
        for (i, j), v in table.items():
            out[i - 1, j - 1] = v
        return out

    def to_json(self) -> dict:
        doc = {
            "omega_bar": self.omega_bar,
            "epsilon": self.epsilon,
            "alpha": [{"i": i, "j": j, "value": v} for (i, j), v in sorted(self.alpha.items())],
            "beta": [{"i": i, "j": j, "value": v} for (i, j), v in sorted(self.beta.items())],
            "compensated": self.compensated,
        }
        if self.degenerate_agents:
            doc["degenerate_agents"] = list(self.degenerate_agents)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "CouplingSolution":
        try:
            return cls(
                omega_bar=float(doc["omega_bar"]),
                epsilon=float(doc["epsilon"]),
                alpha={(int(a["i"]), int(a["j"])): float(a["value"]) for a in doc.get("alpha", [])},
                beta={(int(a["i"]), int(a["j"])): float(a["value"]) for a in doc.get("beta", [])},
                compensated=bool(doc.get("compensated", False)),
                degenerate_agents=tuple(int(i) for i in doc.get("degenerate_agents", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadArgs(f"malformed solution document: {exc}") from exc

    @classmethod
    def load(cls, path) -> "CouplingSolution":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# --- sign helpers ----------------------------------------------------------

def _is_zero(d: float) -> bool:
    return abs(d) < DEGENERATE_TOL


def _is_pi(d: float) -> bool:
    return abs(d) > math.pi - DEGENERATE_TOL


def prototype_value(kind: CouplingKind, delta: float) -> float:
    if CouplingKind(kind) is CouplingKind.ATTRACTIVE:
        return eval_attractive(delta)
    return eval_repulsive(delta)


def _prototype_sign(kind: CouplingKind, delta: float) -> int:
    """Sign of the prototype at ``delta`` (wrapped to (-pi, pi])."""
    if CouplingKind(kind) is CouplingKind.ATTRACTIVE:
        if _is_zero(delta):
            return 0
        return 1 if delta > 0 else -1
    if _is_pi(delta):
        return 0
    # -cot(x/2) is negative on (0, pi) and positive on (pi, 2pi) ~ (-pi, 0)
    return -1 if delta > 0 else 1


def _side(p: Problem, omega_bar: float, i: int) -> int:
    """sign(omega_bar - omega_i)."""
    diff = omega_bar - p.omega[i - 1]
    return 0 if diff == 0 else (1 if diff > 0 else -1)


def attractive_plus_neighbours(p: Problem, omega_bar: float, i: int) -> frozenset:
    """Neighbours j whose attractive coupling pushes agent i towards ``omega_bar``."""
    s = _side(p, omega_bar, i)
    adj = p.graph.neighbours()[i]
    if s == 0:
        return frozenset()
    return frozenset(j for j in adj if _prototype_sign(CouplingKind.ATTRACTIVE, p.delta(i, j)) == s)


def _degenerate_edges(p: Problem) -> list[Edge]:
    if p.mode is Mode.MIXED:
        return [e for e, d in sorted(p.deltas.items()) if _is_zero(d) or _is_pi(d)]
    return [e for e, d in sorted(p.deltas.items()) if _is_pi(d)]


def _partition_points(p: Problem) -> list[float]:
    return sorted(set(p.omega))


def _attractive_only_ok(p: Problem, omega_bar: float) -> bool:
    return all(attractive_plus_neighbours(p, omega_bar, i) for i in p.graph.vertices)


def check_solvability(p: Problem) -> SolvabilityResult:
    """Feasibility of the design problem and the open frequency intervals that work.

    Mixed mode: any frequency strictly between the extreme intrinsic
    frequencies, other than an intrinsic frequency itself. Attractive-only:
    the open cells of the frequency partition (rays included) on which every
    agent has a sign-compatible neighbour.
    """
    bad = _degenerate_edges(p)
    points = _partition_points(p)
    cells = []
    if len(points) == 1 and not bad:
        # nobody needs pushing: omega_bar is the shared frequency and every coupling is epsilon
        return SolvabilityResult(True, (), f"all intrinsic frequencies equal {points[0]}")
    if p.mode is Mode.MIXED:
        cells = list(zip(points[:-1], points[1:]))
        if bad:
            listed = ", ".join(f"{i}-{j}" for i, j in bad)
            return SolvabilityResult(False, tuple(cells), f"target phase difference is 0 or pi mod 2pi on edge(s) {listed}")
        return SolvabilityResult(True, tuple(cells))

    if bad:
        listed = ", ".join(f"{i}-{j}" for i, j in bad)
        return SolvabilityResult(False, (), f"target phase difference is pi mod 2pi on edge(s) {listed}")
    bounds = [-math.inf] + points + [math.inf]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if math.isinf(lo):
            probe = hi - 1.0
        elif math.isinf(hi):
            probe = lo + 1.0
        else:
            probe = 0.5 * (lo + hi)
        if _attractive_only_ok(p, probe):
            cells.append((lo, hi))
    if not cells:
        return SolvabilityResult(False, (), "no common frequency gives every agent a sign-compatible neighbour")
    return SolvabilityResult(True, tuple(cells))


def select_omega_bar(p: Problem, result: Optional[SolvabilityResult] = None) -> float:
    """The problem's own ``omega_bar`` if set, else the midpoint of the widest finite interval."""
    if p.omega_bar is not None:
        return p.omega_bar
    result = result or check_solvability(p)
    if not result.feasible:
        raise NotSolvable(result.reason)
    finite = [c for c in result.omega_bar_intervals if not (math.isinf(c[0]) or math.isinf(c[1]))]
    if finite:
        lo, hi = max(finite, key=lambda c: (c[1] - c[0], -c[0]))
        return 0.5 * (lo + hi)
    rays = result.omega_bar_intervals
    if rays:
        lo, hi = rays[0]
        return hi - 1.0 if math.isinf(lo) else lo + 1.0
    # every agent shares one frequency: the degenerate all-epsilon design
    return p.omega[0]


def _all_equal(p: Problem) -> bool:
    return len(set(p.omega)) == 1


def check_frequency(p: Problem, omega_bar: float) -> None:
    if _all_equal(p):
        if omega_bar != p.omega[0]:
            raise InfeasibleFrequency(f"all intrinsic frequencies equal {p.omega[0]}; omega_bar must match")
        return
    if p.mode is Mode.MIXED:
        lo, hi = min(p.omega), max(p.omega)
        if not lo < omega_bar < hi:
            raise InfeasibleFrequency(f"common frequency {omega_bar} outside ({lo}, {hi})")
        clash = [i for i in p.graph.vertices if p.omega[i - 1] == omega_bar]
        if clash:
            raise InfeasibleFrequency(f"common frequency equals the intrinsic frequency of agent(s) {clash}")
    else:
        missing = [i for i in p.graph.vertices if p.omega[i - 1] != omega_bar and not attractive_plus_neighbours(p, omega_bar, i)]
        if missing:
            raise InfeasibleFrequency(f"at omega_bar={omega_bar} agent(s) {missing} have no sign-compatible neighbour")


def _kind_for(p: Problem, side: dict, v: int, u: int) -> CouplingKind:
    """The kind that puts ``u`` in v's positive set."""
    return CouplingKind.ATTRACTIVE if side[v] * p.delta(v, u) < 0 else CouplingKind.REPULSIVE


def classify_edges(p: Problem, omega_bar: float) -> EdgePartition:
    """Attractive/repulsive split giving every agent a positive neighbour.

    Attractive-only problems return every edge attractive. Mixed problems
    follow the two-sided construction: edges between slow and fast agents
    first, then breadth-first inward through each one-sided component,
    visiting agents in ascending id.
    """
    edges = p.graph.edges
    if p.mode is Mode.ATTRACTIVE_ONLY:
        check_frequency(p, omega_bar)
        return EdgePartition(frozenset(edges), frozenset())
    check_frequency(p, omega_bar)
    if _all_equal(p):
        return EdgePartition(frozenset(edges), frozenset())
    bad = _degenerate_edges(p)
    if bad:
        raise NotSolvable(f"target phase difference is 0 or pi mod 2pi on edge(s) {bad}")

    side = {i: (1 if p.omega[i - 1] > omega_bar else -1) for i in p.graph.vertices}
    kinds: dict[Edge, CouplingKind] = {}
    satisfied = set()
    for i, j in edges:
        if side[i] != side[j]:
            kinds[(i, j)] = _kind_for(p, side, i, j)
            satisfied.update((i, j))

    adj = p.graph.neighbours()
    queue = deque(sorted(satisfied))
    while queue:
        s = queue.popleft()
        for v in adj[s]:
            e = _canon(s, v)
            if e in kinds or v in satisfied:
                continue
            kinds[e] = _kind_for(p, side, v, s)
            satisfied.add(v)
            queue.append(v)
    for i, j in edges:
        if (i, j) not in kinds:
            kinds[(i, j)] = _kind_for(p, side, i, j)

    attractive = frozenset(e for e, k in kinds.items() if k is CouplingKind.ATTRACTIVE)
    return EdgePartition(attractive, frozenset(edges) - attractive)


def sign_sets(p: Problem, omega_bar: float, part: EdgePartition) -> SignSets:
    adj = p.graph.neighbours()
    a_plus, a_minus, r_plus, r_minus = {}, {}, {}, {}
    degenerate = set()
    for i in p.graph.vertices:
        s = _side(p, omega_bar, i)
        if s == 0:
            degenerate.add(i)
        buckets = {("a", True): set(), ("a", False): set(), ("r", True): set(), ("r", False): set()}
        for j in adj[i]:
            kind = part.kind(i, j)
            sign = _prototype_sign(kind, p.delta(i, j))
            if sign == 0 and p.mode is Mode.MIXED:
                raise DegenerateSign(f"prototype vanishes on edge {(i, j)}")
            tag = "a" if kind is CouplingKind.ATTRACTIVE else "r"
            buckets[(tag, s != 0 and sign == s)].add(j)
        a_plus[i] = frozenset(buckets[("a", True)])
        a_minus[i] = frozenset(buckets[("a", False)])
        r_plus[i] = frozenset(buckets[("r", True)])
        r_minus[i] = frozenset(buckets[("r", False)])
    return SignSets(a_plus, a_minus, r_plus, r_minus, frozenset(degenerate))


def min_energy_coefficients(
    p: Problem,
    omega_bar: float,
    part: EdgePartition,
    support: Optional[Iterable[tuple[int, int]]] = None,
    epsilon: float = DEFAULT_EPSILON,
    compensate: bool = False,
) -> CouplingSolution:
    """Least-squares coefficients on each agent's positive set, ``epsilon`` elsewhere.

    With ``support`` given, only edges underlying the support carry couplings
    and only supported directed pairs may enter an agent's positive set;
    their reverse pairs get ``epsilon`` so every used edge stays bidirectional.

    ``compensate=True`` rescales each agent's positive-set coefficients so the
    limit-cycle equation also absorbs the ``epsilon`` terms exactly.
    """
    if not epsilon > 0:
        raise NonpositiveEpsilon(f"epsilon must be positive, got {epsilon}")
    ss = sign_sets(p, omega_bar, part)
    if support is None:
        directed = {(i, j) for i, j in p.graph.edges} | {(j, i) for i, j in p.graph.edges}
    else:
        directed = {(int(i), int(j)) for i, j in support}
        edges = set(p.graph.edges)
        for i, j in directed:
            if _canon(i, j) not in edges:
                raise BadArgs(f"support pair {(i, j)} is not an edge of the problem graph")
    used_edges = {_canon(i, j) for i, j in directed}
    neighbours: dict[int, list[int]] = {i: [] for i in p.graph.vertices}
    for i, j in sorted(used_edges):
        neighbours[i].append(j)
        neighbours[j].append(i)

    alpha, beta = {}, {}
    for i in p.graph.vertices:
        target = omega_bar - p.omega[i - 1]
        positive = sorted(j for j in ss.plus(i) if (i, j) in directed and j in neighbours[i])
        if not positive and i not in ss.degenerate:
            raise EmptyPositiveSet(i)
        values = {j: prototype_value(part.kind(i, j), p.delta(i, j)) for j in neighbours[i]}
        coef = {j: epsilon for j in neighbours[i]}
        if positive:
            denom = sum(values[j] ** 2 for j in positive)
            for j in positive:
                coef[j] = abs(target) * abs(values[j]) / denom
            if compensate:
                leftover = target - sum(epsilon * values[j] for j in neighbours[i] if j not in positive)
                scale = leftover / target
                if not scale > 0:
                    raise NotSolvable(
                        f"epsilon={epsilon} terms overwhelm agent {i}; cannot compensate with positive coefficients"
                    )
                for j in positive:
                    coef[j] *= scale
        for j, v in coef.items():
            table = alpha if part.kind(i, j) is CouplingKind.ATTRACTIVE else beta
            table[(i, j)] = v
    return CouplingSolution(
        omega_bar=omega_bar,
        epsilon=epsilon,
        alpha=alpha,
        beta=beta,
        compensated=compensate,
        degenerate_agents=tuple(sorted(ss.degenerate)),
    )


def verify_limit_cycle(p: Problem, s: CouplingSolution) -> np.ndarray:
    """Residual ``omega_bar - omega_i - sum(coupling terms at the target)`` per agent."""
    res = np.array([s.omega_bar - w for w in p.omega])
    for i, j, kind, value in s.arcs():
        res[i - 1] -= value * prototype_value(kind, p.delta(i, j))
    return res


# --- least communication ---------------------------------------------------

def min_edge_subgraph_mixed(p: Problem) -> UndirectedGraph:
    """Any spanning tree is a minimum solvable subgraph when both kinds are allowed."""
    check = check_solvability(Problem(p.graph, p.omega, p.deltas, Mode.MIXED, p.omega_bar))
    if not check.feasible:
        raise NotSolvable(check.reason)
    return UndirectedGraph(p.n, spanning_tree(p.graph))


@dataclass(frozen=True)
class LeastCommunication:
    """Minimal attractive-only coupling pattern.

    ``directed_links`` holds pairs ``(i, j)`` (agent i coupled to agent j);
    ``safe_links`` adds every reverse pair so each used edge is bidirectional.
    ``count == n + c - 1 + sum(n_k - 1)``.
    """

    directed_links: frozenset
    safe_links: frozenset
    count: int
    c: int
    n_k: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    root_sccs: tuple[tuple[int, ...], ...]

    @property
    def formula_count(self) -> int:
        n = sum(len(c) for c in self.components)
        return n + self.c - 1 + sum(k - 1 for k in self.n_k)


def positive_digraph(p: Problem, omega_bar: float) -> DirectedGraph:
    """Arc ``i -> j`` for every ``j`` in agent i's attractive positive set."""
    arcs = [(i, j) for i in p.graph.vertices for j in attractive_plus_neighbours(p, omega_bar, i)]
    return DirectedGraph(p.n, tuple(arcs))


def min_edge_subgraph_attractive(p: Problem, omega_bar: float) -> LeastCommunication:
    """Fewest directed attractive links that keep the design solvable and connected.

    Agents are grouped by the positive-set graph; inside each group the
    independent components are counted on the influence graph (arc ``j -> i``
    whenever i draws on j), i.e. groups of agents that only draw on each
    other. Each agent links once toward such a group, breadth-first, and one
    extra link per additional group or component joins the pieces.
    """
    if p.mode is not Mode.ATTRACTIVE_ONLY:
        p = Problem(p.graph, p.omega, p.deltas, Mode.ATTRACTIVE_ONLY, p.omega_bar)
    bad = _degenerate_edges(p)
    if bad:
        raise NotSolvable(f"target phase difference is pi mod 2pi on edge(s) {bad}")
    empty = [i for i in p.graph.vertices if not attractive_plus_neighbours(p, omega_bar, i)]
    if empty:
        raise NotSolvable(f"at omega_bar={omega_bar} agent(s) {empty} have no sign-compatible neighbour")

    plus = positive_digraph(p, omega_bar)
    influence = DirectedGraph(p.n, tuple((j, i) for i, j in plus.arcs))
    comps = connected_components(plus.symmetrized())
    roots = independent_sccs(influence)
    comp_of = {v: k for k, block in enumerate(comps) for v in block}
    n_k = [0] * len(comps)
    for block in roots:
        n_k[comp_of[block[0]]] += 1

    succ = plus.successors()
    pred: dict[int, list[int]] = {v: [] for v in p.graph.vertices}
    for i, j in plus.arcs:
        pred[j].append(i)
    link: dict[int, int] = {}
    for block in roots:
        members = set(block)
        r = block[0]
        queue = deque([r])
        reached = {r}
        while queue:
            u = queue.popleft()
            for v in sorted(pred[u]):
                if v in members and v not in reached:
                    reached.add(v)
                    link[v] = u
                    queue.append(v)
        link[r] = min(j for j in succ[r] if j in members)
    queue = deque(sorted(link))
    while queue:
        u = queue.popleft()
        for v in sorted(pred[u]):
            if v not in link:
                link[v] = u
                queue.append(v)
    links = {(i, j) for i, j in link.items()}

    # join the pieces of the chosen links along any graph edges
    pieces = connected_components(UndirectedGraph(p.n, tuple(links)))
    piece_of = {v: k for k, block in enumerate(pieces) for v in block}
    joined = {piece_of[1]}
    while len(joined) < len(pieces):
        for i, j in p.graph.edges:
            a, b = piece_of[i], piece_of[j]
            if (a in joined) != (b in joined):
                new, old = (i, j) if b in joined else (j, i)
                links.add((new, old))
                joined.add(piece_of[new])
                break

    safe = links | {(j, i) for i, j in links}
    result = LeastCommunication(
        directed_links=frozenset(links),
        safe_links=frozenset(safe),
        count=len(links),
        c=len(comps),
        n_k=tuple(n_k),
        components=tuple(tuple(c) for c in comps),
        root_sccs=tuple(tuple(b) for b in roots),
    )
    return result


@dataclass(frozen=True)
class Design:
    """Everything ``design`` decided: the solution plus the support it was built on."""

    solution: CouplingSolution
    partition: EdgePartition
    support: Optional[frozenset] = None
    least: Optional[LeastCommunication] = None


def design(
    p: Problem,
    omega_bar: Optional[float] = None,
    epsilon: float = DEFAULT_EPSILON,
    compensate: bool = False,
    least_communication: bool = False,
) -> Design:
    """Solvability check, frequency choice, edge split and coefficients in one call."""
    check = check_solvability(p)
    if not check.feasible:
        raise NotSolvable(check.reason)
    if omega_bar is None:
        omega_bar = select_omega_bar(p, check)
    part = classify_edges(p, omega_bar)
    support, least = None, None
    if least_communication:
        if p.mode is Mode.ATTRACTIVE_ONLY:
            least = min_edge_subgraph_attractive(p, omega_bar)
            support = least.directed_links
        else:
            # any spanning tree works, but it needs its own split: edges are re-classified on the tree
            tree = min_edge_subgraph_mixed(p)
            support = frozenset(tree.edges) | frozenset((j, i) for i, j in tree.edges)
            sub = p.restricted(tree.edges)
            part = classify_edges(sub, omega_bar)
            sol = min_energy_coefficients(sub, omega_bar, part, epsilon=epsilon, compensate=compensate)
            return Design(sol, part, support, None)
    sol = min_energy_coefficients(p, omega_bar, part, support=support, epsilon=epsilon, compensate=compensate)
    return Design(sol, part, support, least)

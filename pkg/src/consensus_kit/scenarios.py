"""Ready-made problems: the two seven-agent tree formations and the directed barrier-crossing demo."""
from __future__ import annotations

import math

import numpy as np

from .graph import UndirectedGraph
from .shaping import CouplingSolution, Mode, Problem

TREE7_EDGES = ((1, 3), (2, 3), (3, 4), (4, 5), (3, 6), (6, 7))
TREE7_OMEGA = (-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6)
TREE7_OMEGA_BAR = 0.1
# gaps between consecutive agents around the circle
CLUSTERED_GAPS = (0.1, 1.3, 0.2, 0.2, 1.3, 0.1)


def balanced_positions() -> np.ndarray:
    return np.array([k * 2.0 * math.pi / 7.0 for k in range(7)])


def clustered_positions() -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(CLUSTERED_GAPS)])


def balanced_problem(mode: Mode = Mode.ATTRACTIVE_ONLY) -> Problem:
    g = UndirectedGraph(7, TREE7_EDGES)
    return Problem.from_positions(g, TREE7_OMEGA, balanced_positions(), mode, TREE7_OMEGA_BAR)


def clustered_problem(mode: Mode = Mode.ATTRACTIVE_ONLY) -> Problem:
    g = UndirectedGraph(7, TREE7_EDGES)
    return Problem.from_positions(g, TREE7_OMEGA, clustered_positions(), mode, TREE7_OMEGA_BAR)


# Directed repulsion: 1->2, 2->3, 3->1, 2->4, 4->1, an arc u->v meaning v is repelled by u.
FIG2_ARCS = ((1, 2), (2, 3), (3, 1), (2, 4), (4, 1))
FIG2_OMEGA = (0.0, 0.0, -0.5, 0.5)


def fig2_initial_phases() -> np.ndarray:
    """Agent 1 at 0, agent 2 opposite, agents 3 and 4 at +-70 degrees."""
    return np.radians([0.0, 180.0, 70.0, -70.0])


def fig2_problem() -> Problem:
    g = UndirectedGraph(4, FIG2_ARCS)
    return Problem.from_positions(g, FIG2_OMEGA, fig2_initial_phases(), Mode.MIXED)


def fig2_solution(bidirectional: bool = False, epsilon: float = 0.01, strength: float = 1.0) -> CouplingSolution:
    """Unit repulsion along the arcs; optionally epsilon repulsion back along each arc."""
    beta = {(v, u): strength for u, v in FIG2_ARCS}
    if bidirectional:
        for u, v in FIG2_ARCS:
            beta.setdefault((u, v), epsilon)
    return CouplingSolution(omega_bar=0.0, epsilon=epsilon, beta=beta)

"""Phase consensus on the circle: region counting, coupling design and simulation."""
from .coupling import CouplingKind, ScaledCoupling, eval_attractive, eval_coupling, eval_repulsive
from .graph import DirectedGraph, Orientation, UndirectedGraph
from .regions import RegionReport, count_regions_repulsive
from .shaping import CouplingSolution, Mode, Problem, design
from .simulator import SimConfig, SimState, Trajectory, detect_phase_lock, formation_error, sample_initial_phases, simulate

__version__ = "0.1.0"

__all__ = [
    "CouplingKind",
    "CouplingSolution",
    "DirectedGraph",
    "Mode",
    "Orientation",
    "Problem",
    "RegionReport",
    "ScaledCoupling",
    "SimConfig",
    "SimState",
    "Trajectory",
    "UndirectedGraph",
    "count_regions_repulsive",
    "design",
    "detect_phase_lock",
    "eval_attractive",
    "eval_coupling",
    "eval_repulsive",
    "formation_error",
    "sample_initial_phases",
    "simulate",
    "__version__",
]

"""Static figures for simulation reports.

Figures are built on bare ``Figure`` objects with the Agg canvas rather than
through pyplot, so worker threads of a sweep never share global state.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .coupling import wrap_pi
from .shaping import Problem
from .simulator import ORDERING_CHANGE, Trajectory

STYLE = {
    "figsize": (8.0, 6.5),
    "dpi": 120,
    "linewidth": 1.2,
    "fontsize": 9,
}


def _new_figure(nrows: int, height_ratios: Optional[Sequence[float]] = None):
    fig = Figure(figsize=STYLE["figsize"], dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, 1, sharex=True, gridspec_kw={"height_ratios": height_ratios} if height_ratios else None)
    return fig, np.atleast_1d(axes)


def relative_phases(traj: Trajectory, reference: int = 1) -> np.ndarray:
    """Phases relative to agent ``reference`` (1-based), wrapped to (-pi, pi]."""
    rel = traj.theta - traj.theta[:, reference - 1:reference]
    return np.asarray(wrap_pi(rel))


def trajectory_figure(traj: Trajectory, omega_bar: Optional[float] = None, reference: int = 1,
                      title: str = "") -> Figure:
    """Relative phases (top) and phase velocities (bottom) against time."""
    fig, (ax_phase, ax_vel) = _new_figure(2, (3, 2))
    rel = relative_phases(traj, reference)
    lw = STYLE["linewidth"]
    for i in range(traj.n_agents):
        ax_phase.plot(traj.t, rel[:, i], lw=lw, label=f"agent {i + 1}")
        ax_vel.plot(traj.t, traj.theta_dot[:, i], lw=lw)
    for e in traj.events_of(ORDERING_CHANGE):
        ax_phase.axvline(e.t, color="0.4", ls=":", lw=0.8)
    if omega_bar is not None:
        ax_vel.axhline(omega_bar, color="k", ls="--", lw=0.8)
    ax_phase.set_ylim(-math.pi * 1.05, math.pi * 1.05)
    ax_phase.set_yticks([-math.pi, -math.pi / 2, 0.0, math.pi / 2, math.pi])
    ax_phase.set_yticklabels([r"$-\pi$", r"$-\pi/2$", "0", r"$\pi/2$", r"$\pi$"])
    ax_phase.set_ylabel(rf"$\theta_i - \theta_{reference}$")
    ax_vel.set_ylabel(r"$\dot\theta_i$")
    ax_vel.set_xlabel("t")
    ax_phase.legend(loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=STYLE["fontsize"], frameon=False)
    if title:
        ax_phase.set_title(title, fontsize=STYLE["fontsize"] + 1)
    fig.tight_layout()
    return fig


def formation_figure(theta: np.ndarray, p: Optional[Problem] = None, title: str = "") -> Figure:
    """Agents on the unit circle, with the target formation as hollow markers."""
    fig = Figure(figsize=(4.5, 4.5), dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    s = np.linspace(0.0, 2.0 * math.pi, 256)
    ax.plot(np.cos(s), np.sin(s), color="0.7", lw=0.8)
    theta = np.asarray(theta, dtype=float)
    rel = theta - theta[0]
    ax.scatter(np.cos(rel), np.sin(rel), s=40, zorder=3, label="final")
    for i, a in enumerate(rel):
        ax.annotate(str(i + 1), (1.12 * math.cos(a), 1.12 * math.sin(a)), ha="center", va="center",
                    fontsize=STYLE["fontsize"])
    if p is not None:
        target = p.target_phases()
        target = target - target[0]
        ax.scatter(np.cos(target), np.sin(target), s=90, facecolors="none", edgecolors="k", zorder=2,
                   label="target")
        ax.legend(loc="lower right", fontsize=STYLE["fontsize"], frameon=False)
    ax.set_aspect("equal")
    ax.set_xlim(-1.3, 1.3)
    ax.set_ylim(-1.3, 1.3)
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title, fontsize=STYLE["fontsize"] + 1)
    fig.tight_layout()
    return fig


def save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png")
    return path


def write_report_figures(traj: Trajectory, stem, p: Optional[Problem] = None,
                         omega_bar: Optional[float] = None, title: str = "") -> list[Path]:
    """Write ``<stem>_phases.png`` and ``<stem>_formation.png``; return their paths."""
    stem = Path(stem)
    out = [save(trajectory_figure(traj, omega_bar, title=title), stem.with_name(stem.name + "_phases.png"))]
    out.append(save(formation_figure(traj.theta[-1], p, title=title), stem.with_name(stem.name + "_formation.png")))
    return out

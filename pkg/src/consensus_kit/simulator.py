"""Fixed-step RK4 simulation of the coupled phase dynamics.

Phases are kept unwrapped on the real line; wrapping happens only when a
coupling is evaluated. Barrier hits inside a step trigger step halving; a
coupled pair moving onto a different sheet between barriers (a crossing)
is logged as an ``OrderingChange`` event.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .coupling import CouplingKind, eval_derivative, wrap_pi
from .errors import BadArgs, BarrierHit, InvalidInit, StepCollapse
from .shaping import CouplingSolution, Problem

BARRIER_APPROACH = "BarrierApproach"
ORDERING_CHANGE = "OrderingChange"
PHASE_LOCKED = "PhaseLocked"


@dataclass(frozen=True)
class SimConfig:
    step: float = 1e-3
    t_end: float = 100.0
    barrier_guard: float = 1e-6
    min_step: float = 1e-8
    lock_tol: float = 1e-3
    record_stride: int = 100
    lock_window: int = 50
    stop_on_lock: bool = True

    def __post_init__(self):
        for name in ("step", "t_end", "barrier_guard", "min_step", "lock_tol"):
            if not getattr(self, name) > 0:
                raise BadArgs(f"{name} must be positive")
        if not self.min_step < self.step:
            raise BadArgs("min_step must be smaller than step")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise BadArgs("record_stride must be a positive integer")
        if self.lock_window < 2:
            raise BadArgs("lock_window must be at least 2 samples")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SimState:
    t: float
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    detail: str

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind, "detail": self.detail}


@dataclass
class Trajectory:
    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    events: list = field(default_factory=list)

    @property
    def n_agents(self) -> int:
        return self.theta.shape[1]

    def events_of(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]

    def final_state(self) -> SimState:
        return SimState(float(self.t[-1]), self.theta[-1].copy())

    def write_csv(self, path) -> None:
        n = self.n_agents
        header = ["t"] + [f"theta_{i}" for i in range(1, n + 1)] + [f"dtheta_{i}" for i in range(1, n + 1)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k in range(len(self.t)):
                w.writerow([repr(float(self.t[k]))] + [repr(float(x)) for x in self.theta[k]]
                           + [repr(float(x)) for x in self.theta_dot[k]])

    def write_events(self, path) -> None:
        with open(path, "w") as fh:
            for e in self.events:
                fh.write(json.dumps(e.to_json()) + "\n")

    @classmethod
    def read_csv(cls, path) -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = (data.shape[1] - 1) // 2
        return cls(data[:, 0], data[:, 1:1 + n], data[:, 1 + n:])


@dataclass(frozen=True)
class LockResult:
    locked: bool
    t_lock: Optional[float] = None
    omega_est: Optional[float] = None
    formation_est: Optional[np.ndarray] = None


class _Arrays:
    """Flat coupling arrays plus the coupled pairs watched for crossings."""

    def __init__(self, p: Problem, s: CouplingSolution):
        s.check_against(p)
        arcs = s.arcs()
        self.omega = np.array(p.omega, dtype=float)
        self.src = np.array([a[0] - 1 for a in arcs], dtype=np.int64)
        self.dst = np.array([a[1] - 1 for a in arcs], dtype=np.int64)
        self.coef = np.array([a[3] for a in arcs], dtype=float)
        self.kind = np.array([0 if a[2] is CouplingKind.ATTRACTIVE else 1 for a in arcs], dtype=np.int64)
        pairs = {}
        for i, j, kind, _ in arcs:
            pairs[(min(i, j), max(i, j))] = kind
        self.pairs = sorted(pairs)
        self.pa = np.array([a - 1 for a, _ in self.pairs], dtype=np.int64)
        self.pb = np.array([b - 1 for _, b in self.pairs], dtype=np.int64)
        self.pkind = np.array(
            [0 if pairs[e] is CouplingKind.ATTRACTIVE else 1 for e in self.pairs], dtype=np.int64
        )

    def rhs(self, theta, guard):
        out = np.empty(len(self.omega))
        status = _kernels.rhs_into(np.asarray(theta, dtype=float), self.omega, self.src, self.dst,
                                   self.coef, self.kind, guard, out)
        return status, out


def _theta_of(state) -> np.ndarray:
    return np.asarray(state.theta if isinstance(state, SimState) else state, dtype=float)


def rhs(state, p: Problem, s: CouplingSolution, guard: float = 1e-9) -> np.ndarray:
    """Phase velocities at ``state`` (a SimState or a phase vector)."""
    arr = _Arrays(p, s)
    status, out = arr.rhs(_theta_of(state), guard)
    if status != _kernels.OK:
        raise BarrierHit("a coupled pair sits on its barrier")
    return out


def jacobian(state, p: Problem, s: CouplingSolution, guard: float = 1e-9) -> np.ndarray:
    """Linearisation of the phase dynamics; rows sum to zero."""
    theta = _theta_of(state)
    n = p.n
    a = np.zeros((n, n))
    for i, j, kind, value in s.arcs():
        a[i - 1, j - 1] += value * eval_derivative(kind, theta[j - 1] - theta[i - 1], guard)
    for i in range(n):
        a[i, i] = -math.fsum(a[i, k] for k in range(n) if k != i)
    return a


def rk4_step(state: SimState, p: Problem, s: CouplingSolution, h: float,
             cfg: Optional[SimConfig] = None) -> SimState:
    """One RK4 step of length ``h``, halving locally when a stage hits a barrier."""
    if not h > 0:
        raise BadArgs("step must be positive")
    cfg = cfg or SimConfig(step=h, min_step=min(1e-8, h / 2))
    arr = _Arrays(p, s)
    status, new, _, _ = _kernels.advance(state.theta.astype(float), h, cfg.min_step, arr.omega, arr.src,
                                         arr.dst, arr.coef, arr.kind, cfg.barrier_guard)
    if status != _kernels.OK:
        raise StepCollapse(f"step fell below {cfg.min_step} near a barrier", t_last=state.t)
    return SimState(state.t + h, new)


def formation_error(state, p: Problem) -> float:
    """Largest deviation of an edge's phase difference from its target."""
    theta = _theta_of(state)
    worst = 0.0
    for (i, j), d in p.deltas.items():
        worst = max(worst, abs(wrap_pi(theta[j - 1] - theta[i - 1] - d)))
    return float(worst)


def check_initial_state(theta, p: Problem, s: CouplingSolution, guard: float) -> None:
    arr = _Arrays(p, s)
    status, _ = arr.rhs(np.asarray(theta, dtype=float), guard)
    if status != _kernels.OK or not np.all(np.isfinite(theta)) or len(theta) != p.n:
        raise InvalidInit("initial phases must be finite and keep every coupled pair off its barrier")


def sample_initial_phases(p: Problem, s: CouplingSolution, rng: np.random.Generator,
                          margin: float = 1e-3, max_tries: int = 100000) -> np.ndarray:
    """Uniform phases on [0, 2pi)^N, rejected while any coupled pair is within ``margin`` of a barrier."""
    arr = _Arrays(p, s)
    for _ in range(max_tries):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=p.n)
        status, _ = arr.rhs(theta, margin)
        if status == _kernels.OK:
            return theta
    raise InvalidInit("rejection sampling found no admissible initial state")


def _lock_window_ok(t, theta, theta_dot, omega_bar, tol) -> bool:
    if np.max(np.abs(theta_dot - omega_bar)) >= tol:
        return False
    rel = theta - theta[:, :1]
    spread = rel.max(axis=0) - rel.min(axis=0)
    # pairwise relative phases vary at most the sum of two agents' spreads vs agent 1
    if spread.max() * 2 < tol:
        return True
    diffs = rel[:, :, None] - rel[:, None, :]
    return float((diffs.max(axis=0) - diffs.min(axis=0)).max()) < tol


def _lock_summary(t, theta, omega_bar, k0, k1) -> LockResult:
    dt = t[k1] - t[k0]
    omega_est = float(np.mean((theta[k1] - theta[k0]) / dt)) if dt > 0 else float(omega_bar)
    formation = np.array([wrap_pi(x) for x in theta[k1] - theta[k1, 0]])
    return LockResult(True, float(t[k1]), omega_est, formation)


def detect_phase_lock(traj: Trajectory, omega_bar: float, tol: float = 1e-3, window: int = 50) -> LockResult:
    """First trailing window in which every agent runs at ``omega_bar`` and the formation is frozen."""
    t, theta, dtheta = traj.t, traj.theta, traj.theta_dot
    if len(t) == 0:
        raise BadArgs("empty trajectory")
    window = min(window, len(t))
    for k1 in range(window - 1, len(t)):
        k0 = k1 - window + 1
        if _lock_window_ok(t[k0:k1 + 1], theta[k0:k1 + 1], dtheta[k0:k1 + 1], omega_bar, tol):
            return _lock_summary(t, theta, omega_bar, k0, k1)
    return LockResult(False)


def simulate(p: Problem, s: CouplingSolution, init, cfg: Optional[SimConfig] = None,
             omega_bar: Optional[float] = None) -> Trajectory:
    """Integrate from ``init`` until ``cfg.t_end`` (or phase lock when ``stop_on_lock``).

    Raises StepCollapse carrying the trajectory up to the last valid sample.
    """
    cfg = cfg or SimConfig()
    omega_bar = s.omega_bar if omega_bar is None else omega_bar
    arr = _Arrays(p, s)
    theta = np.asarray(init, dtype=float).copy()
    check_initial_state(theta, p, s, cfg.barrier_guard)

    h = cfg.step
    stride = int(cfg.record_stride)
    total_steps = int(round(cfg.t_end / h))
    n_samples = total_steps // stride + 1
    ts = np.empty(n_samples)
    thetas = np.empty((n_samples, p.n))
    dthetas = np.empty((n_samples, p.n))
    events: list[Event] = []
    ev_cap = 256
    ev_step = np.empty(ev_cap, dtype=np.int64)
    ev_pair = np.empty(ev_cap, dtype=np.int64)
    ev_from = np.empty(ev_cap, dtype=np.int64)
    ev_to = np.empty(ev_cap, dtype=np.int64)

    def record(k, step_index, th):
        status, v = arr.rhs(th, cfg.barrier_guard)
        ts[k] = step_index * h
        thetas[k] = th
        dthetas[k] = v if status == _kernels.OK else np.nan

    record(0, 0, theta)
    count = 1
    locked = False
    step_index = 0
    while step_index < total_steps:
        nsteps = min(stride, total_steps - step_index)
        status, theta_new, done, n_ev, halvings = _kernels.integrate(
            theta, step_index, nsteps, h, cfg.min_step, arr.omega, arr.src, arr.dst, arr.coef, arr.kind,
            cfg.barrier_guard, arr.pa, arr.pb, arr.pkind, ev_step, ev_pair, ev_from, ev_to)
        for e in range(min(n_ev, ev_cap)):
            a, b = arr.pairs[ev_pair[e]]
            went_up = ev_to[e] > ev_from[e]
            mover, other = (b, a) if went_up else (a, b)
            events.append(Event(float(ev_step[e] * h), ORDERING_CHANGE,
                                f"agent {mover} crossed agent {other} (pair {a}-{b})"))
        if halvings:
            events.append(Event(float((step_index + done) * h), BARRIER_APPROACH,
                                f"{halvings} step halving(s) near a barrier"))
        if status != _kernels.OK:
            t_last = (step_index + done) * h
            traj = Trajectory(ts[:count].copy(), thetas[:count].copy(), dthetas[:count].copy(), events)
            exc = StepCollapse(f"step collapsed below {cfg.min_step} at t={t_last}", t_last=t_last)
            exc.trajectory = traj
            raise exc
        theta = theta_new
        step_index += done
        if done == stride:
            record(count, step_index, theta)
            count += 1
        if not locked and count >= cfg.lock_window:
            k0 = count - cfg.lock_window
            if _lock_window_ok(ts[k0:count], thetas[k0:count], dthetas[k0:count], omega_bar, cfg.lock_tol):
                locked = True
                summary = _lock_summary(ts, thetas, omega_bar, k0, count - 1)
                events.append(Event(float(ts[count - 1]), PHASE_LOCKED,
                                    f"omega_est={summary.omega_est:.6g}"))
                if cfg.stop_on_lock:
                    break
    return Trajectory(ts[:count].copy(), thetas[:count].copy(), dthetas[:count].copy(), events)

"""Prototype coupling functions.

Attractive prototype ``tan(theta / 2)``: odd, increasing on (-pi, pi), barrier at
odd multiples of pi. Repulsive prototype ``-cot(theta / 2)``: zero at pi,
increasing on (0, 2pi), barrier at even multiples of pi.

All functions accept scalars or numpy arrays and wrap their argument onto
the branch of the requested kind before evaluating.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BadArgs, BarrierHit

TWO_PI = 2.0 * np.pi
DEFAULT_GUARD = 1e-9


class CouplingKind(str, enum.Enum):
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _centred(theta):
    """Representative in (-pi, pi], exact for |theta| <= pi."""
    theta = np.asarray(theta, dtype=float)
    w = np.where(np.abs(theta) <= np.pi, theta, theta - TWO_PI * np.floor(theta / TWO_PI + 0.5))
    w = np.where(w <= -np.pi, w + TWO_PI, w)
    return np.where(w > np.pi, w - TWO_PI, w)


def wrap_to_branch(theta, kind: CouplingKind):
    """Representative of ``theta`` in (-pi, pi] (attractive) or [0, 2pi) (repulsive)."""
    w = _centred(theta)
    if CouplingKind(kind) is CouplingKind.REPULSIVE:
        w = np.where(w < 0, w + TWO_PI, w)
        # a tiny negative input can round up to exactly 2pi
        w = np.where(w >= TWO_PI, 0.0, w)
    return _out(w)


def wrap_pi(theta):
    """Shorthand for the attractive branch (-pi, pi]."""
    return wrap_to_branch(theta, CouplingKind.ATTRACTIVE)


def _check_attractive(w, guard):
    bad = np.abs(w) >= np.pi - guard
    if np.any(bad):
        hit = np.asarray(w)[bad] if np.ndim(w) else w
        raise BarrierHit(f"attractive coupling evaluated at the pi barrier (wrapped {hit})", theta=hit)


def _check_repulsive(w, guard):
    bad = (w <= guard) | (w >= TWO_PI - guard)
    if np.any(bad):
        hit = np.asarray(w)[bad] if np.ndim(w) else w
        raise BarrierHit(f"repulsive coupling evaluated at the 0 barrier (wrapped {hit})", theta=hit)


def eval_attractive(theta, guard: float = DEFAULT_GUARD):
    w = np.asarray(wrap_to_branch(theta, CouplingKind.ATTRACTIVE))
    _check_attractive(w, guard)
    return _out(np.tan(0.5 * w))


def eval_repulsive(theta, guard: float = DEFAULT_GUARD):
    w = np.asarray(wrap_to_branch(theta, CouplingKind.REPULSIVE))
    _check_repulsive(w, guard)
    # evaluate on the centred representative so g(-x) == -g(x) bit for bit
    h = 0.5 * _centred(theta)
    return _out(-np.cos(h) / np.sin(h))


def eval_coupling(kind: CouplingKind, theta, guard: float = DEFAULT_GUARD):
    if CouplingKind(kind) is CouplingKind.ATTRACTIVE:
        return eval_attractive(theta, guard)
    return eval_repulsive(theta, guard)


def eval_derivative(kind: CouplingKind, theta, guard: float = DEFAULT_GUARD):
    """Slope of the prototype: 1/2 sec^2(theta/2) or 1/2 csc^2(theta/2)."""
    kind = CouplingKind(kind)
    w = np.asarray(wrap_to_branch(theta, kind))
    if kind is CouplingKind.ATTRACTIVE:
        _check_attractive(w, guard)
        return _out(0.5 / np.cos(0.5 * w) ** 2)
    _check_repulsive(w, guard)
    return _out(0.5 / np.sin(0.5 * w) ** 2)


@dataclass(frozen=True)
class ScaledCoupling:
    """``coefficient * prototype(kind)``."""

    kind: CouplingKind
    coefficient: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CouplingKind(self.kind))
        if not self.coefficient > 0:
            raise BadArgs(f"coupling coefficient must be positive, got {self.coefficient}")

    def __call__(self, theta, guard: float = DEFAULT_GUARD):
        return self.coefficient * eval_coupling(self.kind, theta, guard)

    def derivative(self, theta, guard: float = DEFAULT_GUARD):
        return self.coefficient * eval_derivative(self.kind, theta, guard)

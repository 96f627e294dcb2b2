"""Vector fields of the nES system and its averaged/reduced approximations.

Every ``*_field`` builder returns a plain closure suited to the
integrator: ``f(t, x1, x2) -> (v1, v2)`` for planar systems and
``f(t, x1) -> v1`` for scalar ones.  The ``*_rhs`` functions are the
one-shot forms taking a :class:`State2`.

The ladder, from the original system down:

* original nES: both players dither and measure their cost;
* partially averaged: the follower replaced by its gradient flow;
* reduced order model (ROM): the follower pinned to ``x2 = h(x1)``;
* averaged ROM: gradient flow of the reduced leader cost;
* boundary layer model (BLM): the follower's deviation from ``h`` with
  the leader frozen, in stretched time ``tau = (t - t0) / eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .equilibria import BestResponseMap, h_prime
from .model import Game

__all__ = [
    "NesParams", "State2", "nes_field", "partially_averaged_field", "rom_field",
    "averaged_rom_field", "nash_averaged_field", "blm_field", "nes_rhs",
    "partially_averaged_rhs", "blm_rhs", "rom_rhs", "averaged_rom_rhs", "qss_eval",
    "nash_averaged_rhs", "lie_bracket_coeff", "STACKELBERG_QUADRATIC",
    "NASH_QUADRATIC", "STACKELBERG_FISHWAR", "NASH_FISHWAR",
]


@dataclass(frozen=True)
class NesParams:
    """Design parameters: dither amplitudes ``alpha``, gains ``k`` and
    dither frequencies ``omega`` (rad/s) of leader (1) and follower (2)."""

    alpha1: float
    k1: float
    omega1: float
    alpha2: float
    k2: float
    omega2: float

    def __post_init__(self):
        for name in ("alpha1", "k1", "omega1", "alpha2", "k2", "omega2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if self.omega1 == self.omega2:
            raise ValueError("dither frequencies omega1 and omega2 must differ")

    @property
    def epsilon(self) -> float:
        """Time-scale ratio ``1 / (alpha2 k2)``."""
        return 1.0 / (self.alpha2 * self.k2)

    def replace(self, **changes) -> "NesParams":
        fields = {k: getattr(self, k) for k in ("alpha1", "k1", "omega1", "alpha2", "k2", "omega2")}
        fields.update(changes)
        return NesParams(**fields)

    def as_dict(self) -> dict:
        return {"alpha1": self.alpha1, "k1": self.k1, "omega1": self.omega1,
                "alpha2": self.alpha2, "k2": self.k2, "omega2": self.omega2,
                "epsilon": self.epsilon}


class State2(NamedTuple):
    x1: float
    x2: float


SQRT2 = math.sqrt(2.0)
STACKELBERG_QUADRATIC = NesParams(1e-2, 2.0, 10.0, 0.1, 500.0, 500.0 * SQRT2)
NASH_QUADRATIC = NesParams(1e-2, 5.0, 10.0, 1e-2, 5.0, 10.0 * SQRT2)
STACKELBERG_FISHWAR = NesParams(1e-2, 10.0, 20.0, 5e-2, 100.0, 1000.0 * SQRT2)
NASH_FISHWAR = NesParams(1e-2, 10.0, 20.0, 1e-2, 10.0, 20.0 * SQRT2)


def _h(g: Game, h: Optional[Callable[[float], float]]) -> Callable[[float], float]:
    return h if h is not None else BestResponseMap(g)


def nes_field(p: NesParams, g: Game) -> Callable:
    """Original nES: each player dithers with phase shifted by its own cost."""
    a1, a2 = math.sqrt(p.alpha1 * p.omega1), math.sqrt(p.alpha2 * p.omega2)
    w1, w2, k1, k2 = p.omega1, p.omega2, p.k1, p.k2
    JL, JF = g.leader_cost.value, g.follower_cost.value
    cos = math.cos

    def f(t, x1, x2):
        return (a1 * cos(w1 * t + k1 * JL(x1, x2)),
                a2 * cos(w2 * t + k2 * JF(x1, x2)))
    return f


def partially_averaged_field(p: NesParams, g: Game) -> Callable:
    """Leader still dithering, follower on its averaged gradient flow."""
    a1 = math.sqrt(p.alpha1 * p.omega1)
    w1, k1 = p.omega1, p.k1
    c2 = 0.5 * p.alpha2 * p.k2
    JL, dJF = g.leader_cost.value, g.follower_cost.partial2
    cos = math.cos

    def f(t, x1, x2):
        return a1 * cos(w1 * t + k1 * JL(x1, x2)), -c2 * dJF(x1, x2)
    return f


def rom_field(p: NesParams, g: Game, h: Optional[Callable[[float], float]] = None) -> Callable:
    """Leader dithering against a follower pinned to its best response."""
    a1 = math.sqrt(p.alpha1 * p.omega1)
    w1, k1 = p.omega1, p.k1
    JL = g.leader_cost.value
    h = _h(g, h)
    cos = math.cos

    def f(t, x1):
        return a1 * cos(w1 * t + k1 * JL(x1, h(x1)))
    return f


def averaged_rom_field(p: NesParams, g: Game,
                       h: Optional[Callable[[float], float]] = None) -> Callable:
    """Gradient flow of the reduced leader cost, chain rule through ``h'``."""
    c1 = 0.5 * p.alpha1 * p.k1
    jl = g.leader_cost
    h = _h(g, h)

    def f(t, x1):
        x2 = h(x1)
        slope = h_prime(g, x1, h=lambda _: x2)
        return -c1 * (jl.partial1(x1, x2) + jl.partial2(x1, x2) * slope)
    return f


def nash_averaged_field(p: NesParams, g: Game) -> Callable:
    """Simultaneous partial-gradient flow, the Nash-mode reference field."""
    c1, c2 = 0.5 * p.alpha1 * p.k1, 0.5 * p.alpha2 * p.k2
    dJL, dJF = g.leader_cost.partial1, g.follower_cost.partial2

    def f(t, x1, x2):
        return -c1 * dJL(x1, x2), -c2 * dJF(x1, x2)
    return f


def blm_field(g: Game, x1_frozen: float,
              h: Optional[Callable[[float], float]] = None) -> Callable:
    """Boundary layer model in stretched time; ``y = x2 - h(x1_frozen)``."""
    x2_bar = _h(g, h)(x1_frozen)
    dJF = g.follower_cost.partial2

    def f(tau, y):
        return -0.5 * dJF(x1_frozen, y + x2_bar)
    return f


def nes_rhs(t: float, s: State2, p: NesParams, g: Game) -> State2:
    return State2(*nes_field(p, g)(t, s[0], s[1]))


def partially_averaged_rhs(t: float, s: State2, p: NesParams, g: Game) -> State2:
    return State2(*partially_averaged_field(p, g)(t, s[0], s[1]))


def blm_rhs(tau: float, y: float, x1_frozen: float, g: Game) -> float:
    return blm_field(g, x1_frozen)(tau, y)


def rom_rhs(t: float, x1: float, p: NesParams, g: Game) -> float:
    return rom_field(p, g)(t, x1)


def averaged_rom_rhs(x1: float, p: NesParams, g: Game) -> float:
    return averaged_rom_field(p, g)(0.0, x1)


def nash_averaged_rhs(s: State2, p: NesParams, g: Game) -> State2:
    return State2(*nash_averaged_field(p, g)(0.0, s[0], s[1]))


def qss_eval(x1_traj, p: NesParams, g: Game, y0: float,
             h: Optional[Callable[[float], float]] = None, max_tau_step: float = 0.05):
    """Quasi-steady-state follower track along a leader trajectory.

    Returns a two-column trajectory on the grid of ``x1_traj``: ``x2q``,
    the manifold value ``h(x1(t))`` plus the boundary-layer correction
    ``y((t - t0) / eps)`` integrated from ``y0`` with the leader frozen at
    its initial value, and ``h`` the pure manifold track.
    """
    from .integrate import IntegrationSpec, Trajectory, rk4_integrate

    h = _h(g, h)
    x1 = x1_traj.states[:, 0]
    manifold = np.array([h(float(a)) for a in x1])
    n = len(x1)
    if y0 == 0.0 or n == 1:
        layer = np.zeros(n)
    else:
        # stretched-time step matched to the trajectory grid, with substeps
        tau_span = (n - 1) * x1_traj.dt / p.epsilon
        per_sample = x1_traj.dt / p.epsilon
        sub = max(1, math.ceil(per_sample / max_tau_step))
        spec = IntegrationSpec(0.0, tau_span, per_sample / sub, (y0,), record_stride=sub)
        y = rk4_integrate(blm_field(g, float(x1[0]), h=h), spec, labels=("y",))
        layer = y.states[:, 0]
        if len(layer) != n:
            raise RuntimeError(f"boundary layer stopped after {len(layer)} of {n} samples")
    return Trajectory(x1_traj.t0, x1_traj.dt, np.column_stack([manifold + layer, manifold]),
                      ("x2q", "h"))


def _sample(u: Callable, theta: np.ndarray) -> np.ndarray:
    # scalar-only callables (math.cos, ...) are evaluated point by point
    try:
        vals = np.asarray(u(theta), dtype=float)
    except TypeError:
        vals = np.array([u(float(t)) for t in theta], dtype=float)
    return vals * np.ones_like(theta)


def lie_bracket_coeff(u_i: Callable, u_j: Callable, panels: int = 4096,
                      tol: float = 1e-9) -> float:
    """Averaging coefficient ``(1/2pi) int_0^2pi u_j(th) int_0^th u_i(s) ds dth``.

    Composite Simpson on ``panels`` uniform panels, both the inner
    running integral and the outer one.  The waveforms must be
    2pi-periodic with zero mean (checked to ``tol``).
    """
    if panels < 2 or panels % 2:
        raise ValueError("panels must be an even integer >= 2")
    theta = np.linspace(0.0, 2.0 * np.pi, panels + 1)
    ui, uj = _sample(u_i, theta), _sample(u_j, theta)
    for name, u in (("u_i", ui), ("u_j", uj)):
        if abs(u[0] - u[-1]) > tol:
            raise ValueError(f"{name} is not 2pi-periodic")
        mean = simpson(u, x=theta) / (2.0 * np.pi)
        if abs(mean) > tol:
            raise ValueError(f"{name} has non-zero mean {mean:.3e}")
    inner = cumulative_simpson(ui, x=theta, initial=0.0)
    return float(simpson(uj * inner, x=theta) / (2.0 * np.pi))

"""Published parameter sets, default run setups and the simulation summary."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import hierarchy_check
from .dynamics import (NASH_FISHWAR, NASH_QUADRATIC, STACKELBERG_FISHWAR,
                       STACKELBERG_QUADRATIC, NesParams, nes_field)
from .equilibria import nash_equilibrium, stackelberg_equilibrium
from .errors import SolverError
from .integrate import IntegrationSpec, Trajectory, auto_step, final_window_mean, rk4_integrate
from .model import Game

__all__ = ["RunSetup", "default_setup", "simulate", "summarize", "reference_points", "MODES"]

MODES = ("nash", "stackelberg", "custom")

_PARAMS = {
    ("quadratic", "nash"): NASH_QUADRATIC,
    ("quadratic", "stackelberg"): STACKELBERG_QUADRATIC,
    ("fishwar", "nash"): NASH_FISHWAR,
    ("fishwar", "stackelberg"): STACKELBERG_FISHWAR,
}

# Fish War Nash starts at (0.2, 0.7): from (0.4, 0.8) the dither pushes
# u + v^mu_L past the stock within half a second.
_X0 = {
    ("quadratic", "nash"): (0.0, 0.0),
    ("quadratic", "stackelberg"): (0.0, 0.0),
    ("fishwar", "nash"): (0.2, 0.7),
    ("fishwar", "stackelberg"): (1.1, 0.05),
}

_T_END = {
    ("quadratic", "nash"): 2000.0,
    ("quadratic", "stackelberg"): 300.0,
    ("fishwar", "nash"): 300.0,
    ("fishwar", "stackelberg"): 100.0,
}


@dataclass(frozen=True)
class RunSetup:
    params: NesParams
    x0: tuple[float, float]
    t_end: float


def default_setup(game_name: str, mode: str) -> RunSetup:
    """Parameters, initial state and horizon used when none are given.

    Games other than the built-ins borrow the quadratic game's settings.
    """
    if mode not in ("nash", "stackelberg"):
        raise ValueError(f"no defaults for mode {mode!r}")
    key = (game_name if game_name in ("quadratic", "fishwar") else "quadratic", mode)
    return RunSetup(_PARAMS[key], _X0[key], _T_END[key])


def reference_points(g: Game) -> dict:
    """Nash and Stackelberg points: solver results seeded from the game's
    declared references when available, else the declared values, else
    solver results from the origin."""
    out = {}
    refs = dict(g.references)
    for kind, solve in (("nash", lambda s: nash_equilibrium(g, s).point),
                        ("stackelberg", lambda s: stackelberg_equilibrium(g, s[0]).point)):
        seed = refs.get(kind, (0.0, 0.0))
        try:
            out[kind] = tuple(float(v) for v in solve(seed))
        except (SolverError, ArithmeticError, ValueError):
            out[kind] = refs.get(kind)
    return out


def simulate(g: Game, p: NesParams, x0, t_end: float, dt: Optional[float] = None,
             samples: int = 32, record_stride: Optional[int] = None,
             max_halvings: int = 0) -> Trajectory:
    """Integrate the original nES system from ``x0`` over ``[0, t_end]``.

    The step defaults to :func:`auto_step`; about 20000 samples are kept
    unless ``record_stride`` says otherwise.
    """
    if not t_end > 0:
        raise ValueError("empty trajectory: t_end must be positive")
    dt = dt or auto_step(p, samples)
    if record_stride is None:
        record_stride = max(1, int(math.ceil(t_end / dt / 20000)))
    spec = IntegrationSpec(0.0, t_end, dt, tuple(x0), record_stride)
    return rk4_integrate(nes_field(p, g), spec, labels=("x1", "x2"), max_halvings=max_halvings)


def summarize(g: Game, p: NesParams, tr: Trajectory, t_end: float,
              fraction: float = 0.2, refs: Optional[dict] = None) -> dict:
    refs = reference_points(g) if refs is None else refs
    mean = final_window_mean(tr, fraction)

    def dist(key):
        r = refs.get(key)
        return None if r is None else float(np.hypot(mean[0] - r[0], mean[1] - r[1]))

    return {
        "schema": "nes/1",
        "game": g.name,
        "params": p.as_dict(),
        "x0": [float(v) for v in tr.states[0]],
        "t_end_requested": float(t_end),
        "t_end_reached": float(tr.t_end),
        "dt": tr.step,
        "completed": tr.completed,
        "violation": None if tr.violation is None else tr.violation.as_dict(),
        "final_window_fraction": fraction,
        "final_window_mean": [float(v) for v in mean],
        "nash": None if refs.get("nash") is None else list(refs["nash"]),
        "stackelberg": None if refs.get("stackelberg") is None else list(refs["stackelberg"]),
        "distance_to_nash": dist("nash"),
        "distance_to_stackelberg": dist("stackelberg"),
        "hierarchy": hierarchy_check(p).as_dict(),
        "clamp_count": g.clamp_count,
    }

"""Order-of-convergence probes, time-scale checks and design thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import (NesParams, averaged_rom_field, blm_field, nes_field,
                       partially_averaged_field, qss_eval, rom_field)
from .equilibria import BestResponseMap
from .integrate import IntegrationSpec, Trajectory, rk4_integrate, sup_distance
from .model import Game

__all__ = [
    "OrderProbeResult", "fit_slope", "probe_order_omega2", "probe_order_epsilon",
    "probe_order_omega1", "HierarchyReport", "hierarchy_check", "ScalingThresholds",
    "scaling_thresholds", "blm_decay_certificate", "BANDS",
]

# theoretical order and accepted slope band per probe
BANDS = {
    "omega2": (-0.5, (-0.75, -0.25)),
    "epsilon": (1.0, (0.5, 1.5)),
    "omega1": (-0.5, (-0.75, -0.25)),
}


@dataclass(frozen=True)
class OrderProbeResult:
    """Sup errors against a scaled parameter and their log-log slope."""

    parameter: str
    values: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    intercept: float
    window: tuple[float, float]
    target: float
    band: tuple[float, float]
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.band[0] <= self.slope <= self.band[1]

    def as_dict(self) -> dict:
        return {"parameter": self.parameter, "values": list(self.values),
                "errors": list(self.errors), "slope": self.slope,
                "intercept": self.intercept, "window": list(self.window),
                "target": self.target, "band": list(self.band), "pass": self.passed,
                **{k: v for k, v in self.extra.items()}}


def fit_slope(values: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares line through ``(log v, log e)``; returns (slope, intercept).

    Needs at least three points; zero, negative or non-finite errors mean
    the compared systems coincide (or blew up) and are rejected.
    """
    v = np.asarray(values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if v.size != e.size:
        raise ValueError("one error per tested value is required")
    if v.size < 3:
        raise ValueError("at least three values are needed to fit a slope")
    if not np.all(np.isfinite(e)) or np.any(e <= 0.0):
        raise ValueError(f"degenerate probe: errors must be positive and finite, got {e.tolist()}")
    if np.any(v <= 0.0):
        raise ValueError("probe parameter values must be positive")
    slope, intercept = np.polyfit(np.log(v), np.log(e), 1)
    return float(slope), float(intercept)


def _check_increasing(values, name):
    vals = [float(v) for v in values]
    if len(vals) < 3:
        raise ValueError(f"{name} probe needs at least three values")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError(f"{name} values must be strictly increasing")
    return vals


def _step_for(omega: float, samples: int) -> float:
    return 2.0 * math.pi / (omega * samples)


def _run(field, x0, T, dt, labels, t0=0.0):
    tr = rk4_integrate(field, IntegrationSpec(t0, t0 + T, dt, x0), labels=labels)
    if tr.violation is not None:
        raise RuntimeError(f"integration left the domain at t={tr.violation.t}: "
                           f"{tr.violation.message}")
    return tr


def probe_order_omega2(g: Game, p0: NesParams, omega2_values: Sequence[float], T: float = 5.0,
                       x0: tuple[float, float] = (0.0, 0.0), samples: int = 32,
                       fields: Optional[tuple[Callable, Callable]] = None) -> OrderProbeResult:
    """Original nES vs partially averaged system for each ``omega2``.

    Both start from ``x0``; the step resolves ``omega2`` with ``samples``
    points per period.  ``fields`` replaces the pair of field builders
    (used to check that identical systems are rejected).
    """
    vals = _check_increasing(omega2_values, "omega2")
    if vals[0] <= p0.omega1:
        raise ValueError("omega2 values must exceed omega1")
    make_a, make_b = fields or (nes_field, partially_averaged_field)
    errors = []
    for w2 in vals:
        p = p0.replace(omega2=w2)
        dt = _step_for(max(w2, p.omega1), samples)
        a = _run(make_a(p, g), x0, T, dt, ("x1", "x2"))
        b = _run(make_b(p, g), x0, T, dt, ("x1", "x2"))
        errors.append(sup_distance(a, b))
    slope, icpt = fit_slope(vals, errors)
    target, band = BANDS["omega2"]
    return OrderProbeResult("omega2", tuple(vals), tuple(errors), slope, icpt, (0.0, T),
                            target, band)


def probe_order_epsilon(g: Game, p0: NesParams, k2_values: Sequence[float], T: float = 10.0,
                        x0: tuple[float, float] = (0.0, 0.0), samples: int = 64,
                        h: Optional[Callable[[float], float]] = None) -> OrderProbeResult:
    """Partially averaged system vs ROM + quasi-steady state for each ``k2``.

    The slope is fitted on the slow-state sup error against
    ``eps = 1/(alpha2 k2)``.  The fast-state errors ``|x2 - x2q|`` are
    kept in ``extra`` together with a monotonicity flag.  The step
    resolves the leader dither and the fastest follower time constant.
    """
    vals = _check_increasing(k2_values, "k2")
    h = h or BestResponseMap(g)
    slow, fast, eps = [], [], []
    for k2 in vals:
        p = p0.replace(k2=k2)
        dt = min(_step_for(p.omega1, samples), 0.05 * p.epsilon)
        full = _run(partially_averaged_field(p, g), x0, T, dt, ("x1", "x2"))
        rom = _run(rom_field(p, g, h=h), (x0[0],), T, dt, ("x1",))
        q = qss_eval(rom, p, g, y0=x0[1] - h(x0[0]), h=h)
        slow.append(sup_distance(full, rom, components=[(0, 0)]))
        fast.append(sup_distance(full, q, components=[(1, 0)]))
        eps.append(p.epsilon)
    # fit in increasing eps, i.e. reversed k2 order
    slope, icpt = fit_slope(eps[::-1], slow[::-1])
    target, band = BANDS["epsilon"]
    monotone = all(b < a for a, b in zip(fast, fast[1:]))
    return OrderProbeResult("epsilon", tuple(eps), tuple(slow), slope, icpt, (0.0, T),
                            target, band,
                            extra={"k2_values": list(vals), "fast_errors": fast,
                                   "fast_monotone": monotone})


def probe_order_omega1(g: Game, p0: NesParams, omega1_values: Sequence[float], T: float = 10.0,
                       x1_0: float = 0.0, samples: int = 32,
                       h: Optional[Callable[[float], float]] = None,
                       fields: Optional[tuple[Callable, Callable]] = None) -> OrderProbeResult:
    """ROM vs averaged ROM for each ``omega1``, both from ``x1_0``."""
    vals = _check_increasing(omega1_values, "omega1")
    h = h or BestResponseMap(g)
    make_a, make_b = fields or (rom_field, averaged_rom_field)
    errors = []
    for w1 in vals:
        # keep omega2 distinct and above omega1; it does not enter either field
        p = p0.replace(omega1=w1, omega2=max(p0.omega2, 2.0 * w1))
        dt = _step_for(w1, samples)
        a = _run(make_a(p, g, h=h), (x1_0,), T, dt, ("x1",))
        b = _run(make_b(p, g, h=h), (x1_0,), T, dt, ("x1",))
        errors.append(sup_distance(a, b))
    slope, icpt = fit_slope(vals, errors)
    target, band = BANDS["omega1"]
    return OrderProbeResult("omega1", tuple(vals), tuple(errors), slope, icpt, (0.0, T),
                            target, band)


@dataclass(frozen=True)
class HierarchyReport:
    """Consecutive ratios of ``alpha1 k1 << omega1 << alpha2 k2 << omega2``."""

    stages: tuple[float, float, float, float]
    ratios: tuple[float, float, float]
    min_ratio: float
    flagged: bool

    def advisory(self) -> str:
        names = ("omega1/(alpha1 k1)", "(alpha2 k2)/omega1", "omega2/(alpha2 k2)")
        weak = [f"{n} = {r:.4g}" for n, r in zip(names, self.ratios) if r < self.min_ratio]
        if not weak:
            return f"time-scale hierarchy holds with every ratio >= {self.min_ratio:g}"
        return ("advisory: weak time-scale separation (" + "; ".join(weak)
                + f" < {self.min_ratio:g}); Stackelberg behaviour is not guaranteed")

    def as_dict(self) -> dict:
        return {"stages": list(self.stages), "ratios": list(self.ratios),
                "min_ratio": self.min_ratio, "flagged": self.flagged,
                "advisory": self.advisory()}


def hierarchy_check(p: NesParams, min_ratio: float = 5.0) -> HierarchyReport:
    """Never raises; a ratio below ``min_ratio`` only sets ``flagged``."""
    stages = (p.alpha1 * p.k1, p.omega1, p.alpha2 * p.k2, p.omega2)
    ratios = tuple(b / a for a, b in zip(stages, stages[1:]))
    return HierarchyReport(stages, ratios, float(min_ratio), any(r < min_ratio for r in ratios))


@dataclass(frozen=True)
class ScalingThresholds:
    """Sufficient (very conservative) parameter thresholds for a target
    neighbourhood size ``upsilon``.  ``saturated`` marks thresholds that
    overflow double precision and are reported as ``inf``."""

    upsilon: float
    c: float
    C1: float
    C2: float
    C3: float
    alpha2: float
    omega1_star: float
    k2_star: float
    omega2_star: float
    saturated: tuple[str, ...] = ()

    @property
    def epsilon_star(self) -> float:
        return 1.0 / (self.alpha2 * self.k2_star) if self.k2_star > 0 else math.inf

    def as_dict(self) -> dict:
        def enc(v):
            return v if math.isfinite(v) else "inf"
        return {"upsilon": self.upsilon, "c": self.c, "C1": self.C1, "C2": self.C2,
                "C3": self.C3, "alpha2": self.alpha2, "omega1_star": enc(self.omega1_star),
                "k2_star": enc(self.k2_star), "omega2_star": enc(self.omega2_star),
                "epsilon_star": enc(self.epsilon_star), "saturated": list(self.saturated)}


def scaling_thresholds(upsilon: float, c: float = 1.0, C1: float = 1.0, C2: float = 1.0,
                       C3: float = 1.0, alpha2: float = 1.0) -> ScalingThresholds:
    """``omega1* = C1/u^2``, ``k2* = exp(2c/u)/(C2 alpha2)``,
    ``omega2* = C3 exp(2 exp(2c/u))``.

    Accepts ``0 < upsilon <= 1``.  Practical tuning should rely on
    :func:`hierarchy_check`; these bounds grow doubly exponentially.
    """
    if not 0.0 < upsilon <= 1.0:
        raise ValueError("upsilon must lie in (0, 1]")
    for name, v in (("c", c), ("C1", C1), ("C2", C2), ("C3", C3), ("alpha2", alpha2)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    saturated = []

    def guarded(name, fn):
        try:
            v = fn()
        except OverflowError:
            v = math.inf
        if not math.isfinite(v):
            saturated.append(name)
            return math.inf
        return v

    w1 = guarded("omega1_star", lambda: C1 / upsilon ** 2)
    grow = guarded("k2_star", lambda: math.exp(2.0 * c / upsilon))
    k2 = grow / (C2 * alpha2) if math.isfinite(grow) else math.inf
    if math.isfinite(grow) and not math.isfinite(k2):
        saturated.append("k2_star")
    w2 = guarded("omega2_star", lambda: C3 * math.exp(2.0 * grow))
    return ScalingThresholds(upsilon, c, C1, C2, C3, alpha2, w1, k2, w2, tuple(saturated))


def blm_decay_certificate(g: Game, x1: float, y0: float, mu: float, tau_end: float,
                          dtau: float = 1e-2, h: Optional[Callable[[float], float]] = None,
                          rel_tol: float = 1e-6) -> bool:
    """Whether the boundary layer at ``x1`` decays at least like
    ``|y0| exp(-mu tau / 2)`` at every recorded ``tau <= tau_end``.

    ``dtau`` is shrunk below the inverse follower curvature at the
    manifold so stiff layers stay inside the RK4 stability region.
    Deviations at the rounding level of ``x2 = y + h(x1)`` are ignored.
    """
    if y0 == 0.0:
        return True
    h = h or BestResponseMap(g)
    x2_bar = h(x1)
    curv = abs(g.follower_cost.partial22(x1, x2_bar))
    dtau = min(dtau, 1.0 / max(curv, 1e-12), tau_end)
    tr = blm_trajectory(g, x1, y0, tau_end, dtau, h)
    if tr.violation is not None:
        return False
    floor = 100.0 * np.finfo(float).eps * max(abs(x2_bar), abs(y0))
    bound = abs(y0) * np.exp(-0.5 * mu * tr.times) * (1.0 + rel_tol) + floor
    return bool(np.all(np.abs(tr.states[:, 0]) <= bound))


def blm_trajectory(g: Game, x1: float, y0: float, tau_end: float, dtau: float = 1e-2,
                   h: Optional[Callable[[float], float]] = None) -> Trajectory:
    return rk4_integrate(blm_field(g, x1, h=h), IntegrationSpec(0.0, tau_end, dtau, (y0,)),
                         labels=("y",))

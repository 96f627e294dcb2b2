"""Fixed-step RK4 integration, uniform-grid trajectories and distances."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainViolation, NonFiniteState

__all__ = [
    "Trajectory", "IntegrationSpec", "rk4_integrate", "auto_step", "sup_distance",
    "final_window_mean", "error_series",
]


@dataclass(frozen=True)
class Violation:
    """Where an integration stopped because the state left the domain."""

    t: float
    state: tuple
    message: str

    def as_dict(self) -> dict:
        return {"t": self.t, "state": list(self.state), "message": self.message}


@dataclass(frozen=True)
class Trajectory:
    """States recorded on the uniform grid ``t0 + i * dt``.

    ``violation`` is set when the run ended early at a domain boundary;
    the stored states then cover only the part before it.
    """

    t0: float
    dt: float
    states: np.ndarray
    labels: tuple[str, ...]
    violation: Optional[Violation] = None
    step: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        object.__setattr__(self, "states", states)
        if states.shape[1] != len(self.labels):
            raise ValueError(f"{states.shape[1]} state columns but {len(self.labels)} labels")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    @property
    def completed(self) -> bool:
        return self.violation is None

    def column(self, key) -> np.ndarray:
        i = self.labels.index(key) if isinstance(key, str) else key
        return self.states[:, i]

    def at(self, t) -> np.ndarray:
        """Linear interpolation of all components at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        out = np.stack([np.interp(t, self.times, self.states[:, i])
                        for i in range(self.states.shape[1])], axis=-1)
        return out

    def to_csv(self, path=None) -> str:
        """``t,<labels>`` rows with 17 significant digits; returns the text."""
        buf = io.StringIO()
        data = np.column_stack([self.times, self.states])
        np.savetxt(buf, data, delimiter=",", fmt="%.17g",
                   header=",".join(("t",) + tuple(self.labels)), comments="")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


@dataclass(frozen=True)
class IntegrationSpec:
    t0: float
    t_end: float
    dt: float
    x0: tuple
    record_stride: int = 1

    def __post_init__(self):
        if not self.t_end > self.t0:
            raise ValueError(f"t_end ({self.t_end}) must exceed t0 ({self.t0})")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.dt > self.t_end - self.t0:
            raise ValueError("dt exceeds the integration span")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))

    def grid(self) -> tuple[int, float]:
        """Number of steps (a multiple of the stride) and the step that
        lands exactly on ``t_end``."""
        span = self.t_end - self.t0
        blocks = span / (self.dt * self.record_stride)
        nb = round(blocks)
        if abs(blocks - nb) > 1e-9 * max(1.0, blocks):
            nb = math.ceil(blocks)
        n = max(1, nb) * self.record_stride
        return n, span / n


def auto_step(p, samples_per_period: int = 32) -> float:
    """Step resolving the fastest dither with ``samples_per_period`` points."""
    if samples_per_period < 8:
        raise ValueError("samples_per_period must be at least 8")
    return 2.0 * math.pi / (max(p.omega1, p.omega2) * samples_per_period)


def _rk4_step(f, t, x, h, dim):
    if dim == 1:
        (a,) = x
        k1 = f(t, a)
        k2 = f(t + 0.5 * h, a + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, a + 0.5 * h * k2)
        k4 = f(t + h, a + h * k3)
        return (a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),)
    if dim == 2:
        a, b = x
        p1, q1 = f(t, a, b)
        hh = 0.5 * h
        p2, q2 = f(t + hh, a + hh * p1, b + hh * q1)
        p3, q3 = f(t + hh, a + hh * p2, b + hh * q2)
        p4, q4 = f(t + h, a + h * p3, b + h * q3)
        return (a + h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4),
                b + h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4))
    xa = np.asarray(x)
    k1 = np.asarray(f(t, *xa))
    k2 = np.asarray(f(t + 0.5 * h, *(xa + 0.5 * h * k1)))
    k3 = np.asarray(f(t + 0.5 * h, *(xa + 0.5 * h * k2)))
    k4 = np.asarray(f(t + h, *(xa + h * k3)))
    return tuple(xa + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def _substep(f, t, x, h, dim, depth):
    """One step of size ``h``; on a domain violation retry as two halves,
    ``depth`` more times at most."""
    try:
        return _rk4_step(f, t, x, h, dim)
    except DomainViolation:
        if depth <= 0:
            raise
    mid = _substep(f, t, x, 0.5 * h, dim, depth - 1)
    return _substep(f, t + 0.5 * h, mid, 0.5 * h, dim, depth - 1)


def rk4_integrate(rhs: Callable, spec: IntegrationSpec, labels: Optional[Sequence[str]] = None,
                  max_halvings: int = 0) -> Trajectory:
    """Classical RK4 with a fixed step.

    ``rhs(t, *x)`` returns the velocity: a float for scalar systems, a
    tuple otherwise.  Every ``record_stride``-th state is kept.  A
    DomainViolation raised by ``rhs`` ends the run and the partial
    trajectory is returned with ``violation`` set; with ``max_halvings >
    0`` the offending step is first retried as up to ``2**max_halvings``
    substeps (the recorded grid is unchanged).  A NaN or infinite state
    raises NonFiniteState carrying the partial trajectory.
    """
    dim = len(spec.x0)
    labels = tuple(labels) if labels is not None else tuple(f"x{i + 1}" for i in range(dim))
    n, h = spec.grid()
    stride = int(spec.record_stride)
    t0 = spec.t0
    x = spec.x0
    out = [x]
    violation = None
    isfinite = math.isfinite
    if max_halvings:
        def step(t, x):
            return _substep(rhs, t, x, h, dim, max_halvings)
    else:
        def step(t, x):
            return _rk4_step(rhs, t, x, h, dim)

    def partial(states):
        return Trajectory(t0, h * stride, np.array(states, dtype=float), labels, violation, h)

    k = 0
    try:
        if dim == 2 and not max_halvings:
            # hot loop for planar systems, the step is inlined
            a, b = x
            f = rhs
            hh, h6 = 0.5 * h, h / 6.0
            while k < n:
                t = t0 + k * h
                p1, q1 = f(t, a, b)
                p2, q2 = f(t + hh, a + hh * p1, b + hh * q1)
                p3, q3 = f(t + hh, a + hh * p2, b + hh * q2)
                p4, q4 = f(t + h, a + h * p3, b + h * q3)
                a = a + h6 * (p1 + 2.0 * p2 + 2.0 * p3 + p4)
                b = b + h6 * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
                k += 1
                if not (isfinite(a) and isfinite(b)):
                    raise NonFiniteState(f"non-finite state ({a}, {b}) at t={t0 + k * h}",
                                         partial(out))
                if k % stride == 0:
                    out.append((a, b))
        else:
            while k < n:
                x = step(t0 + k * h, x)
                k += 1
                if not all(isfinite(v) for v in x):
                    raise NonFiniteState(f"non-finite state {x} at t={t0 + k * h}", partial(out))
                if k % stride == 0:
                    out.append(x)
    except DomainViolation as exc:
        # last accepted state, before the step that failed
        last = (a, b) if dim == 2 and not max_halvings else x
        violation = Violation(t0 + k * h, tuple(float(v) for v in last), str(exc))
    return partial(out)


def _window_grid(a: Trajectory, b: Trajectory, window):
    lo = max(a.t0, b.t0)
    hi = min(a.t_end, b.t_end)
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    if hi < lo:
        raise ValueError("trajectories do not overlap on the requested window")
    ta, tb = a.times, b.times
    tol = 1e-12 * max(1.0, abs(hi))
    t = np.union1d(ta[(ta >= lo - tol) & (ta <= hi + tol)], tb[(tb >= lo - tol) & (tb <= hi + tol)])
    # window ends count even when they fall between samples
    return np.union1d(np.clip(t, lo, hi), [lo, hi])


def _select(tr: Trajectory, components):
    if components is None:
        return list(range(tr.states.shape[1]))
    return [tr.labels.index(c) if isinstance(c, str) else int(c) for c in components]


def error_series(a: Trajectory, b: Trajectory, window=None, components=None):
    """Times and Euclidean distances between ``a`` and ``b`` on the union of
    their grids within ``window``.

    ``components`` lists the columns to compare, either shared for both
    trajectories or as ``(i_a, i_b)`` pairs.
    """
    t = _window_grid(a, b, window)
    if components is not None and all(isinstance(c, tuple) for c in components):
        ia = _select(a, [c[0] for c in components])
        ib = _select(b, [c[1] for c in components])
    else:
        ia, ib = _select(a, components), _select(b, components)
    if len(ia) != len(ib):
        raise ValueError("component selections differ in length")
    va = a.at(t)[:, ia]
    vb = b.at(t)[:, ib]
    return t, np.sqrt(np.sum((va - vb) ** 2, axis=1))


def sup_distance(a: Trajectory, b: Trajectory, window=None, components=None) -> float:
    """Largest Euclidean distance between two trajectories over ``window``
    (default: their common span), interpolating linearly between samples."""
    _, d = error_series(a, b, window, components)
    return float(np.max(d))


def final_window_mean(a: Trajectory, fraction: float = 0.2) -> np.ndarray:
    """Trapezoidal time-average of each component over the last ``fraction``
    of the recorded span."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    n = len(a)
    if n == 1:
        return a.states[0].copy()
    start = a.t_end - fraction * (a.t_end - a.t0)
    t = a.times
    i0 = int(np.searchsorted(t, start, side="left"))
    i0 = min(i0, n - 2)
    # include the interpolated value at the window start for exactness
    ts = np.concatenate([[start], t[i0:]]) if t[i0] > start else t[i0:]
    xs = a.at(ts)
    span = ts[-1] - ts[0]
    return np.trapezoid(xs, ts, axis=0) / span

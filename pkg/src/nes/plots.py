"""Self-contained SVG phase and time plots (no plotting library needed)."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import numpy as np

W, H, PAD = 640, 480, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _thin(xs: np.ndarray, max_points: int = 4000) -> np.ndarray:
    if len(xs) <= max_points:
        return np.arange(len(xs))
    idx = np.linspace(0, len(xs) - 1, max_points).round().astype(int)
    return np.unique(idx)


def _range(vals: np.ndarray):
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, n: int = 5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


class _Canvas:
    def __init__(self, xr, yr, title, xlabel, ylabel):
        self.xr, self.yr = xr, yr
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
            f'<rect x="{PAD}" y="{PAD / 2 + 8}" width="{W - 1.5 * PAD:.1f}" '
            f'height="{H - 1.5 * PAD - 8:.1f}" fill="none" stroke="#444"/>',
            f'<text x="{W / 2:.1f}" y="{H - 8}" text-anchor="middle">{xlabel}</text>',
            f'<text x="14" y="{H / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {H / 2:.1f})">{ylabel}</text>',
        ]
        for v in _ticks(*xr):
            x, _ = self.map(v, yr[0])
            self.parts.append(f'<text x="{x:.1f}" y="{H - PAD + 18:.1f}" '
                              f'text-anchor="middle">{v:.3g}</text>')
        for v in _ticks(*yr):
            _, y = self.map(xr[0], v)
            self.parts.append(f'<text x="{PAD - 4}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')

    def map(self, x, y):
        (x0, x1), (y0, y1) = self.xr, self.yr
        px = PAD + (x - x0) / (x1 - x0) * (W - 1.5 * PAD)
        py = (H - PAD) - (y - y0) / (y1 - y0) * (H - 1.5 * PAD - 8)
        return px, py

    def polyline(self, xs, ys, color, width=1.2):
        pts = " ".join("%.2f,%.2f" % self.map(x, y) for x, y in zip(xs, ys))
        self.parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
                          f'points="{pts}"/>')

    def marker(self, x, y, shape, color, label):
        px, py = self.map(x, y)
        if shape == "square":
            self.parts.append(f'<rect x="{px - 5:.2f}" y="{py - 5:.2f}" width="10" height="10" '
                              f'fill="none" stroke="{color}" stroke-width="2"/>')
        elif shape == "cross":
            self.parts.append(f'<path d="M{px - 6:.2f},{py - 6:.2f}L{px + 6:.2f},{py + 6:.2f}'
                              f'M{px - 6:.2f},{py + 6:.2f}L{px + 6:.2f},{py - 6:.2f}" '
                              f'stroke="{color}" stroke-width="2"/>')
        else:
            self.parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="5" fill="{color}"/>')
        self.parts.append(f'<text x="{px + 8:.2f}" y="{py - 8:.2f}" fill="{color}">{label}</text>')

    def hline(self, y, color):
        (x0, x1) = self.xr
        a, b = self.map(x0, y), self.map(x1, y)
        self.parts.append(f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" y2="{b[1]:.2f}" '
                          f'stroke="{color}" stroke-dasharray="6,4"/>')

    def legend(self, entries):
        for i, (label, color) in enumerate(entries):
            y = PAD / 2 + 26 + 16 * i
            self.parts.append(f'<line x1="{W - 150}" y1="{y - 4}" x2="{W - 130}" y2="{y - 4}" '
                              f'stroke="{color}" stroke-width="2"/>')
            self.parts.append(f'<text x="{W - 124}" y="{y}">{label}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>", ""])


def phase_svg(states: np.ndarray, references: Mapping[str, Sequence[float]],
              title: str = "phase portrait", labels=("x1", "x2")) -> str:
    """Trajectory in the (x1, x2) plane with start point and equilibria."""
    idx = _thin(states)
    pts = states[idx]
    refs = {k: tuple(v) for k, v in references.items() if v is not None}
    allx = np.concatenate([pts[:, 0], [r[0] for r in refs.values()]])
    ally = np.concatenate([pts[:, 1], [r[1] for r in refs.values()]])
    c = _Canvas(_range(allx), _range(ally), title, labels[0], labels[1])
    c.polyline(pts[:, 0], pts[:, 1], COLORS[0])
    c.marker(states[0, 0], states[0, 1], "dot", "#000000", "start")
    shapes = {"nash": ("square", COLORS[2], "NE"), "stackelberg": ("cross", COLORS[1], "SE")}
    for key in sorted(refs):
        shape, color, label = shapes.get(key, ("square", COLORS[3], key))
        c.marker(refs[key][0], refs[key][1], shape, color, label)
    return c.render()


def time_svg(times: np.ndarray, states: np.ndarray, labels: Sequence[str],
             references: Optional[Mapping[str, Sequence[float]]] = None,
             title: str = "time series") -> str:
    """Per-component traces against time, equilibrium levels dashed."""
    idx = _thin(times)
    levels = []
    for key, point in sorted((references or {}).items()):
        if point is not None:
            levels.extend(point[: states.shape[1]])
    ally = np.concatenate([states[idx].ravel(), levels])
    c = _Canvas(_range(times[idx]), _range(ally), title, "t [s]", "state")
    for j in range(states.shape[1]):
        c.polyline(times[idx], states[idx, j], COLORS[j % len(COLORS)])
    for key, point in sorted((references or {}).items()):
        if point is None:
            continue
        for j in range(min(len(point), states.shape[1])):
            c.hline(point[j], COLORS[j % len(COLORS)])
    c.legend([(lab, COLORS[j % len(COLORS)]) for j, lab in enumerate(labels)])
    return c.render()

"""Best responses, reduced leader cost and Nash/Stackelberg reference points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, SingularityError, SolverError
from .model import FD2_STEP, Game

__all__ = [
    "EquilibriumResult", "ConvexityReport", "best_response", "BestResponseMap",
    "h_prime", "reduced_cost", "reduced_cost_derivative", "stackelberg_equilibrium",
    "nash_equilibrium", "grid_oracle_nash", "convexity_report",
]

BR_TOL = 1e-10
STATIONARITY_TOL = 1e-10


@dataclass(frozen=True)
class EquilibriumResult:
    point: tuple[float, float]
    kind: str
    residuals: dict
    iterations: int
    method: str

    @property
    def x1(self) -> float:
        return self.point[0]

    @property
    def x2(self) -> float:
        return self.point[1]

    def as_dict(self) -> dict:
        return {"kind": self.kind, "x1": self.point[0], "x2": self.point[1],
                "residuals": dict(self.residuals), "iterations": self.iterations,
                "method": self.method}


@dataclass(frozen=True)
class ConvexityReport:
    m2_estimate: float
    m1_estimate: float
    box: tuple[tuple[float, float], tuple[float, float]]
    n: int
    flags: tuple[str, ...] = field(default=())


def _feasible_probe(g: Game, x1: float, x2: float) -> Optional[float]:
    """∂x2 J_F at (x1, x2), or None when the point is infeasible."""
    if not g.is_feasible(x1, x2):
        return None
    try:
        val = g.follower_cost.partial2(x1, x2)
    except (DomainViolation, ValueError, ZeroDivisionError):
        return None
    return val if math.isfinite(val) else None


def _bracket(g: Game, x1: float, seed: float):
    """Grow a sign-change bracket of ``∂x2 J_F(x1, .)`` away from ``seed``.

    The half-width starts at 1 and doubles; once an end leaves the
    feasible slice it is bisected back toward the last feasible point, so
    barrier-type costs still yield a bracket next to the boundary.
    """
    f_seed = _feasible_probe(g, x1, seed)
    if f_seed is None:
        raise SolverError(f"seed x2={seed} is infeasible at x1={x1}")
    if f_seed == 0.0:
        return seed, seed, f_seed, f_seed
    direction = -1.0 if f_seed > 0.0 else 1.0
    jf = g.follower_cost
    # finite differences stop resolving the gradient far from the origin
    limit = jf.fd_step / (1e3 * np.finfo(float).eps) if jf.d2 is None else math.inf

    def changed(f):
        return f == 0.0 or (f > 0.0) != (f_seed > 0.0)

    def ordered(a, fa, b, fb):
        return (a, b, fa, fb) if a < b else (b, a, fb, fa)

    inner, f_inner = seed, f_seed
    width = 1.0
    for _ in range(60):
        end = seed + direction * width
        if abs(end) > limit:
            break
        f_end = _feasible_probe(g, x1, end)
        if f_end is None:
            lo, hi = inner, end
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                f_mid = _feasible_probe(g, x1, mid)
                if f_mid is None:
                    hi = mid
                elif changed(f_mid):
                    return ordered(inner, f_inner, mid, f_mid)
                else:
                    lo, inner, f_inner = mid, mid, f_mid
            break
        if changed(f_end):
            return ordered(inner, f_inner, end, f_end)
        inner, f_inner = end, f_end
        width *= 2.0
    raise SolverError(f"no sign change of the follower gradient found at x1={x1}")


def _safeguarded_newton(g: Game, x1: float, lo: float, hi: float, f_lo: float, f_hi: float,
                        x0: float, tol: float, max_iter: int = 100):
    """Newton on ∂x2 J_F with bisection whenever a step leaves [lo, hi]."""
    if f_lo == 0.0:
        return lo, 0.0, 0
    if f_hi == 0.0:
        return hi, 0.0, 0
    jf = g.follower_cost
    x = min(max(x0, lo), hi)
    for it in range(1, max_iter + 1):
        f = jf.partial2(x1, x)
        if abs(f) < tol:
            return x, f, it
        if (f > 0.0) == (f_hi > 0.0):
            hi, f_hi = x, f
        else:
            lo, f_lo = x, f
        try:
            d = jf.partial22(x1, x)
        except (DomainViolation, ValueError, ZeroDivisionError):
            d = 0.0
        step_ok = d != 0.0 and math.isfinite(d)
        if step_ok:
            x_new = x - f / d
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x_new)):
            f = jf.partial2(x1, x_new)
            return x_new, f, it
        x = x_new
    raise SolverError(f"best response did not converge at x1={x1} after {max_iter} iterations")


def best_response(g: Game, x1: float, seed: Optional[float] = None,
                  tol: float = BR_TOL) -> float:
    """Follower action ``x2`` with ``∂x2 J_F(x1, x2) ≈ 0``.

    Uses ``g.best_response`` when present (its residual is checked);
    otherwise a bracket is grown geometrically from ``seed`` (width 1,
    doubling, clipped to the feasible slice) and refined by safeguarded
    Newton.
    """
    if g.best_response is not None:
        x2 = g.best_response(x1)
        res = g.follower_cost.partial2(x1, x2)
        scale = max(1.0, abs(g.follower_cost.partial22(x1, x2)) * max(1.0, abs(x2)))
        if not abs(res) <= tol * scale * 1e2:
            raise SolverError(
                f"analytic best response fails the stationarity check at x1={x1}: residual {res}")
        return x2
    if seed is None:
        seed = 0.0
    lo, hi, f_lo, f_hi = _bracket(g, x1, seed)
    if lo == hi:
        return lo
    x2, _, _ = _safeguarded_newton(g, x1, lo, hi, f_lo, f_hi, seed, tol)
    return x2


class BestResponseMap:
    """Callable ``h(x1)`` that warm-starts each solve from the last root.

    With ``memo=True`` results are cached on ``x1`` rounded to 1e-12.
    Not thread-safe; build one per worker.
    """

    def __init__(self, g: Game, seed: float = 0.0, memo: bool = True):
        self.game = g
        self.last = seed
        self.memo = {} if memo else None

    def __call__(self, x1: float) -> float:
        if self.game.best_response is not None:
            return self.game.best_response(x1)
        key = round(x1, 12)
        if self.memo is not None and key in self.memo:
            return self.memo[key]
        x2 = best_response(self.game, x1, seed=self.last)
        self.last = x2
        if self.memo is not None:
            self.memo[key] = x2
        return x2


def h_prime(g: Game, x1: float, h: Optional[Callable[[float], float]] = None) -> float:
    """Slope of the best response, ``-∂²x1x2 J_F / ∂²x2x2 J_F`` at (x1, h(x1))."""
    x2 = (h or (lambda a: best_response(g, a)))(x1)
    jf = g.follower_cost
    den = jf.partial22(x1, x2)
    if abs(den) < 1e-12:
        raise SingularityError(f"∂²x2x2 J_F vanishes at ({x1}, {x2})")
    return -jf.partial12(x1, x2) / den


def reduced_cost(g: Game, x1: float, h: Optional[Callable[[float], float]] = None) -> float:
    """Leader cost along the follower's best response, ``J_L(x1, h(x1))``."""
    x2 = (h or (lambda a: best_response(g, a)))(x1)
    return g.leader_cost(x1, x2)


def reduced_cost_derivative(g: Game, x1: float,
                            h: Optional[Callable[[float], float]] = None) -> float:
    """``d/dx1 J_L(x1, h(x1)) = ∂x1 J_L + ∂x2 J_L · h'(x1)``."""
    h = h or (lambda a: best_response(g, a))
    x2 = h(x1)
    jl = g.leader_cost
    return jl.partial1(x1, x2) + jl.partial2(x1, x2) * h_prime(g, x1, h=lambda a: x2)


def _golden_min(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for it in range(1, max_iter + 1):
        if abs(b - a) < tol * max(1.0, abs(c)):
            return 0.5 * (a + b), it
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b), max_iter


def _descent_bracket(f, x0: float, width: float = 0.1, max_expand: int = 60):
    """Grow ``[a, b]`` around ``x0`` until it holds an interior minimum of f."""
    def safe(x):
        try:
            v = f(x)
        except (DomainViolation, SolverError, ValueError, ZeroDivisionError):
            return math.inf
        return v if math.isfinite(v) else math.inf

    fx = safe(x0)
    if not math.isfinite(fx):
        raise SolverError(f"reduced cost undefined at seed {x0}")
    a, b = x0 - width, x0 + width
    for _ in range(max_expand):
        fa, fb = safe(a), safe(b)
        if fa >= fx and fb >= fx:
            return a, b, safe
        if fa < fx and fa <= fb:
            x0, fx = a, fa
        elif fb < fx:
            x0, fx = b, fb
        width *= 2.0
        a, b = x0 - width, x0 + width
    raise SolverError("no descent bracket found for the reduced cost")


def stackelberg_equilibrium(g: Game, x1_seed: float = 0.0, tol: float = STATIONARITY_TOL,
                            max_iter: int = 200) -> EquilibriumResult:
    """Minimize ``J_L(x1, h(x1))`` from ``x1_seed``.

    Newton on the reduced-cost derivative (its slope by central
    differences), falling back to golden-section search on a descent
    bracket when Newton stalls or leaves the domain.
    """
    h = BestResponseMap(g)
    dJ = lambda a: reduced_cost_derivative(g, a, h=h)  # noqa: E731
    x = x1_seed
    method = "newton"
    iterations = 0
    converged = False
    try:
        for iterations in range(1, max_iter + 1):
            d = dJ(x)
            if abs(d) < tol:
                converged = True
                break
            step = FD2_STEP * max(1.0, abs(x)) * 1e-1
            curv = (dJ(x + step) - dJ(x - step)) / (2 * step)
            if not (curv > 0.0 and math.isfinite(curv)):
                break
            dx = -d / curv
            # backtrack on |dJ| so Newton cannot run off the feasible slice
            lam = 1.0
            for _ in range(30):
                try:
                    if abs(dJ(x + lam * dx)) < abs(d):
                        break
                except (DomainViolation, SolverError, ValueError, ZeroDivisionError):
                    pass
                lam *= 0.5
            else:
                break
            x = x + lam * dx
    except (DomainViolation, SolverError, ValueError, ZeroDivisionError):
        converged = False
    if not converged:
        method = "golden"
        a, b, safe = _descent_bracket(lambda a_: reduced_cost(g, a_, h=h), x1_seed)
        x, its = _golden_min(safe, a, b, max_iter=max_iter)
        iterations += its
        # polish the golden-section estimate on the stationarity condition
        for _ in range(50):
            d = dJ(x)
            if abs(d) < tol:
                break
            step = 1e-6 * max(1.0, abs(x))
            curv = (dJ(x + step) - dJ(x - step)) / (2 * step)
            if not curv > 0.0:
                break
            x -= d / curv
            iterations += 1
    d = dJ(x)
    if not abs(d) < 1e-8:
        raise SolverError(f"Stackelberg search did not converge: |dJ/dx1| = {abs(d):.3e} at {x}")
    x2 = h(x)
    residuals = {
        "reduced_gradient": abs(d),
        "best_response": abs(g.follower_cost.partial2(x, x2)),
    }
    return EquilibriumResult((x, x2), "stackelberg", residuals, iterations, method)


def _nash_map(g: Game, x1: float, x2: float):
    return g.leader_cost.partial1(x1, x2), g.follower_cost.partial2(x1, x2)


def _nash_jacobian(g: Game, x1: float, x2: float):
    jl, jf = g.leader_cost, g.follower_cost
    return np.array([[jl.partial11(x1, x2), jl.partial12(x1, x2)],
                     [jf.partial12(x1, x2), jf.partial22(x1, x2)]])


def nash_equilibrium(g: Game, seed: tuple[float, float] = (0.0, 0.0),
                     tol: float = STATIONARITY_TOL, max_iter: int = 100) -> EquilibriumResult:
    """Damped Newton on the stationarity map ``(∂x1 J_L, ∂x2 J_F)``."""
    x = np.array(seed, dtype=float)
    if not g.is_feasible(*x):
        raise SolverError(f"Nash seed {tuple(seed)} is infeasible")
    F = np.array(_nash_map(g, *x))
    for it in range(1, max_iter + 1):
        norm = float(np.max(np.abs(F)))
        if norm < tol:
            break
        J = _nash_jacobian(g, *x)
        if abs(np.linalg.det(J)) < 1e-14 * max(1.0, float(np.max(np.abs(J))) ** 2):
            raise SingularityError(f"singular stationarity Jacobian at {tuple(x)}")
        dx = np.linalg.solve(J, -F)
        lam = 1.0
        for _ in range(40):
            cand = x + lam * dx
            if g.is_feasible(*cand):
                try:
                    Fc = np.array(_nash_map(g, *cand))
                except DomainViolation:
                    Fc = None
                if Fc is not None and np.all(np.isfinite(Fc)) and (
                        np.max(np.abs(Fc)) < norm or lam < 1e-6):
                    break
            lam *= 0.5
        else:
            raise SolverError(f"Nash Newton could not make progress from {tuple(x)}")
        x, F = cand, Fc
    else:
        raise SolverError(f"Nash Newton did not converge in {max_iter} iterations")
    residuals = {"leader_partial": abs(float(F[0])), "follower_partial": abs(float(F[1]))}
    return EquilibriumResult((float(x[0]), float(x[1])), "nash", residuals, it, "damped-newton")


def grid_oracle_nash(g: Game, box: tuple[tuple[float, float], tuple[float, float]],
                     step: float) -> tuple[float, float]:
    """Exhaustive grid search for the point minimizing ``|∂x1 J_L| + |∂x2 J_F|``.

    Brute force, meant for cross-checking :func:`nash_equilibrium` in
    tests.  Partials are tried on whole numpy rows first and evaluated
    point by point if they do not accept arrays.
    """
    (a1, b1), (a2, b2) = box
    g1 = a1 + step * np.arange(int(round((b1 - a1) / step)) + 1)
    g2 = a2 + step * np.arange(int(round((b2 - a2) / step)) + 1)
    d1, d2 = g.leader_cost.partial1, g.follower_cost.partial2
    best = (math.inf, None)

    def score_scalar(u, v):
        if not g.is_feasible(u, v):
            return math.inf
        try:
            return abs(d1(u, v)) + abs(d2(u, v))
        except DomainViolation:
            return math.inf

    vectorized = True
    chunk = max(1, 2_000_000 // len(g2))
    for start in range(0, len(g1), chunk):
        U, V = np.meshgrid(g1[start:start + chunk], g2, indexing="ij")
        S = None
        if vectorized:
            try:
                with np.errstate(all="ignore"):
                    S = np.abs(np.asarray(d1(U, V), dtype=float)) + np.abs(
                        np.asarray(d2(U, V), dtype=float))
                if S.shape != U.shape or g.feasible is not None and not _all_feasible(g, U, V):
                    S = None
                    vectorized = False
            except (TypeError, ValueError, DomainViolation):
                S = None
                vectorized = False
        if S is None:
            S = np.array([[score_scalar(u, v) for v in g2] for u in g1[start:start + chunk]])
        S = np.where(np.isfinite(S), S, np.inf)
        k = int(np.argmin(S))
        if S.flat[k] < best[0]:
            i, j = np.unravel_index(k, S.shape)
            best = (float(S.flat[k]), (float(U[i, j]), float(V[i, j])))
    if best[1] is None:
        raise SolverError("no feasible grid point in the box")
    return best[1]


def _all_feasible(g: Game, U, V) -> bool:
    try:
        mask = g.feasible(U, V)
    except (TypeError, ValueError):
        return False
    return bool(np.all(mask))


def convexity_report(g: Game, box: tuple[tuple[float, float], tuple[float, float]],
                     n: int = 21) -> ConvexityReport:
    """Sampled curvature bounds: ``m2`` from ``∂²x2x2 J_F`` on an ``n × n``
    grid over ``box``, ``m1`` from a central difference of the reduced-cost
    derivative at ``n`` points of the box's x1-range."""
    (a1, b1), (a2, b2) = box
    xs1 = np.linspace(a1, b1, n)
    xs2 = np.linspace(a2, b2, n)
    jf = g.follower_cost
    m2 = math.inf
    for u in xs1:
        for v in xs2:
            if g.is_feasible(u, v):
                m2 = min(m2, jf.partial22(float(u), float(v)))
    h = BestResponseMap(g)
    m1 = math.inf
    step = 1e-4
    for u in xs1:
        u = float(u)
        val = (reduced_cost_derivative(g, u + step, h=h)
               - reduced_cost_derivative(g, u - step, h=h)) / (2 * step)
        m1 = min(m1, val)
    flags = []
    if not m2 > 0.0:
        flags.append("follower cost not strongly convex in x2 on the box")
    if not m1 > 0.0:
        flags.append("reduced leader cost not strongly convex on the box")
    return ConvexityReport(m2, m1, ((a1, b1), (a2, b2)), n, tuple(flags))

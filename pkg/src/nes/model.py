"""Two-player cost landscapes with analytic or finite-difference partials."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .errors import DomainViolation
from .expr import ClampCounter

__all__ = ["ScalarField2", "Game", "grad_fd", "hessian_fd", "FD_STEP", "FD2_STEP"]

Fn2 = Callable[[float, float], float]

FD_STEP = 1e-5
FD2_STEP = 1e-4


@dataclass(frozen=True)
class ScalarField2:
    """A scalar cost ``J(x1, x2)`` with optional analytic partials.

    Missing partials fall back to central differences: first derivatives
    with ``fd_step``, second derivatives by nesting central differences
    with step ``fd2_step``.
    """

    value: Fn2
    d1: Optional[Fn2] = None
    d2: Optional[Fn2] = None
    d11: Optional[Fn2] = None
    d22: Optional[Fn2] = None
    d12: Optional[Fn2] = None
    fd_step: float = FD_STEP
    fd2_step: float = FD2_STEP

    def __post_init__(self):
        if not self.fd_step > 0 or not self.fd2_step > 0:
            raise ValueError("finite-difference steps must be positive")

    def __call__(self, x1: float, x2: float) -> float:
        return self.value(x1, x2)

    @property
    def has_analytic_gradient(self) -> bool:
        return self.d1 is not None and self.d2 is not None

    def partial1(self, x1: float, x2: float) -> float:
        if self.d1 is not None:
            return self.d1(x1, x2)
        h = self.fd_step
        return (self.value(x1 + h, x2) - self.value(x1 - h, x2)) / (2 * h)

    def partial2(self, x1: float, x2: float) -> float:
        if self.d2 is not None:
            return self.d2(x1, x2)
        h = self.fd_step
        return (self.value(x1, x2 + h) - self.value(x1, x2 - h)) / (2 * h)

    def partial11(self, x1: float, x2: float) -> float:
        if self.d11 is not None:
            return self.d11(x1, x2)
        if self.d1 is not None:
            h = self.fd2_step
            return (self.d1(x1 + h, x2) - self.d1(x1 - h, x2)) / (2 * h)
        return hessian_fd(self, x1, x2)[0]

    def partial22(self, x1: float, x2: float) -> float:
        if self.d22 is not None:
            return self.d22(x1, x2)
        if self.d2 is not None:
            h = self.fd2_step
            return (self.d2(x1, x2 + h) - self.d2(x1, x2 - h)) / (2 * h)
        return hessian_fd(self, x1, x2)[2]

    def partial12(self, x1: float, x2: float) -> float:
        if self.d12 is not None:
            return self.d12(x1, x2)
        if self.d2 is not None:
            h = self.fd2_step
            return (self.d2(x1 + h, x2) - self.d2(x1 - h, x2)) / (2 * h)
        return hessian_fd(self, x1, x2)[1]

    def gradient(self, x1: float, x2: float) -> tuple[float, float]:
        return self.partial1(x1, x2), self.partial2(x1, x2)


def grad_fd(field: ScalarField2, x1: float, x2: float,
            feasible: Optional[Callable[[float, float], bool]] = None,
            step: Optional[float] = None) -> tuple[float, float]:
    """Central-difference gradient of ``field`` regardless of analytic partials.

    If ``feasible`` is given, every stencil point is checked first and a
    DomainViolation is raised when one falls outside.
    """
    h = field.fd_step if step is None else step
    stencil = ((x1 + h, x2), (x1 - h, x2), (x1, x2 + h), (x1, x2 - h))
    if feasible is not None:
        for p in stencil:
            if not feasible(*p):
                raise DomainViolation(f"finite-difference stencil point {p} is infeasible")
    f = field.value
    return ((f(x1 + h, x2) - f(x1 - h, x2)) / (2 * h),
            (f(x1, x2 + h) - f(x1, x2 - h)) / (2 * h))


def hessian_fd(field: ScalarField2, x1: float, x2: float,
               step: Optional[float] = None) -> tuple[float, float, float]:
    """Second partials ``(d11, d12, d22)`` by nested central differences."""
    h = field.fd2_step if step is None else step
    k = field.fd_step
    f = field.value

    def g1(a, b):
        return (f(a + k, b) - f(a - k, b)) / (2 * k)

    def g2(a, b):
        return (f(a, b + k) - f(a, b - k)) / (2 * k)

    d11 = (g1(x1 + h, x2) - g1(x1 - h, x2)) / (2 * h)
    d22 = (g2(x1, x2 + h) - g2(x1, x2 - h)) / (2 * h)
    d12 = (g2(x1 + h, x2) - g2(x1 - h, x2)) / (2 * h)
    return d11, d12, d22


def _everywhere(x1: float, x2: float) -> bool:
    return True


@dataclass(frozen=True)
class Game:
    """Leader/follower pair of costs on a common feasible set.

    ``best_response`` is the follower's analytic best response if known;
    ``references`` maps labels such as ``"nash"`` and ``"stackelberg"`` to
    published equilibrium points; ``clamp`` is set when the costs were built
    under the soft-clamp boundary policy.
    """

    leader_cost: ScalarField2
    follower_cost: ScalarField2
    name: str = "game"
    best_response: Optional[Callable[[float], float]] = None
    feasible: Callable[[float, float], bool] = _everywhere
    feasible_description: str = "R^2"
    references: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    clamp: Optional[ClampCounter] = None

    def is_feasible(self, x1: float, x2: float) -> bool:
        try:
            return bool(self.feasible(x1, x2))
        except DomainViolation:
            return False

    @property
    def clamp_count(self) -> int:
        return 0 if self.clamp is None else self.clamp.count

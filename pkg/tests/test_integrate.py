import math

import numpy as np
import pytest

from nes.dynamics import NASH_QUADRATIC, STACKELBERG_QUADRATIC, blm_field, nes_field
from nes.errors import DomainViolation, NonFiniteState
from nes.integrate import (IntegrationSpec, Trajectory, auto_step, error_series,
                           final_window_mean, rk4_integrate, sup_distance)


def decay(t, x):
    return -x


def test_zero_field_constant():
    tr = rk4_integrate(lambda t, a, b: (0.0, 0.0), IntegrationSpec(0.0, 1.0, 0.1, (0.3, -2.0)))
    assert np.all(tr.states == [0.3, -2.0])
    assert len(tr) == 11


def test_exponential_decay():
    tr = rk4_integrate(decay, IntegrationSpec(0.0, 1.0, 1e-3, (1.0,)))
    assert abs(tr.states[-1, 0] - math.exp(-1)) < 1e-10
    assert tr.t_end == pytest.approx(1.0, abs=1e-15)


def _decay_error(dt):
    tr = rk4_integrate(decay, IntegrationSpec(0.0, 1.0, dt, (1.0,)))
    return abs(tr.states[-1, 0] - math.exp(-1))


@pytest.mark.parametrize("dt", [0.1, 0.05, 0.02])
def test_rk4_order(dt):
    ratio = _decay_error(dt) / _decay_error(dt / 2)
    assert 12 <= ratio <= 20


def test_blm_closed_form(quad):
    tr = rk4_integrate(blm_field(quad, 0.3), IntegrationSpec(0.0, 10.0, 1e-2, (1.0,)))
    assert abs(tr.states[-1, 0] - math.exp(-5)) < 1e-8


def test_general_dimension():
    def rot(t, a, b, c):
        return (-b, a, -c)
    tr = rk4_integrate(rot, IntegrationSpec(0.0, math.pi, 1e-3, (1.0, 0.0, 1.0)))
    assert tr.states[-1] == pytest.approx([-1.0, 0.0, math.exp(-math.pi)], abs=1e-9)


def test_grid_and_stride():
    spec = IntegrationSpec(0.5, 2.0, 0.01, (1.0,), record_stride=10)
    tr = rk4_integrate(decay, spec)
    assert tr.dt == pytest.approx(0.1)
    assert len(tr) == 16
    np.testing.assert_array_equal(tr.times, 0.5 + 0.1 * np.arange(16))
    # the span is not a multiple of dt: the step shrinks to land on t_end
    tr = rk4_integrate(decay, IntegrationSpec(0.0, 1.0, 0.3, (1.0,)))
    assert tr.step == pytest.approx(0.25) and tr.t_end == 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        IntegrationSpec(1.0, 1.0, 0.1, (0.0,))
    with pytest.raises(ValueError):
        IntegrationSpec(0.0, 1.0, 2.0, (0.0,))
    with pytest.raises(ValueError):
        IntegrationSpec(0.0, 1.0, 0.1, (0.0,), record_stride=0)


def test_determinism(quad):
    spec = IntegrationSpec(0.0, 5.0, auto_step(STACKELBERG_QUADRATIC), (0.1, -0.2), 4)
    a = rk4_integrate(nes_field(STACKELBERG_QUADRATIC, quad), spec)
    b = rk4_integrate(nes_field(STACKELBERG_QUADRATIC, quad), spec)
    assert a.states.tobytes() == b.states.tobytes()
    assert a.to_csv() == b.to_csv()


def test_auto_step():
    assert auto_step(STACKELBERG_QUADRATIC) == pytest.approx(2.776e-4, rel=1e-3)
    assert auto_step(NASH_QUADRATIC) == pytest.approx(1.388e-2, rel=1e-3)

    class P:
        omega1, omega2 = 1.0, 2 * math.pi
    assert auto_step(P, 32) == pytest.approx(1 / 32, rel=1e-15)
    with pytest.raises(ValueError):
        auto_step(P, 4)


def test_domain_violation_gives_partial_trajectory():
    def field(t, x):
        if x > 1.5:
            raise DomainViolation("left the interval")
        return 1.0
    tr = rk4_integrate(field, IntegrationSpec(0.0, 3.0, 0.01, (0.0,)))
    assert not tr.completed
    assert tr.violation.t == pytest.approx(1.5, abs=0.02)
    assert tr.t_end < 1.51
    assert tr.violation.state[0] <= 1.5
    assert np.all(np.isfinite(tr.states))


def test_halving_retries_violating_step():
    # a full step's midpoint stage overshoots x < 1, half steps do not
    def field(t, x):
        if x >= 1.0:
            raise DomainViolation("x must stay below 1")
        return -25.0 * (x - 0.9)
    spec = IntegrationSpec(0.0, 2.0, 0.1, (0.0,))
    assert not rk4_integrate(field, spec).completed
    tr = rk4_integrate(field, spec, max_halvings=1)
    assert tr.completed and len(tr) == 21
    assert tr.states[-1, 0] == pytest.approx(0.9, abs=1e-4)


def test_non_finite_state_raises_with_partial():
    def blowup(t, a, b):
        return a * a, 0.0
    with pytest.raises(NonFiniteState) as err:
        rk4_integrate(blowup, IntegrationSpec(0.0, 5.0, 0.01, (1.0, 0.0)))
    assert err.value.trajectory is not None and len(err.value.trajectory) > 10


def _const(value, t0=0.0, t1=1.0, n=11):
    return Trajectory(t0, (t1 - t0) / (n - 1), np.tile(value, (n, 1)), ("x1", "x2"))


def test_sup_distance_basic():
    a = _const([0.0, 0.0])
    assert sup_distance(a, a) == 0.0
    assert sup_distance(a, _const([3.0, 4.0])) == pytest.approx(5.0)
    assert sup_distance(a, _const([3.0, 4.0]), components=["x2"]) == pytest.approx(4.0)


def test_sup_distance_interpolates_between_grids():
    t = np.linspace(0, 1, 11)
    a = Trajectory(0.0, 0.1, t[:, None], ("x",))
    b = Trajectory(0.0, 0.25, np.zeros((5, 1)), ("x",))
    assert sup_distance(a, b) == pytest.approx(1.0)
    assert sup_distance(a, b, window=(0.0, 0.35)) == pytest.approx(0.35)


def test_sup_distance_component_pairs():
    a = _const([1.0, 2.0])
    b = Trajectory(0.0, 0.1, np.full((11, 1), 2.5), ("q",))
    assert sup_distance(a, b, components=[(1, 0)]) == pytest.approx(0.5)


def test_sup_distance_no_overlap():
    with pytest.raises(ValueError):
        sup_distance(_const([0, 0]), _const([0, 0], 2.0, 3.0))


def test_final_window_mean():
    assert final_window_mean(_const([0.7, -1.0]), 0.2) == pytest.approx([0.7, -1.0])
    t = np.linspace(0.0, 20 * np.pi, 20001)
    x = 0.4 + np.sin(t)
    tr = Trajectory(0.0, t[1], x[:, None], ("x",))
    assert final_window_mean(tr, 0.5)[0] == pytest.approx(0.4, abs=1e-6)
    with pytest.raises(ValueError):
        final_window_mean(tr, 0.0)


def test_csv_export(tmp_path):
    tr = rk4_integrate(decay, IntegrationSpec(0.0, 1.0, 0.1, (1.0,)), labels=("y",))
    text = tr.to_csv(tmp_path / "y.csv")
    lines = text.splitlines()
    assert lines[0] == "t,y"
    rows = np.loadtxt(tmp_path / "y.csv", delimiter=",", skiprows=1)
    assert np.array_equal(rows[:, 0], tr.times)
    assert np.array_equal(rows[:, 1], tr.states[:, 0])


def test_error_series_matches_sup():
    a = _const([0.0, 0.0])
    b = _const([1.0, 0.0])
    t, e = error_series(a, b)
    assert np.all(e == 1.0) and t[0] == 0.0 and t[-1] == 1.0

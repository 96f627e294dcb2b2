import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nes.dynamics import (NASH_QUADRATIC, STACKELBERG_QUADRATIC, NesParams, State2,
                          averaged_rom_rhs, blm_rhs, lie_bracket_coeff, nash_averaged_rhs,
                          nes_rhs, partially_averaged_rhs, qss_eval, rom_rhs)
from nes.equilibria import reduced_cost
from nes.integrate import IntegrationSpec, Trajectory, rk4_integrate
from nes.dynamics import rom_field

P = STACKELBERG_QUADRATIC


def test_params_validation_and_epsilon():
    assert P.epsilon == 1.0 / (0.1 * 500.0)
    with pytest.raises(ValueError):
        NesParams(0.0, 1, 1, 1, 1, 2)
    with pytest.raises(ValueError):
        NesParams(1, 1, 10, 1, 1, 10)
    with pytest.raises(ValueError):
        NesParams(1, 1, float("inf"), 1, 1, 2)
    assert P.replace(k2=250.0).epsilon == pytest.approx(0.04)


def test_nes_rhs_examples(quad):
    v = nes_rhs(0.0, State2(0.0, 0.0), P, quad)
    assert v.x1 == pytest.approx(math.sqrt(0.1), rel=1e-15)
    assert v.x2 == pytest.approx(math.sqrt(0.1 * 500 * math.sqrt(2)) * math.cos(500 * 1.125),
                                 rel=1e-12)


def test_nes_rhs_quarter_phase_vanishes(quad):
    # J_L(0,0)=0 and J_F(0,-1.5)=0, so both phases equal omega t
    p = NesParams(1.0, 1.0, 1.0, 1.0, 1.0, 3.0)
    v = nes_rhs(math.pi / 2, State2(0.0, -1.5), p, quad)
    assert v.x1 == pytest.approx(0.0, abs=1e-15)
    assert v.x2 == pytest.approx(0.0, abs=1e-15)


def test_partially_averaged_examples(quad):
    v = partially_averaged_rhs(0.3, State2(0.0, 0.0), P, quad)
    assert v.x2 == pytest.approx(-37.5)
    assert v.x1 == nes_rhs(0.3, State2(0.0, 0.0), P, quad).x1
    for x1 in np.linspace(-2, 2, 9):
        assert abs(partially_averaged_rhs(1.0, State2(x1, 2 * x1 - 1.5), P, quad).x2) < 1e-8


def test_manifold_consistency_fish_war(fish):
    p = NesParams(1e-2, 10, 20, 5e-2, 100, 1000 * math.sqrt(2))
    for u in np.linspace(0.1, 1.19, 12):
        assert abs(partially_averaged_rhs(0.0, State2(u, fish.best_response(u)), p, fish).x2) < 1e-8


def test_blm_examples(quad, fish):
    for x1 in (-1.0, 0.0, 2.0):
        for y in (-0.5, 0.0, 1.3):
            assert blm_rhs(7.0, y, x1, quad) == pytest.approx(-0.5 * y, abs=1e-15)
    assert blm_rhs(0.0, 0.0, 0.4, quad) == 0.0
    uS = 1.19426
    for y in (-1e-3, -1e-4, 1e-4, 1e-3):
        assert np.sign(blm_rhs(0.0, y, uS, fish)) == -np.sign(y)


def test_rom_examples(quad):
    # J~(x1) = 4.5 x1^2 - 3 x1, zero at x1 = 0
    assert rom_rhs(0.0, 0.0, P, quad) == pytest.approx(math.sqrt(P.alpha1 * P.omega1))
    t = 0.37
    expected = math.sqrt(0.1) * math.cos(10 * t - 0.5 * 2)
    assert rom_rhs(t, 1 / 3, P, quad) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.floats(-5, 5), st.floats(-5, 5))
def test_speed_bounds(quad, t, x1, x2):
    v = nes_rhs(t, State2(x1, x2), P, quad)
    assert abs(v.x1) <= math.sqrt(P.alpha1 * P.omega1) + 1e-15
    assert abs(v.x2) <= math.sqrt(P.alpha2 * P.omega2) + 1e-15
    assert abs(rom_rhs(t, x1, P, quad)) <= math.sqrt(P.alpha1 * P.omega1) + 1e-15


def test_averaged_rom_examples(quad):
    for x1 in (-1.0, 0.0, 1.0, 2.0):
        assert averaged_rom_rhs(x1, P, quad) == pytest.approx(-0.01 * (9 * x1 - 3), abs=1e-14)
    assert averaged_rom_rhs(1 / 3, P, quad) == pytest.approx(0.0, abs=1e-15)
    assert averaged_rom_rhs(1.0, P, quad) == pytest.approx(-0.06)


@pytest.mark.parametrize("name,xs", [("quad", [-1.0, 0.25, 1.5]), ("fish", [0.4, 0.9, 1.19])])
def test_averaged_rom_matches_fd_of_reduced_cost(name, xs, request):
    g = request.getfixturevalue(name)
    for x1 in xs:
        s = 1e-6
        fd = (reduced_cost(g, x1 + s) - reduced_cost(g, x1 - s)) / (2 * s)
        expected = -0.5 * P.alpha1 * P.k1 * fd
        got = averaged_rom_rhs(x1, P, g)
        assert abs(got - expected) <= 1e-5 * abs(expected) + 1e-12


def test_averaged_rom_stationary_at_stackelberg(fish):
    from nes.equilibria import stackelberg_equilibrium
    uS = stackelberg_equilibrium(fish, 1.2).x1
    assert abs(averaged_rom_rhs(uS, P, fish)) < 1e-10


def test_nash_averaged(quad):
    assert nash_averaged_rhs(State2(0.6, -0.3), NASH_QUADRATIC, quad) == (0.0, 0.0)
    p = NesParams(1.0, 0.1, 10.0, 1.0, 0.1, 14.0)
    v = nash_averaged_rhs(State2(0.0, 0.0), p, quad)
    assert v.x1 == 0.0 and v.x2 == pytest.approx(-0.075)


def _rom_traj(quad, T=2.0, dt=1e-3):
    return rk4_integrate(rom_field(P, quad), IntegrationSpec(0.0, T, dt, (0.2,)), labels=("x1",))


def test_qss_zero_layer(quad):
    x1 = _rom_traj(quad)
    q = qss_eval(x1, P, quad, 0.0)
    assert np.array_equal(q.column("x2q"), 2 * x1.column("x1") - 1.5)
    assert np.array_equal(q.column("x2q"), q.column("h"))


def test_qss_layer_closed_form(quad):
    x1 = _rom_traj(quad)
    y0 = 0.8
    q = qss_eval(x1, P, quad, y0)
    tau = (q.times - q.t0) / P.epsilon
    layer = q.column("x2q") - q.column("h")
    assert np.max(np.abs(layer - y0 * np.exp(-tau / 2))) < 1e-8
    # boundary layer gone after a few eps
    assert abs(layer[q.times > 30 * P.epsilon]).max() < 1e-6


def test_lie_bracket_coefficients():
    assert lie_bracket_coeff(np.cos, np.sin) == pytest.approx(0.5, abs=1e-10)
    assert lie_bracket_coeff(np.cos, np.cos) == pytest.approx(0.0, abs=1e-10)
    # antisymmetry of the pairing
    assert lie_bracket_coeff(np.sin, np.cos) == pytest.approx(-0.5, abs=1e-10)
    assert lie_bracket_coeff(math.cos, math.sin) == pytest.approx(0.5, abs=1e-10)
    assert math.isfinite(lie_bracket_coeff(np.sin, np.sin))


def test_lie_bracket_rejects_bad_waveforms():
    with pytest.raises(ValueError, match="mean"):
        lie_bracket_coeff(lambda th: 1.0 + np.cos(th), np.sin)
    with pytest.raises(ValueError, match="periodic"):
        lie_bracket_coeff(lambda th: th - np.pi, np.sin)
    with pytest.raises(ValueError):
        lie_bracket_coeff(np.cos, np.sin, panels=7)

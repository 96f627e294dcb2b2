import numpy as np
import pytest
from scipy.stats import qmc

from nes.games import fish_war_game, quadratic_game


@pytest.fixture(scope="session")
def quad():
    return quadratic_game()


@pytest.fixture(scope="session")
def fish():
    return fish_war_game()


def feasible_samples(game, box, n=100, seed=0, margin=0.0):
    """``n`` quasi-random feasible points of ``box`` (Halton sequence).

    With ``margin`` the square of that half-width around each point must
    be feasible too (enough for constraints monotone in each variable).
    """
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    (a1, b1), (a2, b2) = box
    out = []
    while len(out) < n:
        for u, v in qmc.scale(sampler.random(64), [a1, a2], [b1, b2]):
            corners = [(u + a, v + b) for a in (-margin, margin) for b in (-margin, margin)]
            if all(game.is_feasible(*c) for c in corners):
                out.append((float(u), float(v)))
    return np.array(out[:n])


# one PASS/FAIL line per acceptance criterion in the terminal summary

_criteria = {}

TITLES = {
    1: "quadratic Stackelberg convergence",
    2: "quadratic Nash convergence",
    3: "Fish War convergence (both modes)",
    4: "equilibrium solvers",
    5: "order probe, omega1",
    6: "order probe, omega2",
    7: "order probe, epsilon",
    8: "boundary-layer certificate",
    9: "Lie-bracket coefficient",
    10: "derivative hygiene",
    11: "RK4 order",
    12: "equilibrium selection",
}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.originalname if hasattr(item, "originalname") else item.name
    if not name.startswith("test_c") or not item.fspath.basename == "test_acceptance.py":
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        num = int(name[6:8])
        entry = _criteria.setdefault(num, {"ok": True, "failed": []})
        if not rep.passed:
            entry["ok"] = False
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_criteria):
        e = _criteria[num]
        line = f"criterion {num:2d} {'PASS' if e['ok'] else 'FAIL'}  {TITLES.get(num, '')}"
        if e["failed"]:
            line += "  [failed: " + ", ".join(e["failed"]) + "]"
        tr.write_line(line)

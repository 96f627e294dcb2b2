import json

import numpy as np
import pytest

from nes.cli import main


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def load(path):
    return json.loads(path.read_text())


def test_list_games(capsys):
    assert main(["list-games"]) == 0
    out = capsys.readouterr().out
    assert "quadratic" in out and "fishwar" in out


def test_equilibria_quadratic(tmp_path):
    assert run(tmp_path, "equilibria", "--game", "quadratic") == 0
    rep = load(tmp_path / "equilibria.json")
    assert rep["schema"] == "nes/1"
    assert (rep["nash"]["x1"], rep["nash"]["x2"]) == pytest.approx((0.6, -0.3), abs=1e-10)
    assert rep["stackelberg"]["x1"] == pytest.approx(1 / 3, abs=1e-10)
    assert rep["stackelberg"]["x2"] == pytest.approx(-5 / 6, abs=1e-10)


def test_equilibria_fish_war(tmp_path):
    assert run(tmp_path, "equilibria", "--game", "fishwar") == 0
    rep = load(tmp_path / "equilibria.json")
    assert round(rep["nash"]["x1"], 1) == 0.3 and round(rep["nash"]["x2"], 1) == 0.9
    assert rep["stackelberg"]["x1"] == pytest.approx(1.19426, abs=1e-5)


def test_unknown_game_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "equilibria", "--game", "chess") == 2
    assert "unknown game" in capsys.readouterr().err


def test_bad_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["fly"])
    assert err.value.code == 2


def test_simulate_short_run(tmp_path):
    code = run(tmp_path, "simulate", "--game", "quadratic", "--mode", "nash", "--t-end", "20")
    assert code == 0
    s = load(tmp_path / "summary.json")
    for key in ("final_window_mean", "distance_to_nash", "distance_to_stackelberg",
                "hierarchy", "clamp_count"):
        assert key in s
    assert s["hierarchy"]["flagged"]
    rows = np.loadtxt(tmp_path / "trajectory.csv", delimiter=",", skiprows=1)
    assert rows[0, 1:] == pytest.approx([0.0, 0.0])
    assert rows[-1, 0] == pytest.approx(20.0)
    svg = (tmp_path / "phase.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg and "SE" in svg and "NE" in svg
    assert "polyline" in (tmp_path / "time.svg").read_text()


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "simulate", "--mode", "stackelberg", "--t-end", "2") == 0
    for name in ("trajectory.csv", "summary.json", "phase.svg", "time.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_zero_duration_rejected(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--t-end", "0") == 2
    assert "empty trajectory" in capsys.readouterr().err


def test_custom_mode_requires_params(tmp_path):
    assert run(tmp_path, "simulate", "--mode", "custom", "--alpha1", "0.01") == 2
    code = run(tmp_path, "simulate", "--mode", "custom", "--alpha1", "0.01", "--k1", "2",
               "--omega1", "10", "--alpha2", "0.1", "--k2", "50", "--omega2", "100",
               "--t-end", "1")
    assert code == 0


def test_domain_violation_exit_code(tmp_path):
    code = run(tmp_path, "simulate", "--game", "fishwar", "--mode", "stackelberg",
               "--t-end", "20")
    assert code == 4
    s = load(tmp_path / "summary.json")
    assert not s["completed"] and s["violation"]["t"] < 20
    assert (tmp_path / "trajectory.csv").exists()


def test_infeasible_start_is_usage_error(tmp_path):
    assert run(tmp_path, "simulate", "--game", "fishwar", "--x1", "2.0") == 2


def test_clamp_policy_reports_count(tmp_path):
    code = run(tmp_path, "simulate", "--game", "fishwar", "--mode", "stackelberg",
               "--boundary", "clamp", "--t-end", "5")
    assert code == 0
    assert load(tmp_path / "summary.json")["clamp_count"] > 0


def test_config_game(tmp_path):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"leader_cost": "0.5*x1^2 + 2*x1*x2",
                               "follower_cost": "0.5*(x2 - 2*x1 + 1.5)^2"}))
    assert main(["equilibria", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rep = load(tmp_path / "equilibria.json")
    assert rep["game"] == "g"
    assert rep["nash"]["x1"] == pytest.approx(0.6, abs=1e-8)


def test_bad_config_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"leader_cost": "x1 + "}))
    assert main(["equilibria", "--config", str(cfg)]) == 2


def test_compare_pairs(tmp_path):
    hi = tmp_path / "hi"
    lo = tmp_path / "lo"
    assert run(hi, "compare", "--pair", "rom-avgrom", "--omega1", "1600", "--t-end", "5") == 0
    assert run(lo, "compare", "--pair", "rom-avgrom", "--omega1", "100", "--t-end", "5") == 0
    assert load(hi / "compare.json")["sup_distance"] < load(lo / "compare.json")["sup_distance"]
    same = tmp_path / "same"
    assert run(same, "compare", "--pair", "original-original", "--t-end", "1") == 0
    assert load(same / "compare.json")["sup_distance"] == 0.0
    err = np.loadtxt(hi / "error.csv", delimiter=",", skiprows=1)
    assert err.shape[1] == 2


def test_compare_original_partial_monotone(tmp_path):
    d = {}
    for w2 in (1131.37, 18101.9):
        out = tmp_path / str(w2)
        assert run(out, "compare", "--pair", "original-partial", "--k2", "10",
                   "--omega2", str(w2), "--t-end", "2") == 0
        d[w2] = load(out / "compare.json")["sup_distance"]
    assert d[18101.9] < d[1131.37]


def test_compare_partial_rom_has_fast_error(tmp_path):
    assert run(tmp_path, "compare", "--pair", "partial-rom", "--t-end", "2") == 0
    assert load(tmp_path / "compare.json")["fast_sup_distance"] > 0


def test_compare_bad_pair(tmp_path):
    assert run(tmp_path, "compare", "--pair", "rom") == 2
    assert run(tmp_path, "compare", "--pair", "rom-qss") == 2


def test_sweep(tmp_path):
    assert run(tmp_path, "sweep", "--probe", "omega1", "--values", "100,400,1600") == 0
    body = load(tmp_path / "sweep.json")
    assert body["pass"] and -0.75 <= body["slope"] <= -0.25
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0] == "param_value,sup_error" and len(rows) == 4


def test_sweep_needs_three_values(tmp_path, capsys):
    assert run(tmp_path, "sweep", "--probe", "omega1", "--values", "100,400") == 2
    assert "three" in capsys.readouterr().err


def test_design(tmp_path, capsys):
    assert run(tmp_path, "design", "--mode", "stackelberg") == 0
    body = load(tmp_path / "design.json")
    assert body["hierarchy"]["ratios"] == pytest.approx([500, 5, 14.142135623730951])
    assert not body["hierarchy"]["flagged"]
    assert run(tmp_path, "design", "--game", "fishwar", "--mode", "stackelberg") == 0
    assert load(tmp_path / "design.json")["hierarchy"]["ratios"][1] == pytest.approx(0.25)
    assert "advisory" in capsys.readouterr().out
    assert run(tmp_path, "design", "--upsilon", "1", "--alpha2", "1") == 0
    th = load(tmp_path / "design.json")["thresholds"]
    assert th["omega1_star"] == 1.0 and th["k2_star"] == pytest.approx(np.e ** 2)
    assert run(tmp_path, "design", "--upsilon", "0.1") == 0
    assert load(tmp_path / "design.json")["thresholds"]["omega2_star"] == "inf"

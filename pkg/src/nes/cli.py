"""``nes`` command line: simulate, equilibria, compare, sweep, design, list-games.

Exit codes: 0 success, 2 usage or config error, 3 numeric failure,
4 run stopped by a domain violation under the strict boundary policy.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .dynamics import (NesParams, averaged_rom_field, nes_field, partially_averaged_field,
                       qss_eval, rom_field)
from .equilibria import BestResponseMap, nash_equilibrium, stackelberg_equilibrium
from .errors import ConfigError, DomainViolation, NonFiniteState, SolverError
from .experiments import default_setup, reference_points, simulate, summarize
from .games import BUILTIN_GAMES, builtin_game, load_game
from .integrate import IntegrationSpec, auto_step, error_series, rk4_integrate
from .plots import phase_svg, time_svg

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_DOMAIN = 0, 2, 3, 4
PARAM_NAMES = ("alpha1", "k1", "omega1", "alpha2", "k2", "omega2")
SYSTEMS = ("original", "partial", "rom", "avgrom")


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _game(args):
    if args.config:
        return load_game(args.config, boundary=args.boundary)
    try:
        return builtin_game(args.game, boundary=args.boundary)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _params(args, game_name):
    given = {k: getattr(args, k) for k in PARAM_NAMES if getattr(args, k) is not None}
    if args.mode == "custom":
        missing = [k for k in PARAM_NAMES if k not in given]
        if missing:
            raise UsageError(f"--mode custom needs all six parameters; missing {missing}")
        return NesParams(**given), None
    setup = default_setup(game_name, args.mode)
    return setup.params.replace(**given), setup


def _setup(args, g):
    p, setup = _params(args, g.name)
    x0 = list(setup.x0) if setup else [0.0, 0.0]
    if args.x1 is not None:
        x0[0] = args.x1
    if args.x2 is not None:
        x0[1] = args.x2
    t_end = args.t_end if args.t_end is not None else (setup.t_end if setup else 100.0)
    if not t_end > 0:
        raise UsageError("empty trajectory: --t-end must be positive")
    if args.dt is not None:
        dt = args.dt
    else:
        dt = auto_step(p, args.auto_dt)
    if not g.is_feasible(*x0):
        raise UsageError(f"initial state {tuple(x0)} is outside the feasible set "
                         f"({g.feasible_description})")
    return p, tuple(x0), t_end, dt


def cmd_simulate(args) -> int:
    g = _game(args)
    p, x0, t_end, dt = _setup(args, g)
    out = Path(args.out)
    code = EXIT_OK
    try:
        tr = simulate(g, p, x0, t_end, dt=dt)
    except NonFiniteState as exc:
        tr = exc.trajectory
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    summary = summarize(g, p, tr, t_end, fraction=args.fraction)
    summary["mode"] = args.mode
    summary["boundary"] = args.boundary
    if code == EXIT_NUMERIC:
        summary["error"] = "non-finite state"
    refs = {k: summary[k] for k in ("nash", "stackelberg")}
    _write(out, "trajectory.csv", tr.to_csv())
    _write(out, "summary.json", _dump(summary))
    _write(out, "phase.svg", phase_svg(tr.states, refs, title=f"{g.name} ({args.mode})"))
    _write(out, "time.svg", time_svg(tr.times, tr.states, tr.labels, refs,
                                     title=f"{g.name} ({args.mode})"))
    m = summary["final_window_mean"]
    print(f"{g.name} {args.mode}: final-window mean ({m[0]:.6g}, {m[1]:.6g})")
    for key in ("distance_to_nash", "distance_to_stackelberg"):
        if summary[key] is not None:
            print(f"  {key} = {summary[key]:.4g}")
    if tr.violation is not None:
        print(f"  stopped at t={tr.violation.t:.6g}: {tr.violation.message}", file=sys.stderr)
        code = EXIT_DOMAIN
    print(f"  artifacts in {out}/")
    return code


def cmd_equilibria(args) -> int:
    g = _game(args)
    refs = dict(g.references)
    seed_n = refs.get("nash", (0.0, 0.0))
    seed_s = refs.get("stackelberg", (0.0, 0.0))
    if args.x1 is not None or args.x2 is not None:
        seed_n = (args.x1 if args.x1 is not None else seed_n[0],
                  args.x2 if args.x2 is not None else seed_n[1])
        seed_s = seed_n
    report = {"schema": "nes/1", "game": g.name}
    failed = False
    for kind, solve in (("nash", lambda: nash_equilibrium(g, seed_n)),
                        ("stackelberg", lambda: stackelberg_equilibrium(g, seed_s[0]))):
        try:
            res = solve()
            report[kind] = res.as_dict()
            print(f"{kind:12s} x1={res.x1:.12g} x2={res.x2:.12g} ({res.method}, "
                  f"{res.iterations} it)")
        except (SolverError, ArithmeticError) as exc:
            failed = True
            report[kind] = {"kind": kind, "error": str(exc)}
            print(f"{kind:12s} failed: {exc}", file=sys.stderr)
    if args.out:
        _write(Path(args.out), "equilibria.json", _dump(report))
    else:
        sys.stdout.write(_dump(report))
    return EXIT_NUMERIC if failed else EXIT_OK


def _run_system(name, p, g, x0, t_end, dt, h):
    if name in ("original", "partial"):
        field = (nes_field if name == "original" else partially_averaged_field)(p, g)
        spec = IntegrationSpec(0.0, t_end, dt, x0)
        return rk4_integrate(field, spec, labels=("x1", "x2"))
    field = (rom_field if name == "rom" else averaged_rom_field)(p, g, h=h)
    return rk4_integrate(field, IntegrationSpec(0.0, t_end, dt, (x0[0],)), labels=("x1",))


def cmd_compare(args) -> int:
    g = _game(args)
    p, x0, t_end, dt = _setup(args, g)
    try:
        a_name, b_name = args.pair.split("-")
    except ValueError:
        raise UsageError(f"--pair must look like SYSTEM-SYSTEM, got {args.pair!r}") from None
    for n in (a_name, b_name):
        if n not in SYSTEMS:
            raise UsageError(f"unknown system {n!r}; choose from {SYSTEMS}")
    h = BestResponseMap(g)
    a = _run_system(a_name, p, g, x0, t_end, dt, h)
    b = _run_system(b_name, p, g, x0, t_end, dt, h)
    comps = ["x1"] if min(a.states.shape[1], b.states.shape[1]) == 1 else None
    t, err = error_series(a, b, components=comps)
    out = Path(args.out)
    _write(out, f"{a_name}.csv", a.to_csv())
    _write(out, f"{b_name}.csv" if b_name != a_name else f"{b_name}_2.csv", b.to_csv())
    lines = ["t,error"] + ["%.17g,%.17g" % (ti, ei) for ti, ei in zip(t, err)]
    _write(out, "error.csv", "\n".join(lines) + "\n")
    summary = {"schema": "nes/1", "game": g.name, "pair": [a_name, b_name],
               "params": p.as_dict(), "x0": list(x0), "t_end": t_end, "dt": a.step,
               "components": comps or ["x1", "x2"], "sup_distance": float(np.max(err)),
               "completed": a.completed and b.completed}
    if {a_name, b_name} == {"partial", "rom"}:
        full = a if a_name == "partial" else b
        rom = b if a_name == "partial" else a
        q = qss_eval(rom, p, g, y0=x0[1] - h(x0[0]), h=h)
        _, fast = error_series(full, q, components=[(1, 0)])
        summary["fast_sup_distance"] = float(np.max(fast))
    _write(out, "compare.json", _dump(summary))
    print(f"{a_name} vs {b_name}: sup distance {summary['sup_distance']:.6g}")
    if not summary["completed"]:
        return EXIT_DOMAIN
    return EXIT_OK


_PROBE_DEFAULTS = {
    # probe: (parameter overrides of the Stackelberg defaults, horizon)
    "omega1": ({}, 10.0),
    "omega2": ({"k2": 10.0}, 5.0),
    "epsilon": ({}, 10.0),
}


def cmd_sweep(args) -> int:
    g = _game(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if len(values) < 3:
        raise UsageError("a sweep needs at least three values to fit a slope")
    overrides, horizon = _PROBE_DEFAULTS[args.probe]
    base = default_setup(g.name, "stackelberg").params.replace(**overrides)
    given = {k: getattr(args, k) for k in PARAM_NAMES if getattr(args, k) is not None}
    p0 = base.replace(**given)
    T = args.t_end if args.t_end is not None else horizon
    x0 = (args.x1 if args.x1 is not None else 0.0, args.x2 if args.x2 is not None else 0.0)
    probe = {"omega1": lambda: analysis.probe_order_omega1(g, p0, values, T, x1_0=x0[0]),
             "omega2": lambda: analysis.probe_order_omega2(g, p0, values, T, x0=x0),
             "epsilon": lambda: analysis.probe_order_epsilon(g, p0, values, T, x0=x0)}
    try:
        res = probe[args.probe]()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    rows = ["param_value,sup_error"]
    swept = values if args.probe != "epsilon" else values
    rows += ["%.17g,%.17g" % (v, e) for v, e in zip(swept, res.errors)]
    _write(out, "sweep.csv", "\n".join(rows) + "\n")
    body = {"schema": "nes/1", "game": g.name, "probe": args.probe, "swept": list(values),
            "params": p0.as_dict(), "T": T, **res.as_dict()}
    _write(out, "sweep.json", _dump(body))
    verdict = "pass" if res.passed else "FAIL"
    print(f"{args.probe} probe: slope {res.slope:.4f} vs {res.parameter}, "
          f"band [{res.band[0]}, {res.band[1]}]: {verdict}")
    return EXIT_OK


def cmd_design(args) -> int:
    if args.game or args.config:
        name = Path(args.config).stem if args.config else args.game
    else:
        name = "quadratic"
    p, _ = _params(args, name)
    rep = analysis.hierarchy_check(p, args.min_ratio)
    body = {"schema": "nes/1", "params": p.as_dict(), "hierarchy": rep.as_dict()}
    r = rep.ratios
    print(f"ratios omega1/(a1k1)={r[0]:.6g}  (a2k2)/omega1={r[1]:.6g}  omega2/(a2k2)={r[2]:.6g}")
    print(rep.advisory())
    if args.upsilon is not None:
        try:
            th = analysis.scaling_thresholds(args.upsilon, args.c, args.C1, args.C2, args.C3,
                                             p.alpha2)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        body["thresholds"] = th.as_dict()
        print(f"omega1* = {th.omega1_star:.6g}  k2* = {th.k2_star:.6g}  "
              f"omega2* = {th.omega2_star:.6g}")
        if th.saturated:
            print(f"saturated (beyond double precision): {', '.join(th.saturated)}")
        print("these sufficient thresholds are conservative; tune with the ratios above")
    if args.out:
        _write(Path(args.out), "design.json", _dump(body))
    return EXIT_OK


def cmd_list_games(args) -> int:
    for name in sorted(BUILTIN_GAMES):
        g = builtin_game(name)
        refs = ", ".join(f"{k} ({v[0]:.6g}, {v[1]:.6g})" for k, v in sorted(g.references.items()))
        print(f"{name:10s} feasible: {g.feasible_description}; {refs}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    sel = common.add_mutually_exclusive_group()
    sel.add_argument("--game", default=None, help="built-in game name (default: quadratic)")
    sel.add_argument("--config", default=None, help="path to a JSON game config")
    common.add_argument("--mode", choices=("nash", "stackelberg", "custom"),
                        default="stackelberg")
    for name in PARAM_NAMES:
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, default=None)
    common.add_argument("--t-end", dest="t_end", type=float, default=None)
    step = common.add_mutually_exclusive_group()
    step.add_argument("--dt", type=float, default=None)
    step.add_argument("--auto-dt", dest="auto_dt", type=int, default=32,
                      help="samples per period of the fastest dither (default 32)")
    common.add_argument("--x1", type=float, default=None)
    common.add_argument("--x2", type=float, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--boundary", choices=("strict", "clamp"), default="strict")

    parser = argparse.ArgumentParser(prog="nes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="integrate the nES system")
    p.add_argument("--fraction", type=float, default=0.2,
                   help="final window used for the convergence readout")
    p.set_defaults(func=cmd_simulate, default_out="nes-out")
    p = sub.add_parser("equilibria", parents=[common], help="Nash and Stackelberg points")
    p.set_defaults(func=cmd_equilibria, default_out=None)
    p = sub.add_parser("compare", parents=[common], help="two systems of the ladder")
    p.add_argument("--pair", default="original-partial",
                   help="two of original, partial, rom, avgrom joined by '-'")
    p.set_defaults(func=cmd_compare, default_out="nes-out")
    p = sub.add_parser("sweep", parents=[common], help="order-of-convergence probe")
    p.add_argument("--probe", choices=("omega1", "omega2", "epsilon"), required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated omega1, omega2 or k2 values")
    p.set_defaults(func=cmd_sweep, default_out="nes-out")
    p = sub.add_parser("design", parents=[common], help="time-scale and threshold check")
    p.add_argument("--min-ratio", dest="min_ratio", type=float, default=5.0)
    p.add_argument("--upsilon", type=float, default=None)
    for name in ("c", "C1", "C2", "C3"):
        p.add_argument(f"--{name}", type=float, default=1.0)
    p.set_defaults(func=cmd_design, default_out=None)
    p = sub.add_parser("list-games", help="show the built-in games")
    p.set_defaults(func=cmd_list_games, default_out=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "out") and args.out is None:
        args.out = args.default_out
    if getattr(args, "game", None) is None and getattr(args, "config", None) is None \
            and args.command != "list-games":
        args.game = "quadratic"
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"nes: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"nes: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonFiniteState, SolverError, OverflowError) as exc:
        print(f"nes: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainViolation as exc:
        print(f"nes: domain violation: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

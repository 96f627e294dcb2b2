"""Built-in example games and loading of user-defined games from JSON."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DomainViolation
from .expr import ClampCounter, ExprSyntaxError, compile_ast, parse_cost_expr
from .model import Game, ScalarField2

__all__ = [
    "quadratic_game", "FishWarParams", "fish_war_game", "load_game",
    "game_from_config", "builtin_game", "BUILTIN_GAMES",
]

BOUNDARY_POLICIES = ("strict", "clamp")


def quadratic_game() -> Game:
    """Leader ``x1^2/2 + 2 x1 x2``, follower ``(x2 - 2 x1 + 1.5)^2 / 2``.

    Nash equilibrium (0.6, -0.3); Stackelberg equilibrium (1/3, -5/6).
    """
    leader = ScalarField2(
        value=lambda x1, x2: 0.5 * x1 * x1 + 2.0 * x1 * x2,
        d1=lambda x1, x2: x1 + 2.0 * x2,
        d2=lambda x1, x2: 2.0 * x1,
        d11=lambda x1, x2: 1.0,
        d22=lambda x1, x2: 0.0,
        d12=lambda x1, x2: 2.0,
    )

    def follower(x1, x2):
        r = x2 - 2.0 * x1 + 1.5
        return 0.5 * r * r

    follower_field = ScalarField2(
        value=follower,
        d1=lambda x1, x2: -2.0 * (x2 - 2.0 * x1 + 1.5),
        d2=lambda x1, x2: x2 - 2.0 * x1 + 1.5,
        d11=lambda x1, x2: 4.0,
        d22=lambda x1, x2: 1.0,
        d12=lambda x1, x2: -2.0,
    )
    return Game(
        leader_cost=leader,
        follower_cost=follower_field,
        name="quadratic",
        best_response=lambda x1: 2.0 * x1 - 1.5,
        references={"nash": (0.6, -0.3), "stackelberg": (1.0 / 3.0, -5.0 / 6.0)},
    )


@dataclass(frozen=True)
class FishWarParams:
    """Fish War constants: time preference ``tau``, curvature exponents
    ``mu_L``/``mu_F``, discount factors ``beta_L``/``beta_F`` and the fish
    stock ``x``."""

    tau: float = 0.2852
    mu_L: float = 1.1
    mu_F: float = 1.2
    beta_L: float = 0.8
    beta_F: float = 0.48
    x: float = 1.259

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if not (self.mu_L > 1.0 and self.mu_F > 1.0):
            raise ValueError("mu_L and mu_F must exceed 1")
        if not (0.0 < self.beta_L <= 1.0 and 0.0 < self.beta_F <= 1.0):
            raise ValueError("beta_L and beta_F must lie in (0, 1]")
        if not self.x > 0.0:
            raise ValueError("fish stock x must be positive")


def fish_war_game(fp: FishWarParams | None = None, boundary: str = "strict") -> Game:
    """The Fish War with players ``(u, v) = (x1, x2)``.

    ``log(.)^tau`` is taken as ``tau * log(.)``.  Under ``boundary="strict"``
    any evaluation outside the open feasible set raises DomainViolation;
    under ``"clamp"`` log arguments are floored at 1e-9 (and negative
    bases of fractional powers at 0), with every clamp counted on
    ``game.clamp``.
    """
    fp = fp or FishWarParams()
    if boundary not in BOUNDARY_POLICIES:
        raise ValueError(f"unknown boundary policy {boundary!r}")
    X, muL, muF = fp.x, fp.mu_L, fp.mu_F
    cL = fp.beta_L * fp.tau
    cF = fp.beta_F * fp.tau
    log = math.log

    if boundary == "strict":
        def args(u, v):
            if u <= 0.0 or v <= 0.0:
                raise DomainViolation(f"({u}, {v}) outside the positive quadrant")
            aL = X - u - v ** muL
            aF = X - v - u ** muF
            if aL <= 0.0 or aF <= 0.0:
                raise DomainViolation(f"({u}, {v}) exhausts the fish stock")
            return aL, aF

        def JL(u, v):
            aL, _ = args(u, v)
            return -log(u) - cL * log(aL)

        def JF(u, v):
            _, aF = args(u, v)
            return -log(v) - cF * log(aF)

        def inv(a):
            return 1.0 / a

        def pos(a):
            return a
        clamp = None
    else:
        clamp = ClampCounter(1e-9)
        floor = clamp.floor
        clog = clamp.log
        cbase = clamp.base

        def args(u, v):
            return X - u - cbase(v) ** muL, X - v - cbase(u) ** muF

        def JL(u, v):
            aL, _ = args(u, v)
            return -clog(u) - cL * clog(aL)

        def JF(u, v):
            _, aF = args(u, v)
            return -clog(v) - cF * clog(aF)

        def inv(a):
            # derivative of the floored log vanishes below the floor
            return 1.0 / a if a >= floor else 0.0

        pos = cbase

    def dJL_du(u, v):
        aL, _ = args(u, v)
        return -inv(u) + cL * inv(aL)

    def dJL_dv(u, v):
        aL, _ = args(u, v)
        return cL * muL * pos(v) ** (muL - 1.0) * inv(aL)

    def d2JL_uu(u, v):
        aL, _ = args(u, v)
        return inv(u) ** 2 + cL * inv(aL) ** 2

    def d2JL_uv(u, v):
        aL, _ = args(u, v)
        return cL * muL * pos(v) ** (muL - 1.0) * inv(aL) ** 2

    def d2JL_vv(u, v):
        aL, _ = args(u, v)
        g = muL * pos(v) ** (muL - 1.0)
        return cL * (muL * (muL - 1.0) * pos(v) ** (muL - 2.0) * inv(aL) + (g * inv(aL)) ** 2)

    def dJF_du(u, v):
        _, aF = args(u, v)
        return cF * muF * pos(u) ** (muF - 1.0) * inv(aF)

    def dJF_dv(u, v):
        _, aF = args(u, v)
        return -inv(v) + cF * inv(aF)

    def d2JF_vv(u, v):
        _, aF = args(u, v)
        return inv(v) ** 2 + cF * inv(aF) ** 2

    def d2JF_uv(u, v):
        _, aF = args(u, v)
        return cF * muF * pos(u) ** (muF - 1.0) * inv(aF) ** 2

    def d2JF_uu(u, v):
        _, aF = args(u, v)
        g = muF * pos(u) ** (muF - 1.0)
        return cF * (muF * (muF - 1.0) * pos(u) ** (muF - 2.0) * inv(aF) + (g * inv(aF)) ** 2)

    def h(u):
        # root of -1/v + cF/(X - v - u^muF) = 0
        if u <= 0.0 or u ** muF >= X:
            raise DomainViolation(f"no feasible follower action at u={u}")
        return (X - u ** muF) / (1.0 + cF)

    def feasible(u, v):
        return (u > 0.0 and v > 0.0 and u + v ** muL < X and u ** muF + v < X)

    return Game(
        leader_cost=ScalarField2(JL, dJL_du, dJL_dv, d2JL_uu, d2JL_vv, d2JL_uv),
        follower_cost=ScalarField2(JF, dJF_du, dJF_dv, d2JF_uu, d2JF_vv, d2JF_uv),
        name="fishwar",
        best_response=h,
        feasible=feasible,
        feasible_description="u > 0, v > 0, u + v^mu_L < x, u^mu_F + v < x",
        references={"nash": (0.3, 0.9), "stackelberg": (1.19426, 0.01896)},
        clamp=clamp,
    )


BUILTIN_GAMES = {"quadratic": quadratic_game, "fishwar": fish_war_game}


def builtin_game(name: str, boundary: str = "strict") -> Game:
    if name not in BUILTIN_GAMES:
        raise KeyError(f"unknown game {name!r}; choose from {sorted(BUILTIN_GAMES)}")
    if name == "fishwar":
        return fish_war_game(boundary=boundary)
    return BUILTIN_GAMES[name]()


_REQUIRED = ("leader_cost", "follower_cost")
_KNOWN = {"name", "leader_cost", "follower_cost", "params", "feasible",
          "best_response", "references"}


def game_from_config(cfg: dict, boundary: str = "strict", source: str = "<config>") -> Game:
    """Build a Game from an already-decoded config mapping.

    Costs get finite-difference partials only; analytic forms are not
    derived.  ``feasible`` entries are expressions that must be ``>= 0``.
    """
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    missing = [k for k in _REQUIRED if k not in cfg]
    if missing:
        raise ConfigError(f"{source}: missing required key(s) {missing}")
    unknown = set(cfg) - _KNOWN
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {sorted(unknown)}")
    if boundary not in BOUNDARY_POLICIES:
        raise ValueError(f"unknown boundary policy {boundary!r}")
    params = cfg.get("params", {}) or {}
    if not isinstance(params, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in params.values()):
        raise ConfigError(f"{source}: 'params' must map names to numbers")
    clamp = ClampCounter(1e-9) if boundary == "clamp" else None

    def compile_key(key, text, variables=("x1", "x2")):
        if not isinstance(text, str):
            raise ConfigError(f"{source}: {key!r} must be an expression string")
        try:
            ast = parse_cost_expr(text, params, variables)
        except ExprSyntaxError as exc:
            raise ConfigError(f"{source}: {key}: {exc}\n    {text}\n    {' ' * exc.pos}^") from exc
        return compile_ast(ast, variables, clamp)

    JL = compile_key("leader_cost", cfg["leader_cost"])
    JF = compile_key("follower_cost", cfg["follower_cost"])

    predicates = []
    for i, text in enumerate(cfg.get("feasible", []) or []):
        predicates.append(compile_key(f"feasible[{i}]", text))

    def feasible(x1, x2):
        for p in predicates:
            try:
                if not p(x1, x2) >= 0.0:
                    return False
            except DomainViolation:
                return False
        return True

    best_response = None
    if cfg.get("best_response") is not None:
        br = compile_key("best_response", cfg["best_response"], ("x1", "_unused"))

        def best_response(x1, _br=br):
            return _br(x1, 0.0)

    refs = {}
    for label, point in (cfg.get("references") or {}).items():
        try:
            refs[label] = (float(point[0]), float(point[1]))
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"{source}: reference {label!r} must be a pair of numbers") from exc

    return Game(
        leader_cost=ScalarField2(JL),
        follower_cost=ScalarField2(JF),
        name=str(cfg.get("name", "custom")),
        best_response=best_response,
        feasible=feasible,
        feasible_description=" and ".join(f"{t} >= 0" for t in cfg.get("feasible", []) or []) or "R^2",
        references=refs,
        clamp=clamp,
    )


def load_game(path: str | Path, boundary: str = "strict") -> Game:
    """Load a game from a UTF-8 JSON config file.

    Keys: ``name``, ``leader_cost``, ``follower_cost`` (expressions in
    ``x1``, ``x2``), ``params`` (name -> number), ``feasible`` (list of
    expressions meaning ``expr >= 0``), optional ``best_response``
    (expression in ``x1``) and optional ``references``
    (label -> ``[x1, x2]``).
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(cfg, dict):
        cfg.setdefault("name", path.stem)
    return game_from_config(cfg, boundary=boundary, source=str(path))

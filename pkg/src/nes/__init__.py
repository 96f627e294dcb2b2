"""Nested extremum seeking (nES) in two-player leader-follower games."""

from .errors import ConfigError, DomainViolation, NonFiniteState, SingularityError, SolverError
from .model import Game, ScalarField2, grad_fd, hessian_fd
from .expr import eval_ast, parse_cost_expr
from .games import FishWarParams, builtin_game, fish_war_game, load_game, quadratic_game
from .equilibria import (best_response, convexity_report, grid_oracle_nash, h_prime,
                         nash_equilibrium, reduced_cost, stackelberg_equilibrium)
from .dynamics import NesParams, State2, lie_bracket_coeff
from .integrate import IntegrationSpec, Trajectory, auto_step, final_window_mean, rk4_integrate, sup_distance

__version__ = "0.1.0"

"""
Fish War: a local, constrained test case
========================================

Two countries harvest a shared stock.  Costs are logarithmic, so the
actions must keep the stock positive.  The Nash run works from a start
inside the feasible set.  The Stackelberg point sits a few thousandths
from the boundary and the dither amplitude is larger than that margin.
"""

# %%
import numpy as np

from nes.dynamics import NASH_FISHWAR, STACKELBERG_FISHWAR
from nes.equilibria import convexity_report, nash_equilibrium, stackelberg_equilibrium
from nes.experiments import simulate
from nes.games import fish_war_game
from nes.integrate import final_window_mean

g = fish_war_game()
ne = nash_equilibrium(g, (0.3, 0.9)).point
se = stackelberg_equilibrium(g, 1.19).point
print("NE", np.round(ne, 5), " SE", np.round(se, 6))

# %%
# Curvatures near the Stackelberg point.  The follower is very stiff there.
rep = convexity_report(g, ((1.18, 1.2), (0.015, 0.022)), 7)
print("m1 ~", round(rep.m1_estimate, 1), " m2 ~", round(rep.m2_estimate, 1))

# %%
tr = simulate(g, NASH_FISHWAR, (0.2, 0.7), 300.0)
print("nash run: completed", tr.completed, " mean", np.round(final_window_mean(tr), 4))

# %%
# The follower's dither alone moves v by more than the slack it has at the SE.
p = STACKELBERG_FISHWAR
amp = np.sqrt(p.alpha2 / p.omega2)
print(f"follower dither amplitude {amp:.4f}")

tr = simulate(g, p, (1.1, 0.05), 100.0)
if tr.completed:
    print("stackelberg run mean", np.round(final_window_mean(tr), 5))
else:
    v = tr.violation
    print(f"stackelberg run stopped at t={v.t:.2f}: {v.message}")

# %%
# Clamping the stock instead of stopping keeps the run alive, but the
# follower's gradient estimate is then meaningless and it drifts away.
gc = fish_war_game(boundary="clamp")
tr = simulate(gc, p, (1.1, 0.05), 20.0)
print("clamped run end state", np.round(tr.states[-1], 3), " clamps", gc.clamp_count)

"""
Same dynamics, different equilibria
===================================

Two players run extremum seeking on the quadratic game.  Only the
timescales differ between the two runs: with the follower much faster
than the leader the pair settles near the Stackelberg point, with
comparable rates it settles near the Nash point.
"""

# %%
from pathlib import Path

import numpy as np

from nes.analysis import hierarchy_check
from nes.dynamics import NASH_QUADRATIC, STACKELBERG_QUADRATIC
from nes.equilibria import nash_equilibrium, stackelberg_equilibrium
from nes.experiments import simulate
from nes.games import quadratic_game
from nes.integrate import final_window_mean
from nes.plots import phase_svg

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
g = quadratic_game()

# %%
# The two reference points, from the solvers rather than typed in.
ne = nash_equilibrium(g, (0.0, 0.0)).point
se = stackelberg_equilibrium(g, 0.0).point
print("NE", ne, " SE", se)

# %%
# Ratios of consecutive rates, slowest first.  The Nash set violates the
# ordering on purpose.
for name, p in (("stackelberg", STACKELBERG_QUADRATIC), ("nash", NASH_QUADRATIC)):
    rep = hierarchy_check(p)
    print(f"{name:12s} ratios={np.round(rep.ratios, 2)} flagged={rep.flagged}")

# %%
runs = {"stackelberg": (STACKELBERG_QUADRATIC, 300.0), "nash": (NASH_QUADRATIC, 2000.0)}
for name, (p, T) in runs.items():
    tr = simulate(g, p, (0.0, 0.0), T)
    m = final_window_mean(tr)
    d_ne, d_se = np.hypot(*(m - ne)), np.hypot(*(m - se))
    print(f"{name:12s} mean={np.round(m, 4)}  |m-NE|={d_ne:.4f}  |m-SE|={d_se:.4f}")
    svg = phase_svg(tr.states, {"nash": ne, "stackelberg": se}, title=f"quadratic, {name} rates")
    (out / f"quadratic_{name}.svg").write_text(svg)

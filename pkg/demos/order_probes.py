"""
Approximation orders, measured
==============================

Each probe compares two systems of the approximation ladder while one
scaling parameter grows, then fits the log-log slope of the sup error.
"""

# %%
import math

from nes.analysis import probe_order_epsilon, probe_order_omega1, probe_order_omega2
from nes.dynamics import STACKELBERG_QUADRATIC
from nes.games import quadratic_game

g = quadratic_game()
p0 = STACKELBERG_QUADRATIC


def show(res):
    errs = ", ".join(f"{e:.3e}" for e in res.errors)
    print(f"{res.parameter:8s} slope={res.slope:+.3f} band={res.band} pass={res.passed}  [{errs}]")


# %%
# Leader dither: ROM against averaged ROM, expect about -1/2.
show(probe_order_omega1(g, p0, [100.0, 400.0, 1600.0]))

# %%
# Follower dither: original against partially averaged, with a moderate
# follower gain.  With the stiff gain the error is dominated by the
# transient and the slope flattens.
show(probe_order_omega2(g, p0.replace(k2=10.0), [w * math.sqrt(2) for w in (200, 800, 3200)]))
show(probe_order_omega2(g, p0, [w * math.sqrt(2) for w in (200, 800, 3200)]))

# %%
# Timescale separation: partially averaged against ROM plus quasi-steady
# state, expect about 1 in eps.
res = probe_order_epsilon(g, p0, [125.0, 250.0, 500.0])
show(res)
print("fast-state errors", [f"{e:.3e}" for e in res.extra["fast_errors"]])

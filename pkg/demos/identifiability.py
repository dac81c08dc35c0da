"""
What the probes can and cannot see
==================================

The closed-form temperature used as data source depends on the five
parameters only through three combinations. This script shows it, which
explains why the estimation results are reported for those combinations.
"""

import numpy as np

from smheat import HeatParams, analytic_temperature
from smheat.heat_model import ProbeSet, analytic_responses

probes = ProbeSet([[x, t] for t in (0.05, 0.2, 0.8) for x in (0.25, 0.5, 0.75)])
base = HeatParams(alpha=1.0, s0=-0.6, k_cond=1.2, h_coef=1.4, t_inf=0.7)
ref = analytic_responses(base, probes)

###############################################################################
# Diffusivity does not enter the closed form at all.

for a in (0.2, 1.0, 1.9):
    p = HeatParams(a, base.s0, base.k_cond, base.h_coef, base.t_inf)
    print(f"alpha = {a:.1f}: max change {np.max(np.abs(analytic_responses(p, probes) - ref)):.1e}")

###############################################################################
# Scaling ``k`` by c, ``s0`` by c and ``h`` by sqrt(c) keeps ``s0/k`` and
# ``k/h^2`` fixed, and the responses are unchanged.

for c in (0.5, 1.0, 1.5):
    p = HeatParams(base.alpha, c * base.s0, c * base.k_cond, np.sqrt(c) * base.h_coef, base.t_inf)
    diff = np.max(np.abs(analytic_responses(p, probes) - ref))
    print(f"c = {c:.1f}: s0={p.s0:+.3f} k={p.k_cond:.3f} h={p.h_coef:.3f}  max change {diff:.1e}")

###############################################################################
# The three identifiable quantities: the ambient level, the steady offset
# and the decay rate of the initial bump.

print("t_inf      =", base.t_inf)
print("s0 / k     =", base.s0 / base.k_cond)
print("k / h^2    =", base.k_cond / base.h_coef**2)
late = analytic_temperature(base, 0.5, 40.0)
print(f"T(0.5, 40) = {late:.6f}  (t_inf + s0/k = {base.t_inf + base.s0 / base.k_cond:.6f})")

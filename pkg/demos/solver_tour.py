"""
The finite-difference heat solver
=================================

A short tour of the fine model: a Crank-Nicolson step on a rod with
convective (Robin) ends, checked against the closed-form solution and a
manufactured solution.
"""

import numpy as np

from smheat import Grid1D, HeatParams, analytic_temperature, simulate
from smheat.fine_solver import fine_response
from smheat.heat_model import ProbeSet

###############################################################################
# A rod of unit length starts from ``sin(pi x) + t_inf`` and exchanges heat
# with the surroundings at both ends. With a constant source the rod settles
# to a profile where the source balances the losses through the ends.

p = HeatParams(alpha=1.0, s0=0.5, k_cond=1.0, h_coef=1.0, t_inf=0.2)
grid = Grid1D(nx=81, nt=400, t_max=2.0)
report = simulate(p, grid)
field = report.field
print(f"{report.steps_taken} steps, max |T| = {report.max_abs_value:.4f}")

for n in (0, 100, 200, 400):
    row = field.values[:, n]
    print(f"t = {grid.t[n]:.2f}:  T(0) = {row[0]:+.4f}  T(0.5) = {row[grid.nx // 2]:+.4f}")
print(f"closed-form long-time level t_inf + s0/k = {p.t_inf + p.s0 / p.k_cond:.4f}")

###############################################################################
# Probes are read off the space-time field by bilinear interpolation, so
# they need not sit on grid nodes.

probes = ProbeSet([[0.3, 0.1], [0.5, 0.5], [0.77, 1.3]], grid)
fine = fine_response(p, grid, probes)
oracle = [analytic_temperature(p, x, t) for x, t in probes.points]
for (x, t), a, b in zip(probes.points, fine, oracle):
    print(f"T({x:.2f}, {t:.2f}): solver {a:+.5f}  closed form {b:+.5f}")

###############################################################################
# The closed form is a separable approximation rather than the solution of
# the boundary-value problem: close early on, it drifts to a uniform level
# while the solver keeps the end losses, so the gap grows with time. The
# solver's own accuracy is measured with a manufactured solution instead:
# ``T* = exp(-t) sin(pi x) + t_inf`` with the matching source and boundary
# flux. Halving dx and dt together should cut the error about fourfold.

alpha, k, h, t_inf = 0.7, 1.3, 0.8, 0.2
mp = HeatParams(alpha, 0.0, k, h, t_inf)


def mms_error(nx, nt):
    g = Grid1D(nx, nt)
    src = lambda x, t: (alpha * np.pi**2 - 1.0) * np.exp(-t) * np.sin(np.pi * x)
    flux = lambda t: (k * np.pi * np.exp(-t),) * 2
    rep = simulate(mp, g, initial=np.sin(np.pi * g.x) + t_inf, source=src, flux=flux)
    exact = np.exp(-g.t)[None, :] * np.sin(np.pi * g.x)[:, None] + t_inf
    return np.max(np.abs(rep.field.values - exact))


prev = None
for level in range(4):
    nx, nt = 10 * 2**level + 1, 10 * 2**level
    err = mms_error(nx, nt)
    ratio = "" if prev is None else f"  ratio {prev / err:.3f}"
    print(f"nx={nx:4d} nt={nt:4d}  max error {err:.3e}{ratio}")
    prev = err

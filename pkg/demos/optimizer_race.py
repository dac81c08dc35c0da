"""
Nelder-Mead against conjugate gradients
=======================================

Both minimizers on the Rosenbrock valley and on a random quadratic.
"""

import numpy as np

from smheat import Objective, conjugate_gradient, nelder_mead


def rosen(x):
    return 100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2


def rosen_grad(x):
    return np.array([-400.0 * x[0] * (x[1] - x[0] ** 2) - 2.0 * (1.0 - x[0]), 200.0 * (x[1] - x[0] ** 2)])


###############################################################################
# The simplex method needs only function values; CG uses the gradient.

nm = nelder_mead(rosen, [-1.2, 1.0])
cg = conjugate_gradient(Objective(rosen, rosen_grad), [-1.2, 1.0])
for name, r in (("nelder-mead", nm), ("cg", cg)):
    print(f"{name:12s} x = {np.round(r.x_best, 6)}  f = {r.f_best:.2e}  "
          f"iterations {r.iterations:4d}  evaluations {r.evals:5d}  ({r.message})")

###############################################################################
# On a quadratic CG with an exact first trial step terminates in about n
# iterations.

rng = np.random.default_rng(0)
n = 10
M = rng.normal(size=(n, n))
A = M @ M.T + n * np.eye(n)
b = rng.normal(size=n)
quad = Objective(lambda x: 0.5 * x @ A @ x - b @ x, lambda x: A @ x - b)
r = conjugate_gradient(quad, np.zeros(n), gtol=1e-12)
print(f"quadratic, n = {n}: {r.iterations} iterations, "
      f"|x - x*| = {np.linalg.norm(r.x_best - np.linalg.solve(A, b)):.1e}")

###############################################################################
# Bounds are handled by projection, so a minimum outside the box ends up on
# its face.

box = Objective(lambda x: float(np.sum((x - 3.0) ** 2)), lambda x: 2 * (x - 3.0),
                bounds=(np.zeros(2), np.ones(2)))
print("bounded NM:", nelder_mead(box, [0.5, 0.5]).x_best)
print("bounded CG:", conjugate_gradient(box, [0.5, 0.5]).x_best)

"""Derivative-free and gradient-based minimizers for the coarse problem."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


@dataclass
class Objective:
    eval: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    bounds: Optional[tuple] = None  # (lower, upper) arrays

    def project(self, x: np.ndarray) -> np.ndarray:
        if self.bounds is None:
            return x
        return np.clip(x, self.bounds[0], self.bounds[1])


@dataclass
class OptResult:
    x_best: np.ndarray
    f_best: float
    iterations: int
    evals: int
    converged: bool
    trace: list = field(default_factory=list)
    message: str = ""

    def trace_rows(self):
        return [(i, f, e) for i, (f, e) in enumerate(self.trace)]

    def write_trace_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "f_best", "evals"])
            for i, f, e in self.trace_rows():
                w.writerow([i, repr(float(f)), e])


def finite_diff_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient, one coordinate at a time."""
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _as_objective(obj) -> Objective:
    return obj if isinstance(obj, Objective) else Objective(obj)


def nelder_mead(obj, x0, ftol: float = 1e-10, xtol: float = 1e-10, max_iter: int = 2000,
                step=None) -> OptResult:
    """Nelder-Mead simplex search.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    Stops once the spread of simplex values is below ``ftol`` and the
    simplex diameter below ``xtol``. Trial points are projected onto the
    objective's bounds. ``step`` sets the initial edge length per
    coordinate (default 5% of |x0|, or 0.00025 for zero entries).
    """
    obj = _as_objective(obj)
    x0 = obj.project(np.asarray(x0, dtype=float).ravel())
    n = x0.size
    if step is None:
        step = np.where(x0 != 0, 0.05 * np.abs(x0), 0.00025)
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))

    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return float(obj.eval(x))

    simplex = [x0]
    for i in range(n):
        v = x0.copy()
        v[i] += step[i]
        v = obj.project(v)
        if np.array_equal(v, x0):
            # pinned against a bound: step inward instead
            v[i] -= 2 * step[i]
            v = obj.project(v)
        simplex.append(v)
    simplex = np.array(simplex)
    fvals = np.array([f(v) for v in simplex])

    trace = []
    converged = False
    it = 0
    while True:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        trace.append((fvals[0], evals))
        spread = fvals[-1] - fvals[0]
        diameter = np.max(np.abs(simplex[1:] - simplex[0]))
        if spread < ftol and diameter < xtol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = obj.project(centroid + (centroid - worst))
        fr = f(xr)
        if fr < fvals[0]:
            xe = obj.project(centroid + 2.0 * (centroid - worst))
            fe = f(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = obj.project(centroid + 0.5 * (xr - centroid))
            fc = f(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = obj.project(centroid + 0.5 * (worst - centroid))
            fc = f(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        best = simplex[0]
        for j in range(1, n + 1):
            simplex[j] = obj.project(best + 0.5 * (simplex[j] - best))
            fvals[j] = f(simplex[j])

    return OptResult(simplex[0].copy(), float(fvals[0]), it, evals, converged, trace,
                     "converged" if converged else "max_iter reached")


def _armijo(f, x, fx, g, p, project, s0=1.0, c=1e-4, shrink=0.5, max_backtracks=60):
    """Backtracking line search along ``p``.

    The first trial step minimizes the quadratic through f(x), the slope
    g.p and f(x + s0 p), which is exact on quadratic objectives; later
    trials halve the step. Returns (x_new, f_new, step), or None after
    ``max_backtracks`` failed halvings.
    """
    slope = float(g @ p)
    f0 = f(project(x + s0 * p))
    denom = s0 * s0
    curvature = (f0 - fx - slope * s0) / denom if denom > 0 else 0.0
    s = -slope / (2.0 * curvature) if curvature > 0 else s0
    if not np.isfinite(s) or s <= 0:
        s = s0
    for _ in range(max_backtracks + 1):
        xn = project(x + s * p)
        fn = f0 if s == s0 else f(xn)
        # sufficient decrease measured on the projected step
        if fn <= fx + c * float(g @ (xn - x)) and fn <= fx:
            return xn, fn, s
        s *= shrink
    return None


def conjugate_gradient(obj, x0, gtol: float = 1e-8, max_iter: int = 2000) -> OptResult:
    """Nonlinear conjugate gradient, Polak-Ribiere+ with Armijo backtracking.

    Restarts with steepest descent every n iterations or whenever the
    search direction is not a descent direction. With bounds, iterates are
    projected and the stopping test uses the projected gradient.
    """
    obj = _as_objective(obj)
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return float(obj.eval(x))

    def grad(x):
        if obj.grad is not None:
            return np.asarray(obj.grad(x), dtype=float)
        return finite_diff_gradient(f, x)

    def pgnorm(x, g):
        return float(np.linalg.norm(obj.project(x - g) - x)) if obj.bounds is not None else float(np.linalg.norm(g))

    def feasible(x, p):
        # drop components that would push through an active bound
        if obj.bounds is None:
            return p
        p = p.copy()
        p[(x <= obj.bounds[0]) & (p < 0)] = 0.0
        p[(x >= obj.bounds[1]) & (p > 0)] = 0.0
        return p

    def first_step(p):
        return min(1.0, 1.0 / float(np.linalg.norm(p)))

    x = obj.project(np.asarray(x0, dtype=float).ravel())
    n = x.size
    fx = f(x)
    g = grad(x)
    p = -g
    trace = [(fx, evals)]
    it = 0
    converged = False
    message = "max_iter reached"
    since_restart = 0
    prev_decrease = None  # (step * |g.p|) of the last accepted step
    while True:
        if pgnorm(x, g) < gtol:
            converged = True
            message = "converged"
            break
        if it >= max_iter:
            break
        p = feasible(x, p)
        if g @ p >= 0:
            p = feasible(x, -g)
            since_restart = 0
        slope = -float(g @ p)
        if not slope > 0:
            # no feasible descent direction left
            converged = True
            message = "converged (stationary on the bounds)"
            break
        s0 = first_step(p) if prev_decrease is None else prev_decrease / slope
        if not (np.isfinite(s0) and s0 > 1e-12 * first_step(p)):
            s0 = first_step(p)
        found = _armijo(f, x, fx, g, p, obj.project, s0)
        if found is None and since_restart > 0:
            p = feasible(x, -g)
            since_restart = 0
            slope = -float(g @ p)
            found = _armijo(f, x, fx, g, p, obj.project, first_step(p))
        if found is None:
            message = "line search failed"
            break
        xn, fn, step = found
        if np.array_equal(xn, x):
            converged = True
            message = "converged (step below resolution)"
            break
        prev_decrease = step * slope
        it += 1
        gn = grad(xn)
        beta = max(0.0, float(gn @ (gn - g)) / float(g @ g))
        since_restart += 1
        if since_restart >= n:
            beta = 0.0
            since_restart = 0
        p = -gn + beta * p
        x, fx, g = xn, fn, gn
        trace.append((fx, evals))
    return OptResult(x, fx, it, evals, converged, trace, message)

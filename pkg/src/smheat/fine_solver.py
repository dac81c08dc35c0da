"""Finite-difference fine model: Crank-Nicolson in time, central differences
in space, Robin boundaries eliminated through ghost nodes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import LengthMismatch, NonFinite, SingularSystem, StencilOutOfRange, TooFewNodes
from .heat_model import Grid1D, HeatParams, ProbeSet, initial_condition, source_eval

FD_SCHEMES = ("forward", "backward", "central")

# (x_nodes, t) -> source values at the nodes
SourceFn = Callable[[np.ndarray, float], np.ndarray]
# t -> (left, right) extra boundary flux, see apply_robin_ghost
FluxFn = Callable[[float], tuple]


@dataclass
class TridiagonalSystem:
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.rhs) != n or len(self.lower) != n - 1 or len(self.upper) != n - 1:
            raise LengthMismatch("tridiagonal system has inconsistent lengths")

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)


@dataclass
class TemperatureField:
    """Temperatures on the grid; ``values[i, n]`` is T(x_i, t_n)."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.nt + 1):
            raise LengthMismatch(
                f"field shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.nt + 1})"
            )

    def interpolate(self, x, t) -> np.ndarray:
        """Bilinear interpolation in (x, t)."""
        g = self.grid
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        sx = np.clip(x / g.dx, 0.0, g.nx - 1)
        st = np.clip(t / g.dt, 0.0, g.nt)
        i = np.minimum(np.floor(sx).astype(int), g.nx - 2)
        n = np.minimum(np.floor(st).astype(int), g.nt - 1)
        fx = sx - i
        ft = st - n
        v = self.values
        return (
            (1 - fx) * (1 - ft) * v[i, n]
            + fx * (1 - ft) * v[i + 1, n]
            + (1 - fx) * ft * v[i, n + 1]
            + fx * ft * v[i + 1, n + 1]
        )


@dataclass
class SolverReport:
    field: TemperatureField
    max_abs_value: float
    steps_taken: int


def fd_first_difference(samples, i: int, scheme: str) -> float:
    """Undivided first difference at node ``i``.

    The backward variant returns f(x_{i-1}) - f(x_i), i.e. the negative of
    the usual backward difference.
    """
    f = np.asarray(samples, dtype=float)
    n = len(f)
    need_prev = scheme in ("backward", "central")
    need_next = scheme in ("forward", "central")
    if scheme not in FD_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not 0 <= i < n or (need_prev and i - 1 < 0) or (need_next and i + 1 >= n):
        raise StencilOutOfRange(f"{scheme} stencil at index {i} leaves a vector of length {n}")
    if scheme == "forward":
        return float(f[i + 1] - f[i])
    if scheme == "backward":
        return float(f[i - 1] - f[i])
    return float(f[i + 1] - f[i - 1])


def laplacian_1d(field_row, dx: float) -> np.ndarray:
    """Central second difference at the interior nodes 1..nx-2."""
    f = np.asarray(field_row, dtype=float)
    if len(f) < 3:
        raise TooFewNodes(f"need at least 3 nodes, got {len(f)}")
    return (f[2:] - 2.0 * f[1:-1] + f[:-2]) / dx**2


def apply_robin_ghost(params: HeatParams, field_row, grid: Grid1D, side: str, flux: float = 0.0) -> float:
    """Ghost-node temperature that closes the Robin condition on ``side``.

    Left:  T_{-1} = T_1 - (2 dx / k) (h (T_0 - T_inf) + flux), mirrored on the
    right. ``flux`` is an additive boundary datum used only for manufactured
    solutions; it is zero for the physical problem.
    """
    f = np.asarray(field_row, dtype=float)
    if len(f) < 2:
        raise TooFewNodes("need at least 2 nodes for a ghost node")
    if side == "left":
        boundary, mirror = f[0], f[1]
    elif side == "right":
        boundary, mirror = f[-1], f[-2]
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return float(
        mirror - (2.0 * grid.dx / params.k_cond) * (params.h_coef * (boundary - params.t_inf) + flux)
    )


def _operator(params: HeatParams, grid: Grid1D):
    """Robin-adjusted diffusion operator as tridiagonal bands plus the
    constant boundary forcing, so that dT/dt = A T + g + S."""
    nx, dx, a = grid.nx, grid.dx, params.alpha
    r = a / dx**2
    beta = 2.0 * dx * params.h_coef / params.k_cond
    lower = np.full(nx - 1, r)
    upper = np.full(nx - 1, r)
    diag = np.full(nx, -2.0 * r)
    upper[0] = 2.0 * r
    lower[-1] = 2.0 * r
    diag[0] = diag[-1] = -r * (2.0 + beta)
    g = np.zeros(nx)
    g[0] = g[-1] = r * beta * params.t_inf
    return lower, diag, upper, g


def _boundary_forcing(params: HeatParams, grid: Grid1D, flux_fn: FluxFn | None, t: float) -> np.ndarray:
    extra = np.zeros(grid.nx)
    if flux_fn is not None:
        left, right = flux_fn(t)
        scale = -2.0 * params.alpha / (grid.dx * params.k_cond)
        extra[0] = scale * left
        extra[-1] = scale * right
    return extra


def _source(params: HeatParams, grid: Grid1D, source: SourceFn | None, t: float) -> np.ndarray:
    if source is None:
        return source_eval(params, grid.x, t)
    return np.asarray(source(grid.x, t), dtype=float)


def heat_rhs(params: HeatParams, field_row, grid: Grid1D, t: float,
             source: SourceFn | None = None, flux: FluxFn | None = None) -> np.ndarray:
    """Semi-discrete time derivative dT/dt at every node."""
    f = np.asarray(field_row, dtype=float)
    if len(f) != grid.nx:
        raise LengthMismatch(f"row has {len(f)} values, grid has {grid.nx}")
    q_left, q_right = flux(t) if flux is not None else (0.0, 0.0)
    ghost_l = apply_robin_ghost(params, f, grid, "left", q_left)
    ghost_r = apply_robin_ghost(params, f, grid, "right", q_right)
    padded = np.concatenate([[ghost_l], f, [ghost_r]])
    return params.alpha * laplacian_1d(padded, grid.dx) + _source(params, grid, source, t)


def assemble_crank_nicolson(params: HeatParams, grid: Grid1D, current_row, t_n: float,
                            source: SourceFn | None = None, flux: FluxFn | None = None,
                            dt: float | None = None) -> TridiagonalSystem:
    """Implicit trapezoidal step (I - dt/2 A) T^{n+1} = (I + dt/2 A) T^n + dt S_bar.

    S_bar averages the source (and boundary forcing) over t_n and t_n + dt.
    ``dt`` defaults to the grid step.
    """
    row = np.asarray(current_row, dtype=float)
    if len(row) != grid.nx:
        raise LengthMismatch(f"row has {len(row)} values, grid has {grid.nx}")
    dt = grid.dt if dt is None else dt
    lower, diag, upper, g = _operator(params, grid)
    h = 0.5 * dt
    explicit = row + h * (diag * row)
    explicit[1:] += h * lower * row[:-1]
    explicit[:-1] += h * upper * row[1:]
    s_bar = g + 0.5 * (
        _source(params, grid, source, t_n) + _boundary_forcing(params, grid, flux, t_n)
        + _source(params, grid, source, t_n + dt) + _boundary_forcing(params, grid, flux, t_n + dt)
    )
    return TridiagonalSystem(-h * lower, 1.0 - h * diag, -h * upper, explicit + dt * s_bar)


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm (no pivoting)."""
    a = system.lower.tolist()
    b = system.diag.tolist()
    c = system.upper.tolist()
    d = system.rhs.tolist()
    n = len(b)
    cp = [0.0] * n
    dp = [0.0] * n
    piv = b[0]
    if abs(piv) < 1e-14:
        raise SingularSystem("zero pivot at row 0")
    cp[0] = c[0] / piv if n > 1 else 0.0
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if abs(piv) < 1e-14:
            raise SingularSystem(f"zero pivot at row {i}")
        if i < n - 1:
            cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def simulate(params: HeatParams, grid: Grid1D, *, initial=None,
             source: SourceFn | None = None, flux: FluxFn | None = None) -> SolverReport:
    """Advance the heat equation over ``grid.nt`` Crank-Nicolson steps.

    ``initial``, ``source`` and ``flux`` override the initial row, the
    constant source and the boundary data; they exist for verification
    runs (equilibria, manufactured solutions).
    """
    values = np.empty((grid.nx, grid.nt + 1))
    row = initial_condition(params, grid) if initial is None else np.asarray(initial, dtype=float).copy()
    if len(row) != grid.nx:
        raise LengthMismatch(f"initial row has {len(row)} values, grid has {grid.nx}")
    values[:, 0] = row
    dt = grid.dt
    for n in range(grid.nt):
        system = assemble_crank_nicolson(params, grid, row, n * dt, source, flux)
        row = solve_tridiagonal(system)
        values[:, n + 1] = row
    if not np.all(np.isfinite(values)):
        raise NonFinite("temperature field overflowed")
    return SolverReport(TemperatureField(values, grid), float(np.max(np.abs(values))), grid.nt)


def fine_response(params: HeatParams, grid: Grid1D, probes: ProbeSet) -> np.ndarray:
    """Solve and sample the temperature field at each probe."""
    report = simulate(params, grid)
    return report.field.interpolate(probes.x, probes.t)

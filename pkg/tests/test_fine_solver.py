import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smheat.errors import SingularSystem, StencilOutOfRange, TooFewNodes
from smheat.fine_solver import (
    TemperatureField,
    TridiagonalSystem,
    apply_robin_ghost,
    assemble_crank_nicolson,
    fd_first_difference,
    fine_response,
    heat_rhs,
    laplacian_1d,
    simulate,
    solve_tridiagonal,
)
from smheat.heat_model import Grid1D, HeatParams, ProbeSet


def params(**kw):
    base = dict(alpha=1.0, s0=0.0, k_cond=1.0, h_coef=1.0, t_inf=0.0)
    base.update(kw)
    return HeatParams(**base)


def dense_gauss(A, b):
    """Gaussian elimination with partial pivoting, written out longhand."""
    A = [list(map(float, row)) for row in A]
    b = list(map(float, b))
    n = len(b)
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(A[r][k]))
        A[k], A[p] = A[p], A[k]
        b[k], b[p] = b[p], b[k]
        for r in range(k + 1, n):
            m = A[r][k] / A[k][k]
            for c in range(k, n):
                A[r][c] -= m * A[k][c]
            b[r] -= m * b[k]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (b[r] - sum(A[r][c] * x[c] for c in range(r + 1, n))) / A[r][r]
    return np.array(x)


# --- stencils -----------------------------------------------------------------


@pytest.mark.parametrize("scheme, expected", [("forward", 4.0), ("backward", -2.0), ("central", 6.0)])
def test_first_difference_schemes(scheme, expected):
    assert fd_first_difference([1, 3, 7], 1, scheme) == expected


@pytest.mark.parametrize("i, scheme", [(2, "forward"), (0, "backward"), (0, "central"), (2, "central"), (5, "forward")])
def test_first_difference_out_of_range(i, scheme):
    with pytest.raises(StencilOutOfRange):
        fd_first_difference([1, 3, 7], i, scheme)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 1.0), st.integers(3, 30))
def test_laplacian_exact_on_quadratics(a, b, c, dx, n):
    x = np.arange(n) * dx
    lap = laplacian_1d(a * x**2 + b * x + c, dx)
    np.testing.assert_allclose(lap, 2 * a, atol=1e-8 * (1 + abs(a) + abs(b) / dx + abs(c) / dx**2))


def test_laplacian_examples():
    x = np.linspace(0, 2, 9)
    np.testing.assert_allclose(laplacian_1d(x**2, x[1] - x[0]), 2.0, rtol=1e-12)
    np.testing.assert_array_equal(laplacian_1d(np.full(6, 3.2), 0.1), np.zeros(4))
    with pytest.raises(TooFewNodes):
        laplacian_1d([1.0, 2.0], 0.5)


def test_laplacian_of_sine_within_truncation_bound():
    dx = 0.01
    x = np.arange(101) * dx
    lap = laplacian_1d(np.sin(np.pi * x), dx)
    err = np.max(np.abs(lap + np.pi**2 * np.sin(np.pi * x[1:-1])))
    assert err <= np.pi**4 * dx**2 / 12 * 1.01


# --- boundary treatment ---------------------------------------------------------


def test_ghost_zero_flux_when_boundary_at_ambient():
    g = Grid1D(nx=5)
    row = [0.4, 0.9, 1.0, 0.7, 0.4]
    p = params(t_inf=0.4, h_coef=1.7)
    assert apply_robin_ghost(p, row, g, "left") == 0.9
    assert apply_robin_ghost(p, row, g, "right") == 0.7


def test_ghost_insulated_when_transfer_coefficient_vanishes():
    p = params(t_inf=0.0)
    object.__setattr__(p, "h_coef", 0.0)  # bypass validation, test-only
    g = Grid1D(nx=5)
    row = [3.0, 2.0, 1.0, 5.0, 4.0]
    assert apply_robin_ghost(p, row, g, "left") == 2.0
    assert apply_robin_ghost(p, row, g, "right") == 5.0


def test_ghost_hand_value():
    g = Grid1D(nx=11, x_max=1.0)  # dx = 0.1
    p = params(k_cond=1.0, h_coef=1.0, t_inf=0.0)
    assert apply_robin_ghost(p, [2.0, 1.5, 1.0], g, "left") == pytest.approx(1.1, abs=1e-15)
    assert apply_robin_ghost(p, [1.0, 1.5, 2.0], g, "right") == pytest.approx(1.1, abs=1e-15)


# --- semi-discrete right-hand side ----------------------------------------------


def test_rhs_at_equilibrium():
    g = Grid1D(nx=9)
    row = np.full(9, 0.6)
    np.testing.assert_allclose(heat_rhs(params(t_inf=0.6), row, g, 0.3), 0.0, atol=1e-12)
    np.testing.assert_allclose(heat_rhs(params(t_inf=0.6, s0=1.3), row, g, 0.3), 1.3, atol=1e-12)


def test_rhs_interior_follows_laplacian():
    g = Grid1D(nx=101)
    p = params(alpha=0.7, t_inf=0.2)
    row = np.sin(np.pi * g.x) + 0.2
    rhs = heat_rhs(p, row, g, 0.0)
    expected = -0.7 * np.pi**2 * np.sin(np.pi * g.x[1:-1])
    np.testing.assert_allclose(rhs[1:-1], expected, atol=0.7 * np.pi**4 * g.dx**2 / 12 * 1.01)


# --- Crank-Nicolson assembly ------------------------------------------------------


def test_assembly_zero_step_is_identity():
    g = Grid1D(nx=6)
    row = np.linspace(0, 1, 6)
    sys_ = assemble_crank_nicolson(params(s0=2.0, t_inf=0.5), g, row, 0.0, dt=0.0)
    np.testing.assert_array_equal(sys_.dense(), np.eye(6))
    np.testing.assert_array_equal(sys_.rhs, row)


def test_assembly_preserves_steady_state():
    g = Grid1D(nx=7, nt=10)
    row = np.full(7, -0.3)
    sys_ = assemble_crank_nicolson(params(t_inf=-0.3, h_coef=1.9), g, row, 0.0)
    np.testing.assert_allclose(sys_.dense() @ row, sys_.rhs, atol=1e-15)


def test_assembly_hand_built_four_node_system():
    # alpha = dx = dt = 1, k = h = 1, t_inf = 0, no source; assembled by hand:
    # A = [[-4, 2, 0, 0], [1, -2, 1, 0], [0, 1, -2, 1], [0, 0, 2, -4]]
    g = Grid1D(nx=4, nt=1, x_max=3.0, t_max=1.0)
    sys_ = assemble_crank_nicolson(params(), g, [1.0, 2.0, 3.0, 4.0], 0.0)
    np.testing.assert_allclose(sys_.diag, [3, 2, 2, 3], atol=1e-15)
    np.testing.assert_allclose(sys_.lower, [-0.5, -0.5, -1], atol=1e-15)
    np.testing.assert_allclose(sys_.upper, [-1, -0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(sys_.rhs, [1, 2, 3, -1], atol=1e-15)


def test_assembly_hand_built_with_ambient_and_source():
    # same system with t_inf = 0.5 (boundary forcing 2 h t_inf / (k dx) = 1) and s0 = 0.25
    g = Grid1D(nx=4, nt=1, x_max=3.0, t_max=1.0)
    sys_ = assemble_crank_nicolson(params(t_inf=0.5, s0=0.25), g, [1.0, 2.0, 3.0, 4.0], 0.0)
    np.testing.assert_allclose(sys_.rhs, [2.25, 2.25, 3.25, 0.25], atol=1e-15)


def test_assembly_is_bit_reproducible():
    g = Grid1D(nx=9)
    row = np.cos(g.x)
    a = assemble_crank_nicolson(params(s0=0.4, t_inf=0.1), g, row, 0.37)
    b = assemble_crank_nicolson(params(s0=0.4, t_inf=0.1), g, row, 0.37)
    for name in ("lower", "diag", "upper", "rhs"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


# --- tridiagonal solve --------------------------------------------------------------


def test_thomas_identity_and_decoupled():
    rhs = np.array([1.5, -2.0, 3.0])
    np.testing.assert_array_equal(solve_tridiagonal(TridiagonalSystem(np.zeros(2), np.ones(3), np.zeros(2), rhs)), rhs)
    np.testing.assert_array_equal(
        solve_tridiagonal(TridiagonalSystem(np.zeros(1), np.array([2.0, 2.0]), np.zeros(1), np.array([4.0, 6.0]))),
        [2.0, 3.0],
    )


@pytest.mark.parametrize("seed", range(10))
def test_thomas_matches_dense_elimination(seed):
    rng = np.random.default_rng(seed)
    n = 8
    lower, upper = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
    diag = (2.5 + rng.uniform(0, 1, n)) * rng.choice([-1, 1], n)
    rhs = rng.normal(size=n)
    sys_ = TridiagonalSystem(lower, diag, upper, rhs)
    x = solve_tridiagonal(sys_)
    np.testing.assert_allclose(x, dense_gauss(sys_.dense(), rhs), atol=1e-10)
    assert np.max(np.abs(sys_.dense() @ x - rhs)) <= 1e-10 * (1 + np.max(np.abs(rhs)))


def test_thomas_singular():
    with pytest.raises(SingularSystem):
        solve_tridiagonal(TridiagonalSystem(np.zeros(1), np.array([0.0, 1.0]), np.zeros(1), np.ones(2)))


# --- time stepping ------------------------------------------------------------------


def test_simulate_preserves_equilibrium():
    g = Grid1D(nx=21, nt=200)
    rep = simulate(params(t_inf=0.8, h_coef=0.6), g, initial=np.full(21, 0.8))
    assert rep.steps_taken == 200
    assert np.max(np.abs(rep.field.values - 0.8)) <= 1e-12


def test_simulate_discrete_maximum_principle():
    g = Grid1D(nx=21, nt=200)  # alpha dt / dx^2 = 0.5 * 0.005 / 0.0025 = 1
    p = params(alpha=0.5, t_inf=0.3, h_coef=1.4, k_cond=0.8)
    rep = simulate(p, g)
    init = rep.field.values[:, 0]
    assert rep.field.values.max() <= init.max() + 1e-12
    assert rep.field.values.min() >= min(init.min(), p.t_inf) - 1e-12
    assert rep.max_abs_value == pytest.approx(np.abs(rep.field.values).max())


def manufactured_error(nx, nt, alpha=0.7, k=1.3, h=0.8, t_inf=0.2):
    """Max error against T* = e^{-t} sin(pi x) + t_inf with the matching
    source and boundary data."""
    p = HeatParams(alpha, 0.0, k, h, t_inf)
    g = Grid1D(nx, nt, 1.0, 1.0)

    def source(x, t):
        return (alpha * math.pi**2 - 1.0) * math.exp(-t) * np.sin(np.pi * x)

    def flux(t):
        # k dT*/dx at x=0 and -k dT*/dx at x=1, both k pi e^{-t}; T* = t_inf there
        q = k * math.pi * math.exp(-t)
        return q, q

    rep = simulate(p, g, initial=np.sin(np.pi * g.x) + t_inf, source=source, flux=flux)
    exact = np.exp(-g.t)[None, :] * np.sin(np.pi * g.x)[:, None] + t_inf
    return np.max(np.abs(rep.field.values - exact))


def test_manufactured_solution_second_order():
    errs = [manufactured_error(10 * 2**l + 1, 10 * 2**l) for l in range(4)]
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    assert all(3.0 <= r <= 5.0 for r in ratios), ratios


# --- probes -----------------------------------------------------------------------------


def test_fine_response_at_nodes_and_duplicates():
    g = Grid1D(nx=11, nt=20)
    p = params(s0=0.3, t_inf=0.1)
    rep = simulate(p, g)
    probes = ProbeSet([[0.3, 0.25], [0.3, 0.25], [1.0, 1.0], [0.0, 0.0]], g)
    r = fine_response(p, g, probes)
    assert r[0] == pytest.approx(rep.field.values[3, 5], abs=1e-14)
    assert r[0] == r[1]
    assert r[2] == pytest.approx(rep.field.values[10, 20], abs=1e-14)
    assert r[3] == pytest.approx(rep.field.values[0, 0], abs=1e-14)


def test_fine_response_deterministic():
    g = Grid1D(nx=21, nt=40)
    p = params(s0=-0.4, t_inf=0.5)
    probes = ProbeSet([[0.33, 0.71], [0.9, 0.05]], g)
    assert np.array_equal(fine_response(p, g, probes), fine_response(p, g, probes))


def test_bilinear_interpolation_exact():
    g = Grid1D(nx=5, nt=4)
    X, T = np.meshgrid(g.x, g.t, indexing="ij")
    field = TemperatureField(1.0 + 2.0 * X - 3.0 * T + 0.5 * X * T, g)
    xs, ts = np.array([0.1, 0.625, 0.99]), np.array([0.3, 0.875, 0.01])
    np.testing.assert_allclose(field.interpolate(xs, ts), 1 + 2 * xs - 3 * ts + 0.5 * xs * ts, atol=1e-14)
    # cell centre equals the mean of its four corners
    v = field.values
    centre = field.interpolate(0.375, 0.375)[0]
    assert centre == pytest.approx((v[1, 1] + v[2, 1] + v[1, 2] + v[2, 2]) / 4, abs=1e-14)

"""Physical problem definition: parameters, grid, probes, closed-form
temperature and training-data generation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import EmptyDataset, InvalidBounds, InvalidGrid, InvalidParams, LengthMismatch

PARAM_NAMES = ("alpha", "s0", "k_cond", "h_coef", "t_inf")
# indices of parameters that must stay strictly positive
POSITIVE = (0, 2, 3)


@dataclass(frozen=True)
class HeatParams:
    """The five optimizable quantities of the heat problem.

    alpha is the diffusivity, s0 a constant source amplitude, k_cond the
    conductivity, h_coef the surface transfer coefficient and t_inf the
    ambient temperature.
    """

    alpha: float
    s0: float
    k_cond: float
    h_coef: float
    t_inf: float

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not np.isfinite(v):
                raise InvalidParams(f"{f.name} must be finite, got {v}")
            object.__setattr__(self, f.name, v)
        for name in ("alpha", "k_cond", "h_coef"):
            if getattr(self, name) <= 0.0:
                raise InvalidParams(f"{name} must be > 0, got {getattr(self, name)}")

    def to_array(self) -> np.ndarray:
        return np.array([self.alpha, self.s0, self.k_cond, self.h_coef, self.t_inf])

    @classmethod
    def from_array(cls, values) -> "HeatParams":
        values = np.asarray(values, dtype=float).ravel()
        if values.size != 5:
            raise LengthMismatch(f"expected 5 parameter values, got {values.size}")
        return cls(*(float(v) for v in values))

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, self.to_array().tolist()))


@dataclass(frozen=True)
class Grid1D:
    """Uniform space-time grid on [0, x_max] x [0, t_max]."""

    nx: int = 41
    nt: int = 100
    x_max: float = 1.0
    t_max: float = 1.0

    def __post_init__(self):
        if int(self.nx) < 3:
            raise InvalidGrid(f"nx must be >= 3, got {self.nx}")
        if int(self.nt) < 1:
            raise InvalidGrid(f"nt must be >= 1, got {self.nt}")
        if not (self.x_max > 0 and self.t_max > 0):
            raise InvalidGrid("x_max and t_max must be positive")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "nt", int(self.nt))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def dx(self) -> float:
        return self.x_max / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.t_max / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt

    def contains(self, x, t) -> np.ndarray:
        x = np.asarray(x)
        t = np.asarray(t)
        return (x >= 0) & (x <= self.x_max) & (t >= 0) & (t <= self.t_max)


class ProbeSet:
    """Ordered (x, t) sampling locations; the order fixes response layout."""

    def __init__(self, points, grid: Grid1D | None = None):
        pts = np.array(points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise ValueError("probe set must be non-empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("probe coordinates must be finite")
        if grid is not None and not np.all(grid.contains(pts[:, 0], pts[:, 1])):
            raise ValueError("all probes must lie inside the domain")
        pts.setflags(write=False)
        self.points = pts

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def t(self) -> np.ndarray:
        return self.points[:, 1]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(map(tuple, self.points))

    def __eq__(self, other):
        return isinstance(other, ProbeSet) and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"ProbeSet({self.points.tolist()})"


@dataclass(frozen=True)
class ParamBounds:
    """Per-parameter sampling / search box, ordered as PARAM_NAMES."""

    lower: tuple = (0.1, -2.0, 0.1, 0.1, -1.0)
    upper: tuple = (2.0, 2.0, 2.0, 2.0, 1.0)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (5,) or hi.shape != (5,):
            raise InvalidBounds("bounds need exactly 5 lower and 5 upper values")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidBounds("bounds must be finite")
        bad = [PARAM_NAMES[i] for i in range(5) if not lo[i] < hi[i]]
        if bad:
            raise InvalidBounds(f"lower bound must be < upper bound for {bad}")
        bad = [PARAM_NAMES[i] for i in POSITIVE if lo[i] <= 0]
        if bad:
            raise InvalidBounds(f"bounds violate positivity for {bad}")
        object.__setattr__(self, "lower", tuple(lo.tolist()))
        object.__setattr__(self, "upper", tuple(hi.tolist()))

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @classmethod
    def from_dict(cls, boxes: dict) -> "ParamBounds":
        missing = set(PARAM_NAMES) - set(boxes)
        extra = set(boxes) - set(PARAM_NAMES)
        if missing or extra:
            raise InvalidBounds(f"bounds keys must be {PARAM_NAMES}")
        return cls(tuple(boxes[n][0] for n in PARAM_NAMES), tuple(boxes[n][1] for n in PARAM_NAMES))

    def as_dict(self) -> dict:
        return {n: [lo, hi] for n, lo, hi in zip(PARAM_NAMES, self.lower, self.upper)}


@dataclass
class Dataset:
    """Training records ``(params, x, t) -> temperature`` stored column-wise.

    ``params`` has shape (count, 5) in PARAM_NAMES order.
    """

    params: np.ndarray
    x: np.ndarray
    t: np.ndarray
    temperature: np.ndarray
    domain: tuple = field(default=(1.0, 1.0))

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float).reshape(-1, 5)
        self.x = np.asarray(self.x, dtype=float).ravel()
        self.t = np.asarray(self.t, dtype=float).ravel()
        self.temperature = np.asarray(self.temperature, dtype=float).ravel()
        n = len(self.params)
        if not (len(self.x) == len(self.t) == len(self.temperature) == n):
            raise LengthMismatch("dataset columns have different lengths")
        if np.any(np.isnan(self.temperature)):
            raise ValueError("dataset contains NaN temperatures")
        x_max, t_max = self.domain
        if np.any((self.x < 0) | (self.x > x_max) | (self.t < 0) | (self.t > t_max)):
            raise ValueError("dataset sample outside the domain")

    @property
    def count(self) -> int:
        return len(self.temperature)

    def __len__(self):
        return self.count

    @property
    def inputs(self) -> np.ndarray:
        """Network input matrix, columns = 5 params, x, t."""
        return np.column_stack([self.params, self.x, self.t])

    def append(self, params, x, t, temperature) -> "Dataset":
        """Return a new dataset with extra records appended."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        params = np.broadcast_to(np.asarray(params, dtype=float), (len(x), 5))
        return Dataset(
            np.vstack([self.params, params]),
            np.concatenate([self.x, x]),
            np.concatenate([self.t, np.atleast_1d(t)]),
            np.concatenate([self.temperature, np.atleast_1d(temperature)]),
            self.domain,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.params, other.params)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.temperature, other.temperature)
        )


def source_eval(params: HeatParams, x, t):
    """Heat source S(x, t); a constant amplitude s0 everywhere."""
    return params.s0 + 0.0 * (np.asarray(x, dtype=float) + np.asarray(t, dtype=float))


def _analytic(p: np.ndarray, x, t):
    # p columns: alpha, s0, k, h, t_inf (broadcast against x, t)
    s0, k, h, t_inf = p[..., 1], p[..., 2], p[..., 3], p[..., 4]
    decay = np.exp(-(k / h**2) * np.pi**2 * t)
    return np.sin(np.pi * x) * decay + t_inf + (s0 / k) * (1.0 - decay)


def analytic_temperature(params: HeatParams, x, t):
    """Closed-form temperature

        T = sin(pi x) e^{-(k/h^2) pi^2 t} + T_inf + (s0/k)(1 - e^{-(k/h^2) pi^2 t})

    The decay rate uses k/h^2 rather than the diffusivity; alpha has no
    effect on the result.
    """
    out = _analytic(params.to_array(), np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def analytic_responses(params: HeatParams, probes: ProbeSet) -> np.ndarray:
    return np.asarray(analytic_temperature(params, probes.x, probes.t), dtype=float)


def initial_condition(params: HeatParams, grid: Grid1D) -> np.ndarray:
    return np.sin(np.pi * grid.x) + params.t_inf


def generate_dataset(
    grid: Grid1D,
    bounds: ParamBounds | None = None,
    n_samples: int = 1000,
    noise_sigma: float = 0.01,
    seed: int = 0,
    source: str = "oracle",
) -> Dataset:
    """Draw random parameter vectors and space-time points and label them.

    Parameters are uniform in ``bounds`` and (x, t) uniform over the grid's
    domain. Labels come from the closed form (``source="oracle"``) or from
    the finite-difference solver (``source="fine"``), plus zero-mean
    Gaussian noise of standard deviation ``noise_sigma``.
    """
    bounds = ParamBounds() if bounds is None else bounds
    if n_samples < 1:
        raise EmptyDataset("n_samples must be >= 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    if source not in ("oracle", "fine"):
        raise ValueError(f"unknown data source {source!r}")

    rng = np.random.default_rng(seed)
    params = rng.uniform(bounds.lo, bounds.hi, size=(n_samples, 5))
    x = rng.uniform(0.0, grid.x_max, size=n_samples)
    t = rng.uniform(0.0, grid.t_max, size=n_samples)
    noise = rng.normal(0.0, 1.0, size=n_samples) * noise_sigma

    if source == "oracle":
        clean = _analytic(params, x, t)
    else:
        from .fine_solver import fine_response

        clean = np.array([
            fine_response(HeatParams.from_array(p), grid, ProbeSet([[xi, ti]]))[0]
            for p, xi, ti in zip(params, x, t)
        ])
    return Dataset(params, x, t, clean + noise, domain=(grid.x_max, grid.t_max))

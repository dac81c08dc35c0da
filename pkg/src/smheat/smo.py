"""Space-mapping driver: optimize the coarse network, check the candidate
with the fine model, grow the training set and retrain until both agree."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import optim
from .coarse_net import (
    MlpNetwork,
    TrainConfig,
    coarse_response,
    network_inputs,
    predict_with_input_grad,
    residual,
    residual_norm,
    train,
)
from .errors import InsufficientPairs, LengthMismatch
from .fine_solver import fine_response
from .heat_model import (
    POSITIVE,
    Dataset,
    Grid1D,
    HeatParams,
    ParamBounds,
    ProbeSet,
    analytic_responses,
)

POSITIVE_FLOOR = 1e-6
OPTIMIZERS = ("nelder_mead", "conjugate_gradient")

FineModel = Callable[[HeatParams], np.ndarray]


@dataclass(frozen=True)
class ParameterMapping:
    """x_c = P(x_f); either the identity or an affine map B x_f + c."""

    kind: str = "identity"
    matrix: np.ndarray | None = None
    offset: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("identity", "affine"):
            raise ValueError(f"unknown mapping kind {self.kind!r}")
        if self.kind == "affine":
            B = np.asarray(self.matrix, dtype=float)
            c = np.asarray(self.offset, dtype=float)
            if B.shape != (5, 5) or c.shape != (5,):
                raise ValueError("affine mapping needs a 5x5 matrix and a 5-vector offset")
            if not (np.all(np.isfinite(B)) and np.all(np.isfinite(c))):
                raise ValueError("affine mapping entries must be finite")
            object.__setattr__(self, "matrix", B)
            object.__setattr__(self, "offset", c)

    @classmethod
    def affine(cls, matrix, offset) -> "ParameterMapping":
        return cls("affine", matrix, offset)

    def jacobian(self) -> np.ndarray:
        return np.eye(5) if self.kind == "identity" else self.matrix


def _clamp_positive(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    v[list(POSITIVE)] = np.maximum(v[list(POSITIVE)], POSITIVE_FLOOR)
    return v


def apply_mapping(p: ParameterMapping, x_f: HeatParams) -> HeatParams:
    if p.kind == "identity":
        return x_f
    return HeatParams.from_array(_clamp_positive(p.matrix @ x_f.to_array() + p.offset))


def fit_affine_mapping(pairs, lam: float = 1e-2) -> ParameterMapping:
    """Least-squares affine map from fine to coarse parameters.

    Minimizes sum ||B x_f + c - x_c||^2 + lam ||B - I||^2. With ``lam > 0``
    a single pair is enough (the prior fills the gaps); an unregularized
    fit needs at least six pairs.
    """
    pairs = list(pairs)
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if len(pairs) == 0 or (lam == 0 and len(pairs) < 6):
        raise InsufficientPairs(f"got {len(pairs)} pairs")
    xf = np.array([_vec(a) for a, _ in pairs])
    xc = np.array([_vec(b) for _, b in pairs])
    Z = np.column_stack([xf, np.ones(len(xf))])
    D = np.diag([1.0] * 5 + [0.0])
    prior = np.hstack([np.eye(5), np.zeros((5, 1))])
    # theta (5x6) solves theta (Z'Z + lam D) = xc' Z + lam prior
    lhs = Z.T @ Z + lam * D
    rhs = xc.T @ Z + lam * prior
    try:
        theta = np.linalg.solve(lhs.T, rhs.T).T
    except np.linalg.LinAlgError as exc:
        raise InsufficientPairs("pairs do not determine an affine map") from exc
    return ParameterMapping.affine(theta[:, :5], theta[:, 5])


def _vec(x) -> np.ndarray:
    return x.to_array() if isinstance(x, HeatParams) else np.asarray(x, dtype=float)


def accuracy(a, b, delta: float = 1e-8) -> float:
    """Agreement in percent: 100 (1 - mean |a - b| / (|a| + delta)), floored at 0."""
    a = np.asarray(a, dtype=float)
    diff = np.abs(residual(a, b))
    return float(max(0.0, 100.0 * (1.0 - np.mean(diff / (np.abs(a) + delta)))))


def converged(a, b, epsilon: float) -> bool:
    return residual_norm(residual(a, b)) <= epsilon


def coarse_objective(net: MlpNetwork, mapping: ParameterMapping, target, probes: ProbeSet,
                     bounds: ParamBounds | None = None) -> optim.Objective:
    """Squared misfit ||R_c(P(x)) - target||^2 with its backprop gradient."""
    target = np.asarray(target, dtype=float)
    if len(target) != len(probes):
        raise LengthMismatch(f"target has {len(target)} entries for {len(probes)} probes")
    J = mapping.jacobian()

    def mapped_inputs(x):
        return network_inputs(apply_mapping(mapping, HeatParams.from_array(x)), probes)

    def f(x):
        r = net.predict(mapped_inputs(x)) - target
        return float(r @ r)

    def grad(x):
        out, dinp = predict_with_input_grad(net, mapped_inputs(x))
        return (2.0 * (out - target) @ dinp[:, :5]) @ J

    box = None if bounds is None else (bounds.lo, bounds.hi)
    return optim.Objective(f, grad, box)


def optimize_coarse(net: MlpNetwork, mapping: ParameterMapping, target, probes: ProbeSet,
                    optimizer: str = "nelder_mead", bounds: ParamBounds | None = None,
                    x0: HeatParams | None = None, return_result: bool = False, **opts):
    """Minimize the coarse misfit over the fine parameter space.

    Starts from ``x0`` (default: centre of ``bounds``). Returns the best
    parameters found, plus the optimizer result when ``return_result``.
    """
    bounds = ParamBounds() if bounds is None else bounds
    obj = coarse_objective(net, mapping, target, probes, bounds)
    start = bounds.center if x0 is None else x0.to_array()
    if optimizer == "nelder_mead":
        opts.setdefault("step", 0.05 * (bounds.hi - bounds.lo))
        res = optim.nelder_mead(obj, start, **opts)
    elif optimizer == "conjugate_gradient":
        res = optim.conjugate_gradient(obj, start, **opts)
    else:
        raise ValueError(f"unknown optimizer {optimizer!r}")
    x_star = HeatParams.from_array(res.x_best)
    return (x_star, res) if return_result else x_star


def refine_with_fine(x_star: HeatParams, grid: Grid1D, probes: ProbeSet) -> np.ndarray:
    return fine_response(x_star, grid, probes)


def augment_and_retrain(net: MlpNetwork, data: Dataset, x_star: HeatParams, fine_vals,
                        probes: ProbeSet, retrain_epochs: int, train_cfg: TrainConfig | None = None):
    """Add one record per probe at ``x_star`` and fine-tune the network on
    the enlarged set (warm start). Returns (net, data)."""
    fine_vals = np.asarray(fine_vals, dtype=float)
    if len(fine_vals) != len(probes):
        raise LengthMismatch(f"{len(fine_vals)} fine values for {len(probes)} probes")
    data = data.append(x_star.to_array(), probes.x, probes.t, fine_vals)
    if retrain_epochs <= 0:
        return net, data
    cfg = replace(train_cfg or TrainConfig(), epochs=int(retrain_epochs))
    net, _ = train(net, data, cfg)
    return net, data


@dataclass
class SmoConfig:
    target: np.ndarray
    epsilon: float = 1e-3
    max_iterations: int = 25
    retrain_epochs: int = 200
    optimizer: str = "nelder_mead"

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float).ravel()
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")


@dataclass
class IterationRecord:
    iteration: int
    params: HeatParams
    a: np.ndarray
    b: np.ndarray
    residual_norm: float
    accuracy_pct: float
    coarse_misfit: float


@dataclass
class SmoState:
    iteration: int = 0
    x_current: HeatParams | None = None
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    residual_norm_value: float = float("inf")
    accuracy_pct: float = 0.0
    converged: bool = False
    history: list = field(default_factory=list)
    fine_evals: int = 0
    net: MlpNetwork | None = None
    data: Dataset | None = None

    def history_rows(self):
        for rec in self.history:
            yield [rec.iteration, *rec.params.to_array().tolist(), rec.residual_norm, rec.accuracy_pct]


def oracle_fine_model(probes: ProbeSet) -> FineModel:
    """Closed-form temperatures standing in for the finite-difference solver."""
    return lambda p: analytic_responses(p, probes)


def solver_fine_model(grid: Grid1D, probes: ProbeSet) -> FineModel:
    return lambda p: fine_response(p, grid, probes)


def run_smo(cfg: SmoConfig, net: MlpNetwork, data: Dataset, mapping: ParameterMapping | None,
            grid: Grid1D, probes: ProbeSet, bounds: ParamBounds | None = None, *,
            fine: FineModel | None = None, train_cfg: TrainConfig | None = None,
            x0: HeatParams | None = None) -> SmoState:
    """Iterate coarse optimization, fine evaluation and retraining.

    Each pass finds x* minimizing the coarse misfit to ``cfg.target``,
    evaluates the fine model there and stops once ||R_f(x*) - R_c(x*)||
    is within ``cfg.epsilon``; otherwise the fine values are added to the
    training data and the network is retrained. ``fine`` replaces the
    finite-difference solver (e.g. by ``oracle_fine_model``).
    """
    mapping = ParameterMapping() if mapping is None else mapping
    bounds = ParamBounds() if bounds is None else bounds
    fine = solver_fine_model(grid, probes) if fine is None else fine
    if len(cfg.target) != len(probes):
        raise LengthMismatch(f"target has {len(cfg.target)} entries for {len(probes)} probes")

    state = SmoState(x_current=x0 or HeatParams.from_array(bounds.center), net=net, data=data)
    for it in range(1, cfg.max_iterations + 1):
        x_star, res = optimize_coarse(net, mapping, cfg.target, probes, cfg.optimizer, bounds,
                                      x0=state.x_current, return_result=True)
        a = np.asarray(fine(x_star), dtype=float)
        b = coarse_response(net, apply_mapping(mapping, x_star), probes)
        state.fine_evals += 1
        rec = IterationRecord(it, x_star, a, b, residual_norm(residual(a, b)), accuracy(a, b), res.f_best)
        state.history.append(rec)
        state.iteration = it
        state.x_current = x_star
        state.a, state.b = a, b
        state.residual_norm_value = rec.residual_norm
        state.accuracy_pct = rec.accuracy_pct
        if converged(a, b, cfg.epsilon):
            state.converged = True
            break
        if it < cfg.max_iterations:
            net, data = augment_and_retrain(net, data, x_star, a, probes, cfg.retrain_epochs, train_cfg)
            state.net, state.data = net, data
    return state

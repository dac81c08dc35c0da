"""Space-mapping parameter estimation for a 1D heat-transfer problem.

A finite-difference solver acts as the fine model, a ReLU network as the
coarse model; :func:`smheat.smo.run_smo` alternates coarse optimization,
fine evaluation and retraining until the two agree.
"""

from .coarse_net import MlpNetwork, TrainConfig, coarse_response, train
from .fine_solver import fine_response, simulate
from .heat_model import (
    Dataset,
    Grid1D,
    HeatParams,
    ParamBounds,
    ProbeSet,
    analytic_temperature,
    generate_dataset,
)
from .optim import Objective, OptResult, conjugate_gradient, nelder_mead
from .smo import ParameterMapping, SmoConfig, SmoState, accuracy, run_smo

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Grid1D",
    "HeatParams",
    "MlpNetwork",
    "Objective",
    "OptResult",
    "ParamBounds",
    "ParameterMapping",
    "ProbeSet",
    "SmoConfig",
    "SmoState",
    "TrainConfig",
    "accuracy",
    "analytic_temperature",
    "coarse_response",
    "conjugate_gradient",
    "fine_response",
    "generate_dataset",
    "nelder_mead",
    "run_smo",
    "simulate",
    "train",
]

"""Experiment configuration and the pipeline commands behind the CLI.

Every command is a plain function taking an :class:`ExperimentConfig`; the
CLI only parses arguments and maps exceptions to exit codes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import persist
from .coarse_net import MlpNetwork, TrainConfig, train
from .errors import ConfigError, MissingDataset, SmheatError
from .heat_model import PARAM_NAMES, Dataset, Grid1D, HeatParams, ParamBounds, ProbeSet, generate_dataset
from .smo import OPTIMIZERS, SmoConfig, SmoState, oracle_fine_model, run_smo, solver_fine_model

log = logging.getLogger(__name__)

SWEEP_HEADER = ["hidden_layers", "final_accuracy_pct", "converged", "iterations"]
BENCH_HEADER = ["optimizer", "final_accuracy_pct", "iterations", "fine_evals"]
SUMMARY_HEADER = ["converged", "iterations", "final_accuracy_pct"]


@dataclass
class GridSection:
    nx: int = 41
    nt: int = 100
    x_max: float = 1.0
    t_max: float = 1.0


@dataclass
class NetworkSection:
    hidden_layers: int = 3
    width: int = 20


@dataclass
class TrainSection:
    learning_rate: float = 1e-3
    epochs: int = 2000
    batch_size: int = 32
    l2_penalty: float = 0.0


@dataclass
class SmoSection:
    epsilon: float = 1e-3
    max_iterations: int = 25
    retrain_epochs: int = 200
    optimizer: str = "nelder_mead"
    # exactly one of target / target_params; the latter is pushed through the fine model
    target: list | None = None
    target_params: dict | None = None
    fine_model: str = "solver"
    retrain_learning_rate: float | None = None


@dataclass
class DataSection:
    n_samples: int = 1000
    noise_sigma: float = 0.01
    source: str = "oracle"


@dataclass
class PathsSection:
    dataset: str = "dataset.csv"
    checkpoint: str = "checkpoint.json"
    report: str = "report.csv"


_SECTIONS = {
    "grid": GridSection,
    "network": NetworkSection,
    "train": TrainSection,
    "smo": SmoSection,
    "data": DataSection,
    "paths": PathsSection,
}

DEFAULT_PROBES = [[x, t] for t in (0.05, 0.1, 0.2, 0.4, 0.8) for x in (0.25, 0.5, 0.75)]


@dataclass
class ExperimentConfig:
    seed: int = 0
    grid: GridSection = field(default_factory=GridSection)
    probes: list = field(default_factory=lambda: [list(p) for p in DEFAULT_PROBES])
    bounds: dict = field(default_factory=lambda: ParamBounds().as_dict())
    network: NetworkSection = field(default_factory=NetworkSection)
    train: TrainSection = field(default_factory=TrainSection)
    smo: SmoSection = field(default_factory=SmoSection)
    data: DataSection = field(default_factory=DataSection)
    paths: PathsSection = field(default_factory=PathsSection)

    # --- parsing -----------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in doc.items():
            if key in _SECTIONS:
                section = _SECTIONS[key]
                if not isinstance(value, dict):
                    raise ConfigError(f"section {key!r} must be an object")
                bad = set(value) - {f.name for f in fields(section)}
                if bad:
                    raise ConfigError(f"unknown keys in {key!r}: {sorted(bad)}")
                kwargs[key] = section(**value)
            else:
                kwargs[key] = value
        cfg = cls(**kwargs)
        if base_dir is not None:
            cfg.paths = PathsSection(**{
                k: str(Path(base_dir, v)) if not Path(v).is_absolute() else v
                for k, v in asdict(cfg.paths).items()
            })
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc, base_dir=path.parent)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        try:
            grid = self.grid_obj()
            self.probe_set(grid)
            self.param_bounds()
            self.train_config()
            if self.network.hidden_layers < 1 or self.network.width < 1:
                raise ValueError("network needs >= 1 hidden layer and width >= 1")
            if self.smo.optimizer not in OPTIMIZERS:
                raise ValueError(f"smo.optimizer must be one of {OPTIMIZERS}")
            if self.smo.fine_model not in ("solver", "oracle"):
                raise ValueError("smo.fine_model must be 'solver' or 'oracle'")
            if (self.smo.target is None) == (self.smo.target_params is None):
                raise ValueError("give exactly one of smo.target and smo.target_params")
            if self.smo.target is not None and len(self.smo.target) != len(self.probes):
                raise ValueError("smo.target length must equal the probe count")
            if self.smo.target_params is not None:
                self.hidden_params()
            if self.data.source not in ("oracle", "fine"):
                raise ValueError("data.source must be 'oracle' or 'fine'")
            if self.data.n_samples < 1 or self.data.noise_sigma < 0:
                raise ValueError("data.n_samples must be >= 1 and noise_sigma >= 0")
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    # --- typed views -------------------------------------------------------

    def grid_obj(self) -> Grid1D:
        return Grid1D(**asdict(self.grid))

    def probe_set(self, grid: Grid1D | None = None) -> ProbeSet:
        return ProbeSet(self.probes, grid or self.grid_obj())

    def param_bounds(self) -> ParamBounds:
        return ParamBounds.from_dict(self.bounds)

    def train_config(self) -> TrainConfig:
        return TrainConfig(seed=self.seed, **asdict(self.train))

    def retrain_config(self) -> TrainConfig:
        cfg = self.train_config()
        if self.smo.retrain_learning_rate is not None:
            cfg = replace(cfg, learning_rate=self.smo.retrain_learning_rate)
        return cfg

    def hidden_params(self) -> HeatParams:
        tp = self.smo.target_params
        if set(tp) != set(PARAM_NAMES):
            raise ValueError(f"smo.target_params needs keys {PARAM_NAMES}")
        return HeatParams(**tp)

    def fine_model(self):
        probes = self.probe_set()
        if self.smo.fine_model == "oracle":
            return oracle_fine_model(probes)
        return solver_fine_model(self.grid_obj(), probes)

    def target(self) -> np.ndarray:
        if self.smo.target is not None:
            return np.asarray(self.smo.target, dtype=float)
        return np.asarray(self.fine_model()(self.hidden_params()), dtype=float)

    def smo_config(self, **overrides) -> SmoConfig:
        s = self.smo
        kw = dict(target=self.target(), epsilon=s.epsilon, max_iterations=s.max_iterations,
                  retrain_epochs=s.retrain_epochs, optimizer=s.optimizer)
        kw.update(overrides)
        return SmoConfig(**kw)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))


def standard_config(workdir=".") -> ExperimentConfig:
    """The reference scenario used by the demos and the acceptance suite.

    Data and fine model are the closed-form solution, hidden parameters
    lie inside the default boxes, and the tolerance sits at the noise floor
    of the training data (sigma * sqrt(probe count)).
    """
    workdir = Path(workdir)
    cfg = ExperimentConfig(
        seed=0,
        train=TrainSection(learning_rate=0.03, epochs=1000, batch_size=32),
        smo=SmoSection(
            epsilon=0.05,
            max_iterations=25,
            retrain_epochs=200,
            optimizer="nelder_mead",
            target_params={"alpha": 1.0, "s0": -0.6, "k_cond": 1.2, "h_coef": 1.4, "t_inf": 0.7},
            fine_model="oracle",
            retrain_learning_rate=0.01,
        ),
        data=DataSection(n_samples=2000, noise_sigma=0.01, source="oracle"),
        paths=PathsSection(
            dataset=str(workdir / "dataset.csv"),
            checkpoint=str(workdir / "checkpoint.json"),
            report=str(workdir / "report.csv"),
        ),
    )
    cfg.validate()
    return cfg


# --- commands ---------------------------------------------------------------


def _sibling(path, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(path.stem + suffix)


def loss_path(cfg: ExperimentConfig) -> Path:
    return _sibling(cfg.paths.checkpoint, "_loss.csv")


def summary_path(cfg: ExperimentConfig) -> Path:
    return _sibling(cfg.paths.report, "_summary.csv")


def _domain(cfg: ExperimentConfig):
    return (cfg.grid.x_max, cfg.grid.t_max)


def make_dataset(cfg: ExperimentConfig) -> Dataset:
    return generate_dataset(cfg.grid_obj(), cfg.param_bounds(), cfg.data.n_samples,
                            cfg.data.noise_sigma, cfg.seed, cfg.data.source)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    if not Path(cfg.paths.dataset).exists():
        raise MissingDataset(f"dataset file not found: {cfg.paths.dataset}")
    return persist.read_dataset(cfg.paths.dataset, _domain(cfg))


def _dataset_or_generate(cfg: ExperimentConfig) -> Dataset:
    return load_dataset(cfg) if Path(cfg.paths.dataset).exists() else make_dataset(cfg)


def pretrain(cfg: ExperimentConfig, data: Dataset, hidden_layers: int | None = None):
    layers = cfg.network.hidden_layers if hidden_layers is None else hidden_layers
    net = MlpNetwork.create(layers, cfg.network.width, cfg.seed, data.inputs)
    return train(net, data, cfg.train_config())


def run_pipeline(cfg: ExperimentConfig, net: MlpNetwork, data: Dataset, **smo_overrides) -> SmoState:
    return run_smo(cfg.smo_config(**smo_overrides), net, data, None, cfg.grid_obj(), cfg.probe_set(),
                   cfg.param_bounds(), fine=cfg.fine_model(), train_cfg=cfg.retrain_config())


def cmd_generate(cfg: ExperimentConfig) -> Dataset:
    data = make_dataset(cfg)
    persist.write_dataset(data, cfg.paths.dataset)
    print(f"wrote {data.count} rows to {cfg.paths.dataset}")
    return data


def cmd_train(cfg: ExperimentConfig):
    data = load_dataset(cfg)
    net, history = pretrain(cfg, data)
    persist.save_checkpoint(net, cfg.paths.checkpoint)
    persist.write_loss_history(history, loss_path(cfg))
    print(f"trained {net.hidden_layers}-hidden-layer network for {len(history)} epochs, "
          f"final loss {history[-1]:.6g}; checkpoint {cfg.paths.checkpoint}")
    return net, history


def cmd_run(cfg: ExperimentConfig) -> SmoState:
    data = load_dataset(cfg)
    if not Path(cfg.paths.checkpoint).exists():
        raise ConfigError(f"checkpoint not found: {cfg.paths.checkpoint}")
    net = persist.load_checkpoint(cfg.paths.checkpoint)
    state = run_pipeline(cfg, net, data)
    persist.write_history(state, cfg.paths.report)
    row = [str(state.converged).lower(), state.iteration, state.accuracy_pct]
    persist.write_csv(summary_path(cfg), SUMMARY_HEADER, [row])
    print(",".join(SUMMARY_HEADER))
    print(f"{row[0]},{row[1]},{row[2]:.4f}")
    return state


def cmd_sweep_layers(cfg: ExperimentConfig, layer_counts) -> list:
    layer_counts = [int(n) for n in layer_counts]
    if not layer_counts:
        raise ConfigError("layer_counts must be non-empty")
    data = _dataset_or_generate(cfg)
    rows = []
    for n in layer_counts:
        try:
            net, _ = pretrain(cfg, data, hidden_layers=n)
            state = run_pipeline(cfg, net, data)
            rows.append([n, state.accuracy_pct, str(state.converged).lower(), state.iteration])
        except (SmheatError, ArithmeticError, ValueError) as exc:
            log.warning("sweep row %d failed: %s", n, exc)
            rows.append([n, 0.0, "false", 0])
        print(f"hidden_layers={n} accuracy={rows[-1][1]:.4f} converged={rows[-1][2]} "
              f"iterations={rows[-1][3]}")
    persist.write_csv(cfg.paths.report, SWEEP_HEADER, rows)
    return rows


def cmd_bench_optimizers(cfg: ExperimentConfig) -> list:
    data = _dataset_or_generate(cfg)
    net, _ = pretrain(cfg, data)
    rows = []
    for name in ("conjugate_gradient", "nelder_mead"):
        label = "cg" if name == "conjugate_gradient" else name
        try:
            state = run_pipeline(cfg, net, data, optimizer=name)
            rows.append([label, state.accuracy_pct, state.iteration, state.fine_evals])
        except (SmheatError, ArithmeticError, ValueError) as exc:
            log.warning("bench row %s failed: %s", label, exc)
            rows.append([label, 0.0, 0, 0])
        print(f"optimizer={label} accuracy={rows[-1][1]:.4f} iterations={rows[-1][2]} "
              f"fine_evals={rows[-1][3]}")
    persist.write_csv(cfg.paths.report, BENCH_HEADER, rows)
    return rows

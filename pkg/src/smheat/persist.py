"""CSV / JSON readers and writers for datasets, fields, checkpoints and
run reports. Floats are written with ``repr`` so they parse back exactly."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .coarse_net import MlpNetwork
from .errors import ConfigError
from .fine_solver import TemperatureField
from .heat_model import PARAM_NAMES, Dataset, HeatParams

DATASET_HEADER = [*PARAM_NAMES, "x", "t", "temperature"]
FIELD_HEADER = ["x", "t", "temperature"]
HISTORY_HEADER = ["iteration", *PARAM_NAMES, "residual_norm", "accuracy_pct"]


def _f(v) -> str:
    return repr(float(v))


def _read_rows(path, header):
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got != header:
            raise ConfigError(f"{path}: expected header {','.join(header)}, got {got}")
        return [row for row in reader if row]


def write_dataset(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_HEADER)
        for p, x, t, temp in zip(data.params, data.x, data.t, data.temperature):
            w.writerow([*map(_f, p), _f(x), _f(t), _f(temp)])


def read_dataset(path, domain=(1.0, 1.0)) -> Dataset:
    rows = np.array(_read_rows(path, DATASET_HEADER), dtype=float).reshape(-1, 8)
    return Dataset(rows[:, :5], rows[:, 5], rows[:, 6], rows[:, 7], domain=domain)


def write_field(field: TemperatureField, path) -> None:
    """Row-major over (time step, node)."""
    g = field.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELD_HEADER)
        for n, t in enumerate(g.t):
            for i, x in enumerate(g.x):
                w.writerow([_f(x), _f(t), _f(field.values[i, n])])


def read_field(path, grid) -> TemperatureField:
    rows = np.array(_read_rows(path, FIELD_HEADER), dtype=float)
    values = rows[:, 2].reshape(grid.nt + 1, grid.nx).T
    return TemperatureField(np.ascontiguousarray(values), grid)


def checkpoint_dict(net: MlpNetwork) -> dict:
    return {
        "layer_sizes": list(net.layer_sizes),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "input_norm": {"means": net.input_mean.tolist(), "stds": net.input_std.tolist()},
        "seed": net.seed,
    }


def save_checkpoint(net: MlpNetwork, path) -> None:
    with open(path, "w") as fh:
        json.dump(checkpoint_dict(net), fh, indent=1)
        fh.write("\n")


def load_checkpoint(path) -> MlpNetwork:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load checkpoint {path}: {exc}") from exc
    try:
        return MlpNetwork(
            doc["layer_sizes"],
            doc["weights"],
            doc["biases"],
            doc["input_norm"]["means"],
            doc["input_norm"]["stds"],
            doc.get("seed", 0),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed checkpoint {path}: {exc}") from exc


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_f(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path, header) -> list:
    return _read_rows(path, header)


def write_loss_history(history, path) -> None:
    write_csv(path, ["epoch", "loss"], [(i + 1, float(v)) for i, v in enumerate(history)])


def write_history(state, path) -> None:
    write_csv(path, HISTORY_HEADER, state.history_rows())


def read_history(path) -> list:
    """SMO history rows as (iteration, HeatParams, residual_norm, accuracy_pct)."""
    out = []
    for row in _read_rows(path, HISTORY_HEADER):
        vals = [float(v) for v in row[1:]]
        out.append((int(row[0]), HeatParams(*vals[:5]), vals[5], vals[6]))
    return out

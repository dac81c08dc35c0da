import json

import pytest


def tiny_config(**smo):
    """A config small enough for every CLI command to finish in seconds."""
    doc = {
        "seed": 1,
        "grid": {"nx": 11, "nt": 20},
        "network": {"hidden_layers": 2, "width": 6},
        "train": {"learning_rate": 0.01, "epochs": 5, "batch_size": 16},
        "smo": {"epsilon": 1e-9, "max_iterations": 2, "retrain_epochs": 2,
                "target_params": {"alpha": 1.0, "s0": -0.6, "k_cond": 1.2, "h_coef": 1.4, "t_inf": 0.7},
                "fine_model": "oracle", **smo},
        "data": {"n_samples": 60, "noise_sigma": 0.01},
    }
    return doc


@pytest.fixture
def write_config(tmp_path):
    def _write(doc=None, name="config.json", directory=None):
        directory = directory or tmp_path
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / name
        path.write_text(json.dumps(doc if doc is not None else tiny_config()))
        return path

    return _write


ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line per acceptance criterion and echo it."""
    def _report(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} | {name} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

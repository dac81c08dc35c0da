"""Acceptance suite: one test per headline criterion, each printing a
PASS/FAIL line (collected again in the terminal summary).

The scenario tests run the full seeded pipeline and take several minutes
in total on one core.
"""

import filecmp
import time

import numpy as np
import pytest

from conftest import tiny_config
from smheat import experiments, persist
from smheat.cli import main
from smheat.coarse_net import MlpNetwork, backward, coarse_response, forward
from smheat.fine_solver import simulate
from smheat.heat_model import Grid1D, HeatParams
from test_fine_solver import manufactured_error
from test_optim import rosenbrock, rosenbrock_grad, spd_quadratic
from smheat.optim import Objective, conjugate_gradient, nelder_mead

pytestmark = pytest.mark.acceptance


def identifiable(p: HeatParams):
    """The closed-form temperature depends on the parameters only through
    the ambient level, the steady offset s0/k and the decay rate k/h^2."""
    return np.array([p.t_inf, p.s0 / p.k_cond, p.k_cond / p.h_coef**2])


def test_solver_convergence(report_criterion):
    t0 = time.perf_counter()
    errs = [manufactured_error(10 * 2**l + 1, 10 * 2**l) for l in range(4)]
    elapsed = time.perf_counter() - t0
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    ok = all(3.0 <= r <= 5.0 for r in ratios) and elapsed < 10.0
    assert report_criterion("solver convergence", ok,
                            f"ratios {np.round(ratios, 3).tolist()} in [3, 5], {elapsed:.2f}s < 10s")


def test_steady_state_preservation(report_criterion):
    g = Grid1D(nx=41, nt=1000)
    p = HeatParams(alpha=0.8, s0=0.0, k_cond=1.3, h_coef=0.7, t_inf=0.45)
    rep = simulate(p, g, initial=np.full(g.nx, p.t_inf))
    dev = float(np.max(np.abs(rep.field.values - p.t_inf)))
    ok = rep.steps_taken == 1000 and dev <= 1e-12
    assert report_criterion("steady-state preservation", ok, f"max deviation {dev:.2e} <= 1e-12 over 1000 steps")


def test_gradient_correctness(report_criterion):
    rng = np.random.default_rng(2024)
    h = 1e-6
    worst = 0.0
    t0 = time.perf_counter()
    for k in range(100):
        net = MlpNetwork.create(int(rng.integers(1, 4)), int(rng.integers(3, 11)), seed=k)
        for l in range(len(net.biases)):
            net.biases[l] = rng.normal(0.0, 0.5, net.biases[l].shape)
        while True:  # keep every hidden pre-activation away from the ReLU kink
            x = rng.normal(size=7)
            _, cache = forward(net, x)
            if min(np.min(np.abs(z)) for z in cache.pre[:-1]) > 1e-4:
                break
        w_grads, b_grads, _ = backward(net, cache, 1.0)
        for params, grads in ((net.weights, w_grads), (net.biases, b_grads)):
            for arr, g in zip(params, grads):
                for idx in np.ndindex(arr.shape):
                    orig = arr[idx]
                    arr[idx] = orig + h
                    fp = forward(net, x)[0]
                    arr[idx] = orig - h
                    fm = forward(net, x)[0]
                    arr[idx] = orig
                    fd = (fp - fm) / (2 * h)
                    rel = abs(g[idx] - fd) / max(abs(g[idx]), abs(fd), 1e-4)
                    worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 5.0
    assert report_criterion("gradient correctness", ok,
                            f"max relative error {worst:.2e} <= 1e-5 over 100 networks, {elapsed:.2f}s < 5s")


def test_optimizer_recovery(report_criterion):
    nm = nelder_mead(rosenbrock, [-1.2, 1.0], max_iter=2000)
    cg = conjugate_gradient(Objective(rosenbrock, rosenbrock_grad), [-1.2, 1.0], max_iter=2000)
    A, b, xs = spd_quadratic(7)
    n = len(b)
    quad = conjugate_gradient(Objective(lambda x: 0.5 * x @ A @ x - b @ x, lambda x: A @ x - b),
                              np.zeros(n), gtol=1e-12, max_iter=n + 2)
    qerr = float(np.linalg.norm(quad.x_best - xs))
    ok = nm.f_best < 1e-6 and cg.f_best < 1e-6 and qerr <= 1e-8 and quad.iterations <= n + 2
    assert report_criterion(
        "optimizer recovery", ok,
        f"NM f={nm.f_best:.1e} ({nm.iterations} it), CG f={cg.f_best:.1e} ({cg.iterations} it), "
        f"quadratic |x-x*|={qerr:.1e} in {quad.iterations} <= {n + 2} it")


@pytest.mark.slow
def test_smo_oracle_scenario(tmp_path, report_criterion):
    cfg = experiments.standard_config(tmp_path)
    t0 = time.perf_counter()
    data = experiments.make_dataset(cfg)
    net, _ = experiments.pretrain(cfg, data)
    state = experiments.run_pipeline(cfg, net, data)
    elapsed = time.perf_counter() - t0
    truth = identifiable(cfg.hidden_params())
    rel = np.abs(identifiable(state.x_current) - truth) / np.abs(truth)
    ok = (state.converged and state.iteration <= 25 and state.accuracy_pct >= 85.0
          and np.all(rel <= 0.05) and elapsed < 120.0)
    assert report_criterion(
        "SMO oracle scenario", ok,
        f"converged={state.converged} in {state.iteration} it, accuracy {state.accuracy_pct:.2f}% >= 85, "
        f"rel. errors (t_inf, s0/k, k/h^2) {np.round(rel, 4).tolist()} <= 0.05, {elapsed:.0f}s < 120s")


@pytest.mark.slow
def test_optimizer_comparison(tmp_path, report_criterion):
    rows = experiments.cmd_bench_optimizers(experiments.standard_config(tmp_path))
    acc = {r[0]: r[1] for r in rows}
    ok = set(acc) == {"cg", "nelder_mead"} and all(v >= 85.0 for v in acc.values())
    assert report_criterion("optimizer comparison", ok,
                            f"cg {acc.get('cg', 0):.2f}%, nelder_mead {acc.get('nelder_mead', 0):.2f}% (both >= 85)")


@pytest.mark.slow
def test_layer_sweep_ordering(tmp_path, report_criterion):
    rows = experiments.cmd_sweep_layers(experiments.standard_config(tmp_path), [1, 3, 8])
    acc = {r[0]: r[1] for r in rows}
    ok = acc[3] > acc[1] and acc[3] > acc[8]
    assert report_criterion("layer-sweep ordering", ok,
                            f"accuracy 1: {acc[1]:.2f}%, 3: {acc[3]:.2f}%, 8: {acc[8]:.2f}%; need 3 > 1 and 3 > 8")


def _run_all_commands(directory, write_config):
    path = write_config(tiny_config(), directory=directory)
    codes = [main(["--config", str(path), cmd]) for cmd in ("generate", "train", "run")]
    outputs = {}
    for name in ("dataset.csv", "checkpoint.json", "checkpoint_loss.csv", "report.csv", "report_summary.csv"):
        outputs[name] = (directory / name).read_bytes()
    for cmd, extra in (("sweep-layers", ["--layers", "1,2"]), ("bench-optimizers", [])):
        codes.append(main(["--config", str(path), cmd, *extra]))
        outputs[cmd] = (directory / "report.csv").read_bytes()
    return codes, outputs


def test_determinism(tmp_path, write_config, report_criterion):
    codes_a, out_a = _run_all_commands(tmp_path / "a", write_config)
    codes_b, out_b = _run_all_commands(tmp_path / "b", write_config)
    same = [k for k in out_a if out_a[k] == out_b[k]]
    ok = codes_a == codes_b and len(same) == len(out_a)
    assert report_criterion("determinism", ok,
                            f"{len(same)}/{len(out_a)} outputs byte-identical across reruns of all five commands")


def test_round_trip(tmp_path, report_criterion):
    cfg = experiments.standard_config(tmp_path)
    data = experiments.cmd_generate(cfg)
    net = MlpNetwork.create(3, 20, seed=0, inputs=data.inputs)
    persist.save_checkpoint(net, cfg.paths.checkpoint)
    data_back = persist.read_dataset(cfg.paths.dataset)
    net_back = persist.load_checkpoint(cfg.paths.checkpoint)
    probes = cfg.probe_set()
    p = cfg.hidden_params()
    ok = (data_back == data
          and np.array_equal(net_back.predict(data_back.inputs), net.predict(data.inputs))
          and np.array_equal(coarse_response(net_back, p, probes), coarse_response(net, p, probes)))
    # a second write of the reloaded objects is byte-identical too
    persist.write_dataset(data_back, tmp_path / "again.csv")
    persist.save_checkpoint(net_back, tmp_path / "again.json")
    ok = ok and filecmp.cmp(cfg.paths.dataset, tmp_path / "again.csv", shallow=False)
    ok = ok and filecmp.cmp(cfg.paths.checkpoint, tmp_path / "again.json", shallow=False)
    assert report_criterion("round trip", ok, "dataset CSV and checkpoint JSON reload to identical responses and bytes")

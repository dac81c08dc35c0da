"""ReLU multilayer perceptron used as the coarse model, with hand-written
backpropagation and mini-batch gradient descent."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .errors import CacheMismatch, EmptyDataset, LengthMismatch
from .heat_model import Dataset, HeatParams, ProbeSet

N_INPUTS = 7  # five parameters plus x and t


def relu(z):
    return np.maximum(0.0, z)


def relu_grad(z):
    # the kink at z == 0 counts as the active branch
    return np.where(np.asarray(z) >= 0, 1.0, 0.0)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 2000
    batch_size: int = 32
    seed: int = 0
    l2_penalty: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")


class MlpNetwork:
    """Feed-forward net: standardized input, ReLU hidden layers, linear output.

    ``weights[l]`` has shape (fan_out, fan_in); ``biases[l]`` has shape
    (fan_out,).
    """

    def __init__(self, layer_sizes, weights, biases, input_mean=None, input_std=None, seed=0):
        self.layer_sizes = [int(s) for s in layer_sizes]
        if len(self.layer_sizes) < 3:
            raise ValueError("need at least one hidden layer")
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float).ravel() for b in biases]
        n_in = self.layer_sizes[0]
        self.input_mean = np.zeros(n_in) if input_mean is None else np.array(input_mean, dtype=float)
        self.input_std = np.ones(n_in) if input_std is None else np.array(input_std, dtype=float)
        self.seed = int(seed)
        self._check()

    def _check(self):
        sizes = self.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("one weight matrix and bias vector per layer required")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(f"layer {l} has shapes {w.shape}, {b.shape}")
        if self.input_mean.shape != (sizes[0],) or self.input_std.shape != (sizes[0],):
            raise ValueError("input normalization must match the input width")
        if np.any(self.input_std <= 0):
            raise ValueError("input standard deviations must be > 0")

    @classmethod
    def create(cls, hidden_layers: int = 3, width: int = 20, seed: int = 0, inputs=None,
               n_inputs: int = N_INPUTS) -> "MlpNetwork":
        """Glorot-uniform initialised network.

        ``inputs`` (rows of raw network inputs) fixes the standardization;
        without it the inputs pass through unchanged.
        """
        if hidden_layers < 1:
            raise ValueError("hidden_layers must be >= 1")
        sizes = [n_inputs] + [width] * hidden_layers + [1]
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        mean = std = None
        if inputs is not None:
            inputs = np.asarray(inputs, dtype=float)
            mean = inputs.mean(axis=0)
            std = inputs.std(axis=0)
            std[std == 0] = 1.0
        return cls(sizes, weights, biases, mean, std, seed)

    @property
    def hidden_layers(self) -> int:
        return len(self.layer_sizes) - 2

    def copy(self) -> "MlpNetwork":
        return copy.deepcopy(self)

    def predict(self, inputs) -> np.ndarray:
        """Outputs for a batch of raw inputs, shape (n,)."""
        a = (np.atleast_2d(np.asarray(inputs, dtype=float)) - self.input_mean) / self.input_std
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            a = z if l == last else relu(z)
        return a[:, 0]

    def __eq__(self, other):
        if not isinstance(other, MlpNetwork):
            return NotImplemented
        return (
            self.layer_sizes == other.layer_sizes
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
            and np.array_equal(self.input_mean, other.input_mean)
            and np.array_equal(self.input_std, other.input_std)
        )


@dataclass
class ForwardCache:
    standardized: np.ndarray  # (n, n_in)
    pre: list  # pre-activations z_l, each (n, width_l)
    post: list  # activations feeding layer l, post[0] is the standardized input


def _forward_batch(net: MlpNetwork, inputs: np.ndarray):
    x = (inputs - net.input_mean) / net.input_std
    pre, post = [], [x]
    a = x
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        pre.append(z)
        a = z if l == last else relu(z)
        if l != last:
            post.append(a)
    return a[:, 0], ForwardCache(x, pre, post)


def _backward_batch(net: MlpNetwork, cache: ForwardCache, output_grad: np.ndarray):
    if len(cache.pre) != len(net.weights) or any(
        z.shape[1] != w.shape[0] for z, w in zip(cache.pre, net.weights)
    ):
        raise CacheMismatch("cache does not come from this network")
    n = cache.standardized.shape[0]
    delta = np.asarray(output_grad, dtype=float).reshape(n, 1)
    w_grads = [None] * len(net.weights)
    b_grads = [None] * len(net.weights)
    for l in range(len(net.weights) - 1, -1, -1):
        if l != len(net.weights) - 1:
            delta = delta * relu_grad(cache.pre[l])
        w_grads[l] = delta.T @ cache.post[l]
        b_grads[l] = delta.sum(axis=0)
        delta = delta @ net.weights[l]
    input_grad = delta / net.input_std
    return w_grads, b_grads, input_grad


def forward(net: MlpNetwork, x):
    """Evaluate one raw input vector; returns (output, cache)."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != net.layer_sizes[0]:
        raise LengthMismatch(f"network expects {net.layer_sizes[0]} inputs, got {x.shape[1]}")
    out, cache = _forward_batch(net, x)
    return float(out[0]), cache


def backward(net: MlpNetwork, cache: ForwardCache, output_grad: float):
    """Reverse-mode gradients of ``output_grad * output``.

    Returns (weight_grads, bias_grads, input_grad) where the input gradient
    is taken with respect to the raw (unstandardized) input.
    """
    if cache.standardized.shape[0] != 1:
        raise CacheMismatch("backward expects the cache of a single forward call")
    w_grads, b_grads, input_grad = _backward_batch(net, cache, np.array([output_grad]))
    return w_grads, b_grads, input_grad[0]


def predict_with_input_grad(net: MlpNetwork, inputs):
    """Outputs and d(output)/d(raw input) for each row of ``inputs``."""
    out, cache = _forward_batch(net, np.atleast_2d(np.asarray(inputs, dtype=float)))
    _, _, grads = _backward_batch(net, cache, np.ones(len(out)))
    return out, grads


def train(net: MlpNetwork, data: Dataset, cfg: TrainConfig):
    """Mini-batch gradient descent on the mean squared residual.

    Works on a copy; returns ``(trained_net, loss_history)`` with one entry
    per epoch (the mean of that epoch's batch losses, penalty excluded).
    """
    if len(data) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    net = net.copy()
    X = data.inputs
    y = data.temperature
    n = len(y)
    rng = np.random.default_rng(cfg.seed)
    history = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            out, cache = _forward_batch(net, X[idx])
            r = out - y[idx]
            total += float(r @ r)
            w_grads, b_grads, _ = _backward_batch(net, cache, 2.0 * r / len(idx))
            for l in range(len(net.weights)):
                if cfg.l2_penalty:
                    w_grads[l] = w_grads[l] + 2.0 * cfg.l2_penalty * net.weights[l]
                net.weights[l] -= cfg.learning_rate * w_grads[l]
                net.biases[l] -= cfg.learning_rate * b_grads[l]
        history.append(total / n)
    return net, np.array(history)


def network_inputs(params: HeatParams, probes: ProbeSet) -> np.ndarray:
    p = np.broadcast_to(params.to_array(), (len(probes), 5))
    return np.column_stack([p, probes.x, probes.t])


def coarse_response(net: MlpNetwork, params: HeatParams, probes: ProbeSet) -> np.ndarray:
    """Network predictions at every probe for one parameter vector."""
    return net.predict(network_inputs(params, probes))


def residual(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"response lengths differ: {a.shape} vs {b.shape}")
    return a - b


def residual_norm(r) -> float:
    return float(np.linalg.norm(np.asarray(r, dtype=float)))

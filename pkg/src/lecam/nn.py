"""Small fully-connected networks with hand-written backprop and Adam.

Layers compute ``a @ W + b``; every hidden layer is followed by its
activation and the output layer is linear.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from lecam.errors import DimensionError, DomainError, IngestionError, UsageError

CHECKPOINT_VERSION = 1
LEAKY_SLOPE = 0.2
ACTIVATIONS = ("relu", "lrelu", "tanh")


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "lrelu":
        return np.where(z > 0, z, LEAKY_SLOPE * z)
    return np.tanh(z)


def _act_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    # subgradient at exactly 0 is 0 for relu and the negative slope for lrelu
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "lrelu":
        return np.where(z > 0, 1.0, LEAKY_SLOPE)
    return 1.0 - a * a


@dataclass
class GradTape:
    """Activations cached by one forward pass, consumed by one backward pass."""

    net_id: int
    version: int
    inputs: list = field(default_factory=list)  # input to each layer
    pre: list = field(default_factory=list)  # pre-activation of each hidden layer
    post: list = field(default_factory=list)  # activation of each hidden layer
    used: bool = False


class MlpNet:
    def __init__(
        self,
        sizes: Sequence[int],
        activation: str | Sequence[str] = "relu",
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
        init: str = "he",
    ):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise DimensionError(f"invalid layer sizes {sizes}")
        n_hidden = len(sizes) - 2
        if isinstance(activation, str):
            activation = [activation] * n_hidden
        activation = list(activation)
        if len(activation) != n_hidden or any(a not in ACTIVATIONS for a in activation):
            raise DomainError(f"need {n_hidden} activations from {ACTIVATIONS}, got {activation}")
        self.sizes = sizes
        self.activations = activation
        rng = rng if rng is not None else np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if init == "zeros":
                w = np.zeros((fan_in, fan_out))
            elif init == "he":
                bound = math.sqrt(6.0 / fan_in)
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            else:
                raise DomainError(f"unknown init {init!r}")
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))
        self.version = 0

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        return [w.shape for w in self.weights]

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def params(self) -> list[np.ndarray]:
        """Parameters as ``[W1, b1, W2, b2, ...]``; the arrays are live."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def n_params(self) -> int:
        return sum(p.size for p in self.params())

    def mark_updated(self) -> None:
        self.version += 1

    def copy(self) -> "MlpNet":
        other = MlpNet.__new__(MlpNet)
        other.sizes = list(self.sizes)
        other.activations = list(self.activations)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        other.version = 0
        return other

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, GradTape]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise DimensionError(f"expected batch of shape (n, {self.in_dim}), got {x.shape}")
        tape = GradTape(id(self), self.version)
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            tape.inputs.append(a)
            z = a @ w + b
            if i == last:
                return z, tape
            a = _act(self.activations[i], z)
            tape.pre.append(z)
            tape.post.append(a)
        raise AssertionError("unreachable")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, tape: GradTape, output_grads: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients of ``sum(outputs * output_grads)``.

        Returns parameter gradients in :meth:`params` order and the gradient
        with respect to the input batch.
        """
        if tape.used:
            raise UsageError("tape was already consumed by a backward pass")
        if tape.net_id != id(self) or tape.version != self.version:
            raise UsageError("tape does not belong to the current state of this network")
        n = tape.inputs[0].shape[0]
        g = np.asarray(output_grads, dtype=np.float64)
        if g.shape != (n, self.out_dim):
            raise DimensionError(f"output_grads shape {g.shape} != {(n, self.out_dim)}")
        tape.used = True
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))  # type: ignore[list-item]
        for i in range(len(self.weights) - 1, -1, -1):
            grads[2 * i] = tape.inputs[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.weights[i].T
            if i > 0:
                g = g * _act_grad(self.activations[i - 1], tape.pre[i - 1], tape.post[i - 1])
        return grads, g


def input_gradients(net: MlpNet, x: np.ndarray) -> np.ndarray:
    """Per-sample gradient of a scalar-output net with respect to its input."""
    if net.out_dim != 1:
        raise DimensionError("input gradients need a scalar-output network")
    out, tape = net.forward(x)
    return net.backward(tape, np.ones_like(out))[1]


class Adam:
    """Bias-corrected Adam over a fixed list of parameter arrays."""

    def __init__(
        self,
        params: Sequence[np.ndarray],
        lr: float = 2e-4,
        beta1: float = 0.5,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.rejected = 0

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> bool:
        """Update ``params`` in place; returns False (and skips) on non-finite grads."""
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise DimensionError("parameter/gradient count does not match optimizer state")
        for p, g, m in zip(params, grads, self.m):
            if p.shape != m.shape or np.shape(g) != m.shape:
                raise DimensionError("parameter/gradient shape does not match optimizer state")
        if not all(np.all(np.isfinite(g)) for g in grads):
            self.rejected += 1
            return False
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        return True


# --- checkpoints ------------------------------------------------------------


def _fmt_array(a: np.ndarray) -> str:
    return "[" + ", ".join(f"{x:.17g}" for x in np.ravel(a)) + "]"


def checkpoint_text(net: MlpNet) -> str:
    """JSON document with 17-significant-digit row-major parameter arrays."""
    head = {
        "format_version": CHECKPOINT_VERSION,
        "sizes": net.sizes,
        "layer_shapes": [list(s) for s in net.layer_shapes],
        "activations": net.activations,
    }
    lines = ["{"]
    for k, v in head.items():
        lines.append(f"  {json.dumps(k)}: {json.dumps(v)},")
    lines.append('  "layers": [')
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        sep = "," if i < len(net.weights) - 1 else ""
        lines.append(f'    {{"weight": {_fmt_array(w)},')
        lines.append(f'     "bias": {_fmt_array(b)}}}{sep}')
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_checkpoint(net: MlpNet, path: str | Path) -> None:
    Path(path).write_text(checkpoint_text(net), encoding="utf-8")


def load_checkpoint(path: str | Path) -> MlpNet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read checkpoint {path}: {exc}") from exc
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise IngestionError(f"unsupported checkpoint version {doc.get('format_version')!r}")
    net = MlpNet(doc["sizes"], doc["activations"], init="zeros")
    if len(doc["layers"]) != len(net.weights):
        raise IngestionError("checkpoint layer count does not match its sizes")
    for i, layer in enumerate(doc["layers"]):
        shape = net.weights[i].shape
        net.weights[i] = np.array(layer["weight"], dtype=np.float64).reshape(shape)
        net.biases[i] = np.array(layer["bias"], dtype=np.float64).reshape(shape[1])
    return net

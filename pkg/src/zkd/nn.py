"""Small fully-connected networks with explicit forward/backward passes.

Weights live in float64 numpy arrays, one (W, b) pair per layer with W of
shape (fan_out, fan_in). Hidden layers apply the spec's activation; the final
layer is affine, so forward() returns raw logits.

Initialization draws from numpy's PCG64 generator seeded with spec.seed, so
identical specs produce bit-identical parameters anywhere PCG64 exists.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import CheckpointError, CheckpointVersionError

ACTIVATIONS = ("relu", "tanh")
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths (input dim first, class count last), activation, init seed."""

    layer_sizes: tuple
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ValueError("layer_sizes needs at least input and output dims")
        if any(s <= 0 for s in sizes):
            raise ValueError(f"layer sizes must be positive, got {sizes}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def output_dim(self):
        return self.layer_sizes[-1]


def _activate(s, kind):
    if kind == "relu":
        return np.maximum(s, 0.0)
    return np.tanh(s)


def _activate_grad(s, kind):
    if kind == "relu":
        return (s > 0.0).astype(np.float64)
    t = np.tanh(s)
    return 1.0 - t * t


class Mlp:
    """A feed-forward net: weights, biases, and the spec that shaped them.

    Instances are single-writer: concurrent read-only forward passes are fine,
    concurrent sgd_step is not.
    """

    def __init__(self, spec, weights, biases):
        self.spec = spec
        self.weights = weights
        self.biases = biases
        self._validate_shapes()

    def _validate_shapes(self):
        sizes = self.spec.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("layer count does not match spec")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (sizes[i + 1], sizes[i])
            if w.shape != expected or b.shape != (sizes[i + 1],):
                raise ValueError(
                    f"layer {i}: expected W {expected} / b ({sizes[i + 1]},), "
                    f"got {w.shape} / {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} contains non-finite parameters")

    @classmethod
    def init(cls, spec):
        """Glorot-uniform weights, zero biases, deterministic in spec.seed."""
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        weights, biases = [], []
        for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(spec, weights, biases)

    def copy(self):
        return Mlp(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            if x.shape[0] != self.spec.input_dim:
                raise ValueError(f"expected input dim {self.spec.input_dim}, got {x.shape[0]}")
        elif x.ndim == 2:
            if x.shape[1] != self.spec.input_dim:
                raise ValueError(f"expected input dim {self.spec.input_dim}, got {x.shape[1]}")
        else:
            raise ValueError(f"input must be 1-D or 2-D, got shape {x.shape}")
        return x

    def forward(self, x):
        """Logits for one feature vector (D,) or a batch (B, D)."""
        x = self._check_input(x)
        single = x.ndim == 1
        a = x[None, :] if single else x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w.T + b
            if i < last:
                a = _activate(a, self.spec.activation)
        return a[0] if single else a

    def _forward_cached(self, x):
        """Batch forward returning layer inputs and hidden pre-activations."""
        inputs = [x]
        preacts = []
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            s = a @ w.T + b
            if i < last:
                preacts.append(s)
                a = _activate(s, self.spec.activation)
                inputs.append(a)
            else:
                a = s
        return a, inputs, preacts

    def backward(self, x, d_logits):
        """Parameter gradients of sum_b d_logits[b] . logits[b].

        Accepts a single sample or a batch; batch gradients are summed. Returns
        a list of (dW, db) matching self.weights / self.biases.
        """
        x = self._check_input(x)
        d = np.asarray(d_logits, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
            d = d[None, :]
        if d.shape != (x.shape[0], self.spec.output_dim):
            raise ValueError(
                f"d_logits must have shape {(x.shape[0], self.spec.output_dim)}, got {d.shape}"
            )
        _, inputs, preacts = self._forward_cached(x)
        grads = [None] * len(self.weights)
        delta = d
        for i in range(len(self.weights) - 1, -1, -1):
            grads[i] = (delta.T @ inputs[i], delta.sum(axis=0))
            if i > 0:
                delta = (delta @ self.weights[i]) * _activate_grad(
                    preacts[i - 1], self.spec.activation
                )
        return grads

    def sgd_step(self, grads, lr):
        """In-place theta <- theta - lr * grad for every parameter."""
        if lr < 0:
            raise ValueError(f"lr must be >= 0, got {lr}")
        if len(grads) != len(self.weights):
            raise ValueError("gradient list does not match layer count")
        for (w, b), (dw, db) in zip(zip(self.weights, self.biases), grads):
            if dw.shape != w.shape or db.shape != b.shape:
                raise ValueError(f"gradient shape mismatch: {dw.shape} vs {w.shape}")
            w -= lr * dw
            b -= lr * db
        return self

    def parameters_equal(self, other):
        return all(
            np.array_equal(a, b)
            for a, b in zip(self.weights + self.biases, other.weights + other.biases)
        )


def save_checkpoint(net, path):
    """Write the net as a single JSON document; floats carry 17 significant digits."""
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "spec": {
            "layer_sizes": list(net.spec.layer_sizes),
            "activation": net.spec.activation,
            "seed": net.spec.seed,
        },
        "layers": [
            {"w": w.tolist(), "b": b.tolist()}
            for w, b in zip(net.weights, net.biases)
        ],
    }
    jsonio.dump(doc, path)


def load_checkpoint(path):
    """Read a checkpoint back into an Mlp; round-trips parameters bit-exactly."""
    if not os.path.exists(path):
        raise CheckpointError(f"checkpoint file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CheckpointError(f"malformed checkpoint {path}: missing format_version")
    if doc["format_version"] != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {doc['format_version']} "
            f"(this build reads version {CHECKPOINT_VERSION})"
        )
    try:
        spec = MlpSpec(
            layer_sizes=tuple(doc["spec"]["layer_sizes"]),
            activation=doc["spec"]["activation"],
            seed=int(doc["spec"]["seed"]),
        )
        weights = [np.asarray(layer["w"], dtype=np.float64) for layer in doc["layers"]]
        biases = [np.asarray(layer["b"], dtype=np.float64) for layer in doc["layers"]]
        return Mlp(spec, weights, biases)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc

"""Network assembly, MSE loss with reverse-mode gradients, and checkpoints.

Two fixed topologies are supported, both with three hidden layers:

  mlp:  dense(in -> h1, relu) -> dense(h2, relu) -> dense(h3, relu)
        -> dense(out, sigmoid)
  cnn:  conv(1 -> h1, unpadded) -> conv(h2, same) -> conv(h3, same)
        -> flatten((in - 2) * h3) -> dense(out, sigmoid)

Outputs pass through a sigmoid, so they live in (0, 1) and can be trained
with mean squared error against bit targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .layers import KERNEL_WIDTH, Conv1D, Dense, Flatten

__all__ = ["ArchitectureSpec", "NeuralModel", "CheckpointError", "build", "parameter_count"]

CHECKPOINT_FORMAT_VERSION = 1

KINDS = ("mlp", "cnn")


class CheckpointError(ValueError):
    """A checkpoint file could not be parsed or does not match its spec."""


@dataclass(frozen=True)
class ArchitectureSpec:
    kind: str
    hidden: tuple
    input_len: int
    output_len: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        hidden = tuple(int(h) for h in self.hidden)
        object.__setattr__(self, "hidden", hidden)
        if len(hidden) != 3:
            raise ValueError(f"exactly three hidden layers required, got {len(hidden)}")
        if any(h < 1 for h in hidden):
            raise ValueError(f"hidden sizes must be positive, got {hidden}")
        if self.input_len < 1 or self.output_len < 1:
            raise ValueError("input_len and output_len must be positive")
        if self.kind == "cnn" and self.input_len < KERNEL_WIDTH:
            raise ValueError(
                f"cnn needs input_len >= {KERNEL_WIDTH} for the unpadded first convolution"
            )

    def describe(self) -> str:
        return f"{self.kind}:{','.join(str(h) for h in self.hidden)}"


def parameter_count(spec: ArchitectureSpec) -> int:
    """Exact trainable-parameter count for a spec, without building it."""
    h1, h2, h3 = spec.hidden
    if spec.kind == "mlp":
        return (
            h1 * (spec.input_len + 1)
            + h2 * (h1 + 1)
            + h3 * (h2 + 1)
            + spec.output_len * (h3 + 1)
        )
    flat = (spec.input_len - (KERNEL_WIDTH - 1)) * h3
    return (
        h1 * (KERNEL_WIDTH * 1 + 1)
        + h2 * (KERNEL_WIDTH * h1 + 1)
        + h3 * (KERNEL_WIDTH * h2 + 1)
        + spec.output_len * (flat + 1)
    )


def _make_layers(spec: ArchitectureSpec):
    h1, h2, h3 = spec.hidden
    if spec.kind == "mlp":
        return [
            Dense(spec.input_len, h1, "relu"),
            Dense(h1, h2, "relu"),
            Dense(h2, h3, "relu"),
            Dense(h3, spec.output_len, "sigmoid"),
        ]
    flat = (spec.input_len - (KERNEL_WIDTH - 1)) * h3
    return [
        Conv1D(1, h1, padding="none", activation="relu"),
        Conv1D(h1, h2, padding="same", activation="relu"),
        Conv1D(h2, h3, padding="same", activation="relu"),
        Flatten(),
        Dense(flat, spec.output_len, "sigmoid"),
    ]


class NeuralModel:
    """An ordered layer stack with MSE loss and flat parameter access."""

    def __init__(self, spec: ArchitectureSpec, layers):
        self.spec = spec
        self.layers = layers

    @property
    def total_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def _prepare_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.spec.input_len:
            raise ValueError(
                f"expected {self.spec.input_len} inputs per word, got {x.shape[1]}"
            )
        if self.spec.kind == "cnn":
            x = x[:, :, None]
        return x, single

    def forward(self, x) -> np.ndarray:
        """Deterministic forward pass; accepts one word or a batch."""
        h, single = self._prepare_input(x)
        for layer in self.layers:
            h = layer.forward(h)
        return h[0] if single else h

    def loss(self, x, targets) -> float:
        out = self.forward(x)
        targets = np.asarray(targets, dtype=np.float64).reshape(out.shape)
        return float(np.mean((out - targets) ** 2))

    def backward(self, x, targets):
        """MSE loss and its gradient w.r.t. every parameter, batch-averaged.

        Per-sample loss is the mean squared error over the output bits; the
        batch loss (and hence the gradient) averages over the batch.
        """
        h, _ = self._prepare_input(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        for layer in self.layers:
            h = layer.forward(h, cache=True)
        out = h
        targets = np.asarray(targets, dtype=np.float64).reshape(out.shape)
        diff = out - targets
        loss = float(np.mean(diff**2))
        grad = 2.0 * diff / diff.size
        grads_reversed = []
        for layer in reversed(self.layers):
            grad, layer_grads = layer.backward(grad)
            grads_reversed.append(layer_grads)
        grads = []
        for layer_grads in reversed(grads_reversed):
            grads.extend(layer_grads)
        return loss, grads

    # -- checkpoints -------------------------------------------------------

    def save(self, path, meta=None):
        doc = {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "spec": {
                "kind": self.spec.kind,
                "hidden": list(self.spec.hidden),
                "input_len": self.spec.input_len,
                "output_len": self.spec.output_len,
            },
            "total_params": self.total_params,
            "layers": [],
            "meta": {
                "train_snr_db": None,
                "seed": None,
                "epochs": None,
                **(meta or {}),
            },
        }
        for layer in self.layers:
            if layer.type_name == "flatten":
                continue
            entry = {
                "type": layer.type_name,
                "weights": layer.w.ravel().tolist(),
                "bias": layer.b.tolist(),
            }
            if layer.type_name == "dense":
                entry["in"] = layer.n_in
                entry["out"] = layer.n_out
            else:
                entry["in"] = layer.in_channels
                entry["out"] = layer.n_kernels
                entry["padding"] = layer.padding
            doc["layers"].append(entry)
        with open(path, "w", encoding="ascii") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> tuple["NeuralModel", dict]:
        """Rebuild a model from a checkpoint; returns (model, meta)."""
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"checkpoint could not be parsed: {exc}") from exc
        if not isinstance(doc, dict) or "format_version" not in doc:
            raise CheckpointError("checkpoint is missing format_version")
        if doc["format_version"] != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint format_version {doc['format_version']!r}"
            )
        try:
            spec = ArchitectureSpec(
                kind=doc["spec"]["kind"],
                hidden=tuple(doc["spec"]["hidden"]),
                input_len=int(doc["spec"]["input_len"]),
                output_len=int(doc["spec"]["output_len"]),
            )
            stored_layers = doc["layers"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"checkpoint has malformed fields: {exc}") from exc
        model = build(spec, init_seed=0)
        param_layers = [ly for ly in model.layers if ly.n_params]
        if len(stored_layers) != len(param_layers):
            raise CheckpointError(
                f"checkpoint holds {len(stored_layers)} layers, spec implies {len(param_layers)}"
            )
        for layer, entry in zip(param_layers, stored_layers):
            try:
                w = np.asarray(entry["weights"], dtype=np.float64).reshape(layer.w.shape)
                b = np.asarray(entry["bias"], dtype=np.float64).reshape(layer.b.shape)
                etype = entry["type"]
            except (KeyError, TypeError, ValueError) as exc:
                raise CheckpointError(f"layer block does not match spec: {exc}") from exc
            if etype != layer.type_name:
                raise CheckpointError(
                    f"layer type {etype!r} does not match spec layer {layer.type_name!r}"
                )
            layer.w = w
            layer.b = b
        if "total_params" in doc and doc["total_params"] != model.total_params:
            raise CheckpointError(
                f"checkpoint claims {doc['total_params']} parameters, "
                f"layers hold {model.total_params}"
            )
        return model, doc.get("meta", {})


def build(spec: ArchitectureSpec, init_seed: int = 0) -> NeuralModel:
    """Construct a model with Glorot-uniform parameters.

    Weights and biases are drawn uniformly from +-sqrt(6 / (fan_in + fan_out))
    layer by layer from a single seeded generator, so the same seed always
    yields the same model.
    """
    rng = np.random.default_rng(init_seed)
    layers = _make_layers(spec)
    for layer in layers:
        if layer.n_params:
            layer.init_params(rng)
    model = NeuralModel(spec, layers)
    assert model.total_params == parameter_count(spec)
    return model

"""Feedforward Q-network in plain numpy with hand-written backprop.

Hidden layers use ReLU, the output layer is linear.  Weights are stored as
``(fan_out, fan_in)`` matrices so a batch ``x`` of shape ``(B, fan_in)``
maps to ``x @ W.T + b``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

SNAPSHOT_MAGIC = b"QNET"
SNAPSHOT_VERSION = 1
DEFAULT_HIDDEN = (64, 64)


class NonFiniteError(FloatingPointError):
    pass


@lru_cache(maxsize=None)
def _layout(dims: tuple[int, ...]) -> tuple[tuple[int, int, tuple[int, ...]], ...]:
    """(start, stop, shape) of each tensor in the flat vector: W0, b0, W1, b1, ..."""
    out = []
    pos = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        for shape in ((fan_out, fan_in), (fan_out,)):
            size = fan_out * fan_in if len(shape) == 2 else fan_out
            out.append((pos, pos + size, shape))
            pos += size
    return tuple(out)


def _views(flat: np.ndarray, dims: tuple[int, ...]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Split a flat parameter vector into per-layer weight and bias views."""
    views = [flat[start:stop].reshape(shape) for start, stop, shape in _layout(dims)]
    return views[0::2], views[1::2]


def n_parameters(dims: Sequence[int]) -> int:
    return _layout(tuple(int(d) for d in dims))[-1][1]


class QNetwork:
    """Parameters live in one flat float64 vector (W0, b0, W1, b1, ...);
    ``weights`` and ``biases`` are views into it."""

    def __init__(self, layer_dims: Sequence[int], weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]):
        self.layer_dims = tuple(int(d) for d in layer_dims)
        if len(self.layer_dims) < 2:
            raise ValueError("need at least an input and an output dimension")
        if len(weights) != len(self.layer_dims) - 1 or len(biases) != len(weights):
            raise ValueError("one weight matrix and bias vector per layer")
        for i, (w, b) in enumerate(zip(weights, biases)):
            expected = (self.layer_dims[i + 1], self.layer_dims[i])
            if np.shape(w) != expected or np.shape(b) != (expected[0],):
                raise ValueError(f"layer {i}: got W{np.shape(w)} b{np.shape(b)}, expected W{expected}")
        self.flat = np.concatenate(
            [np.asarray(a, dtype=np.float64).ravel() for pair in zip(weights, biases) for a in pair]
        )
        self.weights, self.biases = _views(self.flat, self.layer_dims)

    @classmethod
    def from_flat(cls, layer_dims: Sequence[int], flat: np.ndarray) -> "QNetwork":
        net = cls.zeros(layer_dims)
        if flat.shape != net.flat.shape:
            raise ValueError(f"expected {net.flat.size} parameters, got {flat.size}")
        net.flat[...] = flat
        return net

    def freeze(self) -> "QNetwork":
        """Make the parameters read-only in place; views are rebuilt so they inherit the flag."""
        self.flat.flags.writeable = False
        self.weights, self.biases = _views(self.flat, self.layer_dims)
        return self

    @classmethod
    def init(cls, layer_dims: Sequence[int], rng: np.random.Generator) -> "QNetwork":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases."""
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(tuple(layer_dims), weights, biases)

    @classmethod
    def zeros(cls, layer_dims: Sequence[int]) -> "QNetwork":
        dims = tuple(layer_dims)
        return cls(
            dims,
            [np.zeros((o, i)) for i, o in zip(dims[:-1], dims[1:])],
            [np.zeros(o) for o in dims[1:]],
        )

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def n_actions(self) -> int:
        return self.layer_dims[-1]

    def parameters(self) -> list[np.ndarray]:
        """Per-layer views in serialization order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return forward(self, x)

    def __repr__(self) -> str:
        return f"QNetwork(layer_dims={self.layer_dims})"


class GradientSet:
    """Gradient with the same flat layout as its network."""

    def __init__(self, layer_dims: Sequence[int], flat: np.ndarray | None = None):
        self.layer_dims = tuple(layer_dims)
        self.flat = np.zeros(n_parameters(self.layer_dims)) if flat is None else flat
        self.weights, self.biases = _views(self.flat, self.layer_dims)

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.flat).all())


def _check_input(net: QNetwork, x: np.ndarray) -> None:
    if x.shape[-1] != net.input_dim:
        raise ValueError(f"observation has length {x.shape[-1]}, network expects {net.input_dim}")


def forward(net: QNetwork, observation: np.ndarray) -> np.ndarray:
    """Action values for one observation ``(d,)`` or a batch ``(B, d)``."""
    x = np.asarray(observation, dtype=np.float64)
    _check_input(net, x)
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        x = x @ w.T + b
        if i < last:
            x = np.maximum(x, 0.0)
    return x


def _forward_cached(net: QNetwork, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    activations = [x]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        x = x @ w.T + b
        if i < last:
            np.maximum(x, 0.0, out=x)
        activations.append(x)
    return activations, x


def backward_batch(
    net: QNetwork,
    observations: np.ndarray,
    actions: np.ndarray,
    td_targets: np.ndarray,
) -> tuple[float, GradientSet]:
    """Mean squared TD error over a batch and its exact gradient.

    Only the chosen action's output carries error back through the network.
    """
    x = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    _check_input(net, x)
    actions = np.asarray(actions, dtype=np.int64).reshape(-1)
    targets = np.asarray(td_targets, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    if not (len(actions) == len(targets) == n):
        raise ValueError("observations, actions and targets must have the same length")
    if actions.min() < 0 or actions.max() >= net.n_actions:
        raise ValueError(f"action index outside 0..{net.n_actions - 1}")

    activations, q = _forward_cached(net, x)
    rows = np.arange(n)
    error = targets - q[rows, actions]
    loss = float(np.mean(error**2))

    delta = np.zeros_like(q)
    delta[rows, actions] = -2.0 * error / n
    grads = GradientSet(net.layer_dims)
    for i in range(len(net.weights) - 1, -1, -1):
        np.matmul(delta.T, activations[i], out=grads.weights[i])
        delta.sum(axis=0, out=grads.biases[i])
        if i > 0:
            delta = (delta @ net.weights[i]) * (activations[i] > 0.0)
    return loss, grads


def backward(net: QNetwork, observation: np.ndarray, action: int, td_target: float) -> tuple[float, GradientSet]:
    """Single-sample squared TD error ``(target - Q(s, a))**2`` and its gradient."""
    return backward_batch(net, np.atleast_2d(observation), np.array([action]), np.array([td_target]))


@dataclass
class OptimizerState:
    algorithm: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    @classmethod
    def for_network(cls, net: QNetwork, algorithm: str = "adam", lr: float = 1e-3, **kwargs) -> "OptimizerState":
        if algorithm not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {algorithm!r}")
        state = cls(algorithm=algorithm, lr=lr, **kwargs)
        if algorithm == "adam":
            state.m = np.zeros_like(net.flat)
            state.v = np.zeros_like(net.flat)
        return state


def apply_update(net: QNetwork, opt: OptimizerState, grads: GradientSet) -> tuple[QNetwork, OptimizerState]:
    """One optimizer step, in place on ``net`` and ``opt`` (both are also returned)."""
    if grads.flat.shape != net.flat.shape or grads.layer_dims != net.layer_dims:
        raise ValueError("gradient shapes do not match the network")
    if not grads.all_finite():
        bad = [i for i, g in enumerate(grads.parameters()) if not np.isfinite(g).all()]
        raise NonFiniteError(f"non-finite gradient in parameter tensors {bad} (order W0, b0, W1, b1, ...)")
    g = grads.flat
    if opt.algorithm == "sgd":
        net.flat -= opt.lr * g
        return net, opt

    opt.t += 1
    b1, b2 = opt.beta1, opt.beta2
    m, v = opt.m, opt.v
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * (g * g)
    # lr * m_hat / (sqrt(v_hat) + eps) with both bias corrections folded into scalars
    c2 = np.sqrt(1.0 - b2**opt.t)
    step_size = opt.lr * c2 / (1.0 - b1**opt.t)
    denom = np.sqrt(v)
    denom += opt.eps * c2
    net.flat -= step_size * (m / denom)
    return net, opt


def clone_parameters(net: QNetwork) -> QNetwork:
    return QNetwork.from_flat(net.layer_dims, net.flat.copy())


def copy_into(dst: QNetwork, src: QNetwork) -> None:
    if dst.layer_dims != src.layer_dims:
        raise ValueError("layer dims differ")
    dst.flat[...] = src.flat


def serialize(net: QNetwork) -> bytes:
    """``QNET`` magic, version, layer count and dims (uint32 LE), then float64 LE params."""
    header = SNAPSHOT_MAGIC + struct.pack(
        f"<II{len(net.layer_dims)}I", SNAPSHOT_VERSION, len(net.layer_dims), *net.layer_dims
    )
    return header + net.flat.astype("<f8").tobytes()


def deserialize(blob: bytes) -> QNetwork:
    if blob[:4] != SNAPSHOT_MAGIC:
        raise ValueError("not a Q-network snapshot (bad magic)")
    version, n_dims = struct.unpack_from("<II", blob, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    dims = struct.unpack_from(f"<{n_dims}I", blob, 12)
    offset = 12 + 4 * n_dims
    if (len(blob) - offset) % 8:
        raise ValueError("snapshot payload is not a whole number of float64 values")
    flat = np.frombuffer(blob, dtype="<f8", offset=offset).astype(np.float64)
    expected = n_parameters(dims)
    if flat.size != expected:
        raise ValueError(f"snapshot holds {flat.size} parameters, dims {dims} need {expected}")
    return QNetwork.from_flat(dims, flat)

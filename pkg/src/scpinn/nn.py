"""Fully connected scalar-output network with batched forward and weight VJPs.

Parameters live in one flat vector, layer by layer: the weight matrix of shape
(fan_in, fan_out) in row-major order, then the bias.  Trailing entries beyond
``arch.n_params`` are free scalars (inverse-problem unknowns) and are ignored
by the network itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64

ACTIVATIONS = ("sin", "tanh", "relu", "elu")


class NetworkError(ValueError):
    pass


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "sin":
        return np.sin(z)
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))


def _dact(name: str, z: np.ndarray) -> np.ndarray:
    if name == "sin":
        return np.cos(z)
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    if name == "relu":
        return (z > 0).astype(float)
    return np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))


@dataclass(frozen=True)
class MLPArchitecture:
    """Layer widths including input and output, e.g. ``(1, 20, 20, 1)``."""

    widths: tuple[int, ...]
    activation: str = "sin"

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise NetworkError(f"invalid layer widths {widths}")
        if widths[-1] != 1:
            raise NetworkError("only scalar-output networks are supported")
        if self.activation not in ACTIVATIONS:
            raise NetworkError(f"unknown activation {self.activation!r}")

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        return list(zip(self.widths[:-1], self.widths[1:]))

    @property
    def n_params(self) -> int:
        return sum((fi + 1) * fo for fi, fo in self.layer_shapes)

    def unpack(self, theta: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Views (W, b) per layer into the flat parameter vector."""
        if theta.shape[0] < self.n_params:
            raise NetworkError(f"parameter vector has {theta.shape[0]} entries, need {self.n_params}")
        layers = []
        pos = 0
        for fi, fo in self.layer_shapes:
            w = theta[pos : pos + fi * fo].reshape(fi, fo)
            pos += fi * fo
            b = theta[pos : pos + fo]
            pos += fo
            layers.append((w, b))
        return layers


def init(arch: MLPArchitecture, seed: int, extras=()) -> np.ndarray:
    """Glorot-uniform weights, zero biases, optional trailing scalars."""
    rng = SplitMix64(seed)
    parts = []
    for fi, fo in arch.layer_shapes:
        bound = np.sqrt(6.0 / (fi + fo))
        parts.append(bound * (2.0 * rng.uniform(fi * fo) - 1.0))
        parts.append(np.zeros(fo))
    parts.append(np.asarray(extras, dtype=float).reshape(-1))
    return np.concatenate(parts)


@dataclass
class ForwardTape:
    theta: np.ndarray  # private copy, for stale-tape detection
    inputs: list[np.ndarray]  # layer inputs a_0 .. a_{L-1}
    preacts: list[np.ndarray]  # hidden pre-activations z_1 .. z_{L-1}


def _check_theta(arch: MLPArchitecture, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1:
        raise NetworkError("parameter vector must be one-dimensional")
    if not np.all(np.isfinite(theta[: arch.n_params])):
        raise NetworkError("non-finite network parameters")
    return theta


def forward_batch(arch: MLPArchitecture, theta, points) -> tuple[np.ndarray, ForwardTape]:
    theta = _check_theta(arch, theta)
    a = np.asarray(points, dtype=float).reshape(-1, arch.input_dim)
    layers = arch.unpack(theta)
    inputs, preacts = [], []
    for w, b in layers[:-1]:
        inputs.append(a)
        z = a @ w + b
        preacts.append(z)
        a = _act(arch.activation, z)
    inputs.append(a)
    w, b = layers[-1]
    out = (a @ w + b)[:, 0]
    return out, ForwardTape(theta[: arch.n_params].copy(), inputs, preacts)


def forward(arch: MLPArchitecture, theta, points) -> np.ndarray:
    return forward_batch(arch, theta, points)[0]


def vjp_weights(arch: MLPArchitecture, theta, tape: ForwardTape, cotangent) -> np.ndarray:
    """Gradient in the network parameters of ``sum_p v_p u(p, theta)``."""
    theta = np.asarray(theta, dtype=float)
    if not np.array_equal(theta[: arch.n_params], tape.theta):
        raise NetworkError("tape was recorded with different parameters")
    v = np.asarray(cotangent, dtype=float).reshape(-1, 1)
    if v.shape[0] != tape.inputs[0].shape[0]:
        raise NetworkError(f"cotangent has {v.shape[0]} entries, tape has {tape.inputs[0].shape[0]} points")
    layers = arch.unpack(theta)
    grads: list[np.ndarray] = []
    delta = v
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads.append(delta.sum(axis=0))
        grads.append((tape.inputs[i].T @ delta).reshape(-1))
        if i > 0:
            delta = (delta @ w.T) * _dact(arch.activation, tape.preacts[i - 1])
    return np.concatenate(grads[::-1])

"""Dense MLPs with hand-written reverse-mode gradients and Adam.

Parameters live in one flat float64 vector with an explicit layout, which
keeps finite-difference checking and checkpoint serialization trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

ACTIVATIONS = ("relu", "softplus", "sigmoid", "identity")


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str

    def __post_init__(self):
        if self.in_dim <= 0 or self.out_dim <= 0:
            raise ValueError("layer dims must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "softplus":
        return np.logaddexp(0.0, z)  # overflow-safe log(1 + e^z)
    if name == "sigmoid":
        return expit(z)
    return z


def _activate_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(np.float64)  # subgradient 0 at the kink
    if name == "softplus":
        return expit(z)
    if name == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


class Network:
    """Layer specs plus one flat parameter vector."""

    def __init__(self, layers, params: np.ndarray):
        self.layers = tuple(layers)
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError("layer dims do not chain")
        expected = param_count(self.layers)
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (expected,):
            raise ValueError(f"expected {expected} params, got {params.shape}")
        self.params = params

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def weights(self):
        """Yield (W, b) views into the flat vector, one pair per layer."""
        off = 0
        for spec in self.layers:
            w = self.params[off : off + spec.in_dim * spec.out_dim].reshape(
                spec.in_dim, spec.out_dim
            )
            off += spec.in_dim * spec.out_dim
            b = self.params[off : off + spec.out_dim]
            off += spec.out_dim
            yield w, b

    def to_dict(self) -> dict:
        return {
            "layers": [
                {"in_dim": s.in_dim, "out_dim": s.out_dim, "activation": s.activation}
                for s in self.layers
            ],
            "params": self.params.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        layers = [LayerSpec(**s) for s in d["layers"]]
        return cls(layers, np.asarray(d["params"], dtype=np.float64))


def param_count(layers) -> int:
    return sum(s.in_dim * s.out_dim + s.out_dim for s in layers)


def init_network(layers, rng: np.random.Generator) -> Network:
    """He-scaled normals for relu layers, Glorot-scaled for the rest;
    zero biases."""
    layers = tuple(layers)
    params = np.zeros(param_count(layers))
    off = 0
    for spec in layers:
        n = spec.in_dim * spec.out_dim
        if spec.activation == "relu":
            std = np.sqrt(2.0 / spec.in_dim)
        else:
            std = np.sqrt(2.0 / (spec.in_dim + spec.out_dim))
        params[off : off + n] = std * rng.standard_normal(n)
        off += n + spec.out_dim  # biases stay zero
    return Network(layers, params)


def _check_batch(net: Network, batch: np.ndarray) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.in_dim:
        raise ValueError(f"batch must be [n x {net.in_dim}], got {batch.shape}")
    return batch


def forward(net: Network, batch: np.ndarray) -> np.ndarray:
    a = _check_batch(net, batch)
    for spec, (w, b) in zip(net.layers, net.weights()):
        a = _activate(spec.activation, a @ w + b)
    return a


def forward_cached(net: Network, batch: np.ndarray):
    """Forward pass keeping per-layer (input, pre-activation, output)."""
    a = _check_batch(net, batch)
    cache = []
    for spec, (w, b) in zip(net.layers, net.weights()):
        z = a @ w + b
        out = _activate(spec.activation, z)
        cache.append((a, z, out))
        a = out
    return a, cache


def backward_cached(net: Network, cache, upstream: np.ndarray):
    """Reverse-mode gradients from a `forward_cached` pass.

    Returns (param_grad, input_grad) where param_grad matches the flat
    layout and input_grad is dL/d(batch).
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != cache[-1][2].shape:
        raise ValueError("upstream gradient shape must match the forward output")
    pgrad = np.zeros_like(net.params)
    offsets = []
    off = 0
    for spec in net.layers:
        offsets.append(off)
        off += spec.in_dim * spec.out_dim + spec.out_dim
    delta = upstream
    for idx in range(len(net.layers) - 1, -1, -1):
        spec = net.layers[idx]
        a_in, z, a_out = cache[idx]
        dz = delta * _activate_grad(spec.activation, z, a_out)
        o = offsets[idx]
        n = spec.in_dim * spec.out_dim
        pgrad[o : o + n] = (a_in.T @ dz).ravel()
        pgrad[o + n : o + n + spec.out_dim] = dz.sum(axis=0)
        w = net.params[o : o + n].reshape(spec.in_dim, spec.out_dim)
        delta = dz @ w.T
    return pgrad, delta


def backward(net: Network, batch: np.ndarray, upstream: np.ndarray):
    """Convenience wrapper: forward for the cache, then reverse pass."""
    _, cache = forward_cached(net, batch)
    return backward_cached(net, cache, upstream)


@dataclass(frozen=True)
class AdamState:
    """Adam moments for one parameter vector."""

    lr: float
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.5  # GAN-convention momentum
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, n_params: int, lr: float, beta1: float = 0.5, beta2: float = 0.999) -> "AdamState":
        return cls(lr=lr, m=np.zeros(n_params), v=np.zeros(n_params), beta1=beta1, beta2=beta2)

    def to_dict(self) -> dict:
        return {
            "lr": self.lr,
            "m": self.m.tolist(),
            "v": self.v.tolist(),
            "step": self.step,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdamState":
        return cls(
            lr=d["lr"],
            m=np.asarray(d["m"], dtype=np.float64),
            v=np.asarray(d["v"], dtype=np.float64),
            step=int(d["step"]),
            beta1=d["beta1"],
            beta2=d["beta2"],
            eps=d["eps"],
        )


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray, maximize: bool = False):
    """One bias-corrected Adam update; maximize flips the gradient sign.

    Returns (new_params, new_state); inputs are left untouched.
    """
    g = -grads if maximize else grads
    if g.shape != params.shape or g.shape != state.m.shape:
        raise ValueError("parameter/gradient/state shapes disagree")
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, replace(state, m=m, v=v, step=step)

"""Dense-network kernel: forward/backward passes, Adam, squashed-Gaussian head.

Everything is plain numpy with hand-written reverse-mode gradients; there is
no autodiff framework behind this module. Shapes follow the convention
W: (out, in), b: (out,), batches are row-major (B, dim).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mlp",
    "AdamState",
    "adam_step",
    "LOG_STD_MIN",
    "LOG_STD_MAX",
    "SquashedGaussianPolicy",
    "sample_action",
    "gaussian_log_prob",
    "save_arrays",
    "load_arrays",
]

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


class Mlp:
    """Fully connected net, rectifier hidden layers, identity output."""

    def __init__(self, layer_sizes, rng: np.random.Generator | None = None):
        self.layer_sizes = [int(s) for s in layer_sizes]
        if len(self.layer_sizes) < 2:
            raise ValueError("layer_sizes needs at least input and output")
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            if rng is None:
                w = np.zeros((fan_out, fan_in))
            else:
                w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))
        self._cache: tuple | None = None

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def params(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "Mlp":
        other = Mlp(self.layer_sizes)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            other.weights[i] = w.copy()
            other.biases[i] = b.copy()
        return other

    def forward(self, x: np.ndarray, cache: bool = False) -> np.ndarray:
        """Run the net on a single vector or a (B, in) batch."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x.reshape(1, -1) if squeeze else x
        if h.shape[1] != self.in_dim:
            raise ValueError(f"input width {h.shape[1]} does not match first layer {self.in_dim}")
        acts = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.T + b
            if i != last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        if cache:
            self._cache = (x, acts)
        return h[0] if squeeze else h

    def backward(self, x: np.ndarray, upstream: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Gradients of a scalar loss given d loss / d output.

        Returns (d loss / d input, grads) where ``grads`` is aligned with
        :meth:`params`. Requires a cached forward pass on the same input.
        """
        if self._cache is None:
            raise RuntimeError("backward requires a cached forward pass (forward(..., cache=True))")
        cached_x, acts = self._cache
        x = np.asarray(x, dtype=np.float64)
        if cached_x.shape != x.shape or not np.array_equal(cached_x, x):
            raise RuntimeError("backward input does not match the cached forward input")
        squeeze = x.ndim == 1
        delta = np.asarray(upstream, dtype=np.float64)
        if squeeze:
            delta = delta.reshape(1, -1)
        grads_rev: list[np.ndarray] = []
        last = len(self.weights) - 1
        for i in range(last, -1, -1):
            inp = acts[i]
            if i != last:
                # post-activation output of layer i is acts[i + 1]
                delta = delta * (acts[i + 1] > 0.0)
            dw = delta.T @ inp
            db = delta.sum(axis=0)
            grads_rev.append(db)
            grads_rev.append(dw)
            delta = delta @ self.weights[i]
        dx = delta[0] if squeeze else delta
        return dx, grads_rev[::-1]


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter list."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], lr: float) -> "AdamState":
        st = cls(lr=lr)
        st.m = [np.zeros_like(p) for p in params]
        st.v = [np.zeros_like(p) for p in params]
        return st


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
    """Bias-corrected adaptive update, applied in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params/grads/state length mismatch")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def gaussian_log_prob(mean, log_std, noise) -> np.ndarray:
    """Log density of the squashed sample tanh(mean + exp(log_std) * noise).

    Includes the tanh change-of-variables correction, written in the
    numerically stable pre-squash form.
    """
    mean = np.asarray(mean, dtype=np.float64)
    log_std = np.asarray(log_std, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    pre = mean + np.exp(log_std) * noise
    base = -0.5 * noise**2 - log_std - 0.5 * math.log(2.0 * math.pi)
    # log(1 - tanh(x)^2) = 2 * (log 2 - x - softplus(-2x))
    correction = 2.0 * (math.log(2.0) - pre - _softplus(-2.0 * pre))
    return (base - correction).sum(axis=-1)


def sample_action(mean, log_std, noise) -> tuple[np.ndarray, np.ndarray]:
    """Squashed-Gaussian sample and its log probability.

    The same (mean, log_std, noise) triple always yields the same action;
    freezing the noise is what makes termination proposals deterministic.
    """
    mean = np.asarray(mean, dtype=np.float64)
    log_std = np.clip(np.asarray(log_std, dtype=np.float64), LOG_STD_MIN, LOG_STD_MAX)
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != mean.shape:
        raise ValueError(f"noise shape {noise.shape} does not match mean shape {mean.shape}")
    if not np.all(np.isfinite(noise)):
        raise ValueError("noise must be finite")
    action = np.tanh(mean + np.exp(log_std) * noise)
    return action, gaussian_log_prob(mean, log_std, noise)


class SquashedGaussianPolicy:
    """Policy net emitting 2k outputs: k means then k raw log-stds.

    Raw log-stds are clamped to [LOG_STD_MIN, LOG_STD_MAX] before use.
    """

    def __init__(self, obs_dim: int, action_dim: int, hidden, rng: np.random.Generator):
        self.obs_dim = int(obs_dim)
        self.action_dim = int(action_dim)
        self.net = Mlp([obs_dim, *hidden, 2 * action_dim], rng)

    def distribution(self, obs: np.ndarray, cache: bool = False) -> tuple[np.ndarray, np.ndarray]:
        out = self.net.forward(obs, cache=cache)
        mean = out[..., : self.action_dim]
        log_std = np.clip(out[..., self.action_dim :], LOG_STD_MIN, LOG_STD_MAX)
        return mean, log_std

    def act(self, obs: np.ndarray, noise: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mean, log_std = self.distribution(obs)
        return sample_action(mean, log_std, noise)

    def params(self) -> list[np.ndarray]:
        return self.net.params()


def save_arrays(path, arrays: dict[str, np.ndarray]) -> None:
    """Write named arrays as a JSON shape header plus a flat f8-LE blob."""
    header = {
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_arrays(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        out: dict[str, np.ndarray] = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
            out[entry["name"]] = data.reshape(shape).astype(np.float64)
    return out

"""Soft actor-critic over reward segments with variable discounting.

The learner bootstraps a segment's target with gamma^dt over the elapsed
original time rather than gamma per decision, so a future event's weight
does not depend on how many higher-level actions partition the interval.
Per-decision discounting (the conventional scheme) is kept behind a config
switch for the plain-HiTS baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RewardSegment, discounted_return
from .nets import AdamState, Mlp, SquashedGaussianPolicy, adam_step

__all__ = [
    "SacConfig",
    "CriticPair",
    "ReplayBuffer",
    "Transition",
    "SacLearner",
    "td_target",
    "polyak_update",
    "critic_loss_and_grads",
    "actor_loss_and_grads",
]


@dataclass
class SacConfig:
    discount: float = 0.99
    learning_rate: float = 3e-4
    batch_size: int = 256
    polyak: float = 0.005
    entropy_coeff: float | None = 0.2
    target_entropy: float | None = None
    entropy_lr: float = 1e-3
    grad_steps_per_env_step: float = 1.0
    buffer_capacity: int = 1_000_000
    hidden: tuple[int, ...] = (32, 32)
    learning_start: int = 0
    # collection-time exploration knobs
    random_action_fraction: float = 0.0
    deterministic_fraction: float = 0.0
    # True: discount bootstrap by gamma^dt over elapsed original time.
    # False: conventional per-decision discounting (one gamma per segment).
    time_discounting: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {self.discount}")
        if not 0.0 < self.polyak <= 1.0:
            raise ValueError(f"polyak must lie in (0, 1], got {self.polyak}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.entropy_coeff is None and self.target_entropy is None:
            raise ValueError("either entropy_coeff or target_entropy must be set")


class CriticPair:
    """Twin Q-networks with polyak-averaged target copies."""

    def __init__(self, input_dim: int, hidden, rng: np.random.Generator):
        self.q1 = Mlp([input_dim, *hidden, 1], rng)
        self.q2 = Mlp([input_dim, *hidden, 1], rng)
        self.t1 = self.q1.copy()
        self.t2 = self.q2.copy()

    def min_q(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(self.q1.forward(x), self.q2.forward(x))

    def min_target_q(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(self.t1.forward(x), self.t2.forward(x))


def polyak_update(critics: CriticPair, tau: float) -> None:
    """target <- (1 - tau) * target + tau * live, elementwise."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    for live, target in ((critics.q1, critics.t1), (critics.q2, critics.t2)):
        for p, tp in zip(live.params(), target.params()):
            tp *= 1.0 - tau
            tp += tau * p


@dataclass(frozen=True)
class Transition:
    """A segment flattened into training coordinates.

    ``action`` is the policy-space encoding in (-1, 1); ``disc_return`` is
    the segment's rewards discounted at the level gamma; ``reward_sum`` is
    the plain sum used by per-decision discounting.
    """

    obs: np.ndarray
    action: np.ndarray
    disc_return: float
    reward_sum: float
    dt: int
    next_obs: np.ndarray
    terminal: bool
    segment: RewardSegment | None = None


class ReplayBuffer:
    """Seeded uniform-sampling ring buffer of segment records."""

    def __init__(self, capacity: int, seed: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._data: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._data)

    def add(self, tr: Transition) -> None:
        if len(self._data) < self.capacity:
            self._data.append(tr)
        else:
            self._data[self._next] = tr
            self._next = (self._next + 1) % self.capacity

    def add_segment(self, segment: RewardSegment, obs, action, next_obs, gamma: float,
                    terminal: bool | None = None) -> None:
        self.add(
            Transition(
                obs=np.asarray(obs, dtype=np.float64),
                action=np.asarray(action, dtype=np.float64),
                disc_return=discounted_return(segment.rewards, gamma),
                reward_sum=float(sum(segment.rewards)),
                dt=segment.duration,
                next_obs=np.asarray(next_obs, dtype=np.float64),
                terminal=segment.terminal if terminal is None else terminal,
                segment=segment,
            )
        )

    def sample(self, batch_size: int) -> list[Transition]:
        if not self._data:
            raise ValueError("cannot sample from an empty buffer")
        idx = self._rng.integers(0, len(self._data), size=batch_size)
        return [self._data[i] for i in idx]


def _stack_batch(batch: list[Transition]):
    obs = np.stack([t.obs for t in batch])
    act = np.stack([t.action for t in batch])
    disc = np.array([t.disc_return for t in batch])
    rsum = np.array([t.reward_sum for t in batch])
    dt = np.array([t.dt for t in batch], dtype=np.float64)
    nobs = np.stack([t.next_obs for t in batch])
    term = np.array([t.terminal for t in batch], dtype=np.float64)
    return obs, act, disc, rsum, dt, nobs, term


class SacLearner:
    """One level's policy, critics, replay buffer, and optimizers."""

    def __init__(self, obs_dim: int, action_dim: int, cfg: SacConfig, seed: int):
        self.cfg = cfg
        self.obs_dim = int(obs_dim)
        self.action_dim = int(action_dim)
        rng = np.random.Generator(np.random.PCG64(seed))
        self.policy = SquashedGaussianPolicy(obs_dim, action_dim, cfg.hidden, rng)
        self.critics = CriticPair(obs_dim + action_dim, cfg.hidden, rng)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, seed=int(rng.integers(0, 2**63 - 1)))
        self.policy_opt = AdamState.for_params(self.policy.params(), cfg.learning_rate)
        self.q1_opt = AdamState.for_params(self.critics.q1.params(), cfg.learning_rate)
        self.q2_opt = AdamState.for_params(self.critics.q2.params(), cfg.learning_rate)
        self.log_alpha = math.log(cfg.entropy_coeff) if cfg.entropy_coeff else 0.0
        self._credit = 0.0

    @property
    def alpha(self) -> float:
        if self.cfg.target_entropy is None:
            return float(self.cfg.entropy_coeff)
        return math.exp(self.log_alpha)

    # ------------------------------------------------------------------
    # targets
    # ------------------------------------------------------------------

    def batch_targets(self, batch: list[Transition], rng: np.random.Generator) -> np.ndarray:
        obs, act, disc, rsum, dt, nobs, term = _stack_batch(batch)
        eps = rng.standard_normal((len(batch), self.action_dim))
        next_act, next_logp = self.policy.act(nobs, eps)
        q_in = np.concatenate([nobs, next_act], axis=1)
        boot = self.critics.min_target_q(q_in)[:, 0] - self.alpha * next_logp
        if self.cfg.time_discounting:
            y = disc + (1.0 - term) * np.power(self.cfg.discount, dt) * boot
        else:
            y = rsum + (1.0 - term) * self.cfg.discount * boot
        if not np.all(np.isfinite(y)):
            raise FloatingPointError("non-finite TD target")
        return y

    # ------------------------------------------------------------------
    # updates
    # ------------------------------------------------------------------

    def critic_update(self, batch: list[Transition], rng: np.random.Generator) -> float:
        y = self.batch_targets(batch, rng)
        obs, act, *_ = _stack_batch(batch)
        x = np.concatenate([obs, act], axis=1)
        loss, grads1, grads2 = critic_loss_and_grads(self.critics, x, y)
        adam_step(self.q1_opt, self.critics.q1.params(), grads1)
        adam_step(self.q2_opt, self.critics.q2.params(), grads2)
        if not math.isfinite(loss):
            raise FloatingPointError("non-finite critic loss")
        return loss

    def actor_update(self, batch: list[Transition], rng: np.random.Generator) -> float:
        obs, *_ = _stack_batch(batch)
        eps = rng.standard_normal((len(batch), self.action_dim))
        loss, grads, logp = actor_loss_and_grads(self.policy, self.critics, obs, eps, self.alpha)
        adam_step(self.policy_opt, self.policy.net.params(), grads)

        if self.cfg.target_entropy is not None:
            # dual ascent on the entropy constraint: shrink alpha when the
            # policy is already more entropic than the target
            self.log_alpha -= self.cfg.entropy_lr * float(np.mean(-logp - self.cfg.target_entropy)) * self.alpha

        if not math.isfinite(loss):
            raise FloatingPointError("non-finite actor loss")
        return loss

    def train_step(self, rng: np.random.Generator) -> tuple[float, float]:
        batch = self.buffer.sample(self.cfg.batch_size)
        c_loss = self.critic_update(batch, rng)
        a_loss = self.actor_update(batch, rng)
        polyak_update(self.critics, self.cfg.polyak)
        return c_loss, a_loss

    def maybe_train(self, rng: np.random.Generator) -> int:
        """Accumulate fractional gradient credit; train on whole units."""
        self._credit += self.cfg.grad_steps_per_env_step
        steps = 0
        while self._credit >= 1.0 and len(self.buffer) >= self.cfg.batch_size:
            self.train_step(rng)
            self._credit -= 1.0
            steps += 1
        if len(self.buffer) < self.cfg.batch_size:
            self._credit = min(self._credit, 1.0)
        return steps


def critic_loss_and_grads(critics: CriticPair, x: np.ndarray, y: np.ndarray):
    """Squared-error loss of both critics against fixed targets.

    Returns (loss, grads for q1, grads for q2) where the loss is the sum of
    the two critics' mean squared errors.
    """
    n = x.shape[0]
    loss = 0.0
    all_grads = []
    for net in (critics.q1, critics.q2):
        q = net.forward(x, cache=True)[:, 0]
        diff = q - y
        loss += float(np.mean(diff**2))
        _, grads = net.backward(x, (2.0 * diff / n)[:, None])
        all_grads.append(grads)
    return loss, all_grads[0], all_grads[1]


def actor_loss_and_grads(policy: SquashedGaussianPolicy, critics: CriticPair,
                         obs: np.ndarray, eps: np.ndarray, alpha: float):
    """Reparameterized actor loss mean(alpha log pi - min Q) and its policy
    gradients; critics are read-only here."""
    n, action_dim = eps.shape
    obs_dim = obs.shape[1]

    out = policy.net.forward(obs, cache=True)
    mean = out[:, :action_dim]
    raw_log_std = out[:, action_dim:]
    log_std = np.clip(raw_log_std, -20.0, 2.0)
    std = np.exp(log_std)
    pre = mean + std * eps
    action = np.tanh(pre)
    base = (-0.5 * eps**2 - log_std - 0.5 * math.log(2.0 * math.pi)).sum(axis=1)
    corr = (2.0 * (math.log(2.0) - pre - np.logaddexp(0.0, -2.0 * pre))).sum(axis=1)
    logp = base - corr

    x = np.concatenate([obs, action], axis=1)
    q1 = critics.q1.forward(x, cache=True)[:, 0]
    q2 = critics.q2.forward(x, cache=True)[:, 0]
    min_q = np.minimum(q1, q2)
    loss = float(np.mean(alpha * logp - min_q))

    # d loss / d action through the min of the two critics
    pick1 = (q1 <= q2).astype(np.float64)
    dq = -1.0 / n
    dx1, _ = critics.q1.backward(x, (dq * pick1)[:, None])
    dx2, _ = critics.q2.backward(x, (dq * (1.0 - pick1))[:, None])
    d_action = (dx1 + dx2)[:, obs_dim:]

    # d loss / d pre-squash: critic path plus the log-prob correction
    dlogp_dpre = 2.0 * np.tanh(pre)
    d_pre = d_action * (1.0 - action**2) + (alpha / n) * dlogp_dpre
    d_mean = d_pre
    d_log_std = d_pre * std * eps + (alpha / n) * -1.0
    clamp_pass = (raw_log_std > -20.0) & (raw_log_std < 2.0)
    upstream = np.concatenate([d_mean, d_log_std * clamp_pass], axis=1)
    _, grads = policy.net.backward(obs, upstream)
    return loss, grads, logp


def td_target(segment: RewardSegment, critics: CriticPair, policy: SquashedGaussianPolicy,
              cfg: SacConfig, next_obs, next_noise, alpha: float | None = None) -> float:
    """Bootstrapped target for a single segment.

    y = disc_return + (1 - terminal) * gamma^dt * (min target Q - alpha log pi),
    with the successor action freshly sampled at the segment's next state.
    """
    if segment.duration < 1:
        raise ValueError("segment duration must be >= 1")
    gamma = cfg.discount
    if cfg.time_discounting:
        y = discounted_return(segment.rewards, gamma)
    else:
        y = float(sum(segment.rewards))
    if segment.terminal:
        return y
    next_obs = np.asarray(next_obs, dtype=np.float64)
    act, logp = policy.act(next_obs, np.asarray(next_noise, dtype=np.float64))
    q_in = np.concatenate([next_obs, act])
    boot = float(critics.min_target_q(q_in)[0])
    a = cfg.entropy_coeff if alpha is None else alpha
    weight = gamma**segment.duration if cfg.time_discounting else gamma
    y += weight * (boot - float(a) * float(logp))
    if not math.isfinite(y):
        raise FloatingPointError("non-finite TD target")
    return y

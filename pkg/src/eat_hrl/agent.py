"""Two-level agent: timed subgoals, per-step bookkeeping, hindsight relabeling.

The high level emits a timed subgoal (target projection plus budget); the
low level is conditioned on the target and the remaining budget and acts
every original step. Both levels collect one reward per original time step.
Segments close on subgoal deadline, environment termination, or emergency
interruption, and hindsight relabeling rewrites goals (low level) and
actions (high level) once outcomes are known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    ActionState,
    HierarchySpec,
    OpenSegment,
    RewardSegment,
    TimedSubgoal,
    close_segment,
    remaining_subgoal,
)
from .envs.base import Env, StepOutcome
from .sac import SacConfig, SacLearner, Transition
from .termination import (
    GeometricStrategy,
    ProposalContext,
    QBasedStrategy,
    TerminationReport,
    eat_scan,
    should_terminate_geom,
    should_terminate_q,
)

__all__ = [
    "RelabelConfig",
    "TwoLevelAgent",
    "EatMonitor",
    "low_reward",
    "relabel_hindsight_goals",
    "relabel_hindsight_budget",
]

HIGH_LEVEL = 2
LOW_LEVEL = 1


@dataclass
class RelabelConfig:
    hindsight_goals: int = 3
    tolerance: float = 0.05
    # success at first touch instead of exactly at the deadline
    first_touch: bool = False

    def __post_init__(self) -> None:
        if self.hindsight_goals < 0:
            raise ValueError(f"hindsight_goals must be >= 0, got {self.hindsight_goals}")
        if self.tolerance <= 0.0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")


def low_reward(achieved: np.ndarray, target: np.ndarray, tolerance: float, at_deadline: bool) -> float:
    """Sparse deadline reward: 0 only when on target as the budget expires."""
    if at_deadline and float(np.linalg.norm(np.asarray(achieved) - np.asarray(target))) <= tolerance:
        return 0.0
    return -1.0


@dataclass
class _LowStep:
    """One original step of low-level experience, kept for relabeling."""

    env_obs: np.ndarray
    next_env_obs: np.ndarray
    action: np.ndarray
    achieved_next: np.ndarray
    remaining: int
    reward: float
    terminal: bool
    interrupted: bool = False


def relabel_hindsight_budget(segment: RewardSegment, achieved_final: np.ndarray,
                             tolerance: float) -> RewardSegment:
    """Rewrite a missed high-level action to what actually happened.

    The copy's action is (final achieved projection, actual elapsed
    duration); achieved segments come back unchanged.
    """
    action: TimedSubgoal = segment.action
    hit_deadline = segment.duration == action.budget
    on_target = float(np.linalg.norm(np.asarray(achieved_final) - action.target)) <= tolerance
    if hit_deadline and on_target:
        return segment
    new_action = TimedSubgoal(target=np.asarray(achieved_final, dtype=np.float64), budget=segment.duration)
    return replace(segment, action=new_action)


class TwoLevelAgent:
    """Policies, critics, and replay for both levels of a HiTS-style stack."""

    def __init__(
        self,
        env: Env,
        hierarchy: HierarchySpec,
        low_cfg: SacConfig,
        high_cfg: SacConfig,
        relabel: RelabelConfig,
        seed: int,
    ):
        if hierarchy.num_levels != 2:
            raise ValueError("this agent drives exactly two trained levels")
        self.env = env
        self.hierarchy = hierarchy
        self.low_spec = hierarchy.level(LOW_LEVEL)
        self.high_spec = hierarchy.level(HIGH_LEVEL)
        self.relabel = relabel

        self.n = env.subgoal_dim
        self.low_obs_dim = env.observation_dim + self.n + 1
        self.high_action_dim = self.n + 1

        rng = np.random.Generator(np.random.PCG64(seed))
        self.low = SacLearner(self.low_obs_dim, env.action_dim, low_cfg, int(rng.integers(2**63 - 1)))
        self.high = SacLearner(env.observation_dim, self.high_action_dim, high_cfg, int(rng.integers(2**63 - 1)))

        self.monitor: "EatMonitor | None" = None
        self._rng_noise = np.random.Generator(np.random.PCG64(int(rng.integers(2**63 - 1))))
        self._rng_expl = np.random.Generator(np.random.PCG64(int(rng.integers(2**63 - 1))))
        self._rng_relabel = np.random.Generator(np.random.PCG64(int(rng.integers(2**63 - 1))))
        self._reset_episode_state()

    def attach_rngs(self, noise: np.random.Generator, exploration: np.random.Generator,
                    relabel: np.random.Generator) -> None:
        """Wire the named random streams (the harness derives them)."""
        self._rng_noise = noise
        self._rng_expl = exploration
        self._rng_relabel = relabel

    # ------------------------------------------------------------------
    # encodings between policy space (-1, 1) and environment quantities
    # ------------------------------------------------------------------

    def decode_subgoal(self, u: np.ndarray) -> TimedSubgoal:
        u = np.clip(np.asarray(u, dtype=np.float64), -1.0, 1.0)
        lo, hi = self.env.subgoal_low, self.env.subgoal_high
        target = lo + (u[: self.n] + 1.0) / 2.0 * (hi - lo)
        top = self.high_spec.max_budget
        budget = int(math.floor(1.0 + (u[self.n] + 1.0) / 2.0 * (top - 1) + 0.5))
        return TimedSubgoal(target=target, budget=min(max(budget, 1), top))

    def encode_subgoal(self, subgoal: TimedSubgoal) -> np.ndarray:
        lo, hi = self.env.subgoal_low, self.env.subgoal_high
        u_target = 2.0 * (subgoal.target - lo) / (hi - lo) - 1.0
        top = self.high_spec.max_budget
        u_budget = 0.0 if top == 1 else 2.0 * (subgoal.budget - 1) / (top - 1) - 1.0
        return np.clip(np.concatenate([u_target, [u_budget]]), -1.0, 1.0)

    def scale_env_action(self, u: np.ndarray) -> np.ndarray:
        lo, hi = self.env.action_low, self.env.action_high
        return lo + (np.clip(u, -1.0, 1.0) + 1.0) / 2.0 * (hi - lo)

    def low_obs(self, env_obs: np.ndarray, subgoal: TimedSubgoal, remaining: int) -> np.ndarray:
        lo, hi = self.env.subgoal_low, self.env.subgoal_high
        g = 2.0 * (subgoal.target - lo) / (hi - lo) - 1.0
        b = remaining / self.high_spec.max_budget
        return np.concatenate([np.asarray(env_obs, dtype=np.float64), g, [b]])

    # ------------------------------------------------------------------
    # episode flow
    # ------------------------------------------------------------------

    def _reset_episode_state(self) -> None:
        self.t = 0
        self.obs: np.ndarray | None = None
        self.high_state: ActionState | None = None
        self.high_segment: OpenSegment | None = None
        self._episode_low: list[_LowStep] = []
        self._episode_done = False

    def begin_episode(self, obs: np.ndarray) -> None:
        self._reset_episode_state()
        self.obs = np.asarray(obs, dtype=np.float64)

    def snapshot_episode(self) -> tuple:
        """Capture in-flight episode state so evaluation can borrow the agent."""
        return (
            self.env,
            self.t,
            self.obs,
            self.high_state,
            self.high_segment,
            self._episode_low,
            self._episode_done,
        )

    def restore_episode(self, snapshot: tuple) -> None:
        (
            self.env,
            self.t,
            self.obs,
            self.high_state,
            self.high_segment,
            self._episode_low,
            self._episode_done,
        ) = snapshot

    def high_q(self, env_obs: np.ndarray, subgoal: TimedSubgoal) -> float:
        x = np.concatenate([np.asarray(env_obs, dtype=np.float64), self.encode_subgoal(subgoal)])
        return float(self.high.critics.min_q(x)[0])

    def select_high_action(self, train: bool) -> ActionState:
        """Draw a fresh random element and start a new timed subgoal."""
        if self.high_state is not None:
            raise RuntimeError("a high-level action is already live")
        noise = self._rng_noise.standard_normal(self.high_action_dim) if train else np.zeros(self.high_action_dim)
        u, _ = self.high.policy.act(self.obs, noise)
        if train and self._rng_expl.uniform() < self.high.cfg.random_action_fraction:
            u = self._rng_expl.uniform(-1.0, 1.0, size=self.high_action_dim)
        subgoal = self.decode_subgoal(u)
        self.high_state = ActionState(action=subgoal, start_time=self.t, frozen_noise=noise, level=HIGH_LEVEL)
        self.high_segment = OpenSegment(start_state=self.obs, action=subgoal, start_time=self.t)
        if self.monitor is not None:
            self.monitor.notify_action_start(self.obs, subgoal, train)
        return self.high_state

    def propose_high(self) -> TimedSubgoal:
        """Policy at the current state with the frozen random element."""
        if self.high_state is None:
            raise RuntimeError("no live high-level action")
        u, _ = self.high.policy.act(self.obs, self.high_state.frozen_noise)
        return self.decode_subgoal(u)

    def agent_step(self, train: bool = True) -> StepOutcome:
        """One original time step with full two-level bookkeeping."""
        if self._episode_done:
            raise RuntimeError("episode finished; begin a new one")
        if self.high_state is None:
            self.select_high_action(train)
        state = self.high_state
        subgoal = state.action
        remaining = remaining_subgoal(state, self.t).budget
        ll_obs = self.low_obs(self.obs, subgoal, remaining)

        if train:
            if self._rng_expl.uniform() < self.low.cfg.random_action_fraction:
                u = self._rng_expl.uniform(-1.0, 1.0, size=self.env.action_dim)
            else:
                if self._rng_expl.uniform() < self.low.cfg.deterministic_fraction:
                    eps = np.zeros(self.env.action_dim)
                else:
                    eps = self._rng_noise.standard_normal(self.env.action_dim)
                u, _ = self.low.policy.act(ll_obs, eps)
        else:
            u, _ = self.low.policy.act(ll_obs, np.zeros(self.env.action_dim))

        outcome = self.env.step(self.scale_env_action(u))
        prev_obs = self.obs
        self.obs = outcome.observation
        self.t += 1

        elapsed = self.t - state.start_time
        at_deadline = elapsed >= subgoal.budget
        achieved_next = self.env.achieved_projection(outcome.observation)
        if self.relabel.first_touch and not at_deadline:
            at_deadline = float(np.linalg.norm(achieved_next - subgoal.target)) <= self.relabel.tolerance
        r_low = low_reward(achieved_next, subgoal.target, self.relabel.tolerance, at_deadline)
        ll_terminal = at_deadline or outcome.done

        self.high_segment.append_reward(outcome.reward)

        step_rec = _LowStep(
            env_obs=prev_obs,
            next_env_obs=outcome.observation,
            action=np.asarray(u, dtype=np.float64),
            achieved_next=achieved_next,
            remaining=remaining,
            reward=r_low,
            terminal=ll_terminal,
        )
        self._episode_low.append(step_rec)
        if train:
            self._store_low(step_rec, subgoal)

        if outcome.done:
            success_done = self.env.success(outcome.observation)
            self._close_high(terminal=success_done, interrupted=False, train=train)
            self._episode_done = True
            if train:
                for tr in relabel_hindsight_goals(self._episode_low, self.relabel, self._rng_relabel, self):
                    self.low.buffer.add(tr)
        elif at_deadline:
            self._close_high(terminal=False, interrupted=False, train=train)

        return outcome

    def _store_low(self, rec: _LowStep, subgoal: TimedSubgoal) -> None:
        obs = self.low_obs(rec.env_obs, subgoal, rec.remaining)
        next_obs = self.low_obs(rec.next_env_obs, subgoal, max(rec.remaining - 1, 0))
        self.low.buffer.add(
            Transition(
                obs=obs,
                action=rec.action,
                disc_return=rec.reward,
                reward_sum=rec.reward,
                dt=1,
                next_obs=next_obs,
                terminal=rec.terminal,
            )
        )

    def _close_high(self, terminal: bool, interrupted: bool, train: bool) -> RewardSegment:
        segment = close_segment(self.high_segment, self.obs, terminal=terminal, interrupted=interrupted)
        self.high_segment = None
        self.high_state = None
        if train:
            self._store_high(segment)
        return segment

    def _store_high(self, segment: RewardSegment) -> None:
        gamma = self.high.cfg.discount
        self.high.buffer.add_segment(
            segment,
            obs=segment.start_state,
            action=self.encode_subgoal(segment.action),
            next_obs=segment.next_state,
            gamma=gamma,
        )
        achieved_final = self.env.achieved_projection(segment.next_state)
        relabeled = relabel_hindsight_budget(segment, achieved_final, self.relabel.tolerance)
        if relabeled is not segment:
            self.high.buffer.add_segment(
                relabeled,
                obs=relabeled.start_state,
                action=self.encode_subgoal(relabeled.action),
                next_obs=relabeled.next_state,
                gamma=gamma,
            )

    # ------------------------------------------------------------------
    # emergency termination plumbing
    # ------------------------------------------------------------------

    def interrupt_high(self, train: bool) -> RewardSegment:
        """Close the live action as interrupted and designate a fresh one."""
        if self._episode_low:
            self._episode_low[-1].interrupted = True
        segment = self._close_high(terminal=False, interrupted=True, train=train)
        self.select_high_action(train)
        return segment

    @property
    def episode_done(self) -> bool:
        return self._episode_done


def relabel_hindsight_goals(episode: list[_LowStep], cfg: RelabelConfig,
                            rng: np.random.Generator, agent: TwoLevelAgent) -> list[Transition]:
    """Hindsight goal relabeling with the future strategy.

    For each stored low-level step, up to ``hindsight_goals`` copies are
    built whose target is an achieved projection from a later step of the
    episode and whose deadline is moved to that step, with rewards and
    terminal flags recomputed under the new goal. Originals stay in replay.
    """
    out: list[Transition] = []
    if cfg.hindsight_goals == 0 or not episode:
        return out
    total = len(episode)
    top = agent.high_spec.max_budget
    for t, rec in enumerate(episode):
        horizon = min(t + top, total)
        if t + 1 > horizon:
            continue
        for _ in range(cfg.hindsight_goals):
            j = int(rng.integers(t + 1, horizon + 1))
            new_goal = episode[j - 1].achieved_next
            subgoal = TimedSubgoal(target=new_goal, budget=max(j - t, 1))
            hit = t + 1 == j
            reward = low_reward(rec.achieved_next, new_goal, cfg.tolerance, at_deadline=hit)
            obs = agent.low_obs(rec.env_obs, subgoal, j - t)
            next_obs = agent.low_obs(rec.next_env_obs, subgoal, j - t - 1)
            out.append(
                Transition(
                    obs=obs,
                    action=rec.action,
                    disc_return=reward,
                    reward_sum=reward,
                    dt=1,
                    next_obs=next_obs,
                    terminal=hit,
                )
            )
    return out


class EatMonitor:
    """Per-step termination monitor wired to a two-level agent."""

    def __init__(self, agent: TwoLevelAgent, strategy: QBasedStrategy | GeometricStrategy):
        self.agent = agent
        self.strategy = strategy
        self.reports: list[TerminationReport] = []
        agent.monitor = self

    @property
    def strategy_name(self) -> str:
        return "q" if isinstance(self.strategy, QBasedStrategy) else "geom"

    def notify_action_start(self, env_obs: np.ndarray, subgoal: TimedSubgoal, train: bool) -> None:
        # evaluation rollouts must not move the running threshold estimate
        if train and isinstance(self.strategy, QBasedStrategy):
            self.strategy.update(self.agent.high_q(env_obs, subgoal))

    def _evaluate(self, proposal: TimedSubgoal) -> tuple[bool, float]:
        agent = self.agent
        ctx = ProposalContext(
            proposal=proposal,
            current_view=remaining_subgoal(agent.high_state, agent.t),
            x_state=agent.env.achieved_projection(agent.obs),
        )
        if isinstance(self.strategy, QBasedStrategy):
            q_prop = agent.high_q(agent.obs, ctx.proposal)
            q_cur = agent.high_q(agent.obs, ctx.current_view)
            return should_terminate_q(q_prop, q_cur, self.strategy), q_prop - q_cur
        fire = should_terminate_geom(
            ctx.proposal.target, ctx.proposal.budget,
            ctx.current_view.target, ctx.current_view.budget,
            ctx.x_state, self.strategy.alpha,
        )
        v1 = (ctx.proposal.target - ctx.x_state) / ctx.proposal.budget
        v2 = (ctx.current_view.target - ctx.x_state) / ctx.current_view.budget
        gap = float(np.linalg.norm(v1 - v2))
        return fire, gap

    def scan(self, train: bool = True) -> TerminationReport:
        """Run the top-down termination scan at the current time."""
        agent = self.agent
        if agent.high_state is None or agent.episode_done:
            return TerminationReport(level=None, time=agent.t, strategy=self.strategy_name)

        monitor = self

        class _Level:
            level = HIGH_LEVEL

            def propose(self) -> TimedSubgoal:
                return agent.propose_high()

            def evaluate(self, proposal: TimedSubgoal) -> tuple[bool, float]:
                return monitor._evaluate(proposal)

        def interrupt(level: int, proposal: TimedSubgoal, gap: float) -> None:
            agent.interrupt_high(train)

        report = eat_scan([_Level()], interrupt, now=agent.t, strategy_name=self.strategy_name)
        if report.fired and train:
            self.reports.append(report)
        return report

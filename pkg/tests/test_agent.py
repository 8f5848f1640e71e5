import numpy as np

from eat_hrl.agent import (
    EatMonitor,
    RelabelConfig,
    TwoLevelAgent,
    low_reward,
    relabel_hindsight_budget,
    relabel_hindsight_goals,
)
from eat_hrl.core import HierarchySpec, LevelSpec, RewardSegment, TimedSubgoal
from eat_hrl.envs import make_env
from eat_hrl.sac import SacConfig
from eat_hrl.termination import GeometricStrategy, QBasedStrategy


def build_agent(env_name="NoisyDrawbridge", max_budget=200, hindsight_goals=3,
                random_fraction=0.0, seed=7):
    env = make_env(env_name)
    hierarchy = HierarchySpec(
        (
            LevelSpec(1, 0.99, env.subgoal_dim, max_budget, env.goal_tolerance),
            LevelSpec(2, 0.999, env.subgoal_dim, max_budget, env.goal_tolerance),
        )
    )
    low = SacConfig(discount=0.99, entropy_coeff=0.1, batch_size=8,
                    random_action_fraction=random_fraction)
    high = SacConfig(discount=0.999, entropy_coeff=0.1, batch_size=8,
                     random_action_fraction=random_fraction)
    relabel = RelabelConfig(hindsight_goals=hindsight_goals, tolerance=env.goal_tolerance)
    agent = TwoLevelAgent(env, hierarchy, low, high, relabel, seed=seed)
    rng = np.random.default_rng(seed)
    agent.attach_rngs(
        noise=np.random.default_rng(seed + 1),
        exploration=np.random.default_rng(seed + 2),
        relabel=np.random.default_rng(seed + 3),
    )
    return agent, env


class TestEncodings:
    def test_budget_endpoints(self):
        agent, _ = build_agent(max_budget=200)
        lo = agent.decode_subgoal(np.array([0.0, -1.0]))
        hi = agent.decode_subgoal(np.array([0.0, 1.0]))
        assert lo.budget == 1
        assert hi.budget == 200

    def test_target_affine_endpoints(self):
        agent, env = build_agent()
        low = agent.decode_subgoal(np.array([-1.0, 0.0]))
        high = agent.decode_subgoal(np.array([1.0, 0.0]))
        assert np.allclose(low.target, env.subgoal_low)
        assert np.allclose(high.target, env.subgoal_high)

    def test_encode_decode_round_trip(self):
        agent, _ = build_agent(max_budget=50)
        rng = np.random.default_rng(0)
        for _ in range(100):
            u = rng.uniform(-1, 1, size=2)
            sg = agent.decode_subgoal(u)
            back = agent.decode_subgoal(agent.encode_subgoal(sg))
            assert np.allclose(back.target, sg.target, atol=1e-12)
            assert back.budget == sg.budget

    def test_deterministic_selection_is_repeatable(self):
        agent, env = build_agent()
        obs = env.reset(3)
        agent.begin_episode(obs)
        st = agent.select_high_action(train=False)
        first = st.action

        agent2, env2 = build_agent()
        obs2 = env2.reset(3)
        agent2.begin_episode(obs2)
        st2 = agent2.select_high_action(train=False)
        assert np.array_equal(first.target, st2.action.target)
        assert first.budget == st2.action.budget


class TestLowReward:
    def test_exact_hit_at_deadline(self):
        assert low_reward(np.array([0.5]), np.array([0.5]), 0.05, at_deadline=True) == 0.0

    def test_far_mid_budget(self):
        assert low_reward(np.array([0.1]), np.array([0.9]), 0.05, at_deadline=False) == -1.0

    def test_within_tolerance_before_deadline_still_penalized(self):
        assert low_reward(np.array([0.5]), np.array([0.51]), 0.05, at_deadline=False) == -1.0

    def test_within_tolerance_at_deadline(self):
        assert low_reward(np.array([0.5]), np.array([0.51]), 0.05, at_deadline=True) == 0.0


class TestPropose:
    def test_proposal_equals_selection_before_anything_moves(self):
        agent, env = build_agent()
        obs = env.reset(5)
        agent.begin_episode(obs)
        st = agent.select_high_action(train=True)
        prop = agent.propose_high()
        assert np.array_equal(prop.target, st.action.target)
        assert prop.budget == st.action.budget

    def test_repeated_proposals_identical(self):
        agent, env = build_agent()
        agent.begin_episode(env.reset(5))
        agent.select_high_action(train=True)
        p1, p2 = agent.propose_high(), agent.propose_high()
        assert np.array_equal(p1.target, p2.target) and p1.budget == p2.budget

    def test_parameter_perturbation_moves_proposal(self):
        agent, env = build_agent()
        agent.begin_episode(env.reset(5))
        st = agent.select_high_action(train=True)
        agent.high.policy.net.weights[0][:] += 0.5
        prop = agent.propose_high()
        moved = (not np.array_equal(prop.target, st.action.target)) or prop.budget != st.action.budget
        assert moved


class TestBookkeeping:
    def test_budget_one_closes_after_single_step(self):
        agent, env = build_agent(max_budget=1)
        agent.begin_episode(env.reset(0))
        assert len(agent.high.buffer) == 0
        agent.agent_step(train=True)
        # closed at its deadline after exactly one step
        stored = agent.high.buffer._data[0]
        assert stored.dt == 1
        assert agent.high_state is None

    def test_high_segments_partition_episode(self):
        agent, env = build_agent(max_budget=25)
        closed = []
        original_close = agent._close_high

        def tracking_close(terminal, interrupted, train):
            seg = original_close(terminal, interrupted, train)
            closed.append(seg)
            return seg

        agent._close_high = tracking_close
        agent.begin_episode(env.reset(1))
        env_rewards = []
        while not agent.episode_done and agent.t < 400:
            out = agent.agent_step(train=True)
            env_rewards.append(out.reward)
        assert sum(seg.duration for seg in closed) == (agent.t if agent.high_segment is None else
                                                       agent.t - agent.high_segment.duration)
        flat = [r for seg in closed for r in seg.rewards]
        assert flat == env_rewards[: len(flat)]

    def test_success_termination_marks_terminal(self):
        agent, env = build_agent(env_name="Drawbridge", max_budget=200)
        closed = []
        original_close = agent._close_high

        def tracking_close(terminal, interrupted, train):
            seg = original_close(terminal, interrupted, train)
            closed.append(seg)
            return seg

        agent._close_high = tracking_close
        # drive straight to the goal with a scripted low level
        agent.begin_episode(env.reset(0))
        agent.low.policy.net.biases[-1][:] = [10.0, 0.0]  # saturated mean action
        while not agent.episode_done:
            agent.agent_step(train=False)
        assert closed[-1].terminal
        assert env.success(closed[-1].next_state)
        # the final low-level record is terminal as well
        assert agent._episode_low[-1].terminal

    def test_budget_channel_decreases_within_action(self):
        agent, env = build_agent(max_budget=40)
        agent.begin_episode(env.reset(2))
        values = []
        start_t = None
        for _ in range(40):
            state = agent.high_state
            agent.agent_step(train=True)
            if state is not None:
                if start_t is None:
                    start_t = state.start_time
                if agent.high_state is state:
                    values.append(agent.low_obs(agent.obs, state.action,
                                                state.action.budget - (agent.t - state.start_time))[-1])
        assert all(b2 < b1 or b1 <= 1.0 / 40 for b1, b2 in zip(values, values[1:]))

    def test_exactly_one_open_high_segment(self):
        agent, env = build_agent(max_budget=10)
        agent.begin_episode(env.reset(3))
        for _ in range(60):
            if agent.episode_done:
                break
            agent.agent_step(train=True)
            if not agent.episode_done:
                assert (agent.high_state is None) == (agent.high_segment is None)


class TestInterruption:
    def test_interrupt_closes_with_flag_and_duration(self):
        agent, env = build_agent(max_budget=100)
        # pin the budget head high so the first action runs long
        agent.high.policy.net.biases[-1][1] = 10.0
        agent.begin_episode(env.reset(4))
        for _ in range(7):
            agent.agent_step(train=True)
        state = agent.high_state
        assert state is not None and state.start_time == 0
        seg = agent.interrupt_high(train=True)
        assert seg.interrupted and not seg.terminal
        assert seg.duration == 7 - state.start_time
        # a fresh action with fresh noise is live immediately
        assert agent.high_state is not None
        assert agent.high_state.start_time == 7
        assert not np.array_equal(agent.high_state.frozen_noise, state.frozen_noise)

    def test_monitor_cascade_keeps_exactly_one_live_action(self):
        agent, env = build_agent(max_budget=100)
        monitor = EatMonitor(agent, GeometricStrategy(alpha=0.0))  # hair trigger
        agent.begin_episode(env.reset(4))
        fired = 0
        for _ in range(200):
            if agent.episode_done:
                break
            agent.agent_step(train=True)
            if not agent.episode_done:
                report = monitor.scan(train=True)
                fired += int(report.fired)
                if report.fired:
                    # the cascade designates a fresh action immediately
                    assert agent.high_state is not None
        assert fired > 0
        interrupted_segments = [
            tr.segment for tr in agent.high.buffer._data if tr.segment is not None and tr.segment.interrupted
        ]
        assert interrupted_segments
        assert all(seg.duration >= 1 for seg in interrupted_segments)

    def test_never_firing_monitor_has_no_observer_effect(self):
        def run(with_monitor):
            agent, env = build_agent(max_budget=50, seed=11)
            if with_monitor:
                EatMonitor(agent, GeometricStrategy(alpha=2.0))  # provably never fires
            agent.begin_episode(env.reset(9))
            stream = []
            for _ in range(300):
                if agent.episode_done:
                    break
                out = agent.agent_step(train=True)
                if agent.monitor is not None and not agent.episode_done:
                    report = agent.monitor.scan(train=True)
                    assert not report.fired
                stream.append(out.observation.copy())
            return stream

        a, b = run(False), run(True)
        assert len(a) == len(b)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_q_monitor_updates_stats_at_starts_only_in_training(self):
        agent, env = build_agent(max_budget=10)
        strategy = QBasedStrategy(alpha=0.5)
        monitor = EatMonitor(agent, strategy)
        agent.begin_episode(env.reset(0))
        agent.select_high_action(train=True)
        assert strategy.initialized
        mean_before = strategy.mean
        agent2, env2 = build_agent(max_budget=10)
        strategy2 = QBasedStrategy(alpha=0.5)
        EatMonitor(agent2, strategy2)
        agent2.begin_episode(env2.reset(0))
        agent2.select_high_action(train=False)
        assert not strategy2.initialized


class TestHindsightGoals:
    def run_short_episode(self, agent, env, steps=30):
        agent.begin_episode(env.reset(6))
        for _ in range(steps):
            if agent.episode_done:
                break
            agent.agent_step(train=True)
        return list(agent._episode_low)

    def test_zero_goals_yield_nothing(self):
        agent, env = build_agent(hindsight_goals=0)
        episode = self.run_short_episode(agent, env)
        extra = relabel_hindsight_goals(episode, agent.relabel, np.random.default_rng(0), agent)
        assert extra == []

    def test_three_copies_per_step(self):
        agent, env = build_agent(hindsight_goals=3)
        episode = self.run_short_episode(agent, env, steps=20)
        extra = relabel_hindsight_goals(episode, agent.relabel, np.random.default_rng(0), agent)
        assert len(extra) == 3 * len(episode)

    def test_deadline_projection_relabel_is_success(self):
        agent, env = build_agent(hindsight_goals=3)
        episode = self.run_short_episode(agent, env, steps=20)
        extra = relabel_hindsight_goals(episode, agent.relabel, np.random.default_rng(1), agent)
        hits = [tr for tr in extra if tr.terminal]
        assert hits
        assert all(tr.disc_return == 0.0 for tr in hits)

    def test_relabel_preserves_state_and_action(self):
        agent, env = build_agent(hindsight_goals=2)
        episode = self.run_short_episode(agent, env, steps=15)
        extra = relabel_hindsight_goals(episode, agent.relabel, np.random.default_rng(2), agent)
        d = env.observation_dim
        per_step = 2
        for i, rec in enumerate(episode):
            for k in range(per_step):
                tr = extra[i * per_step + k]
                assert np.array_equal(tr.obs[:d], rec.env_obs)
                assert np.array_equal(tr.next_obs[:d], rec.next_env_obs)
                assert np.array_equal(tr.action, rec.action)

    def test_relabeled_budgets_stay_in_range(self):
        agent, env = build_agent(hindsight_goals=3, max_budget=25)
        episode = self.run_short_episode(agent, env, steps=60)
        extra = relabel_hindsight_goals(episode, agent.relabel, np.random.default_rng(3), agent)
        for tr in extra:
            assert 0.0 < tr.obs[-1] <= 1.0
            assert 0.0 <= tr.next_obs[-1] <= 1.0


class TestHindsightBudget:
    def make_segment(self, target, budget, duration, final_projection):
        start = np.zeros(3)
        end = np.array([final_projection, 0.0, 0.0])
        return RewardSegment(
            start_state=start,
            action=TimedSubgoal(target=np.array([target]), budget=budget),
            rewards=(-1.0,) * duration,
            next_state=end,
            terminal=False,
            interrupted=False,
        )

    def test_achieved_segment_unchanged(self):
        seg = self.make_segment(target=0.5, budget=4, duration=4, final_projection=0.5)
        out = relabel_hindsight_budget(seg, np.array([0.5]), tolerance=0.05)
        assert out is seg

    def test_missed_segment_rewritten_to_reality(self):
        seg = self.make_segment(target=0.9, budget=200, duration=37, final_projection=0.4)
        out = relabel_hindsight_budget(seg, np.array([0.4]), tolerance=0.05)
        assert out is not seg
        assert out.action.budget == 37
        assert np.allclose(out.action.target, [0.4])

    def test_states_and_rewards_preserved(self):
        seg = self.make_segment(target=0.9, budget=50, duration=12, final_projection=0.2)
        out = relabel_hindsight_budget(seg, np.array([0.2]), tolerance=0.05)
        assert np.array_equal(out.start_state, seg.start_state)
        assert np.array_equal(out.next_state, seg.next_state)
        assert out.rewards == seg.rewards
        assert out.terminal == seg.terminal

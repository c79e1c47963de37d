import numpy as np
import pytest

from retention import (MetaAction, NumericError, Plan, PlannerConfig, QTable,
                       SchemaError, choose_action, discretize, extract_plan,
                       load_qtable, q_update, save_qtable, step, train_planner)
from retention import ChecksumError, EmployeeAgent

from synthetic import FirstFeatureStayModel, monotone_instance, single_lift_agent

# 0.999 chi-square quantile, 3 degrees of freedom
CHI2_CRIT_DF3 = 16.266


def empty_qtable(n_actions=3, bin_width=0.01, target_bin=80):
    return QTable.zeros(bin_width, tuple(f"a{i}" for i in range(n_actions)), target_bin)


class TestDiscretize:
    def test_floor_convention(self):
        assert discretize(0.654, 0.01) == 65

    def test_lower_boundary(self):
        assert discretize(0.0, 0.01) == 0

    def test_one_clamps_into_last_bin(self):
        assert discretize(1.0, 0.01) == 99

    def test_out_of_range_rejected(self):
        with pytest.raises(NumericError):
            discretize(-0.1, 0.01)
        with pytest.raises(NumericError):
            discretize(1.1, 0.01)


class TestQUpdate:
    def test_worked_single_update(self):
        q = empty_qtable()
        updated = q_update(q, s_bin=65, a=1, reward=0.05, s_next_bin=66,
                           a_next=0, alpha=0.1, gamma=0.9)
        assert updated == pytest.approx(0.005, abs=1e-15)
        # exactly the cited arithmetic, re-evaluated independently
        assert updated == 0.0 + 0.1 * (0.05 + 0.9 * 0.0 - 0.0)

    def test_zero_alpha_changes_nothing(self):
        q = empty_qtable()
        q.values[10, 2] = 0.7
        updated = q_update(q, 10, 2, reward=1.0, s_next_bin=11, a_next=0,
                           alpha=0.0, gamma=0.9)
        assert updated == 0.7
        assert q.values[10, 2] == 0.7

    def test_terminal_next_bin_contributes_zero(self):
        q = empty_qtable(target_bin=80)
        q.values[85, :] = 123.0  # would leak into the target if not terminal
        q.values[60, 1] = 0.2
        updated = q_update(q, 60, 1, reward=0.04, s_next_bin=85, a_next=0,
                           alpha=0.5, gamma=0.9)
        assert updated == 0.2 + 0.5 * (0.04 - 0.2)

    def test_only_one_cell_changes(self):
        q = empty_qtable()
        before = q.values.copy()
        q_update(q, 40, 0, reward=0.01, s_next_bin=41, a_next=2,
                 alpha=0.1, gamma=0.9)
        changed = np.argwhere(q.values != before)
        assert changed.tolist() == [[40, 0]]

    def test_randomized_updates_match_direct_reevaluation(self):
        rng = np.random.default_rng(7)
        q = empty_qtable(n_actions=4)
        for _ in range(500):
            s, a = int(rng.integers(0, 80)), int(rng.integers(0, 4))
            ns, na = int(rng.integers(0, 100)), int(rng.integers(0, 4))
            alpha, gamma = rng.uniform(0, 1), rng.uniform(0, 1)
            r = rng.normal()
            current = q.values[s, a]
            next_q = 0.0 if ns >= q.target_bin else q.values[ns, na]
            expected = current + alpha * (r + gamma * next_q - current)
            assert q_update(q, s, a, r, ns, na, alpha, gamma) == expected

    def test_index_out_of_range(self):
        q = empty_qtable()
        with pytest.raises(SchemaError):
            q_update(q, 100, 0, 0.0, 10, 0, 0.1, 0.9)
        with pytest.raises(SchemaError):
            q_update(q, 10, 3, 0.0, 10, 0, 0.1, 0.9)

    def test_nonfinite_reward_aborts(self):
        q = empty_qtable()
        with pytest.raises(NumericError):
            q_update(q, 10, 0, float("inf"), 11, 0, 0.1, 0.9)


class TestChooseAction:
    def test_greedy_breaks_ties_toward_lowest_index(self):
        q = empty_qtable()
        q.values[5] = [0.1, 0.7, 0.7]
        assert choose_action(q, 5, epsilon=0.0) == 1

    def test_all_zero_row_picks_first_action(self):
        assert choose_action(empty_qtable(), 9, epsilon=0.0) == 0

    def test_full_exploration_is_uniform(self):
        q = empty_qtable(n_actions=4)
        q.values[3] = [9.0, 0.0, 0.0, 0.0]  # greedy would always take 0
        rng = np.random.default_rng(123)
        counts = np.zeros(4)
        draws = 10_000
        for _ in range(draws):
            counts[choose_action(q, 3, epsilon=1.0, rng=rng)] += 1
        expected = draws / 4
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < CHI2_CRIT_DF3

    def test_exploration_requires_rng(self):
        with pytest.raises(SchemaError):
            choose_action(empty_qtable(), 0, epsilon=0.5)


class TestStep:
    def test_clamped_action_keeps_state_exactly(self):
        agent, model = single_lift_agent(start=0.65)
        capped = MetaAction(name="capped", target_feature=0, delta=0.05,
                            bounds=(0.0, 0.65))
        s_next, feats = step(model, agent.features, capped)
        assert s_next == agent.state
        assert np.array_equal(feats, agent.features)

    def test_step_is_deterministic(self):
        agent, model = single_lift_agent()
        action = agent.actions[0]
        first = step(model, agent.features, action)
        second = step(model, agent.features, action)
        assert first[0] == second[0]
        assert np.array_equal(first[1], second[1])

    def test_step_composes_apply_and_rescore(self):
        agent, model = single_lift_agent(start=0.5, lift=0.2)
        s_next, feats = step(model, agent.features, agent.actions[0])
        assert s_next == pytest.approx(0.7, abs=1e-12)
        assert feats[0] == pytest.approx(0.7, abs=1e-12)


class TestTrainPlanner:
    def test_learns_the_only_useful_action(self):
        agent, model = single_lift_agent(start=0.65, lift=0.06)
        q, log = train_planner(model, agent, 0.80, PlannerConfig(seed=0))
        plan = extract_plan(model, agent, 0.80, q)
        # hand trajectory: 0.65 -> 0.71 -> 0.77 -> 0.83
        assert plan.actions == ("lift", "lift", "lift")
        assert plan.reached
        states = [plan.trajectory[0][0]] + [after for _, after in plan.trajectory]
        assert states == pytest.approx([0.65, 0.71, 0.77, 0.83], abs=1e-12)
        # greedy choice is the lift action in every bin the rollout visits
        for before, _ in plan.trajectory:
            assert choose_action(q, discretize(before, q.bin_width), 0.0) == 0

    def test_invalid_episode_count_rejected(self):
        with pytest.raises(SchemaError):
            PlannerConfig(episodes=0)

    def test_precondition_state_below_target(self):
        agent, model = single_lift_agent(start=0.85)
        with pytest.raises(SchemaError):
            train_planner(model, agent, 0.80, PlannerConfig())

    def test_episode_steps_trend_downward(self):
        model, agent, target = monotone_instance(seed=4)
        q, log = train_planner(model, agent, target, PlannerConfig(seed=4))
        first = np.median([r.steps for r in log[:10]])
        last = np.median([r.steps for r in log[-10:]])
        assert last <= first

    def test_training_log_covers_every_episode(self):
        agent, model = single_lift_agent()
        cfg = PlannerConfig(episodes=37, seed=1)
        _, log = train_planner(model, agent, 0.80, cfg)
        assert [r.episode for r in log] == list(range(37))
        assert all(r.steps >= 1 for r in log)

    def test_cycle_guard_caps_episode_length(self):
        # the only action lowers the state, so the target is unreachable
        actions = (MetaAction(name="down", target_feature=0, delta=-0.05,
                              bounds=(0.0, 1.0)),)
        agent = EmployeeAgent(features=np.array([0.5]), state=0.5, meta_cost=1.0,
                              actions=actions)
        cfg = PlannerConfig(episodes=3, max_steps_per_episode=25, seed=0)
        _, log = train_planner(FirstFeatureStayModel(), agent, 0.8, cfg)
        assert all(r.steps == 25 for r in log)


class TestRealModelStep:
    def test_catalog_actions_keep_state_in_the_open_interval(self, default_model):
        import yaml
        from retention import load_catalog
        from conftest import CATALOG_YAML, EMPLOYEE_YAML

        employee = yaml.safe_load(EMPLOYEE_YAML.read_text())["features"]
        features = default_model.codec.encode_features(employee)
        catalog = load_catalog(CATALOG_YAML, default_model.codec.feature_names,
                               default_bounds=default_model.default_bounds())
        for action in catalog.actions:
            s_next, _ = step(default_model, features, action)
            assert 0.0 < s_next < 1.0


class TestExtractPlan:
    def test_already_at_target_means_empty_plan(self):
        agent, model = single_lift_agent(start=0.82)
        q = QTable.zeros(0.01, ("lift", "null0", "null1"), discretize(0.80, 0.01))
        plan = extract_plan(model, agent, 0.80, q)
        assert plan.actions == ()
        assert plan.total_cost == 0.0
        assert plan.reached

    def test_rollout_is_deterministic(self):
        model, agent, target = monotone_instance(seed=9)
        q, _ = train_planner(model, agent, target, PlannerConfig(seed=9))
        a = extract_plan(model, agent, target, q)
        b = extract_plan(model, agent, target, q)
        assert a == b

    def test_unreachable_reported_via_flag(self):
        actions = (MetaAction(name="down", target_feature=0, delta=-0.05,
                              bounds=(0.0, 1.0)),)
        agent = EmployeeAgent(features=np.array([0.5]), state=0.5, meta_cost=2.0,
                              actions=actions)
        q = QTable.zeros(0.01, ("down",), discretize(0.9, 0.01))
        plan = extract_plan(FirstFeatureStayModel(), agent, 0.9, q, max_steps=7)
        assert not plan.reached
        assert len(plan) == 7
        assert plan.total_cost == 14.0

    def test_cost_is_meta_cost_times_length(self):
        model, agent, target = monotone_instance(seed=2)
        q, _ = train_planner(model, agent, target, PlannerConfig(seed=2))
        plan = extract_plan(model, agent, target, q)
        assert plan.total_cost == agent.meta_cost * len(plan.actions)

    def test_trajectory_chains_and_rewards_telescope(self):
        model, agent, target = monotone_instance(seed=5)
        q, _ = train_planner(model, agent, target, PlannerConfig(seed=5))
        plan = extract_plan(model, agent, target, q)
        assert plan.reached
        for (_, after), (before, _) in zip(plan.trajectory, plan.trajectory[1:]):
            assert after == before
        rewards = [after - before for before, after in plan.trajectory]
        final = plan.trajectory[-1][1]
        assert abs(sum(rewards) - (final - agent.state)) < 1e-12


class TestPlanInvariants:
    def test_mismatched_trajectory_rejected(self):
        with pytest.raises(SchemaError):
            Plan(actions=("a",), trajectory=(), total_cost=1.0, reached=False)

    def test_broken_chain_rejected(self):
        with pytest.raises(SchemaError):
            Plan(actions=("a", "b"),
                 trajectory=((0.1, 0.2), (0.25, 0.3)),
                 total_cost=2.0, reached=False)


class TestQTableFile:
    def test_round_trip(self, tmp_path):
        model, agent, target = monotone_instance(seed=3)
        q, _ = train_planner(model, agent, target, PlannerConfig(seed=3))
        path = tmp_path / "qtable.json"
        save_qtable(q, path)
        loaded = load_qtable(path)
        assert np.array_equal(loaded.values, q.values)
        assert loaded.bin_width == q.bin_width
        assert loaded.action_names == q.action_names
        assert loaded.target_bin == q.target_bin

    def test_corruption_detected(self, tmp_path):
        model, agent, target = monotone_instance(seed=3)
        q, _ = train_planner(model, agent, target, PlannerConfig(seed=3))
        path = tmp_path / "qtable.json"
        save_qtable(q, path)
        body = path.read_text().replace('"bin_width": 0.01', '"bin_width": 0.02')
        path.write_text(body)
        with pytest.raises(ChecksumError):
            load_qtable(path)


class TestEpsilonSchedule:
    def test_linear_decay_endpoints(self):
        cfg = PlannerConfig(epsilon=1.0, epsilon_end=0.01, episodes=100)
        assert cfg.epsilon_at(0) == 1.0
        assert cfg.epsilon_at(99) == pytest.approx(0.01)
        assert cfg.epsilon_at(50) == pytest.approx(0.5, abs=0.01)

    def test_single_episode_uses_start_epsilon(self):
        cfg = PlannerConfig(epsilon=0.3, episodes=1)
        assert cfg.epsilon_at(0) == 0.3

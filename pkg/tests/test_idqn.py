import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from teamcurriculum.approximator import NonFiniteError, QNetwork, forward
from teamcurriculum.idqn import (
    EpsilonSchedule,
    IDQNLearner,
    LearnerConfig,
    ReplayBuffer,
    epsilon_at,
    greedy_action,
    select_action,
    td_target,
    td_targets,
)

CHI2_DF5_P001 = 20.515


class TestEpsilon:
    def test_endpoints(self):
        sched = EpsilonSchedule(0.9, 0.05, horizon=10_000)
        assert epsilon_at(sched, 0) == 0.9
        assert epsilon_at(sched, 9_999) == 0.05
        assert epsilon_at(sched, 50_000) == 0.05

    def test_midpoint(self):
        assert epsilon_at(EpsilonSchedule(0.9, 0.05, horizon=3), 1) == pytest.approx(0.475)

    def test_exponential_endpoints(self):
        sched = EpsilonSchedule(0.9, 0.05, horizon=101, kind="exponential")
        assert epsilon_at(sched, 0) == pytest.approx(0.9)
        assert epsilon_at(sched, 100) == pytest.approx(0.05)
        assert epsilon_at(sched, 50) == pytest.approx(np.sqrt(0.9 * 0.05))

    def test_negative_episode(self):
        with pytest.raises(ValueError):
            epsilon_at(EpsilonSchedule(), -1)

    @pytest.mark.parametrize("kwargs", [dict(eps_start=0.1, eps_end=0.2), dict(kind="cosine"), dict(eps_start=1.5)])
    def test_bad_schedules(self, kwargs):
        with pytest.raises(ValueError):
            EpsilonSchedule(**kwargs)

    @given(st.integers(1, 5_000), st.sampled_from(["linear", "exponential"]), st.data())
    def test_monotone_and_bounded(self, horizon, kind, data):
        sched = EpsilonSchedule(0.9, 0.05, horizon=horizon, kind=kind)
        a = data.draw(st.integers(0, 2 * horizon))
        b = data.draw(st.integers(a, 2 * horizon + 1))
        ea, eb = epsilon_at(sched, a), epsilon_at(sched, b)
        assert 0.05 <= eb <= ea <= 0.9


class TestActionSelection:
    def test_tie_break_lowest_index(self):
        assert greedy_action(np.array([1.0, 3.0, 3.0, 0.0])) == 1
        assert greedy_action(np.zeros(6)) == 0

    def test_epsilon_zero_picks_first_maximum(self):
        net = QNetwork((2, 6), [np.zeros((6, 2))], [np.array([1.0, 5.0, 5.0, 0.0, 0.0, 0.0])])
        assert select_action(net, np.zeros(2), 0.0, np.random.default_rng(0)) == 1
        assert select_action(QNetwork.zeros((2, 6)), np.zeros(2), 0.0, np.random.default_rng(0)) == 0

    def test_greedy_when_epsilon_zero(self):
        net = QNetwork((2, 3), [np.zeros((3, 2))], [np.array([0.0, 5.0, 1.0])])
        rng = np.random.default_rng(0)
        assert {select_action(net, np.zeros(2), 0.0, rng) for _ in range(100)} == {1}

    def test_uniform_when_epsilon_one(self):
        net = QNetwork.zeros((2, 6))
        rng = np.random.default_rng(42)
        n = 60_000
        counts = np.bincount([select_action(net, np.zeros(2), 1.0, rng) for _ in range(n)], minlength=6)
        expected = n / 6
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < CHI2_DF5_P001
        sigma = np.sqrt(n * (1 / 6) * (5 / 6))
        assert np.all(np.abs(counts - expected) < 3 * sigma)

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            select_action(QNetwork.zeros((2, 6)), np.zeros(2), 1.2, np.random.default_rng(0))


class TestTargets:
    def _net(self):
        return QNetwork((2, 3), [np.zeros((3, 2))], [np.array([1.0, 2.0, 0.5])])

    def test_max_over_target_values(self):
        net = QNetwork((2, 6), [np.zeros((6, 2))], [np.array([1.0, 3.0, 2.0, 0.0, 0.0, 0.0])])
        assert td_target(net, 0.0, np.zeros(2), False, 0.99) == pytest.approx(2.97)
        assert td_target(net, 20.0, np.zeros(2), False, 0.0) == 20.0
        assert td_target(net, 20.0, np.zeros(2), True, 0.99) == 20.0

    def test_bootstrap(self):
        assert td_target(self._net(), 1.0, np.zeros(2), False, 0.99) == pytest.approx(2.98)

    def test_terminal(self):
        assert td_target(self._net(), 1.0, np.zeros(2), True, 0.99) == 1.0

    def test_batched_agrees(self):
        net = QNetwork.init((4, 5, 3), np.random.default_rng(0))
        rng = np.random.default_rng(1)
        obs = rng.normal(size=(8, 4))
        rewards = rng.normal(size=8)
        dones = (rng.random(8) < 0.5).astype(float)
        batch = td_targets(net, rewards, obs, dones, 0.9)
        single = [td_target(net, rewards[i], obs[i], bool(dones[i]), 0.9) for i in range(8)]
        np.testing.assert_allclose(batch, single, rtol=1e-12)

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            td_target(self._net(), 0.0, np.zeros(2), False, 1.5)


class TestReplay:
    def test_fifo_eviction(self):
        buf = ReplayBuffer(3, 1)
        for r in range(5):
            buf.add(np.array([r]), 0, float(r), np.array([r]), False)
        assert len(buf) == 3
        assert list(buf.rewards[buf.order()]) == [2.0, 3.0, 4.0]

    def test_sample_only_filled_slots(self):
        buf = ReplayBuffer(10, 1)
        buf.add(np.zeros(1), 0, 7.0, np.zeros(1), True)
        _, _, rewards, _, dones = buf.sample(5, np.random.default_rng(0))
        assert list(rewards) == [7.0] * 5 and list(dones) == [1.0] * 5


class TestLearner:
    def test_skips_until_batch_available(self):
        learner = IDQNLearner(3, 2, LearnerConfig(batch_size=4), seed=0)
        before = learner.net.flat.copy()
        for _ in range(3):
            assert learner.observe(np.zeros(3), 0, 0.0, np.zeros(3), False) is None
        np.testing.assert_array_equal(learner.net.flat, before)
        assert learner.observe(np.zeros(3), 0, 0.0, np.zeros(3), False) is not None
        assert learner.train_steps == 1

    def test_zero_td_error_leaves_weights(self):
        cfg = LearnerConfig(batch_size=2, optimizer="sgd", gamma=0.0)
        learner = IDQNLearner(2, 2, cfg, seed=0)
        learner.net.flat[:] = 0.0
        learner.sync_target()
        for _ in range(2):
            learner.buffer.add(np.ones(2), 1, 0.0, np.ones(2), False)
        loss = learner.train_step()
        assert loss == 0.0
        assert not learner.net.flat.any()

    @pytest.mark.parametrize("seed", range(5))
    def test_bandit_converges(self, seed):
        learner = IDQNLearner(8, 6, LearnerConfig(batch_size=1, replay_capacity=1), seed=seed)
        obs = np.ones(8)
        learner.buffer.add(obs, 2, 1.0, obs, True)
        for _ in range(500):
            learner.train_step()
        assert abs(forward(learner.net, obs)[2] - 1.0) < 0.05

    def test_target_sync_cadence(self):
        learner = IDQNLearner(3, 2, LearnerConfig(batch_size=1, target_sync_every=3), seed=0)
        learner.buffer.add(np.ones(3), 0, 1.0, np.ones(3), True)
        start = learner.target_net.flat.copy()
        learner.train_step()
        learner.train_step()
        np.testing.assert_array_equal(learner.target_net.flat, start)
        assert not np.array_equal(learner.net.flat, start)
        learner.train_step()
        np.testing.assert_array_equal(learner.target_net.flat, learner.net.flat)
        assert learner.target_net.flat is not learner.net.flat

    def test_train_every(self):
        learner = IDQNLearner(2, 2, LearnerConfig(batch_size=1, train_every=3), seed=0)
        for _ in range(7):
            learner.observe(np.zeros(2), 0, 0.0, np.zeros(2), False)
        assert learner.train_steps == 2

    def test_non_finite_loss(self):
        learner = IDQNLearner(2, 2, LearnerConfig(batch_size=1), seed=0)
        learner.buffer.add(np.zeros(2), 0, np.inf, np.zeros(2), True)
        with np.errstate(all="ignore"), pytest.raises(NonFiniteError):
            learner.train_step()

    def test_same_seed_same_trajectory(self):
        def run(seed):
            learner = IDQNLearner(4, 3, LearnerConfig(batch_size=4, target_sync_every=5), seed=seed)
            rng = np.random.default_rng(9)
            actions = []
            for _ in range(40):
                obs = rng.normal(size=4)
                a = learner.act(obs, 0.5)
                actions.append(a)
                learner.observe(obs, a, float(rng.normal()), rng.normal(size=4), bool(rng.random() < 0.1))
            return actions, learner.net.flat.copy()

        a1, w1 = run(3)
        a2, w2 = run(3)
        a3, w3 = run(4)
        assert a1 == a2 and np.array_equal(w1, w2)
        assert not np.array_equal(w1, w3)

    def test_acting_does_not_shift_sampling_stream(self):
        def learner_after(extra_acts):
            learner = IDQNLearner(2, 2, LearnerConfig(batch_size=2), seed=1)
            for _ in range(extra_acts):
                learner.act(np.zeros(2), 0.5)
            for r in range(6):
                learner.buffer.add(np.full(2, r), r % 2, float(r), np.zeros(2), True)
            learner.train_step()
            return learner.net.flat

        np.testing.assert_array_equal(learner_after(0), learner_after(17))

    @pytest.mark.parametrize("kwargs", [dict(gamma=1.2), dict(batch_size=0), dict(lr=0.0)])
    def test_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            LearnerConfig(**kwargs)

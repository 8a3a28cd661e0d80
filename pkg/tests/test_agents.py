import numpy as np
import pytest
from scipy import stats

from app.models.networks import flat_params
from app.models.replay import Batch, ReplayBuffer, Transition
from app.schemas.config import AgentConfig, SystemConfig
from app.services.agents import (
    DdpgAgent,
    DqnAgent,
    PoptSchedule,
    build_agent,
    merge_target,
    merge_targets,
)
from app.utils.errors import InputValidationError
from app.utils.numerics import RngStream
from tests.helpers import channel_set, realization

SYSTEM = SystemConfig(M=2, N=3)
AGENT = AgentConfig(batch=4, warmup=4, buffer=64, hidden=[8, 8])
STATE_DIM = 6


def zero_out(*nets):
    for net in nets:
        for p in net.params:
            p[...] = 0.0


def randomize(np_rng, *nets):
    for net in nets:
        for p in net.params:
            p[...] = np_rng.normal(0.0, 0.5, p.shape)


def fill(buffer, n, action, reward=0.0, reward_opt=None, done=False, state=None):
    for _ in range(n):
        s = np.zeros(buffer.state_dim) if state is None else state
        buffer.push(Transition(s, np.atleast_1d(action), reward, reward_opt, s, done))


def test_merge_target_rules():
    rng = RngStream(0, 3)
    assert merge_target(2.0, 1.0, 1.0, rng) == 2.0
    assert merge_target(1.0, 2.0, 1.0, rng) == 2.0
    assert merge_target(1.0, 2.0, 0.0, rng) == 1.0
    with pytest.raises(InputValidationError):
        merge_target(1.0, 2.0, 1.5, rng)

    picks = [merge_target(0.0, 1.0, 0.3, rng) for _ in range(10_000)]
    assert np.mean(picks) == pytest.approx(0.3, abs=0.02)


def test_merge_targets_never_below_network_target(np_rng):
    rng = RngStream(1, 3)
    y_net = np_rng.normal(0, 1, 500)
    y_opt = np_rng.normal(0, 1, 500)
    has_opt = np_rng.random(500) < 0.5
    merged = merge_targets(y_net, y_opt, has_opt, 0.7, rng)
    assert np.all(merged >= y_net)
    np.testing.assert_array_equal(merged[~has_opt], y_net[~has_opt])

    always = merge_targets(y_net, y_opt, has_opt, 1.0, rng)
    np.testing.assert_array_equal(always, np.where(has_opt, np.maximum(y_net, y_opt), y_net))


def test_p_opt_schedule():
    schedule = PoptSchedule(1.0, 0.1, 100)
    assert schedule.value(0) == 1.0
    assert schedule.value(50) == pytest.approx(0.55)
    assert schedule.value(100) == 0.1
    assert schedule.value(10_000) == 0.1
    assert PoptSchedule(1.0, 0.2, 0).value(0) == 0.2


def test_ddpg_acting_without_noise_is_deterministic():
    agent = DdpgAgent("od", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    state = np.linspace(-1, 1, STATE_DIM)
    first = agent.act(state, explore=False, rng=RngStream(0, 2))
    second = agent.act(state, explore=False, rng=RngStream(9, 2))
    np.testing.assert_array_equal(first, second)
    assert first.shape == (1,)


def test_ddpg_noisy_rho_stays_in_range():
    noisy = AGENT.model_copy(update={"noise_sigma": 5.0})
    agent = DdpgAgent("od", STATE_DIM, SYSTEM, noisy, RngStream(0, 1))
    rng = RngStream(0, 2)
    rhos = np.array([agent.act(np.ones(STATE_DIM), True, rng)[0] for _ in range(10_000)])
    assert rhos.min() >= 0.0
    assert rhos.max() <= 1.0
    assert 0.0 < np.mean(rhos) < 1.0


def test_model_free_ddpg_actions_are_valid():
    agent = DdpgAgent("mf", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    assert agent.action_dim == 2 + 2 * SYSTEM.M + SYSTEM.N
    rng = RngStream(0, 2)
    for _ in range(200):
        action = agent.to_action(agent.act(rng.standard_normal(STATE_DIM), True, rng))
        assert 0.0 <= action.rho <= 1.0
        assert action.p_tx_w <= SYSTEM.p_max_w * (1 + 1e-12)
        assert np.all((action.theta >= 0.0) & (action.theta < 2 * np.pi))


def test_model_free_ddpg_zero_direction():
    agent = DdpgAgent("mf", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    vector = np.zeros(agent.action_dim)
    vector[1 + 2 * SYSTEM.M] = 0.25
    action = agent.to_action(vector)
    np.testing.assert_allclose(action.w, [0.5, 0.0])


def test_ddpg_zero_critic_and_rewards_do_not_drift():
    agent = DdpgAgent("mf", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    zero_out(agent.critic, agent.critic_target)
    actor_before = flat_params(agent.actor).copy()
    buffer = ReplayBuffer(64, STATE_DIM, agent.action_dim, warmup=4)
    fill(buffer, 16, np.full(agent.action_dim, 0.5))
    rng = RngStream(0, 3)
    for _ in range(20):
        stats_ = agent.train_step(buffer, rng)
        assert stats_.critic_loss == 0.0
        assert stats_.optimized_share == 0.0
    np.testing.assert_allclose(flat_params(agent.critic), 0.0, atol=1e-12)
    np.testing.assert_allclose(flat_params(agent.actor), actor_before, atol=1e-12)


def test_targets_without_discount():
    system = SystemConfig(M=2, N=3, discount=0.0)
    always = AGENT.model_copy(update={"p_opt_start": 1.0, "p_opt_end": 1.0})
    batch = Batch(
        states=np.zeros((3, STATE_DIM)),
        actions=np.zeros((3, 1)),
        rewards=np.array([0.2, 0.8, 0.5]),
        rewards_opt=np.array([0.6, 0.4, 0.9]),
        has_opt=np.array([True, True, False]),
        next_states=np.zeros((3, STATE_DIM)),
        dones=np.zeros(3, dtype=bool),
        optimized=np.zeros(3, dtype=bool),
        indices=np.arange(3),
    )
    bootstrap = np.array([5.0, 5.0, 5.0])
    rng = RngStream(0, 3)

    mf = DdpgAgent("mf", STATE_DIM, system, always, RngStream(0, 1))
    np.testing.assert_array_equal(mf._targets(batch, bootstrap, rng), [0.2, 0.8, 0.5])

    od = DdpgAgent("od", STATE_DIM, system, always, RngStream(0, 1))
    np.testing.assert_array_equal(od._targets(batch, bootstrap, rng), [0.6, 0.8, 0.5])


def test_critic_fits_a_frozen_sample():
    system = SystemConfig(M=2, N=3, discount=0.0)
    agent_cfg = AgentConfig(batch=1, warmup=1, buffer=1, hidden=[8, 8])
    agent = DdpgAgent("od", STATE_DIM, system, agent_cfg, RngStream(0, 1))
    buffer = ReplayBuffer(1, STATE_DIM, 1, warmup=1)
    fill(buffer, 1, np.array([0.4]), reward=1.0, state=np.linspace(0, 1, STATE_DIM))
    rng = RngStream(0, 3)
    losses = [agent.train_step(buffer, rng).critic_loss for _ in range(100)]
    assert losses[-1] < 0.9 * losses[0]


def test_actor_gradient_matches_finite_differences(np_rng):
    small = AgentConfig(batch=4, warmup=4, buffer=64, hidden=[6, 6])
    agent = DdpgAgent("od", STATE_DIM, SYSTEM, small, RngStream(0, 1))
    randomize(np_rng, agent.actor, agent.critic)
    states = np_rng.normal(0, 1, (5, STATE_DIM))
    grads, _ = agent.actor_gradients(states)

    step = 1e-6
    for analytic, p in zip(grads, agent.actor.params):
        numeric = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            original = p[idx]
            p[idx] = original + step
            plus = agent.actor_gradients(states)[1]
            p[idx] = original - step
            minus = agent.actor_gradients(states)[1]
            p[idx] = original
            # 반환 기울기는 −objective의 기울기입니다.
            numeric[idx] = -(plus - minus) / (2 * step)
        scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
        assert np.linalg.norm(analytic - numeric) / scale < 1e-3


def test_dqn_full_exploration_is_uniform():
    cfg = AGENT.model_copy(update={"epsilon_start": 1.0, "epsilon_end": 1.0})
    agent = DqnAgent("od", STATE_DIM, SYSTEM, cfg, RngStream(0, 1))
    assert agent.n_actions == 11
    rng = RngStream(0, 2)
    picks = [int(agent.act(np.zeros(STATE_DIM), True, rng)[0]) for _ in range(10_000)]
    counts = np.bincount(picks, minlength=11)
    expected = 10_000 / 11
    chi2 = np.sum((counts - expected) ** 2 / expected)
    assert chi2 < stats.chi2.ppf(0.9999, df=10)


def test_dqn_greedy_follows_q_values():
    agent = DqnAgent("od", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    zero_out(agent.q)
    agent.q.biases[-1][7] = 1.0
    assert agent.act(np.ones(STATE_DIM), explore=False, rng=RngStream(0, 2))[0] == 7.0
    assert agent.rho_of(np.array([7.0])) == pytest.approx(0.7)


def test_dqn_learns_two_arm_bandit():
    cfg = AgentConfig(batch=4, warmup=4, buffer=64, hidden=[8, 8], rho_levels=2, lr_q=1e-2)
    agent = DqnAgent("od", 2, SYSTEM, cfg, RngStream(0, 1))
    buffer = ReplayBuffer(64, 2, 1, warmup=4)
    state = np.array([1.0, -1.0])
    for _ in range(8):
        fill(buffer, 1, np.array([0.0]), reward=0.0, done=True, state=state)
        fill(buffer, 1, np.array([1.0]), reward=1.0, done=True, state=state)
    rng = RngStream(0, 3)
    for _ in range(300):
        agent.train_step(buffer, rng)
    q = agent.q.forward(state)
    assert q[1] > q[0]
    assert agent.act(state, explore=False, rng=rng)[0] == 1.0


def test_dqn_hard_copy_period():
    cfg = AGENT.model_copy(update={"target_period": 2})
    agent = DqnAgent("od", STATE_DIM, SYSTEM, cfg, RngStream(0, 1))
    buffer = ReplayBuffer(64, STATE_DIM, 1, warmup=4)
    fill(buffer, 8, np.array([3.0]), reward=1.0)
    rng = RngStream(0, 3)
    agent.train_step(buffer, rng)
    assert not np.array_equal(flat_params(agent.q), flat_params(agent.q_target))
    agent.train_step(buffer, rng)
    np.testing.assert_array_equal(flat_params(agent.q), flat_params(agent.q_target))


def test_model_free_dqn_index_decomposition():
    agent = DqnAgent("mf", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    assert agent.n_actions == 11 * 8 * 4
    channels = realization(channel_set([3.0, 4.0j], np.ones((3, 2)), np.ones(3)))
    index = 3 + 11 * (5 + 8 * 2)
    action = agent.to_action(np.array([float(index)]), channels)
    assert action.rho == pytest.approx(0.3)
    assert action.p_tx_w == pytest.approx(SYSTEM.p_max_w * 6 / 8)
    np.testing.assert_allclose(action.w / np.linalg.norm(action.w), [0.6, 0.8j])
    np.testing.assert_allclose(action.theta, [0.0, np.pi, 0.0], atol=1e-12)
    with pytest.raises(InputValidationError):
        agent.to_action(np.array([float(index)]))


@pytest.mark.parametrize(
    ("kind", "cls", "action_dim"),
    [
        ("od-ddpg", DdpgAgent, 1),
        ("mf-ddpg", DdpgAgent, 2 + 2 * 2 + 3),
        ("od-dqn", DqnAgent, 1),
        ("mf-dqn", DqnAgent, 1),
    ],
)
def test_build_agent(kind, cls, action_dim):
    agent = build_agent(kind, STATE_DIM, SYSTEM, AGENT, RngStream(0, 1))
    assert isinstance(agent, cls)
    assert agent.kind == kind
    assert agent.action_dim == action_dim


def test_build_agent_ao_only():
    assert build_agent("ao-only", STATE_DIM, SYSTEM, AGENT, RngStream(0, 1)) is None

import numpy as np
import pytest

from app.schemas.config import ChannelParams, Geometry, InnerOptConfig, SystemConfig
from app.services.channel import sample_channels
from app.services.environment import composite_channel, compute_reward, evaluate
from app.services.inner_optimizer import (
    align_phases,
    ao_baseline,
    optimize_given_rho,
    phase_update,
    solve_active,
)
from app.services.solver_oracles import dense_grid_oracle, restart_oracle
from app.utils.errors import InputValidationError
from app.utils.numerics import RngStream
from tests.helpers import channel_set, complex_normal, random_channel_set, realization

ZERO_DEMAND = SystemConfig(p_irs_w=0.0, p_max_w=1e6)


def active_demand(g, H, rho, cfg):
    """MRT 해의 하베스팅 전력과 최대 하베스팅 방향 사이의 기하 평균 요구량"""
    c1 = cfg.gamma_min * cfg.noise_w
    energy = float(np.vdot(g, g).real)
    power = c1 / energy
    direction = g / np.sqrt(energy)
    at_mrt = np.linalg.norm(H @ direction) ** 2
    at_best = np.linalg.eigvalsh(H.conj().T @ H)[-1]
    scale = cfg.eta * (1.0 - rho) * power
    return float(np.sqrt(scale * at_mrt * scale * at_best))


def assert_constraints_hold(solution, g, H, rho, cfg):
    snr = np.abs(np.vdot(g, solution.w)) ** 2 / cfg.noise_w
    incident = H @ solution.w
    harvested = cfg.eta * (1.0 - rho) * np.vdot(incident, incident).real
    assert snr >= cfg.gamma_min * (1.0 - 1e-9)
    assert harvested >= cfg.p_irs_w * (1.0 - 1e-9)


def test_align_phases_with_real_positive_channels():
    ch = channel_set([1.0, 1.0], np.ones((3, 2)), np.ones(3))
    np.testing.assert_allclose(align_phases(ch), np.zeros(3), atol=1e-12)


def test_align_phases_scalar_rotation():
    ch = channel_set(1.0, 1.0, np.exp(1j * np.pi / 6))
    theta = align_phases(ch)
    assert theta[0] == pytest.approx(np.pi / 6, abs=1e-12)
    np.testing.assert_allclose(composite_channel(ch, theta, 1.0), [2.0], atol=1e-12)


def test_single_antenna_alignment_is_optimal(np_rng):
    for _ in range(50):
        ch = random_channel_set(np_rng, 1, 5)
        g = composite_channel(ch, align_phases(ch), 0.6)
        expected = abs(ch.h_d[0]) + np.sqrt(0.6) * np.sum(np.abs(ch.h_r) * np.abs(ch.H[:, 0]))
        assert abs(g[0]) == pytest.approx(expected, rel=1e-9)

    ch = random_channel_set(np_rng, 1, 2)
    aligned = abs(composite_channel(ch, align_phases(ch), 1.0)[0])
    grid = np.linspace(0, 2 * np.pi, 72, endpoint=False)
    for a in grid:
        for b in grid:
            assert abs(composite_channel(ch, np.array([a, b]), 1.0)[0]) <= aligned * (1 + 1e-12)


def test_phase_update_is_aligned_for_given_beamformer(np_rng):
    ch = random_channel_set(np_rng, 3, 4)
    w = complex_normal(np_rng, 3)
    theta = phase_update(ch, w)
    gain = abs(np.vdot(composite_channel(ch, theta, 1.0), w))
    bound = abs(np.vdot(ch.h_d, w)) + np.sum(np.abs(ch.h_r.conj() * (ch.H @ w)))
    assert gain == pytest.approx(bound, rel=1e-9)


def test_zero_demand_matches_closed_form(np_rng):
    c1 = ZERO_DEMAND.gamma_min * ZERO_DEMAND.noise_w
    for _ in range(1000):
        M = int(np_rng.integers(1, 6))
        g = complex_normal(np_rng, M)
        H = complex_normal(np_rng, 4, M)
        solution = solve_active(g, H, 0.5, ZERO_DEMAND)
        energy = float(np.vdot(g, g).real)
        assert solution.feasible
        assert solution.p_tx_w == pytest.approx(c1 / energy, rel=1e-9)
        np.testing.assert_allclose(solution.w, np.sqrt(c1) / energy * g, rtol=1e-9)


def test_two_active_constraints_against_dense_grid(np_rng):
    for _ in range(20):
        g = complex_normal(np_rng, 2)
        H = complex_normal(np_rng, 8, 2)
        cfg = SystemConfig(p_irs_w=active_demand(g, H, 0.5, ZERO_DEMAND), p_max_w=1e6)
        solution = solve_active(g, H, 0.5, cfg)
        assert solution.feasible
        assert_constraints_hold(solution, g, H, 0.5, cfg)
        assert solution.p_tx_w <= dense_grid_oracle(g, H, 0.5, cfg, points=400) * 1.01


def test_two_active_constraints_against_restart_oracle(np_rng):
    rng = RngStream(31, 0)
    for _ in range(10):
        g = complex_normal(np_rng, 4)
        H = complex_normal(np_rng, 16, 4)
        cfg = SystemConfig(p_irs_w=active_demand(g, H, 0.3, ZERO_DEMAND), p_max_w=1e6)
        solution = solve_active(g, H, 0.3, cfg)
        assert solution.feasible
        assert_constraints_hold(solution, g, H, 0.3, cfg)
        assert solution.p_tx_w <= restart_oracle(g, H, 0.3, cfg, rng) * 1.01


def test_infeasible_cases(np_rng):
    g = complex_normal(np_rng, 2)
    H = complex_normal(np_rng, 3, 2)

    full_reflection = solve_active(g, H, 1.0, SystemConfig(p_irs_w=1e-6))
    assert not full_reflection.feasible

    no_channel = solve_active(np.zeros(2, dtype=np.complex128), H, 0.5, ZERO_DEMAND)
    assert not no_channel.feasible
    assert no_channel.p_tx_w == 0.0

    capped = solve_active(g, H, 0.5, SystemConfig(p_irs_w=0.0, p_max_w=1e-20))
    assert not capped.feasible


def test_solve_active_rejects_bad_inputs(np_rng):
    g = complex_normal(np_rng, 2)
    with pytest.raises(InputValidationError):
        solve_active(g, complex_normal(np_rng, 3, 4), 0.5, ZERO_DEMAND)
    with pytest.raises(InputValidationError):
        solve_active(g, complex_normal(np_rng, 3, 2), 1.5, ZERO_DEMAND)


def test_oracles_agree_on_zero_demand(np_rng):
    g = complex_normal(np_rng, 2)
    H = complex_normal(np_rng, 3, 2)
    closed_form = ZERO_DEMAND.gamma_min * ZERO_DEMAND.noise_w / float(np.vdot(g, g).real)
    assert restart_oracle(g, H, 0.5, ZERO_DEMAND, RngStream(1, 0)) == pytest.approx(closed_form)
    assert dense_grid_oracle(g, H, 0.5, ZERO_DEMAND) >= closed_form * (1 - 1e-12)
    with pytest.raises(InputValidationError):
        dense_grid_oracle(complex_normal(np_rng, 3), complex_normal(np_rng, 3, 3), 0.5, ZERO_DEMAND)


def test_optimize_given_rho_full_reflection_with_demand():
    ch = sample_channels(Geometry(), ChannelParams(), 4, 20, RngStream(3, 0))
    solution = optimize_given_rho(1.0, ch, SystemConfig(p_irs_w=20e-6))
    assert not solution.feasible
    assert solution.reward == 0.0


def test_optimize_given_rho_reward_is_true_channel_reward():
    cfg = SystemConfig(p_max_w=100.0)
    ch = sample_channels(Geometry(), ChannelParams(), 4, 20, RngStream(4, 0))
    solution = optimize_given_rho(0.5, ch, cfg)
    assert solution.feasible
    expected = compute_reward(evaluate(solution.as_action(0.5), ch.truth, cfg), cfg)
    assert solution.reward == expected
    assert solution.reward > 0.0


def test_ao_history_is_non_increasing():
    cfg = SystemConfig(p_max_w=100.0)
    for seed in range(5):
        ch = sample_channels(Geometry(), ChannelParams(), 4, 16, RngStream(seed, 0))
        result = ao_baseline(ch, cfg)
        assert result.feasible
        assert all(b <= a for a, b in zip(result.history, result.history[1:]))
        assert result.iterations >= 11
        assert result.wall_time >= 0.0


def test_ao_without_demand_single_antenna(np_rng):
    c1 = ZERO_DEMAND.gamma_min * ZERO_DEMAND.noise_w
    for _ in range(20):
        ch = random_channel_set(np_rng, 1, 6)
        result = ao_baseline(realization(ch), ZERO_DEMAND)
        strength = abs(ch.h_d[0]) + np.sum(np.abs(ch.h_r) * np.abs(ch.H[:, 0]))
        assert result.rho == 1.0
        assert result.solution.p_tx_w == pytest.approx(c1 / strength**2, rel=1e-6)


def test_ao_without_demand_is_no_worse_than_alignment(np_rng):
    c1 = ZERO_DEMAND.gamma_min * ZERO_DEMAND.noise_w
    for _ in range(20):
        ch = random_channel_set(np_rng, 3, 6)
        g = composite_channel(ch, align_phases(ch), 1.0)
        result = ao_baseline(realization(ch), ZERO_DEMAND)
        assert result.solution.p_tx_w <= c1 / float(np.vdot(g, g).real) * (1 + 1e-9)


def test_ao_matches_exhaustive_search_single_element(np_rng):
    cfg = SystemConfig(p_irs_w=1e-8, p_max_w=100.0)
    c1 = cfg.gamma_min * cfg.noise_w
    rhos = np.linspace(0.0, 1.0, 11)[:-1]
    thetas = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    for _ in range(10):
        ch = random_channel_set(np_rng, 1, 1)
        best = np.inf
        for rho in rhos:
            c2 = cfg.p_irs_w / (cfg.eta * (1.0 - rho))
            harvest_need = c2 / abs(ch.H[0, 0]) ** 2
            for theta in thetas:
                g = composite_channel(ch, np.array([theta]), rho)
                best = min(best, max(c1 / abs(g[0]) ** 2, harvest_need))
        result = ao_baseline(realization(ch), cfg)
        assert result.feasible
        assert result.solution.p_tx_w <= best * (1 + 1e-9)
        assert result.solution.p_tx_w >= best * 0.99


def test_ao_all_infeasible(np_rng):
    ch = random_channel_set(np_rng, 2, 3)
    result = ao_baseline(realization(ch), SystemConfig(p_irs_w=1.0, p_max_w=1e-12))
    assert not result.feasible
    assert result.rho == 0.0
    assert result.solution.reward == 0.0


def test_ao_rejects_small_grid(np_rng):
    ch = random_channel_set(np_rng, 2, 3)
    with pytest.raises(InputValidationError):
        ao_baseline(realization(ch), ZERO_DEMAND, InnerOptConfig(), rho_grid=1)

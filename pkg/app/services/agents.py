"""DRL 에이전트 서비스 모듈

모델 프리(mf)와 최적화 기반(od) DDPG/DQN 에이전트를 제공합니다.
최적화 기반 모드는 ρ만 학습하며, (w, θ)는 모델 기반 최적화 모듈이 채웁니다.

클래스 목록:
    - TrainStats: 학습 스텝 결과
    - PoptSchedule: 최적화 기반 target 선호 확률의 선형 감소 스케줄
    - DdpgAgent: actor-critic 에이전트
    - DqnAgent: 이산 행동 Q-learning 에이전트

함수 목록:
    - merge_target / merge_targets: 최적화 기반 target과 네트워크 target 병합
    - build_agent: agent_kind로 에이전트 생성
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from app.config import logger
from app.models.networks import AdamState, Head, MlpNet, adam_step, hard_copy, soft_update
from app.models.replay import Batch, ReplayBuffer
from app.schemas.config import AgentConfig, AgentKind, SystemConfig
from app.services.channel import ChannelRealization
from app.services.environment import Action, wrap_phases
from app.utils.errors import InputValidationError
from app.utils.numerics import RngStream, RVec

Mode = Literal["od", "mf"]
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TrainStats:
    """학습 스텝 결과. optimized_share는 미니배치 중 최적화 후보를 실행한 transition 비율"""

    critic_loss: float
    actor_objective: float
    optimized_share: float


@dataclass(frozen=True)
class PoptSchedule:
    """start에서 end까지 anneal_steps 동안 선형으로 변하고 이후 end로 유지됩니다."""

    start: float
    end: float
    anneal_steps: int

    def value(self, step: int) -> float:
        if self.anneal_steps <= 0 or step >= self.anneal_steps:
            return self.end
        frac = step / self.anneal_steps
        return self.start + (self.end - self.start) * frac


def merge_target(y_net: float, y_opt: float, p_opt: float, rng: RngStream) -> float:
    """y_opt가 y_net보다 크면 확률 p_opt로 y_opt를, 그 외에는 y_net을 반환합니다.

    Args:
        y_net (float): target 네트워크 기반 target.
        y_opt (float): 최적화 후보 기반 target (하한).
        p_opt (float): 선호 확률, [0, 1].
        rng (RngStream): 난수 스트림.

    Returns:
        float: 병합된 target. 항상 y_net 이상입니다.
    """
    if not 0.0 <= p_opt <= 1.0:
        raise InputValidationError(f"p_opt는 [0, 1] 범위여야 합니다: {p_opt}")
    if y_opt <= y_net:
        return y_net
    return y_opt if float(rng.random()) < p_opt else y_net


def merge_targets(
    y_net: np.ndarray, y_opt: np.ndarray, has_opt: np.ndarray, p_opt: float, rng: RngStream
) -> np.ndarray:
    """merge_target의 배치 버전. has_opt가 False인 샘플은 y_net을 그대로 씁니다."""
    if not 0.0 <= p_opt <= 1.0:
        raise InputValidationError(f"p_opt는 [0, 1] 범위여야 합니다: {p_opt}")
    draws = rng.random(y_net.shape[0])
    take = has_opt & (y_opt > y_net) & (draws < p_opt)
    return np.where(take, y_opt, y_net)


class _Agent:
    """DDPG/DQN 공통 상태: 모드, 스텝 카운터, p_opt 스케줄"""

    kind: AgentKind
    action_dim: int

    def __init__(self, mode: Mode, system: SystemConfig, agent: AgentConfig, total_steps: int):
        self.mode = mode
        self.system = system
        self.cfg = agent
        self.env_steps = 0
        self.train_steps = 0
        self.episodes = 0
        self.schedule = PoptSchedule(
            agent.p_opt_start,
            agent.p_opt_end,
            int(round(agent.p_opt_anneal_fraction * total_steps)),
        )

    @property
    def optimization_driven(self) -> bool:
        return self.mode == "od"

    @property
    def p_opt(self) -> float:
        return self.schedule.value(self.env_steps)

    def observe_step(self) -> None:
        self.env_steps += 1

    def end_episode(self) -> None:
        self.episodes += 1

    def _targets(self, batch: Batch, bootstrap: np.ndarray, rng: RngStream) -> np.ndarray:
        # y_opt는 y_net과 같은 다음 상태 가치 항을 사용합니다.
        boot = self.system.discount * bootstrap * (~batch.dones)
        y_net = batch.rewards + boot
        if not self.optimization_driven:
            return y_net
        y_opt = batch.rewards_opt + boot
        return merge_targets(y_net, y_opt, batch.has_opt, self.p_opt, rng)


class DdpgAgent(_Agent):
    """DDPG 에이전트

    최적화 기반 모드의 actor는 ρ 하나를 출력합니다. 모델 프리 모드의 actor는
    [ρ, w 방향(2M), 전력 비율, θ(N)]을 출력하며, ‖w‖² = p_max·전력 비율입니다.

    Attributes:
        actor, critic (MlpNet): online 네트워크. critic 입력은 상태와 행동의 연결입니다.
        actor_target, critic_target (MlpNet): target 네트워크
    """

    def __init__(
        self,
        mode: Mode,
        state_dim: int,
        system: SystemConfig,
        agent: AgentConfig,
        rng: RngStream,
        total_steps: int = 1,
    ):
        super().__init__(mode, system, agent, total_steps)
        self.kind = "od-ddpg" if mode == "od" else "mf-ddpg"
        self.state_dim = state_dim
        M, N = system.M, system.N
        if mode == "od":
            heads: tuple[Head, ...] = (Head(1, "sigmoid"),)
        else:
            heads = (Head(1, "sigmoid"), Head(2 * M, "linear"), Head(1, "sigmoid"), Head(N, "phase"))
        self.action_dim = sum(head.size for head in heads)
        self.actor = MlpNet([state_dim, *agent.hidden, self.action_dim], heads, rng)
        self.critic = MlpNet([state_dim + self.action_dim, *agent.hidden, 1], None, rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = AdamState.like(self.actor.params)
        self.critic_opt = AdamState.like(self.critic.params)

    @property
    def noise_sigma(self) -> float:
        return self.cfg.noise_sigma * self.cfg.noise_decay**self.episodes

    def networks(self) -> dict[str, MlpNet]:
        return {"actor": self.actor, "critic": self.critic}

    def act(self, state: RVec, explore: bool, rng: RngStream) -> RVec:
        """actor 출력에 탐색 잡음을 더한 행동 벡터를 반환합니다.

        ρ와 전력 비율은 [0, 1]로 자르고, 위상은 [0, 2π)로 감쌉니다.
        """
        action = self.actor.forward(state).copy()
        if explore and self.noise_sigma > 0.0:
            noise = self.noise_sigma * rng.standard_normal(self.action_dim)
            if self.mode == "mf":
                noise[-self.system.N :] *= TWO_PI
            action += noise
        action[0] = np.clip(action[0], 0.0, 1.0)
        if self.mode == "mf":
            M, N = self.system.M, self.system.N
            action[1 + 2 * M] = np.clip(action[1 + 2 * M], 0.0, 1.0)
            action[-N:] = wrap_phases(action[-N:])
        return action

    def to_action(self, vector: RVec, channels: ChannelRealization | None = None) -> Action:
        """모델 프리 행동 벡터를 Action으로 변환합니다."""
        M = self.system.M
        rho = float(vector[0])
        direction = vector[1 : 1 + M] + 1j * vector[1 + M : 1 + 2 * M]
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            direction = np.zeros(M, dtype=np.complex128)
            direction[0] = 1.0
        else:
            direction = direction / norm
        power = self.system.p_max_w * float(vector[1 + 2 * M])
        return Action(rho=rho, w=np.sqrt(power) * direction, theta=vector[2 + 2 * M :])

    def target_value(self, state: RVec, action: RVec) -> float:
        return float(self.critic_target.forward(np.concatenate([state, action]))[0])

    def bootstrap(self, next_state: RVec) -> float:
        """Q_target(s', actor_target(s'))"""
        next_action = self.actor_target.forward(next_state)
        return float(self.critic_target.forward(np.concatenate([next_state, next_action]))[0])

    def _bootstrap_batch(self, next_states: np.ndarray) -> np.ndarray:
        next_actions = self.actor_target.forward(next_states)
        return self.critic_target.forward(np.hstack([next_states, next_actions]))[:, 0]

    def actor_gradients(self, states: np.ndarray) -> tuple[list[np.ndarray], float]:
        """mean Q(s, actor(s))를 최대화하기 위한 actor 파라미터 기울기 (하강 방향)와 목적 값"""
        actions = self.actor.forward(states)
        x = np.hstack([states, actions])
        objective = float(self.critic.forward(x)[:, 0].mean())
        upstream = -np.ones((states.shape[0], 1)) / states.shape[0]
        _, dx = self.critic.backprop(x, upstream)
        grads, _ = self.actor.backprop(states, dx[:, self.state_dim :])
        return grads, objective

    def train_step(self, buffer: ReplayBuffer, rng: RngStream) -> TrainStats:
        """미니배치 하나로 critic과 actor를 갱신하고 target을 soft update합니다.

        Raises:
            EpisodeStateError: 버퍼가 warmup에 도달하지 않은 경우.
        """
        batch = buffer.sample(self.cfg.batch, rng)
        y = self._targets(batch, self._bootstrap_batch(batch.next_states), rng)

        x = np.hstack([batch.states, batch.actions])
        q = self.critic.forward(x)[:, 0]
        error = q - y
        critic_loss = float(np.mean(error**2))
        grads, _ = self.critic.backprop(x, (2.0 * error / len(y))[:, None])
        adam_step(self.critic.params, grads, self.critic_opt, self.cfg.lr_critic)

        actor_grads, objective = self.actor_gradients(batch.states)
        adam_step(self.actor.params, actor_grads, self.actor_opt, self.cfg.lr_actor)

        soft_update(self.critic_target, self.critic, self.cfg.tau)
        soft_update(self.actor_target, self.actor, self.cfg.tau)
        self.train_steps += 1
        return TrainStats(
            critic_loss=critic_loss,
            actor_objective=objective,
            optimized_share=float(batch.optimized.mean()),
        )


class DqnAgent(_Agent):
    """DQN 에이전트

    최적화 기반 모드는 rho_levels개의 ρ 격자 위에서, 모델 프리 모드는
    (ρ 격자 × 전력 격자 × 위상 코드북)의 결합 격자 위에서 행동을 고릅니다.
    행동 벡터는 [격자 index] 하나입니다.
    """

    action_dim = 1

    def __init__(
        self,
        mode: Mode,
        state_dim: int,
        system: SystemConfig,
        agent: AgentConfig,
        rng: RngStream,
        total_steps: int = 1,
    ):
        super().__init__(mode, system, agent, total_steps)
        self.kind = "od-dqn" if mode == "od" else "mf-dqn"
        self.state_dim = state_dim
        self.n_actions = agent.rho_levels
        if mode == "mf":
            self.n_actions *= agent.power_levels * agent.phase_codebook
        self.q = MlpNet([state_dim, *agent.hidden, self.n_actions], None, rng)
        self.q_target = self.q.copy()
        self.q_opt = AdamState.like(self.q.params)

    @property
    def epsilon(self) -> float:
        decayed = self.cfg.epsilon_start * self.cfg.epsilon_decay**self.episodes
        return max(self.cfg.epsilon_end, decayed)

    def networks(self) -> dict[str, MlpNet]:
        return {"q": self.q}

    def act(self, state: RVec, explore: bool, rng: RngStream) -> RVec:
        """ε-greedy로 격자 index를 고릅니다. explore=False면 greedy."""
        if explore and float(rng.random()) < self.epsilon:
            index = int(rng.integers(0, self.n_actions))
        else:
            index = int(np.argmax(self.q.forward(state)))
        return np.array([float(index)])

    def rho_of(self, vector: RVec) -> float:
        rho_index = int(vector[0]) % self.cfg.rho_levels
        return rho_index / (self.cfg.rho_levels - 1)

    def to_action(self, vector: RVec, channels: ChannelRealization | None = None) -> Action:
        """모델 프리 격자 index를 Action으로 변환합니다.

        index = (ρ index) + rho_levels·((전력 index) + power_levels·(코드북 index)).
        w는 추정 직접 채널 방향, 위상 코드북 k번은 θ_n = 2π·k·n/phase_codebook입니다.
        """
        if channels is None:
            raise InputValidationError("모델 프리 DQN 행동 변환에는 채널이 필요합니다.")
        index = int(vector[0])
        levels = self.cfg.rho_levels
        power_index = (index // levels) % self.cfg.power_levels
        code = index // (levels * self.cfg.power_levels)
        power = self.system.p_max_w * (power_index + 1) / self.cfg.power_levels
        direction = channels.est_h_d
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            direction = np.zeros(self.system.M, dtype=np.complex128)
            direction[0] = 1.0
            norm = 1.0
        theta = TWO_PI * code * np.arange(self.system.N) / self.cfg.phase_codebook
        return Action(rho=self.rho_of(vector), w=np.sqrt(power) * direction / norm, theta=theta)

    def target_value(self, state: RVec, action: RVec) -> float:
        return float(self.q_target.forward(state)[int(action[0])])

    def bootstrap(self, next_state: RVec) -> float:
        """max_a' Q_target(s', a')"""
        return float(np.max(self.q_target.forward(next_state)))

    def train_step(self, buffer: ReplayBuffer, rng: RngStream) -> TrainStats:
        """미니배치 하나로 Q-network를 갱신합니다.

        target_period > 0이면 그 학습 스텝마다 hard copy, 아니면 tau로 soft update합니다.
        """
        batch = buffer.sample(self.cfg.batch, rng)
        bootstrap = np.max(self.q_target.forward(batch.next_states), axis=1)
        y = self._targets(batch, bootstrap, rng)

        rows = np.arange(len(y))
        chosen = batch.actions[:, 0].astype(np.int64)
        q_all = self.q.forward(batch.states)
        error = q_all[rows, chosen] - y
        loss = float(np.mean(error**2))
        upstream = np.zeros_like(q_all)
        upstream[rows, chosen] = 2.0 * error / len(y)
        grads, _ = self.q.backprop(batch.states, upstream)
        adam_step(self.q.params, grads, self.q_opt, self.cfg.lr_q)

        self.train_steps += 1
        if self.cfg.target_period > 0:
            if self.train_steps % self.cfg.target_period == 0:
                hard_copy(self.q_target, self.q)
        else:
            soft_update(self.q_target, self.q, self.cfg.tau)
        return TrainStats(
            critic_loss=loss,
            actor_objective=float(q_all.max(axis=1).mean()),
            optimized_share=float(batch.optimized.mean()),
        )


Agent = DdpgAgent | DqnAgent


def build_agent(
    kind: AgentKind,
    state_dim: int,
    system: SystemConfig,
    agent: AgentConfig,
    rng: RngStream,
    total_steps: int = 1,
) -> Agent | None:
    """agent_kind에 맞는 에이전트를 생성합니다. ao-only는 학습하지 않으므로 None입니다."""
    logger.debug("에이전트 생성: %s (state_dim=%d)", kind, state_dim)
    if kind == "ao-only":
        return None
    mode: Mode = "od" if kind.startswith("od") else "mf"
    if kind.endswith("ddpg"):
        return DdpgAgent(mode, state_dim, system, agent, rng, total_steps)
    return DqnAgent(mode, state_dim, system, agent, rng, total_steps)

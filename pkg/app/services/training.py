"""학습 루프 서비스 모듈

에이전트, 환경, 모델 기반 최적화 모듈을 결합해 한 반복(시드)의 학습을 수행합니다.

클래스 목록:
    - TrainingLoop: 결정 에폭 단위로 진행하는 학습 루프

함수 목록:
    - run_training: 한 시드의 전체 학습을 수행하고 RunRecord 목록을 반환
"""

from pathlib import Path

import numpy as np

from app.config import logger
from app.models.networks import save_checkpoint
from app.models.replay import ReplayBuffer, Transition
from app.schemas.config import AgentKind, ExperimentConfig, Geometry
from app.schemas.records import RunRecord
from app.services.agents import Agent, DdpgAgent, DqnAgent, build_agent
from app.services.channel import ChannelRealization
from app.services.environment import Action, IrsEnvironment, composite_channel, quantize_action
from app.services.inner_optimizer import (
    InnerSolution,
    align_phases,
    ao_baseline,
    optimize_given_rho,
    solve_active,
)
from app.utils.numerics import RngStream, RVec
from app.utils.times import get_monotonic_seconds

# 시드 하나에서 쓰는 난수 스트림 번호
ENV_STREAM = 0
INIT_STREAM = 1
ACT_STREAM = 2
TRAIN_STREAM = 3


class TrainingLoop:
    """한 시드의 학습 상태를 소유하는 루프

    환경, 에이전트, 리플레이 버퍼, 난수 스트림을 모두 이 인스턴스가 소유합니다.

    Attributes:
        config (ExperimentConfig): 실험 설정
        kind (AgentKind): 에이전트 종류
        seed (int): 시드
        env (IrsEnvironment): 환경
        agent (Agent | None): 에이전트. ao-only면 None
    """

    def __init__(
        self,
        config: ExperimentConfig,
        seed: int,
        kind: AgentKind | None = None,
        geometry: Geometry | None = None,
    ):
        self.config = config
        self.kind: AgentKind = kind or config.experiment.agent_kind
        self.seed = seed
        system = config.system
        self.env = IrsEnvironment(
            cfg=system,
            geom=geometry or config.geometry,
            params=config.channel,
            rng=RngStream(seed, ENV_STREAM),
        )
        self.act_rng = RngStream(seed, ACT_STREAM)
        self.train_rng = RngStream(seed, TRAIN_STREAM)
        total_steps = config.experiment.episodes * system.episode_len
        self.agent: Agent | None = build_agent(
            self.kind,
            self.env.state_dim,
            system,
            config.agent,
            RngStream(seed, INIT_STREAM),
            total_steps,
        )
        self.buffer: ReplayBuffer | None = None
        if self.agent is not None:
            self.buffer = ReplayBuffer(
                config.agent.buffer,
                self.env.state_dim,
                self.agent.action_dim,
                config.agent.warmup,
            )
        self.episode = -1
        self.step_in_episode = 0
        self.state: RVec | None = None
        self._incumbent: Action | None = None

    @property
    def uses_optimizer(self) -> bool:
        return self.kind == "ao-only" or (self.agent is not None and self.agent.optimization_driven)

    def start_episode(self) -> RVec:
        if self.agent is not None and self.episode >= 0:
            self.agent.end_episode()
        self.episode += 1
        self.step_in_episode = 0
        self.state = self.env.reset()
        self._incumbent = None
        return self.state

    def _proposal(self, rho: float, channels: ChannelRealization) -> InnerSolution:
        """최적화 기반 DDPG의 제안 행동: 직전 실행 θ를 유지하고 새 ρ에서 두 제약을 모두 만족하는 w

        에피소드 첫 스텝에는 정렬 위상을 사용합니다.
        """
        est = channels.estimate
        theta = align_phases(est) if self._incumbent is None else self._incumbent.theta
        g = composite_channel(est, theta, rho)
        return solve_active(g, est.H, rho, self.config.system, self.config.inner, theta)

    def run_step(self) -> RunRecord:
        """결정 에폭 하나를 진행합니다: 행동 제안 → (후보 최적화) → 실행 → 저장 → 학습."""
        state = self.state
        if state is None or self.step_in_episode >= self.config.system.episode_len:
            state = self.start_episode()
        system = self.config.system
        start = get_monotonic_seconds()
        channels = self.env.channels
        agent = self.agent
        reward_opt: float | None = None
        optimized = False

        if agent is None:
            result = ao_baseline(channels, system, self.config.inner)
            action = result.solution.as_action(result.rho).clipped(system.p_max_w)
            vector = np.array([result.rho])
            optimized = True
        else:
            vector = agent.act(state, explore=True, rng=self.act_rng)
            if agent.optimization_driven:
                rho = float(vector[0]) if isinstance(agent, DdpgAgent) else agent.rho_of(vector)
                candidate = optimize_given_rho(rho, channels, system, self.config.inner)
                reward_opt = candidate.reward
                if isinstance(agent, DqnAgent):
                    # DQN은 ρ만 고르고 (w, θ)는 항상 최적화 모듈이 채웁니다.
                    action = candidate.as_action(rho).clipped(system.p_max_w)
                    optimized = True
                else:
                    proposal = self._proposal(rho, channels)
                    candidate_norm = self.env.normalizer.peek(candidate.reward)
                    projected = self.env.project_state(rho, candidate_norm)
                    y_candidate = candidate_norm + system.discount * agent.bootstrap(projected)
                    y_proposal = agent.target_value(state, vector)
                    preferred = y_candidate > y_proposal and float(self.act_rng.random()) < agent.p_opt
                    # 직전 θ로 제약을 만족할 수 없으면 후보를 실행합니다.
                    if preferred or (candidate.feasible and not proposal.feasible):
                        action = candidate.as_action(rho).clipped(system.p_max_w)
                        optimized = True
                    else:
                        action = proposal.as_action(rho).clipped(system.p_max_w)
            else:
                action = agent.to_action(vector, channels).clipped(system.p_max_w)

        if system.phase_bits is not None:
            action = quantize_action(action, system.phase_bits, self.config.agent.rho_levels)
        outcome = self.env.step(action)
        self._incumbent = action

        if agent is not None and self.buffer is not None:
            self.buffer.push(
                Transition(
                    state=state,
                    action=vector,
                    reward=outcome.reward_norm,
                    reward_opt=None if reward_opt is None else self.env.normalizer.scale(reward_opt),
                    next_state=outcome.next_state,
                    done=outcome.done,
                    executed_was_optimized=optimized,
                )
            )
            agent.observe_step()
            if self.buffer.ready:
                agent.train_step(self.buffer, self.train_rng)

        elapsed = get_monotonic_seconds() - start
        record = RunRecord(
            seed=self.seed,
            episode=self.episode,
            step=self.step_in_episode,
            reward_raw=outcome.reward,
            p_tx_w=outcome.info.p_tx_w,
            rho=action.rho,
            feasible=outcome.info.feasible,
            executed_was_optimized=optimized,
            epoch_wall_time_s=elapsed if self.config.experiment.record_timing else 0.0,
        )
        self.state = outcome.next_state
        self.step_in_episode += 1
        return record

    def save_checkpoints(self, directory: str | Path) -> list[Path]:
        """online 네트워크를 seed_<seed>_<kind>_<name>.bin 파일로 저장합니다."""
        if self.agent is None:
            return []
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        return [
            save_checkpoint(net, directory / f"seed_{self.seed}_{self.kind}_{name}.bin")
            for name, net in self.agent.networks().items()
        ]


def run_training(
    config: ExperimentConfig,
    seed: int,
    kind: AgentKind | None = None,
    geometry: Geometry | None = None,
    checkpoint_dir: str | Path | None = None,
) -> list[RunRecord]:
    """한 시드의 학습을 처음부터 끝까지 수행합니다.

    Args:
        config (ExperimentConfig): 실험 설정.
        seed (int): 시드. 같은 시드는 같은 RunRecord 열을 만듭니다.
        kind (AgentKind | None): 에이전트 종류. None이면 config.experiment.agent_kind.
        geometry (Geometry | None): 링크 거리. None이면 config.geometry.
        checkpoint_dir (str | Path | None): 주어지면 학습 후 네트워크를 저장합니다.

    Returns:
        list[RunRecord]: episodes × episode_len개의 스텝 기록.
    """
    loop = TrainingLoop(config, seed, kind, geometry)
    total = config.experiment.episodes * config.system.episode_len
    logger.debug("Training %s seed=%d for %d steps", loop.kind, seed, total)
    records = [loop.run_step() for _ in range(total)]
    if checkpoint_dir is not None:
        loop.save_checkpoints(checkpoint_dir)
    return records

"""IRS 보조 MISO 하향링크 MDP 환경 모듈

이 모듈은 상태 구성, 행동 평가(SNR, 하베스팅 전력, 보상), 에피소드 진행, 양자화 투영을 제공합니다.

클래스 목록:
    - Action: 공동 제어 (ρ, w, θ)
    - Evaluation: 행동 평가 결과
    - StepOutcome: step()의 반환 값
    - RewardNormalizer: 보상의 누적 최대값 정규화
    - IrsEnvironment: reset/step 인터페이스를 가진 환경

함수 목록:
    - composite_channel, evaluate, compute_reward, quantize_action, build_state
"""

from dataclasses import dataclass, field, replace

import numpy as np

from app.config import logger
from app.schemas.config import ChannelParams, Geometry, SystemConfig
from app.services.channel import (
    ChannelRealization,
    ChannelSet,
    evolve_channels,
    sample_channels,
)
from app.utils.errors import EpisodeStateError, InputValidationError
from app.utils.numerics import CVec, RngStream, RVec

TWO_PI = 2.0 * np.pi
# 솔버 해는 제약 경계 위에 놓이므로 평가에서 상대 1e-9 여유를 둡니다.
FEASIBILITY_RTOL = 1e-9


def wrap_phases(theta: RVec) -> RVec:
    """위상을 [0, 2π)로 감쌉니다."""
    wrapped = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    # np.mod는 −0 근처 값에서 2π를 반환할 수 있습니다.
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


@dataclass(frozen=True)
class Action:
    """공동 제어 행동

    Attributes:
        rho (float): PS 비율, [0, 1]
        w (CVec): 능동 빔포밍 벡터, 길이 M (√W 단위)
        theta (RVec): 위상 벡터, 길이 N, [0, 2π)로 감쌈
    """

    rho: float
    w: CVec
    theta: RVec

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise InputValidationError(f"rho는 [0, 1] 범위여야 합니다: {self.rho}")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=np.complex128))
        object.__setattr__(self, "theta", wrap_phases(self.theta))

    @property
    def p_tx_w(self) -> float:
        return float(np.vdot(self.w, self.w).real)

    def clipped(self, p_max_w: float) -> "Action":
        """‖w‖² ≤ p_max_w가 되도록 w의 크기만 줄인 행동을 반환합니다."""
        power = self.p_tx_w
        if power <= p_max_w or power == 0.0:
            return self
        return replace(self, w=self.w * np.sqrt(p_max_w / power))


@dataclass(frozen=True)
class Evaluation:
    """행동 평가 결과

    Attributes:
        snr_linear (float): 수신 SNR (선형)
        harvested_w (float): IRS 하베스팅 전력 (W)
        p_tx_w (float): AP 송신 전력 ‖w‖² (W)
        feasible (bool): SNR, 하베스팅, 전력 상한 제약을 모두 만족하는지 여부
    """

    snr_linear: float
    harvested_w: float
    p_tx_w: float
    feasible: bool


@dataclass(frozen=True)
class StepOutcome:
    """step()의 결과

    Attributes:
        reward (float): 원시 보상
        reward_norm (float): 누적 최대값으로 정규화한 보상
        next_state (RVec): 다음 상태 특징 벡터
        done (bool): 에피소드 종료 여부
        info (Evaluation): p_tx_w, snr_linear, harvested_w, feasible
    """

    reward: float
    reward_norm: float
    next_state: RVec
    done: bool
    info: Evaluation


def composite_channel(ch: ChannelSet, theta: RVec, rho: float) -> CVec:
    """직접 링크와 ρ 가중 반사 링크를 합친 합성 채널 g를 계산합니다.

    gᴴ = h_dᴴ + sqrt(ρ)·h_rᴴ·diag(e^{jθ})·H, 즉 g = h_d + sqrt(ρ)·Hᴴ·(e^{−jθ} ⊙ h_r).

    Args:
        ch (ChannelSet): 채널 묶음 (실제 또는 추정).
        theta (RVec): 위상 벡터, 길이 N.
        rho (float): PS 비율.

    Returns:
        CVec: 길이 M의 합성 채널.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (ch.N,):
        raise InputValidationError(f"theta 길이가 N={ch.N}과 다릅니다: {theta.shape}")
    reflected = ch.H.conj().T @ (np.exp(-1j * theta) * ch.h_r)
    return ch.h_d + np.sqrt(rho) * reflected


def evaluate(action: Action, ch: ChannelSet, cfg: SystemConfig) -> Evaluation:
    """행동을 채널에서 평가합니다.

    snr = |gᴴw|²/noise_w, harvested = eta·(1−ρ)·‖Hw‖², p_tx = ‖w‖².

    Args:
        action (Action): 평가할 행동.
        ch (ChannelSet): 채널 묶음 (보상 계산에는 실제 채널을 사용).
        cfg (SystemConfig): 시스템 설정.

    Returns:
        Evaluation: 평가 결과.
    """
    if action.w.shape != (ch.M,):
        raise InputValidationError(f"w 길이가 M={ch.M}과 다릅니다: {action.w.shape}")
    g = composite_channel(ch, action.theta, action.rho)
    snr = float(np.abs(np.vdot(g, action.w)) ** 2 / cfg.noise_w)
    incident = ch.H @ action.w
    harvested = float(cfg.eta * (1.0 - action.rho) * np.vdot(incident, incident).real)
    p_tx = action.p_tx_w
    feasible = (
        snr > 0.0
        and snr >= cfg.gamma_min * (1.0 - FEASIBILITY_RTOL)
        and harvested >= cfg.p_irs_w * (1.0 - FEASIBILITY_RTOL)
        and p_tx <= cfg.p_max_w * (1.0 + FEASIBILITY_RTOL)
    )
    return Evaluation(snr_linear=snr, harvested_w=harvested, p_tx_w=p_tx, feasible=bool(feasible))


def compute_reward(ev: Evaluation, cfg: SystemConfig) -> float:
    """전송 데이터 대비 AP 총 소비 전력 비율을 보상으로 계산합니다.

    threshold 모드는 제약 만족 시 log2(1+γ_min), achievable 모드는 log2(1+snr)을 전송량으로 봅니다.
    제약을 만족하지 않으면 전송량은 0입니다.

    Args:
        ev (Evaluation): evaluate() 결과.
        cfg (SystemConfig): 시스템 설정.

    Returns:
        float: 보상.
    """
    if not ev.feasible:
        return 0.0
    if cfg.reward_mode == "achievable":
        data = np.log2(1.0 + ev.snr_linear)
    else:
        data = np.log2(1.0 + cfg.gamma_min)
    return float(data / (ev.p_tx_w + cfg.p_circuit_w))


def quantize_action(action: Action, phase_bits: int, rho_levels: int) -> Action:
    """위상과 ρ를 균등 격자의 가장 가까운 점으로 투영합니다.

    위상은 [0, 2π)의 2^phase_bits 점, ρ는 [0, 1]의 rho_levels 점으로 투영하며, 동률이면
    작은 값을 고릅니다.

    Args:
        action (Action): 연속 행동.
        phase_bits (int): 위상 비트 수 (1 이상).
        rho_levels (int): ρ 격자 수 (2 이상).

    Returns:
        Action: 양자화된 행동.
    """
    if phase_bits < 1 or rho_levels < 2:
        raise InputValidationError(
            f"phase_bits ≥ 1, rho_levels ≥ 2 이어야 합니다: {phase_bits}, {rho_levels}"
        )
    n_phases = 2**phase_bits
    spacing = TWO_PI / n_phases
    phase_index = np.ceil(action.theta / spacing - 0.5).astype(np.int64) % n_phases
    rho_step = 1.0 / (rho_levels - 1)
    rho_index = int(np.ceil(action.rho / rho_step - 0.5))
    rho = min(1.0, max(0.0, rho_index * rho_step))
    return Action(rho=rho, w=action.w, theta=phase_index * spacing)


@dataclass
class RewardNormalizer:
    """원시 보상을 누적 최대값으로 나눕니다. 최대값은 환경 인스턴스 수명 동안 유지됩니다."""

    peak: float = 0.0

    def observe(self, reward: float) -> float:
        self.peak = max(self.peak, reward)
        return self.scale(reward)

    def scale(self, reward: float) -> float:
        if self.peak <= 0.0:
            return 0.0
        return reward / self.peak

    def peek(self, reward: float) -> float:
        """reward를 관측했다고 가정한 정규화 값. 최대값은 갱신하지 않습니다."""
        peak = max(self.peak, reward)
        return reward / peak if peak > 0.0 else 0.0


def build_state(
    est: ChannelSet,
    prev_rho: float,
    prev_reward_norm: float,
    ref_direct: float,
    ref_cascade: float,
) -> RVec:
    """추정 채널과 이전 행동 정보로 상태 특징 벡터를 만듭니다.

    [Re/Im est_h_d (2M), Re/Im conj(est_h_r,n)·est_H_n,m (2NM), 이전 ρ, 이전 정규화 보상]
    직접 링크는 ref_direct, 반사 링크는 ref_cascade로 나누어 크기를 1 근처로 맞춥니다.
    반사 항 conj(h_r,n)·H_n,m의 전력은 link_gain(d_ap_irs)·link_gain(d_irs_user)에 비례하므로
    ref_cascade는 sqrt(link_gain(d_ap_user))가 아니라 두 구간 이득 곱의 제곱근입니다.
    """
    direct = est.h_d / ref_direct
    cascade = (est.h_r.conj()[:, None] * est.H).ravel() / ref_cascade
    return np.concatenate(
        [
            direct.real,
            direct.imag,
            cascade.real,
            cascade.imag,
            np.array([prev_rho, prev_reward_norm]),
        ]
    ).astype(np.float64)


@dataclass
class IrsEnvironment:
    """IRS 보조 MISO 하향링크 환경

    한 인스턴스는 단일 스레드에서만 사용하며, 자신의 RngStream을 소유합니다.

    Attributes:
        cfg (SystemConfig): 시스템 설정
        geom (Geometry): 링크 거리
        params (ChannelParams): 채널 파라미터
        rng (RngStream): 난수 스트림
    """

    cfg: SystemConfig
    geom: Geometry
    params: ChannelParams
    rng: RngStream
    normalizer: RewardNormalizer = field(default_factory=RewardNormalizer)
    _channels: ChannelRealization | None = field(default=None, init=False, repr=False)
    _t: int = field(default=0, init=False)
    _prev_rho: float = field(default=0.0, init=False)
    _prev_reward_norm: float = field(default=0.0, init=False)

    @property
    def state_dim(self) -> int:
        return 2 * self.cfg.M + 2 * self.cfg.N * self.cfg.M + 2

    @property
    def channels(self) -> ChannelRealization:
        """현재 채널 실현. reset() 이전에는 EpisodeStateError를 발생시킵니다."""
        if self._channels is None:
            raise EpisodeStateError("reset() 이전에는 채널이 없습니다.")
        return self._channels

    @property
    def step_count(self) -> int:
        return self._t

    def _state(self, prev_rho: float, prev_reward_norm: float) -> RVec:
        g_ud, g_ai, g_iu = self.channels.gains
        return build_state(
            self.channels.estimate,
            prev_rho,
            prev_reward_norm,
            ref_direct=float(np.sqrt(g_ud)),
            ref_cascade=float(np.sqrt(g_ai * g_iu)),
        )

    def reset(self) -> RVec:
        """새 채널을 샘플링하고 에피소드를 시작합니다.

        Returns:
            RVec: 길이 2M + 2NM + 2의 초기 상태. 이전 행동 특징은 0입니다.
        """
        self._channels = sample_channels(self.geom, self.params, self.cfg.M, self.cfg.N, self.rng)
        self._t = 0
        self._prev_rho = 0.0
        self._prev_reward_norm = 0.0
        logger.debug("환경 reset: M=%s, N=%s", self.cfg.M, self.cfg.N)
        return self._state(0.0, 0.0)

    def project_state(self, rho: float, reward_norm: float) -> RVec:
        """현재 추정 채널에 주어진 (ρ, 정규화 보상)을 붙인 상태를 만듭니다. 채널은 진행하지 않습니다."""
        return self._state(rho, reward_norm)

    def step(self, action: Action) -> StepOutcome:
        """행동을 실행하고 채널을 한 스텝 진행합니다.

        보상은 실행 전 실제 채널에서 평가하며, 다음 상태는 새 추정 채널과 이번 행동의
        (ρ, 정규화 보상)으로 구성합니다.

        Args:
            action (Action): 실행할 행동.

        Returns:
            StepOutcome: 보상, 다음 상태, 종료 여부, 평가 정보.

        Raises:
            EpisodeStateError: reset() 이전이거나 이미 끝난 에피소드에서 호출한 경우.
        """
        if self._channels is None:
            raise EpisodeStateError("reset() 이전에 step()을 호출했습니다.")
        if self._t >= self.cfg.episode_len:
            raise EpisodeStateError("이미 종료된 에피소드에서 step()을 호출했습니다.")

        ev = evaluate(action, self._channels.truth, self.cfg)
        reward = compute_reward(ev, self.cfg)
        reward_norm = self.normalizer.observe(reward)

        self._channels = evolve_channels(self._channels, self.params, self.rng)
        self._t += 1
        self._prev_rho = action.rho
        self._prev_reward_norm = reward_norm
        done = self._t >= self.cfg.episode_len
        return StepOutcome(
            reward=reward,
            reward_norm=reward_norm,
            next_state=self._state(action.rho, reward_norm),
            done=done,
            info=ev,
        )

"""실험 설정 스키마 모듈

이 모듈은 TOML 설정 파일의 각 섹션을 Pydantic 모델로 정의합니다.
알 수 없는 키는 거부되며(extra="forbid"), 값의 범위는 필드 제약과 검증기로 확인합니다.

클래스 목록:
    - SystemConfig: 시스템 모델 파라미터 (안테나 수, 전력, 잡음 등)
    - Geometry: AP, IRS, 사용자 사이의 링크 거리
    - ChannelParams: 경로 손실, 페이딩, 채널 추정 오차 파라미터
    - InnerOptConfig: 모델 기반 최적화 모듈의 탐색 스케줄
    - AgentConfig: DRL 에이전트 하이퍼파라미터
    - ExperimentSection / SweepConfig / ScalabilityConfig / ValidateConfig / ScalingLawConfig
    - ExperimentConfig: 전체 실험 설정
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

AgentKind = Literal["mf-ddpg", "od-ddpg", "mf-dqn", "od-dqn", "ao-only"]


class Section(BaseModel):
    """모든 설정 섹션의 공통 베이스. 정의되지 않은 키를 허용하지 않습니다."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class SystemConfig(Section):
    """시스템 모델 설정

    Attributes:
        M (int): AP 안테나 수
        N (int): IRS 반사 소자 수
        snr_min_db (float): 수신 SNR 요구치 (dB)
        noise_w (float): 잡음 전력 (W). −80 dBm = 1e-11 W
        eta (float): 에너지 하베스팅 효율, (0, 1]
        p_irs_w (float): IRS 전력 요구량 (W)
        p_max_w (float): AP 송신 전력 상한 (W)
        p_circuit_w (float): 보상 분모의 고정 회로 전력 (W)
        discount (float): 할인율, [0, 1)
        episode_len (int): 에피소드당 스텝 수
        reward_mode (str): "threshold"는 log2(1+γ_min), "achievable"은 log2(1+snr)
        phase_bits (int | None): 설정하면 실행 행동의 위상을 2^phase_bits 점, ρ를 agent.rho_levels 점으로 양자화합니다
    """

    M: int = Field(4, ge=1)
    N: int = Field(20, ge=1)
    snr_min_db: float = 10.0
    noise_w: float = Field(1e-11, gt=0)
    eta: float = Field(0.5, gt=0, le=1)
    p_irs_w: float = Field(1e-6, ge=0)
    p_max_w: float = Field(1.0, ge=0)
    p_circuit_w: float = Field(1e-3, ge=0)
    discount: float = Field(0.95, ge=0, lt=1)
    episode_len: int = Field(100, ge=1)
    reward_mode: Literal["threshold", "achievable"] = "threshold"
    phase_bits: int | None = Field(None, ge=1)

    @property
    def gamma_min(self) -> float:
        """선형 스케일 SNR 요구치"""
        return float(10.0 ** (self.snr_min_db / 10.0))


class Geometry(Section):
    """링크 거리 (m)

    세 거리는 서로 독립적인 설정 값이며 2차원 좌표에서 유도하지 않습니다.

    Attributes:
        d_ap_user (float): AP→사용자 거리
        d_ap_irs (float): AP→IRS 거리
        d_irs_user (float): IRS→사용자 거리
    """

    d_ap_user: float = Field(20.0, gt=0)
    d_ap_irs: float = Field(10.0, gt=0)
    d_irs_user: float = Field(5.0, gt=0)


class ChannelParams(Section):
    """채널 모델 파라미터

    Attributes:
        l0_db (float): 기준 거리 1 m에서의 경로 손실 (dB)
        alpha (float): 경로 손실 지수, 2 이상
        corr (float): 스텝 간 Gauss-Markov 상관 계수, [0, 1]
        eps (float): 상대 추정 오차 반경, [0, 1)
        rician_k (float): Rician K-factor. 0이면 Rayleigh 페이딩
    """

    l0_db: float = Field(30.0, gt=0)
    alpha: float = Field(3.5, ge=2)
    corr: float = Field(0.95, ge=0, le=1)
    eps: float = Field(0.0, ge=0, lt=1)
    rician_k: float = Field(0.0, ge=0)


class InnerOptConfig(Section):
    """모델 기반 최적화 모듈 설정

    Attributes:
        grid_points (int): 방향 탐색의 t 격자 점 수
        golden_tol (float): golden-section 최종 구간 폭
        ao_max_iter (int): 교대 최적화 최대 반복 수
        ao_rtol (float): 교대 최적화 상대 개선 정지 기준
        ao_rho_grid (int): 교대 최적화의 ρ 격자 점 수
    """

    grid_points: int = Field(64, ge=2)
    golden_tol: float = Field(1e-4, gt=0, lt=1)
    ao_max_iter: int = Field(50, ge=1)
    ao_rtol: float = Field(1e-6, gt=0)
    ao_rho_grid: int = Field(11, ge=2)


class AgentConfig(Section):
    """DRL 에이전트 하이퍼파라미터

    Attributes:
        lr_actor (float): actor 학습률
        lr_critic (float): critic 학습률
        lr_q (float): DQN Q-network 학습률
        tau (float): soft update 계수, (0, 1]
        batch (int): 미니배치 크기
        buffer (int): 리플레이 버퍼 용량
        warmup (int): 학습 시작 전 최소 transition 수
        hidden (list[int]): 은닉층 폭
        noise_sigma (float): 가우시안 탐색 잡음 초기 표준편차
        noise_decay (float): 에피소드마다 곱해지는 잡음 감쇠율
        p_opt_start (float): 최적화 기반 target 선호 확률 시작 값
        p_opt_end (float): 최적화 기반 target 선호 확률 끝 값
        p_opt_anneal_fraction (float): 전체 학습 스텝 중 선형 감소가 진행되는 비율
        rho_levels (int): DQN의 ρ 격자 수
        power_levels (int): 모델 프리 DQN의 송신 전력 격자 수
        phase_codebook (int): 모델 프리 DQN의 위상 코드북 크기
        epsilon_start (float): ε-greedy 시작 값
        epsilon_end (float): ε-greedy 최소 값
        epsilon_decay (float): 에피소드마다 곱해지는 ε 감쇠율
        target_period (int): 0보다 크면 그 스텝 수마다 DQN target을 hard copy
    """

    lr_actor: float = Field(1e-4, gt=0)
    lr_critic: float = Field(1e-3, gt=0)
    lr_q: float = Field(1e-3, gt=0)
    tau: float = Field(0.005, gt=0, le=1)
    batch: int = Field(64, ge=1)
    buffer: int = Field(100_000, ge=1)
    warmup: int = Field(500, ge=1)
    hidden: list[int] = Field(default_factory=lambda: [128, 128])
    noise_sigma: float = Field(0.2, ge=0)
    noise_decay: float = Field(0.999, gt=0, le=1)
    p_opt_start: float = Field(1.0, ge=0, le=1)
    p_opt_end: float = Field(0.1, ge=0, le=1)
    p_opt_anneal_fraction: float = Field(0.5, gt=0, le=1)
    rho_levels: int = Field(11, ge=2)
    power_levels: int = Field(8, ge=1)
    phase_codebook: int = Field(4, ge=1)
    epsilon_start: float = Field(1.0, ge=0, le=1)
    epsilon_end: float = Field(0.05, ge=0, le=1)
    epsilon_decay: float = Field(0.99, gt=0, le=1)
    target_period: int = Field(0, ge=0)

    @field_validator("hidden")
    @classmethod
    def _check_hidden(cls, value: list[int]) -> list[int]:
        if not value or any(width < 1 for width in value):
            raise ValueError("hidden widths must be positive")
        return value

    @model_validator(mode="after")
    def _check_warmup(self) -> "AgentConfig":
        if self.warmup < self.batch:
            raise ValueError("warmup must be at least batch")
        if self.warmup > self.buffer:
            raise ValueError("warmup must not exceed buffer")
        return self


class ExperimentSection(Section):
    """실험 실행 설정

    Attributes:
        agent_kind (AgentKind): 에이전트 종류
        episodes (int): 에피소드 수
        repetitions (int): 독립 반복 수 (시드 base_seed + i)
        base_seed (int): 기본 시드 (u64)
        output (str): 결과 디렉터리
        record_timing (bool): True면 시간 컬럼에 실제 경과 시간을 기록. 기본값 False는 0.0을 기록해 CSV를 바이트 단위로 재현
        converged_fraction (float): 수렴 구간으로 보는 마지막 에피소드 비율
        checkpoint (bool): 반복마다 네트워크 체크포인트 저장 여부
    """

    agent_kind: AgentKind = "od-ddpg"
    episodes: int = Field(300, ge=1)
    repetitions: int = Field(50, ge=1)
    base_seed: int = Field(0, ge=0, lt=2**64)
    output: str = "results"
    record_timing: bool = False
    converged_fraction: float = Field(0.1, gt=0, le=1)
    checkpoint: bool = False


class SweepConfig(Section):
    """IRS 위치 스윕 설정

    Attributes:
        positions (list[float]): AP–사용자 선분 위의 IRS x 좌표 (m)
        irs_height (float): AP–사용자 선분으로부터 IRS까지의 수직 거리 (m)
        demands (list[float]): 비교할 IRS 전력 요구량 (W)
        p_max_w (float): 스윕에서 사용하는 AP 송신 전력 상한 (W)
    """

    positions: list[float] = Field(default_factory=lambda: [2.0, 5.0, 8.0, 11.0, 14.0, 17.0])
    irs_height: float = Field(5.0, gt=0)
    demands: list[float] = Field(default_factory=lambda: [0.0, 20e-6])
    p_max_w: float = Field(100.0, gt=0)

    @field_validator("positions")
    @classmethod
    def _check_positions(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("at least one position is required")
        return value


class ScalabilityConfig(Section):
    """실행 시간 확장성 측정 설정

    Attributes:
        sizes (list[list[int]]): 측정할 (M, N) 목록
        epochs (int): 학습 방식의 결정 에폭 측정 횟수
        ao_epochs (int): 교대 최적화 측정 횟수
    """

    sizes: list[list[int]] = Field(
        default_factory=lambda: [[2, 8], [4, 16], [4, 32], [8, 64]]
    )
    epochs: int = Field(1000, ge=1)
    ao_epochs: int = Field(20, ge=1)

    @field_validator("sizes")
    @classmethod
    def _check_sizes(cls, value: list[list[int]]) -> list[list[int]]:
        if not value:
            raise ValueError("at least one size is required")
        for pair in value:
            if len(pair) != 2 or min(pair) < 1:
                raise ValueError("each size must be [M, N] with positive entries")
        return value


class ValidateConfig(Section):
    """내부 솔버 검증 설정

    Attributes:
        instances (int): 무작위 인스턴스 수
        M (int): 안테나 수. 2이면 dense grid oracle, 그 외에는 random-restart oracle
        N (int): IRS 소자 수
        rho (float): 고정 PS 비율
        zero_demand (bool): True면 p_irs_w = 0 인스턴스 (closed form 비교)
        grid_points (int): dense grid 각 축의 점 수
        restarts (int): random-restart oracle의 시작점 수
    """

    instances: int = Field(100, ge=1)
    M: int = Field(2, ge=1)
    N: int = Field(8, ge=1)
    rho: float = Field(0.5, ge=0, lt=1)
    zero_demand: bool = False
    grid_points: int = Field(400, ge=8)
    restarts: int = Field(200, ge=1)


class ScalingLawConfig(Section):
    """수신 전력 스케일링 법칙 측정 설정

    Attributes:
        n_list (list[int]): 오름차순 IRS 소자 수 목록
        draws (int): N마다 채널 샘플 수
    """

    n_list: list[int] = Field(default_factory=lambda: [4, 8, 16, 32, 64])
    draws: int = Field(1000, ge=1)

    @field_validator("n_list")
    @classmethod
    def _check_ascending(cls, value: list[int]) -> list[int]:
        if not value or any(n < 1 for n in value):
            raise ValueError("n_list must hold positive counts")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n_list must be strictly ascending")
        return value


class ExperimentConfig(Section):
    """전체 실험 설정. TOML 파일의 섹션 구조와 동일합니다."""

    system: SystemConfig = Field(default_factory=SystemConfig)
    geometry: Geometry = Field(default_factory=Geometry)
    channel: ChannelParams = Field(default_factory=ChannelParams)
    inner: InnerOptConfig = Field(default_factory=InnerOptConfig)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    scalability: ScalabilityConfig = Field(default_factory=ScalabilityConfig)
    validate_solver: ValidateConfig = Field(default_factory=ValidateConfig, alias="validate")
    scaling_law: ScalingLawConfig = Field(default_factory=ScalingLawConfig)

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

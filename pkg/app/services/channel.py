"""채널 생성 서비스 모듈

네트워크 기하 구조로부터 경로 손실 모델, 페이딩, 유계 추정 오차를 적용한 채널 실현을 만듭니다.

함수 목록:
    - link_gain: 거리 기반 선형 전력 이득
    - irs_link_distances: 평면 배치에서 IRS x 좌표를 링크 거리로 변환
    - perturb_estimate: 상대 반경 eps 공 안의 균등 추정 오차 추가
    - sample_channels: 새 채널 실현 생성
    - evolve_channels: Gauss-Markov 시간 상관 갱신

에이전트는 추정값만 관측하고, 보상과 실현 가능성은 실제 채널에서 평가합니다.
"""

from dataclasses import dataclass, field

import numpy as np

from app.schemas.config import ChannelParams, Geometry
from app.utils.errors import InputValidationError
from app.utils.numerics import CMat, CVec, RngStream, sample_cn


@dataclass(frozen=True)
class ChannelSet:
    """세 개의 복소 채널 묶음

    Attributes:
        h_d (CVec): AP→사용자 직접 채널, 길이 M
        H (CMat): AP→IRS 채널, N×M
        h_r (CVec): IRS→사용자 채널, 길이 N
    """

    h_d: CVec
    H: CMat
    h_r: CVec

    @property
    def M(self) -> int:
        return int(self.h_d.shape[0])

    @property
    def N(self) -> int:
        return int(self.h_r.shape[0])


@dataclass(frozen=True)
class ChannelRealization:
    """실제 채널과 추정 채널을 함께 담는 채널 실현

    Attributes:
        h_d, H, h_r: 실제 채널
        est_h_d, est_H, est_h_r: 같은 shape의 추정 채널
        gains (tuple[float, float, float]): (AP→사용자, AP→IRS, IRS→사용자) 선형 전력 이득
        los (ChannelSet | None): Rician LoS 성분 (이득과 K-factor 가중 포함). Rayleigh면 None
    """

    h_d: CVec
    H: CMat
    h_r: CVec
    est_h_d: CVec
    est_H: CMat
    est_h_r: CVec
    gains: tuple[float, float, float]
    los: ChannelSet | None = field(default=None)

    @property
    def M(self) -> int:
        return int(self.h_d.shape[0])

    @property
    def N(self) -> int:
        return int(self.h_r.shape[0])

    @property
    def truth(self) -> ChannelSet:
        """실제 채널"""
        return ChannelSet(self.h_d, self.H, self.h_r)

    @property
    def estimate(self) -> ChannelSet:
        """에이전트와 최적화 모듈이 관측하는 추정 채널"""
        return ChannelSet(self.est_h_d, self.est_H, self.est_h_r)


def link_gain(d: float, params: ChannelParams) -> float:
    """거리 d에서의 선형 전력 이득을 반환합니다.

    gain = 10^(−(l0_db + 10·alpha·log10(d)) / 10)

    Args:
        d (float): 링크 거리 (m).
        params (ChannelParams): 경로 손실 파라미터.

    Returns:
        float: 선형 전력 이득.

    Raises:
        InputValidationError: d가 기준 거리 1 m보다 작은 경우.
    """
    if not d >= 1.0:
        raise InputValidationError(f"링크 거리는 기준 거리 1 m 이상이어야 합니다: d={d}")
    loss_db = params.l0_db + 10.0 * params.alpha * np.log10(d)
    return float(10.0 ** (-loss_db / 10.0))


def irs_link_distances(x: float, d_ap_user: float, height: float) -> Geometry:
    """AP–사용자 선분 위 높이 height에 있는 IRS의 x 좌표를 링크 거리로 변환합니다.

    Args:
        x (float): AP로부터의 수평 거리 (0 < x < d_ap_user).
        d_ap_user (float): AP–사용자 거리.
        height (float): 선분으로부터 IRS까지의 수직 거리.

    Returns:
        Geometry: 세 링크 거리.

    Raises:
        InputValidationError: x가 (0, d_ap_user) 밖인 경우.
    """
    if not 0.0 < x < d_ap_user:
        raise InputValidationError(f"IRS 위치는 (0, {d_ap_user}) 안이어야 합니다: x={x}")
    return Geometry(
        d_ap_user=d_ap_user,
        d_ap_irs=float(np.hypot(x, height)),
        d_irs_user=float(np.hypot(d_ap_user - x, height)),
    )


def perturb_estimate(h: CVec | CMat, eps: float, rng: RngStream) -> CVec | CMat:
    """반경 eps·‖h‖ 공 안에서 균등하게 뽑은 오차를 더합니다.

    norm은 원소별 2-norm(행렬은 Frobenius)이며, 복소 원소 n개는 실수 2n차원 공으로 다룹니다.

    Args:
        h (CVec | CMat): 실제 채널.
        eps (float): 상대 오차 반경, [0, 1).
        rng (RngStream): 난수 스트림.

    Returns:
        CVec | CMat: h + Δ, ‖Δ‖ ≤ eps·‖h‖.
    """
    if not 0.0 <= eps < 1.0:
        raise InputValidationError(f"eps는 [0, 1) 범위여야 합니다: {eps}")
    h = np.asarray(h, dtype=np.complex128)
    radius = eps * float(np.linalg.norm(h))
    if radius == 0.0:
        return h.copy()
    direction = sample_cn(rng, h.shape)
    direction /= np.linalg.norm(direction)
    # 2n차원 공의 균등 반지름 분포
    r = radius * float(rng.random()) ** (1.0 / (2 * h.size))
    return h + r * direction


def _steering(n: int, angle: float) -> CVec:
    """반파장 간격 ULA 조향 벡터"""
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def _los_components(
    gains: tuple[float, float, float], K: float, M: int, N: int, rng: RngStream
) -> ChannelSet:
    weight = np.sqrt(K / (K + 1.0))
    aod_user, aod_irs, aoa_irs, aod_irs_user = rng.uniform(-np.pi / 2, np.pi / 2, 4)
    g_ud, g_ai, g_iu = gains
    return ChannelSet(
        h_d=np.sqrt(g_ud) * weight * _steering(M, aod_user),
        H=np.sqrt(g_ai) * weight * np.outer(_steering(N, aoa_irs), _steering(M, aod_irs).conj()),
        h_r=np.sqrt(g_iu) * weight * _steering(N, aod_irs_user),
    )


def _scatter(gains: tuple[float, float, float], K: float, M: int, N: int, rng: RngStream) -> ChannelSet:
    """단위 분산 복소 가우시안에 링크 이득과 산란 가중치를 곱한 성분"""
    weight = np.sqrt(1.0 / (K + 1.0))
    g_ud, g_ai, g_iu = gains
    return ChannelSet(
        h_d=np.sqrt(g_ud) * weight * sample_cn(rng, M),
        H=np.sqrt(g_ai) * weight * sample_cn(rng, (N, M)),
        h_r=np.sqrt(g_iu) * weight * sample_cn(rng, N),
    )


def _with_estimates(
    truth: ChannelSet,
    gains: tuple[float, float, float],
    los: ChannelSet | None,
    eps: float,
    rng: RngStream,
) -> ChannelRealization:
    return ChannelRealization(
        h_d=truth.h_d,
        H=truth.H,
        h_r=truth.h_r,
        est_h_d=perturb_estimate(truth.h_d, eps, rng),
        est_H=perturb_estimate(truth.H, eps, rng),
        est_h_r=perturb_estimate(truth.h_r, eps, rng),
        gains=gains,
        los=los,
    )


def sample_channels(
    geom: Geometry, params: ChannelParams, M: int, N: int, rng: RngStream
) -> ChannelRealization:
    """기하 구조로부터 새 채널 실현을 생성합니다.

    각 원소는 sqrt(해당 홉의 링크 이득) × 단위 분산 복소 가우시안이며, rician_k > 0이면
    LoS 조향 성분이 더해집니다. 추정값은 perturb_estimate로 만든 유계 오차를 포함합니다.

    Args:
        geom (Geometry): 링크 거리.
        params (ChannelParams): 채널 파라미터.
        M (int): AP 안테나 수.
        N (int): IRS 소자 수.
        rng (RngStream): 난수 스트림.

    Returns:
        ChannelRealization: 실제 채널과 추정 채널.
    """
    if M < 1 or N < 1:
        raise InputValidationError(f"M, N은 1 이상이어야 합니다: M={M}, N={N}")
    gains = (
        link_gain(geom.d_ap_user, params),
        link_gain(geom.d_ap_irs, params),
        link_gain(geom.d_irs_user, params),
    )
    K = params.rician_k
    scatter = _scatter(gains, K, M, N, rng)
    los = _los_components(gains, K, M, N, rng) if K > 0 else None
    if los is None:
        truth = scatter
    else:
        truth = ChannelSet(scatter.h_d + los.h_d, scatter.H + los.H, scatter.h_r + los.h_r)
    return _with_estimates(truth, gains, los, params.eps, rng)


def evolve_channels(
    prev: ChannelRealization, params: ChannelParams, rng: RngStream
) -> ChannelRealization:
    """Gauss-Markov 모델로 채널을 한 스텝 진행합니다.

    h_new = corr·h_old + sqrt(1−corr²)·innovation. innovation은 새 sample_channels 블록과 같은
    분포이며, Rician LoS 성분은 고정되고 산란 성분에만 갱신이 적용됩니다. 추정값은 다시 섭동됩니다.

    Args:
        prev (ChannelRealization): 이전 채널 실현.
        params (ChannelParams): 채널 파라미터.
        rng (RngStream): 난수 스트림.

    Returns:
        ChannelRealization: 다음 채널 실현.
    """
    corr = params.corr
    K = params.rician_k if prev.los is not None else 0.0
    innovation = _scatter(prev.gains, K, prev.M, prev.N, rng)
    los = prev.los
    zero = ChannelSet(np.zeros_like(prev.h_d), np.zeros_like(prev.H), np.zeros_like(prev.h_r))
    mean = los if los is not None else zero
    weight = np.sqrt(max(0.0, 1.0 - corr**2))

    def step(old: np.ndarray, mu: np.ndarray, fresh: np.ndarray) -> np.ndarray:
        return mu + corr * (old - mu) + weight * fresh

    if corr == 1.0:
        truth = prev.truth
    else:
        truth = ChannelSet(
            h_d=step(prev.h_d, mean.h_d, innovation.h_d),
            H=step(prev.H, mean.H, innovation.H),
            h_r=step(prev.h_r, mean.h_r, innovation.h_r),
        )
    return _with_estimates(truth, prev.gains, los, params.eps, rng)

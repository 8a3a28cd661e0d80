"""solve_active 검증용 전역 탐색 oracle

두 oracle 모두 단위 방향 d에 대한 필요 전력 s²(d) = max(c1/|gᴴd|², c2/‖Hd‖²)를 직접 탐색하며,
solve_active와 다른 방법으로 같은 최소값을 근사합니다.

    - dense_grid_oracle: M=2 전용. 전역 위상을 고정한 두 실수 각도 위의 조밀한 격자
    - restart_oracle: 일반 M. 무작위 시작점에서 출발하는 배치 경사 상승
"""

import numpy as np

from app.schemas.config import SystemConfig
from app.utils.errors import InputValidationError
from app.utils.numerics import CMat, CVec, RngStream, sample_cn


def _constants(rho: float, cfg: SystemConfig) -> tuple[float, float]:
    c1 = cfg.gamma_min * cfg.noise_w
    if cfg.p_irs_w == 0.0:
        return c1, 0.0
    if rho >= 1.0:
        return c1, np.inf
    return c1, cfg.p_irs_w / (cfg.eta * (1.0 - rho))


def _required_power_batch(D: np.ndarray, g: CVec, H: CMat, c1: float, c2: float) -> np.ndarray:
    """행마다 단위 방향을 담은 D (…×M)에 대한 s²(d)"""
    with np.errstate(divide="ignore"):
        snr_gain = np.abs(D @ g.conj()) ** 2
        need = c1 / snr_gain
        if c2 > 0.0:
            harvest_gain = np.sum(np.abs(D @ H.T) ** 2, axis=-1)
            need = np.maximum(need, c2 / harvest_gain)
    return need


def dense_grid_oracle(
    g: CVec, H: CMat, rho: float, cfg: SystemConfig, points: int = 400
) -> float:
    """M=2에서 d = (cos α, sin α·e^{jφ}) 격자 위의 최소 필요 전력을 구합니다.

    Args:
        g (CVec): 합성 채널, 길이 2.
        H (CMat): AP→IRS 채널, N×2.
        rho (float): PS 비율.
        cfg (SystemConfig): 시스템 설정.
        points (int): 각 축의 격자 점 수.

    Returns:
        float: 격자 최소 전력 (실제 최소값 이상).
    """
    if g.shape != (2,):
        raise InputValidationError("dense_grid_oracle은 M=2에서만 사용할 수 있습니다.")
    c1, c2 = _constants(rho, cfg)
    alpha = np.linspace(0.0, np.pi / 2, points)
    phi = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    a, p = np.meshgrid(alpha, phi, indexing="ij")
    D = np.stack([np.cos(a) + 0j, np.sin(a) * np.exp(1j * p)], axis=-1)
    return float(np.min(_required_power_batch(D, g, H, c1, c2)))


def restart_oracle(
    g: CVec,
    H: CMat,
    rho: float,
    cfg: SystemConfig,
    rng: RngStream,
    restarts: int = 200,
    iterations: int = 400,
) -> float:
    """무작위 시작점 restarts개에서 단위 구면 위 경사 상승으로 최소 필요 전력을 근사합니다.

    목적은 min(|gᴴd|²/c1, ‖Hd‖²/c2)의 로그를 온도 T의 soft-min으로 완화한 값이며, T와 스텝 크기를
    반복에 따라 기하급수적으로 줄입니다. 반환 값은 도달한 방향들에서 계산한 정확한 s²(d)의 최소값입니다.

    Args:
        g (CVec): 합성 채널, 길이 M.
        H (CMat): AP→IRS 채널, N×M.
        rho (float): PS 비율.
        cfg (SystemConfig): 시스템 설정.
        rng (RngStream): 시작점 난수 스트림.
        restarts (int): 시작점 수.
        iterations (int): 시작점마다의 반복 수.

    Returns:
        float: 근사 최소 전력 (실제 최소값 이상).
    """
    c1, c2 = _constants(rho, cfg)
    if c2 == 0.0:
        return c1 / float(np.vdot(g, g).real)
    if not np.isfinite(c2):
        return np.inf

    M = g.shape[0]
    D = sample_cn(rng, (restarts, M))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    best = _required_power_batch(D, g, H, c1, c2)

    temperatures = np.geomspace(1e-1, 1e-4, iterations)
    steps = np.geomspace(0.5, 1e-3, iterations)
    tiny = np.finfo(float).tiny
    for T, step in zip(temperatures, steps):
        proj = D @ g.conj()
        incident = D @ H.T
        snr_gain = np.maximum(np.abs(proj) ** 2, tiny)
        harvest_gain = np.maximum(np.sum(np.abs(incident) ** 2, axis=1), tiny)
        u = np.stack([np.log(snr_gain / c1), np.log(harvest_gain / c2)], axis=1)
        weights = np.exp(-(u - u.min(axis=1, keepdims=True)) / T)
        weights /= weights.sum(axis=1, keepdims=True)
        # ∂ log(dᴴQd)/∂d* = Qd/(dᴴQd)
        grad_snr = g[None, :] * proj[:, None] / snr_gain[:, None]
        grad_harvest = (incident @ H.conj()) / harvest_gain[:, None]
        grad = weights[:, :1] * grad_snr + weights[:, 1:] * grad_harvest
        radial = np.sum(D.conj() * grad, axis=1).real
        tangent = grad - radial[:, None] * D
        norm = np.linalg.norm(tangent, axis=1, keepdims=True)
        D = D + step * tangent / np.maximum(norm, tiny)
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        best = np.minimum(best, _required_power_batch(D, g, H, c1, c2))
    return float(best.min())

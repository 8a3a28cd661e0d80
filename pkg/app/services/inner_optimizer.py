"""모델 기반 최적화 모듈

ρ가 주어졌을 때 위상 θ와 능동 빔포밍 w를 구하는 최적화 모듈입니다.
DRL 에이전트가 ρ를 결정하면 이 모듈이 (w', θ')와 그 보상을 계산해 최적화 기반 target을 만듭니다.

함수 목록:
    - phase_update: 주어진 w에 대해 반사 신호를 직접 신호와 같은 위상으로 맞추는 θ
    - align_phases: 직접 채널 MRT 방향을 기준으로 한 휴리스틱 θ
    - solve_active: SNR, 하베스팅 제약 아래 ‖w‖² 최소화 (두 제약 QCQP의 방향 탐색 해법)
    - optimize_given_rho: θ 정렬 → w 최적화 → 실제 채널에서 보상 평가
    - ao_baseline: ρ 격자 위의 교대 최적화 기준선
"""

from dataclasses import dataclass, field, replace

import numpy as np

from app.config import logger
from app.schemas.config import InnerOptConfig, SystemConfig
from app.services.channel import ChannelRealization, ChannelSet
from app.services.environment import (
    Action,
    composite_channel,
    compute_reward,
    evaluate,
    wrap_phases,
)
from app.utils.errors import ConvergenceError, InputValidationError
from app.utils.numerics import CMat, CVec, RVec, top_eigpair
from app.utils.times import get_monotonic_seconds

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
POLISH_STEPS = 12


@dataclass(frozen=True)
class InnerSolution:
    """내부 최적화 해

    Attributes:
        w (CVec): 능동 빔포밍 벡터
        theta (RVec): 위상 벡터
        p_tx_w (float): ‖w‖²
        feasible (bool): 제약과 전력 상한을 만족하는지 여부
        reward (float): 실제 채널에서 평가한 보상 (solve_active 단독 호출 시 0.0)
    """

    w: CVec
    theta: RVec
    p_tx_w: float
    feasible: bool
    reward: float = 0.0

    def as_action(self, rho: float) -> Action:
        return Action(rho=rho, w=self.w, theta=self.theta)


@dataclass(frozen=True)
class AoResult:
    """교대 최적화 기준선 결과

    Attributes:
        solution (InnerSolution): 가장 좋은 해
        rho (float): 그 해의 PS 비율
        iterations (int): 모든 ρ에 대한 총 반복 수
        wall_time (float): 총 경과 시간 (초, 단조 시계)
        history (list[float]): 선택된 ρ에서의 반복별 목적 함수 값
    """

    solution: InnerSolution
    rho: float
    iterations: int
    wall_time: float
    history: list[float] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.solution.feasible


def phase_update(est: ChannelSet, w: CVec) -> RVec:
    """w가 고정일 때 |gᴴw|를 최대화하는 원소별 위상을 구합니다.

    θ_n = arg(h_dᴴw) − arg(conj(h_r,n)·(Hw)_n). 모든 반사 항이 직접 항과 같은 위상이 됩니다.
    """
    direct = np.vdot(est.h_d, w)
    reference = np.angle(direct) if abs(direct) > 0.0 else 0.0
    cascade = est.h_r.conj() * (est.H @ w)
    return wrap_phases(reference - np.angle(cascade))


def align_phases(est: ChannelSet) -> RVec:
    """직접 채널 MRT 방향을 기준으로 위상을 정렬합니다.

    기준 방향 w0 = est_h_d/‖est_h_d‖. 직접 채널이 0이면 est_H의 최대 right-singular 방향을 씁니다.

    Args:
        est (ChannelSet): 추정 채널.

    Returns:
        RVec: 길이 N의 위상.
    """
    norm = float(np.linalg.norm(est.h_d))
    if norm > 0.0:
        w0 = est.h_d / norm
    else:
        logger.debug("직접 채널이 0이므로 est_H의 특이 벡터로 위상을 정렬합니다.")
        _, _, vh = np.linalg.svd(est.H)
        w0 = vh[0].conj()
    return phase_update(est, w0)


def _required_power(d: CVec, g: CVec, H: CMat, c1: float, c2: float) -> float:
    """단위 방향 d로 두 제약을 만족하는 최소 전력 s²(d)"""
    snr_gain = float(np.abs(np.vdot(g, d)) ** 2)
    if snr_gain <= 0.0:
        return np.inf
    need = c1 / snr_gain
    if c2 > 0.0:
        incident = H @ d
        harvest_gain = float(np.vdot(incident, incident).real)
        need = max(need, c2 / harvest_gain) if harvest_gain > 0.0 else np.inf
    return need


def _infeasible(M: int, theta: RVec) -> InnerSolution:
    return InnerSolution(
        w=np.zeros(M, dtype=np.complex128), theta=theta, p_tx_w=0.0, feasible=False
    )


def solve_active(
    g: CVec,
    H: CMat,
    rho: float,
    cfg: SystemConfig,
    inner: InnerOptConfig | None = None,
    theta: RVec | None = None,
) -> InnerSolution:
    """SNR와 하베스팅 제약 아래 송신 전력 ‖w‖²를 최소화합니다.

    1) MRT 해 w = sqrt(γ_min·noise_w)/‖g‖² · g가 하베스팅 제약을 만족하면 그대로 반환합니다.
    2) 그렇지 않으면 단위 방향 d에 대한 필요 전력
       s²(d) = max(c1/|gᴴd|², c2/‖Hd‖²)를 (1−t)·A/tr(A) + t·B/tr(B)의 최대 고유벡터 경로 위에서
       최소화합니다. t 격자 탐색 후 golden-section으로 구간을 좁히고, 두 항이 같아지는 점을
       이분법으로 다듬습니다.

    Args:
        g (CVec): 합성 채널, 길이 M.
        H (CMat): AP→IRS 채널, N×M.
        rho (float): PS 비율.
        cfg (SystemConfig): 시스템 설정.
        inner (InnerOptConfig | None): 탐색 스케줄. None이면 기본값.
        theta (RVec | None): 해에 함께 담을 위상. None이면 0 벡터.

    Returns:
        InnerSolution: 해. p_tx_w > p_max_w이거나 제약을 만족할 수 없으면 feasible=False.
    """
    inner = inner or InnerOptConfig()
    g = np.asarray(g, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    M = g.shape[0]
    if H.ndim != 2 or H.shape[1] != M:
        raise InputValidationError(f"H의 열 수가 M={M}과 다릅니다: {H.shape}")
    if not 0.0 <= rho <= 1.0:
        raise InputValidationError(f"rho는 [0, 1] 범위여야 합니다: {rho}")
    theta = np.zeros(H.shape[0]) if theta is None else np.asarray(theta, dtype=np.float64)

    g_energy = float(np.vdot(g, g).real)
    if g_energy == 0.0:
        return _infeasible(M, theta)

    c1 = cfg.gamma_min * cfg.noise_w
    w_mrt = np.sqrt(c1) / g_energy * g

    if cfg.p_irs_w > 0.0 and rho >= 1.0:
        # 하베스팅 전력이 0이므로 SNR만 만족하는 MRT 해를 담아 infeasible로 표시합니다.
        return InnerSolution(w=w_mrt, theta=theta, p_tx_w=c1 / g_energy, feasible=False)

    incident = H @ w_mrt
    harvested = cfg.eta * (1.0 - rho) * float(np.vdot(incident, incident).real)
    if harvested >= cfg.p_irs_w:
        w = w_mrt
    else:
        c2 = cfg.p_irs_w / (cfg.eta * (1.0 - rho))
        w = _direction_search(g, H, c1, c2, inner)
        if w is None:
            return _infeasible(M, theta)

    p_tx = float(np.vdot(w, w).real)
    feasible = p_tx <= cfg.p_max_w * (1.0 + 1e-9)
    return InnerSolution(w=w, theta=theta, p_tx_w=p_tx, feasible=bool(feasible))


def _direction_search(
    g: CVec, H: CMat, c1: float, c2: float, inner: InnerOptConfig
) -> CVec | None:
    B = H.conj().T @ H
    b_trace = float(np.trace(B).real)
    if b_trace <= 0.0:
        return None
    A_norm = np.outer(g, g.conj()) / float(np.vdot(g, g).real)
    B_norm = B / b_trace

    cache: dict[float, tuple[float, CVec]] = {}

    def direction(t: float) -> tuple[float, CVec]:
        if t not in cache:
            try:
                _, d = top_eigpair((1.0 - t) * A_norm + t * B_norm)
            except ConvergenceError:
                logger.warning("방향 탐색 t=%.6f에서 고유쌍이 수렴하지 않아 건너뜁니다.", t)
                cache[t] = (np.inf, np.zeros_like(g))
            else:
                cache[t] = (_required_power(d, g, H, c1, c2), d)
        return cache[t]

    grid = np.linspace(0.0, 1.0, inner.grid_points)
    values = [direction(float(t))[0] for t in grid]
    best = int(np.argmin(values))
    lo = float(grid[max(best - 1, 0)])
    hi = float(grid[min(best + 1, len(grid) - 1)])

    # golden-section
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    while hi - lo > inner.golden_tol:
        if direction(x1)[0] <= direction(x2)[0]:
            hi, x2 = x2, x1
            x1 = hi - GOLDEN * (hi - lo)
        else:
            lo, x1 = x1, x2
            x2 = lo + GOLDEN * (hi - lo)

    # SNR 항은 t에 대해 증가, 하베스팅 항은 감소하므로 최적점은 두 항의 교차점입니다.
    def snr_dominates(t: float) -> bool:
        d = direction(t)[1]
        snr_need = c1 / max(float(np.abs(np.vdot(g, d)) ** 2), np.finfo(float).tiny)
        return snr_need >= direction(t)[0] * (1.0 - 1e-12)

    if snr_dominates(hi) and not snr_dominates(lo):
        for _ in range(POLISH_STEPS):
            mid = 0.5 * (lo + hi)
            if snr_dominates(mid):
                hi = mid
            else:
                lo = mid

    power, d = min(cache.values(), key=lambda item: item[0])
    if not np.isfinite(power):
        return None
    return np.sqrt(power) * d


def optimize_given_rho(
    rho: float,
    ch: ChannelRealization,
    cfg: SystemConfig,
    inner: InnerOptConfig | None = None,
) -> InnerSolution:
    """ρ를 고정하고 추정 채널로 (w, θ)를 최적화한 뒤 실제 채널에서 보상을 평가합니다.

    Args:
        rho (float): PS 비율, [0, 1].
        ch (ChannelRealization): 채널 실현. 최적화는 추정값, 보상은 실제값을 사용합니다.
        cfg (SystemConfig): 시스템 설정.
        inner (InnerOptConfig | None): 탐색 스케줄.

    Returns:
        InnerSolution: 해와 실제 채널 보상. 솔버가 infeasible이면 reward는 0입니다.
    """
    est = ch.estimate
    theta = align_phases(est)
    g = composite_channel(est, theta, rho)
    solution = solve_active(g, est.H, rho, cfg, inner, theta)
    if not solution.feasible:
        return solution
    ev = evaluate(solution.as_action(rho), ch.truth, cfg)
    return replace(solution, feasible=ev.feasible, reward=compute_reward(ev, cfg))


def _alternate(
    rho: float, est: ChannelSet, cfg: SystemConfig, inner: InnerOptConfig
) -> tuple[InnerSolution, list[float]]:
    """고정 ρ에서 위상 갱신과 w 최적화를 번갈아 수행합니다. 전력이 늘어나는 갱신은 거부합니다."""
    theta = align_phases(est)
    current = solve_active(composite_channel(est, theta, rho), est.H, rho, cfg, inner, theta)
    if not current.feasible:
        return current, []
    history = [current.p_tx_w]
    for _ in range(inner.ao_max_iter):
        theta = phase_update(est, current.w)
        candidate = solve_active(composite_channel(est, theta, rho), est.H, rho, cfg, inner, theta)
        if not candidate.feasible or candidate.p_tx_w > current.p_tx_w:
            break
        improvement = (current.p_tx_w - candidate.p_tx_w) / current.p_tx_w
        current = candidate
        history.append(current.p_tx_w)
        if improvement < inner.ao_rtol:
            break
    return current, history


def ao_baseline(
    ch: ChannelRealization,
    cfg: SystemConfig,
    inner: InnerOptConfig | None = None,
    rho_grid: int | None = None,
) -> AoResult:
    """균등 ρ 격자 위에서 교대 최적화를 수행하는 기준선입니다.

    각 ρ에서 (a) 원소별 위상 갱신과 (b) solve_active를 번갈아 수행하며, 전력이 줄지 않으면
    갱신을 거부합니다. 같은 전력의 해가 여러 개면 가장 작은 ρ를 선택합니다.

    Args:
        ch (ChannelRealization): 채널 실현. 최적화는 추정값, 보상은 실제값을 사용합니다.
        cfg (SystemConfig): 시스템 설정.
        inner (InnerOptConfig | None): 반복 상한과 정지 기준.
        rho_grid (int | None): ρ 격자 점 수. None이면 inner.ao_rho_grid.

    Returns:
        AoResult: 가장 좋은 해. 모든 ρ에서 infeasible이면 solution.feasible=False.
    """
    inner = inner or InnerOptConfig()
    rho_grid = rho_grid or inner.ao_rho_grid
    if rho_grid < 2:
        raise InputValidationError(f"rho_grid는 2 이상이어야 합니다: {rho_grid}")

    start = get_monotonic_seconds()
    est = ch.estimate
    best: tuple[float, InnerSolution, list[float]] | None = None
    iterations = 0
    for rho in np.linspace(0.0, 1.0, rho_grid):
        solution, history = _alternate(float(rho), est, cfg, inner)
        iterations += max(len(history), 1)
        if not solution.feasible:
            continue
        if best is None or solution.p_tx_w < best[1].p_tx_w:
            best = (float(rho), solution, history)

    if best is None:
        logger.debug("교대 최적화: 모든 ρ에서 infeasible")
        result = AoResult(
            solution=_infeasible(ch.M, align_phases(est)),
            rho=0.0,
            iterations=iterations,
            wall_time=get_monotonic_seconds() - start,
        )
        return result

    rho, solution, history = best
    ev = evaluate(solution.as_action(rho), ch.truth, cfg)
    solution = replace(solution, feasible=ev.feasible, reward=compute_reward(ev, cfg))
    return AoResult(
        solution=solution,
        rho=rho,
        iterations=iterations,
        wall_time=get_monotonic_seconds() - start,
        history=history,
    )

"""실험 오케스트레이션 서비스 모듈

CLI 하위 명령 각각의 실험 절차를 구현합니다. 모든 함수는 결과 CSV 경로 목록을 반환하며,
결과 디렉터리에는 실제로 사용한 설정(config.toml)도 함께 기록합니다.

함수 목록:
    - cmd_train: 반복 학습, 스텝 기록과 에피소드/수렴 구간 요약
    - cmd_sweep_position: IRS 위치 스윕 (IRS 전력 요구량별)
    - cmd_scalability: 결정 에폭 시간 측정 (od-ddpg vs 교대 최적화)
    - cmd_validate_solver: solve_active와 oracle 비교
    - cmd_scaling_law: 수신 전력의 N 스케일링 측정
"""

from pathlib import Path

import numpy as np

from app.config import dump_experiment_config, logger
from app.jobs.pool import run_repetitions
from app.schemas.config import ExperimentConfig, SystemConfig
from app.schemas.records import (
    FitRow,
    RunRecord,
    ScalabilityRow,
    ScalingLawRow,
    SolverReportRow,
    SolverSummaryRow,
    SummaryRow,
    TrendRow,
)
from app.services.channel import ChannelSet, irs_link_distances, sample_channels
from app.services.environment import composite_channel
from app.services.inner_optimizer import ao_baseline, phase_update, solve_active
from app.services.solver_oracles import dense_grid_oracle, restart_oracle
from app.services.training import TrainingLoop
from app.utils.errors import OutputError
from app.utils.numerics import RngStream
from app.utils.records import (
    converged_summaries,
    episode_summaries,
    nearest_rank,
    prepare_output_dir,
    spearman,
    write_rows,
)
from app.utils.times import Stopwatch

SWEEP_AGENT = "od-ddpg"


def write_config(config: ExperimentConfig, out: Path) -> Path:
    path = out / "config.toml"
    try:
        path.write_text(dump_experiment_config(config), encoding="utf-8")
    except OSError as err:
        raise OutputError(f"설정 파일을 쓸 수 없습니다: {path}: {err}") from err
    return path


def _flatten(repetitions: list[list[RunRecord]]) -> list[RunRecord]:
    return [record for records in repetitions for record in records]


def cmd_train(config: ExperimentConfig, out: str | Path) -> list[Path]:
    """repetitions개의 독립 학습을 실행하고 기록과 요약을 CSV로 남깁니다.

    Args:
        config (ExperimentConfig): 실험 설정. 시드는 base_seed + i.
        out (str | Path): 결과 디렉터리.

    Returns:
        list[Path]: runs, summary, converged CSV와 config.toml 경로.

    Raises:
        OutputError: 결과 디렉터리에 쓸 수 없는 경우.
    """
    out = prepare_output_dir(out)
    experiment = config.experiment
    kind = experiment.agent_kind
    checkpoint_dir = out / "checkpoints" if experiment.checkpoint else None
    logger.info("Training %s: %d repetitions x %d episodes", kind, experiment.repetitions, experiment.episodes)

    records = _flatten(run_repetitions(config, checkpoint_dir=checkpoint_dir))
    paths = [
        write_config(config, out),
        write_rows(records, RunRecord, out / f"runs_{kind}.csv"),
        write_rows(episode_summaries(records, kind), SummaryRow, out / f"summary_{kind}.csv"),
        write_rows(
            converged_summaries(records, kind, experiment.converged_fraction, experiment.episodes),
            SummaryRow,
            out / f"converged_{kind}.csv",
        ),
    ]
    return paths


def _sweep_series(demand: float) -> str:
    return f"p_irs_w={demand:g}"


def cmd_sweep_position(config: ExperimentConfig, out: str | Path) -> list[Path]:
    """IRS 위치를 AP에서 사용자 쪽으로 옮기며 od-ddpg의 수렴 송신 전력을 측정합니다.

    각 위치는 AP–사용자 선분 위 irs_height 높이의 평면 배치로 링크 거리를 만들며,
    sweep.demands의 IRS 전력 요구량마다 같은 스윕을 반복합니다.

    Returns:
        list[Path]: sweep(SummaryRow, 지표 p_tx_w)과 trend(TrendRow) CSV 경로.
    """
    out = prepare_output_dir(out)
    sweep = config.sweep
    experiment = config.experiment
    summary_rows: list[SummaryRow] = []
    trend_rows: list[TrendRow] = []
    for demand in sweep.demands:
        system = config.system.model_copy(update={"p_irs_w": demand, "p_max_w": sweep.p_max_w})
        scenario = config.model_copy(update={"system": system})
        series = _sweep_series(demand)
        medians: list[float] = []
        for position in sweep.positions:
            geometry = irs_link_distances(position, config.geometry.d_ap_user, sweep.irs_height)
            logger.info("Sweep %s at x=%.2f m (d_ap_irs=%.3f, d_irs_user=%.3f)", series, position, geometry.d_ap_irs, geometry.d_irs_user)
            records = _flatten(run_repetitions(scenario, kind=SWEEP_AGENT, geometry=geometry))
            rows = converged_summaries(records, series, experiment.converged_fraction, experiment.episodes)
            converged = next(r for r in rows if r.metric == "p_tx_w")
            row = converged.model_copy(update={"x": float(position)})
            if not any(r.feasible for r in records if r.episode >= converged.x):
                logger.warning("No feasible step in the converged window at x=%.2f (%s)", position, series)
            summary_rows.append(row)
            medians.append(row.median)
        trend_rows.append(
            TrendRow(series=series, spearman=spearman(sweep.positions, medians), points=len(medians))
        )
    return [
        write_config(config, out),
        write_rows(summary_rows, SummaryRow, out / "sweep_position.csv"),
        write_rows(trend_rows, TrendRow, out / "sweep_trend.csv"),
    ]


def cmd_scalability(config: ExperimentConfig, out: str | Path) -> list[Path]:
    """크기 (M, N)마다 od-ddpg의 결정 에폭 시간과 교대 최적화 시간을 같은 채널에서 측정합니다.

    od-ddpg 에폭은 행동 선택, 내부 최적화, 환경 스텝, 학습 스텝을 포함합니다. warmup 구간은
    측정하지 않습니다. 시간 측정이 목적이므로 record_timing 설정과 무관하게 기록합니다.

    Returns:
        list[Path]: scalability(ScalabilityRow)와 scalability_fit(FitRow) CSV 경로.
    """
    out = prepare_output_dir(out)
    scal = config.scalability
    seed = config.experiment.base_seed
    rows: list[ScalabilityRow] = []
    for M, N in scal.sizes:
        system = config.system.model_copy(update={"M": M, "N": N})
        scenario = config.model_copy(update={"system": system})
        loop = TrainingLoop(scenario, seed, kind=SWEEP_AGENT)
        for _ in range(scenario.agent.warmup):
            loop.run_step()

        learned: list[float] = []
        draws = []
        for _ in range(scal.epochs):
            if len(draws) < scal.ao_epochs:
                if loop.state is None or loop.step_in_episode >= system.episode_len:
                    loop.start_episode()
                draws.append(loop.env.channels)
            watch = Stopwatch()
            with watch.lap():
                loop.run_step()
            learned.append(watch.total)

        baseline: list[float] = []
        for channels in draws:
            baseline.append(ao_baseline(channels, system, config.inner).wall_time)

        for method, times in ((SWEEP_AGENT, learned), ("ao-baseline", baseline)):
            rows.append(
                ScalabilityRow(
                    method=method,
                    M=M,
                    N=N,
                    mn=M * N,
                    mean_epoch_time_s=float(np.mean(times)),
                    median_epoch_time_s=nearest_rank(times, 50),
                    epochs=len(times),
                )
            )
        logger.info("Scalability M=%d N=%d: learned %.3e s, ao %.3e s", M, N, rows[-2].mean_epoch_time_s, rows[-1].mean_epoch_time_s)

    fit_rows: list[FitRow] = []
    degree = min(2, len(scal.sizes) - 1)
    for method in (SWEEP_AGENT, "ao-baseline"):
        series = [row for row in rows if row.method == method]
        x = np.array([row.mn for row in series], dtype=np.float64)
        y = np.array([row.mean_epoch_time_s for row in series])
        coefficients = np.polyfit(x, y, degree)
        # polyfit은 최고차항부터 반환합니다.
        for power, coefficient in zip(range(degree, -1, -1), coefficients):
            fit_rows.append(FitRow(method=method, power=power, coefficient=float(coefficient)))
    return [
        write_config(config, out),
        write_rows(rows, ScalabilityRow, out / "scalability.csv"),
        write_rows(fit_rows, FitRow, out / "scalability_fit.csv"),
    ]


def _active_demand(g: np.ndarray, H: np.ndarray, rho: float, system: SystemConfig) -> float:
    """두 제약이 모두 활성화되도록 IRS 전력 요구량을 고릅니다.

    MRT 해가 하베스팅 제약을 어기고, 하베스팅 단독 최적해가 SNR 제약을 어기는 구간의 기하 평균입니다.
    """
    c1 = system.gamma_min * system.noise_w
    g_energy = float(np.vdot(g, g).real)
    mrt = g / np.sqrt(g_energy)
    b_mrt = float(np.linalg.norm(H @ mrt) ** 2)
    _, s, vh = np.linalg.svd(H)
    d_harvest = vh[0].conj()
    a_harvest = max(float(np.abs(np.vdot(g, d_harvest)) ** 2), np.finfo(float).tiny)
    lo = c1 * b_mrt / g_energy
    hi = c1 * float(s[0] ** 2) / a_harvest
    c2 = float(np.sqrt(lo * hi)) if hi > lo else 2.0 * lo
    return c2 * system.eta * (1.0 - rho)


def cmd_validate_solver(config: ExperimentConfig, out: str | Path) -> list[Path]:
    """무작위 인스턴스에서 solve_active를 oracle과 비교합니다.

    M=2는 dense grid oracle, 그 외에는 random-restart oracle을 사용하고, 전력 요구량이 0인
    인스턴스는 closed form γ_min·noise_w/‖g‖²와 비교합니다.

    Returns:
        list[Path]: solver_report(인스턴스마다 한 행)와 solver_summary CSV 경로.
    """
    out = prepare_output_dir(out)
    vc = config.validate_solver
    rng = RngStream(config.experiment.base_seed, 0)
    oracle_rng = RngStream(config.experiment.base_seed, 1)
    base = config.system.model_copy(update={"M": vc.M, "N": vc.N, "p_max_w": float("inf")})
    rows: list[SolverReportRow] = []
    for instance in range(vc.instances):
        channels = sample_channels(config.geometry, config.channel, vc.M, vc.N, rng)
        theta = rng.uniform(0.0, 2 * np.pi, vc.N)
        g = composite_channel(channels.truth, theta, vc.rho)
        H = channels.H
        demand = 0.0 if vc.zero_demand else _active_demand(g, H, vc.rho, base)
        system = base.model_copy(update={"p_irs_w": demand})
        solution = solve_active(g, H, vc.rho, system, config.inner)

        if demand == 0.0:
            oracle, reference = "closed-form", system.gamma_min * system.noise_w / float(np.vdot(g, g).real)
        elif vc.M == 2:
            oracle, reference = "grid", dense_grid_oracle(g, H, vc.rho, system, vc.grid_points)
        else:
            oracle, reference = "restart", restart_oracle(g, H, vc.rho, system, oracle_rng, vc.restarts)

        snr = float(np.abs(np.vdot(g, solution.w)) ** 2) / system.noise_w
        harvested = system.eta * (1.0 - vc.rho) * float(np.linalg.norm(H @ solution.w) ** 2)
        rows.append(
            SolverReportRow(
                instance=instance,
                oracle=oracle,
                solver_p_tx_w=solution.p_tx_w,
                oracle_p_tx_w=reference,
                gap=solution.p_tx_w / reference - 1.0,
                snr_slack=snr / system.gamma_min - 1.0,
                harvest_slack=harvested / demand - 1.0 if demand > 0.0 else 0.0,
                feasible=solution.feasible,
            )
        )
    gaps = np.array([row.gap for row in rows])
    summary = SolverSummaryRow(
        instances=len(rows),
        max_gap=float(gaps.max()),
        mean_gap=float(gaps.mean()),
        min_snr_slack=min(row.snr_slack for row in rows),
        min_harvest_slack=min(row.harvest_slack for row in rows),
    )
    logger.info("Solver validation: max gap %.3e, mean gap %.3e over %d instances", summary.max_gap, summary.mean_gap, summary.instances)
    return [
        write_config(config, out),
        write_rows(rows, SolverReportRow, out / "solver_report.csv"),
        write_rows([summary], SolverSummaryRow, out / "solver_summary.csv"),
    ]


def cmd_scaling_law(config: ExperimentConfig, out: str | Path) -> list[Path]:
    """직접 링크를 끈 상태(h_d = 0, ρ = 1)에서 평균 수신 전력의 N 스케일링을 측정합니다.

    w = e1 (1 W)로 고정하고, aligned 계열은 모든 반사 항의 위상을 맞추며 random 계열은
    무작위 위상을 씁니다. 위상을 맞추면 전력은 N²에, 무작위면 N에 비례합니다.

    Returns:
        list[Path]: scaling_law CSV 경로.
    """
    out = prepare_output_dir(out)
    sl = config.scaling_law
    M = config.system.M
    rng = RngStream(config.experiment.base_seed, 0)
    w = np.zeros(M, dtype=np.complex128)
    w[0] = 1.0
    means: dict[str, list[float]] = {"aligned": [], "random": []}
    for n in sl.n_list:
        aligned = np.empty(sl.draws)
        scattered = np.empty(sl.draws)
        for draw in range(sl.draws):
            channels = sample_channels(config.geometry, config.channel, M, n, rng)
            reflect = ChannelSet(h_d=np.zeros(M, dtype=np.complex128), H=channels.H, h_r=channels.h_r)
            theta = phase_update(reflect, w)
            aligned[draw] = np.abs(np.vdot(composite_channel(reflect, theta, 1.0), w)) ** 2
            random_theta = rng.uniform(0.0, 2 * np.pi, n)
            scattered[draw] = np.abs(np.vdot(composite_channel(reflect, random_theta, 1.0), w)) ** 2
        means["aligned"].append(float(aligned.mean()))
        means["random"].append(float(scattered.mean()))

    rows: list[ScalingLawRow] = []
    for series, values in means.items():
        for i, (n, value) in enumerate(zip(sl.n_list, values)):
            ratio = value / values[i - 1] if i > 0 else None
            rows.append(ScalingLawRow(series=series, n=n, mean_power_w=value, ratio_to_previous=ratio))
    return [
        write_config(config, out),
        write_rows(rows, ScalingLawRow, out / "scaling_law.csv"),
    ]

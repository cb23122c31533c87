"""
Монте-Карло оценка скорости ||S_n - S||_r ~ C n^{-slope}.

Реплики режутся на чанки фиксированного размера (settings.experiment.chunk_size),
каждый чанк - одна задача пула; результат не зависит от числа потоков.
"""
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from src.config import __version__, settings
from src.logs import getLogger
from src.models.experiment import ExperimentConfig, OracleMode, RateEstimate, Scenario
from src.models.integrands import ConvexSpec, LipschitzSpec
from src.models.paths import SamplingMethod
from src.services.discretize import bm_reference, coupled_errors, isometry_error_norm, pathwise_oracle
from src.services.fbm_sim import check_hurst, sample_many
from src.services.integrand import rate_param_violations
from src.utils.errors import (ContractViolationError, DomainError, InsufficientReplicatesError,
                              OracleDisagreementError, ParameterRangeError)
from src.utils.export import write_json
from src.utils.pool import ordered_map

logger = getLogger(__name__)

SCHEMA_VERSION = 1
BROWNIAN_CONVEX_EXPONENT = 0.25
BROWNIAN_LIPSCHITZ_EXPONENT = 0.5


def theoretical_exponent(cfg: ExperimentConfig) -> float:
    if cfg.scenario in (Scenario.fbm_convex, Scenario.fbm_geometric):
        return cfg.hurst / cfg.p_param - cfg.beta_param
    if cfg.scenario == Scenario.fbm_lipschitz:
        return 2 * cfg.hurst - 1 - cfg.epsilon
    if cfg.scenario == Scenario.bm_convex:
        return BROWNIAN_CONVEX_EXPONENT
    return BROWNIAN_LIPSCHITZ_EXPONENT


def best_exponent(H: float) -> float:
    """sup H/p - beta по допустимым (p, beta): H - 1/2 (не достигается)"""
    if not 0.5 < H < 1:
        raise ParameterRangeError(f"violated 1/2 < H < 1: H={H}")
    return H - 0.5


def compare_with_brownian(H: float) -> tuple[float, float, bool]:
    """(H - 1/2, 1/4, лучше ли скорость фБД броуновской); лучше тогда и только тогда, когда H > 3/4"""
    exponent = best_exponent(H)
    return exponent, BROWNIAN_CONVEX_EXPONENT, exponent > BROWNIAN_CONVEX_EXPONENT


def _chunk_errors(task) -> np.ndarray:
    cfg, start, count = task
    spec = cfg.integrand
    use_left = isinstance(spec, ConvexSpec)
    hurst = 0.5 if cfg.scenario.is_brownian else cfg.hurst
    paths = sample_many(hurst, cfg.fine_grid, cfg.seed, count, cfg.method, start=start)
    if cfg.scenario == Scenario.fbm_geometric:
        paths = np.exp(paths)
    if cfg.scenario.is_brownian:
        oracle = bm_reference(paths, spec, cfg.fine_grid, max(cfg.n_values), use_left)
    else:
        oracle = pathwise_oracle(paths, spec)
    logger.debug(f"Chunk done: replicates {start}..{start + count - 1}")
    return coupled_errors(paths, spec, cfg.n_values, np.asarray(oracle), use_left)


def error_matrix(cfg: ExperimentConfig, threads: int = 1) -> np.ndarray:
    """Ошибки S_n - S формы (replicates, len(n_values)); строка k - реплика k, все n на одной траектории"""
    chunk = settings.experiment.chunk_size
    tasks = [(cfg, start, min(chunk, cfg.replicates - start)) for start in range(0, cfg.replicates, chunk)]
    return np.concatenate(ordered_map(_chunk_errors, tasks, threads), axis=0)


def norm_with_stderr(errors: np.ndarray, r: float, batches: int | None = None) -> tuple[float, float]:
    """
    (mean |e|^r)^{1/r} и стандартная ошибка по средним непрерывных батчей,
    перенесенная на норму дельта-методом
    """
    powered = np.abs(np.asarray(errors, dtype=float)) ** r
    batches = min(batches or settings.experiment.batches, powered.size)
    moment = float(np.mean(powered))
    if batches < 2:
        return moment ** (1.0 / r), math.inf
    if moment == 0.0:
        return 0.0, 0.0
    batch_means = np.array([chunk.mean() for chunk in np.array_split(powered, batches)])
    moment_stderr = float(np.std(batch_means, ddof=1) / math.sqrt(batches))
    norm = moment ** (1.0 / r)
    return norm, norm / (r * moment) * moment_stderr


def fit_loglog(n_values, error_norms, stderrs=None) -> tuple[float, float, float]:
    """
    Взвешенный МНК log e = intercept - slope * log n через np.polyfit, вес точки 1/sigma_log, sigma_log = stderr/e.
    Без stderr (или если среди них есть нули) - обычный МНК.
    Ошибка наклона по разбросу остатков (cov=True): для точного степенного закона ~0.
    """
    n_values = np.asarray(n_values, dtype=float)
    error_norms = np.asarray(error_norms, dtype=float)
    if n_values.size < 3 or n_values.size != error_norms.size:
        raise DomainError(f"log-log fit needs >= 3 matching points, got {n_values.size}")
    if np.any(error_norms <= 0) or not np.all(np.isfinite(error_norms)):
        raise DomainError(f"log-log fit needs positive error norms (oracle failure?): {error_norms.tolist()}")

    weights = None
    if stderrs is not None:
        stderrs = np.asarray(stderrs, dtype=float)
        if np.all(stderrs > 0) and np.all(np.isfinite(stderrs)):
            weights = error_norms / stderrs

    (beta, intercept), cov = np.polyfit(np.log(n_values), np.log(error_norms), 1, w=weights, cov=True)
    slope_stderr = math.sqrt(max(float(cov[0, 0]), 0.0))
    return -float(beta) + 0.0, slope_stderr, float(intercept)


def _estimate_from_norms(cfg: ExperimentConfig, norms, stderrs) -> RateEstimate:
    slope, slope_stderr, intercept = fit_loglog(cfg.n_values, norms, stderrs)
    exponent = theoretical_exponent(cfg)
    estimate = RateEstimate(
        n_values=list(cfg.n_values),
        error_norms=[float(v) for v in norms],
        mc_stderr=[float(v) for v in stderrs],
        slope=slope,
        slope_stderr=slope_stderr,
        intercept=intercept,
        theoretical_exponent=exponent,
        passed=slope + 2 * slope_stderr >= exponent,
    )
    logger.info(f"{cfg.scenario.value}: slope={slope:.4f}+-{slope_stderr:.4f}, "
                f"exponent={exponent:.5f}, passed={estimate.passed}")
    return estimate


def estimate_from_errors(cfg: ExperimentConfig, errors: np.ndarray, r: float | None = None) -> RateEstimate:
    r = cfg.r_norm if r is None else r
    norms, stderrs = zip(*(norm_with_stderr(errors[:, k], r) for k in range(errors.shape[1])))
    fraction = settings.experiment.max_stderr_fraction
    offending = [n for n, norm, se in zip(cfg.n_values, norms, stderrs) if not se <= fraction * norm]
    if offending:
        raise InsufficientReplicatesError(offending)
    return _estimate_from_norms(cfg, norms, stderrs)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> RateEstimate:
    logger.info(f"Experiment {cfg.scenario.value}: H={cfg.hurst}, n={list(cfg.n_values)}, "
                f"N={cfg.fine_grid}, M={cfg.replicates}, r={cfg.r_norm}, mode={cfg.oracle_mode.value}")
    if cfg.oracle_mode == OracleMode.isometry:
        strike = cfg.integrand.atoms[0][0]
        weight = cfg.integrand.atoms[0][1]
        norms = [weight * isometry_error_norm(n, strike, cfg.quadrature_points) for n in cfg.n_values]
        return _estimate_from_norms(cfg, norms, [0.0] * len(norms))
    return estimate_from_errors(cfg, error_matrix(cfg, threads))


def r_norm_sweep(cfg: ExperimentConfig, r_values, threads: int = 1) -> dict[float, RateEstimate]:
    """Наклоны для нескольких r на одной и той же матрице ошибок"""
    limit = cfg.p_param if cfg.p_param is not None else math.inf
    bad = [r for r in r_values if not 1 <= r < limit]
    if bad:
        raise ParameterRangeError(f"violated 1 <= r < p: r={bad}, p={cfg.p_param}")
    errors = error_matrix(cfg, threads)
    return {float(r): estimate_from_errors(cfg, errors, r) for r in r_values}


def parameter_sweep(cfg: ExperimentConfig, p_values, beta_values, threads: int = 1) -> list[dict]:
    """
    Подгонка по допустимым парам (p, beta) на одной матрице ошибок (при r < p ошибки от p, beta не зависят).
    Недопустимые пары пропускаются; рост intercept при p -> 2H, beta -> 1-H только фиксируется.
    """
    errors = error_matrix(cfg, threads)
    rows = []
    for p in p_values:
        for beta in beta_values:
            if rate_param_violations(cfg.hurst, p, beta) or not cfg.r_norm < p:
                logger.debug(f"Skipping inadmissible pair p={p}, beta={beta}")
                continue
            pair_cfg = ExperimentConfig(**{**cfg.model_dump(), "p_param": p, "beta_param": beta})
            estimate = estimate_from_errors(pair_cfg, errors)
            rows.append({"p": p, "beta": beta, "slope": estimate.slope, "slope_stderr": estimate.slope_stderr,
                         "intercept": estimate.intercept, "exponent": estimate.theoretical_exponent,
                         "passed": estimate.passed})
    if not rows:
        raise ParameterRangeError(f"no admissible (p, beta) pair for H={cfg.hurst}")
    return rows


def cross_check_isometry(n: int, strike: float, replicates: int, fine_grid: int, seed: int = 0,
                         threads: int = 1, n_sigma: float = 3.0) -> tuple[float, float, float]:
    """Сверка точной ||T_n - T||_2 с МК-оценкой на эталонной мелкой сетке"""
    cfg = ExperimentConfig(hurst=0.5, integrand=ConvexSpec.call(strike), scenario=Scenario.bm_convex,
                           n_values=(n,), fine_grid=fine_grid, replicates=replicates, r_norm=2.0, seed=seed)
    exact = isometry_error_norm(n, strike, cfg.quadrature_points)
    estimate, stderr = norm_with_stderr(error_matrix(cfg, threads)[:, 0], 2.0)
    if abs(estimate - exact) > n_sigma * stderr:
        raise OracleDisagreementError(
            f"isometry norm {exact:.6e} vs fine-grid MC {estimate:.6e} +- {stderr:.2e} at n={n}")
    return exact, estimate, stderr


def ito_l1_errors(H: float, steps: int, paths: int, spec: ConvexSpec | LipschitzSpec, seed: int = 0,
                  method: SamplingMethod | str = SamplingMethod.circulant, threads: int = 1) -> dict[int, float]:
    """Эмпирическая L1-ошибка E|S_n - S| для диадических n; при H = 1/2 эталон на мелкой сетке"""
    check_hurst(H)
    if steps < 2 or steps & (steps - 1):
        raise DomainError(f"steps must be a power of two >= 2, got {steps}")
    if H < 0.5:
        raise ContractViolationError(f"no pathwise or Ito oracle for H={H} < 1/2")
    brownian = H == 0.5
    top = steps // settings.experiment.reference_ratio if brownian else steps
    if top < 2:
        raise DomainError(f"steps={steps} leaves no dyadic n below the reference grid")
    n_values = [2 ** k for k in range(1, int(math.log2(top)) + 1)]
    use_left = isinstance(spec, ConvexSpec)
    chunk = settings.experiment.chunk_size

    def run_chunk(task):
        start, count = task
        values = sample_many(H, steps, seed, count, method, start=start)
        oracle = bm_reference(values, spec, steps, n_values[-1], use_left) if brownian else pathwise_oracle(values, spec)
        return coupled_errors(values, spec, n_values, np.asarray(oracle), use_left)

    tasks = [(start, min(chunk, paths - start)) for start in range(0, paths, chunk)]
    errors = np.concatenate(ordered_map(run_chunk, tasks, threads), axis=0)
    return {n: float(np.mean(np.abs(errors[:, k]))) for k, n in enumerate(n_values)}


def results_document(estimate: RateEstimate, cfg: ExperimentConfig, created_at: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "created_at": created_at or datetime.now(timezone.utc).isoformat(),
        "seed": cfg.seed,
        "config": cfg.model_dump(mode="json"),
        "estimate": estimate.model_dump(mode="json"),
        "table": [{"n": n, "error_norm": e, "mc_stderr": se}
                  for n, e, se in zip(estimate.n_values, estimate.error_norms, estimate.mc_stderr)],
    }


def loglog_path(path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.loglog.dat")


def persist_results(estimate: RateEstimate, cfg: ExperimentConfig, path, created_at: str | None = None) -> Path:
    """JSON с конфигурацией, таблицей по n и подгонкой, плюс <stem>.loglog.dat рядом"""
    path = write_json(results_document(estimate, cfg, created_at), path)
    lines = ["# log_n log_error\n"]
    lines += [f"{math.log(n)!r} {math.log(e)!r}\n" for n, e in zip(estimate.n_values, estimate.error_norms)]
    with open(loglog_path(path), "w", encoding="utf-8", newline="\n") as out:
        out.writelines(lines)
    logger.info(f"Results written to {path}")
    return path


def load_results(path) -> tuple[RateEstimate, ExperimentConfig]:
    with open(path, encoding="utf-8") as source:
        document = json.load(source)
    if document.get("schema_version") != SCHEMA_VERSION:
        raise DomainError(f"{path}: unsupported schema_version {document.get('schema_version')!r}")
    return RateEstimate.model_validate(document["estimate"]), ExperimentConfig.model_validate(document["config"])

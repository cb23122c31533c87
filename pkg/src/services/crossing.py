"""
Вероятности пересечения уровня P(B_t > a, B_s < a) для фБД.

Условное разложение B_t = k B_s + sigma Y, k = R(t,s)/R(s,s),
sigma^2 = (R(t,t)R(s,s) - R(t,s)^2)/R(s,s), Y ~ N(0,1) независима от B_s.
После замены x = s^H u:

    P(B_t > a > B_s) = int_{-inf}^{a/s^H} Phi_bar((a - k s^H u)/sigma) phi(u) du

Интеграл считается составной квадратурой Гаусса-Лежандра на отрезке [-10, min(a/s^H, 10)]
с разбиением вокруг точки перехода u* = a/(k s^H); число узлов удваивается до сходимости.
"""
import math

import numpy as np
from scipy import special

from src.config import settings
from src.logs import getLogger
from src.models.crossing import CrossingQuery, CrossingResult
from src.services.fbm_sim import check_hurst, replicate_rng
from src.services.integrand import constant_C
from src.utils.errors import CovarianceError, DomainError, ParameterRangeError, QuadratureError

logger = getLogger(__name__)
diag_logger = getLogger("numerics.diagnostics")

TRUNCATION = 10.0
MIN_QUADRATURE_POINTS = 32
# точки разбиения u* + k*w, w = sigma/(k s^H) - ширина перехода
_PANEL_OFFSETS = np.array([-64.0, -16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0, 64.0])


def _covariance_gap(s, t, H: float):
    """
    (d, D, R(s,s)) с d = t - s и D = R(t,s) - R(s,s) = ((t^{2H} - s^{2H}) - d^{2H})/2.
    t^{2H} - s^{2H} = s^{2H} expm1(2H log1p(d/s)) без вычитания близких чисел.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    d = t - s
    r_ss = s ** (2 * H)
    growth = r_ss * np.expm1(2 * H * np.log1p(d / s))
    return d, 0.5 * (growth - np.abs(d) ** (2 * H)), r_ss


def _decompose(s, t, H: float):
    # sigma^2 = R(t,t) - R(t,s)^2/R(s,s) = d^{2H} - D^2/R(s,s)
    d, gap, r_ss = _covariance_gap(s, t, H)
    slope = 1.0 + gap / r_ss
    variance = np.abs(d) ** (2 * H) - gap ** 2 / r_ss
    tolerance = settings.numerics.variance_tolerance
    if np.any(variance < -tolerance):
        raise CovarianceError(f"negative conditional variance {np.min(variance):.3e} (H={H})")
    sigma = np.sqrt(np.clip(variance, 0.0, None))
    return slope, sigma


def conditional_decomposition(q: CrossingQuery) -> tuple[float, float]:
    """(k, sigma) такие, что B_t = k B_s + sigma Y воспроизводит совместный закон (B_s, B_t)"""
    slope, sigma = _decompose(q.s, q.t, q.hurst)
    return float(slope), float(sigma)


@np.errstate(divide="ignore", invalid="ignore")
def _panel_quadrature(s, t, a, H: float, points: int) -> np.ndarray:
    s, t, a = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, t, a)))
    shape = s.shape
    s, t, a = s.ravel(), t.ravel(), a.ravel()
    slope, sigma = _decompose(s, t, H)
    scale = s ** H
    c = slope * scale

    lo = np.full(s.shape, -TRUNCATION)
    hi = np.minimum(a / scale, TRUNCATION)
    center = a / c
    width = np.where(sigma > 0, sigma / c, 0.0)
    cuts = np.clip(center[:, None] + width[:, None] * _PANEL_OFFSETS, lo[:, None], np.maximum(hi, lo)[:, None])
    edges = np.sort(np.concatenate([lo[:, None], cuts, np.maximum(hi, lo)[:, None]], axis=1), axis=1)
    left, right = edges[:, :-1], edges[:, 1:]

    nodes, weights = np.polynomial.legendre.leggauss(points)
    half = 0.5 * (right - left)
    u = (0.5 * (right + left))[..., None] + half[..., None] * nodes
    safe_sigma = np.where(sigma > 0, sigma, 1.0)[:, None, None]
    tail = special.ndtr(-(a[:, None, None] - c[:, None, None] * u) / safe_sigma)
    density = np.exp(-0.5 * u ** 2) / math.sqrt(2 * math.pi)
    value = np.sum(half[..., None] * weights * tail * density, axis=(1, 2))

    # sigma = 0: событие {a/c < u < a/s^H} без случайной части
    degenerate = np.maximum(special.ndtr(a / scale) - special.ndtr(center), 0.0)
    value = np.where(sigma > 0, value, degenerate)
    return np.clip(value, 0.0, 1.0).reshape(shape)


def crossing_probabilities(s, t, a, H: float, quadrature_points: int | None = None) -> np.ndarray:
    """Векторизованная P(B_t > a > B_s) с удвоением числа узлов до точности quadrature_tolerance"""
    check_hurst(H)
    points = quadrature_points or settings.numerics.quadrature_points
    if points < MIN_QUADRATURE_POINTS:
        raise DomainError(f"quadrature_points must be >= {MIN_QUADRATURE_POINTS}, got {points}")
    if np.any(np.asarray(s) <= 0) or np.any(np.asarray(t) < np.asarray(s)):
        raise DomainError("crossing probabilities need 0 < s <= t")

    tolerance = settings.numerics.quadrature_tolerance
    current = _panel_quadrature(s, t, a, H, points)
    gap = float("inf")
    for _ in range(settings.numerics.max_quadrature_doublings):
        points *= 2
        refined = _panel_quadrature(s, t, a, H, points)
        gap = float(np.max(np.abs(refined - current))) if refined.size else 0.0
        current = refined
        if gap <= tolerance:
            diag_logger.debug(f"crossing quadrature converged: points={points}, gap={gap:.2e}")
            return current
    diag_logger.warning(f"crossing quadrature did not converge: points={points}, gap={gap:.2e}")
    raise QuadratureError(f"crossing quadrature missed tolerance {tolerance:g} (gap={gap:.2e})",
                          estimate=float(current.ravel()[0]) if current.size else float("nan"))


def crossing_probability(q: CrossingQuery, quadrature_points: int | None = None) -> float:
    return float(crossing_probabilities(q.s, q.t, q.a, q.hurst, quadrature_points))


def fbm_crossing_bound(q: CrossingQuery) -> float:
    """C(a) (t-s)^H s^{-2H}"""
    return float(constant_C(q.a) * (q.t - q.s) ** q.hurst * q.s ** (-2 * q.hurst))


def bm_crossing_bound(q: CrossingQuery) -> float:
    """exp(-min{a^2, (a-1)^2}/2) sqrt((t-s)/s) - вариант для броуновского движения"""
    return float(math.exp(-min(q.a ** 2, (q.a - 1) ** 2) / 2) * math.sqrt((q.t - q.s) / q.s))


def crossing_bound(q: CrossingQuery) -> float:
    return bm_crossing_bound(q) if q.hurst == 0.5 else fbm_crossing_bound(q)


def crossing_result(q: CrossingQuery, quadrature_points: int | None = None) -> CrossingResult:
    probability = crossing_probability(q, quadrature_points)
    bound = crossing_bound(q)
    return CrossingResult(query=q, probability=probability, bound_value=bound, ratio=probability / bound)


def crossing_sweep(H: float, s_grid, t_grid, a_grid, quadrature_points: int | None = None) -> list[CrossingResult]:
    """
    Все допустимые (s < t) узлы сетки; пары с s >= t пропускаются.
    Узлы, отличающиеся лишь округлением linspace (t - s <= grid_gap_tolerance * t), тоже.
    """
    check_hurst(H)
    snap = settings.numerics.grid_gap_tolerance
    queries = [CrossingQuery(s=s, t=t, a=a, hurst=H)
               for s in s_grid for t in t_grid for a in a_grid if 0 < s < t <= 1 and t - s > snap * t]
    if not queries:
        raise DomainError("crossing sweep grid contains no valid (s < t) query")
    probabilities = crossing_probabilities(
        [q.s for q in queries], [q.t for q in queries], [q.a for q in queries], H, quadrature_points)
    results = []
    for q, probability in zip(queries, probabilities):
        bound = crossing_bound(q)
        results.append(CrossingResult(query=q, probability=float(probability), bound_value=bound,
                                      ratio=float(probability) / bound))
    logger.info(f"Crossing sweep H={H}: {len(results)} queries")
    return results


def bound_ratio_sweep(H: float, s_grid, t_grid, a_grid,
                      quadrature_points: int | None = None) -> tuple[float, CrossingQuery]:
    """Эмпирическая нижняя оценка неизвестной константы C: max probability/bound по сетке"""
    results = crossing_sweep(H, s_grid, t_grid, a_grid, quadrature_points)
    best = max(results, key=lambda r: r.ratio)
    return best.ratio, best.query


def crossing_probability_mc(q: CrossingQuery, draws: int, seed: int = 0) -> tuple[float, float]:
    """Монте-Карло оценка P(B_t > a > B_s) и ее стандартная ошибка"""
    slope, sigma = conditional_decomposition(q)
    rng = replicate_rng(seed, 0)
    b_s = q.s ** q.hurst * rng.standard_normal(draws)
    b_t = slope * b_s + sigma * rng.standard_normal(draws)
    hits = (b_t > q.a) & (b_s < q.a)
    estimate = float(hits.mean())
    return estimate, math.sqrt(max(estimate * (1 - estimate), 1e-300) / draws)


def lemma_a1_ratio(s, t, H: float):
    """(1 - R(s,s)/R(t,s)) / ((t-s)^H s^{-H}); при t = s равно 0"""
    if not 0.5 < H < 1:
        raise ParameterRangeError(f"violated 1/2 < H < 1: H={H}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s <= 0) or np.any(t < s) or np.any(t > 1):
        raise DomainError("lemma_a1_ratio needs 0 < s <= t <= 1")
    _, gap, r_ss = _covariance_gap(s, t, H)
    # 1 - R(s,s)/R(t,s) = D/(R(s,s) + D)
    numerator = gap / (r_ss + gap)
    if np.any(numerator < -1e-12):
        raise CovarianceError(f"R(s,s) > R(t,s) for H={H}: numerator {np.min(numerator):.3e}")
    numerator = np.clip(numerator, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(t > s, numerator / ((t - s) ** H * s ** (-H)), 0.0)
    return ratio if ratio.ndim else float(ratio)


def normal_tail_bound_check(a: float) -> tuple[float, float]:
    """P(Z > a) через erfc и оценка exp(-a^2/2)/(sqrt(2 pi) a)"""
    if not a > 0:
        raise DomainError(f"normal tail bound needs a > 0, got {a}")
    tail = 0.5 * float(special.erfc(a / math.sqrt(2.0)))
    bound = math.exp(-a * a / 2) / (math.sqrt(2 * math.pi) * a)
    return tail, bound


def power_sum_bound_check(n: int, alpha: float) -> tuple[float, float]:
    """sum_{i=1}^{n-1} i^{-alpha} и оценка n^{1-alpha}/(1-alpha), n >= 2, 0 < alpha < 1"""
    if n < 2 or not 0 < alpha < 1:
        raise DomainError(f"power sum bound needs n >= 2 and 0 < alpha < 1, got n={n}, alpha={alpha}")
    total = float(np.sum(np.arange(1, n, dtype=float) ** (-alpha)))
    return total, n ** (1 - alpha) / (1 - alpha)

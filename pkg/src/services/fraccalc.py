"""
Дробное исчисление на равномерной сетке.

Функция восстанавливается кусочно-линейно, и ядра tau^{beta-1}, tau^{-beta-1}
интегрируются по каждой ячейке точно (никакой трапеции через особенность).
Правосторонняя производная - форма Вейля как есть; обобщенный интеграл
Лебега-Стилтьеса домножается на -1 (ориентация правостороннего оператора),
так что int_0^t 1 dg = g(t) - g(0).
"""
import math

import numpy as np
from scipy import integrate, special

from src.config import settings
from src.logs import getLogger
from src.models.besov import BesovReport
from src.models.paths import SampledFunction, SamplingMethod
from src.services.fbm_sim import check_hurst, sample_many
from src.utils.errors import CertificateViolationError, DomainError, ParameterRangeError
from src.utils.pool import ordered_map

logger = getLogger(__name__)

GRID_TOLERANCE = 1e-9


def _check_order(beta: float):
    if not 0.0 < beta < 1.0:
        raise DomainError(f"fractional order must lie in (0, 1), got {beta}")


def _grid_index(f: SampledFunction, x: float) -> int:
    k = int(round(x / f.step))
    if abs(k * f.step - x) > GRID_TOLERANCE * f.T or not 0 <= k <= f.n:
        raise DomainError(f"x={x} is not a grid point of [0, {f.T}] with N={f.n}")
    return k


def _power_diff(lo, hi, p):
    """hi^p - lo^p без потери точности на узких ячейках вдали от нуля"""
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.where(lo > 0, lo, 1.0) ** p * np.expm1(p * np.log1p((hi - lo) / np.where(lo > 0, lo, 1.0)))
        return np.where(lo > 0, near, hi ** p - lo ** p)


@np.errstate(divide="ignore", invalid="ignore", over="ignore")
def _linear_cell_integral(ea, eb, lo, hi, exponent):
    """
    int_lo^hi e(tau) tau^exponent dtau, e линейна: e(lo) = ea, e(hi) = eb.
    При exponent <= -1 и lo = 0 требуется ea = 0 (разность в якоре).
    """
    c1 = (eb - ea) / (hi - lo)
    c0 = ea - c1 * lo
    m0 = _power_diff(lo, hi, exponent + 1) / (exponent + 1)
    m1 = _power_diff(lo, hi, exponent + 2) / (exponent + 2)
    part0 = np.where(c0 == 0, 0.0, c0 * m0)
    return part0 + c1 * m1


def _abs_linear_cell_integral(ea, eb, lo, hi, exponent):
    """int_lo^hi |e(tau)| tau^exponent dtau, ячейка режется в нуле e"""
    cross = ea * eb < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(cross, lo + (hi - lo) * ea / np.where(cross, ea - eb, 1.0), hi)
    first = _linear_cell_integral(ea, np.where(cross, 0.0, eb), lo, root, exponent)
    second = np.where(cross, _linear_cell_integral(np.zeros_like(eb), eb, root, np.where(cross, hi, hi + 1.0), exponent), 0.0)
    return np.abs(first) + np.abs(second)


def _cell_integrals(values: np.ndarray, anchor: int, h: float, exponent: float, absolute: bool = False) -> np.ndarray:
    """
    Вклады ячеек справа от якоря i в int (v_i - v(y)) (y - x_i)^exponent dy.
    Элемент k - ячейка [x_{i+k}, x_{i+k+1}].
    """
    tail = values[anchor:]
    k = np.arange(tail.size - 1, dtype=float)
    ea = tail[0] - tail[:-1]
    eb = tail[0] - tail[1:]
    cell = _abs_linear_cell_integral if absolute else _linear_cell_integral
    return cell(ea, eb, k * h, (k + 1) * h, exponent)


def _cumulative_blocks(values: np.ndarray, h: float, exponent: float, absolute: bool = False):
    """
    Блоки строк таблицы C[i, j] = int_{x_i}^{x_{j+1}} e_i(y) (y - x_i)^exponent dy, j >= i,
    e_i(y) = v_i - v(y) (или модуль). Ниже диагонали нули.
    """
    n = values.size - 1
    block = max(1, settings.numerics.besov_block_rows)
    cols = np.arange(n)
    cell = _abs_linear_cell_integral if absolute else _linear_cell_integral
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        distance = cols[None, :] - rows[:, None]
        valid = distance >= 0
        lo = np.where(valid, distance, 0) * h
        anchor = values[rows][:, None]
        ea = np.where(valid, anchor - values[None, :-1], 0.0)
        eb = np.where(valid, anchor - values[None, 1:], 0.0)
        table = np.where(valid, cell(ea, eb, lo, lo + h, exponent), 0.0)
        yield rows, np.cumsum(table, axis=1)


def _anchor_totals(values: np.ndarray, h: float, exponent: float, absolute: bool = False) -> np.ndarray:
    """totals[i] = int_{x_i}^{x_N} e_i(y) (y - x_i)^exponent dy для всех якорей i < N"""
    totals = np.zeros(values.size)
    for rows, table in _cumulative_blocks(values, h, exponent, absolute):
        totals[rows] = table[:, -1]
    return totals


def frac_integral_left(f: SampledFunction, beta: float, s: float) -> float:
    """(I^beta_{0+} f)(s) = 1/Gamma(beta) int_0^s f(u) (s-u)^{beta-1} du"""
    _check_order(beta)
    m = _grid_index(f, s)
    if m == 0:
        return 0.0
    reversed_values = f.values[m::-1]
    k = np.arange(m, dtype=float)
    h = f.step
    cells = _linear_cell_integral(reversed_values[:-1], reversed_values[1:], k * h, (k + 1) * h, beta - 1.0)
    return float(np.sum(cells) / special.gamma(beta))


def frac_integral_left_all(f: SampledFunction, beta: float) -> SampledFunction:
    values = np.array([frac_integral_left(f, beta, m * f.step) for m in range(f.n + 1)])
    return SampledFunction(values=values, T=f.T)


def right_frac_integral(f: SampledFunction, beta: float, s: float, t: float) -> float:
    """(I^beta_{t-} f)(s) = 1/Gamma(beta) int_s^t f(u) (u-s)^{beta-1} du"""
    _check_order(beta)
    i, m = _grid_index(f, s), _grid_index(f, t)
    if i > m:
        raise DomainError(f"right fractional integral needs s <= t, got s={s}, t={t}")
    if i == m:
        return 0.0
    segment = f.values[i:m + 1]
    k = np.arange(m - i, dtype=float)
    h = f.step
    cells = _linear_cell_integral(segment[:-1], segment[1:], k * h, (k + 1) * h, beta - 1.0)
    return float(np.sum(cells) / special.gamma(beta))


def frac_derivative_left(f: SampledFunction, beta: float, x: float) -> float:
    """(D^beta_{0+} f)(x) = 1/Gamma(1-beta) (f(x)/x^beta + beta int_0^x (f(x)-f(y))/(x-y)^{beta+1} dy)"""
    _check_order(beta)
    m = _grid_index(f, x)
    if m == 0:
        raise DomainError("left fractional derivative is not defined at x = 0")
    reversed_values = f.values[m::-1]
    total = float(np.sum(_cell_integrals(reversed_values, 0, f.step, -1.0 - beta)))
    return (f.values[m] / x ** beta + beta * total) / special.gamma(1.0 - beta)


def _left_derivative_all(f: SampledFunction, beta: float, upto: int) -> np.ndarray:
    """D^beta_{0+} f в узлах x_1..x_upto (элемент 0 не определен, nan)"""
    reversed_values = f.values[upto::-1]
    totals = _anchor_totals(reversed_values, f.step, -1.0 - beta)[::-1]
    x = np.arange(upto + 1) * f.step
    out = np.full(upto + 1, np.nan)
    out[1:] = (f.values[1:upto + 1] / x[1:] ** beta + beta * totals[1:]) / special.gamma(1.0 - beta)
    return out


def frac_derivative_right(g: SampledFunction, beta: float, x: float, t: float) -> float:
    """
    (D^beta_{t-} g_{t-})(x), g_{t-} = g - g(t):
    1/Gamma(1-beta) (g_{t-}(x)/(t-x)^beta + beta int_x^t (g(x)-g(y))/(y-x)^{beta+1} dy)
    """
    _check_order(beta)
    i, m = _grid_index(g, x), _grid_index(g, t)
    if i >= m:
        raise DomainError(f"right fractional derivative needs x < t, got x={x}, t={t}")
    segment = g.values[i:m + 1]
    total = float(np.sum(_cell_integrals(segment, 0, g.step, -1.0 - beta)))
    boundary = (segment[0] - segment[-1]) / (t - x) ** beta
    return (boundary + beta * total) / special.gamma(1.0 - beta)


def _right_derivative_all(g: SampledFunction, beta: float, upto: int) -> np.ndarray:
    """D^beta_{t-} g_{t-} в узлах x_0..x_upto при t = x_upto (в x = t значение 0)"""
    segment = g.values[:upto + 1]
    totals = _anchor_totals(segment, g.step, -1.0 - beta)
    distance = (upto - np.arange(upto + 1)) * g.step
    out = np.zeros(upto + 1)
    out[:-1] = ((segment[:-1] - segment[-1]) / distance[:-1] ** beta + beta * totals[:-1]) / special.gamma(1.0 - beta)
    return out


def sup_frac_derivative(g: SampledFunction, beta: float) -> float:
    """sup по парам сетки s < t от |D^{1-beta}_{t-} g_{t-}(s)|"""
    _check_order(beta)
    alpha = 1.0 - beta
    h = g.step
    best = 0.0
    for rows, table in _cumulative_blocks(g.values, h, -1.0 - alpha):
        # столбец j отвечает t = x_{j+1}
        ends = np.arange(1, g.n + 1)
        distance = (ends[None, :] - rows[:, None]) * h
        valid = distance > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            boundary = (g.values[rows][:, None] - g.values[None, 1:]) / distance ** alpha
        value = np.where(valid, np.abs(boundary + alpha * table), 0.0)
        best = max(best, float(value.max()))
    return best / special.gamma(1.0 - alpha)


def norm_1beta(f: SampledFunction, beta: float) -> float:
    """sup_{s<t} (|f(t)-f(s)|/(t-s)^beta + int_s^t |f(u)-f(s)|/(u-s)^{1+beta} du) по парам сетки"""
    _check_order(beta)
    h = f.step
    best = 0.0
    for rows, table in _cumulative_blocks(f.values, h, -1.0 - beta, absolute=True):
        ends = np.arange(1, f.n + 1)
        distance = (ends[None, :] - rows[:, None]) * h
        valid = distance > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            boundary = np.abs(f.values[None, 1:] - f.values[rows][:, None]) / distance ** beta
        value = np.where(valid, boundary + table, 0.0)
        best = max(best, float(value.max()))
    return best


def norm_2beta(f: SampledFunction, beta: float) -> float:
    """int_0^T |f(s)|/s^beta ds + int_0^T int_0^s |f(u)-f(s)|/(s-u)^{1+beta} du ds"""
    _check_order(beta)
    h = f.step
    k = np.arange(f.n, dtype=float)
    first = float(np.sum(_abs_linear_cell_integral(f.values[:-1], f.values[1:], k * h, (k + 1) * h, -beta)))
    reversed_values = f.values[::-1]
    inner = _anchor_totals(reversed_values, h, -1.0 - beta, absolute=True)[::-1]
    second = float(integrate.trapezoid(inner, dx=h))
    return first + second


def besov_norms(f: SampledFunction, beta: float) -> BesovReport:
    report = BesovReport(
        beta=beta,
        norm_1beta=norm_1beta(f, beta),
        norm_2beta=norm_2beta(f, beta),
        sup_frac_derivative=sup_frac_derivative(f, beta),
        n_points=f.n + 1,
    )
    logger.debug(f"Besov report: {report}")
    return report


def gls_integral(f: SampledFunction, g: SampledFunction, beta: float, t: float | None = None,
                 certify: bool = True) -> tuple[float, float]:
    """
    int_0^t f dg = -int_0^t (D^beta_{0+} f)(x) (D^{1-beta}_{t-} g_{t-})(x) dx
    и сертификат sup|D^{1-beta}_{t-} g_{t-}| * ||f||_{2,beta}; |value| <= certificate.
    Сертификат стоит O(N^2); certify=False пропускает его и возвращает nan вместо сертификата.
    """
    _check_order(beta)
    if f.n != g.n or f.T != g.T:
        raise DomainError("f and g must share the same grid")
    t = g.T if t is None else t
    m = _grid_index(g, t)
    if m == 0:
        return 0.0, 0.0
    h = g.step
    x = np.arange(m + 1) * h

    left = _left_derivative_all(f, beta, m)
    right = _right_derivative_all(g, 1.0 - beta, m)
    # q = x^beta D^beta f * D^{1-beta} g, в нуле предел f(0)/Gamma(1-beta)
    weighted = np.empty(m + 1)
    weighted[0] = f.values[0] / special.gamma(1.0 - beta)
    weighted[1:] = x[1:] ** beta * left[1:]
    q = weighted * right
    k = np.arange(m, dtype=float)
    integral = float(np.sum(_linear_cell_integral(q[:-1], q[1:], k * h, (k + 1) * h, -beta)))
    value = -integral
    if not certify:
        return value, math.nan

    certificate = sup_frac_derivative(g, beta) * norm_2beta(f, beta)
    slack = settings.numerics.certificate_slack
    if abs(value) > certificate * (1.0 + slack) + slack:
        raise CertificateViolationError(f"|GLS integral|={abs(value):.6e} exceeds certificate {certificate:.6e}")
    return value, certificate


def _sup_for_replicates(task):
    H, beta, n_steps, seed, method, start, count = task
    paths = sample_many(H, n_steps, seed, count, method, start=start)
    return np.array([sup_frac_derivative(SampledFunction(values=row), beta) for row in paths])


def sup_frac_derivative_samples(H: float, beta: float, n_paths: int, n_steps: int = 1024, seed: int = 0,
                                method: SamplingMethod | str = SamplingMethod.circulant,
                                threads: int = 1) -> np.ndarray:
    """Выборка sup|D^{1-beta}_{t-} B_{t-}(s)| по n_paths траекториям фБД (реплики 0..n_paths-1)"""
    check_hurst(H)
    if not 1.0 - H < beta < 0.5:
        raise ParameterRangeError(f"violated 1-H < beta < 1/2: {1 - H:g} < {beta:g} < 0.5")
    chunk = settings.experiment.chunk_size
    tasks = [(H, beta, n_steps, seed, SamplingMethod(method), start, min(chunk, n_paths - start))
             for start in range(0, n_paths, chunk)]
    return np.concatenate(ordered_map(_sup_for_replicates, tasks, threads)) if tasks else np.zeros(0)


def sup_frac_derivative_moments(H: float, beta: float, p_moment: float, n_paths: int, n_steps: int = 1024,
                                seed: int = 0, method: SamplingMethod | str = SamplingMethod.circulant,
                                threads: int = 1) -> float:
    """MC-оценка E(sup|D^{1-beta}_{t-} B_{t-}(s)|)^p"""
    if p_moment == 0:
        return 1.0
    samples = sup_frac_derivative_samples(H, beta, n_paths, n_steps, seed, method, threads)
    estimate = float(np.mean(samples ** p_moment))
    logger.info(f"Sup fractional derivative moment: H={H}, beta={beta}, p={p_moment}, paths={n_paths}: {estimate:.6g}")
    return estimate


def moment_stability(H: float, beta: float, p_moment: float, n_paths: int, **kwargs) -> tuple[float, float, float]:
    """Оценки на n_paths и 2*n_paths траекториях (первые n_paths общие) и относительное изменение"""
    samples = sup_frac_derivative_samples(H, beta, 2 * n_paths, **kwargs)
    half = float(np.mean(samples[:n_paths] ** p_moment))
    full = float(np.mean(samples ** p_moment))
    return half, full, abs(full - half) / half if half else math.inf

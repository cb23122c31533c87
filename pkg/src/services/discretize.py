"""
Равномерные суммы S_n = sum g(B_{(i-1)/n}) (B_{i/n} - B_{(i-1)/n}) и их пределы.

Все n читают одну траекторию на мелкой сетке N с шагом N/n (без интерполяции),
поэтому ошибки для разных n относятся к одному и тому же omega.
Знак ошибки: S_n - S.
"""
import math

import numpy as np
from scipy.special import ndtr

from src.config import settings
from src.logs import getLogger
from src.models.experiment import DiscretizationResult, OracleKind
from src.models.integrands import ConvexSpec, LipschitzSpec
from src.models.paths import FbmPath
from src.services.crossing import crossing_probabilities
from src.services.integrand import eval_f, eval_integrand
from src.utils.errors import ContractViolationError, DomainError, GridMismatchError

logger = getLogger(__name__)


def _as_values(path) -> np.ndarray:
    return path.values if isinstance(path, FbmPath) else np.asarray(path, dtype=float)


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def riemann_sum(path, spec: ConvexSpec | LipschitzSpec, n: int, use_left_derivative: bool = True):
    """
    sum_{i=1}^n g(B_{(i-1)/n}) (B_{i/n} - B_{(i-1)/n}), g = f'_- (выпуклый случай) или f.
    path - FbmPath, вектор длины N+1 или матрица (replicates, N+1).
    """
    values = _as_values(path)
    N = values.shape[-1] - 1
    if n < 1 or N % n:
        raise GridMismatchError(f"n={n} does not divide the path grid N={N}")
    coarse = values[..., ::N // n]
    weights = eval_integrand(spec, coarse[..., :-1], use_left_derivative)
    return _scalar_or_array(np.sum(weights * np.diff(coarse, axis=-1), axis=-1))


def pathwise_oracle(path, spec: ConvexSpec | LipschitzSpec):
    """F(X_1) - F(X_0), F = f для выпуклых (f'_- dB) и первообразная для липшицевых (f dB)"""
    values = _as_values(path)
    start, end = values[..., 0], values[..., -1]
    if isinstance(spec, LipschitzSpec):
        return _scalar_or_array(spec.antiderivative(end) - spec.antiderivative(start))
    return _scalar_or_array(np.asarray(eval_f(spec, end)) - np.asarray(eval_f(spec, start)))


def ito_oracle(path: FbmPath, spec: ConvexSpec | LipschitzSpec) -> float:
    """f(B_1) = f(0) + int f'_-(B) dB, верно потраекторно только при H > 1/2"""
    if not path.hurst > 0.5:
        raise ContractViolationError(
            f"pathwise Ito formula needs H > 1/2 (got H={path.hurst}); use bm_reference for Brownian paths")
    return float(pathwise_oracle(path, spec))


def bm_reference(path, spec: ConvexSpec | LipschitzSpec, n_ref: int, max_n: int, use_left_derivative: bool = True):
    """Эталон для интеграла Ито: сумма на самой мелкой сетке N_ref >= ratio * max(n)"""
    values = _as_values(path)
    N_ref = values.shape[-1] - 1
    if n_ref != N_ref:
        raise GridMismatchError(f"n_ref={n_ref} must equal the path grid N_ref={N_ref}")
    ratio = settings.experiment.reference_ratio
    if N_ref < ratio * max_n:
        raise DomainError(f"reference grid too coarse: N_ref={N_ref} < {ratio}*max(n)={ratio * max_n}")
    return riemann_sum(values, spec, n_ref, use_left_derivative)


def discretization_result(path: FbmPath, spec: ConvexSpec | LipschitzSpec, n: int,
                          max_n: int | None = None) -> DiscretizationResult:
    use_left = not isinstance(spec, LipschitzSpec)
    sum_value = float(riemann_sum(path, spec, n, use_left))
    if path.hurst > 0.5:
        oracle_value, kind = ito_oracle(path, spec), OracleKind.ito_pathwise
    else:
        oracle_value = float(bm_reference(path, spec, path.n_steps, max_n or n, use_left))
        kind = OracleKind.fine_grid_reference
    return DiscretizationResult(n=n, sum_value=sum_value, oracle_value=oracle_value,
                                error=sum_value - oracle_value, oracle_kind=kind)


def coupled_errors(values: np.ndarray, spec: ConvexSpec | LipschitzSpec, n_values, oracle: np.ndarray,
                   use_left_derivative: bool = True) -> np.ndarray:
    """Матрица ошибок (replicates, len(n_values)) по одной траектории на реплику"""
    values = np.atleast_2d(values)
    columns = [riemann_sum(values, spec, n, use_left_derivative) - oracle for n in n_values]
    return np.stack(columns, axis=-1)


def isometry_error_norm(n: int, a: float, quadrature_points: int = 16) -> float:
    """
    Точное ||T_n - T||_2 для f = (x - a)^+ и броуновского движения.
    h_n(t) = 1{W_u > a} - 1{W_t > a}, u = (i-1)/n, принимает значения 0, +-1, поэтому
    E h_n(t)^2 = P(W_t > a > W_u) + P(W_t < a < W_u), и по изометрии Ито
    ||T_n - T||_2^2 = sum_i int_{(i-1)/n}^{i/n} E h_n(t)^2 dt.
    """
    if quadrature_points < 4:
        raise DomainError(f"quadrature_points must be >= 4, got {quadrature_points}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if math.isinf(a):
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
    h = 1.0 / n
    offsets = 0.5 * h * (nodes + 1.0)

    # первый отрезок: W_0 = 0 детерминирован
    first_t = offsets
    z = a / np.sqrt(first_t)
    first = np.where(a >= 0, 1.0 - ndtr(z), ndtr(z))
    total = 0.5 * h * float(np.dot(weights, first))

    if n > 1:
        u = np.repeat(np.arange(1, n) * h, quadrature_points)
        t = u + np.tile(offsets, n - 1)
        probability = crossing_probabilities(u, t, a, 0.5) + crossing_probabilities(u, t, -a, 0.5)
        total += 0.5 * h * float(np.sum(np.tile(weights, n - 1) * probability))
    value = math.sqrt(max(total, 0.0))
    logger.debug(f"Isometry norm n={n}, a={a}: {value:.6e}")
    return value

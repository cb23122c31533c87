"""
Точная генерация фрактального броуновского движения на равномерной сетке [0, 1].

Два метода:
  - cholesky: разложение ковариации траектории R(t_i, t_j), O(n^3), кэшируется по (H, n)
  - circulant: циркулянтное вложение стационарных приращений (Davies-Harte), O(n log n),
    затем кумулятивная сумма

Случайный поток реплики k при seed S: Philox(SeedSequence(S, spawn_key=(k,))).
Результат не зависит от порядка и числа потоков.
"""
from functools import lru_cache

import numpy as np
from scipy import fft, linalg

from src.config import settings
from src.logs import getLogger
from src.models.paths import FbmPath, PathKind, SamplingMethod
from src.utils.errors import CovarianceError, DomainError, ParameterRangeError

logger = getLogger(__name__)


def check_hurst(H: float) -> float:
    if not 0.0 < H < 1.0:
        raise ParameterRangeError(f"violated 0 < H < 1: H={H}")
    return float(H)


def fbm_covariance(t, s, H: float):
    """R(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2"""
    check_hurst(H)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any((t < 0) | (t > 1)) or np.any((s < 0) | (s > 1)):
        raise DomainError(f"fbm_covariance is defined on [0, 1]^2, got t={t}, s={s}")
    value = 0.5 * (t ** (2 * H) + s ** (2 * H) - np.abs(t - s) ** (2 * H))
    return value if value.ndim else float(value)


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Независимый поток реплики: зависит только от (seed, replicate)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replicate,))))


@lru_cache(maxsize=16)
def _cholesky_factor(H: float, n_steps: int) -> np.ndarray:
    grid = np.arange(1, n_steps + 1) / n_steps
    cov = fbm_covariance(grid[:, None], grid[None, :], H)
    try:
        factor = linalg.cholesky(cov, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise CovarianceError(f"Cholesky factorization failed for H={H}, n={n_steps}: {e}") from e
    if not np.all(np.diag(factor) > 0):
        raise CovarianceError(f"non-positive Cholesky pivot for H={H}, n={n_steps}")
    factor.setflags(write=False)
    logger.debug(f"Cholesky factor cached: H={H}, n={n_steps}")
    return factor


def increment_autocovariance(H: float, n_steps: int) -> np.ndarray:
    """gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2 * n^{-2H}, k = 0..n"""
    k = np.arange(n_steps + 1, dtype=float)
    gamma = 0.5 * (np.abs(k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
    return gamma * float(n_steps) ** (-2 * H)


@lru_cache(maxsize=16)
def _circulant_spectrum(H: float, n_steps: int) -> np.ndarray:
    gamma = increment_autocovariance(H, n_steps)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = fft.fft(row).real
    tolerance = settings.numerics.eigen_tolerance
    if eigenvalues.min() < -tolerance:
        raise CovarianceError(
            f"circulant embedding is not nonnegative-definite: min eigenvalue={eigenvalues.min():.3e} (H={H}, n={n_steps})")
    # отрицательные значения в пределах допуска - ошибка округления
    spectrum = np.sqrt(np.clip(eigenvalues, 0.0, None) / row.size)
    spectrum.setflags(write=False)
    return spectrum


def _draw_cholesky(H: float, n_steps: int, normals: np.ndarray) -> np.ndarray:
    return normals @ _cholesky_factor(H, n_steps).T


def _draw_circulant(H: float, n_steps: int, normals: np.ndarray) -> np.ndarray:
    spectrum = _circulant_spectrum(H, n_steps)
    size = spectrum.size
    noise = normals[..., :size] + 1j * normals[..., size:]
    increments = fft.fft(spectrum * noise, axis=-1).real[..., :n_steps]
    return np.cumsum(increments, axis=-1)


def _normals_per_draw(n_steps: int, method: SamplingMethod) -> int:
    return n_steps if method == SamplingMethod.cholesky else 4 * n_steps


def _sample_values(H: float, n_steps: int, normals: np.ndarray, method: SamplingMethod) -> np.ndarray:
    if method == SamplingMethod.cholesky:
        body = _draw_cholesky(H, n_steps, normals)
    else:
        body = _draw_circulant(H, n_steps, normals)
    zeros = np.zeros(body.shape[:-1] + (1,))
    return np.concatenate([zeros, body], axis=-1)


def sample_fbm(H: float, n_steps: int, seed: int, method: SamplingMethod | str = SamplingMethod.circulant,
               replicate: int = 0) -> FbmPath:
    """Одна траектория фБД с B_0 = 0; (H, n_steps, seed, method, replicate) воспроизводят ее побитово"""
    check_hurst(H)
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    method = SamplingMethod(method)
    rng = replicate_rng(seed, replicate)
    normals = rng.standard_normal(_normals_per_draw(n_steps, method))
    values = _sample_values(H, n_steps, normals, method)
    return FbmPath(hurst=H, n_steps=n_steps, values=values, seed=seed, method=method, replicate=replicate)


def sample_many(H: float, n_steps: int, seed: int, count: int, method: SamplingMethod | str = SamplingMethod.circulant,
                start: int = 0) -> np.ndarray:
    """
    Матрица (count, n_steps+1) реплик start..start+count-1.
    Строка k совпадает с sample_fbm(..., replicate=start+k).values с точностью до округления BLAS.
    """
    check_hurst(H)
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    method = SamplingMethod(method)
    width = _normals_per_draw(n_steps, method)
    normals = np.empty((count, width))
    for row, replicate in enumerate(range(start, start + count)):
        normals[row] = replicate_rng(seed, replicate).standard_normal(width)
    return _sample_values(H, n_steps, normals, method)


def to_geometric(path: FbmPath) -> FbmPath:
    """X_t = exp(B_t), X_0 = 1"""
    if path.kind == PathKind.geometric:
        return path
    data = path.model_dump()
    data.update(values=np.exp(path.values), kind=PathKind.geometric)
    return FbmPath(**data)

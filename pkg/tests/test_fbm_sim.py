import numpy as np
import pytest

from src.models.paths import FbmPath, PathKind, SamplingMethod
from src.services.fbm_sim import (fbm_covariance, increment_autocovariance, replicate_rng, sample_fbm,
                                  sample_many, to_geometric)
from src.utils.errors import DomainError, ParameterRangeError


def _covariance_within(paths: np.ndarray, H: float, n_sigma: float = 4.0):
    n = paths.shape[1] - 1
    idx = np.linspace(n // 8, n, 8).astype(int)
    sub = paths[:, idx]
    t = idx / n
    for a in range(len(idx)):
        for b in range(a, len(idx)):
            products = sub[:, a] * sub[:, b]
            stderr = products.std(ddof=1) / np.sqrt(products.size)
            assert abs(products.mean() - fbm_covariance(t[a], t[b], H)) < n_sigma * stderr


def test_covariance_examples():
    assert fbm_covariance(0.5, 0.5, 0.7) == pytest.approx(0.5 ** 1.4, abs=1e-12)
    assert fbm_covariance(0.5, 0.25, 0.5) == pytest.approx(0.25, abs=1e-15)
    assert fbm_covariance(1.0, 0.5, 0.75) == pytest.approx(0.5, abs=1e-15)


def test_covariance_symmetric_and_brownian_minimum():
    grid = np.linspace(0, 1, 100)
    t, s = np.meshgrid(grid, grid)
    assert np.array_equal(fbm_covariance(t, s, 0.63), fbm_covariance(s, t, 0.63))
    assert np.allclose(fbm_covariance(t, s, 0.5), np.minimum(t, s), atol=1e-15)


def test_covariance_domain():
    with pytest.raises(DomainError):
        fbm_covariance(1.2, 0.5, 0.7)
    with pytest.raises(ParameterRangeError):
        fbm_covariance(0.5, 0.5, 1.0)


def test_increment_variance_matches_formula():
    gamma = increment_autocovariance(0.8, 64)
    assert gamma[0] == pytest.approx(64.0 ** -1.6)


@pytest.mark.parametrize("method", list(SamplingMethod))
def test_sample_is_deterministic(method):
    first = sample_fbm(0.7, 128, seed=11, method=method, replicate=3)
    second = sample_fbm(0.7, 128, seed=11, method=method, replicate=3)
    other = sample_fbm(0.7, 128, seed=11, method=method, replicate=4)
    assert np.array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)
    assert first.values[0] == 0.0
    assert len(first.values) == 129


def test_path_is_immutable():
    path = sample_fbm(0.6, 8, seed=1)
    with pytest.raises(ValueError):
        path.values[1] = 5.0


def test_sample_rejects_zero_steps():
    with pytest.raises(DomainError):
        sample_fbm(0.7, 0, seed=1)


def test_sample_many_rows_match_single_draws():
    block = sample_many(0.75, 32, seed=5, count=4, method="circulant", start=10)
    for k in range(4):
        single = sample_fbm(0.75, 32, seed=5, method="circulant", replicate=10 + k)
        assert np.allclose(block[k], single.values, rtol=0, atol=1e-12)


def test_replicate_streams_do_not_depend_on_order():
    forward = [replicate_rng(9, k).standard_normal(3) for k in range(5)]
    backward = [replicate_rng(9, k).standard_normal(3) for k in reversed(range(5))][::-1]
    assert all(np.array_equal(a, b) for a, b in zip(forward, backward))


@pytest.mark.parametrize("method", list(SamplingMethod))
def test_sample_covariance_small(method):
    paths = sample_many(0.75, 64, seed=2024, count=4000, method=method)
    _covariance_within(paths, 0.75)


def test_brownian_terminal_variance_and_independent_increments():
    paths = sample_many(0.5, 16, seed=3, count=20000)
    assert paths[:, -1].var() == pytest.approx(1.0, abs=0.05)
    increments = np.diff(paths, axis=1)
    rho = np.corrcoef(increments[:, 3], increments[:, 4])[0, 1]
    assert abs(rho) < 3 / np.sqrt(increments.shape[0])


def test_methods_agree_in_distribution():
    from scipy import stats

    chol = sample_many(0.8, 32, seed=1, count=5000, method="cholesky")[:, -1]
    circ = sample_many(0.8, 32, seed=2, count=5000, method="circulant")[:, -1]
    assert stats.ks_2samp(chol, circ).pvalue > 1e-3


def test_to_geometric():
    path = FbmPath(hurst=0.7, n_steps=2, values=[0.0, 0.5, -0.3], seed=0, method="cholesky")
    geometric = to_geometric(path)
    assert geometric.kind == PathKind.geometric
    assert np.allclose(geometric.values, [1.0, np.exp(0.5), np.exp(-0.3)])
    zero = FbmPath(hurst=0.7, n_steps=3, values=np.zeros(4), seed=0, method="cholesky")
    assert np.array_equal(to_geometric(zero).values, np.ones(4))
    assert to_geometric(sample_fbm(0.9, 256, seed=8)).values.min() > 0


@pytest.mark.slow
@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_sample_covariance_acceptance(H):
    idx = np.linspace(32, 256, 8).astype(int)
    chunks = [sample_many(H, 256, seed=1, count=10_000, method="circulant", start=start)[:, idx]
              for start in range(0, 100_000, 10_000)]
    sub = np.concatenate(chunks)
    for a in range(8):
        for b in range(a, 8):
            products = sub[:, a] * sub[:, b]
            stderr = products.std(ddof=1) / np.sqrt(products.size)
            assert abs(products.mean() - fbm_covariance(idx[a] / 256, idx[b] / 256, H)) < 4 * stderr

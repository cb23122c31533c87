"""Реестр липшицевых интегрантов в замкнутой форме (CLI ссылается на них по имени)"""
from typing import Callable, NamedTuple

import numpy as np

CLIP_LEVEL = 1.0


class LipschitzEntry(NamedTuple):
    func: Callable[[np.ndarray], np.ndarray]
    # первообразная F, F' = f; pathwise-оракул F(B_1) - F(B_0) при H > 1/2
    antiderivative: Callable[[np.ndarray], np.ndarray]
    constant: float
    description: str


def _clipped(x):
    return np.clip(x, -CLIP_LEVEL, CLIP_LEVEL)


def _clipped_antiderivative(x):
    x = np.asarray(x, dtype=float)
    inner = 0.5 * x ** 2
    outer = CLIP_LEVEL * np.abs(x) - 0.5 * CLIP_LEVEL ** 2
    return np.where(np.abs(x) <= CLIP_LEVEL, inner, outer)


def _abs_antiderivative(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * x * np.abs(x)


def _log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    # log cosh x = x + log1p(e^{-2x}) - log 2, без переполнения
    return x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0)


LIPSCHITZ_REGISTRY: dict[str, LipschitzEntry] = {
    "clipped_identity": LipschitzEntry(_clipped, _clipped_antiderivative, 1.0, "x clipped to [-1, 1]"),
    "sine": LipschitzEntry(np.sin, lambda x: 1.0 - np.cos(x), 1.0, "sin x"),
    "tanh": LipschitzEntry(np.tanh, _log_cosh, 1.0, "tanh x"),
    "abs": LipschitzEntry(np.abs, _abs_antiderivative, 1.0, "|x|"),
}


def get_lipschitz_entry(name: str) -> LipschitzEntry:
    try:
        return LIPSCHITZ_REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown lipschitz integrand '{name}', known: {sorted(LIPSCHITZ_REGISTRY)}") from None

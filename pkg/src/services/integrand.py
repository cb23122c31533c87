"""
Выпуклые интегранты с атомарной мерой mu = f''.

f(x)    = intercept0 + slope0*x + sum_k w_k (x - a_k)^+
f'_-(x) = slope0 + sum_{a_k < x} w_k      (строгое неравенство: левая производная)
"""
import numpy as np

from src.logs import getLogger
from src.models.integrands import ConvexSpec, Hypothesis, LipschitzSpec
from src.utils.errors import DomainError

logger = getLogger(__name__)

EXCLUSION_TOLERANCE = 1e-12


def eval_f(spec: ConvexSpec, x):
    """Значение f(x), x скаляр или массив"""
    x = np.asarray(x, dtype=float)
    value = spec.intercept0 + spec.slope0 * x
    if spec.atoms:
        kinks = np.maximum(x[..., None] - spec.locations, 0.0)
        value = value + kinks @ spec.masses
    return value if value.ndim else float(value)


def eval_left_derivative(spec: ConvexSpec, x):
    """f'_-(x): суммируются только атомы строго левее x"""
    x = np.asarray(x, dtype=float)
    cumulative = np.concatenate(([0.0], np.cumsum(spec.masses)))
    # side="left": число атомов a_k < x
    count = np.searchsorted(spec.locations, x, side="left")
    value = spec.slope0 + cumulative[count]
    return value if np.ndim(value) else float(value)


def eval_integrand(spec: ConvexSpec | LipschitzSpec, x, use_left_derivative: bool = True):
    """Функция g в сумме sum g(B_{(i-1)/n}) dB: f'_- для выпуклых, f для липшицевых"""
    if isinstance(spec, LipschitzSpec):
        return spec(x)
    if use_left_derivative:
        return eval_left_derivative(spec, x)
    return eval_f(spec, x)


def constant_C(a):
    """C(a) = max(1, |a|) exp(-min{a^2, (a-1)^2} / 2)"""
    a = np.asarray(a, dtype=float)
    value = np.maximum(1.0, np.abs(a)) * np.exp(-np.minimum(a ** 2, (a - 1.0) ** 2) / 2.0)
    return value if value.ndim else float(value)


def check_hypothesis(spec: ConvexSpec, which: Hypothesis, p: float | None = None) -> tuple[bool, float]:
    """
    Интеграл гипотезы по атомарной мере: конечная сумма sum_k w_k g(a_k).
    Для конечной атомарной меры гипотеза выполнена всегда, значение нужно для учета констант.
    """
    which = Hypothesis(which)
    locations, masses = spec.locations, spec.masses
    if which in (Hypothesis.H1, Hypothesis.H2) and (p is None or p <= 0):
        raise DomainError(f"{which.value} needs a positive p, got {p}")

    if which == Hypothesis.H1:
        weights = constant_C(locations) ** (1.0 / p)
    elif which == Hypothesis.H2:
        if np.any(locations <= 0):
            raise DomainError(f"H2 needs atoms at positive locations (log a), got {locations.tolist()}")
        weights = constant_C(np.log(locations)) ** (1.0 / p)
    else:
        weights = np.exp(-np.minimum(locations ** 2, (locations - 1.0) ** 2) / 2.0)

    integral = float(np.sum(np.atleast_1d(weights) * masses))
    holds = bool(np.isfinite(integral))
    logger.debug(f"Hypothesis {which.value} for {spec.label or spec.atoms}: integral={integral}")
    return holds, integral


def rate_param_violations(H: float, p: float, beta: float) -> list[str]:
    """Список нарушенных неравенств для 2H < p < H/(1-H) и 1-H < beta < H/p, beta != 1-2H/p"""
    violations = []
    if not 0.5 < H < 1:
        violations.append(f"violated 1/2 < H < 1: H={H:g}")
        return violations
    if not 2 * H < p < H / (1 - H):
        violations.append(f"violated 2H < p < H/(1-H): {2 * H:g} < {p:g} < {H / (1 - H):g}")
    if not 1 - H < beta < H / p:
        violations.append(f"violated 1-H < beta < H/p: {1 - H:g} < {beta:g} < {H / p:g}")
    excluded = 1 - 2 * H / p
    if abs(beta - excluded) <= EXCLUSION_TOLERANCE:
        violations.append(f"violated beta != 1-2H/p: beta={beta:g} equals the excluded value {excluded:g}")
    return violations


def validate_rate_params(H: float, p: float, beta: float) -> bool:
    return not rate_param_violations(H, p, beta)

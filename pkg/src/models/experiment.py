from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import settings
from src.models.integrands import ConvexSpec, LipschitzSpec
from src.models.paths import HurstParam, SamplingMethod
from src.services.integrand import rate_param_violations


class Scenario(str, Enum):
    fbm_convex = "FbmConvex"
    fbm_geometric = "FbmGeometric"
    fbm_lipschitz = "FbmLipschitz"
    bm_convex = "BmConvex"
    bm_lipschitz = "BmLipschitz"

    @property
    def is_brownian(self) -> bool:
        return self in (Scenario.bm_convex, Scenario.bm_lipschitz)

    @property
    def is_lipschitz(self) -> bool:
        return self in (Scenario.fbm_lipschitz, Scenario.bm_lipschitz)


class OracleKind(str, Enum):
    ito_pathwise = "ItoPathwise"
    fine_grid_reference = "FineGridReference"


class OracleMode(str, Enum):
    # Bm*: эталон на мелкой сетке (MC) или точная норма через изометрию (только BmConvex)
    fine_grid = "fine_grid"
    isometry = "isometry"


class DiscretizationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    sum_value: float
    oracle_value: float
    error: float
    oracle_kind: OracleKind

    @model_validator(mode="after")
    def _error_is_difference(self):
        if self.error != self.sum_value - self.oracle_value:
            raise ValueError("error must equal sum_value - oracle_value")
        return self


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    hurst: HurstParam
    integrand: ConvexSpec | LipschitzSpec
    scenario: Scenario
    n_values: tuple[int, ...]
    fine_grid: int = Field(ge=1)
    replicates: int = Field(ge=1)
    r_norm: float = Field(default=1.0, ge=1.0)
    p_param: float | None = None
    beta_param: float | None = None
    seed: int = 0
    epsilon: float = Field(default_factory=lambda: settings.experiment.epsilon, gt=0.0)
    method: SamplingMethod = SamplingMethod.circulant
    oracle_mode: OracleMode = OracleMode.fine_grid
    quadrature_points: int = Field(default=16, ge=4)

    @field_validator("n_values")
    @classmethod
    def _dyadic_increasing(cls, value: tuple[int, ...]):
        if not value:
            raise ValueError("n_values must not be empty")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n_values must be strictly increasing")
        if not all(_is_power_of_two(n) for n in value):
            raise ValueError(f"n_values must be dyadic, got {list(value)}")
        return value

    @model_validator(mode="after")
    def _check_consistency(self):
        bad = [n for n in self.n_values if self.fine_grid % n]
        if bad:
            raise ValueError(f"fine_grid={self.fine_grid} is not divisible by n={bad}")

        if self.scenario.is_brownian and self.hurst != 0.5:
            raise ValueError(f"{self.scenario.value} requires H = 1/2, got H={self.hurst}")
        if not self.scenario.is_brownian and not self.hurst > 0.5:
            raise ValueError(f"{self.scenario.value} requires H > 1/2, got H={self.hurst}")

        if self.scenario.is_lipschitz and not isinstance(self.integrand, LipschitzSpec):
            raise ValueError(f"{self.scenario.value} requires a lipschitz integrand")
        if not self.scenario.is_lipschitz and not isinstance(self.integrand, ConvexSpec):
            raise ValueError(f"{self.scenario.value} requires a convex integrand (atoms)")

        if self.scenario in (Scenario.fbm_convex, Scenario.fbm_geometric):
            if self.p_param is None or self.beta_param is None:
                raise ValueError(f"{self.scenario.value} requires p_param and beta_param")
            violations = rate_param_violations(self.hurst, self.p_param, self.beta_param)
            if violations:
                raise ValueError("; ".join(violations))
            if not self.r_norm < self.p_param:
                raise ValueError(f"violated r < p: r={self.r_norm}, p={self.p_param}")
        if self.scenario == Scenario.fbm_geometric and any(a <= 0 for a, _ in self.integrand.atoms):
            raise ValueError("FbmGeometric requires all atoms at positive locations (log a must exist)")
        if self.scenario == Scenario.fbm_lipschitz and not self.epsilon < 2 * self.hurst - 1:
            raise ValueError(f"violated 0 < eps < 2H-1: eps={self.epsilon}, 2H-1={2 * self.hurst - 1:g}")
        if self.scenario == Scenario.bm_convex and self.r_norm > 2:
            raise ValueError(f"BmConvex requires r in [1, 2], got r={self.r_norm}")

        if self.oracle_mode == OracleMode.isometry:
            if self.scenario != Scenario.bm_convex:
                raise ValueError("isometry oracle mode is only defined for BmConvex")
            if len(self.integrand.atoms) != 1 or self.r_norm != 2:
                raise ValueError("isometry oracle mode needs a single-atom integrand and r_norm = 2")
        elif self.scenario.is_brownian:
            ratio = settings.experiment.reference_ratio
            if self.fine_grid < ratio * max(self.n_values):
                raise ValueError(
                    f"fine-grid reference too coarse: fine_grid={self.fine_grid} < {ratio}*max(n)={ratio * max(self.n_values)}")
        return self


class RateEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_values: list[int]
    error_norms: list[float]
    mc_stderr: list[float]
    slope: float
    slope_stderr: float
    intercept: float
    theoretical_exponent: float
    passed: bool

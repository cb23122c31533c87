from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.paths import HurstParam


class CrossingQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: float = Field(gt=0.0, lt=1.0)
    t: float = Field(gt=0.0, le=1.0)
    a: float
    hurst: HurstParam

    @model_validator(mode="after")
    def _ordered(self):
        if not self.s < self.t:
            raise ValueError(f"crossing query needs 0 < s < t <= 1, got s={self.s}, t={self.t}")
        return self

    def reflected(self) -> "CrossingQuery":
        """P(B_t < a < B_s) = P(B_t > -a > B_s) по симметрии центрированного процесса"""
        return self.model_copy(update={"a": -self.a})


class CrossingResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    query: CrossingQuery
    probability: float = Field(ge=0.0, le=1.0)
    bound_value: float = Field(gt=0.0)
    ratio: float = Field(ge=0.0)

from pydantic import BaseModel, ConfigDict, Field


class BesovReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0, lt=1.0)
    norm_1beta: float = Field(ge=0.0)
    norm_2beta: float = Field(ge=0.0)
    # sup по парам сетки s < t от |D^{1-beta}_{t-} g_{t-}(s)|
    sup_frac_derivative: float = Field(ge=0.0)
    n_points: int = 0

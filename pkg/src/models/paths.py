from enum import Enum
from typing import Annotated

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

HurstParam = Annotated[float, Field(gt=0.0, lt=1.0)]


class SamplingMethod(str, Enum):
    cholesky = "cholesky"
    circulant = "circulant"


class PathKind(str, Enum):
    fbm = "fbm"
    geometric = "geometric"


def _frozen_array(value) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr.setflags(write=False)
    return arr


class FbmPath(BaseModel):
    """Траектория на равномерной сетке t_i = i/n_steps, i = 0..n_steps"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    hurst: HurstParam
    n_steps: int = Field(ge=1)
    values: np.ndarray
    seed: int
    method: SamplingMethod
    replicate: int = 0
    kind: PathKind = PathKind.fbm

    @field_validator("values", mode="before")
    @classmethod
    def _to_array(cls, value):
        return _frozen_array(value)

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.ndim != 1 or self.values.shape[0] != self.n_steps + 1:
            raise ValueError(f"values must have length n_steps+1={self.n_steps + 1}, got shape {self.values.shape}")
        start = 1.0 if self.kind == PathKind.geometric else 0.0
        if self.values[0] != start:
            raise ValueError(f"{self.kind.value} path must start at {start}, got {self.values[0]}")
        return self

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) / self.n_steps

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


class SampledFunction(BaseModel):
    """Функция на равномерной сетке [0, T] из N+1 точек"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    T: float = Field(default=1.0, gt=0.0)

    @field_validator("values", mode="before")
    @classmethod
    def _to_array(cls, value):
        return _frozen_array(value)

    @model_validator(mode="after")
    def _check_length(self):
        if self.values.ndim != 1 or self.values.shape[0] < 3:
            raise ValueError("SampledFunction needs a 1-d grid with N >= 2 cells")
        return self

    @classmethod
    def from_callable(cls, func, n: int, T: float = 1.0) -> "SampledFunction":
        grid = np.linspace(0.0, T, n + 1)
        return cls(values=func(grid), T=T)

    @classmethod
    def from_path(cls, path: FbmPath) -> "SampledFunction":
        return cls(values=path.values, T=1.0)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def step(self) -> float:
        return self.T / self.n

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n + 1)

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from src.services.lipschitz import LipschitzEntry, get_lipschitz_entry


class Hypothesis(str, Enum):
    H1 = "H1"
    H2 = "H2"
    H3 = "H3"


class ConvexSpec(BaseModel):
    """
    Выпуклый интегрант f(x) = intercept0 + slope0*x + sum_k w_k (x - a_k)^+.
    Мера mu = f'' чисто атомарная: атомы a_k с массами w_k > 0.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    atoms: tuple[tuple[float, float], ...] = ()
    slope0: float = 0.0
    intercept0: float = 0.0
    label: str = ""

    @field_validator("atoms", mode="before")
    @classmethod
    def _atoms_to_tuples(cls, value):
        return tuple(tuple(float(x) for x in atom) for atom in value)

    @model_validator(mode="after")
    def _check_atoms(self):
        locations = [a for a, _ in self.atoms]
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("atom masses must be strictly positive")
        if any(b <= a for a, b in zip(locations, locations[1:])):
            raise ValueError("atom locations must be strictly increasing")
        return self

    @classmethod
    def call(cls, strike: float, weight: float = 1.0) -> "ConvexSpec":
        return cls(atoms=[(strike, weight)], label=f"call@{strike:g}")

    @property
    def locations(self) -> np.ndarray:
        return np.array([a for a, _ in self.atoms], dtype=float)

    @property
    def masses(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)


class LipschitzSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    lipschitz: str
    label: str = ""

    @field_validator("lipschitz")
    @classmethod
    def _known_name(cls, value: str) -> str:
        get_lipschitz_entry(value)
        return value

    @property
    def entry(self) -> LipschitzEntry:
        return get_lipschitz_entry(self.lipschitz)

    @property
    def lipschitz_constant(self) -> float:
        return self.entry.constant

    def __call__(self, x):
        return self.entry.func(np.asarray(x, dtype=float))

    def antiderivative(self, x):
        return self.entry.antiderivative(np.asarray(x, dtype=float))


Integrand = ConvexSpec | LipschitzSpec

_integrand_adapter = TypeAdapter(Integrand)


def parse_integrand(data: dict) -> ConvexSpec | LipschitzSpec:
    """{"atoms": [[a, w], ...], "slope0": s, "intercept0": c} или {"lipschitz": "<name>"}"""
    return _integrand_adapter.validate_python(data)

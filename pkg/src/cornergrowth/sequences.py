"""Stationary parameter sequences a = (a_i), b = (b_j) with prescribed marginals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtr

from .distributions import Marginal
from .rng import normals, seed_derive, uniforms

__all__ = ["SequenceModel", "ParameterPair", "generate", "draw_sequence"]


@dataclass(frozen=True)
class SequenceModel:
    """Marginal law plus dependence structure of one parameter sequence.

    ``dependence="iid"`` draws independent quantile transforms.
    ``dependence="ar1"`` feeds a stationary Gaussian AR(1) process with
    correlation ``rho`` through the normal CDF and then the marginal
    quantile function; the result is stationary, mixing and has exactly the
    requested marginal.
    """

    marginal: Marginal
    dependence: str = "iid"
    rho: float = 0.0

    def __post_init__(self):
        if self.dependence not in ("iid", "ar1"):
            raise ValueError(f"dependence must be 'iid' or 'ar1', got {self.dependence!r}")
        if self.dependence == "ar1" and not -1 < self.rho < 1:
            raise ValueError(f"AR(1) correlation must lie in (-1, 1), got {self.rho}")
        if self.dependence == "iid" and self.rho != 0.0:
            raise ValueError("rho is only meaningful for dependence='ar1'")

    def dependence_dict(self) -> dict:
        if self.dependence == "iid":
            return {"dependence": "iid"}
        return {"dependence": "ar1", "rho": self.rho}


@dataclass(frozen=True, eq=False)
class ParameterPair:
    a: np.ndarray
    b: np.ndarray
    seed: int

    def __post_init__(self):
        for arr in (self.a, self.b):
            arr.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return len(self.b)

    def __eq__(self, other):
        return (
            isinstance(other, ParameterPair)
            and self.seed == other.seed
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )


def draw_sequence(model: SequenceModel, size: int, key: int) -> np.ndarray:
    if model.dependence == "iid":
        u = uniforms(key, size)
    else:
        e = normals(key, size + 1)
        rho = model.rho
        # e[0] seeds the stationary start x_{-1} ~ N(0, 1)
        x = lfilter([math.sqrt(1.0 - rho * rho)], [1.0, -rho], e[1:], zi=[rho * e[0]])[0]
        u = ndtr(x)
    out = np.asarray(model.marginal.ppf(u), dtype=float)
    return np.clip(out, model.marginal.left_endpoint, model.marginal.right_endpoint)


def generate(model_a: SequenceModel, model_b: SequenceModel, m: int, n: int, seed: int) -> ParameterPair:
    """Draw a_1..a_m and b_1..b_n from independent streams derived from ``seed``."""
    if m < 1 or n < 1:
        raise ValueError(f"sequence lengths must be positive, got m={m}, n={n}")
    a = draw_sequence(model_a, m, seed_derive(seed, "sequence/a"))
    b = draw_sequence(model_b, n, seed_derive(seed, "sequence/b"))
    return ParameterPair(a=a, b=b, seed=int(seed))

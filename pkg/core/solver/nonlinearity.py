from dataclasses import dataclass
from typing import Union

import numpy as np

from core.errors import PreconditionError, violation
from core.geometry.grid import RadialProfile


@dataclass(frozen=True)
class Nonlinearity:
    """F(u) = μ·sign·|u|^{b-1}u."""
    b: float
    mu: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if not self.b > 1:
            raise PreconditionError("nonlinearity power must exceed 1", [violation("b", "b > 1", self.b)])
        if self.sign not in (1, -1):
            raise PreconditionError("sign must be +1 or -1", [violation("sign", "sign in {+1,-1}", self.sign)])

    @property
    def coefficient(self) -> float:
        return self.mu * self.sign

    @property
    def lipschitz_constant(self) -> float:
        """C_b in |F(u)-F(v)| <= C_b|μ|(|u|^{b-1}+|v|^{b-1})|u-v|."""
        return self.b

    @property
    def is_zero(self) -> bool:
        return self.mu == 0.0

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.is_zero:
            return np.zeros_like(values)
        return self.coefficient * np.abs(values) ** (self.b - 1.0) * values

    def scaled(self, mu: float) -> "Nonlinearity":
        return Nonlinearity(self.b, mu, self.sign)


def evaluate_F(u: Union[RadialProfile, np.ndarray], nl: Nonlinearity):
    if isinstance(u, RadialProfile):
        return RadialProfile(u.grid, nl.evaluate(u.values))
    return nl.evaluate(u)

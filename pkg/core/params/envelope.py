"""
Decay envelope φ_p of the dispersive estimate, its two-branch majorant,
and the Beta-function identity used in the fixed-point argument.
"""
from typing import NamedTuple, Union

import numpy as np
from scipy import integrate, special

from core.errors import DivergentIntegralError, PreconditionError, SingularEnvelopeError, violation

ArrayLike = Union[float, np.ndarray]

SAMPLE_HORIZON = 50.0


class EnvelopeFit(NamedTuple):
    t0: float
    C: float


def beta_p(p: float, n: int) -> float:
    """(n-1)/2 · (1 - 2/p)."""
    return (n - 1) / 2.0 * (1.0 - 2.0 / p)


def endpoint_p(n: int) -> float:
    return 2.0 * (n + 1) / (n - 1)


def phi_p(t: ArrayLike, p: float, n: int) -> np.ndarray:
    """(1+|t|)^{2/p} / sinh(|t|)^{β_p}; symmetric in t."""
    if not 2.0 <= p <= endpoint_p(n):
        raise PreconditionError(
            "phi_p needs 2 <= p <= 2(n+1)/(n-1)",
            [violation("p", f"2 <= p <= {endpoint_p(n):g}", p, "PRECONDITION")],
        )
    a = np.abs(np.asarray(t, dtype=float))
    exponent = beta_p(p, n)
    if exponent == 0.0:
        return (1.0 + a) ** (2.0 / p)
    if np.any(a == 0.0):
        raise SingularEnvelopeError(f"phi_p is singular at t=0 for p={p:g} > 2")
    return (1.0 + a) ** (2.0 / p) / np.sinh(a) ** exponent


def envelope_bound(t: ArrayLike, p: float, n: int, t0: float = 1.0, C: float = 1.0) -> np.ndarray:
    """C|t|^{2/p} e^{-β_p|t|} for |t| >= t0, C|t|^{-β_p} below."""
    a = np.abs(np.asarray(t, dtype=float))
    bp = beta_p(p, n)
    tail = a ** (2.0 / p) * np.exp(-bp * a)
    core = a ** (-bp)
    return C * np.where(a >= t0, tail, core)


def envelope_samples(t0: float, horizon: float = SAMPLE_HORIZON) -> np.ndarray:
    return np.concatenate([
        np.geomspace(1e-6, t0, 2000, endpoint=False),
        np.linspace(t0, horizon, 5000),
    ])


def find_t0(p: float, n: int, t0: float = 1.0) -> EnvelopeFit:
    """Smallest C with φ_p <= envelope_bound(·, C) on a dense sample of (0, 50]."""
    if not 2.0 < p < endpoint_p(n):
        raise PreconditionError(
            "find_t0 needs 2 < p < 2(n+1)/(n-1)",
            [violation("p", f"2 < p < {endpoint_p(n):g}", p, "PRECONDITION")],
        )
    if t0 < 1.0:
        raise PreconditionError("t0 must be >= 1", [violation("t0", "t0 >= 1", t0, "PRECONDITION")])
    samples = envelope_samples(t0)
    ratio = phi_p(samples, p, n) / envelope_bound(samples, p, n, t0)
    return EnvelopeFit(t0=float(t0), C=float(np.max(ratio)))


def beta_identity_constant(beta: float, gamma: float) -> float:
    """B(1-β, 1-γ) = t^{β+γ-1} ∫₀ᵗ s^{-β}(t-s)^{-γ} ds."""
    problems = []
    if beta >= 1.0:
        problems.append(violation("beta", "beta < 1", beta, "DIVERGENT_INTEGRAL"))
    if gamma >= 1.0:
        problems.append(violation("b*alpha_tilde", "b*alpha_tilde < 1", gamma, "DIVERGENT_INTEGRAL"))
    if problems:
        raise DivergentIntegralError("Beta-identity integral diverges", problems)
    return float(special.beta(1.0 - beta, 1.0 - gamma))


def beta_identity_quadrature(beta: float, gamma: float, t: float) -> float:
    """∫₀ᵗ s^{-β}(t-s)^{-γ} ds with algebraic endpoint weights."""
    value, _ = integrate.quad(
        lambda s: 1.0, 0.0, t, weight="alg", wvar=(-beta, -gamma), epsabs=0.0, epsrel=1e-12
    )
    return float(value)


__all__ = [
    "EnvelopeFit",
    "beta_identity_constant",
    "beta_identity_quadrature",
    "beta_p",
    "endpoint_p",
    "envelope_bound",
    "find_t0",
    "phi_p",
]

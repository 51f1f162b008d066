"""
Parameter arithmetic of the small-data theory.

From (n, b, σ):
    β  = (n-1)/2 · (1 - 2/(b+1))
    α̃ = (1-β)/(b-1)
    α  = (1-β+σ)/(b-1)
with 0 < σ < β, 0 < bα̃ < bα < 1 and 2 < b+1 < 2(n+1)/(n-1).
"""
import math
from dataclasses import dataclass, replace
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from core.errors import ConstraintViolation, ConstraintViolationError, DomainError, violation
from core.lorentz.rearrangement import LorentzExponents
from core.params.envelope import find_t0

DEFAULT_SIGMA = 0.05
IDENTITY_TOLERANCE = 1e-12


class AdmissibleInterval(NamedTuple):
    low: float
    high: float

    @property
    def empty(self) -> bool:
        return self.low >= self.high

    def contains(self, b: float) -> bool:
        return self.low < b < self.high


def admissible_range(n: int, sigma: float = 0.0) -> AdmissibleInterval:
    """Published interval ((n+1+σ+√((n+1+σ)²+8(n-1-σ)))/(2(n-1-σ)), (n+3)/(n-1))."""
    if n < 2:
        raise DomainError("dimension must be >= 2", [violation("n", "n >= 2", n, "DOMAIN")])
    if not 0.0 <= sigma < n - 1:
        raise DomainError("sigma must lie in [0, n-1)", [violation("sigma", "0 <= sigma < n-1", sigma, "DOMAIN")])
    a = n + 1 + sigma
    m = n - 1 - sigma
    low = (a + math.sqrt(a * a + 8.0 * m)) / (2.0 * m)
    return AdmissibleInterval(low, (n + 3) / (n - 1))


def sharp_lower_bound(n: int, sigma: float) -> float:
    """The b at which bα = 1; bα < 1 exactly when b exceeds it."""
    a = n + 1 + 2.0 * sigma
    m = n - 1 - 2.0 * sigma
    if m <= 0:
        return math.inf
    return (a + math.sqrt(a * a + 8.0 * m)) / (2.0 * m)


def effective_range(n: int, sigma: float) -> AdmissibleInterval:
    """Published interval intersected with the bα < 1 threshold."""
    published = admissible_range(n, sigma)
    return AdmissibleInterval(max(published.low, sharp_lower_bound(n, sigma)), published.high)


def local_upper_bound(n: int) -> float:
    """Upper end of the local-theory range (n+1+√(n²+10n-7))/(2(n-1))."""
    if n < 2:
        raise DomainError("dimension must be >= 2", [violation("n", "n >= 2", n, "DOMAIN")])
    return (n + 1 + math.sqrt(n * n + 10 * n - 7)) / (2.0 * (n - 1))


def beta_of(n: int, b: float) -> float:
    return (n - 1) / 2.0 * (1.0 - 2.0 / (b + 1.0))


@dataclass(frozen=True)
class ParameterSet:
    n: int
    b: float
    sigma: float
    beta: float
    alpha: float
    alpha_tilde: float
    h: float = 0.0
    d: float = math.inf
    t0: float = 1.0
    delta: float = 0.5
    C_phi: float = math.nan

    @property
    def p(self) -> float:
        """Primary Lorentz exponent b+1."""
        return self.b + 1.0

    @property
    def b_alpha(self) -> float:
        return self.b * self.alpha

    @property
    def b_alpha_tilde(self) -> float:
        return self.b * self.alpha_tilde

    @property
    def h_max(self) -> float:
        return 1.0 - self.b_alpha

    def exponents(self, d: Optional[float] = None) -> LorentzExponents:
        return LorentzExponents(self.p, self.d if d is None else d)

    def data_exponents(self, d: Optional[float] = None) -> LorentzExponents:
        """((b+1)/b, d), the data class of the sufficient condition."""
        return LorentzExponents(self.p / self.b, self.d if d is None else d)

    def with_h(self, h: float) -> "ParameterSet":
        updated = replace(self, h=h)
        _raise_if(_check_invariants(updated))
        return updated

    def with_d(self, d: float) -> "ParameterSet":
        updated = replace(self, d=d)
        _raise_if(_check_invariants(updated))
        return updated

    def h_sweep(self) -> List[float]:
        return [0.0, self.h_max / 4.0, self.h_max / 2.0]

    def residuals(self) -> Dict[str, float]:
        n, b, s = self.n, self.b, self.sigma
        closed_alpha_tilde = (n - 1) / (b * b - 1.0) - (n - 3) / (2.0 * (b - 1.0))
        return {
            "1-(beta-sigma) = (b-1)alpha": 1.0 - (self.beta - s) - (b - 1.0) * self.alpha,
            "1-beta = (b-1)alpha_tilde": 1.0 - self.beta - (b - 1.0) * self.alpha_tilde,
            "1-b*alpha = (beta-sigma)-alpha": (1.0 - self.b_alpha) - ((self.beta - s) - self.alpha),
            "1-beta-b*alpha_tilde = -alpha_tilde": 1.0 - self.beta - self.b_alpha_tilde + self.alpha_tilde,
            "alpha_tilde closed form": self.alpha_tilde - closed_alpha_tilde,
            "alpha = alpha_tilde + sigma/(b-1)": self.alpha - self.alpha_tilde - s / (b - 1.0),
        }

    def max_residual(self) -> float:
        return max(abs(v) for v in self.residuals().values())

    def as_table(self) -> List[Tuple[str, float]]:
        return [
            ("n", float(self.n)),
            ("b", self.b),
            ("sigma", self.sigma),
            ("beta", self.beta),
            ("alpha_tilde", self.alpha_tilde),
            ("alpha", self.alpha),
            ("b_alpha_tilde", self.b_alpha_tilde),
            ("b_alpha", self.b_alpha),
            ("h", self.h),
            ("d", self.d),
            ("t0", self.t0),
            ("delta", self.delta),
            ("C_phi", self.C_phi),
        ]


def _check_invariants(ps: ParameterSet) -> List[ConstraintViolation]:
    problems: List[ConstraintViolation] = []
    n, b = ps.n, ps.b
    if n < 2:
        problems.append(violation("n", "n >= 2", n))
    if not b > 1:
        problems.append(violation("b", "b > 1", b))
    if not ps.sigma > 0:
        problems.append(violation("sigma", "0 < sigma", ps.sigma))
    if not ps.sigma < ps.beta:
        problems.append(violation("sigma<beta", "sigma < beta", (ps.sigma, ps.beta)))
    if n >= 2 and 0 <= ps.sigma < n - 1:
        interval = admissible_range(n, ps.sigma)
        if not b > interval.low:
            problems.append(violation("b_lower_bound", f"b > {interval.low:.6g}", b))
        if not b < interval.high:
            problems.append(violation("b_upper_bound", f"b < {interval.high:.6g}", b))
    if not 0 < ps.b_alpha_tilde:
        problems.append(violation("b*alpha_tilde>0", "0 < b*alpha_tilde", ps.b_alpha_tilde))
    if not ps.b_alpha_tilde < ps.b_alpha:
        problems.append(violation("b*alpha_tilde<b*alpha", "b*alpha_tilde < b*alpha", (ps.b_alpha_tilde, ps.b_alpha)))
    if not ps.b_alpha < 1:
        problems.append(violation("b*alpha<1", "b*alpha < 1", ps.b_alpha))
    if n >= 2 and not 2 < b + 1 < 2.0 * (n + 1) / max(n - 1, 1):
        problems.append(violation("b+1", "2 < b+1 < 2(n+1)/(n-1)", b + 1))
    if not 0 <= ps.h < 1 - ps.b_alpha:
        problems.append(violation("h", "0 <= h < 1 - b*alpha", ps.h))
    if not 1 <= ps.d <= math.inf:
        problems.append(violation("d", "1 <= d <= inf", ps.d))
    if not ps.t0 >= 1:
        problems.append(violation("t0", "t0 >= 1", ps.t0))
    if not 0 < ps.delta < ps.t0:
        problems.append(violation("delta", "0 < delta < t0", ps.delta))
    return problems


def _raise_if(problems: List[ConstraintViolation]):
    if problems:
        raise ConstraintViolationError("inadmissible parameter set", problems)


def derive(n: int, b: float, sigma: float = DEFAULT_SIGMA, h: float = 0.0, d: float = math.inf,
           t0: float = 1.0, delta: Optional[float] = None) -> ParameterSet:
    """Derived exponents with every relation verified; offenders are named."""
    beta = beta_of(n, b)
    alpha_tilde = (1.0 - beta) / (b - 1.0) if b != 1 else math.nan
    alpha = (1.0 - beta + sigma) / (b - 1.0) if b != 1 else math.nan
    ps = ParameterSet(
        n=n, b=float(b), sigma=float(sigma), beta=beta, alpha=alpha, alpha_tilde=alpha_tilde,
        h=float(h), d=float(d), t0=float(t0), delta=float(t0 / 2.0 if delta is None else delta),
    )
    _raise_if(_check_invariants(ps))
    fit = find_t0(ps.p, n, t0)
    return replace(ps, C_phi=fit.C)


def sample_admissible(rng: np.random.Generator, n: int, sigma_max: float = 0.2,
                      max_tries: int = 1000) -> Tuple[int, float, float]:
    """A random (n, b, σ) strictly inside the effective admissible region."""
    for _ in range(max_tries):
        sigma = float(rng.uniform(1e-3, sigma_max))
        interval = effective_range(n, sigma)
        if interval.empty:
            continue
        b = float(interval.low + (interval.high - interval.low) * rng.uniform(0.01, 0.99))
        if sigma < beta_of(n, b):
            return n, b, sigma
    raise DomainError(f"no admissible triple found for n={n}", [violation("n", "nonempty region", n)])

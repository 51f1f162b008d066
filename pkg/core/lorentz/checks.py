"""
Hölder and inclusion checks with measured constants.

Constants of the inequalities are reported, not asserted; the inclusion
chain is compared against the sharp constant (q_a/p)^{1/q_a - 1/q_b} of
‖f‖_{(p,q_b)} <= C‖f‖_{(p,q_a)}, q_a < q_b.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from core.errors import PreconditionError, violation
from core.geometry.grid import RadialProfile
from core.lorentz.norms import lorentz_norm
from core.lorentz.rearrangement import LorentzExponents

RELATION_TOLERANCE = 1e-12
ORDERING_SLACK = 1e-9


@dataclass
class CheckReport:
    """One row of the (test_id, lhs, rhs, ratio, grid_resolution) check schema"""
    test_id: str
    lhs: float
    rhs: float
    ratio: float
    grid_resolution: int
    passed: Optional[bool] = None

    def to_row(self) -> Dict[str, object]:
        return asdict(self)


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return lhs / rhs


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def holder_check(f: RadialProfile, g: RadialProfile, e1: LorentzExponents, e2: LorentzExponents,
                 e3: LorentzExponents, test_id: str = "holder") -> CheckReport:
    """Measured ‖fg‖_{e3} / (‖f‖_{e1} ‖g‖_{e2})."""
    problems = []
    if abs(_inv(e3.p) - _inv(e1.p) - _inv(e2.p)) > RELATION_TOLERANCE:
        problems.append(violation("p3", "1/p3 = 1/p1 + 1/p2", (e1.p, e2.p, e3.p), "PRECONDITION"))
    if _inv(e1.q) + _inv(e2.q) < _inv(e3.q) - RELATION_TOLERANCE:
        problems.append(violation("r3", "1/r1 + 1/r2 >= 1/r3", (e1.q, e2.q, e3.q), "PRECONDITION"))
    if problems:
        raise PreconditionError("Hölder exponent relation violated", problems)
    lhs = lorentz_norm(f * g, e3)
    rhs = lorentz_norm(f, e1) * lorentz_norm(g, e2)
    ratio = _ratio(lhs, rhs)
    return CheckReport(test_id, lhs, rhs, ratio, f.grid.num_points, passed=math.isfinite(ratio))


def holder_sweep(pairs: Sequence[Tuple[RadialProfile, RadialProfile]], e1: LorentzExponents,
                 e2: LorentzExponents, e3: LorentzExponents) -> List[CheckReport]:
    return [holder_check(f, g, e1, e2, e3, test_id=f"holder-{k}") for k, (f, g) in enumerate(pairs)]


@dataclass
class InclusionReport:
    p: float
    exponents: List[float]
    norms: List[float]
    steps: List[CheckReport] = field(default_factory=list)

    @property
    def ordering_holds(self) -> bool:
        return all(step.passed for step in self.steps)

    @property
    def measured_constants(self) -> List[float]:
        return [step.ratio for step in self.steps]


def sharp_inclusion_constant(p: float, qa: float, qb: float) -> float:
    return (qa / p) ** (_inv(qa) - _inv(qb))


def inclusion_check(f: RadialProfile, p: float, q1: float, q2: float, test_id: str = "inclusion") -> InclusionReport:
    """Norms along 1 <= q1 <= p <= q2 <= ∞ and the measured step constants."""
    if not (1.0 <= q1 <= p <= q2 <= math.inf):
        raise PreconditionError(
            "inclusion chain needs 1 <= q1 <= p <= q2 <= inf",
            [violation("q1/q2", "1 <= q1 <= p <= q2 <= inf", (q1, p, q2), "PRECONDITION")],
        )
    chain: List[float] = []
    for q in (1.0, q1, p, q2, math.inf):
        if not chain or q != chain[-1]:
            chain.append(q)
    norms = [lorentz_norm(f, LorentzExponents(p, q)) for q in chain]
    report = InclusionReport(p=p, exponents=chain, norms=norms)
    for k in range(len(chain) - 1):
        qa, qb = chain[k], chain[k + 1]
        bound = sharp_inclusion_constant(p, qa, qb) * norms[k]
        measured = _ratio(norms[k + 1], bound)
        report.steps.append(CheckReport(
            test_id=f"{test_id}-{qa:g}-{qb:g}",
            lhs=norms[k + 1],
            rhs=bound,
            ratio=measured,
            grid_resolution=f.grid.num_points,
            passed=measured <= 1.0 + ORDERING_SLACK,
        ))
    return report

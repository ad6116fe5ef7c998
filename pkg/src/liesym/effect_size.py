"""Population standardized mean difference and its invariance checks."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import DomainError
from .lie_core import GroupElement
from .measurement import Population

__all__ = [
    "DEFAULT_TOLERANCE",
    "SmdReport",
    "DeltaTerm",
    "delta",
    "pooled_sd",
    "smd",
    "smd_invariance",
    "attenuate",
]

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DeltaTerm:
    value: float

    @property
    def inflation(self) -> float:
        """Observed-to-true variance ratio ``1 + delta`` (equals ``1/rho``)."""
        return 1.0 + self.value


@dataclass(frozen=True)
class SmdReport:
    smd_a: float
    smd_b: float
    deviation: float
    invariant: bool
    tolerance: float

    @classmethod
    def from_pair(cls, smd_a: float, smd_b: float, tolerance: float) -> "SmdReport":
        if not (math.isfinite(smd_a) and math.isfinite(smd_b)):
            raise DomainError("SMD values must be finite")
        deviation = abs(smd_b - smd_a)
        return cls(smd_a, smd_b, deviation, deviation <= tolerance, tolerance)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def delta(rho: float) -> DeltaTerm:
    """Reliability term ``(1 - rho) / rho``."""
    if not rho > 0:
        raise DomainError("reliability must be positive for δ")
    if rho > 1:
        raise DomainError(f"reliability must not exceed 1, got {rho}")
    return DeltaTerm((1.0 - rho) / rho)


def pooled_sd(var1: float, n1: int, var2: float, n2: int) -> float:
    """N-weighted pooled SD, ``sqrt((n1*var1 + n2*var2) / (n1 + n2))``."""
    if n1 < 1 or n2 < 1:
        raise DomainError("group sizes must be positive")
    if var1 < 0 or var2 < 0:
        raise DomainError("variances must be nonnegative")
    return math.sqrt((n1 * var1 + n2 * var2) / (n1 + n2))


def _rho_pair(rho) -> tuple[float | None, float | None]:
    if rho is None:
        return None, None
    if isinstance(rho, (tuple, list)):
        r1, r2 = rho
        return r1, r2
    return rho, rho


def smd(p1: Population, p2: Population, rho=None) -> float:
    """Population SMD of ``p1`` versus ``p2``.

    Parameters
    ----------
    p1, p2 : Population
        True-score populations.
    rho : float or (float, float), optional
        Reliability of the measure. Each group's true-score variance is
        inflated by ``1 + delta(rho)`` before pooling; a pair gives each
        population its own reliability. Omitted means the true-score SMD.

    Returns
    -------
    float
        ``(mean1 - mean2) / pooled_sd``.
    """
    r1, r2 = _rho_pair(rho)
    var1 = p1.variance * (1.0 if r1 is None else delta(r1).inflation)
    var2 = p2.variance * (1.0 if r2 is None else delta(r2).inflation)
    sd = pooled_sd(var1, len(p1), var2, len(p2))
    if sd == 0:
        raise DomainError("SMD undefined for constant scores")
    return (p1.mean - p2.mean) / sd


def smd_invariance(
    p1: Population,
    p2: Population,
    g: GroupElement,
    tolerance: float = DEFAULT_TOLERANCE,
    g2: GroupElement | None = None,
    rho=None,
) -> SmdReport:
    """Compare the SMD before and after linking both populations to a new measure.

    ``g`` transforms both populations. Passing ``g2`` transforms ``p2`` with a
    different element instead, which breaks the symmetry.
    """
    before = smd(p1, p2, rho)
    after = smd(p1.transformed(g), p2.transformed(g if g2 is None else g2), rho)
    return SmdReport.from_pair(before, after, tolerance)


def attenuate(smd_true: float, rho: float) -> float:
    """Observed-score SMD implied by a true-score SMD at reliability ``rho``."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"reliability must lie in [0, 1], got {rho}")
    return math.sqrt(rho) * smd_true

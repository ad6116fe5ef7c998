"""The two-parameter affine matrix Lie group linking two measures.

An element is the 3x3 homogeneous matrix::

    [[gamma, 0,     omega],
     [0,     gamma, 0    ],
     [0,     0,     1    ]]

acting on measurement vectors ``(tau, sigma_e, 1)``. Elements are stored as
their two scalar parameters; :meth:`GroupElement.as_matrix` materializes the
3x3 form on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "GroupElement",
    "Generator",
    "MeasurementVector",
    "IDENTITY",
    "make_group",
    "apply",
    "compose",
    "inverse",
    "log_map",
    "exp_map",
    "bracket",
    "translation_factor",
]

# Below this distance from gamma == 1 (equivalently |ln gamma| below it) the
# analytic limit replaces omega * ln(gamma) / (gamma - 1).
LIMIT_THRESHOLD = 1e-12


@dataclass(frozen=True)
class GroupElement:
    """Element of the affine group, parameterized by scale and translation."""

    gamma: float
    omega: float = 0.0

    def __post_init__(self):
        gamma = float(self.gamma)
        if not gamma > 0 or not math.isfinite(gamma):
            raise DomainError("scale must be positive")
        if not math.isfinite(float(self.omega)):
            raise DomainError("translation must be finite")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "omega", float(self.omega))

    def as_matrix(self) -> np.ndarray:
        return np.array(
            [[self.gamma, 0.0, self.omega], [0.0, self.gamma, 0.0], [0.0, 0.0, 1.0]]
        )

    @property
    def determinant(self) -> float:
        return self.gamma * self.gamma

    @classmethod
    def from_matrix(cls, m, atol: float = 1e-12) -> "GroupElement":
        """Recover an element from its 3x3 matrix, checking the group shape."""
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise DomainError(f"expected a 3x3 matrix, got shape {m.shape}")
        template = cls(m[0, 0], m[0, 2]).as_matrix()
        if not np.allclose(m, template, rtol=0.0, atol=atol):
            raise DomainError("matrix is not an element of the affine scaling group")
        return cls(m[0, 0], m[0, 2])


IDENTITY = GroupElement(1.0, 0.0)


@dataclass(frozen=True)
class Generator:
    """Lie algebra element ``[[a, 0, c], [0, a, 0], [0, 0, 0]]``.

    ``a`` is the common diagonal rate (``ln gamma``) and ``c`` the
    translation rate.
    """

    a: float
    c: float = 0.0

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.a, 0.0, self.c], [0.0, self.a, 0.0], [0.0, 0.0, 0.0]])

    def diagonal_part(self) -> np.ndarray:
        return np.diag([self.a, self.a, 0.0])

    def translation_part(self) -> np.ndarray:
        m = np.zeros((3, 3))
        m[0, 2] = self.c
        return m

    @property
    def gamma(self) -> float:
        return math.exp(self.a)


@dataclass(frozen=True)
class MeasurementVector:
    """Homogeneous measurement vector ``(tau, sigma_e, 1)``."""

    tau: float
    sigma_e: float = 0.0

    def __post_init__(self):
        if not float(self.sigma_e) >= 0:
            raise DomainError("error SD must be nonnegative")
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "sigma_e", float(self.sigma_e))

    @property
    def anchor(self) -> float:
        # fixed homogeneous coordinate; no group action can change it
        return 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.tau, self.sigma_e, 1.0])


def make_group(gamma: float, omega: float = 0.0) -> GroupElement:
    """Build a group element; raises :class:`DomainError` unless ``gamma > 0``."""
    return GroupElement(gamma, omega)


def apply(g: GroupElement, v: MeasurementVector) -> MeasurementVector:
    """Act on a measurement vector: ``(gamma*tau + omega, gamma*sigma_e, 1)``."""
    return MeasurementVector(g.gamma * v.tau + g.omega, g.gamma * v.sigma_e)


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """Return the element whose matrix is ``g1 @ g2`` (apply ``g2`` first)."""
    return GroupElement(g1.gamma * g2.gamma, g1.gamma * g2.omega + g1.omega)


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(1.0 / g.gamma, -g.omega / g.gamma)


def _log_ratio(gamma: float) -> float:
    """``ln(gamma) / (gamma - 1)``, continuous through ``gamma == 1``."""
    d = gamma - 1.0
    if abs(d) < LIMIT_THRESHOLD:
        return 1.0
    return math.log1p(d) / d


def translation_factor(a: float, t: float) -> float:
    """``(exp(a*t) - 1) / a``, with the limit ``t`` as ``a -> 0``.

    Multiplied by the translation rate ``c`` this is the translation entry of
    ``exp(t*g)``; with ``a = ln gamma`` and ``c`` from :func:`log_map` it
    equals ``omega * (gamma**t - 1) / (gamma - 1)``.
    """
    if abs(a) < LIMIT_THRESHOLD:
        return t
    return math.expm1(a * t) / a


def log_map(g: GroupElement) -> Generator:
    """Infinitesimal generator of ``g``.

    ``a = ln(gamma)`` and ``c = omega * ln(gamma) / (gamma - 1)``; at
    ``gamma == 1`` the limit ``c = omega`` is used.
    """
    return Generator(math.log(g.gamma), g.omega * _log_ratio(g.gamma))


def exp_map(gen: Generator, t: float = 1.0) -> GroupElement:
    """Point ``X(t) = exp(t * gen)`` on the one-parameter subgroup.

    ``t`` is the flow parameter; ``t = 0`` gives the identity and ``t = 1``
    the element ``gen`` was derived from. Values outside ``[0, 1]`` are
    accepted (the subgroup is defined for all real ``t``).
    """
    scale = math.exp(gen.a * t)
    return GroupElement(scale, gen.c * translation_factor(gen.a, t))


def bracket(x, y) -> np.ndarray:
    """Matrix commutator ``x @ y - y @ x``.

    Accepts :class:`Generator` instances or 3x3 arrays. For the diagonal part
    ``D`` and translation part ``T`` of a generator the result is
    ``a * T`` (``a = ln gamma``), not ``T``.
    """
    x = x.as_matrix() if isinstance(x, Generator) else np.asarray(x, dtype=float)
    y = y.as_matrix() if isinstance(y, Generator) else np.asarray(y, dtype=float)
    if x.shape != (3, 3) or y.shape != (3, 3):
        raise DomainError("bracket expects 3x3 matrices")
    return x @ y - y @ x

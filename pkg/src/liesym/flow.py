"""Transformation flows generated by the Lie algebra, and broken variants.

A symmetric flow moves two population summaries from measure A (``t = 0``) to
measure B (``t = 1``) along the one-parameter subgroup: both means obey
``dmu/dt = ln(gamma)*mu + c`` and every SD obeys ``dsigma/dt = ln(gamma)*sigma``.
A broken flow replaces one or more of those right-hand sides with an entry
from a small rate catalog. The SMD along the flow is constant exactly when
the mean difference and the pooled SD grow at the common rate ``ln(gamma)``.

Error spread is integrated as an SD, not a variance; squared quantities are
derived when the pooled variance is formed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, FlowError, UsageError
from .lie_core import Generator, GroupElement, log_map, translation_factor

__all__ = [
    "RateFn",
    "constant_rate",
    "linear_drift",
    "power_rate",
    "parse_rate",
    "FlowState",
    "STANDARD_STATE",
    "FlowSpec",
    "FlowTrace",
    "rk4",
    "closed_form_state",
    "integrate_measurement",
    "integrate",
    "state_at",
    "smd_derivative_check",
    "verify_invariance_conditions",
    "MIN_STEPS",
]

MIN_STEPS = 10
CONDITION_TOL = 1e-9


@dataclass(frozen=True)
class RateFn:
    """One right-hand side from the rate catalog.

    ``constant``: ``alpha*x`` (plus the generator's translation rate when it
    drives a mean). ``linear``: ``ln(gamma)*x + beta``. ``power``:
    ``alpha * x**p``.
    """

    form: str
    alpha: float = 0.0
    beta: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if self.form not in ("constant", "linear", "power"):
            raise UsageError(f"unknown rate form {self.form!r}")

    def __call__(self, x: float, t: float, log_gamma: float, translation: float = 0.0) -> float:
        if self.form == "constant":
            return self.alpha * x + translation
        if self.form == "linear":
            return log_gamma * x + self.beta
        return self.alpha * x**self.p

    def describe(self) -> str:
        if self.form == "constant":
            return f"constant:{self.alpha!r}"
        if self.form == "linear":
            return f"linear:{self.beta!r}"
        return f"power:{self.alpha!r},{self.p!r}"


def constant_rate(alpha: float) -> RateFn:
    return RateFn("constant", alpha=alpha)


def linear_drift(beta: float) -> RateFn:
    return RateFn("linear", beta=beta)


def power_rate(alpha: float, p: float) -> RateFn:
    return RateFn("power", alpha=alpha, p=p)


def parse_rate(text: str) -> RateFn:
    """Parse ``constant:A``, ``linear:B`` or ``power:A,P``."""
    name, sep, args = text.partition(":")
    name = name.strip().lower()
    try:
        values = [float(v) for v in args.split(",")] if sep else []
    except ValueError:
        raise UsageError(f"bad rate arguments in {text!r}") from None
    arity = {"constant": 1, "linear": 1, "power": 2}
    if name not in arity:
        raise UsageError(f"unknown rate form {name!r}; expected constant, linear or power")
    if len(values) != arity[name]:
        raise UsageError(f"rate {name!r} takes {arity[name]} argument(s), got {text!r}")
    if name == "constant":
        return constant_rate(values[0])
    if name == "linear":
        return linear_drift(values[0])
    return power_rate(*values)


@dataclass(frozen=True)
class FlowState:
    """Scalar summaries of two populations on one measure."""

    mu1: float
    mu2: float
    tau_sd1: float
    tau_sd2: float
    error_sd1: float = 0.0
    error_sd2: float = 0.0
    n1: int = 1
    n2: int = 1

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError("population sizes must be positive")
        if min(self.tau_sd1, self.tau_sd2, self.error_sd1, self.error_sd2) < 0:
            raise DomainError("SDs must be nonnegative")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.mu1, self.mu2, self.tau_sd1, self.tau_sd2, self.error_sd1, self.error_sd2]
        )

    def pooled_variance(self) -> float:
        return _pooled_variance(self.as_vector(), self.n1, self.n2)


STANDARD_STATE = FlowState(
    mu1=55.0, mu2=50.0, tau_sd1=10.0, tau_sd2=10.0, error_sd1=5.0, error_sd2=5.0, n1=1000, n2=1000
)


@dataclass(frozen=True)
class FlowSpec:
    """Flow from measure A to measure B for a pair of populations.

    ``f1``/``f2`` override the mean rates of P1/P2 and ``g1``/``g2`` the
    error-SD rates. A symmetric spec has none; a broken spec has at least one.
    """

    kind: str
    gamma: float
    omega: float = 0.0
    f1: Optional[RateFn] = None
    f2: Optional[RateFn] = None
    g1: Optional[RateFn] = None
    g2: Optional[RateFn] = None

    def __post_init__(self):
        GroupElement(self.gamma, self.omega)  # validates gamma > 0
        overrides = self.overrides()
        if self.kind == "symmetric" and overrides:
            raise UsageError("a symmetric flow takes no rate overrides")
        if self.kind == "broken" and not overrides:
            raise UsageError("a broken flow needs at least one rate override")
        if self.kind not in ("symmetric", "broken"):
            raise UsageError(f"unknown flow kind {self.kind!r}")

    @classmethod
    def symmetric(cls, gamma: float, omega: float = 0.0) -> "FlowSpec":
        return cls("symmetric", gamma, omega)

    @classmethod
    def broken(cls, gamma: float, omega: float = 0.0, **overrides) -> "FlowSpec":
        return cls("broken", gamma, omega, **overrides)

    def overrides(self) -> dict:
        return {
            k: v
            for k, v in (("f1", self.f1), ("f2", self.f2), ("g1", self.g1), ("g2", self.g2))
            if v is not None
        }

    @property
    def generator(self) -> Generator:
        return log_map(GroupElement(self.gamma, self.omega))

    def rhs(self) -> Callable[[float, np.ndarray], np.ndarray]:
        gen = self.generator
        a, c = gen.a, gen.c
        f1, f2, g1, g2 = self.f1, self.f2, self.g1, self.g2

        def mean_rate(fn, x, t):
            return a * x + c if fn is None else fn(x, t, a, c)

        def sd_rate(fn, x, t):
            return a * x if fn is None else fn(x, t, a)

        def deriv(t, y):
            mu1, mu2, ts1, ts2, es1, es2 = y
            return np.array(
                [
                    mean_rate(f1, mu1, t),
                    mean_rate(f2, mu2, t),
                    a * ts1,
                    a * ts2,
                    sd_rate(g1, es1, t),
                    sd_rate(g2, es2, t),
                ]
            )

        return deriv


def _pooled_variance(y, n1: int, n2: int) -> float:
    # per-group sigma^2(tau) * (1 + delta) == sigma^2(tau) + sigma^2(E)
    v1 = y[2] ** 2 + y[4] ** 2
    v2 = y[3] ** 2 + y[5] ** 2
    return (n1 * v1 + n2 * v2) / (n1 + n2)


@dataclass(frozen=True, eq=False)
class FlowTrace:
    times: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    sigma_pooled: np.ndarray
    smd: np.ndarray
    states: np.ndarray = field(repr=False, default=None)

    @property
    def max_smd_drift(self) -> float:
        return float(np.max(np.abs(self.smd - self.smd[0])))

    def final_state(self, template: FlowState) -> FlowState:
        y = self.states[-1]
        return FlowState(*map(float, y[:2]), *map(abs, map(float, y[2:])), n1=template.n1, n2=template.n2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "mu1", "mu2", "sigma_pooled", "smd"])
            for row in zip(self.times, self.mu1, self.mu2, self.sigma_pooled, self.smd):
                writer.writerow([repr(float(v)) for v in row])


def rk4(rhs, y0, t0: float, t1: float, steps: int, callback=None) -> np.ndarray:
    """Classical fixed-step fourth-order Runge-Kutta.

    Returns the array of states on the uniform grid, shape ``(steps+1, dim)``.
    ``callback(t, y)`` runs after every step and may raise to abort.
    """
    if steps < 1:
        raise UsageError("steps must be positive")
    y = np.array(y0, dtype=float)
    out = np.empty((steps + 1, y.size))
    out[0] = y
    h = (t1 - t0) / steps
    for i in range(steps):
        t = t0 + i * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
        if callback is not None:
            callback(t0 + (i + 1) * h, y)
    return out


def closed_form_state(gen: Generator, tau0: float, sigma0: float, t: float) -> tuple[float, float]:
    """Exact solution of the generator's ODEs from ``(tau0, sigma0)`` at ``t``."""
    scale = math.exp(gen.a * t)
    return scale * tau0 + gen.c * translation_factor(gen.a, t), scale * sigma0


def integrate_measurement(
    gen: Generator, tau0: float, sigma0: float, steps: int, t_end: float = 1.0
) -> tuple[float, float]:
    """RK4 solution of the single-person ODEs, for checking against the closed form."""
    a, c = gen.a, gen.c

    def deriv(t, y):
        return np.array([a * y[0] + c, a * y[1]])

    y = rk4(deriv, [tau0, sigma0], 0.0, t_end, steps)[-1]
    return float(y[0]), float(y[1])


def _collapse_guard(n1: int, n2: int):
    def check(t, y):
        if not np.all(np.isfinite(y)):
            raise FlowError(f"variance collapse at t = {t:.6g} (non-finite state)")
        if not _pooled_variance(y, n1, n2) > 0:
            raise FlowError(f"variance collapse at t = {t:.6g}")

    return check


def integrate(spec: FlowSpec, initial: FlowState, steps: int = 1000) -> FlowTrace:
    """Integrate a flow over ``t in [0, 1]`` and record SMD(t) on the grid.

    Raises
    ------
    UsageError
        If ``steps`` is below :data:`MIN_STEPS`.
    FlowError
        If the pooled variance becomes non-positive or the state diverges.
    """
    if steps < MIN_STEPS:
        raise UsageError(f"steps must be at least {MIN_STEPS}, got {steps}")
    guard = _collapse_guard(initial.n1, initial.n2)
    guard(0.0, initial.as_vector())
    with np.errstate(all="ignore"):
        states = rk4(spec.rhs(), initial.as_vector(), 0.0, 1.0, steps, callback=guard)
    times = np.arange(steps + 1) / steps
    pooled = np.sqrt(_pooled_variance(states.T, initial.n1, initial.n2))
    mu1, mu2 = states[:, 0], states[:, 1]
    return FlowTrace(times, mu1, mu2, pooled, (mu1 - mu2) / pooled, states)


def state_at(spec: FlowSpec, initial: FlowState, t: float, steps: int = 1000) -> np.ndarray:
    """State vector at ``t`` by RK4 from ``t = 0``."""
    if t == 0:
        return initial.as_vector()
    n = max(MIN_STEPS, math.ceil(steps * abs(t)))
    with np.errstate(all="ignore"):
        return rk4(spec.rhs(), initial.as_vector(), 0.0, t, n, callback=_collapse_guard(initial.n1, initial.n2))[-1]


def smd_derivative_check(trace: FlowTrace) -> float:
    """Largest central-difference estimate of dSMD/dt over interior grid points."""
    if trace.times.size < 3:
        raise UsageError("trace needs at least 3 points")
    d = (trace.smd[2:] - trace.smd[:-2]) / (trace.times[2:] - trace.times[:-2])
    return float(np.max(np.abs(d)))


def _close(lhs: float, rhs: float, scale: float) -> bool:
    return abs(lhs - rhs) <= CONDITION_TOL * max(1.0, scale)


def verify_invariance_conditions(
    spec: FlowSpec, initial: FlowState, t_probe: float, steps: int = 1000
) -> bool:
    """Check, at ``t_probe``, the two rate conditions under which SMD(t) stays flat.

    1. ``f1 - f2 == ln(gamma) * (mu1 - mu2)``
    2. ``d/dt sqrt(pooled variance) == ln(gamma) * sqrt(pooled variance)``

    Both are compared within a relative tolerance of 1e-9.
    """
    y = state_at(spec, initial, t_probe, steps)
    dy = spec.rhs()(t_probe, y)
    a = spec.generator.a

    mean_lhs = dy[0] - dy[1]
    mean_rhs = a * (y[0] - y[1])
    means_ok = _close(mean_lhs, mean_rhs, max(abs(dy[0]), abs(dy[1]), abs(mean_rhs)))

    n1, n2 = initial.n1, initial.n2
    pooled = _pooled_variance(y, n1, n2)
    dpooled = (n1 * (2 * y[2] * dy[2] + 2 * y[4] * dy[4]) + n2 * (2 * y[3] * dy[3] + 2 * y[5] * dy[5])) / (n1 + n2)
    sd = math.sqrt(pooled)
    sd_lhs = dpooled / (2 * sd)
    sd_rhs = a * sd
    spread_ok = _close(sd_lhs, sd_rhs, max(abs(sd_lhs), abs(sd_rhs)))
    return bool(means_ok and spread_ok)

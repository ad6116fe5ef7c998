"""Cross-module property suite behind ``liesym verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .effect_size import attenuate, smd, smd_invariance
from .flow import FlowSpec, FlowState, integrate, smd_derivative_check
from .lie_core import GroupElement
from .measurement import (
    MeasureModel,
    Population,
    child_rng,
    ias,
    normal_population,
    observe,
    reliability,
    sed,
    transform_measure,
    z_standardize,
)

REFERENCE_N = 100_000
# stream purpose reserved for the suite's own random parameters
SUITE_STREAM = 7


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.measured < self.tolerance)


def mc_scale(n: int) -> float:
    """Monte Carlo tolerances widen by ``sqrt(REFERENCE_N / n)`` below the reference size."""
    return max(1.0, math.sqrt(REFERENCE_N / n))


def run_checks(n: int = REFERENCE_N, seed: int = 0) -> list[Check]:
    scale = mc_scale(n)
    rng = child_rng(seed, SUITE_STREAM)
    g = GroupElement(1.7, -4.0)

    pop = normal_population(n, 50.0, 10.0, seed, index=0, label="P")
    model_a = MeasureModel(pop, error_sd=5.0, seed=seed)
    model_b = transform_measure(model_a, g)
    rho = reliability(model_a)
    y_a, y_b = observe(model_a), observe(model_b)

    checks = [
        Check("reliability invariance |rho_B - rho_A|", abs(reliability(model_b) - rho), 1e-12),
        Check("cross-measure |Corr(Y_A, Y_B) - rho|", abs(float(np.corrcoef(y_a, y_b)[0, 1]) - rho), 0.01 * scale),
    ]
    ratio = sed(z_standardize(y_a), z_standardize(y_b)) / ias(rho)
    checks.append(Check("SED/IAS relative error vs sqrt(2)", abs(ratio / math.sqrt(2) - 1), 0.02 * scale))

    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(2, 60))
        p1 = Population(rng.normal(rng.uniform(-50, 50), rng.uniform(0.5, 20), m))
        p2 = Population(rng.normal(rng.uniform(-50, 50), rng.uniform(0.5, 20), int(rng.integers(2, 60))))
        elem = GroupElement(math.exp(rng.uniform(math.log(0.01), math.log(100))), rng.uniform(-100, 100))
        worst = max(worst, smd_invariance(p1, p2, elem).deviation)
    checks.append(Check("forward SMD invariance max deviation", worst, 1e-10))

    # observed SMD against sqrt(rho) * true SMD; both groups share true SD
    t1 = normal_population(n, 55.0, 10.0, seed, index=1)
    t2 = normal_population(n, 50.0, 10.0, seed, index=2)
    true_smd = smd(t1, t2)
    worst_att = 0.0
    for i, target_rho in enumerate((0.36, 0.64, 0.81)):
        err_sd = 10.0 * math.sqrt((1 - target_rho) / target_rho)
        o1 = observe(MeasureModel(t1, err_sd, seed, measure=10 + 2 * i))
        o2 = observe(MeasureModel(t2, err_sd, seed, measure=11 + 2 * i))
        worst_att = max(worst_att, abs(smd(Population(o1), Population(o2)) - attenuate(true_smd, target_rho)))
    checks.append(Check("attenuation |SMD_obs - sqrt(rho) SMD_true|", worst_att, 0.02 * scale))

    state = FlowState(55.0, 50.0, 10.0, 12.0, 5.0, 4.0, n1=n, n2=n)
    trace = integrate(FlowSpec.symmetric(2.0, 3.0), state)
    checks.append(Check("symmetric flow max SMD drift", trace.max_smd_drift, 1e-9))
    checks.append(Check("symmetric flow |dSMD/dt| (central difference)", smd_derivative_check(trace), 1e-6))
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'measured':>12}  {'tolerance':>10}  result"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.measured:>12.3e}  {c.tolerance:>10.1e}  {'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines)

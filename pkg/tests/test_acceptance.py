"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line with the measured value and its tolerance;
the lines are printed in the terminal summary (see conftest.py).
"""

import math
import time
import xml.etree.ElementTree as ET
from dataclasses import replace

import numpy as np

from liesym.cli import main
from liesym.effect_size import attenuate, smd, smd_invariance
from liesym.flow import (
    STANDARD_STATE,
    FlowSpec,
    FlowState,
    closed_form_state,
    constant_rate,
    integrate,
    integrate_measurement,
    linear_drift,
    power_rate,
    smd_derivative_check,
)
from liesym.lie_core import GroupElement, bracket, exp_map, log_map
from liesym.measurement import (
    MeasureModel,
    Population,
    ias,
    normal_population,
    observe,
    reliability,
    sed,
    transform_measure,
    z_standardize,
)
from liesym.simulate import SweepConfig, generate_populations, run_sweep

from oracles import series_expm

RESULTS = []
SYMMETRIC_DRIFT_CEILING = 1e-9


def record(criterion, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, detail


def random_element(rng):
    return GroupElement(math.exp(rng.uniform(math.log(0.01), math.log(100))), rng.uniform(-100, 100))


def random_population(rng):
    n = int(rng.integers(2, 200))
    return Population(rng.normal(rng.uniform(-100, 100), rng.uniform(0.1, 30), n))


def test_c01_forward_smd_invariance():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        p1, p2 = random_population(rng), random_population(rng)
        worst = max(worst, smd_invariance(p1, p2, random_element(rng)).deviation)
    elapsed = time.perf_counter() - start
    record(
        "C1 forward SMD invariance",
        worst < 1e-10 and elapsed < 5,
        f"max |SMD_B - SMD_A| = {worst:.2e} (< 1e-10), {elapsed:.2f}s (< 5s)",
    )


def test_c02_reverse_implication():
    start = time.perf_counter()
    threshold = 1e3 * SYMMETRIC_DRIFT_CEILING
    ln2 = math.log(2.0)
    catalog = [
        FlowSpec.broken(2.0, f2=constant_rate(0.5)),
        FlowSpec.broken(2.0, f2=linear_drift(0.3)),
        FlowSpec.broken(2.0, f2=power_rate(ln2, 1.05)),
        FlowSpec.broken(2.0, g1=constant_rate(2 * ln2)),
        FlowSpec.broken(2.0, g1=linear_drift(0.3)),
        FlowSpec.broken(2.0, g1=power_rate(ln2, 1.05)),
    ]
    flow_min = min(integrate(spec, STANDARD_STATE, 1000).max_smd_drift for spec in catalog)

    config = SweepConfig()
    p1, p2 = generate_populations(config)
    result = run_sweep(config, populations=(p1, p2))
    link_devs = [r.deviation for r in result.rows if r.k != 1.0]
    # a scale that differs between populations is also a broken linkage
    mixed = smd_invariance(p1, p2, GroupElement(1.125), g2=GroupElement(1.2)).deviation
    elapsed = time.perf_counter() - start
    ok = flow_min > threshold and min(link_devs) > threshold and mixed > threshold and elapsed < 10
    record(
        "C2 reverse implication",
        ok,
        f"min flow drift = {flow_min:.2e}, min k-link deviation = {min(link_devs):.2e}, "
        f"unequal-gamma deviation = {mixed:.2e} (all > {threshold:.0e}), {elapsed:.2f}s (< 10s)",
    )


def test_c03_exponential_map():
    rng = np.random.default_rng(303)
    series_err = roundtrip_err = subgroup_err = 0.0
    for _ in range(1000):
        g = random_element(rng)
        gen = log_map(g)
        t = rng.uniform(0, 1)
        series_err = max(series_err, np.max(np.abs(exp_map(gen, t).as_matrix() - series_expm(t * gen.as_matrix()))))
        roundtrip_err = max(roundtrip_err, np.max(np.abs(exp_map(gen, 1.0).as_matrix() - g.as_matrix())))
        s = rng.uniform(0, 1)
        u = rng.uniform(0, 1 - s)
        prod = exp_map(gen, s).as_matrix() @ exp_map(gen, u).as_matrix()
        subgroup_err = max(subgroup_err, np.max(np.abs(prod - exp_map(gen, s + u).as_matrix())))
    record(
        "C3 exponential map",
        series_err < 1e-10 and roundtrip_err < 1e-12 and subgroup_err < 1e-10,
        f"closed vs 30-term series = {series_err:.2e} (< 1e-10), exp(log) round trip = {roundtrip_err:.2e} (< 1e-12), "
        f"X(s)X(t) - X(s+t) = {subgroup_err:.2e} (< 1e-10)",
    )


def test_c04_ode_consistency():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(100):
        gen = log_map(GroupElement(rng.uniform(0.5, 4), rng.uniform(-10, 10)))
        tau0, sigma0 = rng.uniform(-100, 100), rng.uniform(0.1, 20)
        exact = closed_form_state(gen, tau0, sigma0, 1.0)
        approx = integrate_measurement(gen, tau0, sigma0, steps=1000)
        worst = max(worst, *(abs(a - e) / abs(e) for a, e in zip(approx, exact)))

    gen = log_map(GroupElement(4.0, 3.0))
    exact = closed_form_state(gen, 10.0, 2.0, 1.0)[0]
    steps = np.array([10, 20, 40, 80, 160])
    errors = [abs(integrate_measurement(gen, 10.0, 2.0, int(n))[0] - exact) for n in steps]
    order = -np.polyfit(np.log(steps), np.log(errors), 1)[0]
    record(
        "C4 ODE consistency",
        worst < 1e-8 and 3.5 <= order <= 4.5,
        f"max relative RK4 error at t=1 = {worst:.2e} (< 1e-8), convergence order = {order:.3f} (in [3.5, 4.5])",
    )


def test_c05_dynamic_invariance():
    rng = np.random.default_rng(505)
    drift = deriv = 0.0
    for _ in range(100):
        spec = FlowSpec.symmetric(rng.uniform(0.5, 4), rng.uniform(-10, 10))
        state = FlowState(
            rng.uniform(-50, 50), rng.uniform(-50, 50),
            rng.uniform(0.5, 20), rng.uniform(0.5, 20),
            rng.uniform(0, 10), rng.uniform(0, 10),
            int(rng.integers(1, 10_000)), int(rng.integers(1, 10_000)),
        )
        trace = integrate(spec, state, 1000)
        drift = max(drift, trace.max_smd_drift)
        deriv = max(deriv, smd_derivative_check(trace))
    record(
        "C5 dynamic invariance",
        drift < SYMMETRIC_DRIFT_CEILING and deriv < 1e-6,
        f"max SMD drift = {drift:.2e} (< 1e-9), max |dSMD/dt| = {deriv:.2e} (< 1e-6)",
    )


def test_c06_ctt_symmetries():
    start = time.perf_counter()
    rel_gap = corr_gap = sed_gap = 0.0
    for seed in range(20):
        pop = normal_population(100_000, 50.0, 10.0, seed)
        ma = MeasureModel(pop, error_sd=5.0, seed=seed)
        mb = transform_measure(ma, GroupElement(1.125 + 0.1 * seed, seed - 10.0))
        rho = reliability(ma)
        rel_gap = max(rel_gap, abs(reliability(mb) - rho))
        ya, yb = observe(ma), observe(mb)
        corr_gap = max(corr_gap, abs(np.corrcoef(ya, yb)[0, 1] - rho))
        ratio = sed(z_standardize(ya), z_standardize(yb)) / ias(rho)
        sed_gap = max(sed_gap, abs(ratio - math.sqrt(2)) / math.sqrt(2))
    elapsed = time.perf_counter() - start
    record(
        "C6 CTT symmetries",
        rel_gap < 1e-12 and corr_gap < 0.01 and sed_gap < 0.02 and elapsed < 30,
        f"|rho_B - rho_A| = {rel_gap:.2e} (< 1e-12), |Corr - rho| = {corr_gap:.2e} (< 0.01), "
        f"|SED/IAS - sqrt2|/sqrt2 = {sed_gap:.2e} (< 0.02), {elapsed:.2f}s (< 30s)",
    )


def test_c07_attenuation():
    start = time.perf_counter()
    t1 = normal_population(100_000, 58.0, 10.0, seed=7, index=0)
    t2 = normal_population(100_000, 50.0, 10.0, seed=7, index=1)
    true_smd = smd(t1, t2)
    worst = 0.0
    for i, rho in enumerate((0.36, 0.64, 0.81)):
        err_sd = 10.0 * math.sqrt((1 - rho) / rho)
        o1 = observe(MeasureModel(t1, err_sd, seed=7, measure=2 * i))
        o2 = observe(MeasureModel(t2, err_sd, seed=7, measure=2 * i + 1))
        worst = max(worst, abs(smd(Population(o1), Population(o2)) - attenuate(true_smd, rho)))
    elapsed = time.perf_counter() - start
    record(
        "C7 attenuation",
        worst < 0.02 and elapsed < 10,
        f"max |SMD_obs - sqrt(rho) SMD_true| = {worst:.2e} (< 0.02), {elapsed:.2f}s (< 10s)",
    )


def test_c08_figure_reproduction(tmp_path, capsys):
    start = time.perf_counter()
    anchor = 0.0
    monotone = True
    for seed in range(10):
        result = run_sweep(replace(SweepConfig(), seed=seed))
        anchor = max(anchor, result.rows[0].deviation)
        monotone &= bool(np.all(np.diff(result.deviations) > 0))
    code = main(["sweep", "--plot", "--out-dir", str(tmp_path)])
    capsys.readouterr()
    csv_rows = (tmp_path / "sweep.csv").read_text().splitlines()
    svg = ET.parse(tmp_path / "sweep.svg").getroot()
    emitted = code == 0 and len(csv_rows) == 22 and len(svg.findall(".//{http://www.w3.org/2000/svg}polyline")) == 2
    desk_elapsed = time.perf_counter() - start

    start = time.perf_counter()
    paper = run_sweep(replace(SweepConfig(), n=1_000_000))
    paper_elapsed = time.perf_counter() - start
    paper_ok = paper.rows[0].deviation < 1e-12 and bool(np.all(np.diff(paper.deviations) > 0))
    record(
        "C8 symmetry-breaking sweep",
        anchor < 1e-12 and monotone and emitted and desk_elapsed < 10 and paper_ok and paper_elapsed < 120,
        f"k=1 deviation = {anchor:.2e} (< 1e-12), strictly increasing for 10 seeds = {monotone}, "
        f"CSV+SVG emitted = {emitted}, desk {desk_elapsed:.2f}s (< 10s), "
        f"n=1e6 monotone = {paper_ok} in {paper_elapsed:.2f}s (< 120s)",
    )


def test_c09_lie_bracket():
    exact = True
    for gamma in (math.e, math.e**2, 2.0, 0.5):
        gen = log_map(GroupElement(gamma, 3.0))
        d, t = gen.diagonal_part(), gen.translation_part()
        exact &= bool(np.array_equal(bracket(d, t), gen.a * t))
        exact &= bool(np.array_equal(bracket(d, t), -bracket(t, d)))
    # the printed result [D, T] = T holds only when ln(gamma) = 1
    gen = log_map(GroupElement(2.0, 3.0))
    computed = bracket(gen.diagonal_part(), gen.translation_part())
    differs_from_printed = not np.allclose(computed, gen.translation_part())
    record(
        "C9 Lie bracket",
        exact and differs_from_printed,
        f"[D,T] == ln(gamma) T and antisymmetry exact for gamma in (e, e^2, 2, 0.5) = {exact}; "
        f"computed value used over printed T at gamma=2 = {differs_from_printed}",
    )


def test_c10_determinism(tmp_path, capsys):
    outputs = []
    for d, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        main(["sweep", "--seed", "7", "--threads", threads, "--out-dir", str(tmp_path / d)])
        outputs.append((tmp_path / d / "sweep.csv").read_bytes())
    capsys.readouterr()
    record(
        "C10 determinism",
        outputs[0] == outputs[1] == outputs[2],
        f"sweep CSV byte-identical across 2 runs and 1 vs 4 threads = {outputs[0] == outputs[1] == outputs[2]}",
    )

"""Symmetry-breaking sweep: a power linkage with exponent k in one population.

Two normal true-score populations are linked to a second measure by
``tau_B = gamma * tau_A**k``. P1 always uses ``k = 1`` (a pure rescaling, under
which the SMD is invariant); P2 steps ``k`` over a grid. Each grid point
records how far the measure-B SMD moves from the measure-A baseline. No
measurement error is involved, so every SMD here is a true-score SMD.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from decimal import Decimal

import numpy as np

from . import __version__
from .effect_size import smd
from .errors import DomainError, UsageError
from .measurement import POPULATION_STREAM, Population, child_rng

__all__ = [
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "generate_populations",
    "nonlinear_link",
    "run_sweep",
    "k_grid",
    "PAPER_SCALE_N",
]

log = logging.getLogger(__name__)

PAPER_SCALE_N = 1_000_000


@dataclass(frozen=True)
class SweepConfig:
    n: int = 100_000
    mu1: float = 63.05
    sd1: float = 13.08
    mu2: float = 63.04
    sd2: float = 13.06
    gamma: float = 1.125
    k_start: float = 1.000
    k_end: float = 1.020
    k_step: float = 0.001
    seed: int = 20240

    def problems(self) -> list[str]:
        """Human-readable validation failures, one per offending field."""
        out = []
        if not self.n >= 100:
            out.append(f"n: must be at least 100 (got {self.n})")
        if not self.sd1 > 0:
            out.append(f"sd1: must be positive (got {self.sd1})")
        if not self.sd2 > 0:
            out.append(f"sd2: must be positive (got {self.sd2})")
        if not self.gamma > 0:
            out.append(f"gamma: must be positive (got {self.gamma})")
        if not self.k_step > 0:
            out.append(f"k_step: must be positive (got {self.k_step})")
        if not self.k_start > 0:
            out.append(f"k_start: must be positive (got {self.k_start})")
        if not self.k_start <= self.k_end:
            out.append(f"k_end: must not be below k_start ({self.k_end} < {self.k_start})")
        return out

    def validate(self) -> "SweepConfig":
        problems = self.problems()
        if problems:
            raise UsageError("invalid sweep config: " + "; ".join(problems))
        return self

    @classmethod
    def from_mapping(cls, values: dict) -> "SweepConfig":
        """Build from string or numeric values keyed by field name."""
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        bad = []
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in types:
                bad.append(f"{key}: unknown field")
                continue
            try:
                value = float(raw)
                if types[key] in ("int", int):
                    if not value.is_integer():
                        raise ValueError(raw)
                    value = int(value)
                kwargs[key] = value
            except (TypeError, ValueError, OverflowError):
                bad.append(f"{key}: not a number ({raw!r})")
        if bad:
            raise UsageError("invalid sweep config: " + "; ".join(bad))
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


def k_grid(config: SweepConfig) -> list[float]:
    """Inclusive grid ``k_start + i*k_step``, built by integer indexing in decimal."""
    start, end, step = (Decimal(repr(float(v))) for v in (config.k_start, config.k_end, config.k_step))
    count = int((end - start) / step) + 1
    return [float(start + i * step) for i in range(count)]


def _draw_positive(rng: np.random.Generator, n: int, mean: float, sd: float) -> tuple[np.ndarray, int]:
    x = rng.normal(mean, sd, size=n)
    redrawn = 0
    bad = x <= 0
    while bad.any():
        m = int(bad.sum())
        redrawn += m
        x[bad] = rng.normal(mean, sd, size=m)
        bad = x <= 0
    return x, redrawn


def generate_populations(config: SweepConfig) -> tuple[Population, Population]:
    """Draw P1 and P2 from their own child streams of the master seed.

    Nonpositive draws are rejected and redrawn so the power linkage stays
    defined; the count is logged.
    """
    config.validate()
    out = []
    for index, (mean, sd) in enumerate(((config.mu1, config.sd1), (config.mu2, config.sd2))):
        rng = child_rng(config.seed, POPULATION_STREAM, index)
        scores, redrawn = _draw_positive(rng, config.n, mean, sd)
        if redrawn:
            log.info("P%d: redrew %d nonpositive true scores", index + 1, redrawn)
        out.append(Population(scores, f"P{index + 1}"))
    return out[0], out[1]


def nonlinear_link(p: Population, gamma: float, k: float) -> Population:
    """Map every score to ``gamma * tau**k``."""
    if not gamma > 0:
        raise DomainError("scale must be positive")
    if not k > 0:
        raise DomainError("exponent k must be positive")
    if k == 1.0:
        return p.map(lambda x: gamma * x)
    if np.any(p.scores <= 0):
        raise DomainError("power linkage requires positive scores")
    return p.map(lambda x: gamma * np.power(x, k))


@dataclass(frozen=True)
class SweepRow:
    k: float
    smd_baseline: float
    smd_broken: float
    deviation: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    baseline: float
    metadata: dict = field(default_factory=dict)

    CSV_HEADER = ("k", "smd_baseline", "smd_broken", "deviation")

    @property
    def k(self) -> np.ndarray:
        return np.array([r.k for r in self.rows])

    @property
    def deviations(self) -> np.ndarray:
        return np.array([r.deviation for r in self.rows])

    @property
    def smd_broken(self) -> np.ndarray:
        return np.array([r.smd_broken for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for r in self.rows:
            writer.writerow([repr(r.k), repr(r.smd_baseline), repr(r.smd_broken), repr(r.deviation)])
        return buf.getvalue()

    def to_json(self, include_timing: bool = False) -> str:
        meta = dict(self.metadata)
        if not include_timing:
            meta.pop("elapsed_seconds", None)
        doc = {
            "baseline": self.baseline,
            "rows": [asdict(r) for r in self.rows],
            "metadata": meta,
        }
        return json.dumps(doc, indent=2) + "\n"


def run_sweep(config: SweepConfig, workers: int = 1, populations=None) -> SweepResult:
    """Run the k sweep.

    Parameters
    ----------
    config : SweepConfig
    workers : int
        Threads used to evaluate grid points. Results do not depend on it.
    populations : (Population, Population), optional
        Reuse pre-generated populations instead of drawing from ``config``.
    """
    config.validate()
    started = time.perf_counter()
    p1, p2 = generate_populations(config) if populations is None else populations
    baseline = smd(p1, p2)
    p1_b = nonlinear_link(p1, config.gamma, 1.0)

    def evaluate(k: float) -> SweepRow:
        broken = smd(p1_b, nonlinear_link(p2, config.gamma, k))
        return SweepRow(k, baseline, broken, abs(broken - baseline))

    grid = k_grid(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, grid))
    else:
        rows = [evaluate(k) for k in grid]

    metadata = {
        "config": config.to_dict(),
        "version": __version__,
        "population_moments": {
            "P1": {"n": len(p1), "mean": p1.mean, "sd": p1.sd},
            "P2": {"n": len(p2), "mean": p2.mean, "sd": p2.sd},
        },
        "elapsed_seconds": time.perf_counter() - started,
    }
    return SweepResult(rows, baseline, metadata)


def paper_scale(config: SweepConfig) -> SweepConfig:
    return replace(config, n=PAPER_SCALE_N)

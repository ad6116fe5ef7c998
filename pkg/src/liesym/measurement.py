"""Classical test theory layer: populations, observed-score models, indices.

Randomness follows one seed discipline. A master seed is expanded into child
streams with :class:`numpy.random.SeedSequence` using a ``spawn_key`` of
``(purpose, index)``:

* ``(POPULATION_STREAM, i)`` draws the true scores of population ``i``;
* ``(ERROR_STREAM, m)`` draws the measurement errors of measure ``m``.

A transformed measure keeps the master seed but advances the measure index,
so it shares true scores with its source and gets fresh, independent errors.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, UsageError
from .lie_core import GroupElement

__all__ = [
    "POPULATION_STREAM",
    "ERROR_STREAM",
    "child_rng",
    "Population",
    "MeasureModel",
    "ZScores",
    "reliability",
    "ias",
    "sed",
    "z_standardize",
    "observe",
    "transform_measure",
    "normal_population",
    "write_population_csv",
    "read_population_csv",
    "write_model_sidecar",
    "read_model_sidecar",
]

POPULATION_STREAM = 0
ERROR_STREAM = 1


def child_rng(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one ``(purpose, index)`` slot of ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose), int(index)))
    return np.random.default_rng(ss)


@dataclass(frozen=True, eq=False)
class Population:
    """A finite population of true scores.

    Moments use the population convention (divisor ``N``).
    """

    scores: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.scores, dtype=float)
        if arr.ndim != 1:
            raise UsageError("population scores must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise DomainError("population scores must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    def __len__(self) -> int:
        return self.scores.size

    def _check_size(self):
        if self.scores.size < 2:
            raise UsageError(f"population {self.label!r} needs at least 2 scores")

    @cached_property
    def mean(self) -> float:
        self._check_size()
        return float(np.mean(self.scores))

    @cached_property
    def variance(self) -> float:
        self._check_size()
        return float(np.var(self.scores))

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def map(self, fn, label: str | None = None) -> "Population":
        return Population(fn(self.scores), self.label if label is None else label)

    def transformed(self, g: GroupElement, label: str | None = None) -> "Population":
        return self.map(lambda x: g.gamma * x + g.omega, label)


def normal_population(
    n: int, mean: float, sd: float, seed: int, index: int = 0, label: str = ""
) -> Population:
    """Draw ``n`` normal true scores from stream ``(POPULATION_STREAM, index)``."""
    rng = child_rng(seed, POPULATION_STREAM, index)
    return Population(rng.normal(mean, sd, size=int(n)), label)


@dataclass(frozen=True)
class MeasureModel:
    """Observed-score model ``Y = tau + e`` with ``e ~ normal(0, error_sd)``."""

    population: Population
    error_sd: float = 0.0
    seed: int = 0
    measure: int = 0

    def __post_init__(self):
        if not float(self.error_sd) >= 0:
            raise DomainError("error SD must be nonnegative")
        object.__setattr__(self, "error_sd", float(self.error_sd))

    @property
    def error_variance(self) -> float:
        return self.error_sd**2

    @property
    def observed_variance(self) -> float:
        return self.population.variance + self.error_variance


@dataclass(frozen=True, eq=False)
class ZScores:
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.size


def reliability(m: MeasureModel) -> float:
    """Proportion of observed variance due to true scores."""
    true_var = m.population.variance
    total = true_var + m.error_variance
    if total <= 0:
        raise DomainError("degenerate measure")
    return true_var / total


def ias(rho: float) -> float:
    """Index of approximate symmetry, ``sqrt(1 - rho)``."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"reliability must lie in [0, 1], got {rho}")
    return math.sqrt(1.0 - rho)


def sed(za: ZScores, zb: ZScores) -> float:
    """Root-mean-square distance between two paired z-score lists."""
    a = np.asarray(za.values if isinstance(za, ZScores) else za, dtype=float)
    b = np.asarray(zb.values if isinstance(zb, ZScores) else zb, dtype=float)
    if a.shape != b.shape:
        raise UsageError(f"z-score lists differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise UsageError("need at least 2 paired z-scores")
    return math.sqrt(float(np.mean((a - b) ** 2)))


def z_standardize(scores: Sequence[float]) -> ZScores:
    """Standardize with the realized mean and population SD."""
    x = np.asarray(scores, dtype=float)
    if x.size < 2:
        raise UsageError("need at least 2 scores to standardize")
    centered = x - x.mean()
    sd = math.sqrt(float(np.mean(centered**2)))
    if sd == 0:
        raise DomainError("constant scores")
    return ZScores(centered / sd)


def observe(m: MeasureModel) -> np.ndarray:
    """Observed scores ``tau_i + e_i`` for the model; deterministic per seed."""
    tau = m.population.scores
    if m.error_sd == 0:
        return tau.copy()
    rng = child_rng(m.seed, ERROR_STREAM, m.measure)
    return tau + rng.normal(0.0, m.error_sd, size=tau.size)


def transform_measure(m: MeasureModel, g: GroupElement) -> MeasureModel:
    """Model for the linked measure: true scores ``gamma*tau + omega``, error SD ``gamma*sigma_e``.

    The result keeps ``m.seed`` and takes the next measure index, so its
    error draws are independent of ``m``'s.
    """
    label = f"{m.population.label}'" if m.population.label else ""
    return replace(
        m,
        population=m.population.transformed(g, label),
        error_sd=g.gamma * m.error_sd,
        measure=m.measure + 1,
    )


def write_population_csv(p: Population, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["score"])
        for x in p.scores:
            writer.writerow([repr(float(x))])


def read_population_csv(path, label: str | None = None) -> Population:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["score"]:
            raise UsageError(f"{path}: expected header 'score', got {header}")
        values = [float(row[0]) for row in reader if row]
    return Population(np.array(values), path.stem if label is None else label)


def write_model_sidecar(m: MeasureModel, path) -> None:
    """Key-value sidecar with ``label``, ``error_sd`` and ``seed``."""
    lines = [
        f"label = {m.population.label}",
        f"error_sd = {m.error_sd!r}",
        f"seed = {m.seed}",
        f"measure = {m.measure}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_model_sidecar(path, population: Population) -> MeasureModel:
    meta = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}: malformed line {line!r}")
        meta[key.strip()] = value.strip()
    pop = population
    if meta.get("label"):
        pop = Population(population.scores, meta["label"])
    return MeasureModel(
        pop,
        error_sd=float(meta.get("error_sd", 0.0)),
        seed=int(meta.get("seed", 0)),
        measure=int(meta.get("measure", 0)),
    )

"""Monte Carlo forward passes through random fully connected networks.

Each trial draws an input vector and a fresh weight matrix for every layer,
then applies ``y_m = W_m x_m`` and ``x_{m+1} = g(y_m)``.  Statistics for a
layer are pooled over all node positions and all trials.

Trial ``t`` draws from its own generator seeded by ``SeedSequence(seed,
spawn_key=(t,))``, and per-trial moments are reduced in trial order, so the
report does not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationSpec
from .errors import InsufficientDataError, NumericDomainError

MIN_NORMALITY_SAMPLES = 10_000

INPUT_KINDS = ("normal", "rademacher")


@dataclass(frozen=True)
class WeightDistribution:
    """Zero-mean i.i.d. weights; ``parameter`` is the stddev or the uniform half-width."""

    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise NumericDomainError(f"weight kind must be gaussian or uniform, got {self.kind!r}")
        if not self.parameter > 0:
            raise NumericDomainError(f"weight parameter must be positive, got {self.parameter}")

    @classmethod
    def gaussian(cls, stddev: float) -> WeightDistribution:
        return cls("gaussian", stddev)

    @classmethod
    def uniform(cls, half_width: float) -> WeightDistribution:
        return cls("uniform", half_width)

    @classmethod
    def with_variance(cls, kind: str, variance: float) -> WeightDistribution:
        if not variance > 0:
            raise NumericDomainError(f"weight variance must be positive, got {variance}")
        if kind == "uniform":
            return cls("uniform", math.sqrt(3.0 * variance))
        return cls(kind, math.sqrt(variance))

    def variance(self) -> float:
        if self.kind == "gaussian":
            return self.parameter**2
        return self.parameter**2 / 3.0

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "gaussian":
            return self.parameter * rng.standard_normal(shape)
        return rng.uniform(-self.parameter, self.parameter, shape)


@dataclass(frozen=True)
class SimConfig:
    width: int
    depth: int
    weights: WeightDistribution
    activation: ActivationSpec
    trials: int = 200
    seed: int = 0
    inputs: str = "normal"

    def __post_init__(self):
        if self.width < 1 or self.depth < 1 or self.trials < 1:
            raise NumericDomainError("width, depth and trials must all be >= 1")
        if not 0 <= self.seed < 2**64:
            raise NumericDomainError("seed must be a 64-bit unsigned integer")
        if self.inputs not in INPUT_KINDS:
            raise NumericDomainError(f"inputs must be one of {INPUT_KINDS}, got {self.inputs!r}")


class Moments:
    """Count, mean and central power sums up to order 4, mergeable in any grouping."""

    __slots__ = ("n", "mean", "m2", "m3", "m4")

    def __init__(self, n=0, mean=0.0, m2=0.0, m3=0.0, m4=0.0):
        self.n, self.mean, self.m2, self.m3, self.m4 = n, mean, m2, m3, m4

    @classmethod
    def of(cls, values: np.ndarray) -> Moments:
        n = values.size
        if n == 0:
            return cls()
        with np.errstate(over="ignore", invalid="ignore"):
            mean = values.mean()
            d = values - mean
            d2 = d * d
            return cls(n, mean, d2.sum(), (d2 * d).sum(), (d2 * d2).sum())

    def finite(self) -> bool:
        return bool(np.isfinite([self.mean, self.m2, self.m3, self.m4]).all())

    def merge(self, other: Moments) -> Moments:
        with np.errstate(over="ignore", invalid="ignore"):
            return self._merge(other)

    def _merge(self, other):
        # Pebay's pairwise update; fields are numpy scalars so overflow gives inf
        if other.n == 0:
            return Moments(self.n, self.mean, self.m2, self.m3, self.m4)
        if self.n == 0:
            return Moments(other.n, other.mean, other.m2, other.m3, other.m4)
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        dn = delta / n
        mean = self.mean + nb * dn
        m2 = self.m2 + other.m2 + delta * dn * na * nb
        m3 = (
            self.m3 + other.m3
            + delta * dn * dn * na * nb * (na - nb)
            + 3.0 * dn * (na * other.m2 - nb * self.m2)
        )
        m4 = (
            self.m4 + other.m4
            + delta * dn**3 * na * nb * (na * na - na * nb + nb * nb)
            + 6.0 * dn * dn * (na * na * other.m2 + nb * nb * self.m2)
            + 4.0 * dn * (na * other.m3 - nb * self.m3)
        )
        return Moments(n, mean, m2, m3, m4)

    @property
    def variance(self) -> float:
        return float(self.m2 / self.n) if self.n else math.nan

    @property
    def skewness(self) -> float:
        if not self.n or self.m2 == 0:
            return math.nan
        return float(math.sqrt(self.n) * self.m3 / self.m2**1.5)

    @property
    def excess_kurtosis(self) -> float:
        if not self.n or self.m2 == 0:
            return math.nan
        return float(self.n * self.m4 / self.m2**2 - 3.0)


@dataclass(frozen=True)
class LayerStats:
    layer_index: int
    act_mean: float
    act_variance: float
    preact_mean: float
    preact_variance: float
    preact_skewness: float
    preact_excess_kurtosis: float
    samples: int
    valid: bool = True
    overflow: bool = False

    @property
    def preact_mean_stderr(self) -> float:
        return math.sqrt(self.preact_variance / self.samples) if self.samples else math.nan


@dataclass(frozen=True)
class SimReport:
    per_layer: list[LayerStats]
    trials_used: int
    config: SimConfig | None = field(default=None, compare=False)

    @property
    def overflow_layer(self) -> int | None:
        for row in self.per_layer:
            if row.overflow:
                return row.layer_index
        return None


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _run_trial(config: SimConfig, trial: int):
    """Per-layer (activation moments, pre-activation moments) and first bad layer, if any."""
    rng = trial_rng(config.seed, trial)
    n = config.width
    if config.inputs == "normal":
        x = rng.standard_normal(n)
    else:
        x = rng.choice(np.array([-1.0, 1.0]), size=n)
    acts, preacts = [], []
    g = config.activation.evaluator
    for m in range(1, config.depth + 1):
        act = Moments.of(x)
        if not act.finite():
            return acts, preacts, m
        with np.errstate(over="ignore", invalid="ignore"):
            y = config.weights.sample(rng, (n, n)) @ x
        pre = Moments.of(y)
        if not pre.finite():
            return acts, preacts, m
        acts.append(act)
        preacts.append(pre)
        if m < config.depth:
            with np.errstate(over="ignore", invalid="ignore"):
                x = np.asarray(g(y), dtype=float)
    return acts, preacts, None


def run(config: SimConfig, workers: int = 1) -> SimReport:
    """Simulate ``config.trials`` independent networks and pool per-layer statistics."""
    trials = range(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _run_trial(config, t), trials))
    else:
        results = [_run_trial(config, t) for t in trials]

    depth = config.depth
    bad = min((r[2] for r in results if r[2] is not None), default=None)
    act_tot = [Moments() for _ in range(depth)]
    pre_tot = [Moments() for _ in range(depth)]
    # fixed trial order keeps the floating-point reduction reproducible
    for acts, preacts, _ in results:
        for i in range(len(acts)):
            act_tot[i] = act_tot[i].merge(acts[i])
            pre_tot[i] = pre_tot[i].merge(preacts[i])

    rows = []
    for i in range(depth):
        m = i + 1
        if bad is not None and m >= bad:
            nan = math.nan
            rows.append(LayerStats(m, nan, nan, nan, nan, nan, nan, 0, valid=False, overflow=(m == bad)))
            continue
        a, p = act_tot[i], pre_tot[i]
        rows.append(
            LayerStats(m, float(a.mean), a.variance, float(p.mean), p.variance, p.skewness, p.excess_kurtosis, p.n)
        )
    return SimReport(rows, config.trials, config)


@dataclass(frozen=True)
class NormalityRow:
    layer_index: int
    skewness: float
    excess_kurtosis: float


def normality_diagnostics(report: SimReport, minimum: int = MIN_NORMALITY_SAMPLES) -> list[NormalityRow]:
    """Pooled pre-activation skewness and excess kurtosis for every valid layer."""
    valid = [row for row in report.per_layer if row.valid]
    if not valid:
        raise InsufficientDataError("report has no valid layers", minimum)
    fewest = min(row.samples for row in valid)
    if fewest < minimum:
        raise InsufficientDataError(
            f"higher moments need at least {minimum} samples per layer, got {fewest}", minimum
        )
    return [NormalityRow(r.layer_index, r.preact_skewness, r.preact_excess_kurtosis) for r in valid]

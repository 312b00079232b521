"""Trial harness and statistics: batches of independent trials, streaming
moment estimators with exact merges, Wilson intervals, and the distribution
distances used by the limit-theorem validations.

Trials are dealt to workers in fixed-size chunks whose seeds depend only on
(master_seed, trial index), and chunk summaries are merged in index order,
so serial and parallel execution of the same batch produce identical
SampleStats.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import graph as graphmod
from . import markproc, theory
from .core import (Params, TrialOutcome, mix_seed, outcome_from_generations,
                   validate)

_CHUNK = 256  # trials per work unit; fixed so chunking ignores worker count
_Z95 = 1.959963984540054


# ---------------------------------------------------------------------------
# scalar accumulators
# ---------------------------------------------------------------------------

@dataclass
class Moments:
    """Streaming mean/variance with the exact pairwise merge rule."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "Moments"):
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


def wilson_interval(successes: int, trials: int, z: float = _Z95):
    """Wilson score interval for a binomial proportion; valid near 0 and 1."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


# ---------------------------------------------------------------------------
# sample statistics
# ---------------------------------------------------------------------------

@dataclass
class SampleStats:
    """Aggregate over a batch of trials.

    perc_prob is the fraction of trials with a big final set (A* >=
    big_threshold * n) with its Wilson 95% interval; deficiency_pmf is the
    empirical law of n - A*; final_size_hist the raw histogram of A*.
    """

    n: int
    trials: int = 0
    final_moments: Moments = field(default_factory=Moments)
    tau_moments: Moments = field(default_factory=Moments)
    big_count: int = 0
    full_count: int = 0
    final_size_hist: dict[int, int] = field(default_factory=dict)

    def record(self, outcome: TrialOutcome):
        self.trials += 1
        self.final_moments.add(outcome.final_size)
        self.tau_moments.add(outcome.tau)
        self.big_count += outcome.percolated_almost
        self.full_count += outcome.percolated_fully
        h = self.final_size_hist
        h[outcome.final_size] = h.get(outcome.final_size, 0) + 1

    def merge(self, other: "SampleStats"):
        if other.n != self.n:
            raise ValueError("merging stats of different n")
        self.trials += other.trials
        self.final_moments.merge(other.final_moments)
        self.tau_moments.merge(other.tau_moments)
        self.big_count += other.big_count
        self.full_count += other.full_count
        for k, v in other.final_size_hist.items():
            self.final_size_hist[k] = self.final_size_hist.get(k, 0) + v

    @property
    def mean_final(self) -> float:
        return self.final_moments.mean

    @property
    def var_final(self) -> float:
        return self.final_moments.variance

    @property
    def mean_tau(self) -> float:
        return self.tau_moments.mean

    @property
    def var_tau(self) -> float:
        return self.tau_moments.variance

    @property
    def perc_prob(self) -> float:
        return self.big_count / self.trials if self.trials else 0.0

    @property
    def perc_interval(self) -> tuple[float, float]:
        return wilson_interval(self.big_count, self.trials)

    @property
    def deficiency_pmf(self) -> dict[int, float]:
        return {self.n - k: c / self.trials
                for k, c in sorted(self.final_size_hist.items(), reverse=True)}

    def row(self) -> dict:
        lo, hi = self.perc_interval
        return {
            "trials": self.trials, "mean_final": self.mean_final,
            "var_final": self.var_final, "perc_prob": self.perc_prob,
            "perc_lo": lo, "perc_hi": hi,
            "mean_tau": self.mean_tau, "var_tau": self.var_tau,
        }


@dataclass(frozen=True)
class ClusterSummary:
    """Bimodal split of the final-size law at the widest empty gap between
    the two theory-predicted centers."""

    split: float
    mass_low: float
    mass_high: float
    mean_low: float
    mean_high: float


def detect_clusters(stats: SampleStats, low_center: float, high_center: float) -> ClusterSummary:
    """Split the final-size histogram between the predicted cluster centers
    at the widest observed gap; anchored, not heuristic."""
    support = np.array(sorted(stats.final_size_hist), dtype=float)
    counts = np.array([stats.final_size_hist[int(k)] for k in support], dtype=float)
    inside = (support >= low_center) & (support <= high_center)
    pts = support[inside]
    if len(pts) >= 2:
        gaps = np.diff(pts)
        i = int(np.argmax(gaps))
        split = 0.5 * (pts[i] + pts[i + 1])
    else:
        split = 0.5 * (low_center + high_center)
    low = support <= split
    mass_low = counts[low].sum() / stats.trials
    mass_high = counts[~low].sum() / stats.trials
    mean_low = float(np.dot(support[low], counts[low]) / counts[low].sum()) \
        if counts[low].sum() else math.nan
    mean_high = float(np.dot(support[~low], counts[~low]) / counts[~low].sum()) \
        if counts[~low].sum() else math.nan
    return ClusterSummary(split=float(split), mass_low=float(mass_low),
                          mass_high=float(mass_high), mean_low=mean_low,
                          mean_high=mean_high)


# ---------------------------------------------------------------------------
# engines and batch execution
# ---------------------------------------------------------------------------

def _graph_trial(params: Params, seed: int, stream: int) -> TrialOutcome:
    g = graphmod.gen_gnp(params.n, params.p, seed, stream=stream)
    res = graphmod.bootstrap(g, np.arange(params.a), params.r)
    t3c = inv_p = None
    if 0.0 < params.p < 1.0:
        t_c, _, _ = theory.thresholds(params.n, params.p, params.r)
        t3c, inv_p = 3.0 * t_c, 1.0 / params.p
    return outcome_from_generations(params.n, res.generation_sizes,
                                    params.big_threshold, t3c, inv_p)


def run_one(params: Params, seed: int, stream: int = 0,
            engine: str = "markproc") -> TrialOutcome:
    """One trial under either engine, with the stream-per-trial contract."""
    if engine == "markproc":
        return markproc.run_trial(params, seed, stream)
    if engine == "graph":
        return _graph_trial(params, seed, stream)
    raise ValueError(f"unknown engine {engine!r}")


def _run_chunk(args) -> SampleStats:
    params, master_seed, start, stop, engine = args
    stats = SampleStats(n=params.n)
    for i in range(start, stop):
        stats.record(run_one(params, master_seed, stream=i, engine=engine))
    return stats


def run_batch(params: Params, trials: int, master_seed: int,
              engine: str = "markproc", workers: int = 1) -> SampleStats:
    """trials independent runs with streams derived from (master_seed, i).

    Aggregation is a fold over fixed _CHUNK-sized summaries in index order,
    so results do not depend on the worker count.
    """
    validate(params)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    chunks = [(params, master_seed, s, min(s + _CHUNK, trials), engine)
              for s in range(0, trials, _CHUNK)]
    total = SampleStats(n=params.n)
    if workers <= 1 or len(chunks) == 1:
        for ch in chunks:
            total.merge(_run_chunk(ch))
        return total
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, chunks):
            total.merge(part)
    return total


def sweep(params: Params, axis: str, values, trials: int, master_seed: int,
          engine: str = "markproc", workers: int = 1):
    """One run_batch per value of the swept axis ("a" or "p"); returns
    [(value, SampleStats), ...] in input order."""
    if axis not in ("a", "p"):
        raise ValueError("axis must be 'a' or 'p'")
    rows = []
    for idx, v in enumerate(values):
        if axis == "a":
            pt = replace(params, a=int(v))
        else:
            pt = replace(params, p=float(v))
        point_seed = mix_seed(master_seed, idx) & ((1 << 63) - 1)
        rows.append((v, run_batch(pt, trials, point_seed, engine=engine,
                                  workers=workers)))
    return rows


# ---------------------------------------------------------------------------
# distribution utilities
# ---------------------------------------------------------------------------

def _as_dict(pmf) -> dict[int, float]:
    if hasattr(pmf, "as_dict"):
        return pmf.as_dict()
    return {int(k): float(v) for k, v in dict(pmf).items()}


def tv_distance(pmf1, pmf2) -> float:
    """Total variation distance: half the L1 difference over the union
    support.  Accepts dicts or exact.Pmf objects."""
    d1, d2 = _as_dict(pmf1), _as_dict(pmf2)
    keys = set(d1) | set(d2)
    total = sum(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) for k in keys)
    if any(v < 0 for v in d1.values()) or any(v < 0 for v in d2.values()):
        raise ValueError("pmfs must be nonnegative")
    return 0.5 * total


def normal_cdf(x: float) -> float:
    """Standard normal distribution function, accurate to ~1e-16 via erfc."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def poisson_pmf(k: int, lam: float) -> float:
    """P(Po(lam) = k)."""
    if k < 0:
        return 0.0
    if lam == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


def empirical_pmf(values) -> dict[int, float]:
    """Normalized histogram of an integer sample."""
    values = np.asarray(values)
    out: dict[int, float] = {}
    total = len(values)
    for k, c in zip(*np.unique(values, return_counts=True)):
        out[int(k)] = int(c) / total
    return out

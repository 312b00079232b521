"""Shared domain types, parameter validation, and deterministic per-trial seeding.

Every stochastic module derives its generator through :func:`derive_stream`,
so trials are reproducible and embarrassingly parallel: trial ``i`` of a run
with master seed ``s`` always sees the same random stream, no matter which
worker executes it or in which order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Sentinel for "this vertex never activates".  Any activation time larger
#: than n is observationally equivalent to never (the process stops by n),
#: so samplers cap at n and report this instead.  An IEEE infinity compares
#: correctly against every finite time.
NEVER = float("inf")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, the splitmix64 increment


class ParamsError(ValueError):
    """Raised when a parameter set violates the model invariants."""


@dataclass(frozen=True)
class Params:
    """One bootstrap percolation instance on G(n, p).

    n: vertex count, p: edge probability, a: initially active count,
    r: activation threshold (>= 2), big_threshold: fraction of n above
    which the active set counts as "big" for the dynamical models.
    """

    n: int
    p: float
    a: int
    r: int = 2
    big_threshold: float = 0.5


def validate(params: Params) -> Params:
    """Check all Params invariants; return the instance unchanged if valid."""
    n, p, a, r = params.n, params.p, params.a, params.r
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParamsError(f"n must be a positive integer, got {n!r}")
    if not isinstance(a, (int, np.integer)) or a < 0:
        raise ParamsError(f"a must be a nonnegative integer, got {a!r}")
    if a > n:
        raise ParamsError(f"a exceeds n ({a} > {n})")
    if not 0.0 <= p <= 1.0:
        raise ParamsError(f"p outside [0,1]: {p!r}")
    if not isinstance(r, (int, np.integer)) or r < 2:
        raise ParamsError(f"r must be an integer >= 2, got {r!r}")
    if not 0.0 < params.big_threshold <= 1.0:
        raise ParamsError(f"big_threshold outside (0,1]: {params.big_threshold!r}")
    return params


def _splitmix64(z: int) -> int:
    """One splitmix64 avalanche round; full 64-bit mixing of the input."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master: int, index: int) -> int:
    """Avalanche-mix a master seed and a stream index into one 128-bit value.

    Pure function: the same (master, index) always gives the same value, and
    single-bit changes in either input flip about half the output bits, so
    distinct trial indices give statistically independent streams.
    """
    lo = _splitmix64((master & _MASK64) ^ _splitmix64(index & _MASK64))
    hi = _splitmix64(lo ^ _GOLDEN)
    return (hi << 64) | lo


def derive_stream(master: int, index: int) -> np.random.Generator:
    """Deterministically derive the generator for trial `index` of run `master`."""
    return np.random.Generator(np.random.PCG64(mix_seed(master, index)))


@dataclass(frozen=True)
class Seed:
    """A (master seed, trial stream) pair naming one reproducible stream."""

    master: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return derive_stream(self.master, self.stream)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one bootstrap percolation trial.

    final_size is the final active count A* (equal to the stopping time T of
    the sequential reformulation).  generation_sizes[k] = |G_k| with
    generation 0 the initial set; tau = number of the last nonempty
    generation.  gen_cross_3tc / gen_cross_inv_p are the first generation
    indices at which the cumulative active count reaches 3*t_c resp. 1/p
    (None when never reached, or when t_c is undefined because p is 0 or 1).
    """

    final_size: int
    percolated_almost: bool
    percolated_fully: bool
    tau: int
    generation_sizes: tuple[int, ...]
    gen_cross_3tc: int | None = None
    gen_cross_inv_p: int | None = None


def crossing_generation(generation_sizes, threshold) -> int | None:
    """First generation index j with T_j >= threshold, where T_j = sum of the
    first j generation sizes (the cumulative active count once generation
    j-1 is complete).  None if the process stops before reaching it."""
    if threshold <= 0:
        return 0
    total = 0
    for j, g in enumerate(generation_sizes):
        total += g
        if total >= threshold:
            return j + 1
    return None


def outcome_from_generations(n, generation_sizes, big_threshold,
                             t3c=None, inv_p=None) -> TrialOutcome:
    """Assemble a TrialOutcome from per-generation activation counts."""
    sizes = list(generation_sizes)
    while len(sizes) > 1 and sizes[-1] == 0:
        sizes.pop()
    final = sum(sizes)
    tau = max((k for k, g in enumerate(sizes) if g > 0), default=0)
    return TrialOutcome(
        final_size=final,
        percolated_almost=final >= big_threshold * n,
        percolated_fully=final == n,
        tau=tau,
        generation_sizes=tuple(sizes),
        gen_cross_3tc=None if t3c is None else crossing_generation(sizes, t3c),
        gen_cross_inv_p=None if inv_p is None else crossing_generation(sizes, inv_p),
    )

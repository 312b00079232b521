"""Dynamical models: keep adding activations, infections, or edges until the
active set first becomes big (strictly more than big_threshold * n vertices).

external_activation measures A0*, the number of externally activated
vertices at that first time; external_infection measures J0, the number of
single-mark external infections; edge_addition measures M, the number of
uniformly ordered edges of K_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import graph as graphmod
from . import markproc
from .core import derive_stream

_EDGE_N_CAP = 30_000  # edge model touches up to C(n,2) pair indices


@dataclass(frozen=True)
class DynOutcome:
    """Measured threshold of one dynamical run.

    model: "activation" | "infection" | "edges"; threshold_value is A0*,
    J0, or M.  fixed_param is p for the first two models and a for edges.
    saturated flags runs where the active set never became big.
    """

    model: str
    threshold_value: int
    n: int
    r: int
    fixed_param: float
    big_threshold: float
    saturated: bool = False


def _is_big(count: int, n: int, big_threshold: float) -> bool:
    return count > big_threshold * n


def external_activation(n: int, p: float, r: int, big_threshold: float = 0.5,
                        seed: int = 0, stream: int = 0,
                        engine: str = "graph") -> DynOutcome:
    """A0*: smallest a such that bootstrap percolation from the first a
    vertices of a uniformly random order L yields a big final set.

    Monotonicity of the final set in the initial prefix (on a fixed
    realization) makes binary search over a valid; each probe is one
    O(n + m) bootstrap run.

    engine="markproc" measures the identically distributed quantity on the
    negative-binomial-clock coupling instead of an explicit graph; the law
    of A0* only depends on the per-a marginals P(final set big), so both
    engines agree in distribution while the clock version runs at n = 1e6
    scale.
    """
    if engine == "graph":
        g = graphmod.gen_gnp(n, p, seed, stream=stream)
        rng = derive_stream(seed, stream + (1 << 32))
        order = rng.permutation(n)

        def probe(a: int) -> bool:
            return _is_big(graphmod.bootstrap(g, order[:a], r).final_size,
                           n, big_threshold)
    elif engine == "markproc":
        rng = derive_stream(seed, stream)
        clocks = markproc.sample_activation_times(n, p, r, n, rng)
        limit = int(math.floor(big_threshold * n)) + 1  # smallest big size
        t_idx = np.arange(limit, dtype=np.int64)

        def probe(a: int) -> bool:
            # big iff no fixpoint A(t) = t occurs before `limit`; the scan
            # can stop there, which keeps subcritical probes O(t_c)
            suffix = np.minimum(clocks[a:], limit)
            counts = np.bincount(suffix, minlength=limit + 1)[:limit]
            counts[0] += a
            active = np.cumsum(counts)
            return not bool(np.any(active <= t_idx))
    else:
        raise ValueError(f"unknown engine {engine!r}")

    if not probe(n):
        return DynOutcome("activation", n, n, r, p, big_threshold, saturated=True)
    lo, hi = 0, n  # invariant: probe(hi) big, probe(lo) not (lo=0 never big)
    if probe(0):
        return DynOutcome("activation", 0, n, r, p, big_threshold)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return DynOutcome("activation", hi, n, r, p, big_threshold)


def external_infection(n: int, p: float, r: int, big_threshold: float = 0.5,
                       seed: int = 0, stream: int = 0) -> DynOutcome:
    """J0: external infections (uniform vertex draws with replacement, one
    mark each) until the active set is big; cascades run in between."""
    g = graphmod.gen_gnp(n, p, seed, stream=stream)
    rng = derive_stream(seed, stream + (1 << 32))
    state = graphmod.cascade_init(g, r)
    cap = max(1_000_000, int(20 * r * n * max(math.log(max(n, 2)), 1.0)))
    j0 = 0
    batch = 1024
    buffer = rng.integers(0, n, size=batch)
    pos = 0
    while not _is_big(state.active_count, n, big_threshold):
        if j0 >= cap:
            return DynOutcome("infection", j0, n, r, p, big_threshold,
                              saturated=True)
        if pos == batch:
            buffer = rng.integers(0, n, size=batch)
            pos = 0
        state.external_infect(int(buffer[pos]))
        pos += 1
        j0 += 1
    return DynOutcome("infection", j0, n, r, p, big_threshold)


class _LazyPermutation:
    """Uniform random permutation of range(total), evaluated lazily by
    Fisher-Yates; only the visited prefix costs memory."""

    def __init__(self, total: int, rng: np.random.Generator):
        self.total = total
        self.rng = rng
        self.displaced: dict[int, int] = {}
        self.cursor = 0

    def __next__(self) -> int:
        i = self.cursor
        if i >= self.total:
            raise StopIteration
        j = int(self.rng.integers(i, self.total))
        vi = self.displaced.pop(i, i)
        if j == i:
            out = vi
        else:
            out = self.displaced.get(j, j)
            self.displaced[j] = vi
        self.cursor += 1
        return out


def edge_addition(n: int, a: int, r: int, big_threshold: float = 0.5,
                  seed: int = 0, stream: int = 0) -> DynOutcome:
    """M: edges of K_n added in uniformly random order (the sorted-U_e
    coupling) until the instantaneous bootstrap makes the active set big.

    The first a vertices start active.  Capped at n = 3e4 since the
    permutation ranges over C(n,2) pair indices.
    """
    if n > _EDGE_N_CAP:
        raise ValueError(f"edge_addition capped at n = {_EDGE_N_CAP}")
    if a > n:
        raise ValueError("a exceeds n")
    rng = derive_stream(seed, stream)
    state = graphmod.CascadeState(n, r)
    state.active[:a] = True
    state.active_count = a
    if _is_big(a, n, big_threshold):
        return DynOutcome("edges", 0, n, r, a, big_threshold)
    total = n * (n - 1) // 2
    offsets = graphmod._pair_offsets(n)
    perm = _LazyPermutation(total, rng)
    m = 0
    for _ in range(total):
        k = next(perm)
        u = int(np.searchsorted(offsets, k, side="right")) - 1
        v = int(k - offsets[u]) + u + 1
        state.add_edge(u, v)
        m += 1
        if _is_big(state.active_count, n, big_threshold):
            return DynOutcome("edges", m, n, r, a, big_threshold)
    return DynOutcome("edges", m, n, r, a, big_threshold, saturated=True)

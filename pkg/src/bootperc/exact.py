"""Exact stopping-time distribution via the Markov chain on A(t).

Conditioned on the history up to t, the next increment A(t+1) - A(t) is
Bin(n - A(t), pi(t;1)) with pi(t;u) = (pi(t+u) - pi(t))/(1 - pi(t)).  A
forward DP over the alive states (t, A(t) = k), k > t, absorbs mass at
k = t+1 as P(T = t+1) and emits the full pmf of T in one pass.  A brute
force enumeration over all clock assignments serves as the oracle for tiny
instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .theory import binom_lower_tail, nbinom_pmf

_DP_CAP = 400          # O(n^3) arithmetic
_ORACLE_FREE = 5       # enumerate at most (n-r+2)^5 assignments
_ORACLE_N = 12


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on integers starting at support_offset."""

    support_offset: int
    masses: np.ndarray

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def support(self) -> np.ndarray:
        return np.arange(self.support_offset, self.support_offset + len(self.masses))

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(m) for k, m in zip(self.support(), self.masses)}

    def mean(self) -> float:
        return float(np.dot(self.support(), self.masses) / self.total)

    def prob(self, k: int) -> float:
        i = k - self.support_offset
        if 0 <= i < len(self.masses):
            return float(self.masses[i])
        return 0.0

    def to_csv_rows(self):
        """(k, probability) rows for export."""
        return [(int(k), float(m)) for k, m in zip(self.support(), self.masses)]


def step_prob(t: int, p: float, r: int, u: int = 1) -> float:
    """pi(t;u) = P(Y <= t+u | Y > t): per-vertex activation probability over
    the next u steps.  Errors when pi(t) = 1 (no inactive vertex can exist)."""
    q_t = binom_lower_tail(t, p, r)
    if q_t <= 0.0:
        raise ValueError(f"pi(t) = 1 at t = {t}: no alive state can remain")
    num = sum(nbinom_pmf(s, r, p) for s in range(t + 1, t + u + 1))
    return min(num / q_t, 1.0)


def _binom_row(m: int, q: float) -> np.ndarray:
    """pmf of Bin(m, q) over j = 0..m by the multiplicative recurrence,
    started from the mode in log space when (1-q)^m underflows.  Never
    renormalized: the residual of sum(row) from 1 is a correctness signal."""
    if m == 0:
        return np.ones(1)
    if q <= 0.0:
        row = np.zeros(m + 1)
        row[0] = 1.0
        return row
    if q >= 1.0:
        row = np.zeros(m + 1)
        row[m] = 1.0
        return row
    log_q0 = m * math.log1p(-q)
    j = np.arange(m + 1, dtype=np.float64)
    if log_q0 > -700.0:
        ratios = (m - j[:-1]) / j[1:] * (q / (1.0 - q))
        row = np.empty(m + 1)
        row[0] = math.exp(log_q0)
        np.multiply.accumulate(np.concatenate([[row[0]], ratios]), out=row)
        return row
    # start at the mode to dodge underflow at j = 0
    mode = min(int((m + 1) * q), m)
    log_mode = (math.lgamma(m + 1) - math.lgamma(mode + 1) - math.lgamma(m - mode + 1)
                + mode * math.log(q) + (m - mode) * math.log1p(-q))
    row = np.zeros(m + 1)
    row[mode] = math.exp(log_mode)
    for jj in range(mode + 1, m + 1):
        row[jj] = row[jj - 1] * (m - jj + 1) / jj * (q / (1.0 - q))
    for jj in range(mode - 1, -1, -1):
        row[jj] = row[jj + 1] * (jj + 1) / (m - jj) * ((1.0 - q) / q)
    return row


def exact_T_pmf(n: int, p: float, a: int, r: int, cap: int = _DP_CAP) -> Pmf:
    """Exact pmf of T over [a, n] by the forward absorption DP.

    Alive mass lives on states (t, k) with k > t; each step distributes
    Bin(n-k, pi(t;1)) increments, and the part landing on k = t+1 is
    absorbed as P(T = t+1).  Early exit once alive mass < 1e-15.
    """
    if n > cap:
        raise ValueError(f"exact_T_pmf capped at n = {cap} (O(n^3) work)")
    if not 0 <= a <= n:
        raise ValueError("need 0 <= a <= n")
    absorbed = np.zeros(n + 1)
    if a == 0:
        absorbed[0] = 1.0
        return Pmf(support_offset=0, masses=absorbed[:1])
    alive = np.zeros(n + 1)  # alive[k] = P(alive at (t, k)), k > t
    alive[a] = 1.0
    for t in range(0, n):
        if alive.sum() < 1e-15:
            break
        # sub-1e-250 dust cannot shift any digit of the pmf but would force
        # step_prob evaluations where 1 - pi(t) underflows
        alive[alive < 1e-250] = 0.0
        new = np.zeros(n + 1)
        ks = np.nonzero(alive > 0.0)[0]
        full = None
        for k in ks:
            mass = alive[k]
            m_inact = n - k
            if m_inact == 0:
                new[k] += mass  # complete: waits at k = n until t catches up
                continue
            if full is None:
                full = step_prob(t, p, r)
            row = _binom_row(m_inact, full)
            new[k: k + m_inact + 1] += mass * row
        absorbed[t + 1] = new[t + 1]
        new[t + 1] = 0.0
        alive = new
    masses = absorbed[a:]
    return Pmf(support_offset=a, masses=masses)


def enumerate_oracle(n: int, p: float, a: int, r: int) -> Pmf:
    """Exact law of T by exhaustive summation over all clock assignments.

    Iterates over multisets of (Y_1..Y_{n-a}) values in {r..n, NEVER} with
    multinomial weights (the clocks are i.i.d., so T only depends on the
    multiset).  Guarded to n-a <= 5, n <= 12.
    """
    m = n - a
    if m > _ORACLE_FREE or n > _ORACLE_N:
        raise ValueError(f"enumerate_oracle guarded to n-a <= {_ORACLE_FREE}, "
                         f"n <= {_ORACLE_N}")
    absorbed = np.zeros(n + 1)
    if m == 0:
        absorbed[min(a, n)] = 1.0
        return Pmf(support_offset=a, masses=absorbed[a:])
    values = list(range(r, n + 1)) + [None]  # None = NEVER
    weight = {v: nbinom_pmf(v, r, p) for v in values if v is not None}
    weight[None] = binom_lower_tail(n, p, r)  # P(Y > n)
    fact_m = math.factorial(m)
    for combo in combinations_with_replacement(values, m):
        prev, run = object(), 0
        denom = 1
        for v in combo:
            if v == prev:
                run += 1
            else:
                denom *= math.factorial(run)
                prev, run = v, 1
        denom *= math.factorial(run)
        prob = (fact_m // denom) * math.prod(weight[v] for v in combo)
        counts = np.zeros(n + 2, dtype=np.int64)
        for v in combo:
            if v is not None:
                counts[v] += 1
        t_hit = n
        cum = 0
        for t in range(0, n + 1):
            cum += counts[t]
            if a + cum == t:
                t_hit = t
                break
        absorbed[t_hit] += prob
    return Pmf(support_offset=a, masses=absorbed[a:])

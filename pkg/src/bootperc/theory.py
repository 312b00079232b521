"""Threshold and limit theory for bootstrap percolation on G(n, p).

Closed forms and root-found quantities: the critical time/size pair
(t_c, a_c), the low-degree count b_c, the refined finite-n critical pair
(t_c*, a_c*) from a 1-D minimization, the dual critical edge probabilities
p_c and p_c*, the subcritical limit fraction phi and its companions, the
subcritical stopping point t_*, the generation-count prediction, and the
sparse-regime fixed-point analysis f(x, c, theta) with its fold structure.

All Poisson/binomial tails are finite sums evaluated directly; nothing here
is Monte Carlo except `zeta_estimate`, which estimates the survival
probability of the boundary-regime random walk.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import derive_stream

_PHI_INV = (math.sqrt(5.0) - 1.0) / 2.0  # golden section ratio


# ---------------------------------------------------------------------------
# special functions: Poisson and binomial tails, negative binomial mass
# ---------------------------------------------------------------------------

def psi(y, r: int):
    """Upper Poisson tail P(Po(y) >= r).

    Evaluated as the complementary finite sum 1 - sum_{j<r} y^j e^-y / j!.
    Small arguments (y < 1/2) switch to the ascending series starting at
    j = r, which avoids the cancellation the complementary form suffers
    when the tail is below ~1e-13.  Accepts scalars or arrays.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise ValueError("psi requires y >= 0")
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    out = np.empty_like(y_arr)

    # below this the ascending series converges geometrically (ratio < 1/2)
    # and the complementary form would cancel catastrophically for larger r
    small = y_arr < max(0.5, (r + 1) / 2)
    if np.any(small):
        ys = y_arr[small]
        # ascending tail: e^-y * y^r/r! * (1 + y/(r+1) + y^2/((r+1)(r+2)) + ...)
        term = np.exp(r * np.log(ys, where=ys > 0, out=np.full_like(ys, -np.inf))
                      - math.lgamma(r + 1) - ys)
        term[ys == 0] = 0.0
        acc = term.copy()
        j = r + 1
        while True:
            term = term * ys / j
            acc += term
            j += 1
            if np.all(term <= 1e-18 * (acc + 1e-300)):
                break
        out[small] = acc
    big = ~small
    if np.any(big):
        yb = y_arr[big]
        term = np.exp(-yb)
        lower = term.copy()
        for j in range(1, r):
            term = term * yb / j
            lower += term
        out[big] = np.clip(1.0 - lower, 0.0, 1.0)
    return float(out[0]) if scalar else out


def binom_lower_tail(t, p: float, r: int) -> float:
    """P(Bin(floor(t), p) <= r-1) as a direct r-term sum (no cancellation)."""
    t = int(math.floor(t))
    if t < r:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    term = math.exp(t * math.log1p(-p))
    ratio = p / (1.0 - p)
    lower = term
    for j in range(1, r):
        term *= (t - j + 1) / j * ratio
        lower += term
    return min(lower, 1.0)


def pi_binom(t, p: float, r: int) -> float:
    """Exact binomial upper tail pi(t) = P(Bin(floor(t), p) >= r).

    Real-valued t is floored, matching the process convention.  Small tails
    are summed ascending from j = r, so the complementary form's
    cancellation never surfaces.
    """
    t = int(math.floor(t))
    if t < r:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    lower = binom_lower_tail(t, p, r)
    if lower < 0.9:
        return 1.0 - lower
    # upper tail below 0.1: the mode sits at or below r, so the ascending
    # terms decay geometrically
    term = math.exp(math.lgamma(t + 1) - math.lgamma(r + 1) - math.lgamma(t - r + 1)
                    + r * math.log(p) + (t - r) * math.log1p(-p))
    acc = 0.0
    j = r
    while j <= t:
        acc += term
        if term <= acc * 1e-17:
            break
        term *= (t - j) * p / ((j + 1) * (1.0 - p))
        j += 1
    return min(acc, 1.0)


def nbinom_pmf(k: int, r: int, p: float) -> float:
    """P(Y = k) for Y ~ NBi(r, p): the r-th success lands on trial k.

    Equals C(k-1, r-1) p^r (1-p)^(k-r); zero for k < r.
    """
    if k < r:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0 if k == r else 0.0
    log_weight = r * math.log(p) + (k - r) * math.log1p(-p)
    if k - 1 < 10_000:
        # exact integer binomial coefficient at small k beats lgamma rounding
        return math.comb(k - 1, r - 1) * math.exp(log_weight)
    return math.exp(math.lgamma(k) - math.lgamma(r) - math.lgamma(k - r + 1)
                    + log_weight)


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def thresholds(n: int, p: float, r: int) -> tuple[float, float, float]:
    """(t_c, a_c, b_c) for the instance (n, p, r); requires 0 < p < 1.

    t_c = ((r-1)!/(n p^r))^(1/(r-1)), a_c = (1 - 1/r) t_c,
    b_c = n (pn)^(r-1)/(r-1)! e^(-pn).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("thresholds require 0 < p < 1")
    log_fact = math.lgamma(r)
    t_c = math.exp((log_fact - math.log(n) - r * math.log(p)) / (r - 1))
    a_c = (1.0 - 1.0 / r) * t_c
    b_c = math.exp(math.log(n) + (r - 1) * math.log(p * n) - log_fact - p * n)
    return t_c, a_c, b_c


def _golden_min(fn, lo: float, hi: float, rel_tol: float) -> tuple[float, float]:
    """Golden-section minimization of a unimodal fn on [lo, hi]."""
    a, b = lo, hi
    c = b - _PHI_INV * (b - a)
    d = a + _PHI_INV * (b - a)
    fc, fd = fn(c), fn(d)
    scale = max(abs(lo), abs(hi), 1.0)
    while (b - a) > rel_tol * scale:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _PHI_INV * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _PHI_INV * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _grid_then_golden(fn, lo: float, hi: float, grid: np.ndarray,
                      rel_tol: float = 1e-10) -> tuple[float, float, bool]:
    """Minimize fn over [lo, hi]: coarse grid, then golden-section refinement
    around the best grid point.  Returns (argmin, min, flat_warning)."""
    vals = fn(grid)
    i = int(np.argmin(vals))
    spread = float(np.max(vals) - np.min(vals))
    if spread <= 1e-12 * (abs(float(np.min(vals))) + 1.0):
        return float(grid[i]), float(vals[i]), True
    left = grid[i - 1] if i > 0 else lo
    right = grid[i + 1] if i + 1 < len(grid) else hi
    x, fx = _golden_min(lambda t: float(fn(np.asarray(t))), float(left), float(right), rel_tol)
    if fx > vals[i]:
        x, fx = float(grid[i]), float(vals[i])
    return x, fx, False


@dataclass(frozen=True)
class RefinedCritical:
    """Refined critical pair from minimizing (n psi(tp) - t)/(1 - psi(tp)).

    a_c_star/t_c_star use the window t <= 3 t_c; the _half fields repeat the
    minimization over t <= n/2, and minima_differ flags a disagreement
    beyond rounding (the two windows provably agree for large n only).
    """

    a_c_star: float
    t_c_star: float
    a_c_star_half: float
    t_c_star_half: float
    minima_differ: bool
    flat_warning: bool


def refined_critical(n: int, p: float, r: int, grid_points: int = 4096) -> RefinedCritical:
    """Minimize g(t) = (n psi(tp) - t)/(1 - psi(tp)) over real t in [0, 3 t_c];
    a_c* = -min, t_c* = argmin.  Also minimized over [0, n/2] for the flag."""
    t_c, _, _ = thresholds(n, p, r)
    if t_c < 1.0:
        raise ValueError("refined_critical expects t_c >= 1 (p too large for this n)")

    def g(t):
        t = np.asarray(t, dtype=float)
        ps = psi(t * p, r)
        denom = 1.0 - ps
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (n * ps - t) / denom
        return np.where(denom > 0.0, val, np.inf)

    hi = 3.0 * t_c
    grid = np.linspace(0.0, hi, grid_points)
    t_star, g_min, flat = _grid_then_golden(g, 0.0, hi, grid)

    hi2 = n / 2.0
    grid2 = np.union1d(np.linspace(0.0, hi2, 1024),
                       np.linspace(0.0, min(hi, hi2), grid_points))
    t_star2, g_min2, flat2 = _grid_then_golden(g, 0.0, hi2, grid2)

    a_star, a_star2 = -g_min, -g_min2
    differ = abs(a_star2 - a_star) > 1e-6 * (abs(a_star) + 1.0)
    return RefinedCritical(a_c_star=a_star, t_c_star=t_star,
                           a_c_star_half=a_star2, t_c_star_half=t_star2,
                           minima_differ=differ, flat_warning=flat or flat2)


def pc(n: int, a: int, r: int) -> float:
    """Critical edge probability for almost percolation with a initial actives:
    p_c = ((r-1)^(r-1) (r-1)! / r^(r-1))^(1/r) * (n a^(r-1))^(-1/r)."""
    if a < 1:
        raise ValueError("pc requires a >= 1")
    log_const = ((r - 1) * math.log(r - 1) + math.lgamma(r) - (r - 1) * math.log(r)) / r
    return math.exp(log_const - (math.log(n) + (r - 1) * math.log(a)) / r)


def _h_inf(n: int, a: int, r: int, p: float) -> float:
    """inf over t in [0, n/2] of (n-a) psi(tp) - t, with a grid densified
    around the dip at t_c(p) so narrow minima are not stepped over."""
    hi = n / 2.0

    def fn(t):
        return (n - a) * psi(np.asarray(t) * p, r) - np.asarray(t)

    pieces = [np.linspace(0.0, hi, 1024)]
    if 0.0 < p < 1.0:
        t_c, _, _ = thresholds(n, p, r)
        if t_c < hi:
            pieces.append(np.linspace(0.0, min(3.0 * t_c, hi), 4096))
    grid = np.union1d(pieces[0], pieces[-1])
    _, val, _ = _grid_then_golden(fn, 0.0, hi, grid)
    return val


def pcx(n: int, a: int, r: int, rel_tol: float = 1e-12) -> float:
    """Refined critical probability p_c*: the root of h_a(p) = -a, where
    h_a(p) = inf_{t <= n/2} {(n-a) psi(tp) - t}.  h_a is increasing in p,
    so bisection on an expandable bracket converges globally."""
    if a < 1:
        raise ValueError("pcx requires a >= 1")
    if a > n / 4:
        warnings.warn("pcx outside the a = o(n) regime; result is formal", stacklevel=2)
    lo, hi = 1.0 / (10.0 * n), min(10.0 * n ** (-1.0 / r), 1.0)
    for _ in range(60):
        if _h_inf(n, a, r, lo) < -a:
            break
        lo *= 0.25
    else:
        raise ValueError(f"pcx bracket failure at lo={lo}: h={_h_inf(n, a, r, lo)}")
    for _ in range(60):
        if _h_inf(n, a, r, hi) > -a:
            break
        hi = min(1.0, hi * 4.0)
        if hi == 1.0 and _h_inf(n, a, r, 1.0) <= -a:
            raise ValueError(f"pcx bracket failure at hi=1: h={_h_inf(n, a, r, 1.0)}")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _h_inf(n, a, r, mid) < -a:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# subcritical limit functions
# ---------------------------------------------------------------------------

def phi(alpha: float, r: int, tol: float = 1e-12) -> float:
    """Unique root in [0,1] of r*phi - phi^r = (r-1)*alpha.

    The left side is strictly increasing on [0,1], so plain bisection
    converges; for r = 2 the closed form is 1 - sqrt(1-alpha).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha outside [0,1]: {alpha}")
    if alpha == 0.0:
        return 0.0
    if alpha == 1.0:
        return 1.0  # double root; bisection would stall at sqrt(eps)
    target = (r - 1) * alpha
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if r * mid - mid ** r < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def phi1(alpha: float, r: int) -> float:
    """Limit of A*/a in the subcritical regime: (r/(r-1)) phi(alpha)/alpha,
    continuously extended to phi1(0) = 1."""
    if alpha == 0.0:
        return 1.0
    return (r / (r - 1)) * phi(alpha, r) / alpha


def phi2(alpha: float, r: int) -> float:
    """Variance coefficient of the subcritical CLT:
    phi(alpha)^r (1 - phi(alpha)^(r-1))^-2 / r."""
    ph = phi(alpha, r)
    denom = 1.0 - ph ** (r - 1)
    if denom <= 0.0:
        raise ValueError("phi2 undefined at alpha = 1 (critical point)")
    return ph ** r / (denom * denom * r)


def t_star(n: int, p: float, a: int, r: int, grid_points: int = 4096) -> float:
    """Smallest positive root of a + (n-a) psi(t p) - t = 0.

    Scans (0, t_c*] for the first sign change and bisects.  Supercritical
    inputs (no root below t_c*) raise."""
    if a < 1:
        raise ValueError("t_star requires a >= 1")
    rc = refined_critical(n, p, r)

    def gamma(t):
        return a + (n - a) * psi(t * p, r) - t

    grid = np.linspace(0.0, rc.t_c_star, grid_points + 1)[1:]
    vals = gamma(grid)
    neg = np.nonzero(vals <= 0.0)[0]
    if len(neg) == 0:
        raise ValueError("no subcritical root: input is supercritical (a > a_c*)")
    i = int(neg[0])
    lo = grid[i - 1] if i > 0 else 0.0
    hi = grid[i]
    while (hi - lo) > 1e-10 * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if gamma(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tau_prediction(n: int, p: float, a: int, r: int) -> float:
    """Deterministic part of the supercritical generation-count formula:

        pi*sqrt(2)/sqrt(r-1) * (t_c/(a - a_c*))^(1/2)
      + (log log(np) - log_+ log(a/a_c)) / log r
      + log(n)/(np)

    (the O_p(1) term is omitted).  Requires a > a_c* and np > 1."""
    t_c, a_c, _ = thresholds(n, p, r)
    a_star = refined_critical(n, p, r).a_c_star
    if a <= a_star:
        raise ValueError(f"not supercritical: a={a} <= a_c*={a_star:.6g}")
    if n * p <= 1.0:
        raise ValueError("tau_prediction needs np > 1")
    term1 = math.pi * math.sqrt(2.0 / (r - 1)) * math.sqrt(t_c / (a - a_star))
    inner = math.log(a / a_c)
    log_plus = math.log(inner) if inner > 1.0 else 0.0
    term2 = (math.log(math.log(n * p)) - log_plus) / math.log(r)
    term3 = math.log(n) / (n * p)
    return term1 + term2 + term3


# ---------------------------------------------------------------------------
# sparse regime p ~ c/n: fixed point structure of f(x, c, theta)
# ---------------------------------------------------------------------------

def c_r(r: int) -> float:
    """Smallest c = pn admitting multiple fixed-point roots:
    c_r = r + P(Po(r-1) <= r-2) / P(Po(r-1) = r-1), evaluated exactly."""
    if r < 2:
        raise ValueError("c_r requires r >= 2")
    m = r - 1
    num = sum(Fraction(m ** j, math.factorial(j)) for j in range(r - 1))
    den = Fraction(m ** m, math.factorial(m))
    return float(r + num / den)


def f_boundary(x, c, theta, r: int):
    """Fixed-point function f(x, c, theta) = (1-theta) P(Po(cx) >= r) + theta - x."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or c < 0 or not 0.0 <= theta <= 1.0:
        raise ValueError("f_boundary requires x >= 0, c >= 0, theta in [0,1]")
    val = (1.0 - theta) * psi(c * x_arr, r) + theta - x_arr
    return float(val) if np.ndim(x) == 0 else val


def boundary_roots(c: float, theta: float, r: int,
                   grid_points: int = 10_000) -> list[float]:
    """All roots of f(x, c, theta) = 0 in [0, 1], sorted.

    Scans a uniform grid for sign changes, bisects each to 1e-12, and
    merges roots closer than 1e-8 (numerically unresolvable fold pairs).
    At least one root always exists: f(0) = theta >= 0 >= f(1).
    """
    xs = np.linspace(0.0, 1.0, grid_points + 1)
    fs = f_boundary(xs, c, theta, r)
    roots = [float(xs[i]) for i in np.nonzero(fs == 0.0)[0]]
    sign_change = np.nonzero(fs[:-1] * fs[1:] < 0.0)[0]
    for i in sign_change:
        lo, hi = float(xs[i]), float(xs[i + 1])
        flo = float(fs[i])
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            fm = f_boundary(mid, c, theta, r)
            if (fm > 0.0) == (flo > 0.0):
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    roots.sort()
    merged: list[float] = []
    for x in roots:
        if merged and x - merged[-1] < 1e-8:
            continue
        merged.append(x)
    if not merged:
        # theta = 0 with f > 0 nowhere negative near 0 except the origin root
        merged = [0.0]
    return merged


def _g_lower(y, r: int):
    """g(y) = P(Po(y) <= r-1) = 1 - psi(y, r)."""
    return 1.0 - psi(y, r)


def _g_prime(y, r: int):
    """g'(y) = -P(Po(y) = r-1) = -y^(r-1) e^-y / (r-1)!."""
    y = np.asarray(y, dtype=float)
    out = -np.exp((r - 1) * np.log(np.where(y > 0, y, 1.0)) - y - math.lgamma(r))
    out = np.where(y > 0, out, -1.0 if r == 1 else 0.0)
    return float(out) if out.ndim == 0 else out


def _h_fold(y, r: int):
    """h(y) = y - g(y)/g'(y); its minimum over y > 0 is c_r at y = r-1."""
    return y - _g_lower(y, r) / _g_prime(y, r)


def vartheta(x, c, r: int):
    """theta = vartheta(x) = 1 - (1-x)/g(cx): f(x, c, vartheta(x)) = 0."""
    return 1.0 - (1.0 - np.asarray(x, dtype=float)) / _g_lower(c * np.asarray(x), r)


@dataclass(frozen=True)
class ThetaFold:
    """Fold structure of the sparse-regime fixed point for c > c_r.

    theta_c: initial fraction where the limit final fraction jumps;
    theta_cq: lower fold (0 once the small-root branch disappears);
    x_fold_low: lower cluster center x_0(theta_c) = y_1/c;
    x_fold_high: upper cluster center, the largest root of f(., c, theta_c).
    """

    theta_c: float
    theta_cq: float
    x_fold_low: float
    x_fold_high: float


def theta_fold(c: float, r: int) -> ThetaFold:
    """Locate the fold points for c > c_r via h(y) = c.

    h is strictly decreasing on (0, r-1] and increasing beyond, with
    minimum c_r at y = r-1, so each side holds exactly one root."""
    ccr = c_r(r)
    if c <= ccr:
        raise ValueError(f"no fold: c = {c} <= c_r({r}) = {ccr}")
    m = float(r - 1)
    # y1: bisection on (0, r-1], h decreasing
    lo = m
    while _h_fold(lo, r) < c:
        lo *= 0.5
    lo_y, hi_y = lo, m
    for _ in range(200):
        mid = 0.5 * (lo_y + hi_y)
        if _h_fold(mid, r) > c:
            lo_y = mid
        else:
            hi_y = mid
        if hi_y - lo_y < 1e-14 * m:
            break
    y1 = 0.5 * (lo_y + hi_y)
    # y2: expanding bracket on [r-1, inf), h increasing
    hi = 2.0 * m if m > 0 else 2.0
    while _h_fold(hi, r) < c:
        hi *= 2.0
    lo_y, hi_y = m, hi
    for _ in range(200):
        mid = 0.5 * (lo_y + hi_y)
        if _h_fold(mid, r) < c:
            lo_y = mid
        else:
            hi_y = mid
        if hi_y - lo_y < 1e-14 * hi:
            break
    y2 = 0.5 * (lo_y + hi_y)

    x1, x2 = y1 / c, y2 / c
    th_c = float(vartheta(x1, c, r))
    th_cq = max(float(vartheta(x2, c, r)), 0.0)
    # upper cluster center: vartheta is increasing on [x2, 1] from below
    # th_c up to vartheta(1) = 1, so the largest root of f(., c, th_c) = 0
    # sits in (x2, 1] and bisection applies.
    lo_x, hi_x = x2, 1.0
    for _ in range(200):
        mid = 0.5 * (lo_x + hi_x)
        if float(vartheta(mid, c, r)) < th_c:
            lo_x = mid
        else:
            hi_x = mid
        if hi_x - lo_x < 1e-14:
            break
    x_high = 0.5 * (lo_x + hi_x)
    return ThetaFold(theta_c=th_c, theta_cq=th_cq, x_fold_low=x1, x_fold_high=x_high)


def theta_cc(r: int) -> float:
    """Largest fold fraction theta_c(c_r):
    1 - 1/(r P(Po(r-1) = r-1) + P(Po(r-1) <= r-2))."""
    m = r - 1
    p_eq = math.exp(m * math.log(m) - m - math.lgamma(r)) if m > 0 else 1.0
    p_le = math.exp(-m) * sum(m ** j / math.factorial(j) for j in range(m))
    return 1.0 - 1.0 / (r * p_eq + p_le)


# ---------------------------------------------------------------------------
# dense boundary p ~ c n^(-1/r): random-walk survival probability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZetaEstimate:
    """Monte Carlo estimate of the walk survival probability zeta(a, c).

    zeta: estimated P(walk never hits 0); pmf_tail: hitting-time frequencies
    zeta(a, c, k); walks: sample size.  zeta + sum(pmf_tail) = 1 exactly.
    """

    zeta: float
    pmf_tail: dict[int, float]
    walks: int
    truncated: int = 0

    def stderr(self) -> float:
        return math.sqrt(max(self.zeta * (1.0 - self.zeta), 0.0) / self.walks)


def zeta_estimate(a: int, c: float, r: int, walks: int, seed: int,
                  stream: int = 0, max_steps: int = 200_000) -> ZetaEstimate:
    """Estimate zeta(a, c) = P(T~ = infinity) for the inhomogeneous walk
    a + sum_{j<=k} (xi_j - 1), xi_k ~ Po(C(k-1, r-1) c^r) independent.

    A walk is scored as surviving once the step mean reaches 4 and its
    height exceeds 20 sqrt(k); past that point the extinction probability
    of the dominating branching process is far below Monte Carlo noise.
    """
    if a < r:
        raise ValueError(f"zeta_estimate requires a >= r (got a={a}, r={r}): "
                         "the limit walk dies deterministically")
    if c <= 0:
        raise ValueError("zeta_estimate requires c > 0")
    rng = derive_stream(seed, stream)
    heights = np.full(walks, float(a))
    alive = np.arange(walks)
    died: dict[int, int] = {}
    survived = 0
    truncated = 0
    k = 0
    while len(alive) > 0:
        k += 1
        lam = math.comb(k - 1, r - 1) * c ** r
        if lam > 0:
            steps = rng.poisson(lam, size=len(alive)).astype(float)
        else:
            steps = np.zeros(len(alive))
        h = heights[alive] + steps - 1.0
        heights[alive] = h
        dead = h <= 0.0
        n_dead = int(np.count_nonzero(dead))
        if n_dead:
            died[k] = died.get(k, 0) + n_dead
        if lam >= 4.0:
            escaped = (~dead) & (h > 20.0 * math.sqrt(k))
            survived += int(np.count_nonzero(escaped))
            alive = alive[~(dead | escaped)]
        else:
            alive = alive[~dead]
        if k >= max_steps:
            truncated = len(alive)
            survived += truncated
            break
    pmf = {k: v / walks for k, v in sorted(died.items())}
    return ZetaEstimate(zeta=survived / walks, pmf_tail=pmf, walks=walks,
                        truncated=truncated)


# ---------------------------------------------------------------------------
# aggregated reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoryReport:
    """Every threshold/limit quantity defined for an (n, p, a, r) instance.

    Fields are None when the defining inputs are absent (p_c needs a) or the
    regime excludes them (t_star subcritical only, tau_prediction
    supercritical only).
    """

    n: int
    r: int
    p: float | None = None
    a: int | None = None
    t_c: float | None = None
    a_c: float | None = None
    b_c: float | None = None
    t_c_star: float | None = None
    a_c_star: float | None = None
    p_c: float | None = None
    p_c_star: float | None = None
    t_star: float | None = None
    tau_prediction: float | None = None
    minima_differ: bool = False


def report(n: int, r: int, p: float | None = None, a: int | None = None) -> TheoryReport:
    """Assemble the full TheoryReport for whichever of (p, a) are given."""
    if p is None and a is None:
        raise ValueError("report needs p or a (or both)")
    vals: dict = {"n": n, "r": r, "p": p, "a": a}
    if p is not None and 0.0 < p < 1.0:
        t_c, a_c, b_c = thresholds(n, p, r)
        rc = refined_critical(n, p, r)
        vals.update(t_c=t_c, a_c=a_c, b_c=b_c, t_c_star=rc.t_c_star,
                    a_c_star=rc.a_c_star, minima_differ=rc.minima_differ)
        if a is not None and a >= 1:
            if a <= rc.a_c_star:
                vals["t_star"] = t_star(n, p, a, r)
            else:
                try:
                    vals["tau_prediction"] = tau_prediction(n, p, a, r)
                except ValueError:
                    pass
    if a is not None and a >= 1:
        vals["p_c"] = pc(n, a, r)
        vals["p_c_star"] = pcx(n, a, r)
    return TheoryReport(**vals)


@dataclass(frozen=True)
class BoundaryReport:
    """Sparse-regime fixed point summary at scaled coordinates (c, theta)."""

    c: float
    theta: float
    r: int
    c_r: float
    roots: tuple[float, ...]
    x0: float
    x1: float
    theta_cc: float
    theta_c: float | None = None
    theta_cq: float | None = None
    x_fold_low: float | None = None
    x_fold_high: float | None = None


def boundary_report(c: float, theta: float, r: int) -> BoundaryReport:
    """Roots of f(., c, theta) plus the fold structure when c > c_r."""
    roots = boundary_roots(c, theta, r)
    ccr = c_r(r)
    fold = theta_fold(c, r) if c > ccr else None
    return BoundaryReport(
        c=c, theta=theta, r=r, c_r=ccr, roots=tuple(roots),
        x0=roots[0], x1=roots[-1], theta_cc=theta_cc(r),
        theta_c=None if fold is None else fold.theta_c,
        theta_cq=None if fold is None else fold.theta_cq,
        x_fold_low=None if fold is None else fold.x_fold_low,
        x_fold_high=None if fold is None else fold.x_fold_high,
    )

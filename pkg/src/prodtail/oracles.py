"""Independent reference computations used to certify the convolution engine.

Nothing here imports the engine: the fixed-grid enclosure uses closed cells
(u, v] on a geometric grid chosen by its own scan, the Monte Carlo estimator
samples by inversion, and the exp-exp reference is a double-exponential
quadrature of the defining integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .errors import DomainError

Z99 = float(norm.ppf(0.995))


# ---------------------------------------------------------------------------
# sampling


def sample(V, n, rng, iterations=64):
    """Inverse-transform draws X = inf{x : V(x) <= U}, U uniform on (0, 1)."""
    log_u = np.log(rng.random(n))
    hi = np.ones(n)
    lo = np.zeros(n)
    for _ in range(2100):
        above = V.tail_log(hi) > log_u
        if not above.any():
            break
        lo[above] = hi[above]
        hi[above] *= 2.0
    for _ in range(iterations):
        geometric = (lo > 0) & (hi > 4 * lo)
        mid = np.where(geometric, np.sqrt(lo * hi), 0.5 * (lo + hi))
        above = V.tail_log(mid) > log_u
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return hi


@dataclass
class McEstimate:
    """Tail frequency with a 99% Wilson score interval."""

    p: float
    ci_lo: float
    ci_hi: float
    n: int
    seed: int

    def contains(self, p):
        return self.ci_lo <= p <= self.ci_hi

    def to_dict(self):
        return dict(self.__dict__)


def wilson_interval(k, n, z=Z99):
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(centre - half, 0.0)
    hi = 1.0 if k == n else min(centre + half, 1.0)
    return lo, hi


_SAMPLE_CACHE = {}


def cached_sample(V, n, seed, role):
    """Draws of V from the Philox stream (seed, role); role 0 feeds X and role 1 feeds Y."""
    key = (id(V), n, seed, role)
    if key not in _SAMPLE_CACHE:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, role])))
        _SAMPLE_CACHE[key] = (V, sample(V, n, rng))
    return _SAMPLE_CACHE[key][1]


def _products(F, G, n, seed):
    key = ("product", id(F), id(G), n, seed)
    if key not in _SAMPLE_CACHE:
        _SAMPLE_CACHE[key] = ((F, G), np.sort(cached_sample(F, n, seed, 0) * cached_sample(G, n, seed, 1)))
    return _SAMPLE_CACHE[key][1]


def clear_cache():
    _SAMPLE_CACHE.clear()


def mc_product_tail(F, G, x, n=1_000_000, seed=0):
    """Monte Carlo estimate of P(XY > x); one sample set is reused across x."""
    prod = _products(F, G, int(n), int(seed))
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    counts = n - np.searchsorted(prod, xs, side="right")
    out = []
    for k in counts:
        lo, hi = wilson_interval(int(k), n)
        out.append(McEstimate(int(k) / n, lo, hi, int(n), int(seed)))
    return out[0] if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# fixed-grid Riemann-Stieltjes enclosure


@dataclass
class GridBracket:
    """Log-domain lower and upper sums."""

    lo: float
    hi: float
    cells: int

    @property
    def mid(self):
        if self.lo == -np.inf:
            return self.hi
        return float(np.logaddexp(self.lo, self.hi) - math.log(2.0))

    def contains(self, p):
        return self.lo <= p <= self.hi

    def to_dict(self):
        return dict(self.__dict__)


def _lse(v):
    v = np.asarray(v, dtype=float)
    if v.size == 0 or np.all(v == -np.inf):
        return -np.inf
    return float(logsumexp(v))


def _mass_log(G, u, v):
    """log(G(u) - G(v)) elementwise, -inf when the cell carries no mass."""
    a, b = np.asarray(G.tail_log(u), dtype=float), np.asarray(G.tail_log(v), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a + np.log1p(-np.exp(b - a))
    return np.where((a == -np.inf) | (b >= a), -np.inf, out)


def _scan_band(F, G, x, drop):
    """Powers of two bounding where F(x/y) G(y) is within e**-drop of its max."""
    k = np.arange(-1000, 1001, dtype=float)
    y = np.exp2(k)
    with np.errstate(over="ignore", invalid="ignore"):
        z = x / y
        fz = np.where(np.isfinite(z), F.tail_log(np.where(np.isfinite(z), z, 0.0)), -np.inf)
        gy = np.asarray(G.tail_log(y), dtype=float)
    m = fz + gy
    peak = float(m.max())
    if peak == -np.inf:
        return None
    # inner cut: above it the bound F(x/y_lo) is already negligible
    low = np.nonzero(fz >= peak - drop)[0]
    high = np.nonzero(gy >= peak - drop)[0]
    i0 = max(int(low[0]) - 1, 0)
    i1 = min(int(high[-1]) + 1, k.size - 1)
    return float(y[i0]), float(y[max(i1, i0 + 1)])


def fixed_grid_stieltjes(F, G, x, cells=100_000, drop=60.0):
    """Bracket on log P(XY > x) from lower/upper sums on closed cells (u, v]."""
    if not x > 0:
        raise DomainError("x must be positive")
    band = _scan_band(F, G, float(x), drop)
    if band is None:
        return GridBracket(-np.inf, -np.inf, 0)
    y0, yN = band
    ys = np.geomspace(y0, yN, cells + 1)
    u, v = ys[:-1], ys[1:]
    w = _mass_log(G, u, v)
    f_lo = np.asarray(F.tail_log(x / u), dtype=float)
    f_hi = np.asarray(F.tail_log(x / v), dtype=float)
    # inner piece (0, y0] and outer piece (yN, inf)
    g0 = float(G.tail_log(y0))
    inner_hi = float(F.tail_log(x / y0)) + math.log(-math.expm1(g0)) if g0 < 0 else -np.inf
    g_end = float(G.tail_log(yN))
    outer_lo = float(F.tail_log(x / yN)) + g_end
    lo = _lse(np.concatenate([f_lo + w, [outer_lo]]))
    hi = _lse(np.concatenate([f_hi + w, [inner_hi, g_end]]))
    return GridBracket(lo, hi, cells)


def fixed_grid_sum_conv2(V, x, cells=100_000):
    """Bracket on log P(X1 + X2 > x) for X1, X2 iid with tail V."""
    if not x > 0:
        raise DomainError("x must be positive")
    ys = np.linspace(0.0, x, cells + 1)
    u, v = ys[:-1], ys[1:]
    w = _mass_log(V, u, v)
    lo_terms = np.asarray(V.tail_log(x - u), dtype=float) + w
    hi_terms = np.asarray(V.tail_log(x - v), dtype=float) + w
    vx = float(V.tail_log(x))
    v0 = float(V.tail_log(0.0))
    at_zero = vx + math.log(-math.expm1(v0)) if v0 < 0 else -np.inf
    lo = _lse(np.concatenate([lo_terms, [vx, at_zero]]))
    hi = _lse(np.concatenate([hi_terms, [vx, at_zero]]))
    return GridBracket(lo, hi, cells)


# ---------------------------------------------------------------------------
# exp-exp product: double-exponential quadrature


def expexp_closed_form(x, tol=1e-15, max_halvings=12):
    """log P(XY > x) for X, Y iid Exp(1), i.e. log of the integral of exp(-x/y - y).

    Exp-sinh substitution y = exp(pi/2 sinh s) with trapezoid steps halved
    until successive sums agree to ``tol``.  Equals 2 sqrt(x) K1(2 sqrt(x)).
    """
    if not x > 0:
        raise DomainError("x must be positive")
    half_pi = math.pi / 2

    def trapezoid(h, T=6.0):
        s = np.arange(-T, T + h / 2, h)
        ly = half_pi * np.sinh(s)
        with np.errstate(over="ignore"):
            y = np.exp(ly)
            terms = -x * np.exp(-ly) - y + ly + np.log(half_pi * np.cosh(s))
        return float(logsumexp(terms[np.isfinite(terms)])) + math.log(h)

    h = 0.25
    prev = trapezoid(h)
    for _ in range(max_halvings):
        h /= 2
        cur = trapezoid(h)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    return prev

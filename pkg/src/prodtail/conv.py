"""Two-sided log-domain enclosures of product and sum convolution tails.

Product tail:  P(XY > x) = sum_atoms F(x/d) G{d} + int F(x/y) G_c(dy).
Because y -> F(x/y) is non-decreasing, each open cell (u, v) of a partition
contributes between F((x/u)-) * G_c(u, v) and F(x/v) * G_c(u, v).  Cells are
refined where their gap dominates; the band of y is widened the same way when
the mass below or above it dominates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .logmath import log1m_exp, log_sub, log_sum

DEFAULT_TOL = 1e-6
DEFAULT_BUDGET = 1_000_000
LOG_PAD = 1e-14  # outward padding for float rounding, relative to max(1, |log value|)
_SEED_CELLS = 64
_IMAGE_CAP = 1 << 16
_MIN_REL_WIDTH = 1e-12


@dataclass(frozen=True)
class LogBracket:
    lo: float
    hi: float
    converged: bool = True
    evaluations: int = 0

    @property
    def width(self):
        if self.hi == -math.inf:
            return 0.0
        return self.hi - self.lo

    @property
    def mid(self):
        if self.hi == -math.inf:
            return -math.inf
        return 0.5 * (self.lo + self.hi)

    def contains(self, p):
        lp = math.log(p) if p > 0 else -math.inf
        return self.lo <= lp <= self.hi

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def to_dict(self):
        return {"log_lo": self.lo, "log_hi": self.hi, "converged": self.converged, "evaluations": self.evaluations}


@dataclass(frozen=True)
class Band:
    b1: float
    b2: float
    x: float
    mass_outside_log: float
    achieved_fraction: float
    converged: bool = True

    @property
    def y_lo(self):
        return self.b1

    @property
    def y_hi(self):
        return self.x / self.b2

    def contains(self, y):
        return self.b1 < y <= self.x / self.b2


def _padded(lo, hi, converged, evaluations):
    pad = LOG_PAD * max(1.0, abs(lo))
    return LogBracket(lo - pad, hi + pad, converged, evaluations)


def _check_pair(F, G, x):
    if not (F.validated and G.validated):
        from .errors import UsageError

        raise UsageError("product tails need validated distributions")
    if not x > 0:
        raise DomainError("product tail needs x > 0")


def _pick_split(gaps, splittable):
    """Cells whose gap is at least a quarter of the mean gap (tol-independent)."""
    finite = gaps > -np.inf
    if not np.any(finite & splittable):
        return np.zeros_like(splittable)
    total = log_sum([gaps[finite]])
    threshold = total - math.log(4.0 * max(1, int(np.sum(finite))))
    return (gaps >= threshold) & splittable & finite


class _ProductEnclosure:
    def __init__(self, F, G, x):
        self.F, self.G, self.x = F, G, float(x)
        s = math.sqrt(self.x)
        self.y_lo = min(1.0, s) / 8.0
        self.y_hi = max(1.0, s) * 8.0
        self.lo_steps = 0
        self.hi_steps = 0
        self.evaluations = 0
        self.b = self._seed(self.y_lo, self.y_hi, _SEED_CELLS, include_hi=True)
        self.atom_loc, self.atom_lm = G.atoms(self.y_lo, self.y_hi)
        self.atom_terms = self._atom_terms(self.atom_loc, self.atom_lm)
        self.cell_lo, self.cell_hi = self._cells(self.b)

    def _seed(self, a, c, n, include_hi):
        pts = [np.geomspace(a, c, n + 1)]
        locs, _ = self.G.atoms(a, c)
        pts.append(locs)
        # jumps of F show up as jumps of y -> F(x/y) at y = x/d
        dl, _ = self.F.atoms(self.x / c, self.x / a, limit=_IMAGE_CAP)
        pts.append(self.x / dl)
        b = np.unique(np.concatenate(pts))
        b = b[(b >= a) & (b <= c)]
        return b if include_hi else b[b < c]

    def _atom_terms(self, loc, lm):
        if loc.size == 0:
            return np.empty(0)
        return self.F._tail_log(self.x / loc) + lm

    def _cells(self, b):
        u, v = b[:-1], b[1:]
        self.evaluations += u.size
        mass = log_sub(self.G._tail_log(u), self.G._tail_log_left(v))
        mass = np.atleast_1d(mass)
        with np.errstate(invalid="ignore"):
            lo = self.F._tail_log_left(self.x / u) + mass
            hi = self.F._tail_log(self.x / v) + mass
        lo = np.where(mass == -np.inf, -np.inf, lo)
        hi = np.where(mass == -np.inf, -np.inf, hi)
        return lo, hi

    def _ends(self):
        F, G, x = self.F, self.G, self.x
        g_lo = float(G._tail_log(np.array([self.y_lo]))[0])
        inner_hi = float(F._tail_log(np.array([x / self.y_lo]))[0]) + float(log1m_exp(g_lo))
        g_hi = float(G._tail_log(np.array([self.y_hi]))[0])
        outer_lo = float(F._tail_log_left(np.array([x / self.y_hi]))[0]) + g_hi if g_hi > -np.inf else -np.inf
        return inner_hi, outer_lo, g_hi

    def totals(self):
        inner_hi, outer_lo, outer_hi = self._ends()
        lo = log_sum([self.cell_lo, self.atom_terms, [outer_lo]])
        hi = log_sum([self.cell_hi, self.atom_terms, [outer_hi, inner_hi]])
        return lo, hi, inner_hi, outer_lo, outer_hi

    def _extend_low(self):
        self.lo_steps += 1
        k = min(2 ** (self.lo_steps - 1), 64)
        new_lo = self.y_lo / 2.0**k
        nb = self._seed(new_lo, self.y_lo, k, include_hi=False)
        locs, lms = self.G.atoms(new_lo, self.y_lo)
        lo, hi = self._cells(np.append(nb, self.y_lo))
        self.b = np.concatenate([nb, self.b])
        self.cell_lo = np.concatenate([lo, self.cell_lo])
        self.cell_hi = np.concatenate([hi, self.cell_hi])
        self.atom_loc = np.concatenate([locs, self.atom_loc])
        self.atom_terms = np.concatenate([self._atom_terms(locs, lms), self.atom_terms])
        self.y_lo = new_lo

    def _extend_high(self):
        self.hi_steps += 1
        k = min(2 ** (self.hi_steps - 1), 64)
        new_hi = self.y_hi * 2.0**k
        nb = self._seed(self.y_hi, new_hi, k, include_hi=True)[1:]
        locs, lms = self.G.atoms(self.y_hi, new_hi)
        lo, hi = self._cells(np.concatenate([[self.y_hi], nb]))
        self.b = np.concatenate([self.b, nb])
        self.cell_lo = np.concatenate([self.cell_lo, lo])
        self.cell_hi = np.concatenate([self.cell_hi, hi])
        self.atom_loc = np.concatenate([self.atom_loc, locs])
        self.atom_terms = np.concatenate([self.atom_terms, self._atom_terms(locs, lms)])
        self.y_hi = new_hi

    def refine(self, inner_hi, outer_lo, outer_hi):
        gaps = np.atleast_1d(log_sub(self.cell_hi, self.cell_lo))
        u, v = self.b[:-1], self.b[1:]
        splittable = v > u * (1 + _MIN_REL_WIDTH)
        inner_gap = inner_hi
        outer_gap = float(log_sub(outer_hi, outer_lo))
        all_gaps = np.concatenate([gaps, [inner_gap, outer_gap]])
        can = np.concatenate([splittable, [self.y_lo > 1e-300, self.y_hi < 1e300]])
        pick = _pick_split(all_gaps, can)
        if not np.any(pick):
            return False
        sel = np.nonzero(pick[:-2])[0]
        if sel.size:
            mids = np.sqrt(u[sel] * v[sel])
            left = np.column_stack([u[sel], mids]).ravel()
            right = np.column_stack([mids, v[sel]]).ravel()
            self.evaluations += 2 * sel.size
            mass = np.atleast_1d(log_sub(self.G._tail_log(left), self.G._tail_log_left(right)))
            with np.errstate(invalid="ignore"):
                c_lo = np.where(mass == -np.inf, -np.inf, self.F._tail_log_left(self.x / left) + mass)
                c_hi = np.where(mass == -np.inf, -np.inf, self.F._tail_log(self.x / right) + mass)
            c_lo = c_lo.reshape(-1, 2)
            c_hi = c_hi.reshape(-1, 2)
            self.cell_lo[sel] = c_lo[:, 0]
            self.cell_hi[sel] = c_hi[:, 0]
            self.cell_lo = np.insert(self.cell_lo, sel + 1, c_lo[:, 1])
            self.cell_hi = np.insert(self.cell_hi, sel + 1, c_hi[:, 1])
            self.b = np.insert(self.b, sel + 1, mids)
        if pick[-2]:
            self._extend_low()
        if pick[-1]:
            self._extend_high()
        return True


def product_tail(F, G, x, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Enclosure of log P(XY > x) for independent X ~ F, Y ~ G.

    ``tol`` is the target log-width (relative error of the probability).  When
    ``budget`` cell evaluations run out the best bracket so far is returned with
    ``converged=False``.
    """
    _check_pair(F, G, x)
    if not 0 < tol < 1:
        raise DomainError("tol must lie in (0, 1)")
    enc = _ProductEnclosure(F, G, x)
    # P(XY > x) >= P(Y > 1) P(X > x)
    floor = float(G._tail_log(np.array([1.0]))[0] + F._tail_log(np.array([float(x)]))[0])
    converged = False
    while True:
        lo, hi, inner_hi, outer_lo, outer_hi = enc.totals()
        lo = max(lo, floor)
        if hi == -np.inf:
            return LogBracket(-np.inf, -np.inf, True, enc.evaluations)
        if hi - lo <= tol - 2 * LOG_PAD * max(1.0, abs(lo)):
            converged = True
            break
        if enc.evaluations >= budget or not enc.refine(inner_hi, outer_lo, outer_hi):
            break
    return _padded(lo, hi, converged, enc.evaluations)


def product_tail_grid(F, G, grid, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, workers=None):
    """Brackets at every grid point, in input order; a failing point yields its exception."""
    grid = [float(x) for x in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])) or (grid and grid[0] <= 0):
        raise DomainError("grid must be positive and strictly increasing")

    def one(x):
        try:
            return product_tail(F, G, x, tol, budget)
        except Exception as exc:  # per-point failure, batch continues
            return exc

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(x) for x in grid]
    return list(zip(grid, results))


def truncation_band(F, G, x, eps, budget=DEFAULT_BUDGET, max_steps=200):
    """Concrete b1, b2 with the y-mass outside (b1, x/b2] below eps * H(x) lower bound.

    Starting from b1 = b2 = x**(1/3), b1 is halved while F(x/b1) G[0, b1]
    is too large and b2 is halved while G(x/b2) is too large.
    """
    _check_pair(F, G, x)
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    ref = product_tail(F, G, x, tol=eps / 4, budget=budget)
    allowed = math.log(eps) + ref.lo
    half = allowed - math.log(2.0)
    b1 = b2 = x ** (1.0 / 3.0)

    def inner(b1):
        g = float(G._tail_log(np.array([b1]))[0])
        return float(F._tail_log(np.array([x / b1]))[0]) + float(log1m_exp(g))

    def outer(b2):
        return float(G._tail_log(np.array([x / b2]))[0])

    steps = 0
    while inner(b1) > half and steps < max_steps and b1 > 1e-300:
        b1 /= 2.0
        steps += 1
    while outer(b2) > half and steps < 2 * max_steps and x / b2 < 1e300:
        b2 /= 2.0
        steps += 1
    out = log_sum([[inner(b1), outer(b2)]])
    achieved = math.exp(out - ref.lo) if ref.lo > -np.inf else math.inf
    ok = out <= allowed + 1e-12 and b1 < x / b2
    return Band(b1, b2, float(x), out, achieved, ok)


def sum_conv2_tail(V, x, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Enclosure of log P(X1 + X2 > x) = log[V(x) + int_[0,x] V(x - y) V(dy)]."""
    if not V.validated:
        from .errors import UsageError

        raise UsageError("sum convolution needs a validated distribution")
    if not x > 0:
        raise DomainError("sum convolution tail needs x > 0")
    x = float(x)
    locs, lms = V.atoms(0.0, x)
    dl, _ = V.atoms(0.0, x, limit=_IMAGE_CAP)
    b = np.unique(np.concatenate([np.linspace(0.0, x, _SEED_CELLS + 1), locs, x - dl]))
    b = b[(b >= 0) & (b <= x)]
    v_x = float(V._tail_log(np.array([x]))[0])
    v_0 = float(V._tail_log(np.array([0.0]))[0])
    fixed = [v_x, v_x + float(log1m_exp(v_0))]
    atom_terms = V._tail_log(np.maximum(x - locs, 0.0)) + lms if locs.size else np.empty(0)
    evaluations = 0

    def cells(u, v):
        mass = np.atleast_1d(log_sub(V._tail_log(u), V._tail_log_left(v)))
        lo = np.where(mass == -np.inf, -np.inf, V._tail_log_left(np.maximum(x - u, 0.0)) + mass)
        hi = np.where(mass == -np.inf, -np.inf, V._tail_log(np.maximum(x - v, 0.0)) + mass)
        return lo, hi

    c_lo, c_hi = cells(b[:-1], b[1:])
    evaluations += b.size - 1
    converged = False
    while True:
        lo = log_sum([c_lo, atom_terms, fixed])
        hi = log_sum([c_hi, atom_terms, fixed])
        if hi == -np.inf:
            return LogBracket(-np.inf, -np.inf, True, evaluations)
        if hi - lo <= tol - 2 * LOG_PAD * max(1.0, abs(lo)):
            converged = True
            break
        if evaluations >= budget:
            break
        u, v = b[:-1], b[1:]
        pick = _pick_split(np.atleast_1d(log_sub(c_hi, c_lo)), v - u > _MIN_REL_WIDTH * x)
        sel = np.nonzero(pick)[0]
        if sel.size == 0:
            break
        mids = 0.5 * (u[sel] + v[sel])
        left = np.column_stack([u[sel], mids]).ravel()
        right = np.column_stack([mids, v[sel]]).ravel()
        n_lo, n_hi = cells(left, right)
        evaluations += left.size
        n_lo, n_hi = n_lo.reshape(-1, 2), n_hi.reshape(-1, 2)
        c_lo[sel], c_hi[sel] = n_lo[:, 0], n_hi[:, 0]
        c_lo = np.insert(c_lo, sel + 1, n_lo[:, 1])
        c_hi = np.insert(c_hi, sel + 1, n_hi[:, 1])
        b = np.insert(b, sel + 1, mids)
    return _padded(lo, hi, converged, evaluations)


class ProductTail:
    """Tail of H = law(XY) exposed like a distribution, backed by cached brackets."""

    def __init__(self, F, G, tol=1e-4, budget=DEFAULT_BUDGET):
        self.F, self.G, self.tol, self.budget = F, G, tol, budget
        self.name = f"H({F.name} x {G.name})"
        self._cache = {}

    def bracket(self, x):
        x = float(x)
        if x not in self._cache:
            self._cache[x] = product_tail(self.F, self.G, x, self.tol, self.budget)
        return self._cache[x]

    def tail_log(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.array([self.bracket(v).mid if v > 0 else 0.0 for v in np.atleast_1d(arr)])
        return float(out[0]) if arr.ndim == 0 else out

    def tail_log_bounds(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        lo = np.array([self.bracket(v).lo if v > 0 else 0.0 for v in arr])
        hi = np.array([self.bracket(v).hi if v > 0 else 0.0 for v in arr])
        return lo, hi

    def critical_points(self, t, lo, hi, near=None):
        return np.empty(0)

"""Finite-grid estimates of shift-ratio limits, decay exponents and class verdicts.

Everything here works on any object exposing ``tail_log(x)`` (a validated
``Distribution`` or a ``ProductTail``).  Limits are read off tail windows of
a geometric grid, so every verdict is evidence, never proof.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .conv import ProductTail
from .errors import DomainError
from .logmath import log_sub

FOR, AGAINST, INCONCLUSIVE = "evidence-for", "evidence-against", "inconclusive"

# a trend counts as moving when a window mean shifts by more than log 1.5,
# and as flat when it moves by less than log 1.05
MOVE = math.log(1.5)
FLAT = math.log(1.05)

CAVEAT = (
    "Limits are estimated from extremes over the top window of a finite grid. "
    "A sup or inf reached beyond the grid, or on a sequence the grid misses, is invisible here; "
    "treat every verdict as numerical evidence about the sampled range only."
)


def geometric_grid(lo=10.0, hi=1e6, n=400):
    return np.geomspace(lo, hi, n)


def _windows(x, fraction=0.25):
    """Masks of the top and the preceding log-x window of a grid."""
    lx = np.log(x)
    a, b = lx.min(), lx.max()
    top = lx >= b - fraction * (b - a)
    prior = (lx >= b - 2 * fraction * (b - a)) & ~top
    return top, prior


def _finite_mean(v):
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return math.nan
    if np.all(v == -np.inf):
        return -math.inf
    if np.any(v == np.inf):
        return math.inf
    return float(np.mean(v[np.isfinite(v)]))


def trend(x, y, fraction=0.25):
    """Direction of y over the grid tail: compares the last two window means."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    top, prior = _windows(x, fraction)
    now, before = _finite_mean(y[top]), _finite_mean(y[prior])
    if math.isnan(now) or math.isnan(before):
        return "inconclusive", math.nan
    if now == -math.inf:
        return "decreasing", -math.inf
    if now == math.inf:
        return "increasing", math.inf
    if before == -math.inf:
        return "increasing", math.inf
    delta = now - before
    if delta < -MOVE:
        return "decreasing", delta
    if delta > MOVE:
        return "increasing", delta
    if abs(delta) <= FLAT:
        return "flat", delta
    return "inconclusive", delta


# ---------------------------------------------------------------------------
# shift ratios


def shift_ratio(V, t, x):
    """log V(x - t) - log V(x); scalar or vectorized over x."""
    arr = np.asarray(x, dtype=float)
    if t < 0:
        raise DomainError("shift t must be >= 0")
    if np.any(arr <= t) and t > 0:
        raise DomainError(f"shift ratio needs t < x (t={t})")
    if t == 0:
        return 0.0 if arr.ndim == 0 else np.zeros(arr.shape)
    with np.errstate(invalid="ignore"):
        out = np.asarray(V.tail_log(arr - t)) - np.asarray(V.tail_log(arr))
    # both tails zero: the ratio is undefined, report it as unbounded
    out = np.where(np.isnan(out), np.inf, out)
    return float(out) if arr.ndim == 0 else out


@dataclass
class IndicatorSeries:
    """Shift ratios at lag t over a grid, with running window extremes (log domain)."""

    t: float
    x: np.ndarray
    log_ratio: np.ndarray
    K: int
    running_sup: np.ndarray
    running_inf: np.ndarray
    prior_sup: float
    prior_inf: float
    flags: list = field(default_factory=list)

    @property
    def tail_sup(self):
        return float(self.running_sup[-1])

    @property
    def tail_inf(self):
        return float(self.running_inf[-1])

    @property
    def c_star(self):
        return math.exp(min(self.tail_sup, 700.0)) if self.tail_sup < 700 else math.inf

    @property
    def c_substar(self):
        return math.exp(min(self.tail_inf, 700.0)) if self.tail_inf < 700 else math.inf

    def to_dict(self):
        return {
            "t": self.t,
            "K": self.K,
            "c_star": self.c_star,
            "c_substar": self.c_substar,
            "tail_sup_log": self.tail_sup,
            "tail_inf_log": self.tail_inf,
            "prior_sup_log": self.prior_sup,
            "prior_inf_log": self.prior_inf,
            "flags": list(self.flags),
            "points": [[float(a), float(b)] for a, b in zip(self.x, self.log_ratio)],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["x", "ratio"])
        with np.errstate(over="ignore"):
            ratios = np.exp(self.log_ratio)
        for a, r in zip(self.x, ratios):
            w.writerow([repr(float(a)), repr(float(r))])
        return buf.getvalue()


def augmented_grid(V, t, grid):
    """Grid plus the construction's critical points inside its range."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = float(grid.min()), float(grid.max())
    crit = getattr(V, "critical_points", None)
    extra = np.asarray(crit(t, lo, hi, near=grid), dtype=float) if crit is not None else np.empty(0)
    return np.unique(np.concatenate([grid, extra]))


def c_star_series(V, t, grid=None, fraction=0.25, augment=True):
    grid = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    if grid.min() <= t:
        raise DomainError("grid must start above the shift t")
    x = augmented_grid(V, t, grid) if augment else grid
    lr = np.maximum(shift_ratio(V, t, x), 0.0) if t > 0 else np.zeros(x.size)
    top, prior = _windows(x, fraction)
    K = max(int(top.sum()), 1)
    if x.size >= K:
        win = sliding_window_view(lr, K)
        head_sup = np.maximum.accumulate(lr[: K - 1]) if K > 1 else np.empty(0)
        head_inf = np.minimum.accumulate(lr[: K - 1]) if K > 1 else np.empty(0)
        run_sup = np.concatenate([head_sup, win.max(axis=1)])
        run_inf = np.concatenate([head_inf, win.min(axis=1)])
    else:
        run_sup, run_inf = np.maximum.accumulate(lr), np.minimum.accumulate(lr)
    flags = []
    if K < 10:
        flags.append(f"sparse tail window ({K} points)")
    if not prior.any():
        flags.append("no prior window")
    psup = float(lr[prior].max()) if prior.any() else math.nan
    pinf = float(lr[prior].min()) if prior.any() else math.nan
    return IndicatorSeries(float(t), x, lr, K, run_sup, run_inf, psup, pinf, flags)


@dataclass
class ZeroShiftEstimate:
    """Intercepts at t = 0 of log C*(t) and log C_*(t) fitted as log c + kappa t."""

    c_star_0: float
    c_substar_0: float
    kappa_star: float
    kappa_substar: float
    residual_star: float
    residual_substar: float
    monotone: bool
    inconclusive: bool

    def __iter__(self):
        yield self.c_star_0
        yield self.c_substar_0

    def to_dict(self):
        return dict(self.__dict__)


def _fit_line(t, y):
    A = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def c_zero_extrapolate(series_by_t):
    if len(series_by_t) < 4:
        raise DomainError("t -> 0 extrapolation needs at least 4 shifts")
    ts = np.array(sorted(series_by_t), dtype=float)
    sups = np.array([series_by_t[t].tail_sup for t in ts])
    infs = np.array([series_by_t[t].tail_inf for t in ts])
    monotone = bool(np.all(np.diff(sups) >= -1e-9) and np.all(np.diff(infs) >= -1e-9))
    growing = any(series_by_t[t].tail_sup - series_by_t[t].prior_sup > MOVE for t in ts)
    finite = np.all(np.isfinite(sups)) and np.all(np.isfinite(infs))
    if not finite or growing:
        return ZeroShiftEstimate(math.inf, math.inf, math.nan, math.nan, math.nan, math.nan, monotone, True)
    a_s, k_s, r_s = _fit_line(ts, sups)
    a_i, k_i, r_i = _fit_line(ts, infs)
    # the ratio is >= 1, so an intercept below 0 is fit noise
    return ZeroShiftEstimate(
        math.exp(max(a_s, 0.0)), math.exp(max(a_i, 0.0)), k_s, k_i, r_s, r_i, monotone, not monotone
    )


# ---------------------------------------------------------------------------
# decay exponents and polynomial limits


@dataclass
class DecayExponentEstimate:
    alpha: float
    lo_hat: float
    hi_hat: float
    slope: float
    condition_1_2: str
    condition_1_3: str

    def to_dict(self):
        return dict(self.__dict__)


def decay_exponent(V, alpha, grid=None):
    """Extremes of -log V(x) / x**alpha over the top half of the grid.

    ``slope`` is the log-log slope of that quantity; a clearly negative slope
    means the ratio is still heading to 0 and the tail is heavier than
    exp(-c x**alpha).
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    grid = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size < 20:
        raise DomainError("decay exponent needs a grid of at least 20 points")
    half = grid[grid >= math.sqrt(grid.min() * grid.max())]
    with np.errstate(divide="ignore"):
        q = -np.asarray(V.tail_log(half), dtype=float) / half**alpha
    q = np.maximum(q, 0.0)
    lo_hat, hi_hat = float(q.min()), float(q.max())
    good = np.isfinite(q) & (q > 0)
    if good.sum() >= 2:
        slope = float(np.polyfit(np.log(half[good]), np.log(q[good]), 1)[0])
    else:
        slope = math.nan
    if 0 < lo_hat <= hi_hat < math.inf and abs(slope) < 0.2:
        c12 = FOR
    elif lo_hat == math.inf or slope <= -0.2 or slope >= 0.2:
        c12 = AGAINST
    else:
        c12 = INCONCLUSIVE
    if lo_hat > 0 and not slope <= -0.2:
        c13 = FOR
    elif slope <= -0.2 or lo_hat == 0:
        c13 = AGAINST
    else:
        c13 = INCONCLUSIVE
    return DecayExponentEstimate(float(alpha), lo_hat, hi_hat, slope, c12, c13)


def poly_limit_check(V, delta, grid=None):
    """Limit of x**delta V(x): 'to-infinity', 'to-zero', 'bounded' or 'inconclusive'."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    grid = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    y = delta * np.log(grid) + np.asarray(V.tail_log(grid), dtype=float)
    direction, _ = trend(grid, y)
    return {"increasing": "to-infinity", "decreasing": "to-zero", "flat": "bounded"}.get(direction, "inconclusive")


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassifyConfig:
    grid_lo: float = 10.0
    grid_hi: float = 1e6
    grid_n: int = 400
    t_list: tuple = (0.5, 0.25, 0.125, 0.0625)
    scales: tuple = (2.0, 4.0)
    tol: float = 0.01
    fraction: float = 0.25

    def grid(self):
        return geometric_grid(self.grid_lo, self.grid_hi, self.grid_n)


@dataclass
class ClassReport:
    verdicts: dict
    gamma_hat: float
    gamma_note: str
    heavy_light: str
    zero_shift: ZeroShiftEstimate
    lattice: dict | None = None
    caveat: str = CAVEAT

    def verdict(self, cls):
        return self.verdicts[cls]["verdict"]

    def to_dict(self):
        return {
            "verdicts": self.verdicts,
            "gamma_hat": self.gamma_hat,
            "gamma_note": self.gamma_note,
            "heavy_light": self.heavy_light,
            "zero_shift": self.zero_shift.to_dict(),
            "lattice": self.lattice,
            "caveat": self.caveat,
        }


def lattice_span(V, n_atoms=64, rtol=1e-9):
    """Common spacing of V's atoms when they sit on a lattice, else None."""
    atoms = getattr(V, "atoms", None)
    if atoms is None:
        return None
    locs, _ = atoms(0.0, np.inf, limit=n_atoms)
    if locs.size < 2:
        return None
    span = float(np.min(np.diff(locs)))
    k = locs / span
    if np.all(np.abs(k - np.round(k)) <= rtol * np.maximum(k, 1.0)):
        return span
    steps = np.diff(locs) / span
    if np.all(np.abs(steps - np.round(steps)) <= rtol * np.maximum(steps, 1.0)):
        return span
    return None


def _gamma_fit(series, tol):
    ts = np.array(sorted(series), dtype=float)
    mids = np.array([0.5 * (series[t].tail_sup + series[t].tail_inf) for t in ts])
    spreads = np.array([series[t].tail_sup - series[t].tail_inf for t in ts])
    prior_spreads = np.array([series[t].prior_sup - series[t].prior_inf for t in ts])
    if not np.all(np.isfinite(mids)):
        return math.nan, AGAINST, {"spreads": spreads.tolist()}
    # ratios behave like exp(gamma t): fit a line through the origin
    gamma = float(np.dot(ts, mids) / np.dot(ts, ts))
    resid = mids - gamma * ts
    eps = math.log1p(tol)
    settled = np.all(spreads <= eps) and np.all(np.abs(resid) <= eps)
    stuck = np.any((spreads > eps) & ~(spreads < 0.5 * np.nan_to_num(prior_spreads, nan=np.inf)))
    verdict = FOR if settled else AGAINST if stuck or np.any(np.abs(resid) > 4 * eps) else INCONCLUSIVE
    return gamma, verdict, {"spreads": spreads.tolist(), "residuals": resid.tolist(), "t": ts.tolist()}


def dominated_variation_check(V, grid=None, scales=(2.0, 4.0), fraction=0.25):
    """Whether log V(s x) - log V(x) stays bounded below over the grid tail, per scale s."""
    grid = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    top, prior = _windows(grid, fraction)
    info, votes, prev_min = {}, [], None
    base = np.asarray(V.tail_log(grid), dtype=float)
    for s in sorted(scales):
        with np.errstate(invalid="ignore"):
            r = np.asarray(V.tail_log(s * grid), dtype=float) - base
        r = np.where(np.isnan(r), -np.inf, r)
        m_now = float(r[top].min())
        m_prev = float(r[prior].min()) if prior.any() else math.nan
        if m_now == -math.inf or m_now < m_prev - MOVE:
            votes.append(AGAINST)
        elif m_now >= m_prev - FLAT:
            votes.append(FOR)
        else:
            votes.append(INCONCLUSIVE)
        monotone = prev_min is None or m_now <= prev_min + 1e-12
        prev_min = m_now
        info[str(s)] = {"min_log_ratio": m_now, "prior_min_log_ratio": m_prev, "monotone_in_scale": monotone}
    verdict = AGAINST if AGAINST in votes else FOR if all(v == FOR for v in votes) else INCONCLUSIVE
    return verdict, info


def classify(V, cfg=None):
    cfg = cfg or ClassifyConfig()
    grid = cfg.grid()
    series = {float(t): c_star_series(V, t, grid, cfg.fraction) for t in cfg.t_list}
    zero = c_zero_extrapolate(series)
    eps = math.log1p(cfg.tol)
    verdicts = {}

    # L(gamma)
    gamma, v_lg, info = _gamma_fit(series, cfg.tol)
    verdicts["L(gamma)"] = {"verdict": v_lg, "gamma_hat": gamma, **info}

    # L: every tested shift ratio settles at 1
    sups = {t: s.tail_sup for t, s in series.items()}
    if all(s <= eps for s in sups.values()):
        v_l = FOR
    elif any(s.tail_sup > eps and not s.tail_sup < 0.5 * s.prior_sup for s in series.values()):
        v_l = AGAINST
    else:
        v_l = INCONCLUSIVE
    verdicts["L"] = {
        "verdict": v_l,
        "c_star": {str(t): s.c_star for t, s in series.items()},
        "c_substar": {str(t): s.c_substar for t, s in series.items()},
    }

    # OL: window sups stay bounded
    growth = {t: (s.tail_sup - s.prior_sup) for t, s in series.items()}
    g = [v for v in growth.values() if not math.isnan(v)]
    if any(math.isinf(s) for s in sups.values()) or any(v > MOVE for v in g):
        v_ol = AGAINST
    elif g and all(v <= eps for v in g):
        v_ol = FOR
    else:
        v_ol = INCONCLUSIVE
    verdicts["OL"] = {"verdict": v_ol, "sup_growth": {str(t): v for t, v in growth.items()}}

    v_d, d_info = dominated_variation_check(V, grid, cfg.scales, cfg.fraction)
    verdicts["D"] = {"verdict": v_d, "scales": d_info}

    # class inclusions: L and D both sit inside OL
    if FOR in (v_l, v_d) and verdicts["OL"]["verdict"] != FOR:
        verdicts["OL"]["verdict"] = FOR
        verdicts["OL"]["forced_by"] = "L" if v_l == FOR else "D"

    de = decay_exponent(V, 1.0, grid)
    heavy = "heavy" if (de.slope <= -0.2 or de.hi_hat == 0) else "light"

    lattice = None
    span = lattice_span(V)
    if span is not None and span < grid.min():
        lat_series = {float(k * span): c_star_series(V, k * span, grid, cfg.fraction) for k in (1, 2)}
        lg, lv, linfo = _gamma_fit(lat_series, cfg.tol)
        lattice = {
            "span": span,
            "gamma_hat": lg,
            "verdict": lv,
            "note": "atoms sit on a lattice; L(gamma) restricted to shifts that are multiples of the span",
            **linfo,
        }
    note = "exact only for shifts off the atom lattice" if span is not None else "least-squares slope of window mid log-ratios in t"
    return ClassReport(verdicts, gamma, note, heavy, zero, lattice)


# ---------------------------------------------------------------------------
# hypothesis checks for products


@dataclass
class TrendReport:
    name: str
    verdict: str
    series: list

    def to_dict(self):
        return {"name": self.name, "verdict": self.verdict, "series": self.series}


def _series_entry(label, x, y):
    direction, delta = trend(x, y)
    return {
        "label": label,
        "trend": direction,
        "delta": delta,
        "points": [[float(a), float(b)] for a, b in zip(x, y)],
    }


def condition_A_check(F, G, grid=None, tol=1e-4, max_atoms=8, H=None):
    """Atom terms G(x/d) - G((x+1)/d) against H(x) for each atom d of F."""
    grid = geometric_grid(10.0, 1e4, 40) if grid is None else np.asarray(grid, dtype=float)
    locs, _ = F.atoms(0.0, np.inf, limit=max_atoms)
    locs = locs[locs > 0]
    if locs.size == 0:
        return TrendReport("condition A", "vacuous-pass", [])
    H = H or ProductTail(F, G, tol=tol)
    logH = np.asarray(H.tail_log(grid), dtype=float)
    entries, votes = [], []
    for d in locs:
        num = log_sub(np.asarray(G.tail_log(grid / d)), np.asarray(G.tail_log((grid + 1) / d)))
        e = _series_entry(f"d={d:g}", grid, np.asarray(num) - logH)
        entries.append(e)
        votes.append(FOR if e["trend"] == "decreasing" else AGAINST if e["trend"] in ("flat", "increasing") else INCONCLUSIVE)
    verdict = AGAINST if AGAINST in votes else FOR if all(v == FOR for v in votes) else INCONCLUSIVE
    return TrendReport("condition A", verdict, entries)


def tang_c_conditions(F, G, v, grid=None):
    """Ratio series for G(vx)/G(x) (needs v > 1) and G(vx)/F(x)."""
    if not v > 0:
        raise DomainError("v must be positive")
    grid = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    gv = np.asarray(G.tail_log(v * grid), dtype=float)
    out = {}
    if v > 1:
        e = _series_entry("G(vx)/G(x)", grid, gv - np.asarray(G.tail_log(grid), dtype=float))
        out["C1"] = {"verdict": FOR if e["trend"] == "decreasing" else AGAINST if e["trend"] in ("flat", "increasing") else INCONCLUSIVE, **e}
    with np.errstate(invalid="ignore"):
        y = gv - np.asarray(F.tail_log(grid), dtype=float)
    e = _series_entry("G(vx)/F(x)", grid, y)
    out["C2"] = {"verdict": FOR if e["trend"] == "decreasing" else AGAINST if e["trend"] in ("flat", "increasing") else INCONCLUSIVE, **e}
    return out

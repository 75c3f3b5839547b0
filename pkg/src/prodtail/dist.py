"""Nonnegative distributions as piecewise-analytic survival functions plus atoms.

A distribution answers three questions, all in the log domain and vectorized:
``tail_log(x)`` (right-continuous V(x) = P(X > x)), ``tail_log_left(x)``
(the pre-jump value V(x-)) and ``atoms(lo, hi)``.  ``segments(lo, hi)`` is the
structural view used for validation; the infinite constructions generate it
lazily.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ConstructionError, ConstructionWarning, DomainError, UsageError
from .forms import ExpPolynomial, LinearSurvival, Plateau, PowerLaw, SinModulated, TiltedProduct
from .logmath import log_sub

VIOLATION_KINDS = ("gap", "overlap", "increase", "jump-atom-mismatch", "tail-not-vanishing")

_JUMP_REL = 1e-12  # jumps smaller than this fraction of the tail count as continuity
_ATOM_LOG_TOL = 1e-9


@dataclass(frozen=True)
class Segment:
    x_lo: float
    x_hi: float
    form: object

    def __post_init__(self):
        object.__setattr__(self, "x_lo", float(self.x_lo))
        object.__setattr__(self, "x_hi", float(self.x_hi))


@dataclass(frozen=True)
class Violation:
    location: float
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "ok": self.ok,
            "violations": [{"location": v.location, "kind": v.kind, "detail": v.detail} for v in self.violations],
        }


class Distribution:
    """Base class; subclasses implement the private vectorized hooks."""

    family = "abstract"

    def __init__(self, name="", metadata=None):
        self.name = name
        self.metadata = dict(metadata or {})
        self._validated = False

    # -- hooks -------------------------------------------------------------
    def _tail_log(self, x):
        raise NotImplementedError

    def _tail_log_left(self, x):
        raise NotImplementedError

    def atoms(self, lo=0.0, hi=np.inf, limit=None):
        """Atoms with location in (lo, hi] as (locations, log_masses), ascending."""
        return np.empty(0), np.empty(0)

    def segments(self, lo, hi):
        raise NotImplementedError

    def validation_window(self):
        return np.inf

    def _tail_vanishes(self):
        return False

    def critical_points(self, t, lo, hi, near=None):
        """Points where the shift ratio at lag t reaches its local extremes."""
        return np.empty(0)

    def to_spec(self):
        raise NotImplementedError

    # -- public evaluation ---------------------------------------------------
    @property
    def validated(self):
        return self._validated

    def _checked(self, x):
        if not self._validated:
            raise UsageError(f"distribution {self.name!r} has not been validated")
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise DomainError("tail evaluation needs x >= 0")
        return arr

    def tail_log(self, x):
        arr = self._checked(x)
        out = self._tail_log(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out

    def tail_log_left(self, x):
        arr = self._checked(x)
        out = self._tail_log_left(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out

    def survival(self, x):
        return np.exp(self.tail_log(x))

    @property
    def has_atoms(self):
        return self.atoms(0.0, np.inf, limit=1)[0].size > 0

    # -- validation ----------------------------------------------------------
    def validate(self):
        report = ValidationReport(_validate_structure(self))
        self._validated = report.ok
        return report

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r})"


def _validate_structure(d):
    out = []
    window = d.validation_window()
    segs = d.segments(0.0, window)
    if not segs:
        return [Violation(0.0, "gap", "no segments")]
    if segs[0].x_lo != 0.0:
        out.append(Violation(0.0, "gap", f"first segment starts at {segs[0].x_lo}"))
    for s in segs:
        if not s.x_lo < s.x_hi:
            out.append(Violation(s.x_lo, "overlap", f"empty or reversed segment [{s.x_lo}, {s.x_hi})"))
        prob = s.form.monotone_problem(s.x_lo, s.x_hi)
        if prob is not None:
            out.append(Violation(prob[0], "increase", prob[1]))
    v0 = float(segs[0].form.log_tail(0.0))
    if v0 < -1e-12:
        out.append(Violation(0.0, "jump-atom-mismatch", "V(0) < 1 would put an atom at 0"))
    elif v0 > 1e-12:
        out.append(Violation(0.0, "increase", "V(0) > 1"))

    span_hi = segs[-1].x_hi
    locs, lms = d.atoms(0.0, span_hi if np.isfinite(span_hi) else np.inf)
    atom_at = {float(l): float(m) for l, m in zip(locs, lms)}
    if np.any(locs <= 0):
        out.append(Violation(float(locs.min()), "jump-atom-mismatch", "atom at a non-positive location"))
    if locs.size and logsumexp(lms) > 1e-12:
        out.append(Violation(float(locs[-1]), "jump-atom-mismatch", "atom masses sum above 1"))

    seen = set()
    for prev, nxt in zip(segs, segs[1:]):
        b = nxt.x_lo
        if b > prev.x_hi:
            out.append(Violation(prev.x_hi, "gap", f"gap between {prev.x_hi} and {b}"))
            continue
        if b < prev.x_hi:
            out.append(Violation(b, "overlap", f"segments overlap on [{b}, {prev.x_hi})"))
            continue
        left = float(prev.form.log_tail(b))
        right = float(nxt.form.log_tail(b))
        if right > left + 1e-12 * (1 + abs(left)):
            out.append(Violation(b, "increase", f"tail jumps up at {b}"))
            continue
        jump = float(log_sub(left, right))
        significant = jump > left + math.log(_JUMP_REL)
        atom = atom_at.get(b)
        if atom is not None:
            seen.add(b)
        if significant and atom is None:
            out.append(Violation(b, "jump-atom-mismatch", f"jump of log-mass {jump:.6g} without an atom"))
        elif atom is not None and not significant:
            out.append(Violation(b, "jump-atom-mismatch", "atom recorded where the tail is continuous"))
        elif atom is not None and abs(atom - jump) > _ATOM_LOG_TOL * (1 + abs(jump)):
            out.append(Violation(b, "jump-atom-mismatch", f"atom log-mass {atom:.12g} vs jump {jump:.12g}"))
    for loc in atom_at:
        if loc not in seen:
            out.append(Violation(loc, "jump-atom-mismatch", "atom not located at a segment boundary"))

    last = segs[-1]
    if np.isinf(last.x_hi):
        if not last.form.vanishes():
            out.append(Violation(last.x_lo, "tail-not-vanishing", "last segment does not decay to 0"))
    elif not d._tail_vanishes():
        out.append(Violation(last.x_hi, "tail-not-vanishing", "construction does not decay to 0"))
    return out


# ---------------------------------------------------------------------------
# finite piecewise distributions


class PiecewiseDistribution(Distribution):
    family = "composite"

    def __init__(self, segments, atoms=(), name="", metadata=None, spec=None):
        super().__init__(name, metadata)
        self._segments = tuple(segments)
        self._los = np.array([s.x_lo for s in self._segments], dtype=float)
        atoms = sorted((float(l), float(m)) for l, m in atoms)
        self._atom_locs = np.array([l for l, _ in atoms], dtype=float)
        with np.errstate(divide="ignore"):
            self._atom_lms = np.log(np.array([m for _, m in atoms], dtype=float))
        self._spec = spec
        self._atom_masses = [m for _, m in atoms]

    def _eval(self, x, side):
        forms = [s.form for s in self._segments]
        if len(forms) == 1:
            out = forms[0].log_tail(x)
        else:
            idx = np.clip(np.searchsorted(self._los, x, side=side) - 1, 0, len(forms) - 1)
            out = np.empty(x.shape)
            for k in np.unique(idx):
                m = idx == k
                out[m] = forms[k].log_tail(x[m])
        if side == "left":
            out = np.where(x <= 0, 0.0, out)
        return out

    def _tail_log(self, x):
        return self._eval(x, "right")

    def _tail_log_left(self, x):
        return self._eval(x, "left")

    def atoms(self, lo=0.0, hi=np.inf, limit=None):
        m = (self._atom_locs > lo) & (self._atom_locs <= hi)
        locs, lms = self._atom_locs[m], self._atom_lms[m]
        if limit is not None:
            locs, lms = locs[:limit], lms[:limit]
        return locs, lms

    def segments(self, lo, hi):
        return _clip(self._segments, lo, hi)

    @property
    def single_form(self):
        return self._segments[0].form if len(self._segments) == 1 else None

    def critical_points(self, t, lo, hi, near=None):
        # shift ratios peak just after each downward jump
        pts = self._atom_locs + t * (1 - 1e-9)
        return pts[(pts >= lo) & (pts <= hi)]

    def to_spec(self):
        if self._spec is not None:
            return {"name": self.name, **self._spec}
        return {
            "name": self.name,
            "family": "composite",
            "params": {
                "segments": [{"x_lo": s.x_lo, "x_hi": s.x_hi, "form": s.form.to_dict()} for s in self._segments],
                "atoms": [[float(l), m] for l, m in zip(self._atom_locs, self._atom_masses)],
            },
        }


def _clip(segments, lo, hi):
    out = []
    for s in segments:
        if s.x_hi <= lo or s.x_lo >= hi:
            continue
        out.append(Segment(max(s.x_lo, lo), min(s.x_hi, hi) if s.x_hi > hi and np.isfinite(hi) else s.x_hi, s.form))
    return out


# ---------------------------------------------------------------------------
# plateau modification


class ArithmeticPairs:
    """x_i = first_x + (i - 1) * period and y_i = x_i + width for every i >= 1."""

    def __init__(self, first_x, period, width):
        if not (first_x > 0 and 0 < width < period):
            raise ConstructionError("need first_x > 0 and 0 < width < period")
        self.first_x, self.period, self.width = float(first_x), float(period), float(width)

    finite = False

    def x_of(self, i):
        return self.first_x + (np.asarray(i, dtype=float) - 1.0) * self.period

    def y_of(self, i):
        return self.x_of(i) + self.width

    def index_right(self, x):
        # largest i with x_i <= x, 0 before the first pair
        # beyond 2**52 periods the plateaus are below float resolution anyway
        k = np.clip(np.floor((x - self.first_x) / self.period), -1.0, 2.0**52)
        i = k.astype(np.int64) + 1
        i = np.where(x >= self.first_x, i, 0)
        # rounding guard at exact pair starts
        i = np.where((i > 0) & (self.x_of(i) > x), i - 1, i)
        i = np.where(self.x_of(i + 1) <= x, i + 1, i)
        return np.maximum(i, 0)

    def index_left(self, x):
        # largest i with x_i < x
        i = self.index_right(x)
        return np.where((i > 0) & (self.x_of(i) >= x), i - 1, i)

    def indices_with_y_in(self, lo, hi, limit=None):
        start = max(1, int(math.floor((lo - self.first_x - self.width) / self.period)) + 1)
        if np.isinf(hi):
            if limit is None:
                raise ValueError("unbounded atom enumeration needs a limit")
            stop = start + limit + 2
        else:
            stop = int(math.floor((hi - self.first_x - self.width) / self.period)) + 3
        i = np.arange(start, max(stop, start), dtype=np.int64)
        y = self.y_of(i)
        i = i[(y > lo) & (y <= hi)]
        return i if limit is None else i[:limit]

    def to_dict(self):
        return {"pattern": "arithmetic", "first_x": self.first_x, "period": self.period, "width": self.width}


class ExplicitPairs:
    finite = True

    def __init__(self, pairs):
        pairs = [(float(x), float(y)) for x, y in pairs]
        self.xs = np.array([p[0] for p in pairs])
        self.ys = np.array([p[1] for p in pairs])
        flat = np.ravel(np.column_stack([self.xs, self.ys])) if pairs else np.empty(0)
        if pairs and not (flat[0] > 0 and np.all(np.diff(flat) > 0)):
            raise ConstructionError("pairs must satisfy 0 < x_1 < y_1 < x_2 < y_2 < ...")
        gaps = self.xs[1:] - self.ys[:-1]
        if gaps.size > 1 and np.any(np.diff(gaps) < 0):
            raise ConstructionError("gaps x_{i+1} - y_i must be non-decreasing")

    def __len__(self):
        return self.xs.size

    def x_of(self, i):
        return self.xs[np.asarray(i) - 1]

    def y_of(self, i):
        return self.ys[np.asarray(i) - 1]

    def index_right(self, x):
        return np.searchsorted(self.xs, x, side="right")

    def index_left(self, x):
        return np.searchsorted(self.xs, x, side="left")

    def indices_with_y_in(self, lo, hi, limit=None):
        i = np.nonzero((self.ys > lo) & (self.ys <= hi))[0] + 1
        return i if limit is None else i[:limit]

    def to_dict(self):
        return {"pattern": "explicit", "pairs": [[float(x), float(y)] for x, y in zip(self.xs, self.ys)]}


class PlateauModified(Distribution):
    """Freezes a continuous base tail on [x_i, y_i) and lets it drop at y_i."""

    family = "plateau_modification"
    validation_pairs = 256

    def __init__(self, base, pairs, name="", metadata=None):
        super().__init__(name or f"plateau({base.name})", metadata)
        self.base = base
        self.pairs = pairs

    def _eval(self, x, left):
        out = self.base._tail_log(x)
        i = self.pairs.index_left(x) if left else self.pairs.index_right(x)
        m = i > 0
        if np.any(m):
            xi = self.pairs.x_of(i[m])
            yi = self.pairs.y_of(i[m])
            xm = x[m]
            flat = xm <= yi if left else xm < yi
            sub = out[m]
            sub[flat] = self.base._tail_log(xi[flat])
            out[m] = sub
        return out

    def _tail_log(self, x):
        return self._eval(x, left=False)

    def _tail_log_left(self, x):
        return np.where(x <= 0, 0.0, self._eval(x, left=True))

    def atoms(self, lo=0.0, hi=np.inf, limit=None):
        i = self.pairs.indices_with_y_in(lo, hi, limit)
        if i.size == 0:
            return np.empty(0), np.empty(0)
        xi, yi = self.pairs.x_of(i), self.pairs.y_of(i)
        return yi.astype(float), log_sub(self.base._tail_log(xi), self.base._tail_log(yi))

    def _n_checked(self):
        return len(self.pairs) if self.pairs.finite else self.validation_pairs

    def validation_window(self):
        if self.pairs.finite:
            return np.inf
        return float(self.pairs.x_of(self._n_checked() + 1))

    def _tail_vanishes(self):
        return self.base._tail_vanishes() or self.base.segments(0, np.inf)[-1].form.vanishes()

    def segments(self, lo, hi):
        n = self._n_checked()
        segs = []
        if n == 0:
            return self.base.segments(lo, hi)
        xs = self.pairs.x_of(np.arange(1, n + 1))
        ys = self.pairs.y_of(np.arange(1, n + 1))
        levels = self.base._tail_log(xs)
        segs += self.base.segments(0.0, float(xs[0]))
        for k in range(n):
            segs.append(Segment(float(xs[k]), float(ys[k]), Plateau(float(levels[k]))))
            nxt = float(xs[k + 1]) if k + 1 < n else (hi if not self.pairs.finite else np.inf)
            segs += self.base.segments(float(ys[k]), nxt)
        return _clip(segs, lo, hi)

    def critical_points(self, t, lo, hi, near=None):
        near = np.asarray(near if near is not None else [], dtype=float)
        i = np.unique(self.pairs.index_right(near))
        i = i[i > 0]
        if self.pairs.finite:
            i = i[i <= len(self.pairs)]
        if i.size == 0:
            return np.empty(0)
        xi, yi = self.pairs.x_of(i), self.pairs.y_of(i)
        width = yi - xi
        sup_pts = yi + t - np.maximum(t * 1e-6, 1e-9 * yi)
        inf_pts = np.where(t < width, xi + t + 0.5 * (width - t), np.nan)
        pts = np.concatenate([sup_pts, inf_pts])
        pts = pts[np.isfinite(pts)]
        return pts[(pts >= lo) & (pts <= hi)]

    def to_spec(self):
        return {
            "name": self.name,
            "family": self.family,
            "params": {"base": self.base.to_spec(), **self.pairs.to_dict()},
        }


# ---------------------------------------------------------------------------
# oscillating heavy tail (ramps on [a_n, 2a_n), flats on [2a_n, a_{n+1}))


class OscillatingHeavy(Distribution):
    family = "oscillating_heavy"
    levels = 48

    def __init__(self, theta, a, name="", metadata=None):
        super().__init__(name or f"oscillating(theta={theta}, a={a})", metadata)
        self.theta, self.a = float(theta), float(a)
        self.r = (self.theta + 1.0) / self.theta
        n = np.arange(self.levels + 1)
        self.log_a = self.r**n * math.log(self.a)
        with np.errstate(over="ignore"):
            self.a_n = np.exp(self.log_a)
        terms = -self.theta * self.log_a
        # log S_n = log sum_{i >= n} a_i^-theta
        self.log_S = np.array([logsumexp(terms[k:]) for k in range(self.levels + 1)] + [-np.inf])
        self.log_C = -self.log_S[0]

    def _tail_log(self, x):
        n = np.searchsorted(self.a_n, x, side="right") - 1
        out = np.zeros(x.shape)
        m = n >= 0
        if np.any(m):
            nn = n[m]
            xm = x[m]
            end = self.log_C + self.log_S[nn + 1]
            two_a = 2.0 * self.a_n[nn]
            with np.errstate(divide="ignore", invalid="ignore"):
                ramp = np.logaddexp(end, self.log_C - (self.theta + 1.0) * self.log_a[nn] + np.log(np.maximum(two_a - xm, 0.0)))
            out[m] = np.where(xm < two_a, ramp, end)
        return out

    _tail_log_left = _tail_log

    def _finite_levels(self):
        return int(np.sum(self.a_n < 1e300)) - 1

    def validation_window(self):
        return float(self.a_n[self._finite_levels()])

    def _tail_vanishes(self):
        return True

    def segments(self, lo, hi):
        segs = [Segment(0.0, float(self.a_n[0]), Plateau(0.0))]
        for n in range(self._finite_levels()):
            an, an1 = float(self.a_n[n]), float(self.a_n[n + 1])
            end = float(self.log_C + self.log_S[n + 1])
            slope = float(self.log_C - (self.theta + 1.0) * self.log_a[n])
            segs.append(Segment(an, 2 * an, LinearSurvival(2 * an, end, slope)))
            segs.append(Segment(2 * an, an1, Plateau(end)))
        return _clip(segs, lo, hi)

    def ramp_starts(self, x_max=np.inf):
        return self.a_n[self.a_n <= x_max]

    def critical_points(self, t, lo, hi, near=None):
        pts = 2.0 * self.a_n[np.isfinite(self.a_n)]
        return pts[(pts >= lo) & (pts <= hi) & (pts > t)]

    def to_spec(self):
        return {"name": self.name, "family": self.family, "params": {"theta": self.theta, "a": self.a}}


# ---------------------------------------------------------------------------
# tail-level tilt


class Tilted(Distribution):
    family = "tilt"

    def __init__(self, base, gamma, alpha, name="", metadata=None):
        super().__init__(name or f"tilt({base.name}, gamma={gamma}, alpha={alpha})", metadata)
        self.base, self.gamma, self.alpha = base, float(gamma), float(alpha)

    def _tail_log(self, x):
        return self.base._tail_log(x) - self.gamma * x**self.alpha

    def _tail_log_left(self, x):
        return self.base._tail_log_left(x) - self.gamma * x**self.alpha

    def atoms(self, lo=0.0, hi=np.inf, limit=None):
        locs, lms = self.base.atoms(lo, hi, limit)
        return locs, lms - self.gamma * locs**self.alpha

    def segments(self, lo, hi):
        return [Segment(s.x_lo, s.x_hi, TiltedProduct(s.form, self.gamma, self.alpha)) for s in self.base.segments(lo, hi)]

    def validation_window(self):
        return self.base.validation_window()

    def _tail_vanishes(self):
        return True

    def critical_points(self, t, lo, hi, near=None):
        return self.base.critical_points(t, lo, hi, near)

    def to_spec(self):
        return {
            "name": self.name,
            "family": self.family,
            "params": {"base": self.base.to_spec(), "gamma": self.gamma, "alpha": self.alpha},
        }


# ---------------------------------------------------------------------------
# constructors


def _finish(d):
    report = d.validate()
    if not report.ok:
        v = report.violations[0]
        raise ConstructionError(f"{d.name}: {v.kind} at {v.location}: {v.detail}")
    return d


def make_exp_polynomial(terms, offset=0.0, power_decay=0.0, name=None):
    terms = tuple((float(l), float(a)) for l, a in terms)
    for lam, alpha in terms:
        if not (lam > 0 and alpha > 0):
            raise ConstructionError(f"exp-polynomial term ({lam}, {alpha}) needs positive coefficient and exponent")
    if offset != 0.0:
        raise ConstructionError("offset must make V(0) = 1, i.e. be 0")
    if power_decay < 0:
        raise ConstructionError("power_decay must be >= 0")
    if not terms and not power_decay:
        raise ConstructionError("an exp-polynomial needs at least one decaying term")
    form = ExpPolynomial(terms, float(offset), float(power_decay))
    params = {"terms": [list(t) for t in terms], "offset": float(offset)}
    if power_decay:
        params["power_decay"] = float(power_decay)
    name = name or "exp_polynomial"
    d = PiecewiseDistribution([Segment(0.0, np.inf, form)], name=name, spec={"family": "exp_polynomial", "params": params})
    return _finish(d)


def make_exponential(rate=1.0):
    return make_exp_polynomial([(rate, 1.0)], name=f"Exp({rate})")


def make_power_law(beta, x_min=1.0):
    if not (beta > 0 and x_min > 0):
        raise ConstructionError("power law needs beta > 0 and x_min > 0")
    segs = [Segment(0.0, float(x_min), Plateau(0.0)), Segment(float(x_min), np.inf, PowerLaw(float(beta), float(x_min)))]
    spec = {"family": "power_law", "params": {"beta": float(beta), "x_min": float(x_min)}}
    return _finish(PiecewiseDistribution(segs, name=f"PowerLaw({beta}, {x_min})", spec=spec))


def make_point_mass(c):
    if not c > 0:
        raise ConstructionError("point mass location must be positive")
    c = float(c)
    segs = [Segment(0.0, c, Plateau(0.0)), Segment(c, np.inf, Plateau(-np.inf))]
    spec = {"family": "point_mass", "params": {"c": c}}
    return _finish(PiecewiseDistribution(segs, atoms=[(c, 1.0)], name=f"delta({c})", spec=spec))


def make_composite(segments, atoms=(), name="composite"):
    d = PiecewiseDistribution(segments, atoms, name=name)
    return _finish(d)


def make_plateau_modification(F0, pairs, name=None):
    if F0.has_atoms:
        raise ConstructionError("plateau modification needs a continuous base distribution")
    if not isinstance(pairs, (ArithmeticPairs, ExplicitPairs)):
        pairs = ExplicitPairs(pairs)
    if isinstance(pairs, ExplicitPairs) and len(pairs) == 0:
        return F0
    n = len(pairs) if pairs.finite else 4096
    idx = np.arange(1, n + 1)
    log_ratio = F0._tail_log(pairs.x_of(idx)) - F0._tail_log(pairs.y_of(idx))
    if np.any(log_ratio <= 0):
        raise ConstructionError("base tail must strictly decrease across every plateau")
    if n >= 2:
        drift = abs(log_ratio[-1] - log_ratio[n // 2])
        if drift > 0.05 * max(1.0, abs(log_ratio[-1])):
            warnings.warn(
                f"plateau ratio F0(x_i)/F0(y_i) does not settle: log-ratio {log_ratio[n // 2]:.4g} -> {log_ratio[-1]:.4g}",
                ConstructionWarning,
                stacklevel=2,
            )
    meta = {"limit_ratio_estimate": float(np.exp(log_ratio[-1]))}
    return _finish(PlateauModified(F0, pairs, name=name or "", metadata=meta))


def hazard_lower_bound(F0, points=100_000, margin=0.1):
    """Infimum of f0 / F0 on [0, inf): closed form when available, else a grid estimate."""
    form = getattr(F0, "single_form", None)
    if isinstance(form, ExpPolynomial):
        b = form.hazard_lower_bound()
        if b > 0:
            return b
        xs = np.logspace(-3, 6, points)
        return float(np.min(form.hazard(xs))) * (1 - margin)
    xs = np.logspace(-3, 6, points)
    h = 1e-6 * np.maximum(xs, 1.0)
    with np.errstate(invalid="ignore"):
        haz = -(F0._tail_log(xs + h) - F0._tail_log(np.maximum(xs - h, 0.0))) / (xs + h - np.maximum(xs - h, 0.0))
    return float(np.nanmin(haz)) * (1 - margin)


def make_sin_modulated(F0, a, hazard_bound=None, name=None):
    form = getattr(F0, "single_form", None)
    if not isinstance(form, ExpPolynomial):
        raise ConstructionError("sin modulation needs a single exp-polynomial base")
    b = hazard_lower_bound(F0) if hazard_bound is None else float(hazard_bound)
    if not b > 0:
        raise ConstructionError("base hazard has no positive lower bound")
    if not a > (1 + b) / b:
        raise ConstructionError(f"need a > (1 + b) / b = {(1 + b) / b:.6g} for a monotone tail (got a={a}, b={b:.6g})")
    params = {"base": F0.to_spec(), "a": float(a)}
    if hazard_bound is not None:
        params["hazard_bound"] = float(hazard_bound)
    d = PiecewiseDistribution(
        [Segment(0.0, np.inf, SinModulated(form, float(a)))],
        name=name or f"sin_modulated(a={a})",
        metadata={"hazard_bound": b},
        spec={"family": "sin_modulated", "params": params},
    )
    return _finish(d)


def make_oscillating_heavy(theta, a, name=None):
    golden = (math.sqrt(5.0) + 1.0) / 2.0
    if not (1.5 < theta < golden):
        raise ConstructionError(f"theta must lie in (3/2, {golden:.6f})")
    r = (theta + 1.0) / theta
    if not (a > 1 and a**r > 2 * a):
        raise ConstructionError("need a > 1 and a**r > 2a so ramps [a_n, 2a_n) do not overlap")
    if not a**r > 8 * a:
        warnings.warn(f"a**r = {a**r:.6g} <= 8a = {8 * a:.6g}: the class-membership argument assumes a**r > 8a", ConstructionWarning, stacklevel=2)
    return _finish(OscillatingHeavy(theta, a, name=name or ""))


def make_tilt(F0, gamma, alpha, name=None):
    if not gamma > 0:
        raise ConstructionError("tilt needs gamma > 0")
    if not alpha > 0:
        raise ConstructionError("tilt needs alpha > 0")
    if not F0.validated:
        raise ConstructionError("base distribution must be validated")
    return _finish(Tilted(F0, gamma, alpha, name=name or ""))


# ---------------------------------------------------------------------------
# the constructions used throughout the scenarios


def exp_sqrt_tail(gamma):
    """V(x) = exp(-gamma x - sqrt(x))."""
    return make_exp_polynomial([(gamma, 1.0), (1.0, 0.5)], name=f"exp_sqrt(gamma={gamma})")


def lattice_plateau(gamma, first_x=2.0, period=2.0, width=1.0):
    """exp_sqrt_tail frozen on [2i, 2i+1), with atoms at the odd integers >= 3."""
    return make_plateau_modification(
        exp_sqrt_tail(gamma), ArithmeticPairs(first_x, period, width), name=f"lattice_plateau(gamma={gamma})"
    )


def polynomial_exp_base(gamma, power=3.0):
    """V(x) = exp(-gamma x) (1 + x)**-power."""
    return make_exp_polynomial([(gamma, 1.0)], power_decay=power, name=f"exp_poly(gamma={gamma}, k={power})")


def gaussian_type(scale=1.0):
    """V(x) = exp(-scale x**2)."""
    return make_exp_polynomial([(scale, 2.0)], name=f"exp_sq({scale})")

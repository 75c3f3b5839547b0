"""Analytic survival-function pieces, all evaluated as log V(x) on absolute x.

Every form is vectorized over numpy arrays and never forms V itself, so
tails far below the float range stay finite in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _arr(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ExpPolynomial:
    """log V(x) = offset - sum_j lam_j x**alpha_j - power_decay * log(1 + x).

    ``power_decay`` covers the (1 + x)**-k factor of the sin-modulated base.
    """

    terms: tuple[tuple[float, float], ...]
    offset: float = 0.0
    power_decay: float = 0.0

    kind = "exp_polynomial"

    def log_tail(self, x):
        x = _arr(x)
        out = np.full(x.shape, float(self.offset))
        for lam, alpha in self.terms:
            out = out - lam * x**alpha
        if self.power_decay:
            out = out - self.power_decay * np.log1p(x)
        return out

    def hazard(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            h = np.zeros(x.shape)
            for lam, alpha in self.terms:
                h = h + lam * alpha * x ** (alpha - 1.0)
        if self.power_decay:
            h = h + self.power_decay / (1.0 + x)
        return h

    def hazard_lower_bound(self):
        # every term is >= 0; only the linear terms stay away from 0 at infinity
        return float(sum(lam for lam, alpha in self.terms if alpha == 1.0))

    def monotone_problem(self, x_lo, x_hi):
        for lam, alpha in self.terms:
            if not (lam > 0 and alpha > 0):
                return x_lo, f"term ({lam}, {alpha}) must have positive coefficient and exponent"
        if self.power_decay < 0:
            return x_lo, "power_decay must be >= 0"
        return None

    def vanishes(self):
        return bool(self.terms) or self.power_decay > 0

    def to_dict(self):
        d = {"kind": self.kind, "terms": [list(t) for t in self.terms], "offset": self.offset}
        if self.power_decay:
            d["power_decay"] = self.power_decay
        return d


@dataclass(frozen=True)
class PowerLaw:
    """V(x) = (x / x_min)**-beta."""

    beta: float
    x_min: float

    kind = "power_law"

    def log_tail(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            return -self.beta * (np.log(x) - np.log(self.x_min))

    def monotone_problem(self, x_lo, x_hi):
        if not self.beta > 0:
            return x_lo, "beta must be positive"
        return None

    def vanishes(self):
        return self.beta > 0

    def to_dict(self):
        return {"kind": self.kind, "beta": self.beta, "x_min": self.x_min}


@dataclass(frozen=True)
class Plateau:
    """Constant tail; level is log V and may be -inf."""

    level: float

    kind = "plateau"

    def log_tail(self, x):
        return np.full(_arr(x).shape, float(self.level))

    def monotone_problem(self, x_lo, x_hi):
        return None

    def vanishes(self):
        return self.level == -np.inf

    def to_dict(self):
        return {"kind": self.kind, "level": self.level}


@dataclass(frozen=True)
class LinearSurvival:
    """Linear ramp V(x) = end + slope * (x_hi - x), stored in logs.

    Anchoring at the right end keeps the value exact where the ramp meets the
    next piece, which matters when the ramp drops by many orders of magnitude.
    """

    x_hi: float
    log_end: float
    log_slope: float

    kind = "linear_survival"

    def log_tail(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.logaddexp(self.log_end, self.log_slope + np.log(np.maximum(self.x_hi - x, 0.0)))

    def start_value(self, x_lo):
        return float(np.exp(self.log_tail(x_lo)))

    @property
    def slope(self):
        return float(np.exp(self.log_slope))

    def monotone_problem(self, x_lo, x_hi):
        return None

    def vanishes(self):
        return False

    def to_dict(self):
        return {"kind": self.kind, "x_hi": self.x_hi, "log_end": self.log_end, "log_slope": self.log_slope}


@dataclass(frozen=True)
class SinModulated:
    """V(x) = base(x) * (1 + sin(x) / a)."""

    base: ExpPolynomial
    a: float

    kind = "sin_modulated"
    samples = 20_000

    def log_tail(self, x):
        x = _arr(x)
        return self.base.log_tail(x) + np.log1p(np.sin(x) / self.a)

    def threshold(self):
        b = self.base.hazard_lower_bound()
        return np.inf if b <= 0 else (1.0 + b) / b

    def monotone_problem(self, x_lo, x_hi):
        if self.a > self.threshold():
            return None
        # not covered by the hazard bound: look for an increase on a dense grid
        hi = min(x_hi, x_lo + 200.0)
        xs = np.linspace(x_lo, hi, self.samples)
        v = self.log_tail(xs)
        bad = np.nonzero(np.diff(v) > 1e-12)[0]
        if bad.size:
            return float(xs[bad[0]]), f"tail increases near x={xs[bad[0]]:.6g} (a={self.a})"
        return None

    def vanishes(self):
        return self.base.vanishes()

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "a": self.a}


@dataclass(frozen=True)
class TiltedProduct:
    """V(x) = exp(-gamma * x**alpha) * base(x)."""

    base: object
    gamma: float
    alpha: float

    kind = "tilted_product"

    def log_tail(self, x):
        x = _arr(x)
        return self.base.log_tail(x) - self.gamma * x**self.alpha

    def monotone_problem(self, x_lo, x_hi):
        if self.gamma < 0 or self.alpha <= 0:
            return x_lo, "tilt needs gamma >= 0 and alpha > 0"
        return self.base.monotone_problem(x_lo, x_hi)

    def vanishes(self):
        return self.gamma > 0 or self.base.vanishes()

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "gamma": self.gamma, "alpha": self.alpha}


def form_from_dict(d):
    kind = d["kind"]
    if kind == "exp_polynomial":
        return ExpPolynomial(
            tuple((float(l), float(a)) for l, a in d["terms"]),
            float(d.get("offset", 0.0)),
            float(d.get("power_decay", 0.0)),
        )
    if kind == "power_law":
        return PowerLaw(float(d["beta"]), float(d["x_min"]))
    if kind == "plateau":
        return Plateau(float(d["level"]))
    if kind == "linear_survival":
        return LinearSurvival(float(d["x_hi"]), float(d["log_end"]), float(d["log_slope"]))
    if kind == "sin_modulated":
        return SinModulated(form_from_dict(d["base"]), float(d["a"]))
    if kind == "tilted_product":
        return TiltedProduct(form_from_dict(d["base"]), float(d["gamma"]), float(d["alpha"]))
    raise ValueError(f"unknown tail form kind {kind!r}")

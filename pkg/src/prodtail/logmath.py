"""Log-domain helpers for probabilities that underflow in linear space."""

import numpy as np
from scipy.special import logsumexp

NEG_INF = -np.inf


def log_sub(a, b):
    """log(exp(a) - exp(b)) for a >= b; clipped to -inf when b >= a."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        d = b - a
        out = a + np.log(-np.expm1(d))
    out = np.where((a == NEG_INF) | (d >= 0), NEG_INF, out)
    return out if out.ndim else float(out)


def log1m_exp(a):
    """log(1 - exp(a)) for a <= 0."""
    return log_sub(0.0, a)


def log_add(a, b):
    return np.logaddexp(a, b)


def log_sum(values):
    """Max-shifted log of a sum; an empty or all -inf input gives -inf."""
    v = np.concatenate([np.ravel(np.asarray(x, dtype=float)) for x in values]) if values else np.array([])
    if v.size == 0 or not np.any(v > NEG_INF):
        return NEG_INF
    return float(logsumexp(v))


def as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0

"""JSON distribution specs: {"name", "family", "params"}, nested for base distributions."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import dist as D
from .errors import ConstructionError, SpecError
from .forms import form_from_dict

FAMILIES = (
    "exp_polynomial",
    "power_law",
    "plateau_modification",
    "sin_modulated",
    "oscillating_heavy",
    "tilt",
    "point_mass",
    "composite",
)


def _num(params, key, loc, default=None):
    if key not in params:
        if default is not None:
            return default
        raise SpecError(f"missing parameter {key!r}", loc)
    v = params[key]
    if isinstance(v, str) and v.lower() in ("inf", "infinity", "+inf"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"parameter {key!r} must be a number, got {v!r}", f"{loc}.{key}")
    return float(v)


def _pairs(params, loc):
    pattern = params.get("pattern", "arithmetic")
    if pattern == "arithmetic":
        return D.ArithmeticPairs(
            _num(params, "first_x", loc, 2.0), _num(params, "period", loc, 2.0), _num(params, "width", loc, 1.0)
        )
    if pattern == "explicit":
        pairs = params.get("pairs")
        if not isinstance(pairs, list):
            raise SpecError("explicit pattern needs a list 'pairs'", f"{loc}.pairs")
        for k, p in enumerate(pairs):
            if not (isinstance(p, list) and len(p) == 2):
                raise SpecError("each pair must be [x_i, y_i]", f"{loc}.pairs[{k}]")
        return D.ExplicitPairs(pairs)
    raise SpecError(f"unknown plateau pattern {pattern!r}", f"{loc}.pattern")


def parse_spec(doc, location="$"):
    """Build and validate a distribution from a spec dict."""
    if not isinstance(doc, dict):
        raise SpecError("a distribution spec must be an object", location)
    family = doc.get("family")
    if family not in FAMILIES:
        raise SpecError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}", f"{location}.family")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("params must be an object", f"{location}.params")
    loc = f"{location}.params"
    name = doc.get("name")
    try:
        d = _build(family, params, loc, name)
    except ConstructionError as exc:
        raise SpecError(str(exc), location) from exc
    if name:
        d.name = name
    return d


def _build(family, params, loc, name):
    if family == "exp_polynomial":
        terms = params.get("terms")
        if not isinstance(terms, list):
            raise SpecError("terms must be a list of [coefficient, exponent]", f"{loc}.terms")
        for k, t in enumerate(terms):
            if not (isinstance(t, list) and len(t) == 2 and all(isinstance(v, (int, float)) for v in t)):
                raise SpecError("each term must be [coefficient, exponent]", f"{loc}.terms[{k}]")
        return D.make_exp_polynomial(
            terms, _num(params, "offset", loc, 0.0), _num(params, "power_decay", loc, 0.0), name=name
        )
    if family == "power_law":
        return D.make_power_law(_num(params, "beta", loc), _num(params, "x_min", loc, 1.0))
    if family == "point_mass":
        return D.make_point_mass(_num(params, "c", loc))
    if family == "plateau_modification":
        base = parse_spec(params.get("base"), f"{loc}.base")
        return D.make_plateau_modification(base, _pairs(params, loc), name=name)
    if family == "sin_modulated":
        base = parse_spec(params.get("base"), f"{loc}.base")
        hb = params.get("hazard_bound")
        hb = None if hb is None else _num(params, "hazard_bound", loc)
        return D.make_sin_modulated(base, _num(params, "a", loc), hazard_bound=hb, name=name)
    if family == "oscillating_heavy":
        return D.make_oscillating_heavy(_num(params, "theta", loc), _num(params, "a", loc), name=name)
    if family == "tilt":
        base = parse_spec(params.get("base"), f"{loc}.base")
        return D.make_tilt(base, _num(params, "gamma", loc), _num(params, "alpha", loc), name=name)
    # composite
    segs = []
    raw = params.get("segments")
    if not isinstance(raw, list) or not raw:
        raise SpecError("composite needs a non-empty list 'segments'", f"{loc}.segments")
    for k, s in enumerate(raw):
        sl = f"{loc}.segments[{k}]"
        if not isinstance(s, dict):
            raise SpecError("segment must be an object", sl)
        try:
            form = form_from_dict(s["form"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"bad tail form: {exc}", f"{sl}.form") from exc
        x_hi = s.get("x_hi")
        segs.append(D.Segment(_num(s, "x_lo", sl), math.inf if x_hi is None else _num(s, "x_hi", sl), form))
    atoms = []
    for k, a in enumerate(params.get("atoms", [])):
        if not (isinstance(a, list) and len(a) == 2):
            raise SpecError("atom must be [location, mass]", f"{loc}.atoms[{k}]")
        atoms.append((float(a[0]), float(a[1])))
    return D.make_composite(segs, atoms, name=name or "composite")


def loads(text, location="$"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc
    return parse_spec(doc, location)


def load_spec(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc.strerror}", str(path)) from exc
    return loads(text, location=f"{path}:$")


def to_spec(d):
    return d.to_spec()


def dumps(d, indent=2):
    return json.dumps(to_spec(d), indent=indent)


def save_spec(d, path):
    Path(path).write_text(dumps(d) + "\n")


def same_tail(a, b, xs):
    """Max absolute log-tail difference of two distributions at the points xs."""
    la, lb = np.asarray(a.tail_log(xs)), np.asarray(b.tail_log(xs))
    both_zero = (la == -np.inf) & (lb == -np.inf)
    with np.errstate(invalid="ignore"):
        diff = np.where(both_zero, 0.0, np.abs(la - lb))
    return float(np.max(diff)) if diff.size else 0.0

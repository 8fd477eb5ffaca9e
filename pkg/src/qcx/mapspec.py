"""JSON boundary-map descriptions.

    {"kind": "piecewise_linear", "points": [[t, h], ...], "left_slope": s, "right_slope": s}
    {"kind": "builtin", "name": "identity|two_slope|power|log_singular|...", "params": {...}}
    {"kind": "circle", "samples": [[theta, h_theta], ...]}

Every validation error is a MapSpecError naming the JSON path at fault.
"""

from __future__ import annotations

import json
import math

import numpy as np

from qcx import boundary_map as bm
from qcx.errors import MapSpecError


def _number(value, path, *, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MapSpecError(f"expected a number, got {value!r}", path)
    value = float(value)
    if not math.isfinite(value):
        raise MapSpecError("number must be finite", path)
    if positive and not value > 0:
        raise MapSpecError(f"must be positive, got {value!r}", path)
    return value


def _pairs(value, path):
    if not isinstance(value, list) or len(value) < 2:
        raise MapSpecError("expected a list of at least two [a, b] pairs", path)
    out = []
    for k, item in enumerate(value):
        if not isinstance(item, list) or len(item) != 2:
            raise MapSpecError("expected a pair [a, b]", f"{path}[{k}]")
        out.append([_number(item[0], f"{path}[{k}][0]"), _number(item[1], f"{path}[{k}][1]")])
    return np.asarray(out, dtype=float)


def _check_keys(spec, allowed, path="$"):
    extra = sorted(set(spec) - set(allowed))
    if extra:
        raise MapSpecError(f"unexpected key {extra[0]!r}", f"{path}.{extra[0]}")


def _builtin(spec):
    _check_keys(spec, ("kind", "name", "params"))
    name = spec.get("name")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise MapSpecError("params must be an object", "$.params")

    def take(key, default=None):
        if key not in params:
            if default is None:
                raise MapSpecError(f"missing parameter {key!r}", f"$.params.{key}")
            return default
        return _number(params[key], f"$.params.{key}", positive=True)

    def no_params(*allowed):
        _check_keys(params, allowed, "$.params")

    if name == "identity":
        no_params()
        return bm.identity()
    if name == "two_slope":
        no_params("a")
        return bm.two_slope(take("a"))
    if name == "power":
        no_params("alpha")
        return bm.power(take("alpha"))
    if name == "log_singular":
        no_params()
        return bm.log_singular()
    if name == "log_singular_circle":
        no_params()
        return bm.log_singular_circle()
    if name == "rotation":
        no_params("theta0")
        return bm.rotation(_number(params.get("theta0", 0.0), "$.params.theta0"))
    raise MapSpecError(f"unknown builtin {name!r}", "$.name")


def parse_map(spec):
    """LineHomeo or CircleHomeo from a decoded JSON object."""
    if not isinstance(spec, dict):
        raise MapSpecError("map description must be a JSON object", "$")
    kind = spec.get("kind")
    if kind == "piecewise_linear":
        _check_keys(spec, ("kind", "points", "left_slope", "right_slope"))
        for key in ("points", "left_slope", "right_slope"):
            if key not in spec:
                raise MapSpecError(f"missing {key!r}", f"$.{key}")
        pts = _pairs(spec["points"], "$.points")
        return bm.PiecewiseLinear(pts, _number(spec["left_slope"], "$.left_slope"),
                                  _number(spec["right_slope"], "$.right_slope"))
    if kind == "builtin":
        return _builtin(spec)
    if kind == "circle":
        _check_keys(spec, ("kind", "samples"))
        if "samples" not in spec:
            raise MapSpecError("missing 'samples'", "$.samples")
        return bm.lift_circle(_pairs(spec["samples"], "$.samples"))
    raise MapSpecError(f"unknown kind {kind!r}", "$.kind")


def load_map(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise MapSpecError(f"cannot read map file: {exc.strerror}", "$") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MapSpecError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                           "$") from None
    return parse_map(spec)


def map_to_spec(h) -> dict:
    """Inverse of parse_map for piecewise-linear and builtin maps."""
    if isinstance(h, bm.CircleHomeo):
        raise ValueError("circle maps are specified by samples")
    family = getattr(h, "family", None)
    if family in ("identity", "two_slope", "power", "log_singular"):
        params = dict(getattr(h, "params", {}) or {})
        return {"kind": "builtin", "name": family, "params": params}
    if isinstance(h, bm.PiecewiseLinear):
        return {"kind": "piecewise_linear", "points": h.points.tolist(),
                "left_slope": h.left_slope, "right_slope": h.right_slope}
    raise ValueError(f"no JSON form for {h!r}")

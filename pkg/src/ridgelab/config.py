"""Run configuration: JSON schemas, loading, and builders for grids, targets and pipelines.

Configs are single JSON documents.  Unknown keys are rejected.  Command-line
flags override the matching config fields (see the CLI).
"""

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Optional

import jsonschema
import numpy as np

from . import features as F
from .numerics.activations import get_activation
from .numerics.quadrature import (
    QuadratureGrid,
    build_grid,
    discrete_factor,
    interval_factor,
    product_grid,
    sphere_factor,
)
from .transforms.admissibility import admissibility_constant, resolve_activation
from .transforms.functions import gaussian_target, zero_target


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}
_SCHEME = {"enum": ["midpoint", "trapezoid"]}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

GRID_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["points"],
            "properties": {
                "box": {"oneOf": [_PAIR, {"type": "array", "items": _PAIR, "minItems": 1}]},
                "points": {"oneOf": [_POS_INT, {"type": "array", "items": _POS_INT, "minItems": 1}]},
                "scheme": {"oneOf": [_SCHEME, {"type": "array", "items": _SCHEME}]},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["axes"],
            "properties": {
                "axes": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "oneOf": [
                            {"type": "object", "additionalProperties": False,
                             "required": ["interval", "points"],
                             "properties": {"interval": _PAIR, "points": _POS_INT, "scheme": _SCHEME}},
                            {"type": "object", "additionalProperties": False, "required": ["sphere"],
                             "properties": {"sphere": _POS_INT}},
                            {"type": "object", "additionalProperties": False, "required": ["values"],
                             "properties": {"values": {"type": "array", "minItems": 1},
                                            "weights": {"type": "array", "items": _NUM}}},
                        ]
                    },
                }
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["list"],
            "properties": {"list": {"type": "array", "minItems": 1}},
        },
    ]
}

TARGET_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["gaussian", "zero"]},
        "center": {"type": "array", "items": _NUM},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "amplitude": _NUM,
        "vector": {"type": "array", "items": _NUM},
    },
}

_ACT = {"oneOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}}]}

PIPELINE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["pipeline", "dim"],
    "properties": {
        "pipeline": {"enum": ["fc2", "fc_stack", "quadratic", "gconv"]},
        "dim": _POS_INT,
        "sigma": _ACT,
        "rho": _ACT,
        "alternate_rho": _ACT,
        "layers": {"type": "array", "minItems": 1, "items": {
            "type": "object", "additionalProperties": False, "required": ["hidden", "out"],
            "properties": {"hidden": _POS_INT, "out": _POS_INT}}},
        "targets": {"type": "array", "minItems": 1, "items": TARGET_SCHEMA},
        "x_grid": GRID_SCHEMA,
        "xi_grid": GRID_SCHEMA,
        "eval_points": GRID_SCHEMA,
        "reference_constant": {"oneOf": [_NUM, {"enum": ["admissibility", None]}]},
        "tolerances": {"type": "object", "additionalProperties": False, "properties": {
            "residual": _NUM, "agreement": _NUM, "duality": _NUM, "reference": _NUM,
            "near_zero": _NUM}},
        "residual_gated": {"type": "boolean"},
        "duality": {"type": "boolean"},
        "inconclusive_on_disagreement": {"type": "boolean"},
        "shifts": {"type": "array", "items": {"type": "integer"}},
        "seed": {"type": "integer"},
        "threads": _POS_INT,
        "output": {"type": "object", "additionalProperties": False, "properties": {
            "csv": {"type": "string"}, "summary": {"type": "string"}, "directory": {"type": "string"}}},
        "discretize": {"type": "object", "additionalProperties": False, "properties": {
            "box": {"type": "array", "items": _PAIR, "minItems": 1},
            "levels": {"type": "array", "items": _POS_INT, "minItems": 1},
            "reference_points": _POS_INT,
            "test_points": GRID_SCHEMA,
            "target_index": {"type": "integer", "minimum": 0}}},
        "description": {"type": "string"},
    },
}

_CHECK_COMMON = {"kind": {"type": "string"}, "name": {"type": "string"}, "seed": {"type": "integer"},
                 "tolerance": _NUM, "expect": {"enum": ["pass", "fail"]}, "samples": _POS_INT}

_PIPE_REF = {"oneOf": [{"type": "string"}, PIPELINE_SCHEMA]}

CHECK_SCHEMAS = {
    "equivariance": {"family": {"enum": ["fc2", "fc_layer_first", "fc_layer_middle", "fc_layer_last",
                                         "stack", "quadratic", "lifted_phi0"]},
                     "dim": _POS_INT, "activation": {"type": "string"}, "corrupt": {"type": "boolean"}},
    "unitarity": {"representation": {"enum": ["pi", "pihat"]}, "grid": GRID_SCHEMA,
                  "measure_preserving": {"type": "boolean"}, "refine": {"type": "boolean"}},
    "intertwining": {"side": {"enum": ["S", "R"]}, "pipeline": _PIPE_REF,
                     "bump": {"type": "object", "additionalProperties": False,
                              "properties": {"center": {"type": "array", "items": _NUM}, "width": _NUM}},
                     "xi_samples": _POS_INT, "xi_box": {"type": "array", "items": _PAIR},
                     "refine": {"type": "boolean"}, "refine_ratio": _NUM},
    "scalar_identity": {"pipeline": _PIPE_REF},
    "gcn_link": {"pipeline": _PIPE_REF, "corrupt": {"type": "boolean"}},
    "gcn_reconstruction": {"pipeline": _PIPE_REF},
    "discretization": {"pipeline": _PIPE_REF, "slack": _NUM, "ratio": _NUM},
    "kernel_l2": {"pipeline": _PIPE_REF, "x_grid": GRID_SCHEMA, "xi_grid": GRID_SCHEMA},
}


def check_schema(kind):
    props = dict(_CHECK_COMMON)
    props.update(CHECK_SCHEMAS[kind])
    return {"type": "object", "additionalProperties": False, "required": ["kind"], "properties": props}


SUITE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["checks"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "threads": _POS_INT,
        "description": {"type": "string"},
        "checks": {"type": "array", "items": {"type": "object", "required": ["kind"],
                                              "properties": {"kind": {"enum": sorted(CHECK_SCHEMAS)}}}},
    },
}


def validate(obj, schema, what="config"):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError("%s invalid at %s: %s" % (what, where, exc.message)) from None


def validate_suite(obj):
    validate(obj, SUITE_SCHEMA, "suite config")
    for i, chk in enumerate(obj["checks"]):
        validate(chk, check_schema(chk["kind"]), "check %d (%s)" % (i, chk["kind"]))
    return obj


def resolve_pipeline(ref):
    """A pipeline config given inline or by path / bundled name."""
    obj = load_json(ref) if isinstance(ref, str) else ref
    return validate_pipeline(obj)


def validate_pipeline(obj):
    validate(obj, PIPELINE_SCHEMA, "pipeline config")
    return obj


def bundled_names():
    return sorted(p.name[:-5] for p in resources.files("ridgelab.configs").iterdir() if p.name.endswith(".json"))


def load_json(path_or_name):
    """Read a JSON config from a path, or a bundled config by name."""
    text = None
    try:
        with open(path_or_name) as fh:
            text = fh.read()
    except FileNotFoundError:
        name = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
        if name in bundled_names():
            text = resources.files("ridgelab.configs").joinpath(name + ".json").read_text()
        else:
            raise ConfigError("no such config file or bundled config: %r (bundled: %s)"
                              % (path_or_name, ", ".join(bundled_names()))) from None
    except OSError as exc:
        raise ConfigError("cannot read %r: %s" % (path_or_name, exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config %r is not valid JSON: %s" % (path_or_name, exc)) from None


def digest(obj):
    """Stable SHA-256 of a JSON-serializable object."""
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# ----------------------------------------------------------------------------
# builders


def grid_from_spec(spec, default_box=None):
    """Build a :class:`QuadratureGrid` from a grid spec (``list`` specs give a point array instead)."""
    if "list" in spec:
        return np.asarray(spec["list"], dtype=float)
    if "axes" in spec:
        factors = []
        for ax in spec["axes"]:
            if "interval" in ax:
                lo, hi = ax["interval"]
                factors.append(interval_factor(lo, hi, ax["points"], ax.get("scheme", "midpoint")))
            elif "sphere" in ax:
                factors.append(sphere_factor(ax["sphere"]))
            else:
                factors.append(discrete_factor(ax["values"], ax.get("weights")))
        return product_grid(*factors)
    box = spec.get("box", default_box)
    if box is None:
        raise ConfigError("grid spec needs a box")
    return build_grid(box, spec["points"], spec.get("scheme", "midpoint"))


def points_from_spec(spec, dim):
    """Evaluation points from a grid spec (nodes) or an explicit list."""
    pts = grid_from_spec(spec)
    if isinstance(pts, QuadratureGrid):
        pts = pts.nodes
    return np.asarray(pts, dtype=float).reshape(-1, dim)


def target_from_spec(spec, dim, codim=1):
    if spec["kind"] == "zero":
        return zero_target(dim, codim)
    center = spec.get("center", [0.0] * dim)
    if len(center) != dim:
        raise ConfigError("target center needs %d coordinates" % dim)
    vec = spec.get("vector")
    if vec is None and codim > 1:
        raise ConfigError("vector-valued pipeline needs a target 'vector'")
    return gaussian_target(center, spec.get("width", 1.0), spec.get("amplitude", 1.0), vec)


def _per_layer(value, n, default):
    if value is None:
        value = default
    if isinstance(value, str):
        return [value] * n
    if len(value) != n:
        raise ConfigError("need %d activation names, got %d" % (n, len(value)))
    return list(value)


DEFAULT_TOLERANCES = {"residual": 0.05, "agreement": 0.1, "duality": 1e-10, "reference": 0.1,
                      "near_zero": 1e-3}


@dataclass
class Pipeline:
    """A configured synthesis/analysis pair with its grids and targets."""

    config: dict
    kind: str
    dim: int
    phi: object
    psi: object
    alternate_psi: Optional[object]
    x_grid: QuadratureGrid
    xi_grid: QuadratureGrid
    eval_points: np.ndarray
    targets: List[object]
    reference_constant: Optional[float]
    tolerances: dict = field(default_factory=dict)
    residual_gated: bool = True
    inconclusive_on_disagreement: bool = False


def _maps(cfg, rho_key):
    kind, m = cfg["pipeline"], cfg["dim"]
    sigma_names = cfg.get("sigma", "gauss")
    rho_names = cfg.get(rho_key)
    if rho_names is None:
        return None, None
    if kind in ("fc2", "quadratic"):
        if not isinstance(sigma_names, str) or not isinstance(rho_names, str):
            raise ConfigError("%s pipeline takes a single sigma and rho" % kind)
        sigma = get_activation(sigma_names)
        rho = resolve_activation(rho_names, m, sigma)
        build = F.fc2_spec if kind == "fc2" else F.quadratic_spec
        return build(m, sigma), build(m, rho)
    layers = cfg.get("layers")
    if not layers:
        raise ConfigError("%s pipeline needs 'layers'" % kind)
    pairs = [(ld["hidden"], ld["out"]) for ld in layers]
    n = len(pairs)
    sig = [get_activation(s) for s in _per_layer(sigma_names, n, "gauss")]
    ins = [m] + [d for _, d in pairs[:-1]]
    rho = [resolve_activation(r, d_in, s) for r, d_in, s in zip(_per_layer(rho_names, n, "matched"), ins, sig)]
    phi, psi = F.fc_stack_spec(m, pairs, sig), F.fc_stack_spec(m, pairs, rho)
    if kind == "gconv":
        if pairs[-1][1] != m:
            raise ConfigError("gconv pipeline must map R^k to R^k")
        phi, psi = F.gconv_spec(phi), F.gconv_spec(psi)
    return phi, psi


def _default_xi_box(kind, m):
    if kind == "fc2":
        return [[-20.0, 20.0]] * (m + 1)
    return None


def build_pipeline(cfg):
    """Validate a pipeline config and build its maps, grids and targets."""
    cfg = validate_pipeline(copy.deepcopy(cfg))
    kind, m = cfg["pipeline"], cfg["dim"]
    try:
        phi, psi = _maps(cfg, "rho")
        if phi is None:
            cfg["rho"] = "matched"
            phi, psi = _maps(cfg, "rho")
        _, alt = _maps(cfg, "alternate_rho")
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    codim = phi.output_dim
    targets = [target_from_spec(t, m, codim) for t in cfg.get("targets", [{"kind": "gaussian"}])]
    support = max(t.support_radius for t in targets)
    radius = 4.0 * (support + 1.0)
    x_spec = cfg.get("x_grid", {"points": 1025, "scheme": "trapezoid"})
    x_grid = grid_from_spec(x_spec, default_box=[[-radius, radius]] * m)
    if "xi_grid" not in cfg:
        raise_box = _default_xi_box(kind, m)
        if raise_box is None:
            raise ConfigError("%s pipeline needs an explicit xi_grid" % kind)
        cfg["xi_grid"] = {"box": raise_box, "points": 401, "scheme": "midpoint"}
    xi_grid = grid_from_spec(cfg["xi_grid"])
    if not isinstance(x_grid, QuadratureGrid) or not isinstance(xi_grid, QuadratureGrid):
        raise ConfigError("x_grid and xi_grid must be quadrature grids, not point lists")
    if x_grid.dim != m:
        raise ConfigError("x_grid has dimension %d, pipeline dimension is %d" % (x_grid.dim, m))
    if xi_grid.dim != phi.param_dim:
        raise ConfigError("xi_grid has dimension %d, the feature map has %d parameters"
                          % (xi_grid.dim, phi.param_dim))
    ev_spec = cfg.get("eval_points", {"box": [[-2.0, 2.0]] * m, "points": 101 if m == 1 else 5,
                                      "scheme": "trapezoid"})
    eval_points = points_from_spec(ev_spec, m)
    ref = cfg.get("reference_constant")
    if ref == "admissibility":
        if kind != "fc2":
            raise ConfigError("an admissibility reference is only defined for fc2 pipelines")
        ref = admissibility_constant(phi.activations[0], psi.activations[0], m)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    return Pipeline(cfg, kind, m, phi, psi, alt, x_grid, xi_grid, eval_points, targets,
                    None if ref is None else float(ref), tol, cfg.get("residual_gated", True),
                    cfg.get("inconclusive_on_disagreement", False))

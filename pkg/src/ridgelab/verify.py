"""Numerical checks of the equivariance, unitarity, intertwining and reconstruction identities.

Every check returns a :class:`CheckReport`.  Checks that gate on more than
one quantity list them as ``components``; the report's ``max_residual`` is
then the largest component value divided by its tolerance and the report
tolerance is 1.  Reports contain no timestamps, so a suite run with fixed
seeds serializes to identical bytes whatever the thread count.
"""

import copy
import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import features as F
from . import groups
from .config import (
    Pipeline,
    build_pipeline,
    digest,
    grid_from_spec,
    resolve_pipeline,
    validate_suite,
)
from .discretize import discretization_study
from .numerics import parallel
from .numerics.activations import get_activation
from .numerics.quadrature import build_grid, integrate
from .numerics.sampling import random_orthogonal, rng, sample_group_element
from .params import LayerParam
from .transforms.diagnostics import intertwine_check_R, intertwine_check_S, kernel_l2_diagnostic
from .transforms.functions import ParamDistribution, SampledFunction, gaussian_bump
from .transforms.gcn import fcn_translate, gcn_network_apply, gcn_reconstruction
from .transforms.operators import duality_gap, network_apply, reconstruct, ridgelet_apply, ridgelet_distribution

#: Group elements drawn with ``L = expm(M)``, ``M`` uniform on ``[-MODERATE, MODERATE]``.
MODERATE = float(np.log(2.0))

OUTCOMES = ("pass", "fail", "inconclusive")


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if np.isfinite(v) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


@dataclass
class Component:
    name: str
    value: Optional[float]
    tolerance: float

    @property
    def passed(self):
        return self.value is not None and self.value <= self.tolerance

    def to_json(self):
        return {"name": self.name, "value": _num(self.value), "tolerance": self.tolerance,
                "passed": self.passed}


@dataclass
class CheckReport:
    """Outcome of one check.

    ``passed`` is ``max_residual <= tolerance``.  ``outcome`` is ``pass``,
    ``fail`` or ``inconclusive``; ``expected`` is ``fail`` for negative
    controls.
    """

    check_name: str
    kind: str
    samples: int
    max_residual: Optional[float]
    tolerance: Optional[float]
    outcome: str
    expected: str = "pass"
    seed: Optional[int] = None
    config_digest: str = ""
    components: List[Component] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    caveats: List[str] = field(default_factory=list)

    @property
    def passed(self):
        if self.tolerance is None:
            return True
        return self.max_residual is not None and self.max_residual <= self.tolerance

    @property
    def as_expected(self):
        return self.outcome == "inconclusive" or self.outcome == self.expected

    def to_json(self):
        return _clean({
            "check_name": self.check_name, "kind": self.kind, "samples": self.samples,
            "max_residual": self.max_residual, "tolerance": self.tolerance, "passed": self.passed,
            "outcome": self.outcome, "expected": self.expected, "as_expected": self.as_expected,
            "seed": self.seed, "config_digest": self.config_digest,
            "components": [c.to_json() for c in self.components],
            "details": self.details, "caveats": list(self.caveats),
        })

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    def line(self):
        res = "n/a" if self.max_residual is None else "%.3e" % self.max_residual
        tol = "n/a" if self.tolerance is None else "%.1e" % self.tolerance
        flag = "" if self.expected == "pass" else " (expected %s)" % self.expected
        return "%-38s %-12s residual %s / tol %s%s" % (self.check_name, self.outcome.upper(), res, tol, flag)


def _single(name, kind, samples, value, tol, expected, seed, cfg, **kw):
    value = _num(value)
    outcome = "pass" if value is not None and value <= tol else "fail"
    return CheckReport(name, kind, samples, value, tol, outcome, expected, seed, digest(cfg), **kw)


def _composite(name, kind, samples, components, expected, seed, cfg, outcome=None, **kw):
    worst = 0.0 if components else None
    for c in components:
        if c.value is None:
            worst = None
            break
        worst = max(worst, c.value / c.tolerance if c.tolerance > 0 else (0.0 if c.value <= 0 else np.inf))
    if outcome is None:
        outcome = "pass" if all(c.passed for c in components) else "fail"
    return CheckReport(name, kind, samples, _num(worst), 1.0, outcome, expected, seed, digest(cfg),
                       components, **kw)


# ----------------------------------------------------------------------------
# joint equivariance

EQUIVARIANCE_FAMILIES = ("fc2", "fc_layer_first", "fc_layer_middle", "fc_layer_last", "stack",
                         "quadratic", "lifted_phi0")


def equivariance_spec(family, dim=2, activation="tanh"):
    """Feature map used by the equivariance check for a family name."""
    sigma = get_activation(activation)
    if family == "fc2":
        return F.fc2_spec(dim, sigma)
    if family == "fc_layer_first":
        return F.fc_layer_spec(dim, 3, 2, sigma, "first")
    if family == "fc_layer_middle":
        return F.fc_layer_spec(3, 4, 2, sigma, "middle")
    if family == "fc_layer_last":
        return F.fc_layer_spec(3, 4, dim, sigma, "last")
    if family == "stack":
        return F.fc_stack_spec(dim, [(3, 2), (3, dim)], [sigma])
    if family == "quadratic":
        return F.quadratic_spec(dim, sigma)
    if family == "lifted_phi0":
        return F.lifted_phi0_spec(dim, "tanh")
    raise ValueError("unknown equivariance family %r" % (family,))


def _normalize_columns(spec, flat):
    if spec.family not in ("fc_layer", "fc_stack", "gconv_lift"):
        return flat
    xi = spec.unpack(flat)
    layers = (xi,) if spec.family == "fc_layer" else xi
    fixed = []
    for lp in layers:
        C = np.asarray(lp.C)
        fixed.append(LayerParam(lp.A, lp.b, C / np.linalg.norm(C, axis=-2, keepdims=True)))
    return spec.pack(fixed[0] if spec.family == "fc_layer" else tuple(fixed))


def random_params(spec, gen, n, box=None):
    """``n`` flat parameter vectors: normal, or uniform on ``box``; ``C`` columns normalized."""
    if box is None:
        flat = gen.standard_normal((n, spec.param_dim))
    else:
        box = np.asarray(box, dtype=float)
        flat = gen.uniform(box[:, 0], box[:, 1], (n, spec.param_dim))
    return _normalize_columns(spec, flat)


def _group_dim(spec):
    if spec.family == "fc_layer" and groups.LayerRole(spec.role) is groups.LayerRole.LAST:
        return spec.layers[0].out
    return spec.input_dim


def _corrupted(spec, g):
    """A plausible but wrong parameter action, for negative controls."""
    if spec.family == "lifted_phi0":
        return lambda h: groups.compose(h, g)
    if spec.family == "fc_layer" and groups.LayerRole(spec.role) is groups.LayerRole.MIDDLE:
        return lambda xi: groups.act_on_param(g, xi, "first")
    if spec.family == "fc_layer" and groups.LayerRole(spec.role) is groups.LayerRole.LAST:
        eye = np.eye(g.dim)
        return lambda xi: spec.act_param(groups.ortho_affine(eye, g.L, g.t), xi)
    if g.variant == "affine":
        h = groups.affine(g.L, np.zeros(g.dim))
    else:
        h = groups.ortho_affine(g.Q, g.L, np.zeros(g.dim))
    return lambda xi: spec.act_param(h, xi)


def check_joint_equivariance(spec, n_samples=1000, seed=0, tolerance=1e-9, corrupt=False, scale=1.0,
                             name=None, expected=None, config=None):
    """Sampled ``max ||phi(g x, g.xi) - g phi(x, xi)|| / (1 + ||phi(x, xi)||)``.

    Parameters
    ----------
    spec : FeatureMapSpec
    n_samples : int
        Number of ``(g, x, xi)`` triples.
    corrupt : bool
        Use a deliberately wrong parameter action (a negative control that
        must fail).
    scale : float
        Forwarded to :func:`sample_group_element`.
    """
    gen = rng(seed)
    m = _group_dim(spec)
    variant = spec.variant
    worst = 0.0
    for _ in range(int(n_samples)):
        g = sample_group_element(variant, m, gen, scale)
        x = gen.standard_normal(spec.input_dim)
        if spec.family == "lifted_phi0":
            xi = sample_group_element("ortho_affine", spec.input_dim, gen, scale)
        else:
            xi = spec.unpack(random_params(spec, gen, 1)[0])
        moved = _corrupted(spec, g)(xi) if corrupt else spec.act_param(g, xi)
        lhs = spec.evaluate(spec.act_data(g, x), moved)
        base = spec.evaluate(x, xi)
        rhs = spec.act_output(g, base)
        dev = np.linalg.norm(np.ravel(lhs - rhs)) / (1.0 + np.linalg.norm(np.ravel(base)))
        if not np.isfinite(dev):
            dev = np.inf
        worst = max(worst, float(dev))
    fam = spec.family if spec.role is None else "%s_%s" % (spec.family, groups.LayerRole(spec.role).value)
    label = name or "equivariance:%s%s" % (fam, ":corrupt" if corrupt else "")
    cfg = config or {"kind": "equivariance", "spec": spec.to_json(), "corrupt": corrupt}
    return _single(label, "equivariance", int(n_samples), worst, tolerance,
                   expected or ("fail" if corrupt else "pass"), seed, cfg,
                   details={"family": fam, "group_variant": variant, "group_dim": m})


# ----------------------------------------------------------------------------
# unitarity


def _gaussian_1d(c, w):
    return lambda x: np.exp(-0.5 * ((np.asarray(x)[..., 0] - c) / w) ** 2)


def _pi_deviation(grid, samples, seed):
    gen = rng(seed)
    x = grid.nodes
    worst = 0.0
    for _ in range(samples):
        g = sample_group_element("affine", 1, gen, MODERATE)
        c = gen.uniform(-0.5, 0.5, 2)
        w = gen.uniform(0.5, 1.0, 2)
        f1, f2 = _gaussian_1d(c[0], w[0]), _gaussian_1d(c[1], w[1])
        ip = integrate(f1(x) * f2(x), grid)
        norm = np.sqrt(integrate(f1(x) ** 2, grid) * integrate(f2(x) ** 2, grid))
        ipg = integrate(groups.pi_action(g, f1, x) * groups.pi_action(g, f2, x), grid)
        worst = max(worst, abs(ipg - ip) / norm)
    return worst


def _pihat_deviation(grid, samples, seed, measure_preserving):
    gen = rng(seed)
    spec = F.fc2_spec(1, "gauss")
    xi = grid.nodes
    unpacked = spec.unpack(xi)
    expo = 0.0 if measure_preserving else 0.5 * spec.jacobian_exponent()
    worst = 0.0
    for _ in range(samples):
        g = sample_group_element("affine", 1, gen, MODERATE)
        if measure_preserving:
            g = groups.affine([[float(np.sign(g.L[0, 0]))]], g.t)
        c = gen.uniform(-0.5, 0.5, (2, 2))
        w = gen.uniform(0.6, 1.0, 2)
        fs = [gaussian_bump(c[i], w[i]) for i in range(2)]
        ip = integrate(fs[0](xi) * fs[1](xi), grid)
        norm = np.sqrt(integrate(fs[0](xi) ** 2, grid) * integrate(fs[1](xi) ** 2, grid))
        pulled = [groups.pihat_action(g, lambda p, f=f: f(spec.pack(p)), unpacked, "depth2", expo) for f in fs]
        worst = max(worst, abs(integrate(pulled[0] * pulled[1], grid) - ip) / norm)
    return worst


def check_unitarity(representation="pi", n_samples=50, seed=0, tolerance=1e-3, grid=None,
                    measure_preserving=False, refine=True, name=None, config=None):
    """Inner-product preservation of ``pi`` (data side) or ``pihat`` (parameter side), ``m = 1``.

    Pairs of Gaussians are compared before and after a group element with
    ``L`` in ``[1/2, 2]``.  The deviation is normalized by ``||f1|| ||f2||``.
    For ``pihat`` the pull-back carries ``|det L|^{J/2}`` unless
    ``measure_preserving`` is set, in which case only ``|det L| = 1``
    elements are drawn and the bare pull-back is used.  With ``refine`` the
    check is repeated on the doubled grid and the deviation must not grow
    (it must halve unless already below ``1e-12``).
    """
    if representation == "pi":
        grid = grid or build_grid([[-8.0, 8.0]], 49, "trapezoid")
        run = lambda gr: _pi_deviation(gr, n_samples, seed)
    elif representation == "pihat":
        grid = grid or build_grid([[-8.0, 8.0]] * 2, 48, "midpoint")
        run = lambda gr: _pihat_deviation(gr, n_samples, seed, measure_preserving)
    else:
        raise ValueError("representation must be 'pi' or 'pihat'")
    coarse = run(grid)
    comps = [Component("deviation", coarse, tolerance)]
    details = {"grid": grid.describe(), "deviation": coarse, "measure_preserving": measure_preserving}
    if refine:
        fine = run(grid.refined(2))
        comps.append(Component("refinement", fine / max(0.5 * coarse, 1e-12), 1.0))
        details["refined_deviation"] = fine
    label = name or "unitarity:%s%s" % (representation, ":measure_preserving" if measure_preserving else "")
    cfg = config or {"kind": "unitarity", "representation": representation, "grid": grid.describe(),
                     "measure_preserving": measure_preserving, "samples": n_samples}
    caveats = [] if representation == "pi" or measure_preserving else [
        "parameter-side pull-back weighted by |det L|^(J/2) so that it preserves Lebesgue measure"]
    return _composite(label, "unitarity", n_samples, comps, "pass", seed, cfg, details=details,
                      caveats=caveats)


# ----------------------------------------------------------------------------
# intertwining


def _bump(spec, center, width):
    if center is None:
        center = [0.8, 0.3] + [0.0] * (spec.param_dim - 2)
    center = np.asarray(center, dtype=float)
    if center.size != spec.param_dim:
        raise ValueError("bump center needs %d coordinates" % spec.param_dim)
    return gaussian_bump(center, width)


def check_intertwining(side, pipeline, n_samples=20, seed=0, tolerance=1e-2, bump=None, xi_samples=16,
                       xi_box=None, refine=True, refine_ratio=0.5, name=None, config=None):
    """``S[pihat_g gamma] = pi_g S[gamma]`` (side ``S``) or ``R[pi_g f] ~ R[f](g^{-1} .)`` (side ``R``).

    The S side pulls a Gaussian bump back on ``pipeline.xi_grid`` and
    evaluates at ``pipeline.eval_points``; the R side uses the first target
    and ``xi_samples`` random parameters.  With ``refine`` the worst
    residual is recomputed on the doubled grid (``xi`` grid for S, data grid
    for R) and must shrink by ``refine_ratio`` (or be below ``1e-12``).
    """
    if isinstance(pipeline, dict):
        pipeline = build_pipeline(pipeline)
    gen = rng(seed)
    m = pipeline.dim
    variant = pipeline.phi.variant
    elements = [sample_group_element(variant, m, gen, MODERATE) for _ in range(int(n_samples))]
    bump = bump or {}
    if side == "S":
        gfun = _bump(pipeline.phi, bump.get("center"), bump.get("width", 0.7))

        def run(grid):
            gamma = ParamDistribution.from_callable(grid, gfun)
            return max(intertwine_check_S(gamma, pipeline.phi, g, pipeline.eval_points) for g in elements)

        base_grid = pipeline.xi_grid
    elif side == "R":
        box = xi_box or [[-3.0, 3.0]] * pipeline.psi.param_dim
        xi = random_params(pipeline.psi, gen, int(xi_samples), box)
        f = pipeline.targets[0]

        def run(grid):
            return max(intertwine_check_R(f, pipeline.psi, g, xi, grid) for g in elements)

        base_grid = pipeline.x_grid
    else:
        raise ValueError("side must be 'S' or 'R'")
    coarse = run(base_grid)
    comps = [Component("residual", coarse, tolerance)]
    details = {"side": side, "family": pipeline.phi.family, "residual": coarse, "grid": base_grid.describe()}
    if refine:
        fine = run(base_grid.refined(2))
        comps.append(Component("refinement", fine / max(refine_ratio * coarse, 1e-12), 1.0))
        details["refined_residual"] = fine
    label = name or "intertwining:%s:%s" % (pipeline.kind, side)
    cfg = config or {"kind": "intertwining", "side": side, "pipeline": pipeline.config}
    return _composite(label, "intertwining", int(n_samples), comps, "pass", seed, cfg, details=details)


# ----------------------------------------------------------------------------
# scalar identity


def _run_targets(pipeline, psi):
    runs = []
    for f in pipeline.targets:
        runs.append(reconstruct(f, pipeline.phi, psi, pipeline.x_grid, pipeline.xi_grid,
                                pipeline.eval_points, pipeline.reference_constant))
    return runs


def _near_zero(run, tol):
    return run.constant is None or not abs(run.constant) >= tol * run.natural_scale


def check_scalar_identity(pipeline, seed=0, name=None, config=None, duality=None):
    """``S[R[f]] = c f`` with one constant across targets.

    Components: fitted residual per target (unless the pipeline is not
    residual-gated), relative spread of the fitted constants, agreement with
    the reference constant when one is configured, and the duality gap of
    the first target (skipped when the pipeline sets ``duality: false``).  A constant below ``near_zero`` times the natural
    scale is inconclusive; if an alternate analysis profile is configured
    the check is rerun with it first.
    """
    if isinstance(pipeline, dict):
        pipeline = build_pipeline(pipeline)
    tol = pipeline.tolerances
    psi = pipeline.psi
    runs = _run_targets(pipeline, psi)
    details = {"family": pipeline.phi.family, "analysis": _profile_names(psi)}
    caveats = []
    if any(_near_zero(r, tol["near_zero"]) for r in runs) and pipeline.alternate_psi is not None:
        details["retry"] = {"reason": "constant below %g of the natural scale" % tol["near_zero"],
                            "first_constants": [r.constant for r in runs]}
        psi = pipeline.alternate_psi
        runs = _run_targets(pipeline, psi)
        details["analysis"] = _profile_names(psi)
    details["targets"] = [dict(r.summary(), target=f.name) for r, f in zip(runs, pipeline.targets)]
    label = name or "scalar_identity:%s" % pipeline.kind
    cfg = config or {"kind": "scalar_identity", "pipeline": pipeline.config}
    if any(_near_zero(r, tol["near_zero"]) for r in runs):
        caveats.append("fitted constant is zero or below %g of the natural scale; the identity "
                       "cannot be distinguished from cancellation" % tol["near_zero"])
        return _composite(label, "scalar_identity", len(runs), [], "pass", seed, cfg, outcome="inconclusive",
                          details=details, caveats=caveats)
    comps = []
    if pipeline.residual_gated:
        comps += [Component("residual[%d]" % i, r.residual, tol["residual"]) for i, r in enumerate(runs)]
    else:
        caveats.append("uniform residual recorded but not gated for this pipeline")
    c0 = runs[0].constant
    spread = max((abs(r.constant - c0) / abs(c0) for r in runs[1:]), default=0.0)
    agreement = Component("constant_agreement", spread, tol["agreement"])
    comps.append(agreement)
    details["constant_spread"] = spread
    if pipeline.reference_constant is not None:
        ref = pipeline.reference_constant
        comps.append(Component("reference_agreement",
                               max(abs(r.constant - ref) / abs(ref) for r in runs), tol["reference"]))
    if duality is None:
        duality = pipeline.config.get("duality", True)
    if duality:
        gap = duality_gap(runs[0].gamma, pipeline.targets[0], psi, pipeline.x_grid,
                          analysis_values=runs[0].gamma.values)
        comps.append(Component("duality_gap", gap, tol["duality"]))
        details["duality_gap"] = gap
    outcome = None
    if pipeline.inconclusive_on_disagreement and not all(c.passed for c in comps):
        outcome = "inconclusive"
        caveats.append("constants disagree across targets; recorded without a verdict")
    return _composite(label, "scalar_identity", len(runs), comps, "pass", seed, cfg, outcome=outcome,
                      details=details, caveats=caveats)


def _profile_names(spec):
    if spec.family == "gconv_lift":
        spec = spec.base
    return [a.name for a in spec.activations]


# ----------------------------------------------------------------------------
# group-convolution link


def check_gcn_fcn_link(pipeline, n_samples=10, seed=0, tolerance=1e-12, corrupt=False, name=None, config=None):
    """``GCN[gamma](x)(g) = T_g DNN[gamma](T_g^{-1} x)`` for every ``g`` of the cyclic group.

    ``gamma`` is seeded standard-normal noise on the pipeline's parameter
    grid.  The corrupted variant compares against ``T_g^{-1} DNN(T_g x)``
    (the action in the wrong direction) and must fail.
    """
    if isinstance(pipeline, dict):
        pipeline = build_pipeline(pipeline)
    spec = pipeline.phi
    if spec.family != "gconv_lift":
        raise ValueError("the link check needs a gconv pipeline")
    gen = rng(seed)
    gamma = ParamDistribution(pipeline.xi_grid, gen.standard_normal(pipeline.xi_grid.size))
    x = gen.standard_normal((int(n_samples), spec.input_dim))
    worst = 0.0
    for s in range(spec.k):
        g = groups.cyclic(s, spec.k)
        lhs = gcn_network_apply(gamma, spec, x, g)
        if corrupt:
            inner = network_apply(gamma, spec.base, groups.act_on_data(g, x))
            rhs = groups.act_on_output(groups.inverse(g), inner)
        else:
            rhs = fcn_translate(gamma, spec.base, x, g)
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(rhs))))))
    label = name or "gcn_link%s" % (":corrupt" if corrupt else "")
    cfg = config or {"kind": "gcn_link", "pipeline": pipeline.config, "corrupt": corrupt}
    return _single(label, "gcn_link", int(n_samples) * spec.k, worst, tolerance,
                   "fail" if corrupt else "pass", seed, cfg, details={"k": spec.k, "grid": pipeline.xi_grid.size})


def check_gcn_reconstruction(pipeline, seed=0, tolerance=1e-12, name=None, config=None):
    """GCN output at every shift against ``c tau_g[f1]``, with the identity-shift residual as the bound.

    The evaluation set should be invariant under the cyclic shifts (a cube
    grid is), so the residual at every shift equals the base network's.
    """
    if isinstance(pipeline, dict):
        pipeline = build_pipeline(pipeline)
    spec, f1 = pipeline.phi, pipeline.targets[0]
    gamma = ridgelet_distribution(f1, pipeline.psi.base, pipeline.xi_grid, pipeline.x_grid)
    base_tv = network_apply(gamma, spec.base, pipeline.eval_points)
    from .transforms.operators import rayleigh_constant, uniform_residual

    fv = f1.values(pipeline.eval_points)
    c = rayleigh_constant(base_tv, fv)
    fcn_res = uniform_residual(base_tv, fv, c)
    elements = [groups.cyclic(s, spec.k) for s in range(spec.k)]
    out = gcn_reconstruction(gamma, spec, f1, pipeline.eval_points, elements, constant=c)
    comps = [Component("shift[%d]" % s, abs(r - fcn_res), tolerance * max(1.0, fcn_res))
             for s, r in sorted(out["residuals"].items())]
    details = {"constant": c, "fcn_residual": fcn_res,
               "gcn_residuals": {str(s): r for s, r in sorted(out["residuals"].items())}}
    label = name or "gcn_reconstruction"
    cfg = config or {"kind": "gcn_reconstruction", "pipeline": pipeline.config}
    return _composite(label, "gcn_reconstruction", spec.k, comps, "pass", seed, cfg, details=details,
                      caveats=["base-network residual recorded, bound is relative to it"])


# ----------------------------------------------------------------------------
# discretization and kernel diagnostic


def check_discretization(pipeline, seed=0, slack=0.1, ratio=0.5, name=None, config=None):
    """Finite networks on refined partitions: the uniform error must decrease.

    Each error may exceed its predecessor by at most ``slack`` (relative),
    and the last error must be at most ``ratio`` times the first.  The rate constant ``max_n n * error(n)`` and the observed order are
    reported.  The gap between the fine reference and ``c f`` (truncation)
    is reported separately.
    """
    if isinstance(pipeline, dict):
        pipeline = build_pipeline(pipeline)
    d = pipeline.config.get("discretize", {})
    f = pipeline.targets[d.get("target_index", 0)]
    psi, x_grid = pipeline.psi, pipeline.x_grid
    gamma = lambda xi: ridgelet_apply(f, psi, xi, x_grid)
    box = d.get("box", pipeline.xi_grid.box)
    levels = d.get("levels", [4, 8, 16, 32])
    test = pipeline.eval_points
    if "test_points" in d:
        tp = grid_from_spec(d["test_points"])
        test = np.asarray(getattr(tp, "nodes", tp), dtype=float).reshape(-1, pipeline.dim)
    study = discretization_study(gamma, pipeline.phi, box, levels, d.get("reference_points", 256), test)
    errs = study["errors"]
    ratios = [b / a if a > 0 else (0.0 if b == 0 else np.inf) for a, b in zip(errs, errs[1:])]
    comps = [Component("monotone", max(ratios, default=0.0), 1.0 + slack),
             Component("overall_ratio", errs[-1] / errs[0] if errs[0] > 0 else 0.0, ratio)]
    from .transforms.operators import rayleigh_constant, uniform_residual

    fv = f.values(test)
    c = rayleigh_constant(study["reference"], fv)
    details = {"levels": study["levels"], "errors": errs, "rate_constant": study["rate_constant"],
               "observed_order": study["observed_order"], "terms": [len(n) for n in study["networks"]],
               "truncation_residual": uniform_residual(study["reference"], fv, c), "constant": c}
    label = name or "discretization:%s" % pipeline.kind
    cfg = config or {"kind": "discretization", "pipeline": pipeline.config}
    return _composite(label, "discretization", len(levels), comps, "pass", seed, cfg, details=details)


def check_kernel_l2(pipeline, x_grid=None, xi_grid=None, seed=0, name=None, config=None):
    """Record the squared L2 norm of the reconstruction kernel (informational, never gates)."""
    if isinstance(pipeline, dict):
        pipeline = build_pipeline(pipeline)
    xg = x_grid or build_grid([[-4.0, 4.0]] * pipeline.dim, 17, "trapezoid")
    xig = xi_grid or build_grid([[-8.0, 8.0]] * pipeline.phi.param_dim, 16, "midpoint")
    value = kernel_l2_diagnostic(pipeline.phi, pipeline.psi, xg, xg, xig)
    label = name or "kernel_l2:%s" % pipeline.kind
    cfg = config or {"kind": "kernel_l2", "pipeline": pipeline.config}
    return CheckReport(label, "kernel_l2", xg.size, _num(value), None, "pass", "pass", seed, digest(cfg),
                       details={"kernel_l2_squared": value, "x_grid": xg.describe(), "xi_grid": xig.describe()},
                       caveats=["diagnostic only: a finite value on truncated grids does not certify "
                                "boundedness of the kernel operator"])


# ----------------------------------------------------------------------------
# suite


def run_check(spec, seed):
    """Run one check described by a suite entry."""
    kind = spec["kind"]
    if isinstance(spec.get("pipeline"), str):
        spec = dict(spec, pipeline=resolve_pipeline(spec["pipeline"]))
    seed = spec.get("seed", seed)
    name = spec.get("name")
    common = {"seed": seed, "name": name, "config": spec}
    if kind == "equivariance":
        fam = spec["family"]
        ev = equivariance_spec(fam, spec.get("dim", 2), spec.get("activation", "tanh"))
        rep = check_joint_equivariance(ev, spec.get("samples", 1000), tolerance=spec.get("tolerance", 1e-9),
                                       corrupt=spec.get("corrupt", False), expected=spec.get("expect"), **common)
        return rep
    if kind == "unitarity":
        grid = grid_from_spec(spec["grid"]) if "grid" in spec else None
        return check_unitarity(spec.get("representation", "pi"), spec.get("samples", 50),
                               tolerance=spec.get("tolerance", 1e-3), grid=grid,
                               measure_preserving=spec.get("measure_preserving", False),
                               refine=spec.get("refine", True), **common)
    if kind == "intertwining":
        return check_intertwining(spec["side"], spec["pipeline"], spec.get("samples", 20),
                                  tolerance=spec.get("tolerance", 1e-2), bump=spec.get("bump"),
                                  xi_samples=spec.get("xi_samples", 16), xi_box=spec.get("xi_box"),
                                  refine=spec.get("refine", True), refine_ratio=spec.get("refine_ratio", 0.5),
                                  **common)
    if kind == "scalar_identity":
        return check_scalar_identity(spec["pipeline"], **common)
    if kind == "gcn_link":
        return check_gcn_fcn_link(spec["pipeline"], spec.get("samples", 10),
                                  tolerance=spec.get("tolerance", 1e-12), corrupt=spec.get("corrupt", False),
                                  **common)
    if kind == "gcn_reconstruction":
        return check_gcn_reconstruction(spec["pipeline"], tolerance=spec.get("tolerance", 1e-12), **common)
    if kind == "discretization":
        return check_discretization(spec["pipeline"], slack=spec.get("slack", 0.1), ratio=spec.get("ratio", 0.5),
                                    **common)
    if kind == "kernel_l2":
        xg = grid_from_spec(spec["x_grid"]) if "x_grid" in spec else None
        xig = grid_from_spec(spec["xi_grid"]) if "xi_grid" in spec else None
        return check_kernel_l2(spec["pipeline"], xg, xig, **common)
    raise ValueError("unknown check kind %r" % (kind,))


@dataclass
class SuiteResult:
    name: str
    seed: int
    config_digest: str
    reports: List[CheckReport]

    @property
    def counts(self):
        out = {k: 0 for k in OUTCOMES}
        for r in self.reports:
            out[r.outcome] += 1
        return out

    @property
    def ok(self):
        """True when every conclusive check matched its expected outcome."""
        return all(r.as_expected for r in self.reports)

    def to_json(self):
        return {"suite": self.name, "seed": self.seed, "config_digest": self.config_digest,
                "ok": self.ok, "counts": self.counts, "reports": [r.to_json() for r in self.reports]}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def run_suite(config, seed=None, threads=None, progress=None):
    """Run every check of a suite config.

    Parameters
    ----------
    config : dict
        Validated against the suite schema.
    seed : int, optional
        Overrides the config seed; check ``i`` uses ``seed + i`` unless it
        sets its own.
    threads : int, optional
        Worker threads for the batch axis (does not change any result).
    progress : callable, optional
        Called with each finished report.
    """
    config = validate_suite(copy.deepcopy(config))
    if seed is not None:
        config["seed"] = int(seed)
    base = int(config.get("seed", 0))
    nthreads = threads if threads is not None else config.get("threads")
    reports = []
    with parallel.threads(nthreads):
        for i, chk in enumerate(config["checks"]):
            rep = run_check(chk, base + i)
            reports.append(rep)
            if progress is not None:
                progress(rep)
    cfg = dict(config)
    cfg.pop("threads", None)
    return SuiteResult(config.get("name", "suite"), base, digest(cfg), reports)

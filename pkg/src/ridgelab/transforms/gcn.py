"""Group-convolutional networks over a cyclic group and their link to the base network."""

import numpy as np

from .. import groups
from .operators import network_apply, rayleigh_constant, ridgelet_apply, uniform_residual


def gcn_network_apply(gamma, spec, x, g):
    """``GCN[gamma](x)(g) = int gamma(xi) T_g[phi(T_g^{-1} x, xi)] dxi``.

    ``spec`` is a ``gconv_lift`` spec (its own shift is ignored) or the base
    ``fc_stack`` spec, which is lifted here.
    """
    from ..features import gconv_spec

    if spec.family != "gconv_lift":
        spec = gconv_spec(spec)
    if g.variant != "cyclic" or g.k != spec.k:
        raise ValueError("need a cyclic element of order %d" % spec.k)
    return network_apply(gamma, spec.at_shift(g.shift), x)


def fcn_translate(gamma, base_spec, x, g):
    """``tau_g[DNN[gamma]](x) = T_g DNN[gamma](T_g^{-1} x)``, the right-hand side of the link identity."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    inner = network_apply(gamma, base_spec, groups.act_on_data(groups.inverse(g), x))
    return groups.act_on_output(g, inner)


def gcn_ridgelet_apply(f1, psi_spec, xi, x_grid):
    """``CR[f](xi) = int <f(x)(1_G), psi(x, xi)> dx``, i.e. ``R`` applied to the identity slice ``f1``."""
    if psi_spec.family == "gconv_lift":
        psi_spec = psi_spec.base
    return ridgelet_apply(f1, psi_spec, xi, x_grid)


def equivariant_target(f1, g):
    """``x -> tau_g[f1](x) = T_g f1(T_g^{-1} x)``."""
    return lambda x: groups.pi_action(g, f1.values, x)


def gcn_reconstruction(gamma, spec, f1, eval_points, elements, constant=None):
    """Compare ``GCN[gamma](x)(g)`` with ``c tau_g[f1](x)`` for each element in ``elements``.

    ``constant`` defaults to the Rayleigh fit at the identity element.

    Returns
    -------
    dict
        ``{"constant": c, "residuals": {shift: residual}}``.
    """
    x = np.atleast_2d(np.asarray(eval_points, dtype=float))
    out = {}
    values = {}
    for g in elements:
        values[g.shift] = (gcn_network_apply(gamma, spec, x, g), equivariant_target(f1, g)(x))
    if constant is None:
        if 0 not in values:
            e = groups.cyclic(0, x.shape[-1])
            values[0] = (gcn_network_apply(gamma, spec, x, e), f1.values(x))
        constant = rayleigh_constant(*values[0])
    for shift, (tv, fv) in values.items():
        out[shift] = uniform_residual(tv, fv, constant)
    return {"constant": constant, "residuals": out}

"""Kernel diagnostic and intertwining residuals."""

import numpy as np

from .. import groups
from ..numerics.parallel import chunked_map
from ..numerics.quadrature import DEFAULT_NODE_CAP, SizingError
from ..numerics.summation import compensated_reduce, weighted_sum
from .functions import ParamDistribution
from .operators import network_apply, ridgelet_apply


def kernel_l2_diagnostic(phi, psi, x_grid, y_grid, xi_grid, cap=DEFAULT_NODE_CAP):
    """Squared L2 norm of ``k(x, y) = int psi(y, xi) conj(phi(x, xi)) dxi``.

    For vector-valued maps ``k`` is the matrix ``psi phi^T`` and the
    Frobenius norm is used.  Cost is ``|x| |y| |xi|`` products.

    Raises
    ------
    SizingError
        If ``|x| |y| |xi|`` exceeds ``cap``.
    """
    nx, ny, nxi = x_grid.size, y_grid.size, xi_grid.size
    if nx * ny * nxi > cap:
        raise SizingError("kernel diagnostic needs %d products, above the cap of %d" % (nx * ny * nxi, cap))
    nodes, wxi = xi_grid.nodes, xi_grid.weights
    Phi = phi.evaluate_flat(x_grid.nodes[None, :, :], nodes[:, None, :])  # (nxi, nx, o)
    Psi = psi.evaluate_flat(y_grid.nodes[None, :, :], nodes[:, None, :])  # (nxi, ny, o')
    Phi = np.conj(Phi)
    o, op = Phi.shape[-1], Psi.shape[-1]

    def run(a0, a1):
        def terms(i0, i1):
            return (wxi[i0:i1, None, None, None, None] * Psi[i0:i1, None, :, :, None]
                    * Phi[i0:i1, a0:a1, None, None, :])

        K = compensated_reduce(terms, nxi, (a1 - a0, ny, op, o))
        return np.sum(np.abs(K) ** 2, axis=(2, 3))  # (a, ny)

    sq = np.concatenate(chunked_map(run, nx, 16), axis=0)
    inner = np.stack([weighted_sum(y_grid.weights, row) for row in sq])
    return float(weighted_sum(x_grid.weights, inner))


def intertwine_check_S(gamma, phi, g, eval_points):
    """Relative residual of ``S[pihat_g gamma] = pi_g S[gamma]``.

    ``gamma`` must carry its callable.  The pull-back is weighted by
    ``|det L|^(J - 1/2)`` where ``J`` is the Jacobian exponent of the joint
    parameter action: that is the factor for which the identity holds
    exactly with Lebesgue measure on the parameter grid.
    """
    if gamma.eval is None:
        raise ValueError("intertwining check needs gamma as a callable")
    x = np.atleast_2d(np.asarray(eval_points, dtype=float))
    if x.shape[-1] != phi.input_dim:
        x = x.reshape(-1, phi.input_dim)
    ginv = groups.inverse(g)
    expo = phi.jacobian_exponent() - 0.5
    pulled = gamma.eval(phi.act_param_flat(ginv, gamma.grid.nodes)) * g.abs_det ** expo
    left = network_apply(ParamDistribution(gamma.grid, pulled), phi, x)
    inner = network_apply(gamma, phi, phi.act_data(ginv, x))
    right = phi.act_output(g, inner) * g.abs_det ** -0.5
    return _relative(left, right)


def intertwine_check_R(f, psi, g, xi_points, x_grid):
    """Relative residual of ``R[pi_g f] = |det L|^{1/2} R[f](g^{-1} .)``.

    The output rotation ``Q`` of ``g`` acts on the values of ``f`` even
    when ``f`` is scalar (``Q = -1`` flips the sign in one dimension).
    """
    from .functions import SampledFunction

    xi = np.atleast_2d(np.asarray(xi_points, dtype=float))

    def moved_eval(x):
        # f.values keeps the component axis, so Q also acts on 1-D outputs.
        y = groups.pi_action(g, f.values, x)
        return y[..., 0] if f.codomain_dim == 1 else y

    moved = SampledFunction(moved_eval, f.domain_dim, f.codomain_dim, f.support_radius, "pi_g " + f.name)
    left = ridgelet_apply(moved, psi, xi, x_grid)
    right = ridgelet_apply(f, psi, psi.act_param_flat(groups.inverse(g), xi), x_grid) * g.abs_det ** 0.5
    return _relative(left, right)


def _relative(left, right):
    left, right = np.asarray(left), np.asarray(right)
    scale = float(np.max(np.abs(left)))
    diff = float(np.max(np.abs(left - right)))
    if scale == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / scale

"""Synthesis ``S``, analysis ``R`` and the composite ``T = S o R`` on grids."""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..numerics.parallel import chunked_map
from ..numerics.quadrature import QuadratureGrid
from ..numerics.summation import NonFiniteError, compensated_reduce, neumaier_sum
from .functions import ParamDistribution, SampledFunction

#: Batch chunk sizes (evaluation points per task).  Results never depend on them.
SYNTH_CHUNK = 64
ANALYSIS_CHUNK = 2048


def _as_points(x, m):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and m != 1 or x.ndim == 0
    x = np.atleast_1d(x)
    if x.ndim == 1:
        x = x[None, :] if single else x[:, None]
    if x.shape[-1] != m:
        raise ValueError("points must have %d coordinates" % m)
    return x, single


def network_apply(gamma, spec, x, absolute=False):
    """Synthesis ``S[gamma](x) = int gamma(xi) phi(x, xi) dxi`` by quadrature.

    Parameters
    ----------
    gamma : ParamDistribution
    spec : FeatureMapSpec
    x : array_like
        Evaluation points, shape ``(B, m)`` (``(B,)`` is accepted for ``m = 1``).
    absolute : bool
        Integrate ``|gamma phi|`` instead (the cancellation-free scale).

    Returns
    -------
    numpy.ndarray
        Shape ``(B, output_dim)``; ``(output_dim,)`` for a single point.
    """
    pts, single = _as_points(x, spec.input_dim)
    nodes = gamma.grid.nodes
    coeff = gamma.grid.weights * gamma.values
    if absolute:
        coeff = np.abs(coeff)
    n, out = gamma.grid.size, spec.output_dim

    def run(b0, b1):
        xb = pts[None, b0:b1, :]

        def terms(i0, i1):
            phi = spec.evaluate_flat(xb, nodes[i0:i1, None, :])
            if absolute:
                phi = np.abs(phi)
            return coeff[i0:i1, None, None] * phi

        return compensated_reduce(terms, n, (b1 - b0, out))

    res = np.concatenate(chunked_map(run, pts.shape[0], SYNTH_CHUNK), axis=0)
    return res[0] if single else res


def ridgelet_apply(f, spec, xi, x_grid):
    """Analysis ``R[f](xi) = int <f(x), psi(x, xi)> dx`` by quadrature on ``x_grid``.

    Parameters
    ----------
    f : SampledFunction
    spec : FeatureMapSpec
        The analysis map ``psi``.
    xi : array_like
        Flat parameter vectors, shape ``(N, P)`` or ``(P,)``.
    x_grid : QuadratureGrid

    Returns
    -------
    numpy.ndarray or float
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xi = np.atleast_2d(xi)
    if f.codomain_dim != spec.output_dim:
        raise ValueError("target has %d components, feature map %d" % (f.codomain_dim, spec.output_dim))
    xs = x_grid.nodes
    fx = f.values(xs)
    if not np.all(np.isfinite(fx)):
        raise NonFiniteError("target is non-finite on the data grid")
    wx = x_grid.weights
    k = fx.shape[-1]

    def run(n0, n1):
        block = xi[None, n0:n1, :]

        def terms(i0, i1):
            psi = spec.evaluate_flat(xs[i0:i1, None, :], block)
            fb = fx[i0:i1, None, :]
            inner = fb[..., 0] * psi[..., 0]
            for j in range(1, k):
                inner = inner + fb[..., j] * psi[..., j]
            return wx[i0:i1, None] * inner

        return compensated_reduce(terms, x_grid.size, (n1 - n0,))

    res = np.concatenate(chunked_map(run, xi.shape[0], ANALYSIS_CHUNK))
    return float(res[0]) if single else res


def ridgelet_distribution(f, spec, xi_grid, x_grid):
    """``R[f]`` materialized on every node of ``xi_grid``."""
    return ParamDistribution(xi_grid, ridgelet_apply(f, spec, xi_grid.nodes, x_grid))


def rayleigh_constant(t_values, f_values):
    """``<T f, f> / <f, f>`` over evaluation points; ``None`` when ``||f|| < 1e-12``."""
    t = np.asarray(t_values, dtype=float).ravel()
    fv = np.asarray(f_values, dtype=float).ravel()
    ff = neumaier_sum(fv * fv)
    if not np.sqrt(ff) >= 1e-12:
        return None
    return float(neumaier_sum(t * fv) / ff)


def uniform_residual(t_values, f_values, c):
    """``max |T f - c f| / (|c| max |f|)``: scale-free relative uniform residual."""
    if c is None:
        return None
    t = np.asarray(t_values, dtype=float)
    fv = np.asarray(f_values, dtype=float)
    denom = abs(c) * float(np.max(np.abs(fv)))
    if denom == 0.0:
        return float("inf")
    return float(np.max(np.abs(t - c * fv)) / denom)


@dataclass
class Reconstruction:
    """Result of :func:`reconstruct`.

    ``constant`` is the Rayleigh estimate of the scalar multiplying ``f``;
    ``residual`` is the relative uniform residual after fitting it.
    ``reference_residual`` uses ``reference_constant`` instead of the fit.
    ``natural_scale`` is the same ratio computed from ``|gamma phi|``, so
    ``|constant| / natural_scale`` measures cancellation.
    """

    eval_points: np.ndarray
    f_values: np.ndarray
    t_values: np.ndarray
    gamma: ParamDistribution
    constant: Optional[float]
    residual: Optional[float]
    reference_constant: Optional[float]
    reference_residual: Optional[float]
    natural_scale: float
    x_grid: QuadratureGrid
    xi_grid: QuadratureGrid

    def summary(self):
        return {
            "constant": self.constant,
            "residual": self.residual,
            "reference_constant": self.reference_constant,
            "reference_residual": self.reference_residual,
            "natural_scale": self.natural_scale,
            "grid_sizes": {"x": self.x_grid.size, "xi": self.xi_grid.size,
                           "eval": int(self.eval_points.shape[0])},
        }

    def rows(self):
        m, k = self.eval_points.shape[1], self.f_values.shape[1]
        header = (["x%d" % i for i in range(m)] if m > 1 else ["x"])
        header += (["f%d" % i for i in range(k)] if k > 1 else ["f"])
        header += (["Tf%d" % i for i in range(k)] if k > 1 else ["Tf"])
        body = [list(map(float, np.concatenate([x, fv, tv])))
                for x, fv, tv in zip(self.eval_points, self.f_values, self.t_values)]
        return header, body

    def to_csv(self, path):
        header, body = self.rows()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in body:
                w.writerow([repr(v) for v in row])


def reconstruct(f, phi, psi, x_grid, xi_grid, eval_points, reference_constant=None):
    """``T[f] = S_phi[R_psi[f]]`` at ``eval_points``.

    Parameters
    ----------
    f : SampledFunction
    phi, psi : FeatureMapSpec
        Synthesis and analysis maps of the same family.
    x_grid, xi_grid : QuadratureGrid
    eval_points : array_like
    reference_constant : float, optional
        Known scalar (for example the admissibility constant) used for the
        unfitted residual.

    Returns
    -------
    Reconstruction
    """
    if phi.family != psi.family:
        raise ValueError("synthesis and analysis maps must share a family")
    pts, _ = _as_points(eval_points, phi.input_dim)
    gamma = ridgelet_distribution(f, psi, xi_grid, x_grid)
    tv = network_apply(gamma, phi, pts)
    fv = f.values(pts)
    c = rayleigh_constant(tv, fv)
    ref = None if reference_constant is None else float(reference_constant)
    fmax = float(np.max(np.abs(fv))) if fv.size else 0.0
    scale = float(np.max(network_apply(gamma, phi, pts, absolute=True))) / fmax if fmax > 0 else float("nan")
    return Reconstruction(pts, fv, tv, gamma, c, uniform_residual(tv, fv, c), ref,
                          uniform_residual(tv, fv, ref), scale, x_grid, xi_grid)


def duality_gap(gamma, f, psi, x_grid, analysis_values=None):
    """Relative gap between ``<gamma, R_psi f>`` on the parameter grid and ``<S_psi gamma, f>`` on the data grid.

    ``analysis_values`` may pass ``R_psi f`` on the nodes of ``gamma.grid``
    when it is already known (for example when ``gamma`` is itself ``R f``).
    """
    if analysis_values is None:
        r = ridgelet_apply(f, psi, gamma.grid.nodes, x_grid)
    else:
        r = np.asarray(analysis_values, dtype=float)
    lhs = float(neumaier_sum(gamma.grid.weights * gamma.values * r))
    s = network_apply(gamma, psi, x_grid.nodes)
    fx = f.values(x_grid.nodes)
    rhs = float(neumaier_sum((x_grid.weights[:, None] * s * fx).ravel()))
    denom = max(abs(lhs), abs(rhs))
    return 0.0 if denom == 0.0 else abs(lhs - rhs) / denom

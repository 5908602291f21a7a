"""Admissibility constant of an activation pair and matched analysis profiles."""

import re
from functools import lru_cache

import numpy as np

from ..numerics.activations import ActivationProfile, get_activation
from ..numerics.fourier import fourier_1d
from ..numerics.quadrature import QuadratureGrid, build_grid
from ..numerics.summation import compensated_reduce, weighted_sum

OMEGA_BOX = (-40.0, 40.0)
OMEGA_POINTS = 8192

#: Tabulation window and step for matched profiles (step is a power of two).
TABLE_RADIUS = 64.0
TABLE_STEP = 1.0 / 128.0
_GL_NODES = 20
_PANEL = 0.125


class AdmissibilityError(ValueError):
    """The admissibility integral diverges (or is otherwise unusable)."""


def default_omega_grid():
    return build_grid([OMEGA_BOX], OMEGA_POINTS, "trapezoid")


def _pairing(sigma, rho, m, grid, support_radius):
    w = grid.nodes[:, 0]
    h = np.min(np.diff(np.unique(w))) if w.size > 1 else 1.0
    keep = np.abs(w) > 1e-9 * h
    s = fourier_1d(sigma, w[keep], support_radius)
    r = fourier_1d(rho, w[keep], support_radius)
    integrand = s * np.conj(r) * np.abs(w[keep]) ** (-float(m))
    if not np.all(np.isfinite(integrand)):
        raise AdmissibilityError("admissibility integrand is not finite on the frequency grid")
    total = weighted_sum(grid.weights[keep], integrand)
    return complex(total)


def _as_real(z):
    return z.real if abs(z.imag) <= 1e-12 * max(abs(z.real), 1e-300) else z


def admissibility_constant(sigma, rho, m, omega_grid=None, support_radius=None, detect_divergence=True):
    """``<<sigma, rho>> = int sigma^(w) conj(rho^(w)) |w|^-m dw`` on a truncated frequency grid.

    Parameters
    ----------
    sigma, rho : ActivationProfile
    m : int
        Data dimension (power of ``|w|``).
    omega_grid : QuadratureGrid, optional
        1-D grid; default ``[-40, 40]`` with 8192 trapezoid points.  Nodes at
        ``w = 0`` are dropped.
    support_radius : float, optional
        Forwarded to :func:`fourier_1d` for profiles without closed forms.
    detect_divergence : bool
        Recompute with 2x and 4x as many points of the same rule; if the
        increments do not contract (ratio above 0.8) and exceed ``1e-6``
        relative, the integral is declared divergent.

    Returns
    -------
    float or complex

    Raises
    ------
    AdmissibilityError
    """
    grid = omega_grid if omega_grid is not None else default_omega_grid()
    if not isinstance(grid, QuadratureGrid) or grid.dim != 1:
        raise ValueError("omega_grid must be a 1-D QuadratureGrid")
    value = _pairing(sigma, rho, m, grid, support_radius)
    factor = grid.factors[0]
    if detect_divergence and factor.scheme in ("midpoint", "trapezoid"):
        lo, hi = factor.lo[0], factor.hi[0]
        v2 = _pairing(sigma, rho, m, build_grid([lo, hi], 2 * factor.points, factor.scheme), support_radius)
        v4 = _pairing(sigma, rho, m, build_grid([lo, hi], 4 * factor.points, factor.scheme), support_radius)
        d1, d2 = abs(v2 - value), abs(v4 - v2)
        if d2 > 1e-6 * max(abs(v4), 1e-300) and d2 >= 0.8 * d1:
            raise AdmissibilityError(
                "admissibility integral diverges under refinement (%s, %s, %s)"
                % (_fmt(value), _fmt(v2), _fmt(v4)))
    return _as_real(value)


def _fmt(z):
    return repr(_as_real(z))


def _omega_cutoff(spectrum, m):
    w = 0.5 * np.arange(1, 801)
    mag = np.abs(spectrum(w)) * w ** m
    peak = float(np.max(mag))
    if peak == 0.0:
        return 1.0
    above = np.nonzero(mag > 1e-18 * peak)[0]
    if above[-1] == w.size - 1:
        raise ValueError("spectrum does not decay fast enough for tabulation")
    return float(w[above[-1]] + 1.0)


def _gauss_legendre_panels(hi):
    x, wt = np.polynomial.legendre.leggauss(_GL_NODES)
    npanel = int(np.ceil(hi / _PANEL))
    left = _PANEL * np.arange(npanel)
    nodes = (left[:, None] + 0.5 * _PANEL * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * _PANEL * wt, npanel)
    return nodes, weights


class _InverseTable:
    """Values and derivatives of ``(1/2pi) int rho^(w) exp(iwt) dw`` on a uniform t-grid."""

    def __init__(self, spectrum, m):
        self.m = int(m)
        omega, wts = _gauss_legendre_panels(_omega_cutoff(spectrum, m))
        spec = np.asarray(spectrum(omega)).astype(complex)
        re, im = spec.real, spec.imag
        n = int(round(2 * TABLE_RADIUS / TABLE_STEP)) + 1
        t = -TABLE_RADIUS + TABLE_STEP * np.arange(n)

        def value_terms(i0, i1):
            th = omega[i0:i1, None] * t[None, :]
            return wts[i0:i1, None] * (re[i0:i1, None] * np.cos(th) - im[i0:i1, None] * np.sin(th))

        def deriv_terms(i0, i1):
            th = omega[i0:i1, None] * t[None, :]
            w = omega[i0:i1, None]
            return -wts[i0:i1, None] * w * (re[i0:i1, None] * np.sin(th) + im[i0:i1, None] * np.cos(th))

        self.values = compensated_reduce(value_terms, omega.size, (n,)) / np.pi
        self.derivs = compensated_reduce(deriv_terms, omega.size, (n,)) / np.pi
        self.n = n
        # Tail a/|t|^p + b/|t|^(p+2) matching value and slope at each table edge.
        p, T = self.m + 1, TABLE_RADIUS
        M = np.array([[T ** -p, T ** -(p + 2)], [-p * T ** -(p + 1), -(p + 2) * T ** -(p + 3)]])
        self.tail_left = np.linalg.solve(M, [self.values[0], -self.derivs[0]])
        self.tail_right = np.linalg.solve(M, [self.values[-1], self.derivs[-1]])

    def _coefficients(self):
        v0, v1 = self.values[:-1], self.values[1:]
        d0, d1 = self.derivs[:-1] * TABLE_STEP, self.derivs[1:] * TABLE_STEP
        self.c0, self.c1 = v0.copy(), d0.copy()
        self.c2 = 3.0 * (v1 - v0) - 2.0 * d0 - d1
        self.c3 = 2.0 * (v0 - v1) + d0 + d1

    def _tail(self, t):
        ta = np.abs(t)
        a = np.where(t < 0, self.tail_left[0], self.tail_right[0])
        b = np.where(t < 0, self.tail_left[1], self.tail_right[1])
        return (a + b / (ta * ta)) * ta ** -(self.m + 1.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        t = t.reshape(-1)
        if not hasattr(self, "c0"):
            self._coefficients()
        finite = np.isfinite(t)
        tt = t if finite.all() else np.where(finite, t, 0.0)
        u = tt * (1.0 / TABLE_STEP) + TABLE_RADIUS / TABLE_STEP
        np.clip(u, 0.0, self.n - 1.0, out=u)
        j = u.astype(np.intp)
        np.minimum(j, self.n - 2, out=j)
        s = u - j
        out = self.c3[j]
        out *= s
        out += self.c2[j]
        out *= s
        out += self.c1[j]
        out *= s
        out += self.c0[j]
        far = np.abs(tt) > TABLE_RADIUS
        if far.any():
            out[far] = self._tail(tt[far])
        if not finite.all():
            out[~finite] = np.where(np.isnan(t[~finite]), np.nan, 0.0)
        return out.reshape(shape)


@lru_cache(maxsize=None)
def _raw_matched(sigma, m):
    if sigma.fourier is None:
        raise ValueError("matched profile needs a closed-form Fourier transform of %r" % sigma.name)
    sft = sigma.fourier

    def spectrum(w):
        w = np.asarray(w, dtype=float)
        return np.abs(w) ** m * np.asarray(sft(w))

    table = _InverseTable(spectrum, m)
    return ActivationProfile("matched:%s:%d:raw" % (sigma.name, m), table, spectrum, "polynomial")


def matched_rho(sigma, m, normalize=False):
    """Analysis profile with ``rho^(w) = |w|^m sigma^(w)``.

    The profile is evaluated by numerical inverse Fourier transform on a
    cached table (step ``1/128`` on ``[-64, 64]``, cubic Hermite
    interpolation).  Outside the table a two-term power-law tail
    ``a/|t|^(m+1) + b/|t|^(m+3)`` matched to the edge value and slope is used.
    With ``normalize`` it is divided by ``<<sigma, rho>>`` so the pair has
    constant 1.

    Raises
    ------
    ValueError
        If ``sigma`` has no closed-form Fourier transform.
    """
    if isinstance(sigma, str):
        sigma = get_activation(sigma)
    raw = _raw_matched(sigma, int(m))
    if not normalize:
        return raw
    return _normalized(sigma, int(m))


@lru_cache(maxsize=None)
def _normalized(sigma, m):
    raw = _raw_matched(sigma, m)
    c = admissibility_constant(sigma, raw, m)
    if isinstance(c, complex) or c == 0.0:
        raise AdmissibilityError("cannot normalize: constant is %r" % (c,))
    inv = 1.0 / c
    return ActivationProfile("matched:%s:%d" % (sigma.name, m), lambda t: raw.eval(t) * inv,
                             lambda w: raw.fourier(w) * inv, "polynomial")


_MATCHED = re.compile(r"^matched(?::(?!raw$)(?P<sigma>[A-Za-z0-9_]+))?(?::(?P<m>\d+))?(?P<raw>:raw)?$")


def resolve_activation(name, dim=1, sigma=None):
    """Profile for a catalog name or a matched name.

    Matched names: ``matched`` (normalized, matched to ``sigma`` in dimension
    ``dim``), ``matched:raw``, or the explicit ``matched:<sigma>:<m>[:raw]``.
    """
    if isinstance(name, ActivationProfile):
        return name
    mt = _MATCHED.match(name)
    if mt is None:
        return get_activation(name)
    base = mt.group("sigma") or (sigma if isinstance(sigma, str) else getattr(sigma, "name", None))
    if base is None:
        raise ValueError("matched profile %r needs a base activation" % name)
    m = int(mt.group("m") or dim)
    return matched_rho(get_activation(base), m, normalize=mt.group("raw") is None)

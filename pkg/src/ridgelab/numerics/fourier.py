"""1-D Fourier transforms of activation profiles."""

import numpy as np

from .quadrature import build_grid
from .summation import weighted_sum

DEFAULT_POINTS = 4097


class AdmissibilityUnknownError(ValueError):
    """The Fourier factor cannot be evaluated without a truncation radius."""


def fourier_1d(profile, omega, support_radius=None, points=DEFAULT_POINTS):
    """Fourier transform ``int h(t) exp(-i w t) dt`` of an activation profile.

    Parameters
    ----------
    profile : ActivationProfile
    omega : float or array_like
    support_radius : float, optional
        Truncation radius for the quadrature fallback.
    points : int
        Trapezoid points on ``[-support_radius, support_radius]``.

    Returns
    -------
    complex or numpy.ndarray of complex

    Raises
    ------
    AdmissibilityUnknownError
        No closed form and no ``support_radius``.
    """
    w = np.asarray(omega, dtype=float)
    if profile.fourier is not None:
        out = np.asarray(profile.fourier(w)).astype(complex)
    else:
        if support_radius is None:
            raise AdmissibilityUnknownError(
                "profile %r (%s decay) has no closed-form transform; pass support_radius"
                % (profile.name, profile.decay_class))
        grid = build_grid([-support_radius, support_radius], points, "trapezoid")
        t = grid.nodes[:, 0]
        h = profile(t)
        phase = t[:, None] * w.reshape(1, -1)
        re = weighted_sum(grid.weights, h[:, None] * np.cos(phase))
        im = -weighted_sum(grid.weights, h[:, None] * np.sin(phase))
        out = (np.asarray(re) + 1j * np.asarray(im)).reshape(w.shape)
    return complex(out) if out.ndim == 0 else out

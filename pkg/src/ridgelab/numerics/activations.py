"""Activation profiles and the built-in catalog."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DECAY_CLASSES = ("schwartz", "polynomial", "bounded")
SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class ActivationProfile:
    """A scalar activation with optional closed-form Fourier transform.

    The Fourier convention is ``h^(w) = int h(t) exp(-i w t) dt``.

    Attributes
    ----------
    name : str
    eval : callable
        Vectorized ``t -> h(t)``.
    fourier : callable or None
        Vectorized ``w -> h^(w)`` (complex or real), when known in closed form.
    decay_class : str
        One of ``schwartz``, ``polynomial``, ``bounded``.
    """

    name: str
    eval: Callable
    fourier: Optional[Callable] = None
    decay_class: str = "schwartz"

    def __post_init__(self):
        if self.decay_class not in DECAY_CLASSES:
            raise ValueError("decay_class must be one of %s" % (DECAY_CLASSES,))

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))

    def scaled(self, factor, name=None):
        """The profile ``factor * h`` (Fourier transform scaled alike)."""
        factor = float(factor)
        ev, ft = self.eval, self.fourier
        return ActivationProfile(
            name or "%r*%s" % (factor, self.name),
            lambda t: factor * ev(t),
            None if ft is None else (lambda w: factor * ft(w)),
            self.decay_class,
        )


def _gauss(t):
    return np.exp(-0.5 * t * t)


def _gauss_ft(w):
    w = np.asarray(w, dtype=float)
    return SQRT_2PI * np.exp(-0.5 * w * w)


def _ricker(t):
    return (1.0 - t * t) * np.exp(-0.5 * t * t)


def _ricker_ft(w):
    w = np.asarray(w, dtype=float)
    return SQRT_2PI * w * w * np.exp(-0.5 * w * w)


def _relu(t):
    return np.maximum(t, 0.0)


def _identity(t):
    return np.array(t, dtype=float, copy=True)


def _zero(t):
    return np.zeros(np.shape(t))


def _zero_ft(w):
    return np.zeros(np.shape(w))


CATALOG = {
    "gauss": ActivationProfile("gauss", _gauss, _gauss_ft, "schwartz"),
    "ricker": ActivationProfile("ricker", _ricker, _ricker_ft, "schwartz"),
    "tanh": ActivationProfile("tanh", np.tanh, None, "bounded"),
    "relu": ActivationProfile("relu", _relu, None, "polynomial"),
    "identity": ActivationProfile("identity", _identity, None, "polynomial"),
    "zero": ActivationProfile("zero", _zero, _zero_ft, "schwartz"),
}


def get_activation(name):
    """Look up a catalog profile by name."""
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError("unknown activation %r; catalog has %s" % (name, sorted(CATALOG))) from None

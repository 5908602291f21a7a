"""Parameter-point containers shared by the group actions and the feature maps.

All fields may carry leading batch dimensions; the trailing dimensions are
the ones documented per class.
"""

from typing import NamedTuple

import numpy as np


class Depth2Param(NamedTuple):
    """Shallow neuron ``(a, b)``: ``a`` has shape ``(..., m)``, ``b`` shape ``(...)``."""

    a: np.ndarray
    b: np.ndarray


class LayerParam(NamedTuple):
    """Fully-connected layer ``(A, b, C)``.

    ``A``: ``(..., p, d)``; ``b``: ``(..., p)``; ``C``: ``(..., d_out, p)`` with
    unit-norm columns.
    """

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray


class QuadParam(NamedTuple):
    """Quadratic-form neuron ``(A, b, c)``: ``A`` symmetric ``(..., m, m)``, ``b`` ``(..., m)``, ``c`` ``(...)``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray


def as_param(obj):
    """Convert arrays in a parameter container (or tuple of layers) to float arrays."""
    if isinstance(obj, tuple) and not hasattr(obj, "_fields"):
        return tuple(as_param(o) for o in obj)
    return type(obj)(*(np.asarray(v, dtype=float) for v in obj))


def check_unit_columns(C, tol=1e-10):
    norms = np.sqrt(np.sum(np.asarray(C, dtype=float) ** 2, axis=-2))
    if not np.all(np.abs(norms - 1.0) <= tol):
        raise ValueError("C columns must have unit norm (tolerance %g)" % tol)


def check_symmetric(A, tol=1e-12):
    A = np.asarray(A, dtype=float)
    if not np.all(np.abs(A - np.swapaxes(A, -1, -2)) <= tol):
        raise ValueError("quadratic-form matrix A must be symmetric")

"""Seeded generators for test inputs."""

import numpy as np
from scipy.linalg import expm

FAMILIES = ("affine", "ortho_affine", "cyclic")


def rng(seed):
    """A numpy Generator for ``seed``."""
    return np.random.default_rng(seed)


def random_orthogonal(m, generator):
    """QR-orthogonalized standard-normal matrix with the positive-diagonal sign fix."""
    z = generator.standard_normal((m, m))
    q, r = np.linalg.qr(z)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def random_unit_columns(d, p, generator, size=()):
    """Matrices of shape ``(*size, d, p)`` with unit-norm columns."""
    z = generator.standard_normal(tuple(size) + (d, p))
    return z / np.linalg.norm(z, axis=-2, keepdims=True)


def sample_group_element(family, dim, seed, scale=1.0):
    """Draw a group element deterministically from ``seed``.

    Parameters
    ----------
    family : {"affine", "ortho_affine", "cyclic"}
    dim : int
        ``m`` for the affine families, ``k`` for the cyclic group.
    seed : int or numpy.random.Generator
    scale : float
        ``L = expm(M)`` with ``M`` entries uniform on ``[-scale, scale]``.
        The default 1 is the general sampler; ``log 2`` keeps 1-D samples
        inside the band ``[1/2, 2]``.

    Returns
    -------
    GroupElement
    """
    from ..groups import affine, cyclic, ortho_affine

    dim = int(dim)
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    g = seed if isinstance(seed, np.random.Generator) else rng(seed)
    if family == "cyclic":
        return cyclic(int(g.integers(0, dim)), dim)
    if family not in FAMILIES:
        raise ValueError("unknown family %r" % (family,))
    L = expm(g.uniform(-scale, scale, (dim, dim)))
    t = g.uniform(-1.0, 1.0, dim)
    if family == "affine":
        return affine(L, t)
    return ortho_affine(random_orthogonal(dim, g), L, t)

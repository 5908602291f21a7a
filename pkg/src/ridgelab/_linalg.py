"""Small batched linear algebra in a fixed summation order.

BLAS kernels may reorder partial sums depending on array shapes, which
would make a value depend on how many points were evaluated together.
These helpers loop over the contracted index explicitly instead.
"""

import numpy as np


def dot(a, b):
    """``sum_j a[..., j] * b[..., j]`` with broadcasting."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    acc = a[..., 0] * b[..., 0]
    for j in range(1, a.shape[-1]):
        acc = acc + a[..., j] * b[..., j]
    return acc


def matvec(m, x):
    """``y[..., i] = sum_j m[..., i, j] * x[..., j]`` with broadcasting."""
    m = np.asarray(m, dtype=float)
    x = np.asarray(x, dtype=float)
    acc = m[..., :, 0] * x[..., None, 0]
    for j in range(1, m.shape[-1]):
        acc = acc + m[..., :, j] * x[..., None, j]
    return acc


def matmul(a, b):
    """``c[..., i, k] = sum_j a[..., i, j] * b[..., j, k]`` with broadcasting."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    acc = a[..., :, 0, None] * b[..., None, 0, :]
    for j in range(1, a.shape[-1]):
        acc = acc + a[..., :, j, None] * b[..., None, j, :]
    return acc


def symmetrize(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))

"""Compensated reductions with a fixed, partition-independent order.

Every reduction in the package funnels through :func:`compensated_reduce`.
Terms are laid out on a fixed lane structure that depends only on the
number of terms, so the bit pattern of a result never depends on how the
caller blocks the work or on how many threads evaluate the batch axis.
"""

import numpy as np

#: Reductions longer than this use ``LANE_WIDTH`` interleaved accumulators.
LANE_THRESHOLD = 8192
LANE_WIDTH = 128
#: Target number of elements materialized per block of terms.
BLOCK_ELEMENTS = 1 << 21


class NonFiniteError(ValueError):
    """Raised when a reduction receives NaN or infinite input."""


def lane_count(n):
    """Number of interleaved accumulators used for a reduction of length ``n``."""
    return 1 if n <= LANE_THRESHOLD else LANE_WIDTH


def _neumaier_rows(s, c, rows):
    # Sequential Neumaier update over the leading axis of ``rows``.
    for v in rows:
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c = c + np.where(big, (s - t) + v, (v - t) + s)
        s = t
    return s, c


def neumaier_sum(values, axis=0):
    """Neumaier-compensated sum of ``values`` along ``axis`` in index order.

    Parameters
    ----------
    values : array_like
        Real or complex array.
    axis : int, optional
        Reduction axis.

    Returns
    -------
    numpy.ndarray or float
        The compensated sum, vectorized over the remaining axes.
    """
    v = np.moveaxis(np.asarray(values), axis, 0)
    if np.iscomplexobj(v):
        return neumaier_sum(v.real) + 1j * neumaier_sum(v.imag)
    v = v.astype(float, copy=False)
    if v.shape[0] == 0:
        out = np.zeros(v.shape[1:])
        return out if out.ndim else 0.0
    s = np.zeros(v.shape[1:])
    c = np.zeros(v.shape[1:])
    s, c = _neumaier_rows(s, c, v)
    out = s + c
    return out if np.ndim(out) else float(out)


def compensated_reduce(term_fn, n, batch_shape=(), check_finite=True):
    """Reduce ``n`` terms produced block-wise by ``term_fn``.

    Parameters
    ----------
    term_fn : callable
        ``term_fn(i0, i1)`` returns an array of shape ``(i1 - i0, *batch_shape)``
        holding terms ``i0 .. i1-1``.
    n : int
        Number of terms.
    batch_shape : tuple of int
        Shape of each term.
    check_finite : bool
        Raise :class:`NonFiniteError` on NaN/Inf terms.

    Returns
    -------
    numpy.ndarray
        Array of shape ``batch_shape`` (a float for the empty shape).

    Notes
    -----
    Term ``i`` is assigned to lane ``i % L`` and row ``i // L`` where ``L``
    depends only on ``n``.  Rows are accumulated in increasing order, then
    the lanes are folded in increasing order.  Block boundaries are always
    multiples of ``L``, so the block size never changes the arithmetic.
    """
    batch_shape = tuple(int(b) for b in batch_shape)
    lanes = lane_count(n)
    size = int(np.prod(batch_shape)) if batch_shape else 1
    rows_total = -(-n // lanes)
    block_rows = max(1, BLOCK_ELEMENTS // max(1, lanes * size))
    s = np.zeros((lanes,) + batch_shape)
    c = np.zeros_like(s)
    is_complex = False
    s_im = c_im = None
    for r0 in range(0, rows_total, block_rows):
        r1 = min(rows_total, r0 + block_rows)
        i0, i1 = r0 * lanes, min(n, r1 * lanes)
        terms = np.asarray(term_fn(i0, i1))
        if terms.shape != (i1 - i0,) + batch_shape:
            terms = np.broadcast_to(terms, (i1 - i0,) + batch_shape)
        if check_finite and not np.all(np.isfinite(terms)):
            raise NonFiniteError("non-finite term in reduction (indices %d..%d)" % (i0, i1))
        pad = (r1 - r0) * lanes - (i1 - i0)
        if pad:
            terms = np.concatenate([terms, np.zeros((pad,) + batch_shape, terms.dtype)])
        terms = terms.reshape((r1 - r0, lanes) + batch_shape)
        if np.iscomplexobj(terms):
            if not is_complex:
                is_complex = True
                s_im, c_im = np.zeros_like(s), np.zeros_like(c)
            s_im, c_im = _neumaier_rows(s_im, c_im, terms.imag)
            terms = terms.real
        s, c = _neumaier_rows(s, c, terms)
    out = _fold_lanes(s, c)
    if is_complex:
        out = out + 1j * _fold_lanes(s_im, c_im)
    out = np.asarray(out)
    return out if out.ndim else out[()]


def _fold_lanes(s, c):
    if s.shape[0] == 1:
        return s[0] + c[0]
    return neumaier_sum(np.concatenate([s, c]), axis=0)


def weighted_sum(weights, values):
    """Compensated ``sum_i weights[i] * values[i]`` over the leading axis."""
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values)
    if v.shape[0] != w.shape[0]:
        raise ValueError("values length %d does not match %d weights" % (v.shape[0], w.shape[0]))
    wb = w.reshape((-1,) + (1,) * (v.ndim - 1))
    return compensated_reduce(lambda i0, i1: wb[i0:i1] * v[i0:i1], w.shape[0], v.shape[1:])

"""Tensor-product quadrature grids over truncated boxes.

A grid is a product of factors.  Most factors are 1-D midpoint or
trapezoid rules; a factor may also be a finite point set carrying its own
weights (a discrete parameter axis such as the 0-sphere, or a block of
coordinates such as a cubature rule on the 2-sphere).
"""

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np

from .summation import NonFiniteError, weighted_sum

DEFAULT_NODE_CAP = 2 ** 28
SCHEMES = ("midpoint", "trapezoid")


class SizingError(ValueError):
    """Raised when a grid or partition would exceed the node cap."""


@dataclass(frozen=True)
class Factor:
    """One factor of a product grid.

    Attributes
    ----------
    nodes : numpy.ndarray
        Shape ``(n, k)``; ``k`` coordinates per node.
    weights : numpy.ndarray
        Shape ``(n,)``.
    lo, hi : tuple of float
        Per-coordinate bounds (length ``k``).
    scheme : str
        ``"midpoint"``, ``"trapezoid"`` or ``"discrete"``.
    points : int
        Node count as requested (equals ``n``).
    """

    nodes: np.ndarray
    weights: np.ndarray
    lo: tuple
    hi: tuple
    scheme: str
    points: int

    @property
    def dim(self):
        return self.nodes.shape[1]


def rule_1d(lo, hi, points, scheme):
    """Nodes and weights of a composite 1-D rule on ``[lo, hi]``."""
    lo, hi, points = float(lo), float(hi), int(points)
    if not hi > lo:
        raise ValueError("zero-volume axis: need hi > lo, got [%r, %r]" % (lo, hi))
    if scheme == "midpoint":
        if points < 1:
            raise ValueError("midpoint rule needs at least 1 point")
        h = (hi - lo) / points
        nodes = lo + h * (np.arange(points) + 0.5)
        weights = np.full(points, h)
    elif scheme == "trapezoid":
        if points < 2:
            raise ValueError("trapezoid rule needs at least 2 points")
        h = (hi - lo) / (points - 1)
        nodes = lo + h * np.arange(points)
        nodes[-1] = hi
        weights = np.full(points, h)
        weights[0] = weights[-1] = 0.5 * h
    else:
        raise ValueError("unknown scheme %r (expected one of %s)" % (scheme, SCHEMES))
    return nodes, weights


def interval_factor(lo, hi, points, scheme="midpoint"):
    nodes, weights = rule_1d(lo, hi, points, scheme)
    return Factor(nodes[:, None], weights, (float(lo),), (float(hi),), scheme, int(points))


def discrete_factor(values, weights=None):
    """Finite axis with explicit values (``(n,)`` or ``(n, k)``) and weights (default 1)."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    w = np.ones(v.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (v.shape[0],) or np.any(w < 0):
        raise ValueError("discrete factor needs one nonnegative weight per value")
    lo = tuple(float(x) for x in v.min(axis=0))
    hi = tuple(float(x) for x in v.max(axis=0))
    return Factor(v, w, lo, hi, "discrete", v.shape[0])


def sphere_factor(ambient_dim):
    """Cubature on the unit sphere in ``R^d`` using the ``2d`` points ``±e_i``.

    Weights are equal and sum to the sphere's surface measure, so
    ``d = 1`` gives the two-point set ``{-1, +1}`` with unit weights.
    The rule is exact for polynomials of degree up to 3.
    """
    d = int(ambient_dim)
    if d < 1:
        raise ValueError("sphere ambient dimension must be >= 1")
    area = 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)
    eye = np.eye(d)
    nodes = np.empty((2 * d, d))
    nodes[0::2] = -eye
    nodes[1::2] = eye
    f = discrete_factor(nodes, np.full(2 * d, area / (2 * d)))
    return Factor(f.nodes, f.weights, (-1.0,) * d, (1.0,) * d, "discrete", 2 * d)


@dataclass(frozen=True)
class QuadratureGrid:
    """Immutable product grid.

    Nodes are ordered lexicographically with the last factor varying fastest.
    ``nodes`` and ``weights`` are materialized on first access.
    """

    factors: tuple
    cap: int = DEFAULT_NODE_CAP
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.factors:
            raise ValueError("grid needs at least one factor")
        if self.size > self.cap:
            raise SizingError("grid has %d nodes, above the cap of %d" % (self.size, self.cap))

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    @property
    def size(self):
        return int(np.prod([f.nodes.shape[0] for f in self.factors], dtype=object))

    @property
    def shape(self):
        return tuple(f.nodes.shape[0] for f in self.factors)

    @property
    def box(self):
        lo = [x for f in self.factors for x in f.lo]
        hi = [x for f in self.factors for x in f.hi]
        return [[a, b] for a, b in zip(lo, hi)]

    @property
    def scheme(self):
        schemes = {f.scheme for f in self.factors}
        return schemes.pop() if len(schemes) == 1 else "mixed"

    @property
    def volume(self):
        """Total measure (product of per-factor weight sums)."""
        out = 1.0
        for f in self.factors:
            out *= float(np.sum(f.weights))
        return out

    @property
    def nodes(self):
        if "nodes" not in self._cache:
            idx = np.indices(self.shape).reshape(len(self.factors), -1)
            cols = [f.nodes[i] for f, i in zip(self.factors, idx)]
            nodes = np.concatenate(cols, axis=1)
            nodes.setflags(write=False)
            self._cache["nodes"] = nodes
        return self._cache["nodes"]

    @property
    def weights(self):
        if "weights" not in self._cache:
            idx = np.indices(self.shape).reshape(len(self.factors), -1)
            w = self.factors[0].weights[idx[0]].copy()
            for f, i in zip(self.factors[1:], idx[1:]):
                w = w * f.weights[i]
            w.setflags(write=False)
            self._cache["weights"] = w
        return self._cache["weights"]

    def refined(self, factor=2):
        """Grid with interval factors refined ``factor`` times (discrete factors kept).

        Midpoint: ``n -> factor * n``.  Trapezoid: ``n -> factor * (n - 1) + 1``,
        which keeps the old nodes.
        """
        new = []
        for f in self.factors:
            if f.scheme == "midpoint":
                new.append(interval_factor(f.lo[0], f.hi[0], f.points * factor, "midpoint"))
            elif f.scheme == "trapezoid":
                new.append(interval_factor(f.lo[0], f.hi[0], factor * (f.points - 1) + 1, "trapezoid"))
            else:
                new.append(f)
        return QuadratureGrid(tuple(new), self.cap)

    def describe(self):
        """JSON-friendly summary."""
        return {"size": self.size, "shape": list(self.shape), "scheme": self.scheme,
                "box": self.box, "volume": self.volume}


def product_grid(*parts, cap=DEFAULT_NODE_CAP):
    """Product of grids and/or factors, in the given order."""
    factors = []
    for p in parts:
        factors.extend(p.factors if isinstance(p, QuadratureGrid) else [p])
    return QuadratureGrid(tuple(factors), cap)


def build_grid(box, points_per_axis, scheme="midpoint", cap=DEFAULT_NODE_CAP):
    """Tensor-product grid on a box.

    Parameters
    ----------
    box : sequence
        Per-axis ``[lo, hi]`` pairs; a single pair means one axis.
    points_per_axis : int or sequence of int
        Points per axis (an int is broadcast).
    scheme : str or sequence of str
        ``"midpoint"`` or ``"trapezoid"``, per axis or shared.
    cap : int
        Hard limit on the total node count.

    Returns
    -------
    QuadratureGrid

    Raises
    ------
    ValueError
        Zero-volume axes, too few points for the scheme.
    SizingError
        Total node count above ``cap``.
    """
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = box[None, :]
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("box must be a list of [lo, hi] pairs")
    naxes = box.shape[0]
    pts = np.broadcast_to(np.asarray(points_per_axis, dtype=int), (naxes,))
    schemes = [scheme] * naxes if isinstance(scheme, str) else list(scheme)
    if len(schemes) != naxes:
        raise ValueError("need one scheme per axis")
    total = int(np.prod([int(p) for p in pts], dtype=object))
    if total > cap:
        raise SizingError("grid would have %d nodes, above the cap of %d" % (total, cap))
    factors = tuple(interval_factor(lo, hi, p, s) for (lo, hi), p, s in zip(box, pts, schemes))
    return QuadratureGrid(factors, cap)


def integrate(values, grid):
    """Compensated quadrature ``sum_i w_i * values[i]`` in fixed node order.

    Parameters
    ----------
    values : array_like
        Shape ``(grid.size,)`` or ``(grid.size, ...)`` for vector integrands.
    grid : QuadratureGrid

    Returns
    -------
    float or numpy.ndarray

    Raises
    ------
    NonFiniteError
        If any value is NaN or infinite.
    """
    v = np.asarray(values)
    if v.shape[0] != grid.size:
        raise ValueError("got %d values for a grid with %d nodes" % (v.shape[0], grid.size))
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("non-finite integrand values")
    out = weighted_sum(grid.weights, v)
    return float(out) if np.ndim(out) == 0 and not np.iscomplexobj(out) else out

"""Finite networks from parameter distributions by partitioning the parameter box.

A box is cut into ``n`` equal slabs per axis, so every cell has diameter
``diam(box) / n``.  Each cell contributes one neuron at its center with
weight ``vol(cell) * gamma(center)``.
"""

import json
from dataclasses import dataclass

import numpy as np

from .features import spec_from_json
from .numerics.parallel import chunked_map
from .numerics.quadrature import DEFAULT_NODE_CAP, QuadratureGrid, SizingError, interval_factor
from .numerics.summation import compensated_reduce
from .transforms.functions import ParamDistribution
from .transforms.operators import network_apply

PRUNE_BELOW = 1e-300


@dataclass(frozen=True, eq=False)
class Partition:
    """Uniform axis-aligned cells of a box.

    Attributes
    ----------
    centers : numpy.ndarray
        ``(ncells, dim)`` cell midpoints, lexicographic order (last axis fastest).
    volumes : numpy.ndarray
    diameters : numpy.ndarray
    box : list of [lo, hi]
    counts : tuple of int
        Cells per axis.
    """

    centers: np.ndarray
    volumes: np.ndarray
    diameters: np.ndarray
    box: list
    counts: tuple

    def __len__(self):
        return self.centers.shape[0]

    @property
    def max_diameter(self):
        return float(np.max(self.diameters))

    def as_grid(self):
        """The midpoint grid whose nodes and weights are the centers and volumes."""
        return QuadratureGrid(tuple(interval_factor(lo, hi, c, "midpoint")
                                    for (lo, hi), c in zip(self.box, self.counts)))


def partition_box(box, n, cap=DEFAULT_NODE_CAP):
    """Partition ``box`` into ``n`` equal slabs per axis (cell diameter ``diam(box)/n``).

    Parameters
    ----------
    box : sequence of [lo, hi]
    n : int
        Refinement level, ``n >= 1``.
    cap : int
        Maximum number of cells.

    Returns
    -------
    Partition
    """
    n = int(n)
    if n < 1:
        raise ValueError("refinement level must be >= 1")
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = box[None, :]
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("zero-volume box")
    ncells = n ** box.shape[0]
    if ncells > cap:
        raise SizingError("partition has %d cells, above the cap of %d" % (ncells, cap))
    counts = (n,) * box.shape[0]
    grid = QuadratureGrid(tuple(interval_factor(lo, hi, n, "midpoint") for lo, hi in box))
    widths = (box[:, 1] - box[:, 0]) / n
    diam = float(np.sqrt(np.sum(widths ** 2)))
    return Partition(np.array(grid.nodes), np.array(grid.weights), np.full(ncells, diam),
                     box.tolist(), counts)


@dataclass(frozen=True, eq=False)
class FiniteNetwork:
    """``x -> sum_i w_i phi(x, xi_i)``.

    Attributes
    ----------
    weights : numpy.ndarray
        ``(nterms,)``, all finite.
    params : numpy.ndarray
        ``(nterms, param_dim)`` flat parameter vectors.
    spec : FeatureMapSpec
    """

    weights: np.ndarray
    params: np.ndarray
    spec: object

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        p = np.asarray(self.params, dtype=float)
        p = p.reshape(w.shape[0], -1) if w.size else p.reshape(0, self.spec.param_dim)
        if not np.all(np.isfinite(w)):
            raise ValueError("finite network weights must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "params", p)

    def __len__(self):
        return self.weights.shape[0]

    def pruned(self):
        """Network without terms of magnitude below ``1e-300``."""
        keep = np.abs(self.weights) >= PRUNE_BELOW
        return FiniteNetwork(self.weights[keep], self.params[keep], self.spec)

    def to_json(self):
        """``{feature_spec, terms: [{weight, params}]}``; pruned terms are omitted."""
        net = self.pruned()
        return {"feature_spec": self.spec.to_json(),
                "terms": [{"weight": float(w), "params": [float(v) for v in p]}
                          for w, p in zip(net.weights, net.params)]}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())
            fh.write("\n")


def load_network(obj, resolver=None):
    """Rebuild a :class:`FiniteNetwork` from its JSON form (dict, text, or file path)."""
    if isinstance(obj, str):
        text = obj
        if not obj.lstrip().startswith("{"):
            with open(obj) as fh:
                text = fh.read()
        obj = json.loads(text)
    spec = spec_from_json(obj["feature_spec"], resolver)
    terms = obj["terms"]
    weights = np.array([t["weight"] for t in terms], dtype=float)
    params = np.array([t["params"] for t in terms], dtype=float).reshape(len(terms), spec.param_dim)
    return FiniteNetwork(weights, params, spec)


def synthesize(gamma, spec, partition):
    """Finite network with weights ``vol(cell) * gamma(center)``.

    ``gamma`` is a callable on flat parameter vectors (or a
    :class:`ParamDistribution` carrying one).
    """
    fn = gamma.eval if isinstance(gamma, ParamDistribution) else gamma
    if fn is None:
        raise ValueError("synthesis needs gamma as a callable")
    g = np.asarray(fn(partition.centers), dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("gamma is non-finite at a cell center")
    return FiniteNetwork(partition.volumes * g, partition.centers, spec)


def finite_apply(net, x):
    """Evaluate a finite network at points ``x`` (fixed-order compensated sum)."""
    spec = net.spec
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 0 or (pts.ndim == 1 and spec.input_dim != 1)
    pts = pts.reshape(-1, spec.input_dim)
    n, out = len(net), spec.output_dim
    if n == 0:
        res = np.zeros((pts.shape[0], out))
        return res[0] if single else res

    def run(b0, b1):
        xb = pts[None, b0:b1, :]

        def terms(i0, i1):
            phi = spec.evaluate_flat(xb, net.params[i0:i1, None, :])
            return net.weights[i0:i1, None, None] * phi

        return compensated_reduce(terms, n, (b1 - b0, out))

    res = np.concatenate(chunked_map(run, pts.shape[0], 64), axis=0)
    return res[0] if single else res


def uniform_error(net, gamma, spec, reference_grid, test_points):
    """``max_x || finite_apply(net, x) - S[gamma](x) ||`` with ``S`` on ``reference_grid``."""
    fn = gamma.eval if isinstance(gamma, ParamDistribution) else gamma
    ref = ParamDistribution.from_callable(reference_grid, fn)
    exact = network_apply(ref, spec, test_points)
    approx = finite_apply(net, test_points)
    return float(np.max(np.abs(np.asarray(approx) - np.asarray(exact))))


def discretization_study(gamma, spec, box, levels, reference_points, test_points):
    """Uniform error for each refinement level against a fine midpoint reference.

    Returns
    -------
    dict
        ``levels``, ``errors``, ``rate_constant`` (``max_n n * error(n)``),
        ``observed_order`` (negative log-log slope) and the networks.
    """
    from .numerics.quadrature import build_grid

    reference = build_grid(box, reference_points, "midpoint")
    ref = ParamDistribution.from_callable(reference, gamma)
    exact = network_apply(ref, spec, test_points)
    errors, nets = [], []
    for n in levels:
        net = synthesize(gamma, spec, partition_box(box, n))
        nets.append(net)
        errors.append(float(np.max(np.abs(finite_apply(net, test_points) - exact))))
    lv = np.asarray(levels, dtype=float)
    er = np.asarray(errors)
    positive = er > 0
    slope = float(np.polyfit(np.log(lv[positive]), np.log(er[positive]), 1)[0]) if positive.sum() >= 2 else float("nan")
    return {"levels": [int(n) for n in levels], "errors": errors,
            "rate_constant": float(np.max(lv * er)), "observed_order": -slope,
            "networks": nets, "reference": exact}

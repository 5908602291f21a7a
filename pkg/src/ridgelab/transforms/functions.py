"""Target functions on data space and distributions on parameter space."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import _linalg
from ..numerics.quadrature import QuadratureGrid


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """A target ``f : R^m -> R^k``.

    Attributes
    ----------
    eval : callable
        Vectorized: ``(..., m) -> (...)`` when ``codomain_dim == 1``,
        ``(..., m) -> (..., k)`` otherwise.
    domain_dim, codomain_dim : int
    support_radius : float
        Effective radius; values beyond it are treated as negligible when
        sizing truncation boxes.
    name : str
    """

    eval: Callable
    domain_dim: int
    codomain_dim: int = 1
    support_radius: float = np.inf
    name: str = "f"

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def values(self, x):
        """Values with a trailing component axis: shape ``(..., k)``."""
        y = np.asarray(self(x), dtype=float)
        return y[..., None] if self.codomain_dim == 1 else y

    def scaled(self, alpha):
        ev, alpha = self.eval, float(alpha)
        return SampledFunction(lambda x: alpha * ev(x), self.domain_dim, self.codomain_dim,
                               self.support_radius, "%r*%s" % (alpha, self.name))


def gaussian_target(center, width=1.0, amplitude=1.0, vector=None):
    """``amplitude * exp(-|x - center|^2 / width^2)``, optionally times a fixed vector.

    The effective support radius is where the envelope drops below ``1e-16``.
    """
    c = np.atleast_1d(np.asarray(center, dtype=float))
    width, amplitude = float(width), float(amplitude)
    if width <= 0:
        raise ValueError("width must be positive")
    radius = float(np.linalg.norm(c) + width * np.sqrt(np.log(1e16)))
    if vector is None:
        ev = lambda x: amplitude * np.exp(-_linalg.dot(x - c, x - c) / (width * width))
        k = 1
    else:
        v = np.asarray(vector, dtype=float)
        ev = lambda x: amplitude * np.exp(-_linalg.dot(x - c, x - c) / (width * width))[..., None] * v
        k = v.shape[0]
    name = "gauss(c=%s,w=%r)" % (c.tolist(), width)
    return SampledFunction(ev, c.shape[0], k, radius, name)


def zero_target(m, k=1):
    shape = lambda x: np.shape(x)[:-1] + ((k,) if k > 1 else ())
    return SampledFunction(lambda x: np.zeros(shape(x)), m, k, 0.0, "zero")


@dataclass(frozen=True, eq=False)
class ParamDistribution:
    """A parameter distribution ``gamma`` tabulated on a grid.

    Attributes
    ----------
    grid : QuadratureGrid
    values : numpy.ndarray
        ``gamma`` at each grid node.
    eval : callable or None
        ``flat_nodes -> values`` when ``gamma`` is known as a function; needed
        for pull-backs under the dual action.
    """

    grid: QuadratureGrid
    values: np.ndarray
    eval: Optional[Callable] = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape[0] != self.grid.size:
            raise ValueError("got %d values for %d grid nodes" % (v.shape[0], self.grid.size))
        if not np.all(np.isfinite(v)):
            raise ValueError("parameter distribution has non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid, fn):
        return cls(grid, np.asarray(fn(grid.nodes)), fn)

    def scaled(self, alpha):
        ev = self.eval
        return ParamDistribution(self.grid, alpha * self.values,
                                 None if ev is None else (lambda xi: alpha * ev(xi)))


def gaussian_bump(center, width):
    """``exp(-|xi - center|^2 / (2 width^2))`` on flat parameter vectors."""
    c = np.asarray(center, dtype=float)
    s2 = 2.0 * float(width) ** 2
    return lambda xi: np.exp(-_linalg.dot(np.asarray(xi) - c, np.asarray(xi) - c) / s2)

"""Quadrature, compensated summation, activation profiles and seeded sampling."""

from .activations import CATALOG, ActivationProfile, get_activation
from .fourier import AdmissibilityUnknownError, fourier_1d
from .parallel import chunked_map, get_threads, set_threads, threads
from .quadrature import (
    DEFAULT_NODE_CAP,
    QuadratureGrid,
    SizingError,
    build_grid,
    discrete_factor,
    integrate,
    interval_factor,
    product_grid,
    sphere_factor,
)
from .sampling import random_orthogonal, random_unit_columns, rng, sample_group_element
from .summation import NonFiniteError, compensated_reduce, neumaier_sum, weighted_sum

__all__ = [
    "ActivationProfile", "AdmissibilityUnknownError", "CATALOG", "DEFAULT_NODE_CAP",
    "NonFiniteError", "QuadratureGrid", "SizingError", "build_grid", "chunked_map",
    "compensated_reduce", "discrete_factor", "fourier_1d", "get_activation", "get_threads",
    "integrate", "interval_factor", "neumaier_sum", "product_grid", "random_orthogonal",
    "random_unit_columns", "rng", "sample_group_element", "set_threads", "sphere_factor",
    "threads", "weighted_sum",
]

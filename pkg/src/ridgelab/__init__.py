"""Ridgelet transforms, integral-representation networks and their group symmetries, on quadrature grids."""

__version__ = "0.1.0"

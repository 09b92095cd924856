"""Numerical laboratory for low-lying zero statistics of degree-4 and
degree-5 L-functions attached to genus-2 holomorphic forms: vertical
Satake distributions, coefficient algebra, density-kernel predictions,
Haar-ensemble Monte Carlo, synthetic family averages, and dimension
bookkeeping."""

__version__ = "0.1.0"

"""Quadrature oracles and the checks built on them."""

from .oracles import QuadratureSpec, grid_posterior_mean, oracle_expectation, oracle_moments

"""Bracketed tails of products of independent nonnegative random variables."""

from .conv import LogBracket, ProductTail, product_tail, product_tail_grid, sum_conv2_tail, truncation_band
from .dist import (
    Distribution,
    exp_sqrt_tail,
    gaussian_type,
    lattice_plateau,
    make_composite,
    make_exp_polynomial,
    make_exponential,
    make_oscillating_heavy,
    make_plateau_modification,
    make_point_mass,
    make_power_law,
    make_sin_modulated,
    make_tilt,
    polynomial_exp_base,
)
from .errors import ConstructionError, DomainError, SpecError, UsageError
from .indicators import c_star_series, c_zero_extrapolate, classify, decay_exponent, poly_limit_check, shift_ratio
from .scenarios import run_scenario
from .specio import load_spec, parse_spec

__version__ = "0.1.0"

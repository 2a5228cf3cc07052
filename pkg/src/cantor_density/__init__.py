"""Density spectrum of Cantor measures.

Exact symbolic tools for the Cantor set ``C_rho`` (``0 < rho <= 1/3``):
pointwise densities, the spectrum of attained ``tau`` values, survivor-set
and level-set dimensions, and the devil's staircase ``psi``.
"""

from .coding import CantorPoint, RhoParams, classify_gamma, delta, in_gamma, pi, pi_inverse, tau_exact
from .density import ball_measure, density_pair
from .entropy import SandwichSystem, count_blocks, dim_survivor, transfer_graph
from .errors import CantorDensityError, InvalidInput, ResourceLimit
from .words import EpSeq

__version__ = "0.1.0"

__all__ = [
    "CantorDensityError",
    "CantorPoint",
    "EpSeq",
    "InvalidInput",
    "ResourceLimit",
    "RhoParams",
    "SandwichSystem",
    "ball_measure",
    "classify_gamma",
    "count_blocks",
    "delta",
    "density_pair",
    "dim_survivor",
    "in_gamma",
    "pi",
    "pi_inverse",
    "tau_exact",
    "transfer_graph",
]

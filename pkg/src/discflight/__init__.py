"""Stationary radial distribution of a Brownian particle winding around a disc."""
from .kernels import BACKEND
from .model import PhysicalParams, RadialDensity, RadialGrid

__all__ = ["BACKEND", "PhysicalParams", "RadialDensity", "RadialGrid"]
__version__ = "0.1.0"

"""Persistence probabilities of integrated random walks."""
from .laws import IncrementLaw, classify, make_law, overshoot_law, parse_law, prop1_constant
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "IncrementLaw",
    "classify",
    "make_law",
    "overshoot_law",
    "parse_law",
    "prop1_constant",
]

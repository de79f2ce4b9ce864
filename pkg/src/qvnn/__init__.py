"""Stability certification for quaternion-valued neural networks with delays.

The package assembles the delay-dependent stability criterion of a
quaternion-valued network with leakage delay and two additive time-varying
delays as quaternion linear matrix inequalities, lowers them to a real
semidefinite feasibility problem, solves it with an in-repo barrier/Newton
method, and cross-validates certificates by direct delay-differential
simulation and Lyapunov-Krasovskii functional evaluation.
"""

__version__ = "0.1.0"

from .quaternion import Quaternion
from .qmatrix import (
    HermitianQuatMatrix,
    QuatMatrix,
    definiteness,
    quadform,
    real_embed,
)
from .model import DelaySpec, NetworkModel

__all__ = [
    "Quaternion",
    "QuatMatrix",
    "HermitianQuatMatrix",
    "definiteness",
    "quadform",
    "real_embed",
    "DelaySpec",
    "NetworkModel",
    "__version__",
]

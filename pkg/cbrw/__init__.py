"""
cbrw
====
Critical branching random walk on Z^d (d >= 5).

Deterministic field solvers and Monte Carlo snake samplers for visiting
probabilities, killed-walk Green functions, escape probabilities and
branching capacity.
"""

from cbrw.errors import CbrwError
from cbrw.lattice import Box, SetK, ball, norm_theta
from cbrw.laws import JumpLaw, OffspringLaw, get_jump_law, get_offspring_law

__all__ = [
    "Box",
    "CbrwError",
    "JumpLaw",
    "OffspringLaw",
    "SetK",
    "ball",
    "get_jump_law",
    "get_offspring_law",
    "norm_theta",
]

__version__ = "0.1.0"

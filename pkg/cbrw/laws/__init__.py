"""Offspring and jump laws, their derived measures and lattice constants."""

from cbrw.laws.alias import AliasTable
from cbrw.laws.constants import (
    asymptotic_constants,
    constant_a_d,
    constant_t_d,
    convolution_integral,
    newton_shell_integral,
    sphere_area,
)
from cbrw.laws.jump import JumpLaw, JumpReport, validate_jump
from cbrw.laws.offspring import (
    CountLaw,
    CriticalGeometric,
    OffspringLaw,
    adjoint_measure,
    certified_a,
    offspring_gf,
    position_offspring,
    truncate_pmf,
)
from cbrw.laws.presets import (
    JUMP_PRESETS,
    OFFSPRING_PRESETS,
    get_jump_law,
    get_offspring_law,
)

__all__ = [
    "JUMP_PRESETS",
    "OFFSPRING_PRESETS",
    "AliasTable",
    "CountLaw",
    "CriticalGeometric",
    "JumpLaw",
    "JumpReport",
    "OffspringLaw",
    "adjoint_measure",
    "asymptotic_constants",
    "certified_a",
    "constant_a_d",
    "constant_t_d",
    "convolution_integral",
    "get_jump_law",
    "get_offspring_law",
    "newton_shell_integral",
    "offspring_gf",
    "position_offspring",
    "sphere_area",
    "truncate_pmf",
    "validate_jump",
]

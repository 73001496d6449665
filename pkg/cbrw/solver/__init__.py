"""Visiting probabilities: the nonlinear recursion on Z^d and on the half-line."""

from cbrw.solver.comparison import (
    SupersolutionReport,
    offspring_domination_constant,
    supersolution_check,
)
from cbrw.solver.halfline import (
    HalflineCertificate,
    HalflineProfile,
    certify_halfline_constant,
    halfline_supersolution_check,
    inverse_square,
    left_tail_constant,
    solve_halfline,
)
from cbrw.solver.qformulas import (
    QFields,
    q_by_flags,
    q_by_killing,
    q_closed,
    q_fields,
    q_minus_by_flags,
    q_minus_by_killing,
    q_minus_closed,
)
from cbrw.solver.visiting import (
    BRACKETS,
    SOLVER_METHODS,
    VisitBracket,
    VisitFields,
    first_moment_exterior,
    solve_visiting,
    solve_visiting_bracket,
)

__all__ = [
    "BRACKETS",
    "SOLVER_METHODS",
    "HalflineCertificate",
    "HalflineProfile",
    "QFields",
    "SupersolutionReport",
    "VisitBracket",
    "VisitFields",
    "certify_halfline_constant",
    "first_moment_exterior",
    "halfline_supersolution_check",
    "inverse_square",
    "left_tail_constant",
    "offspring_domination_constant",
    "q_by_flags",
    "q_by_killing",
    "q_closed",
    "q_fields",
    "q_minus_by_flags",
    "q_minus_by_killing",
    "q_minus_closed",
    "solve_halfline",
    "solve_visiting",
    "solve_visiting_bracket",
    "supersolution_check",
]

"""Morse theory on nested spectral levels, with a truncated Levi-Civita field.

The pipeline: a functional ``J(u) = int F(x, u, u') dx`` (:mod:`.problem`)
is restricted to sine levels (:mod:`.galerkin`), its critical points are
enumerated by deflated Newton (:mod:`.critical`), Morse polynomials are
checked against the Morse relation (:mod:`.morse`), and :mod:`.ladder`
tracks all of it across increasing levels.
"""

from .critical import CriticalPoint, SolverConfig, deflated_search, filter_window, morse_data, newton_solve
from .galerkin import CoefficientVector, LevelSpace, build_level, embed, energy, gradient, hessian, l2_inner, w_norm
from .ladder import LadderConfig, MatchedFamily, StabilizationTrace, match_points, psu_diagnostic, run_ladder
from .morse import MorseRelationReport, NatPoly, default_betti, morse_polynomial, verify_morse_relation
from .nonarch import Classification, LeviCivitaNumber, classify, extend_function, infinitely_close, parse_series, same_galaxy, shadow
from .problem import FunctionalSpec, ModelProblem, chafee_infante, dirichlet_energy, from_expression, validate_spec

__version__ = "0.1.0"

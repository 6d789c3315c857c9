"""Numerical toolkit for exponential sums over graded polynomial systems.

Main entry points: ``GradedSystem`` and ``parse_polynomial`` for input,
``eval_S`` for the sums, ``m_matrix``/``count_points``/``estimate_g`` for the
rank-deficiency varieties, ``b1`` for the linear block, the threshold
formulas in ``thresholds``, and ``eval_I`` for the singular integral.
"""

__version__ = "0.1.0"

from .errors import BudgetError, CirclesumError, ParseError, QuadratureError, ShapeError
from .polysys import (GradedSystem, Monomial, Polynomial, Violation, degree_part, evaluate,
                      format_polynomial, parse_polynomial, validate_system)
from .expsum import (AlphaVector, BoxSpec, ExpLinear, PolyField, Separable, alpha_norms, eval_S,
                     partial_summation_residual, partial_summation_sides)
from .weyl import DiffMatrix, entry_polynomials, gamma_eval, gamma_symbolic, m_matrix, rank_exact
from .variety import (BlockExponents, CountSeries, GEstimate, block_exponents, count_points,
                      count_series, estimate_g, gamma_ell, gamma_prime)
from .linforms import LinearBlock, b1, b1_support, restrict, restriction_gap
from .dioph import (ArcVerdict, SimultaneousWitness, arc_membership_linear, best_rational,
                    dist_to_int, find_simultaneous)
from .thresholds import (ALT_I, ALT_II, BOTH, VIOLATION, DichotomyResult, DichotomyVerdict,
                         ThresholdReport, b1_required, classify, gamma_sum, m_zero, omega_sup,
                         system_thresholds, verify_dichotomy)
from .singint import DecayFit, IntegralResult, TauVector, decay_exponent, eval_I

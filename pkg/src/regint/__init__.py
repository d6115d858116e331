"""Regularized improper integrals.

Finite-limit integrals with a critical endpoint are defined through an
initialization function ``w``; infinite-limit integrals through a termination
function ``z`` or a change of variable paired with ``w``.  The engine in
:mod:`regint.zlimit` evaluates the limits numerically and classifies each run
as converged, diverged or inconclusive.
"""

__version__ = "0.1.0"

from .chvar import (ChangeOfVariable, SecondTypeTermination, combine_zeta, make_exp_map, make_map,
                    make_power_map, pullback_antiderivative, pullback_integrand, transform_antiderivative,
                    transform_integrand, validate_map, zeta_from_w)
from .errors import (BudgetExceeded, DomainError, EvaluationError, ExprError, ExprSyntaxError,
                     MismatchedMapError, QuadratureError, RegintError, UnboundSymbolError)
from .exprparse import compile_expr, eval_expr, free_symbols, parse, to_text
from .quad import Antiderivative, Integrand, QuadResult, cumulative, integrate_proper
from .regfun import (InitializationFn, TerminationFn, ValidationReport, combine_init, combine_termination,
                     make_bspline_termination, make_linear_ramp, make_smoothstep, make_uniform_termination,
                     validate_initialization, validate_termination, w_from_z, z_from_w)
from .zlimit import (EvalRequest, LimitSchedule, TraceRow, ZResult, evaluate, trace_to_csv,
                     xi_integral_infinite, z_integral_finite, z_integral_infinite)

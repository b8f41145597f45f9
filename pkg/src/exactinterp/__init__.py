"""Exact rational multivariate polynomials recovered from approximate evaluations."""

from .bounds import (
    BoundSet,
    NodeStats,
    coefficient_error_bound,
    epsilon_multivariate,
    epsilon_univariate,
    estimate_degree_bounds,
    estimate_denominator_bound,
    node_stats,
)
from .expr import (
    Add, ApproxValue, Const, Det, Expr, ExprAst, Mul, Neg, Pow, Sub, Var,
    eval_approx, eval_exact, parse_infix,
)
from .interp import (
    DataTensor,
    Grid,
    InterpolationFailed,
    PolyTensor,
    RunReport,
    format_poly,
    interpolate_exact,
    parse_poly,
    poly_eval,
    recover_poly,
    solve_newton_univariate,
    solve_tensor,
)
from .rational import (
    ConvergentState,
    continued_fraction_expand,
    decimal_to_rational,
    recover_rational,
    recover_signed,
)

__version__ = "0.1.0"

"""Distributions on dynamic test functions and impulsive differential equations."""
from __future__ import annotations

from .catalog import FIELDS, SHAPES, heaviside_shape, linear_jump_field
from .distribution import (Atom, Distribution, TestFn, convergence_residual, delta, delta_lambda, derivative,
                           leibniz_residual, make_battery, mollify, multiply, pair)
from .dynamic import (DynamicFn, Profile, RegulatedFn, Shape, embed_regulated, heaviside, jordan_decompose, jump,
                      mul_dynamic, ordinary_part, sbv_norm, sequential_representation, sup_norm, support,
                      total_variation_dyn)
from .exceptions import CalculusError
from .expression import FieldExpr, MatrixField, VectorField, parse_field
from .ode import (Impulse, ImpulsiveIVP, Trajectory, frobenius_check, frobenius_residual, integrate_smooth, jump_map,
                  regularized_solve, shape_sensitivity, solve)
from .poly import PiecewisePoly, Poly, Side, affine_rescale, eval_side, integrate, multiply_pw, total_variation_pw
from .problem import ProblemFile, load, loads

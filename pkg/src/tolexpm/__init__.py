"""Tolerance-adaptive matrix exponential.

Chooses among Taylor polynomials, partitioned superdiagonal Padé
approximants and diagonal Padé approximants from a precomputed theta table,
so that the relative backward error stays below a requested tolerance at
the lowest count of matrix products.
"""
from .backward_error import ThetaTable, build_theta_table, compute_theta, h_series
from .linalg import CostLedger, NonFiniteError, SingularMatrixError
from .methods import (DataFileError, ExpmMode, Family, MethodData, MethodDescriptor,
                      default_method_data, load_method_data)
from .pade import FractionScheme, build_fraction_scheme, eval_diagonal_pade, eval_fraction_scheme
from .reference import reference_expm
from .selector import SelectionResult, expm, registry, select_method
from .taylor import TaylorScheme, build_taylor_scheme, eval_taylor, horner_taylor

__all__ = [
    "expm", "select_method", "registry", "SelectionResult", "ExpmMode", "Family",
    "MethodDescriptor", "MethodData", "DataFileError", "default_method_data", "load_method_data",
    "CostLedger", "SingularMatrixError", "NonFiniteError",
    "compute_theta", "h_series", "build_theta_table", "ThetaTable",
    "TaylorScheme", "build_taylor_scheme", "eval_taylor", "horner_taylor",
    "FractionScheme", "build_fraction_scheme", "eval_fraction_scheme", "eval_diagonal_pade",
    "reference_expm",
]

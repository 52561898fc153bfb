"""Dense kernel shared by every evaluator, with cost accounting.

Costs are measured in units of one dense matrix-matrix product. A linear
solve with a square coefficient matrix (any number of right-hand sides) is
charged 4/3 of a product.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

SOLVE_COST = Fraction(4, 3)


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a coefficient matrix is singular to working precision."""


class NonFiniteError(ValueError):
    """Raised when a matrix holds NaN or Inf entries at a module boundary."""


@dataclass
class CostLedger:
    products: int = 0
    solves: int = 0

    def total(self) -> Fraction:
        return self.products + SOLVE_COST * self.solves

    def __str__(self) -> str:
        return f"{self.products} products + {self.solves} solves = {float(self.total()):.4g}"


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a 2-D float or complex array, rejecting non-finite data."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.complexfloating):
        a = a.astype(np.float64, copy=False)
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return a


def as_square(a, name: str = "matrix") -> np.ndarray:
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def mat_mul(a: np.ndarray, b: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    if ledger is not None:
        ledger.products += 1
    return a @ b


def solve(q: np.ndarray, rhs: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
    """Solve ``q @ X = rhs`` by LU with partial pivoting.

    Raises SingularMatrixError when a pivot of the factorization falls below
    ``n * eps * ||q||_1``.
    """
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"coefficient matrix must be square, got {q.shape}")
    if rhs.shape[0] != q.shape[0]:
        raise ValueError(f"right-hand side has {rhs.shape[0]} rows, expected {q.shape[0]}")
    n = q.shape[0]
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(q, check_finite=False)
    pivots = np.abs(np.diag(lu))
    threshold = n * np.finfo(float).eps * one_norm(q)
    if n and (pivots.min() <= threshold or not np.all(np.isfinite(lu))):
        raise SingularMatrixError(
            f"matrix is singular to working precision (min pivot {pivots.min():.3e}, "
            f"threshold {threshold:.3e})")
    if ledger is not None:
        ledger.solves += 1
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def one_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=0).max())


def poly_linear_combo(coeffs: Sequence, powers: Sequence[np.ndarray]) -> np.ndarray:
    """Sum ``coeffs[i] * powers[i]``; free in the cost model."""
    if len(coeffs) != len(powers):
        raise ValueError(f"{len(coeffs)} coefficients for {len(powers)} matrices")
    if not powers:
        raise ValueError("need at least one matrix")
    shape = powers[0].shape
    dtype = np.result_type(*powers, *(np.asarray(c) for c in coeffs))
    out = np.zeros(shape, dtype=dtype)
    for c, p in zip(coeffs, powers):
        if p.shape != shape:
            raise ValueError(f"shape mismatch {p.shape} != {shape}")
        if c:
            out += c * p
    return out


def add_identity(a: np.ndarray, c: float = 1.0) -> np.ndarray:
    """Return ``a + c*I`` as a new array."""
    out = np.array(a, copy=True)
    out[np.diag_indices_from(out)] += c
    return out

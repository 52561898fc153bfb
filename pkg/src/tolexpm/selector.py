"""Method selection from theta lookup tables and the scaling-and-squaring driver."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .linalg import CostLedger, SingularMatrixError, as_square, mat_mul, one_norm
from .methods import (DataFileError, ExpmMode, Family, MethodData, MethodDescriptor,
                      default_method_data)

__all__ = ["ExpmMode", "Family", "MethodDescriptor", "SelectionResult", "DataFileError",
           "registry", "grid_tolerance", "scaling_for", "select_method", "expm", "SQUARING_PENALTY"]

SQUARING_PENALTY = Fraction(11, 10)

# policy(method, s) -> ranking cost; replaces cost + 1.1 s when supplied
SelectionPolicy = Callable[[MethodDescriptor, int], Fraction]


@dataclass(frozen=True)
class SelectionResult:
    method: MethodDescriptor
    s: int
    predicted_cost: Fraction
    penalized_cost: Fraction
    grid_tol: str
    theta: float


def registry(mode: ExpmMode | str = ExpmMode.GENERAL, data: MethodData | None = None) -> list[MethodDescriptor]:
    data = default_method_data() if data is None else data
    return data.registry(ExpmMode(mode))


def grid_tolerance(tol: float) -> tuple[str, float]:
    """Largest 10^-k (k = 0..16) not exceeding tol, with clamping."""
    if not tol > 0 or math.isnan(tol):
        raise ValueError(f"tolerance must be positive, got {tol}")
    if tol > 1:
        warnings.warn(f"tol={tol} clamped to 1", RuntimeWarning, stacklevel=3)
        return "1e0", 1.0
    for k in range(17):
        v = float(f"1e-{k}")
        if v <= tol:
            return (f"1e-{k}" if k else "1e0"), v
    warnings.warn(f"tol={tol} below 1e-16, using the 1e-16 column", RuntimeWarning, stacklevel=3)
    return "1e-16", 1e-16


def scaling_for(norm: float, theta: float) -> int:
    """Smallest s >= 0 with norm / 2^s <= theta."""
    if norm <= theta:
        return 0
    s = max(0, math.ceil(math.log2(norm / theta)))
    while math.ldexp(norm, -s) > theta:
        s += 1
    while s > 0 and math.ldexp(norm, -(s - 1)) <= theta:
        s -= 1
    return s


def select_method(norm: float, tol: float, mode: ExpmMode | str = ExpmMode.GENERAL,
                  table: MethodData | None = None,
                  policy: Optional[SelectionPolicy] = None) -> SelectionResult:
    """Pick the method minimizing cost + 1.1 s over the registry of `mode`.

    Ties go to the lower cost, then the higher order, then the smaller id.
    """
    if norm < 0 or not math.isfinite(norm):
        raise ValueError(f"norm must be finite and non-negative, got {norm}")
    label, gtol = grid_tolerance(tol)
    best = None
    for d in registry(mode, table):
        if not d.eligible(gtol):
            continue
        theta = d.theta[label]
        s = scaling_for(norm, theta)
        pen = policy(d, s) if policy else d.cost + SQUARING_PENALTY * s
        key = (pen, d.cost, -d.order, d.id)
        if best is None or key < best[0]:
            best = (key, SelectionResult(d, s, d.cost + s, pen, label, theta))
    if best is None:
        raise DataFileError(f"no eligible method for mode {ExpmMode(mode).value} at {label}")
    return best[1]


def expm(a, tol: float = 2.0 ** -53, mode: ExpmMode | str = ExpmMode.GENERAL,
         table: MethodData | None = None, policy: Optional[SelectionPolicy] = None):
    """e^A to relative backward error `tol`.

    Returns ``(X, SelectionResult, CostLedger)``; the ledger counts every
    product and solve, squarings included.
    """
    a = as_square(a, "A")
    sel = select_method(one_norm(a), tol, mode, table, policy)
    s = sel.s
    for attempt in range(2):
        ledger = CostLedger()
        try:
            x = sel.method.evaluate(a * 2.0 ** -s if s else a, ledger)
            break
        except SingularMatrixError:
            if attempt:
                raise
            s += 1
    if s != sel.s:
        sel = SelectionResult(sel.method, s, sel.method.cost + s,
                              sel.penalized_cost + SQUARING_PENALTY * (s - sel.s), sel.grid_tol, sel.theta)
    for _ in range(s):
        x = mat_mul(x, x, ledger)
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("overflow in scaling and squaring")
    return x, sel, ledger

"""Extended-precision reference exponential, using Arb ball arithmetic."""
from __future__ import annotations

import math
import threading

import flint
import numpy as np

from .linalg import as_square, one_norm

REFERENCE_DIGITS = 64
_lock = threading.Lock()


def _to_flint(a: np.ndarray):
    if np.iscomplexobj(a):
        rows = [[flint.acb(float(z.real), float(z.imag)) for z in row] for row in a]
        return flint.acb_mat(rows)
    return flint.arb_mat(a.tolist())


def _from_flint(m, n: int, complex_: bool) -> np.ndarray:
    out = np.empty((n, n), dtype=complex if complex_ else float)
    conv = complex if complex_ else float
    for i in range(n):
        for j in range(n):
            out[i, j] = conv(m[i, j])
    return out


def reference_expm(a, digits: int = REFERENCE_DIGITS) -> np.ndarray:
    """e^A evaluated with `digits` decimal digits, rounded to double.

    Scaling brings ||A / 2^s||_1 to at most 1/4; the Taylor sum stops once
    the a-priori bound on the next term falls below 1e-45 of the sum.
    """
    a = as_square(a, "A")
    n = a.shape[0]
    if n == 0:
        return a.copy()
    norm = one_norm(a)
    s = 0 if norm <= 0.25 else math.ceil(math.log2(norm / 0.25))
    x_norm = math.ldexp(norm, -s)
    # ||e^X|| >= e^{-||X||}, so a term below 1e-45 e^{-1/4} is below 1e-45 relative
    terms, bound, k = 0, 1.0, 0
    while True:
        k += 1
        bound *= x_norm / k
        if bound < 1e-45 * math.exp(-0.25) or x_norm == 0:
            terms = k - 1
            break
    with _lock:
        old = flint.ctx.prec
        flint.ctx.prec = int(digits * 3.33) + 32 + 2 * s
        try:
            x = _to_flint(a * 2.0 ** -s)
            one = flint.acb_mat if np.iscomplexobj(a) else flint.arb_mat
            eye = one(n, n)
            for i in range(n):
                eye[i, i] = 1
            total, term = eye, eye
            for j in range(1, terms + 1):
                term = (term * x) / j
                total = total + term
            for _ in range(s):
                total = total * total
            return _from_flint(total, n, np.iscomplexobj(a))
        finally:
            flint.ctx.prec = old

"""Backward-error analysis of exponential approximants by formal power series.

For an approximant w with ``w(x) = e^x + O(x^{n+1})`` write
``w(x) = exp(x + h(x))``; then ``h = log(e^{-x} w(x))``. Replacing the
coefficients of h by their absolute values gives a majorant ``h~`` and

    theta(tol) = max { t : h~(t) / t <= tol }

is the largest scaled norm for which the relative backward error stays
below tol. All of this is done in high precision on series truncated after
150 terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import mpmath as mp

from . import _mppoly as mpp

WORK_DPS = 200
N_TERMS = 151
THETA_MAX = 25
REL_WIDTH = mp.mpf("1e-8")


@dataclass(frozen=True)
class ScalarForm:
    """``num(x) / den(x)``; coefficients ascending, exact or decimal strings."""
    num: tuple
    den: tuple = (1,)


@dataclass
class PowerSeries:
    coeffs: list
    precision: int

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def majorant(self) -> "PowerSeries":
        return PowerSeries([abs(c) for c in self.coeffs], self.precision)

    def leading_index(self, eps=None) -> int:
        """Index of the first coefficient above `eps` (default 10^-(precision/3))."""
        eps = mp.mpf(10) ** (-(self.precision // 3)) if eps is None else eps
        for i, c in enumerate(self.coeffs):
            if abs(c) > eps:
                return i
        return len(self.coeffs)


class ThetaValue(NamedTuple):
    theta: mp.mpf
    capped: bool


# tolerance grid: label -> exact value
def grid_value(label: str) -> mp.mpf:
    if label.startswith("2^"):
        return mp.mpf(2) ** int(label[2:])
    if label.startswith("1e"):
        return mp.mpf(10) ** int(label[2:])
    raise ValueError(f"bad tolerance label {label!r}")


DECIMAL_GRID = tuple(f"1e{-k}" if k else "1e0" for k in range(17))
UNIT_ROUNDOFF_GRID = ("2^-24", "2^-53")
EXTENDED_GRID = DECIMAL_GRID + ("2^-11",) + UNIT_ROUNDOFF_GRID


def _conv(c):
    if isinstance(c, (Fraction, int)):
        return mpp.to_mpf(Fraction(c))
    return mp.mpf(c)


def _series_mul(a, b, n):
    out = [mp.mpf(0)] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j in range(min(len(b), n - i)):
            out[i + j] += x * b[j]
    return out


def _series_div(a, b, n):
    if b[0] == 0:
        raise ZeroDivisionError("denominator series has zero constant term")
    q = [mp.mpf(0)] * n
    for k in range(n):
        s = a[k] if k < len(a) else mp.mpf(0)
        for j in range(1, min(k, len(b) - 1) + 1):
            s -= b[j] * q[k - j]
        q[k] = s / b[0]
    return q


def _series_log(f, n):
    """log f for a series with f[0] = 1, via log f = integral of f'/f."""
    fp = [(k + 1) * f[k + 1] for k in range(n - 1)] + [mp.mpf(0)]
    g = _series_div(fp, f, n)
    return [mp.mpf(0)] + [g[k - 1] / k for k in range(1, n)]


def _form_of(method) -> ScalarForm:
    if isinstance(method, ScalarForm):
        return method
    if hasattr(method, "scalar_form"):
        return method.scalar_form()
    raise TypeError(f"cannot get a scalar form from {method!r}")


def series_of_method(method, n_terms: int = N_TERMS, dps: int = WORK_DPS) -> PowerSeries:
    """First `n_terms` Maclaurin coefficients of the method's scalar function."""
    with mp.workdps(dps):
        form = _form_of(method)
        num = [_conv(c) for c in form.num]
        den = [_conv(c) for c in form.den]
        coeffs = _series_div(num, den, n_terms)
    return PowerSeries(coeffs, dps)


def h_series(method, n_terms: int = N_TERMS, dps: int = WORK_DPS) -> PowerSeries:
    """Coefficients of ``log(e^{-x} w(x))``."""
    w = series_of_method(method, n_terms, dps)
    with mp.workdps(dps):
        em = [(-1) ** k / mp.factorial(k) for k in range(n_terms)]
        f = _series_mul(em, w.coeffs, n_terms)
        if abs(f[0] - 1) > mp.mpf(10) ** (-(dps // 2)):
            raise ValueError(f"e^-x w(x) has constant term {mp.nstr(f[0], 10)}, expected 1")
        f[0] = mp.mpf(1)
        return PowerSeries(_series_log(f, n_terms), dps)


def compute_theta(method, tol, h: PowerSeries | None = None, theta_max=THETA_MAX,
                  rel_width=REL_WIDTH) -> ThetaValue:
    """Largest t in (0, theta_max] with h~(t)/t <= tol, by bisection."""
    if h is None:
        h = h_series(method)
    with mp.workdps(h.precision):
        tol = grid_value(tol) if isinstance(tol, str) else mp.mpf(tol)
        if not 0 < tol <= 1:
            raise ValueError("tol must lie in (0, 1]")
        rev = [abs(c) for c in reversed(h.coeffs)]
        g = lambda t: mp.polyval(rev, t) / t
        lo, hi = mp.mpf(0), mp.mpf(theta_max)
        if g(hi) <= tol:
            return ThetaValue(hi, True)
        while hi - lo > rel_width * hi:
            mid = (lo + hi) / 2
            if g(mid) <= tol:
                lo = mid
            else:
                hi = mid
        return ThetaValue(lo, False)


@dataclass
class ThetaTable:
    tol_grid: tuple[str, ...]
    entries: dict = field(default_factory=dict)
    capped: set = field(default_factory=set)

    def theta(self, method_id: str, tol_label: str) -> float:
        return self.entries[(method_id, tol_label)]

    def methods(self) -> list[str]:
        seen = []
        for mid, _ in self.entries:
            if mid not in seen:
                seen.append(mid)
        return seen

    def column(self, tol_label: str) -> dict[str, float]:
        return {m: v for (m, t), v in self.entries.items() if t == tol_label}


def build_theta_table(methods: Iterable, grid: Sequence[str] = EXTENDED_GRID,
                      dps: int = WORK_DPS) -> ThetaTable:
    """Theta for every (method, tolerance) cell.

    `methods` yields ``(id, scalar-form source)`` pairs. A failing cell
    raises RuntimeError naming the cell.
    """
    table = ThetaTable(tuple(grid))
    for mid, src in methods:
        try:
            h = h_series(src, dps=dps)
        except Exception as exc:
            raise RuntimeError(f"series for {mid} failed: {exc}") from exc
        for label in grid:
            try:
                val = compute_theta(src, label, h=h)
            except Exception as exc:
                raise RuntimeError(f"theta({mid}, {label}) failed: {exc}") from exc
            table.entries[(mid, label)] = float(val.theta)
            if val.capped:
                table.capped.add((mid, label))
    return table

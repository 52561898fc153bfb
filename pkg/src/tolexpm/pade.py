"""Padé approximants to exp: coefficients, diagonal even/odd evaluation and
partial-fraction (partitioned) schemes.

A partitioned scheme rewrites ``r_{k,m} = p/q`` as ``p0 + sum_i num_i/den_i``
with real low-degree polynomials, so that every polynomial shares the same
precomputed powers of A and each fraction costs one multi-RHS solve.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath as mp
import numpy as np

from . import _mppoly as mpp
from .linalg import CostLedger, add_identity, mat_mul, solve

DIAGONAL_MONOLITHIC = (1, 2, 3, 5, 7, 9, 13)

# Denominator degrees of each fraction, per (k, m).
FRACTION_SHAPES = {
    (2, 1): (1,),
    (4, 2): (2,),
    (6, 3): (3,),
    (8, 4): (4,),
    (10, 5): (5,),
    (6, 4): (2, 2),
    (8, 5): (3, 2),
    (12, 8): (4, 4),
    (16, 12): (4, 4, 4),
    (4, 4): (2, 2),
    (6, 6): (2, 2, 2),
    (8, 8): (4, 4),
    (12, 12): (4, 4, 4),
}

PAYLOAD_DIGITS = 40


@dataclass(frozen=True)
class PadeCoefficients:
    k: int
    m: int
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]


def pade_poly_coeffs(k: int, m: int) -> PadeCoefficients:
    """Exact numerator/denominator coefficients of the (k, m) Padé approximant."""
    if k < 0 or m < 0:
        raise ValueError("Padé degrees must be non-negative")
    n = k + m
    p = tuple(Fraction(factorial(n - j) * factorial(k),
                       factorial(n) * factorial(k - j) * factorial(j)) for j in range(k + 1))
    q = tuple(Fraction((-1) ** j * factorial(n - j) * factorial(m),
                       factorial(n) * factorial(m - j) * factorial(j)) for j in range(m + 1))
    return PadeCoefficients(k, m, p, q)


def _horner(coeffs, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def pade_scalar(k: int, m: int, x):
    """Evaluate r_{k,m}(x) for a Python/NumPy scalar or an mpmath number.

    mpmath inputs are evaluated at the current mpmath precision from the
    exact coefficients.
    """
    pc = pade_poly_coeffs(k, m)
    if isinstance(x, (mp.mpf, mp.mpc)):
        conv = mpp.to_mpf
    else:
        conv = float
    num = _horner([conv(c) for c in pc.p], x)
    den = _horner([conv(c) for c in pc.q], x)
    if den == 0:
        raise ZeroDivisionError(f"r_{{{k},{m}}} has a pole at x={x}")
    return num / den


# --------------------------------------------------------------------------
# diagonal Padé, even/odd splitting

def eval_diagonal_pade(m: int, a: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
    """r_{m,m}(A) from ``q(A) = v - u``, ``p(A) = v + u`` with u odd, v even.

    The result is formed as ``I + solve(v - u, 2u)``, which is the same
    fraction with its unit constant split off.
    """
    if m not in DIAGONAL_MONOLITHIC:
        raise ValueError(f"no even/odd evaluation for m={m}; use a fraction scheme")
    if ledger is None:
        ledger = CostLedger()
    b = [float(c) for c in pade_poly_coeffs(m, m).p]
    n = a.shape[0]
    eye = np.eye(n, dtype=a.dtype)
    if m == 1:
        u = b[1] * a
        v0 = np.zeros_like(a)
    elif m == 2:
        a2 = mat_mul(a, a, ledger)
        u = b[1] * a
        v0 = b[2] * a2
    elif m == 13:
        a2 = mat_mul(a, a, ledger)
        a4 = mat_mul(a2, a2, ledger)
        a6 = mat_mul(a2, a4, ledger)
        u = mat_mul(a, mat_mul(a6, b[13] * a6 + b[11] * a4 + b[9] * a2, ledger)
                    + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye, ledger)
        v0 = (mat_mul(a6, b[12] * a6 + b[10] * a4 + b[8] * a2, ledger)
              + b[6] * a6 + b[4] * a4 + b[2] * a2)
    else:
        # m in (3, 5, 7, 9): even powers A^2 .. A^(m-1), then one product with A
        a2 = mat_mul(a, a, ledger)
        evens = [eye, a2]
        for _ in range(2, (m + 1) // 2):
            if len(evens) == 4:
                evens.append(mat_mul(evens[2], evens[2], ledger))  # A^8 = A^4 A^4
            else:
                evens.append(mat_mul(a2, evens[-1], ledger))
        odd = sum(b[2 * j + 1] * evens[j] for j in range(len(evens)))
        u = mat_mul(a, odd, ledger)
        v0 = sum(b[2 * j] * evens[j] for j in range(1, len(evens)))
    return add_identity(solve(add_identity(v0 - u, b[0]), 2 * u, ledger), 1.0)


# --------------------------------------------------------------------------
# denominator roots and partial fractions

@dataclass(frozen=True)
class RootFactor:
    """A real linear factor or a conjugate-pair quadratic factor of q_{k,m},
    normalised to constant term 1."""
    root: mp.mpc | mp.mpf
    degree: int

    @property
    def poly(self):
        if self.degree == 1:
            return [mp.mpf(1), -1 / self.root]
        a = self.root
        mod2 = a.real ** 2 + a.imag ** 2
        return [mp.mpf(1), -2 * a.real / mod2, 1 / mod2]


def denominator_root_pairs(k: int, m: int, dps: int = 60) -> list[RootFactor]:
    """Roots of q_{k,m} grouped into conjugate pairs (plus one real root for odd m).

    Sorted by (real part, |imaginary part|).
    """
    if m < 1:
        raise ValueError("denominator has no roots for m = 0")
    q = pade_poly_coeffs(k, m).q
    with mp.workdps(dps):
        coeffs = [mpp.to_mpf(c) for c in reversed(q)]
        try:
            roots, err = mp.polyroots(coeffs, maxsteps=200, extraprec=4 * dps, error=True)
        except mp.libmp.NoConvergence as exc:
            raise ArithmeticError(f"root finding for q_{{{k},{m}}} did not converge") from exc
        if err > mp.mpf(10) ** (-dps // 2):
            raise ArithmeticError(f"root finding for q_{{{k},{m}}} left residual {err}")
        factors = []
        tiny = mp.mpf(10) ** (-dps // 2)
        for r in roots:
            r = mp.mpc(r)
            if abs(r.imag) <= tiny * abs(r):
                factors.append(RootFactor(mp.mpf(r.real), 1))
            elif r.imag > 0:
                factors.append(RootFactor(r, 2))
        factors.sort(key=lambda f: (mp.mpc(f.root).real, abs(mp.mpc(f.root).imag)))
    if sum(f.degree for f in factors) != m or sum(f.degree == 1 for f in factors) != m % 2:
        raise ArithmeticError(f"unexpected root structure for q_{{{k},{m}}}")
    return factors


@dataclass
class FractionScheme:
    """``p0(x) + sum_i num_i(x) / den_i(x)`` with real coefficients.

    ``p0(0) = 0``, every ``den_i(0) = 1`` and every fraction equals
    ``1/len(fractions)`` at zero.
    """
    id: str
    k: int
    m: int
    p0: list
    fractions: list[tuple[list, list]]
    root_groups: tuple[tuple[int, ...], ...] = ()
    _float: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree(self) -> int:
        degs = [len(mpp.trim(self.p0)) - 1]
        for num, den in self.fractions:
            degs += [len(mpp.trim(num)) - 1, len(mpp.trim(den)) - 1]
        return max(degs)

    @property
    def cost(self) -> Fraction:
        return max(self.degree - 1, 0) + Fraction(4, 3) * len(self.fractions)

    def scalar(self, x):
        """Evaluate the decomposed form at an mpmath scalar."""
        val = mpp.evaluate(self.p0, x)
        for num, den in self.fractions:
            val += mpp.evaluate(num, x) / mpp.evaluate(den, x)
        return val

    def to_payload(self) -> dict:
        s = lambda p: [mp.nstr(c, PAYLOAD_DIGITS, strip_zeros=False) for c in mpp.trim(p)]
        return {
            "k": self.k,
            "m": self.m,
            "p0": s(self.p0),
            "fractions": [{"num": s(n), "den": s(d)} for n, d in self.fractions],
            "root_groups": [list(g) for g in self.root_groups],
        }

    @classmethod
    def from_payload(cls, ident: str, payload: dict) -> "FractionScheme":
        with mp.workdps(PAYLOAD_DIGITS + 10):
            conv = lambda p: [mp.mpf(c) for c in p]
            return cls(ident, payload["k"], payload["m"], conv(payload["p0"]),
                       [(conv(f["num"]), conv(f["den"])) for f in payload["fractions"]],
                       tuple(tuple(g) for g in payload.get("root_groups", ())))

    def float_form(self):
        """Double-precision evaluation data: (p0, [(shifted numerator, den)]).

        Shifted numerators ``num - num(0) * den`` have zero constant term; the
        constants of all fractions and of p0 add up to the identity.
        """
        if not self._float:
            p0 = [float(c) for c in self.p0]
            fr = []
            for num, den in self.fractions:
                c0 = num[0] / den[0]
                shifted = mpp.add(num, mpp.scale(den, -c0))
                fr.append(([float(c) for c in shifted], [float(c) for c in den]))
            self._float["p0"] = p0
            self._float["fractions"] = fr
        return self._float["p0"], self._float["fractions"]


def _enumerate_groupings(factors, shape):
    """All ways to split `factors` into groups whose degrees match `shape`."""
    seen = set()
    idx = range(len(factors))
    for perm in itertools.permutations(idx):
        groups, pos, ok = [], 0, True
        for deg in shape:
            g, d = [], 0
            while d < deg and pos < len(perm):
                g.append(perm[pos])
                d += factors[perm[pos]].degree
                pos += 1
            if d != deg:
                ok = False
                break
            groups.append(tuple(sorted(g)))
        if not ok or pos != len(perm):
            continue
        # groups with equal degree are interchangeable
        key = tuple(sorted(zip(shape, groups)))
        if key in seen:
            continue
        seen.add(key)
        yield tuple(groups)


def _assemble(k, m, factors, groups, dps):
    with mp.workdps(dps):
        pc = pade_poly_coeffs(k, m)
        p = [mpp.to_mpf(c) for c in pc.p]
        dens = []
        for g in groups:
            d = [mp.mpf(1)]
            for i in g:
                d = mpp.mul(d, factors[i].poly)
            dens.append(d)
        q = [mp.mpf(1)]
        for d in dens:
            q = mpp.mul(q, d)
        p0, rem = mpp.divmod_(p, q)
        # sum_j N_j * (q / D_j) = rem, deg N_j < deg D_j
        cofactors = []
        for j in range(len(dens)):
            c = [mp.mpf(1)]
            for i, d in enumerate(dens):
                if i != j:
                    c = mpp.mul(c, d)
            cofactors.append(c)
        n = m
        mat = mp.zeros(n, n)
        col = 0
        for d, cof in zip(dens, cofactors):
            for t in range(len(d) - 1):
                for r, c in enumerate(cof):
                    if r + t < n:
                        mat[r + t, col] += c
                col += 1
        rhs = mp.matrix([rem[i] if i < len(rem) else 0 for i in range(n)])
        sol = mp.lu_solve(mat, rhs)
        nums, col = [], 0
        for d in dens:
            w = len(d) - 1
            nums.append([sol[col + t] for t in range(w)])
            col += w
        # move constants: p0(0) = 0, each fraction worth 1/len at zero
        share = mp.mpf(1) / len(dens)
        fracs = []
        for num, d in zip(nums, dens):
            kappa = share - num[0]
            fracs.append((mpp.add(num, mpp.scale(d, kappa)), d))
            p0 = mpp.add(p0, [-kappa])
        p0[0] = mp.mpf(0)
        return p0, fracs


def build_fraction_scheme(k: int, m: int, shape: tuple[int, ...] | None = None,
                          root_assignment: tuple[tuple[int, ...], ...] | None = None,
                          dps: int = 60) -> FractionScheme:
    """Partial-fraction form of r_{k,m} over real root groupings.

    With no `root_assignment`, every grouping compatible with `shape` is tried
    and the one with the smallest largest absolute numerator coefficient wins.
    """
    if shape is None:
        if (k, m) not in FRACTION_SHAPES:
            raise ValueError(f"no default fraction shape for r_{{{k},{m}}}")
        shape = FRACTION_SHAPES[(k, m)]
    shape = tuple(shape)
    if sum(shape) != m or any(d < 1 for d in shape):
        raise ValueError(f"shape {shape} does not partition denominator degree {m}")
    factors = denominator_root_pairs(k, m, dps)
    if root_assignment is not None:
        groups = tuple(tuple(g) for g in root_assignment)
        if sorted(i for g in groups for i in g) != list(range(len(factors))):
            raise ValueError("root assignment must use every root factor exactly once")
        if tuple(sum(factors[i].degree for i in g) for g in groups) != shape:
            raise ValueError("root assignment does not match the shape")
        candidates = [groups]
    else:
        candidates = sorted(_enumerate_groupings(factors, shape))
        if not candidates:
            raise ValueError(f"shape {shape} cannot be realised with real coefficients")
    best = None
    for groups in candidates:
        p0, fracs = _assemble(k, m, factors, groups, dps)
        size = max(abs(c) for num, _ in fracs for c in num)
        if best is None or size < best[0]:
            best = (size, groups, p0, fracs)
    _, groups, p0, fracs = best
    return FractionScheme(f"r{k},{m}", k, m, p0, fracs, groups)


def _powers(a, degree, ledger):
    """[A, A^2, ..., A^degree], A^j = A^(j//2) A^(j - j//2)."""
    pw = [a]
    for j in range(2, degree + 1):
        pw.append(mat_mul(pw[j // 2 - 1], pw[j - j // 2 - 1], ledger))
    return pw


def _poly_tail(coeffs, pw):
    """sum_{j>=1} coeffs[j] A^j from precomputed powers."""
    out = np.zeros_like(pw[0])
    for c, p in zip(coeffs[1:], pw):
        if c:
            out += c * p
    return out


def eval_fraction_scheme(scheme: FractionScheme, a: np.ndarray,
                         ledger: CostLedger | None = None) -> np.ndarray:
    if ledger is None:
        ledger = CostLedger()
    p0, fracs = scheme.float_form()
    pw = _powers(a, max(scheme.degree, 1), ledger)
    out = _poly_tail(p0, pw)
    for num, den in fracs:
        out += solve(add_identity(_poly_tail(den, pw), den[0]), _poly_tail(num, pw), ledger)
    return add_identity(out, 1.0)

"""Test-matrix generators and the error/cost and structure benchmarks.

Random matrices come from NumPy's PCG64 generator, so a seed fixes every
byte of the CSV output.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linalg import CostLedger, one_norm, mat_mul
from .pade import eval_diagonal_pade
from .reference import reference_expm
from .selector import ExpmMode, expm, scaling_for

NORM_GRID = tuple(10.0 ** m for m in range(-3, 3))
TOL_GRID = tuple(float(f"1e-{k}") for k in range(17))
STRUCTURE_TOLS = (1e-4, 1e-8, 1e-16)
BASELINE_THETA = 5.3719  # r13,13 at unit roundoff 2^-53
BASELINE_ID = "r13,13"


@dataclass
class ExperimentConfig:
    norms: tuple = NORM_GRID
    tols: tuple = TOL_GRID
    mode: ExpmMode = ExpmMode.GENERAL
    seed: int = 0

    def __post_init__(self):
        if not self.norms or not self.tols:
            raise ValueError("norm and tolerance grids must be non-empty")
        self.mode = ExpmMode(self.mode)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def normalized(a: np.ndarray) -> np.ndarray:
    return a / one_norm(a)


def _sym(rng, n):
    u = np.triu(rng.uniform(-1, 1, (n, n)))
    return u + np.triu(u, 1).T


def _skew(rng, n):
    u = np.triu(rng.uniform(-1, 1, (n, n)), 1)
    return u - u.T


def diag_dominant(rng: np.random.Generator, n: int = 101) -> np.ndarray:
    """D + R, D = diag(-(n-1)/2 .. (n-1)/2), R uniform on [-1, 1]; normalized."""
    half = (n - 1) // 2
    d = np.diag(np.arange(-half, n - half, dtype=float))
    return normalized(d + rng.uniform(-1, 1, (n, n)))


def symplectic_form(n: int) -> np.ndarray:
    """J = [[0, I], [-I, 0]] of size 2n."""
    z, e = np.zeros((n, n)), np.eye(n)
    return np.block([[z, e], [-e, z]])


def block_diagonal_case(half: int = 26) -> np.ndarray:
    """[[0, D], [-D, 0]] with D = diag(-half .. half); Hamiltonian and skew-symmetric."""
    d = np.diag(np.arange(-half, half + 1, dtype=float))
    z = np.zeros_like(d)
    return normalized(np.block([[z, d], [-d, z]]))


def random_hamiltonian(rng: np.random.Generator, n: int = 53) -> np.ndarray:
    """[[F, H], [G, -F^T]] with G, H symmetric, entries uniform on [-1, 1]."""
    f = rng.uniform(-1, 1, (n, n))
    g, h = _sym(rng, n), _sym(rng, n)
    return normalized(np.block([[f, h], [g, -f.T]]))


def random_skew_hermitian(rng: np.random.Generator, n: int = 101) -> np.ndarray:
    """iB + C with B symmetric and C skew-symmetric."""
    return normalized(1j * _sym(rng, n) + _skew(rng, n))


def normalized_error(x: np.ndarray, ref: np.ndarray, arg: np.ndarray) -> float:
    """||X - e^A||_1 / (||A||_1 ||e^A||_1), with A the argument actually exponentiated."""
    return one_norm(x - ref) / (one_norm(arg) * one_norm(ref))


def structure_error(x: np.ndarray, j: np.ndarray) -> float:
    return one_norm(x.conj().T @ j @ x - j) / one_norm(j)


def baseline_expm(a: np.ndarray):
    """Fixed r13,13 scaling and squaring with s from theta = 5.3719."""
    s = scaling_for(one_norm(a), BASELINE_THETA)
    ledger = CostLedger()
    x = eval_diagonal_pade(13, a * 2.0 ** -s, ledger)
    for _ in range(s):
        x = mat_mul(x, x, ledger)
    return x, s, ledger


def baseline_cost(norm: float) -> Fraction:
    return Fraction(22, 3) + scaling_for(norm, BASELINE_THETA)


# --------------------------------------------------------------------------
# CSV

def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.16e}"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


BENCH_HEADER = ("mode", "h", "tol", "method", "s", "cost", "error", "baseline_cost")
STRUCTURE_HEADER = ("matrix", "h", "tol", "method", "s", "cost", "error",
                    "baseline_cost", "baseline_error", "general_method", "general_error")


def bench_error_cost(config: ExperimentConfig, matrix: np.ndarray | None = None) -> list[tuple]:
    """Rows (mode, h, tol, method, s, cost, error, baseline_cost) over the grid."""
    a = diag_dominant(rng_for(config.seed)) if matrix is None else matrix
    rows = []
    for h in config.norms:
        ha = h * a
        ref = reference_expm(ha)
        for tol in config.tols:
            x, sel, ledger = expm(ha, tol, config.mode)
            rows.append((config.mode.value, h, tol, sel.method.id, sel.s, float(ledger.total()),
                         normalized_error(x, ref, ha), float(baseline_cost(one_norm(ha)))))
    return rows


def structure_matrices(kind: str, seed: int):
    rng = rng_for(seed)
    if kind == "symplectic":
        a1 = block_diagonal_case()
        j = symplectic_form(a1.shape[0] // 2)
        return [("block", a1, j), ("hamiltonian", random_hamiltonian(rng), symplectic_form(53))]
    if kind == "unitary":
        a1 = block_diagonal_case()
        return [("block", a1, np.eye(a1.shape[0])),
                ("skew-hermitian", random_skew_hermitian(rng), np.eye(101))]
    raise ValueError(f"unknown structure kind {kind!r}")


def structure_test(config: ExperimentConfig, kind: str) -> list[tuple]:
    """Structure error of diagonal-Pade selection against the r13,13 baseline,
    with the general-mode result as a control."""
    rows = []
    for name, a, j in structure_matrices(kind, config.seed):
        for h in config.norms:
            ha = h * a
            xb, _, lb = baseline_expm(ha)
            eb = structure_error(xb, j)
            for tol in config.tols:
                x, sel, ledger = expm(ha, tol, ExpmMode.DIAGONAL_PADE)
                xg, selg, _ = expm(ha, tol, ExpmMode.GENERAL)
                rows.append((name, h, tol, sel.method.id, sel.s, float(ledger.total()),
                             structure_error(x, j), float(lb.total()), eb,
                             selg.method.id, structure_error(xg, j)))
    return rows

"""How the selector trades approximant cost against squarings.

For a few norms and tolerances, list every candidate with the scaling it
would need and its ranking cost, then run expm and compare with the
extended-precision reference.
"""
import numpy as np

from tolexpm import expm, reference_expm, registry
from tolexpm.experiments import normalized_error
from tolexpm.selector import SQUARING_PENALTY, grid_tolerance, scaling_for


def candidates(norm, tol, mode="general"):
    label, gtol = grid_tolerance(tol)
    rows = []
    for d in registry(mode):
        if not d.eligible(gtol):
            continue
        s = scaling_for(norm, d.theta[label])
        rows.append((float(d.cost + SQUARING_PENALTY * s), d.id, s, d.theta[label]))
    return sorted(rows)


def show(norm, tol, mode="general"):
    print(f"\n||A||_1 = {norm:g}, tol = {tol:g}, mode {mode}")
    for rank, ident, s, theta in candidates(norm, tol, mode)[:4]:
        print(f"  {ident:10s} theta {theta:10.4e}  s {s:2d}  ranking cost {rank:.3f}")
    rng = np.random.default_rng(1)
    b = rng.uniform(-1, 1, (30, 30))
    a = b * (norm / np.abs(b).sum(axis=0).max())
    x, sel, ledger = expm(a, tol, mode)
    err = normalized_error(x, reference_expm(a), a)
    print(f"  -> {sel.method.id}, s={sel.s}, {ledger.products} products + {ledger.solves} solves,"
          f" error {err:.2e}")


if __name__ == "__main__":
    show(0.1, 1e-8)
    show(1.0, 1e-4)
    show(10.0, 2.0 ** -53, "diagonal-pade")
    show(50.0, 1e-12, "inverse-free")

"""Symplectic and unitary defects of diagonal Pade versus general mode.

Diagonal approximants keep e^A in the group up to round-off; the cheaper
general-mode schemes leave a defect of the order of the tolerance.
"""
from tolexpm.experiments import ExperimentConfig, structure_test

if __name__ == "__main__":
    cfg = ExperimentConfig(norms=(0.1, 1.0, 10.0), tols=(1e-4, 1e-8))
    for kind in ("symplectic", "unitary"):
        print(f"\n{kind}")
        for name, h, tol, m, s, cost, err, bcost, berr, gm, gerr in structure_test(cfg, kind):
            print(f"  {name:15s} h={h:<5g} tol={tol:<6g} {m:>7} {err:8.1e} (r13,13 {berr:8.1e})"
                  f"   general {gm:>9} {gerr:8.1e}")

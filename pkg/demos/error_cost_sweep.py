"""Error and cost of the selector on the diagonally dominant test matrix.

Prints, per norm, the chosen method across a few tolerances next to the
cost of always using r13,13 at double precision.
"""
import sys

from tolexpm.experiments import ExperimentConfig, bench_error_cost

TOLS = (1e-2, 1e-4, 1e-8, 1e-12, 1e-16)

if __name__ == "__main__":
    mode = sys.argv[1] if len(sys.argv) > 1 else "general"
    rows = bench_error_cost(ExperimentConfig(tols=TOLS, mode=mode))
    print(f"{'h':>7} {'tol':>7} {'method':>9} {'s':>3} {'cost':>6} {'baseline':>8} {'error':>9}")
    for _, h, tol, method, s, cost, err, base in rows:
        print(f"{h:7g} {tol:7g} {method:>9} {s:3d} {cost:6.2f} {base:8.2f} {err:9.2e}")
    saved = sum(r[7] - r[5] for r in rows) / sum(r[7] for r in rows)
    print(f"\naverage saving over the fixed baseline: {saved:.0%}")

"""Benchmark suites and Dolan-More performance profiles.

A suite runs one problem family over a size grid with several seeded random
instances, solving each with every configured solver.  A solver "solves" a
problem when its final value is within 1e-7 (relative, shifted by 1) of the
best value any solver found on that instance; profiles then plot, for each
solver, the fraction of problems solved within a factor tau of the fastest
time.  The same machinery backs the `bench` command line tool.
"""

import tempfile
from pathlib import Path

import rcsopt as r

spec = r.SuiteSpec(
    kind="rayleigh",
    sizes=((5, 30), (8, 60)),
    runs=4,
    base_seed=0,
    solvers=("conjugate_subgradient", "subgradient"),
    solver_configs={"conjugate_subgradient": {"max_iters": 200},
                    "subgradient": {"max_iters": 400}},
)

out = r.run_suite(spec)

print("summary (means over runs):")
for row in out.summary:
    print(f"  n={row['n']:3d} m={row['m']:3d} {row['solver']:22s} "
          f"iter={row['mean_iters']:7.1f} nf={row['mean_nf']:8.1f} "
          f"time={row['mean_time_s']:.4f}s solved={row['solved']}/{row['runs']}")

print("\nbest objective value per instance:")
for problem, f_opt in sorted(out.f_opt.items()):
    print(f"  {problem}: {f_opt:.8f}")

print("\nprofile curves (fraction of problems within factor tau of fastest):")
for curve in out.profiles:
    marks = ", ".join(f"rho({tau:.0f})={curve.rho_at(tau):.2f}"
                      for tau in (1.0, 2.0, 4.0, 8.0))
    print(f"  {curve.solver}: {marks}")

# Records and profiles round-trip through CSV; reruns with the same spec
# reproduce every value except the wall times.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "records.csv"
    path.write_text(r.records_to_csv(out.records))
    again = r.records_from_csv(path.read_text())
    print("\nCSV round trip intact:", again == out.records)

print("\nthe equivalent CLI run:")
print("  bench run --suite suite.json --out results/ --jobs 4 --trace")
print("  bench profile --records results/records.csv --out profiles.csv")
print("  bench check --trajectory results/traj_<problem>_<solver>.jsonl")

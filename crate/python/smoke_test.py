"""Quick check of the Python bindings: build a problem, step it, compare
limiters and run a tiny benchmark."""

import math

import fctncd


def square(x, y):
    return 1.0 if 0.2 <= x <= 0.4 else 0.0


grid = fctncd.Grid.uniform(0.0, 1.0, 100)
problem = fctncd.Problem(square, velocity=1.0)
dt = 0.5 * fctncd.max_stable_dt(grid, problem, 0.0)
assert math.isclose(dt, 0.005), dt

start = fctncd.Field.initial(grid, problem)
for scheme in ["LOW", "DIV", "NDVL", "NDVA"]:
    for sigma in [0.0, 0.5, 1.0]:
        config = fctncd.StepConfig(scheme, sigma, dt)
        fields, reports = fctncd.run(grid, problem, config, 40)
        lo, hi = fields[-1].interior_range()
        assert -1e-12 <= lo and hi <= 1 + 1e-12, (scheme, sigma, lo, hi)
        assert all(r.converged for r in reports), (scheme, sigma)
        print(f"{scheme:4s} sigma={sigma}: range [{lo:.3g}, {hi:.6f}], "
              f"outer iterations {sum(r.iterations for r in reports)}")

y, report = fctncd.advance(grid, problem, start, fctncd.StepConfig("NDVL", 0.5, dt, oracle=True))
assert report.oracle_gap is not None and report.oracle_gap <= 1e-8, report.oracle_gap

assert fctncd.solve_node([0.25, 0.25], 0.0, 0.25) == [1.0, 0.0]
assert fctncd.solve_node([1.0], 0.5, 1.0) == [1.0]
assert fctncd.solve_node([0.0], 0.5, 1.0) is None

try:
    fctncd.StepConfig("FAST", 0.0, dt)
except ValueError as e:
    print("rejected:", e)
else:
    raise AssertionError("unknown scheme accepted")

try:
    fctncd.advance(grid, problem, start, fctncd.StepConfig("NDVA", 0.0, 10 * dt))
except ValueError as e:
    print("rejected:", e)
else:
    raise AssertionError("unstable step accepted")

bench = fctncd.Benchmark("rotation", cells=24, steps=200)
rows = bench.table(schemes=["NDVA"], sigmas=[0.0])
assert len(rows) == len(bench.windows) == 3
for row in rows:
    print(f"rotation {row['shape']}: l1={row['l1_error']:.4g} y_max={row['y_max']:.4f}")

print("smoke test passed")

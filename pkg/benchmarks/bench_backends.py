"""Time the compiled and pure-numpy kernel backends side by side.

Runs each hot kernel (eikonal sweep, batched tridiagonal solve, fused
AOS update) and one full segmentation on both backends, in separate
subprocesses so SELSEG_BACKEND is honored at import time.  Invoke from
the repository root:

    python3 benchmarks/bench_backends.py [--size 128] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json
import time

import numpy as np

from selseg.fitting import FittingSpec
from selseg.geodesic import MarkerInput, edge_speed, _seed_distances
from selseg.harness import make_fixture
from selseg.kernels import BACKEND, aos_update, solve_eikonal, solve_tridiag_batch
from selseg.solver import SolverConfig, segment, taylor_coefficient

size, repeat = json.loads(input())


def best_of(fn, *args, **kwargs):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args, **kwargs)
        times.append(time.perf_counter() - t0)
    return min(times)


fx = make_fixture("two-equal", size)
mi = MarkerInput.from_points(list(fx.markers), size, size)
q = edge_speed(fx.image)
seeds = _seed_distances(mi.region.data, q)

rng = np.random.default_rng(7)
u = rng.uniform(0.0, 1.0, (size, size))
F = rng.uniform(-1.0, 1.0, (size, size))
g = rng.uniform(0.1, 1.0, (size, size))
cfg = SolverConfig()

lower = rng.uniform(-0.2, 0.0, (size, size))
upper = rng.uniform(-0.2, 0.0, (size, size))
diag = 1.0 - lower - upper + 0.5
rhs = rng.uniform(-1.0, 1.0, (size, size))

coeff = taylor_coefficient(cfg.eps2)
aos_args = (
    u, F, g,
    cfg.lambda_tilde, cfg.penalty_weight, cfg.mu,
    cfg.tau, cfg.eps1, cfg.eps2, cfg.zeta, coeff,
)

# Warm the JIT before timing.
solve_eikonal(seeds.copy(), q)
solve_tridiag_batch(lower, diag, upper, rhs)
aos_update(*aos_args)

results = {
    "backend": BACKEND,
    "eikonal": best_of(lambda: solve_eikonal(seeds.copy(), q)),
    "tridiag": best_of(solve_tridiag_batch, lower, diag, upper, rhs),
    "aos_update": best_of(aos_update, *aos_args),
    "segment": best_of(segment, fx.image, mi, FittingSpec(model="pm"), cfg),
}
print(json.dumps(results))
"""


def run_backend(name, size, repeat):
    env = dict(os.environ, SELSEG_BACKEND=name)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER],
        input=json.dumps([size, repeat]),
        capture_output=True,
        text=True,
        env=env,
    )
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(f"backend {name} failed")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rows = [run_backend(name, args.size, args.repeat) for name in ("numba", "numpy")]
    keys = ("eikonal", "tridiag", "aos_update", "segment")
    header = f"{'kernel':<12}" + "".join(f"{r['backend']:>12}" for r in rows) + f"{'speedup':>10}"
    print(f"size {args.size}x{args.size}, best of {args.repeat}")
    print(header)
    for key in keys:
        cells = "".join(f"{r[key] * 1e3:>10.2f}ms" for r in rows)
        speed = rows[1][key] / rows[0][key]
        print(f"{key:<12}{cells}{speed:>9.1f}x")


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--N 128] [--repeat 5] [--no-run]

Each kernel is timed on the same inputs for both backends; the last block
times a whole solver run in a subprocess with ``TRIODFLOW_PURE_PYTHON`` set
or unset, which is how the fallback is selected at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from triodflow import kernels
from triodflow import scenarios as sc
from triodflow.functionals import select_pairs

RUN_SNIPPET = """
import time
from triodflow import kernels, scenarios, solver
N = {N}
t0 = time.perf_counter()
solver.run(scenarios.symmetric(N, 0.1), solver.SolverConfig(n_nodes=N, t_max={t_max}), record_series=False)
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def cases(N, seed=0):
    P = sc.endpoints_at_angles(sc.UNIT_DISC, [90, 210, 330])
    p = sc.perturbed(P, N, 0.1, seed).points
    h = np.linalg.norm(np.diff(p, axis=1), axis=2).min()
    rng = np.random.default_rng(seed)
    n = 3 * N
    lo, up = rng.uniform(-1, 0, n), rng.uniform(-1, 0, n)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=(n, 2))
    segs = p.reshape(-1, 2)
    pairs = select_pairs(N, 1500, seed)
    anchors = p[:, 1] + 0.0
    centers = np.array([[0.0, 0.0], [0.2, 0.1]])
    horizons = np.array([1.0, 2.0])
    return {
        "solve_tridiagonal": (lo, diag, up, rhs),
        "segment_intersections": (segs[:-1], segs[1:]),
        "pair_ratios": (p, pairs),
        "interior_sweep": (p, 2.5 * h * h, True),
        "implicit_split": (p, 2.5 * h * h),
        "junction_newton": (anchors, p[0, 0].copy(), np.ones(3), 50),
        "step_metrics": (p,),
        "probe_terms": (p, centers, horizons),
    }


def bench_kernels(N, repeat):
    mods = kernels.backends()
    rows = []
    for name, args in cases(N).items():
        best = {}
        for label, mod in mods.items():
            f = getattr(mod, name)
            number = max(1, int(0.05 / max(timeit.timeit(lambda: f(*args), number=1), 1e-7)))
            best[label] = min(timeit.repeat(lambda: f(*args), number=number, repeat=repeat)) / number
        rows.append((name, best))
    return list(mods), rows


def bench_run(N, t_max):
    out = {}
    for pure in ("1", "0"):
        env = dict(os.environ, TRIODFLOW_PURE_PYTHON=pure)
        r = subprocess.run([sys.executable, "-c", RUN_SNIPPET.format(N=N, t_max=t_max)],
                           env=env, capture_output=True, text=True, check=True)
        label, secs = r.stdout.split()
        out[label] = float(secs)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=128, help="nodes per curve")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--t-max", type=float, default=0.05, help="simulated time of the end-to-end run")
    ap.add_argument("--no-run", action="store_true", help="skip the end-to-end run")
    args = ap.parse_args(argv)

    labels, rows = bench_kernels(args.N, args.repeat)
    print(f"kernels at N={args.N} (best of {args.repeat}, microseconds per call)")
    print(f"{'kernel':24s}" + "".join(f"{l:>12s}" for l in labels) + f"{'speedup':>10s}")
    for name, best in rows:
        sp = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{name:24s}" + "".join(f"{best[l] * 1e6:12.1f}" for l in labels) + f"{sp:10.1f}")
    if not args.no_run:
        r = bench_run(args.N, args.t_max)
        print(f"\nsymmetric run to t={args.t_max} at N={args.N}: "
              + ", ".join(f"{k} {v:.2f} s" for k, v in r.items()))
        if "cython" in r:
            print(f"speedup {r['python'] / r['cython']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

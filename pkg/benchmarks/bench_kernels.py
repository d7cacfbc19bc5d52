"""Compiled core against the numpy fallback on the same ensemble.

Reports nanoseconds per integration step and the speedup. Both backends run
identical streams, so the step counts match; results are also cross-checked.

    python benchmarks/bench_kernels.py --n 2000 --reset det:2
"""

import argparse
import time

import numpy as np

import kramers_reset as kr
from kramers_reset import _backend


def timed(backend, spec, params, sched, n, seed, threads):
    t0 = time.perf_counter()
    s = kr.run_ensemble(spec, params, sched, None, n, seed, threads=threads, backend=backend)
    return time.perf_counter() - t0, s


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--n-python", type=int, default=None, help="fallback ensemble size (default: --n)")
    ap.add_argument("--reset", default="det:2")
    ap.add_argument("--x0", type=float, default=-2.899)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    spec = kr.PotentialSpec()
    params = kr.SimParams(x0=args.x0)
    sched = kr.parse_schedule(args.reset)
    have = _backend.available()
    print(f"backends available: {have}; schedule {sched.literal}, x0={args.x0}")

    rows = {}
    for name, n in (("compiled", args.n), ("python", args.n_python or args.n)):
        if name not in have:
            print(f"{name}: not built, skipped")
            continue
        wall, s = timed(name, spec, params, sched, n, args.seed, args.threads)
        steps = float(np.nansum(s.fpt) / params.dt)
        rows[name] = (wall, steps, s)
        print(f"{name:9s} N={n:6d} wall={wall:8.3f}s steps={steps:.3e} {1e9 * wall / steps:8.1f} ns/step")

    if len(rows) == 2:
        (wc, sc, a), (wp, sp, b) = rows["compiled"], rows["python"]
        print(f"speedup (per step): {(wp / sp) / (wc / sc):.1f}x")
        m = min(len(a), len(b))
        same = np.allclose(a.fpt[:m], b.fpt[:m], rtol=1e-9, equal_nan=True)
        print(f"first {m} trajectories agree to 1e-9: {same}")


if __name__ == "__main__":
    main()

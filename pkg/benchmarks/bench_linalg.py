"""Benchmark the two exact linear algebra backends.

The hot loop of every graded solve is row reduction of int64 matrices mod
p.  This script times the numba build against the pure-numpy fallback on
random dense systems and on a realistic workload (building the finite and
quotient resolutions of the primary corpus example), printing one table.

Run:  python benchmarks/bench_linalg.py [--sizes 50,100,200] [--repeat 3]

Backend selection inside a single process is fixed at import time via
HMF_KERNEL, so the workload rows spawn subprocesses per backend.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

P = 32003


def bench_rref(sizes, repeat):
    from hmf import _kernels

    rng = np.random.default_rng(1)
    rows = []
    for n in sizes:
        A = rng.integers(0, P, size=(n, n + 10)).astype(np.int64)
        timings = {}
        for name, fn in (("numpy", _kernels._rref_numpy),):
            best = min(
                _time_once(fn, A, P) for _ in range(repeat)
            )
            timings[name] = best
        if _kernels._HAVE_NUMBA:
            fn = _kernels._rref_numba
            _time_once(fn, A, P)  # compile outside the timing
            best = min(_time_once(fn, A, P) for _ in range(repeat))
            timings["numba"] = best
        rows.append((f"rref {n}x{n + 10}", timings))
    return rows


def _time_once(fn, A, p):
    B = np.array(A, copy=True)
    t0 = time.perf_counter()
    fn(B, p)
    return time.perf_counter() - t0


WORKLOAD = r"""
import time
from hmf.corpus import codim2_xa_yb
from hmf.resolutions import build_finite, build_infinite
from hmf.oracle import exactness_certificate
F = codim2_xa_yb()
t0 = time.perf_counter()
fin = build_finite(F)
tower = build_infinite(F, 9)
exactness_certificate(fin.complex, (1, 2), 8)
exactness_certificate(tower.complex, (1, 8), 8)
print(time.perf_counter() - t0)
"""


def bench_workload():
    timings = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ)
        env["HMF_KERNEL"] = backend
        env["PYTHONPATH"] = os.path.join(os.path.dirname(__file__), "..", "src")
        try:
            out = subprocess.run(
                [sys.executable, "-c", WORKLOAD],
                capture_output=True,
                text=True,
                env=env,
                check=True,
            )
            timings[backend] = float(out.stdout.strip().splitlines()[-1])
        except subprocess.CalledProcessError as exc:
            timings[backend] = None
            print(f"workload under {backend} failed: {exc.stderr}", file=sys.stderr)
    return [("resolution workload", timings)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="50,100,200")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-workload", action="store_true")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = bench_rref(sizes, args.repeat)
    if not args.skip_workload:
        rows += bench_workload()
    print(f"{'case':<28}{'numpy (s)':>12}{'numba (s)':>12}{'speedup':>10}")
    for case, t in rows:
        tn = t.get("numpy")
        tb = t.get("numba")
        speed = f"{tn / tb:.2f}x" if tn and tb else "-"
        print(
            f"{case:<28}"
            f"{tn if tn is not None else float('nan'):>12.4f}"
            f"{tb if tb is not None else float('nan'):>12.4f}"
            f"{speed:>10}"
        )


if __name__ == "__main__":
    main()

"""Compare the numba-compiled kernels with their numpy fallbacks.

Part 1 times each kernel pair on the same inputs in this process.  Part 2
times end-to-end solves in two subprocesses, one with ``CIRCRANK_NO_NUMBA=1``.

    python benchmarks/bench_kernels.py [--repeat 5] [--skip-solver]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from circrank import kernels
from circrank._accel import NUMBA_AVAILABLE
from circrank.matrix import BlockSpec, build_block_diagonal, build_D, complement

P = kernels.DEFAULT_PRIME


def _masks(dense):
    return np.array([sum(int(v) << j for j, v in enumerate(row)) for row in dense], dtype=np.uint64)


def _best(fn, repeat):
    fn()  # warm-up (and compilation for numba)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases():
    X = complement(build_block_diagonal(BlockSpec.parse("2;5,4,3"))).to_dense().astype(np.int64)
    big = complement(build_D(40, 7)).to_dense().astype(np.int64)
    rows = _masks(X)
    rnull = kernels._nullspace_mod_loops(X, P)
    cnull = kernels._nullspace_mod_loops(np.ascontiguousarray(X.T), P)
    cells = np.argwhere(X)
    cr, cc = cells[:, 0].astype(np.int64), cells[:, 1].astype(np.int64)
    span_masks = rows.copy()
    yield "rank_mod 40x40", lambda f: f(big, P), "_rank_mod"
    yield "nullspace_mod 12x12", lambda f: f(X, P), "_nullspace_mod"
    yield "masks_in_span 12 masks", lambda f: f(span_masks, rnull, P), "_masks_in_span"
    yield "isolation_greedy", lambda f: f(rows, cr, cc), "_isolation_greedy"
    yield "cell_rects count", lambda f: f(rows, 0, 1, rnull[:0], cnull[:0], P, 0, 1 << 20, False), "_cell_rects"
    yield "cell_rects filtered", lambda f: f(rows, 0, 1, rnull, cnull, P, 1, 1 << 16, True), "_cell_rects"


SOLVE_SNIPPET = """
import json, time
from circrank import BACKEND, BlockSpec, binary_rank_exact, build_block_diagonal, complement, complement_partition
from circrank import build_D
binary_rank_exact(build_D(4, 2))
out = {"backend": BACKEND}
for text in %r:
    s = BlockSpec.parse(text)
    X = complement(build_block_diagonal(s))
    t = time.perf_counter()
    r = binary_rank_exact(X, upper_hint=complement_partition(s))
    out[text] = [r.exact, time.perf_counter() - t]
print(json.dumps(out))
"""

SOLVE_SPECS = ["2;4,4", "2;5,5", "3;6,5", "1,3;5,6", "2;4,4,2"]


def solver_run(no_numba: bool):
    env = dict(os.environ)
    if no_numba:
        env["CIRCRANK_NO_NUMBA"] = "1"
    else:
        env.pop("CIRCRANK_NO_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET % (SOLVE_SPECS,)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-solver", action="store_true")
    args = ap.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy path can run")
        return 1
    print(f"{'kernel':<24s} {'numba ms':>10s} {'numpy ms':>10s} {'ratio':>7s}")
    for name, call, stem in kernel_cases():
        fast = getattr(kernels, stem + "_loops")
        slow = getattr(kernels, stem + "_numpy")
        tf = _best(lambda: call(fast), args.repeat)
        ts = _best(lambda: call(slow), args.repeat)
        print(f"{name:<24s} {tf * 1e3:10.3f} {ts * 1e3:10.3f} {ts / tf:7.1f}")

    if not args.skip_solver:
        a, b = solver_run(False), solver_run(True)
        print(f"\n{'complement solve':<24s} {a['backend'] + ' s':>10s} {b['backend'] + ' s':>10s} {'ratio':>7s}")
        for text in SOLVE_SPECS:
            (ea, ta), (eb, tb) = a[text], b[text]
            assert ea == eb, (text, ea, eb)
            print(f"{text + ' -> ' + str(ea):<24s} {ta:10.3f} {tb:10.3f} {tb / ta:7.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

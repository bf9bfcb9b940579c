"""Time the numba and numpy sampling paths side by side.

    python benchmarks/bench_kernels.py [--pairs N] [--repeats R] [--trials T]

Both paths consume identical uniforms, so the script also checks that they
return identical outcomes before reporting timings.
"""

import argparse
import time

import numpy as np

from hybridqc import _kernels
from hybridqc import harness
from hybridqc.scenario import preset


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=1_000_000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--trials", type=int, default=300)
    args = ap.parse_args(argv)
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not available (or HYBRIDQC_DISABLE_NUMBA is set); nothing to compare")

    rng = np.random.default_rng(0)
    n = args.pairs
    probs_row = np.array([[0.45, 0.05, 0.05, 0.45]])
    probs_many = rng.dirichlet(np.ones(4), size=n)
    u = rng.random((n, 3))
    keep = rng.random(n) < 0.9

    # warm the JIT cache
    _kernels.joint_outcomes(probs_row, u[:10], 0.03, backend="numba")
    a_nb, b_nb = _kernels.joint_outcomes(probs_many, u, 0.03, backend="numba")
    a_np, b_np = _kernels.joint_outcomes(probs_many, u, 0.03, backend="numpy")
    assert np.array_equal(a_nb, a_np) and np.array_equal(b_nb, b_np)
    _kernels.product_sum(a_nb, b_nb, keep, backend="numba")

    cases = {
        "joint_outcomes (shared probs)": lambda b: _kernels.joint_outcomes(probs_row, u, 0.03, backend=b),
        "joint_outcomes (per-pair probs)": lambda b: _kernels.joint_outcomes(probs_many, u, 0.03, backend=b),
        "single_outcomes": lambda b: _kernels.single_outcomes(probs_many[:, 0], u[:, :2], 0.03, backend=b),
        "product_sum": lambda b: _kernels.product_sum(a_nb, b_nb, keep, backend=b),
    }
    print(f"{'kernel':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}   ({n} pairs, best of {args.repeats})")
    for name, fn in cases.items():
        t_nb = best_of(lambda: fn("numba"), args.repeats)
        t_np = best_of(lambda: fn("numpy"), args.repeats)
        print(f"{name:34s} {t_nb * 1e3:10.2f} {t_np * 1e3:10.2f} {t_np / t_nb:8.2f}x")

    cfg = preset("default-5.1", trials=args.trials, master_seed=1, attack="InterceptResend")
    reports = {}
    for backend in ("numba", "numpy"):
        t0 = time.perf_counter()
        reports[backend] = harness.format_report(harness.run_scenario(cfg, backend=backend))
        reports[backend + "_t"] = time.perf_counter() - t0
    assert reports["numba"] == reports["numpy"]
    print(f"{'campaign, intercept-resend':34s} {reports['numba_t'] * 1e3:10.1f} {reports['numpy_t'] * 1e3:10.1f} "
          f"{reports['numpy_t'] / reports['numba_t']:8.2f}x   ({args.trials} trials, reports identical)")


if __name__ == "__main__":
    main()

"""Timing comparison of the compiled and pure NumPy kernel backends.

Runs the conv2d and maxpool forward/backward kernels on a few
representative shapes with both backends and prints a table of
per-call times plus the speedup.  The two backends are also checked
against each other to 1e-10 before timing, so a fast-but-wrong kernel
cannot slip through.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from absgen._kernels import get_backend

SHAPES = [
    # (batch, in_ch, H, W, out_ch, kernel, stride, padding)
    (8, 1, 28, 28, 8, 3, 1, 1),
    (16, 8, 28, 28, 16, 3, 1, 1),
    (32, 16, 14, 14, 32, 3, 2, 1),
]


def time_call(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def check_agreement(pure, native, args_fwd, args_bwd, pool_fwd):
    ref_f = pure.conv2d_forward(*args_fwd)
    got_f = native.conv2d_forward(*args_fwd)
    np.testing.assert_allclose(got_f, ref_f, atol=1e-10)
    for ref, got in zip(pure.conv2d_backward(*args_bwd),
                        native.conv2d_backward(*args_bwd)):
        np.testing.assert_allclose(got, ref, atol=1e-10)
    ref_p, ref_a = pure.maxpool_forward(*pool_fwd)
    got_p, got_a = native.maxpool_forward(*pool_fwd)
    np.testing.assert_allclose(got_p, ref_p, atol=1e-10)
    np.testing.assert_array_equal(got_a, ref_a)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per kernel (best is reported)")
    args = parser.parse_args()

    pure = get_backend("pure")
    try:
        native = get_backend("native")
    except ImportError:
        print("native backend not built; nothing to compare")
        return

    rng = np.random.default_rng(0)
    header = f"{'kernel':<26}{'shape':<22}{'pure':>10}{'native':>10}{'speedup':>9}"
    print(header)
    print("-" * len(header))

    for batch, cin, h, w, cout, ksz, stride, padding in SHAPES:
        x = rng.standard_normal((batch, cin, h, w))
        k = rng.standard_normal((cout, cin, ksz, ksz))
        y = pure.conv2d_forward(x, k, stride, padding)
        gy = rng.standard_normal(y.shape)
        pooled, arg = pure.maxpool_forward(x, 2, 2)
        gp = rng.standard_normal(pooled.shape)

        check_agreement(pure, native, (x, k, stride, padding),
                        (x, k, gy, stride, padding), (x, 2, 2))

        shape = f"{batch}x{cin}x{h}x{w}"
        rows = [
            ("conv2d_forward", lambda m: (m.conv2d_forward, (x, k, stride, padding))),
            ("conv2d_backward", lambda m: (m.conv2d_backward, (x, k, gy, stride, padding))),
            ("maxpool_forward", lambda m: (m.maxpool_forward, (x, 2, 2))),
            ("maxpool_backward", lambda m: (m.maxpool_backward, (gp, arg, h, w))),
        ]
        for name, pick in rows:
            fn_p, a_p = pick(pure)
            fn_n, a_n = pick(native)
            t_pure = time_call(fn_p, a_p, args.repeats)
            t_native = time_call(fn_n, a_n, args.repeats)
            print(f"{name:<26}{shape:<22}{t_pure * 1e3:>8.2f}ms"
                  f"{t_native * 1e3:>8.2f}ms{t_pure / t_native:>8.1f}x")


if __name__ == "__main__":
    main()

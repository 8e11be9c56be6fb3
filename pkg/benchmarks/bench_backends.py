"""Time the compiled kernels against the numpy fallback.

Runs erf and the standard activation form (with and without gradients, at a
sharpness where the transcendental path is live and at one where most
inputs take the saturated fast path), reports the median of --repeats
timings per backend, and cross-checks that the two backends agree.

Usage: python benchmarks/bench_backends.py [--size N] [--repeats K]
"""

import argparse
import statistics
import time

import numpy as np

from sau import _kernels_py

try:
    from sau import _kernels
except ImportError:
    _kernels = None


def median_seconds(fn, repeats):
    times = []
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        times.append(time.perf_counter() - started)
    return statistics.median(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=1_000_000,
                        help="array length per call (default 1e6)")
    parser.add_argument("--repeats", type=int, default=7,
                        help="timed repetitions; median reported")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    xs = rng.uniform(-6.0, 6.0, args.size)

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("compiled", _kernels))
    else:
        print("compiled extension not importable; timing the fallback only")

    cases = [
        ("erf", lambda mod: mod.erf_array(xs)),
        ("sau n=5 value only",
         lambda mod: mod.sau_arrays(xs, 0.15, 5.0, mod.FORM_STANDARD,
                                    grads=False)),
        ("sau n=5 with grads",
         lambda mod: mod.sau_arrays(xs, 0.15, 5.0, mod.FORM_STANDARD)),
        ("sau n=20000 with grads",  # saturated fast path for most inputs
         lambda mod: mod.sau_arrays(xs, 0.15, 20000.0, mod.FORM_STANDARD)),
    ]

    width = max(len(name) for name, _ in cases)
    print(f"array length {args.size}, median of {args.repeats} runs")
    for name, call in cases:
        row = [name.ljust(width)]
        seconds = {}
        for backend, mod in backends:
            seconds[backend] = median_seconds(lambda: call(mod), args.repeats)
            rate = seconds[backend] / args.size * 1e9
            row.append(f"{backend} {seconds[backend] * 1e3:8.2f} ms "
                       f"({rate:6.1f} ns/elem)")
        if len(seconds) == 2:
            row.append(f"speedup {seconds['python'] / seconds['compiled']:.1f}x")
        print("  ".join(row))

    if _kernels is not None:
        worst = float(np.max(np.abs(_kernels.erf_array(xs)
                                    - _kernels_py.erf_array(xs))))
        for form in (_kernels.FORM_STANDARD, _kernels.FORM_EXACT,
                     _kernels.FORM_ZERO_CENTERED):
            for got, want in zip(_kernels.sau_arrays(xs, 0.15, 5.0, form),
                                 _kernels_py.sau_arrays(xs, 0.15, 5.0, form)):
                worst = max(worst, float(np.max(np.abs(got - want))))
        print(f"cross-backend max abs difference: {worst:.3e}")


if __name__ == "__main__":
    main()

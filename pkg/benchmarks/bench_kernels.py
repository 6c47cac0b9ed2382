"""Time each hot kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Numba timings exclude the first (compiling) call.
"""

import argparse
import timeit

import numpy as np

from pencilspec import _kernels


def cases(rng):
    c = np.ascontiguousarray(rng.standard_normal(200) + 1j * rng.standard_normal(200))
    x = rng.uniform(-1, 1, 20000)
    z = np.ascontiguousarray((rng.standard_normal(20000) + 1j * rng.standard_normal(20000)) / 3)
    nodes = np.ascontiguousarray(z[:400])
    g = np.ascontiguousarray(rng.standard_normal(801) + 1j * rng.standard_normal(801))
    return {
        "chebyshev_clenshaw": (c, x),
        "horner": (c, z),
        "elementary_symmetric": (np.ascontiguousarray(z[:64]),),
        "hankel": (g, 400, 400, 1),
        "min_pairwise_distance": (nodes,),
        "wrap_min_gap": (np.ascontiguousarray(x[:2000]),),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    backends = sorted(_kernels.IMPLEMENTATIONS)
    inputs = cases(np.random.default_rng(0))
    print(f"{'kernel':<24}" + "".join(f"{b + ' [ms]':>14}" for b in backends) + f"{'speedup':>10}")
    for name, call_args in inputs.items():
        times = {}
        for b in backends:
            fn = _kernels.IMPLEMENTATIONS[b][name]
            fn(*call_args)
            times[b] = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat)) * 1e3
        speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        print(f"{name:<24}" + "".join(f"{times[b]:>14.3f}" for b in backends) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()

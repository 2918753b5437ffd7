"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from sfpsro.kernels import _fallback

try:
    from sfpsro.kernels import _core
except ImportError:
    _core = None


def cases(rng):
    U = rng.uniform(-1, 1, size=(30, 30))
    P = np.triu(U, 1) - np.triu(U, 1).T
    A = rng.uniform(-1, 1, size=(20, 25))
    V = rng.uniform(0, 1, size=(40, 200))
    x = rng.uniform(0, 1, size=200)
    G, b, c = V @ V.T, V @ x, float(x @ x)
    return {
        "rm_plus_symmetric 30x30": lambda m: m.rm_plus_symmetric(P, 20_000, 1e-12, 100),
        "rm_plus_bimatrix 20x25": lambda m: m.rm_plus_bimatrix(A, 20_000, 1e-12, 100),
        "fw_simplex_qp 40 pts": lambda m: m.fw_simplex_qp(G, b, c, 1000, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = {"python": _fallback}
    if _core is not None:
        impls["compiled"] = _core
    print(f"{'kernel':<26}" + "".join(f"{k:>12}" for k in impls) + ("   speedup" if len(impls) == 2 else ""))
    for name, fn in cases(np.random.default_rng(0)).items():
        times = [min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for m in impls.values()]
        line = f"{name:<26}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

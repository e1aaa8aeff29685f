"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times each kernel on both backends, checks that both return the same result,
and times a full I-TOAR run with each backend swapped in.
"""

import argparse
import time
from contextlib import contextmanager

import numpy as np

from itoar import kernels
from itoar.core import OperatorPair
from itoar.improved import itoar_run
from itoar.mor import shifted_operators, synth_system


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


@contextmanager
def backend(name):
    impl = kernels.load(name)
    saved = {k: getattr(kernels, k) for k in ("mgs_pass", "weighted_mgs_pass", "lu_factor", "lu_solve")}
    for k in saved:
        setattr(kernels, k, getattr(impl, k))
    try:
        yield
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def cases(rng):
    n, m = 2000, 40
    basis, _ = np.linalg.qr(rng.standard_normal((n, m)))
    basis = np.asfortranarray(basis)
    r = rng.standard_normal(n)

    def mgs(mod):
        out = r.copy()
        coeffs = np.zeros(m)
        mod.mgs_pass(basis, out, coeffs)
        return out

    small = np.asfortranarray(rng.standard_normal((60, 50)))
    x = rng.standard_normal(60)

    def wmgs(mod):
        out = x.copy()
        mod.weighted_mgs_pass(small, out, np.zeros(50))
        return out

    def lu(dtype, size):
        a0 = rng.standard_normal((size, size)).astype(dtype)
        b0 = rng.standard_normal((size, 1)).astype(dtype)

        def run(mod):
            a = np.array(a0, order="F")
            piv = np.zeros(size, dtype=np.intp)
            mod.lu_factor(a, piv)
            b = np.array(b0, order="F")
            mod.lu_solve(a, piv, b)
            return b

        return run

    return {
        f"mgs_pass n={n} m={m}": mgs,
        "weighted_mgs_pass 60x50": wmgs,
        "lu real n=200": lu(float, 200),
        "lu complex n=200": lu(complex, 200),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    names = kernels.available()
    if "cython" not in names:
        print("compiled kernels not built; only the python backend is available")
    rng = np.random.default_rng(0)
    mods = {name: kernels.load(name) for name in names}
    print(f"{'kernel':32s}" + "".join(f"{n:>12s}" for n in names) + "     speedup   max rel diff")
    for label, fn in cases(rng).items():
        t = {n: best_of(lambda: fn(mod), args.repeat) for n, mod in mods.items()}
        outs = [fn(mod) for mod in mods.values()]
        diff = max((np.max(np.abs(o - outs[0])) / np.max(np.abs(outs[0])) for o in outs[1:]), default=0.0)
        speed = t["python"] / t["cython"] if "cython" in t else 1.0
        print(f"{label:32s}" + "".join(f"{t[n] * 1e3:10.3f}ms" for n in names) + f"{speed:11.1f}x  {diff:12.2e}")

    system = synth_system(400, 0.0, 1e-7, 1e3)
    ops, r_m1, r_0 = shifted_operators(system, 1.0)
    A = rng.uniform(-1, 1, (300, 300))
    dense = OperatorPair.from_dense(A, rng.uniform(-1, 1, (300, 300)))
    runs = {
        "itoar_run chain n=400 k=40": lambda: itoar_run(ops, r_m1, r_0, 40),
        "itoar_run dense n=300 k=60": lambda: itoar_run(dense, rng.uniform(-1, 1, 300), rng.uniform(-1, 1, 300), 60),
    }
    for label, fn in runs.items():
        t = {}
        for name in names:
            with backend(name):
                t[name] = best_of(fn, max(1, args.repeat // 2))
        speed = t["python"] / t["cython"] if "cython" in t else 1.0
        print(f"{label:32s}" + "".join(f"{t[n] * 1e3:10.3f}ms" for n in names) + f"{speed:11.1f}x")


if __name__ == "__main__":
    main()

"""Compare the numba and numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 10,12,14]

Both paths are called explicitly through the ``backend=`` argument, so the
script does not depend on ``QHC_DISABLE_NUMBA``.  Each row reports the best
of ``--repeat`` timings after a warm-up call (which also triggers the JIT),
and checks that both paths agree.
"""

import argparse
import time

import numpy as np

from qhc import _kernels
from qhc.hamiltonian import CnfFormula, build_tfim


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_matvec(n, repeat):
    H = build_tfim(n, g=1.0)
    plans = H._get_plans()
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)

    def run(backend):
        out = np.zeros_like(psi)
        for t, (bases, offsets) in zip(H.terms, plans):
            _kernels.apply_term(psi, out, bases, offsets, t.matrix, backend=backend)
        return out

    ok = np.allclose(run("numba"), run("numpy"))
    return best_of(lambda: run("numba"), repeat), best_of(lambda: run("numpy"), repeat), ok


def bench_ising(n, repeat):
    edges = [(i, i + 1) for i in range(n - 1)]
    w = np.ones(n - 1)
    f = np.linspace(-1, 1, n)
    a = _kernels.classical_diagonal(n, edges, w, f, backend="numba")
    b = _kernels.classical_diagonal(n, edges, w, f, backend="numpy")
    return (best_of(lambda: _kernels.classical_diagonal(n, edges, w, f, backend="numba"), repeat),
            best_of(lambda: _kernels.classical_diagonal(n, edges, w, f, backend="numpy"), repeat),
            np.allclose(a, b))


def bench_cnf(n, repeat):
    rng = np.random.default_rng(1)
    clauses = [tuple(int(v) * int(s) for v, s in zip(rng.choice(np.arange(1, n + 1), 3, replace=False),
                                                    rng.choice([-1, 1], 3)))
               for _ in range(4 * n)]
    F = CnfFormula(n, clauses)
    a = _kernels.cnf_violations(n, F.clauses, backend="numba")
    b = _kernels.cnf_violations(n, F.clauses, backend="numpy")
    return (best_of(lambda: _kernels.cnf_violations(n, F.clauses, backend="numba"), repeat),
            best_of(lambda: _kernels.cnf_violations(n, F.clauses, backend="numpy"), repeat),
            np.array_equal(a, b))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--sizes", default="10,12,14")
    args = p.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy path exists")
        return 1
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'kernel':<18}{'n':>4}{'numba [ms]':>13}{'numpy [ms]':>13}{'speed-up':>10}  agree")
    for name, fn in (("tfim matvec", bench_matvec), ("ising diagonal", bench_ising), ("3-cnf violations", bench_cnf)):
        for n in sizes:
            tn, tp, ok = fn(n, args.repeat)
            print(f"{name:<18}{n:>4}{1e3 * tn:>13.3f}{1e3 * tp:>13.3f}{tp / tn:>9.2f}x  {ok}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
